# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

"""Finite-difference derivatives that respect box constraints."""

from collections.abc import Callable

import numpy as np

GRADIENT_REL_STEP: float = 1e-5
GRADIENT_MIN_STEP: float = 1e-5
HESSIAN_REL_STEP: float = 1e-4
HESSIAN_MIN_STEP: float = 1e-4
MAX_HALVINGS: int = 8


class DifferentiationError(ArithmeticError):
    pass


def step_sizes(x: np.ndarray, rel_step: float, min_step: float) -> np.ndarray:
    return np.maximum(min_step, rel_step * np.abs(x))


def _evaluate(f: Callable[[np.ndarray], np.ndarray | float], x: np.ndarray) -> np.ndarray:
    """f(x), with NaN in place of a value the function refuses to compute."""
    try:
        return np.asarray(f(x), dtype=float)
    except (ArithmeticError, np.linalg.LinAlgError):
        return np.asarray(np.nan)


def jacobian(
    f: Callable[[np.ndarray], np.ndarray | float],
    x: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    rel_step: float = GRADIENT_REL_STEP,
    min_step: float = GRADIENT_MIN_STEP,
) -> np.ndarray:
    """
    Derivative of a scalar- or vector-valued function by central differences.

    Coordinates sitting on a bound use a one-sided difference into the feasible
    box. A non-finite value at a perturbed point, or an ArithmeticError or
    LinAlgError raised there, halves that coordinate's step, up to
    MAX_HALVINGS times.

    :param f: Function of the parameter vector.
    :param x: Point of evaluation, inside [lower, upper].
    :return: Array of shape f(x).shape + (len(x),).
    """
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(f0)):
        raise DifferentiationError("Function is not finite at the evaluation point")
    out = np.empty(f0.shape + (x.size,))
    for i, h0 in enumerate(step_sizes(x, rel_step, min_step)):
        h = h0
        for _ in range(MAX_HALVINGS + 1):
            can_down = x[i] - h >= lower[i]
            can_up = x[i] + h <= upper[i]
            up = x.copy()
            up[i] += h
            down = x.copy()
            down[i] -= h
            if can_down and can_up:
                d = (_evaluate(f, up) - _evaluate(f, down)) / (2 * h)
            elif can_up:
                d = (_evaluate(f, up) - f0) / h
            elif can_down:
                d = (f0 - _evaluate(f, down)) / h
            else:
                h /= 2
                continue
            if np.all(np.isfinite(d)):
                out[..., i] = d
                break
            h /= 2
        else:
            raise DifferentiationError(
                f"Non-finite difference for coordinate {i} after {MAX_HALVINGS} halvings"
            )
    return out


def hessian(
    objective: Callable[[np.ndarray], float],
    x: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    rel_step: float = HESSIAN_REL_STEP,
    min_step: float = HESSIAN_MIN_STEP,
) -> np.ndarray:
    """
    Symmetric Hessian of a scalar function by central second differences.

    Near a bound the stencil centre is shifted inward by one step so every
    evaluation stays feasible. Errors raised by the objective inside the
    stencil count as non-finite values and halve the steps.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    h = step_sizes(x, rel_step, min_step)

    def f(z: np.ndarray) -> float:
        return float(_evaluate(objective, z))

    for _ in range(MAX_HALVINGS + 1):
        c = x.copy()
        room = (upper - lower) > 2 * h
        c[room] = np.clip(x[room], lower[room] + h[room], upper[room] - h[room])
        f0 = f(c)
        H = np.empty((n, n))
        ok = np.isfinite(f0)
        for i in range(n):
            if not ok:
                break
            ei = np.zeros(n)
            ei[i] = h[i]
            H[i, i] = (f(c + ei) - 2 * f0 + f(c - ei)) / h[i] ** 2
            for j in range(i):
                ej = np.zeros(n)
                ej[j] = h[j]
                H[i, j] = (
                    f(c + ei + ej) - f(c + ei - ej) - f(c - ei + ej) + f(c - ei - ej)
                ) / (4 * h[i] * h[j])
                H[j, i] = H[i, j]
            ok = bool(np.all(np.isfinite(H[i, : i + 1])))
        if ok:
            return (H + H.T) / 2
        h = h / 2
    raise DifferentiationError(
        f"Non-finite second difference after {MAX_HALVINGS} halvings"
    )
