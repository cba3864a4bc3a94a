# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
from scipy.special import expit

from srocmeta.data.records import Dataset, StudyRecord

from .config import SimConfig


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one replicate, fixed by (seed, index) alone."""
    return np.random.default_rng([seed, index])


def _cumulative_counts(rng: np.random.Generator, n: int, p: np.ndarray) -> tuple[int, ...]:
    # One latent uniform per subject; a subject counts at threshold j when its
    # uniform falls below p_j, so counts are Bin(n, p_j) and nested across j.
    u = np.sort(rng.random(n))
    return tuple(int(c) for c in np.searchsorted(u, p, side="left"))


def generate_study(
    cfg: SimConfig, rng: np.random.Generator, study_id: str
) -> StudyRecord:
    t = cfg.theta
    z1, z2 = rng.standard_normal(2)
    a1 = t.alpha1 + math.sqrt(t.tau1_sq) * z1
    a0 = t.alpha0 + math.sqrt(t.tau0_sq) * (t.rho * z1 + math.sqrt(1.0 - t.rho**2) * z2)
    n1 = int(rng.integers(cfg.n_range[0], cfg.n_range[1], endpoint=True))
    n0 = int(rng.integers(cfg.n_range[0], cfg.n_range[1], endpoint=True))
    x = np.asarray(cfg.thresholds, dtype=float)
    return StudyRecord(
        study_id=study_id,
        thresholds=tuple(float(v) for v in x),
        tp=_cumulative_counts(rng, n1, expit(a1 + t.gamma1 * x)),
        tn=_cumulative_counts(rng, n0, expit(a0 + t.gamma0 * x)),
        n_diseased=n1,
        n_nondiseased=n0,
    )


def generate_dataset(cfg: SimConfig, rng: np.random.Generator) -> Dataset:
    """
    One synthetic meta-analysis with every study reporting the full threshold grid.

    Study intercepts are bivariate normal around (alpha1, alpha0) with the
    configured between-study covariance; group sizes are uniform on n_range.
    """
    records = [
        generate_study(cfg, rng, f"S{k + 1:03d}") for k in range(cfg.n_studies)
    ]
    return Dataset.from_records(records, cfg.correction)


def _subset(rec: StudyRecord, keep: np.ndarray) -> StudyRecord:
    return StudyRecord(
        study_id=rec.study_id,
        thresholds=tuple(rec.thresholds[i] for i in keep),
        tp=tuple(rec.tp[i] for i in keep),
        tn=tuple(rec.tn[i] for i in keep),
        n_diseased=rec.n_diseased,
        n_nondiseased=rec.n_nondiseased,
    )


def apply_mcar(ds: Dataset, cfg: SimConfig, rng: np.random.Generator) -> Dataset:
    """
    Drop thresholds completely at random.

    Each study keeps a uniformly chosen subset whose size is uniform on
    1..m_max. When no study keeps its full set, the last study is restored.
    """
    if cfg.m_max == 1:
        return ds
    kept: list[StudyRecord] = []
    full = False
    for rec in ds.records:
        size = int(rng.integers(1, rec.m, endpoint=True))
        keep = np.sort(rng.choice(rec.m, size=size, replace=False))
        full = full or size == rec.m
        kept.append(_subset(rec, keep))
    if not full:
        kept[-1] = ds.records[-1]
    return Dataset.from_records(kept, ds.policy, ds.tolerance)
