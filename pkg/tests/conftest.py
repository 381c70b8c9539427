"""Shared fixtures. The session-scoped experiment runs are the expensive
part of the suite and are reused by both the behavioural tests and the
acceptance gate."""

import os

import numpy as np
import pytest

from novas import Dataset, ModelSpec, run_experiment, standardize
from novas.selection import SelectorConfig

WORKERS = os.cpu_count() or 1


@pytest.fixture(scope="session")
def m1_reports():
    """m1, n=100, p=100, 20 replications, one report per stopping threshold."""
    spec = ModelSpec("m1", n=100, p=100, nsr=0.05, seed=0)
    return {
        t: run_experiment(spec, 20, "novas",
                          SelectorConfig(threshold_t=t), threads=WORKERS)
        for t in (0.05, 0.2, 0.5)
    }


@pytest.fixture(scope="session")
def m5_report():
    """m5, n=50, p=100, 20 replications: the hard regime."""
    spec = ModelSpec("m5", n=50, p=100, nsr=0.05, seed=0)
    return run_experiment(spec, 20, "novas", threads=WORKERS)


@pytest.fixture(scope="session")
def trap_reports():
    """m4 with the redundant column, n=200, p=50, both selectors, 10 reps."""
    spec = ModelSpec("m4", n=200, p=50, nsr=0.05, trap=True, seed=0)
    return {name: run_experiment(spec, 10, name, threads=WORKERS)
            for name in ("novas", "mpdp")}


def make_affine_dataset(seed, n, d, intercept=0.7):
    """Standardized covariates with a noiseless affine response."""
    rng = np.random.default_rng(seed)
    base = standardize(Dataset(rng.uniform(-1, 1, (n, d)), np.zeros(n)))
    slope = np.arange(1, d + 1, dtype=float)
    y = intercept + base.x @ slope
    return Dataset(base.x, y, standardized=True)
