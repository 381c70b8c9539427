"""Seeded synthetic regression models and experiment drivers.

Five benchmark surfaces plus a linear/nonlinear blend family, all driven by
the first three covariates; remaining columns are pure noise. Noise is
calibrated to a target noise-to-signal ratio using a cached Monte Carlo
estimate of the signal variance. The optional "trap" rewrites the last
column as a deterministic combination of the first two, a redundant
covariate designed to lure greedy selectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .data import Dataset, standardize
from .selection import SelectorConfig, SelectionTrace, mpdp_select, novas_select


def _gamma_m1(a):
    return (a ** 2).sum(axis=1)


def _gamma_m2(a):
    x1, x2, x3 = a[:, 0], a[:, 1], a[:, 2]
    return np.abs(x1 * x2) + np.abs(x1 * x3) + np.abs(x2 * x3)


def _gamma_m3(a):
    return np.abs(a.prod(axis=1))


def _gamma_m4(a):
    x1, x2, x3 = a[:, 0], a[:, 1], a[:, 2]
    return (np.abs(x1 * x2) + x3 ** 2) / (2.0 + x1 * x2 * x3)


def _gamma_m5(a):
    x1, x2, x3 = a[:, 0], a[:, 1], a[:, 2]
    return (np.abs(x1 * x2) + np.abs(x1 * x3)) / (2.0 + np.abs(x2 * x3))


MODELS = {"m1": _gamma_m1, "m2": _gamma_m2, "m3": _gamma_m3,
          "m4": _gamma_m4, "m5": _gamma_m5}

ALPHA_FAMILY = "alpha_family"


def model_gamma(model: str, active: np.ndarray, alpha: float | None = None) -> np.ndarray:
    """Regression surface evaluated on an (n, 3) array of active covariates."""
    active = np.asarray(active, dtype=np.float64)
    if model == ALPHA_FAMILY:
        return (3.0 + alpha * active.sum(axis=1)
                + (1.0 - alpha) * (active ** 2).sum(axis=1))
    return MODELS[model](active)


@dataclass(frozen=True)
class ModelSpec:
    """Simulation scenario: model id, shape, noise-to-signal ratio, seed."""

    model: str
    n: int
    p: int
    nsr: float = 0.05
    alpha: float | None = None
    trap: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS and self.model != ALPHA_FAMILY:
            raise ValueError(f"unknown model {self.model!r}")
        if self.n < 10:
            raise ValueError("n must be at least 10")
        if self.p < 3:
            raise ValueError("p must be at least 3")
        if self.nsr < 0:
            raise ValueError("nsr must be nonnegative")
        if self.model == ALPHA_FAMILY:
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValueError("alpha_family needs alpha in [0, 1]")
        elif self.alpha is not None:
            raise ValueError("alpha applies only to alpha_family")
        if self.trap and self.p < 4:
            raise ValueError("trap needs p >= 4 (column p must not be active)")


_CALIBRATION_SEED = 181623
_CALIBRATION_DRAWS = 100_000


@lru_cache(maxsize=None)
def signal_variance(model: str, alpha: float | None = None) -> float:
    """Population variance of the surface, via a fixed-seed Monte Carlo."""
    rng = np.random.default_rng(_CALIBRATION_SEED)
    draws = rng.uniform(-1.0, 1.0, size=(_CALIBRATION_DRAWS, 3))
    return float(model_gamma(model, draws, alpha).var())


def generate(spec: ModelSpec) -> Dataset:
    """Draw a dataset for the scenario; identical spec gives identical bits.

    Covariates are iid Uniform[-1, 1]; the response adds Normal noise with
    variance nsr * Var(signal). With ``trap`` the last column is overwritten
    by x1^2 * |x2|^(1/3) after the full matrix is drawn, so the random
    stream is unchanged.
    """
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(-1.0, 1.0, size=(spec.n, spec.p))
    signal = model_gamma(spec.model, x[:, :3], spec.alpha)
    sigma = math.sqrt(spec.nsr * signal_variance(spec.model, spec.alpha))
    y = signal + rng.normal(0.0, sigma, size=spec.n)
    if spec.trap:
        x[:, spec.p - 1] = x[:, 0] ** 2 * np.abs(x[:, 1]) ** (1.0 / 3.0)
    return Dataset(x, y)


TRAP_CELLS = ("exact", "exact_plus_trap", "no_intruder", "intruder")


def classify_trap_outcome(subset, p: int) -> str:
    """Table cell for a selection in a trap run.

    ``exact`` is {1,2,3}; ``exact_plus_trap`` is {1,2,3,p}; ``intruder`` is
    any set touching a variable outside {1,2,3,p}; everything else (other
    subsets of {1,2,3,p}, e.g. {3,p}) counts as ``no_intruder``.
    """
    chosen = set(subset)
    if chosen == {1, 2, 3}:
        return "exact"
    if chosen == {1, 2, 3, p}:
        return "exact_plus_trap"
    if chosen <= {1, 2, 3, p}:
        return "no_intruder"
    return "intruder"


@dataclass(frozen=True)
class ExperimentReport:
    """Tally of repeated selection runs on freshly drawn datasets."""

    spec: ModelSpec
    selector: str
    replications: int
    correct_count: int
    variable_counts: dict[int, int]
    score_mean: float
    score_var: float
    trap_cells: dict[str, int] | None
    selections: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "model": self.spec.model,
            "n": self.spec.n,
            "p": self.spec.p,
            "nsr": self.spec.nsr,
            "alpha": self.spec.alpha,
            "trap": self.spec.trap,
            "seed": self.spec.seed,
            "selector": self.selector,
            "replications": self.replications,
            "correct_count": self.correct_count,
            "variable_counts": {str(k): v for k, v in self.variable_counts.items()},
            "score_mean": self.score_mean,
            "score_var": self.score_var,
            "trap_cells": self.trap_cells,
            "selections": [list(s) for s in self.selections],
        }


SELECTORS = {"novas": novas_select, "mpdp": mpdp_select}


def run_experiment(spec: ModelSpec, replications: int, selector: str = "novas",
                   config: SelectorConfig | None = None, *,
                   threads: int | None = None) -> ExperimentReport:
    """Run the selector on ``replications`` datasets seeded seed, seed+1, ...

    Counts exact recoveries of {1, 2, 3}, per-variable hits, trap-outcome
    cells when the trap column is active, and the mean/variance of the final
    CV score.
    """
    if replications < 1:
        raise ValueError("replications must be at least 1")
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}")
    select = SELECTORS[selector]

    selections: list[tuple[int, ...]] = []
    scores: list[float] = []
    for i in range(replications):
        rep_spec = replace(spec, seed=spec.seed + i)
        ds = standardize(generate(rep_spec))
        trace: SelectionTrace = select(ds, config, threads=threads)
        selections.append(trace.final_subset)
        scores.append(trace.final_score)

    correct = sum(sel == (1, 2, 3) for sel in selections)
    variable_counts = {v: sum(v in sel for sel in selections) for v in (1, 2, 3)}
    trap_cells = None
    if spec.trap:
        trap_cells = {cell: 0 for cell in TRAP_CELLS}
        for sel in selections:
            trap_cells[classify_trap_outcome(sel, spec.p)] += 1

    mean = float(np.mean(scores))
    var = float(np.var(scores, ddof=1)) if replications > 1 else 0.0
    return ExperimentReport(
        spec=spec, selector=selector, replications=replications,
        correct_count=correct, variable_counts=variable_counts,
        score_mean=mean, score_var=var, trap_cells=trap_cells,
        selections=tuple(selections))
