"""Subset search engines over the LOO-CV score.

Three searches share one scoring seam (grid bandwidth selection per subset,
score caching, fit accounting):

* ``novas_select`` ranks singletons, then repeatedly merges the top-ranked
  subsets pairwise, keeping the best sqrt-of-budget candidates per stage and
  stopping once the relative CV gain between consecutive stage winners drops
  to the threshold.
* ``mpdp_select`` is greedy forward selection: add the single variable that
  most reduces the score, never dropping one.
* ``exhaustive_select`` enumerates every subset up to a size cap (oracle).

All three are deterministic: candidate order, ranking ties, and the parallel
scoring map are independent of the worker-thread count.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .criterion import SubsetCandidate, WeightFn, relative_gain, select_bandwidth
from .data import Dataset
from .errors import EmptyStage, TooManySubsets
from .smoothing import BandwidthGrid


@dataclass(frozen=True)
class SelectorConfig:
    """Search parameters shared by the selection engines.

    ``budget_q`` bounds the per-stage work: each stage keeps at most
    floor(sqrt(q)) subsets (q defaults to the covariate count). ``seed`` is
    carried for simulation callers; the engines themselves are deterministic.
    """

    threshold_t: float = 0.05
    budget_q: int | None = None
    max_stages: int = 10
    grid: BandwidthGrid = field(default_factory=BandwidthGrid)
    weight: WeightFn | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.threshold_t < 1.0:
            raise ValueError("threshold_t must lie strictly between 0 and 1")
        if self.budget_q is not None and self.budget_q < 4:
            raise ValueError("budget_q must be at least 4")
        if self.max_stages < 1:
            raise ValueError("max_stages must be at least 1")


@dataclass(frozen=True)
class StageRecord:
    """One stage of a search: ranked survivors plus generation accounting."""

    stage: int
    candidates: tuple[SubsetCandidate, ...]
    best: SubsetCandidate
    generated: int
    parent_skips: int
    cache_hits: int
    scored: int
    fits_evaluated: int
    subset_fits: int


@dataclass(frozen=True)
class SelectionTrace:
    """Full record of a search: per-stage rankings, result, fit counters."""

    selector: str
    stages: tuple[StageRecord, ...]
    final_subset: tuple[int, ...]
    final_score: float
    final_bandwidth: float
    fits_evaluated: int
    subset_fits: int
    cache_hits: int
    stop_reason: str

    def stage_records(self) -> list[dict]:
        """Stage dictionaries ready for line-delimited JSON serialization."""
        return [
            {
                "record": "stage",
                "stage": s.stage,
                "generated": s.generated,
                "parent_skips": s.parent_skips,
                "cache_hits": s.cache_hits,
                "scored": s.scored,
                "fits_evaluated": s.fits_evaluated,
                "subset_fits": s.subset_fits,
                "best": _candidate_dict(s.best),
                "candidates": [_candidate_dict(c) for c in s.candidates],
            }
            for s in self.stages
        ]

    def final_record(self) -> dict:
        return {
            "record": "final",
            "selector": self.selector,
            "indices": list(self.final_subset),
            "score": self.final_score,
            "bandwidth": self.final_bandwidth,
            "stop_reason": self.stop_reason,
            "fits_evaluated": self.fits_evaluated,
            "subset_fits": self.subset_fits,
            "cache_hits": self.cache_hits,
        }


def _candidate_dict(c: SubsetCandidate) -> dict:
    return {"indices": list(c.indices), "score": c.score, "bandwidth": c.bandwidth}


def retention_width(q: int, p: int) -> int:
    """Per-stage retention count: floor(sqrt(q)), at least 2, at most p."""
    return min(p, max(2, math.isqrt(q)))


def pairwise_unions(subsets) -> list[tuple[int, ...]]:
    """Canonical unions of all pairs, in deterministic scan order."""
    items = [tuple(s) for s in subsets]
    out = []
    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            out.append(tuple(sorted(set(items[a]) | set(items[b]))))
    return out


class _Scorer:
    """Scores canonical subsets once each, counting fits; thread-safe map."""

    def __init__(self, dataset: Dataset, config: SelectorConfig, threads: int | None):
        self.dataset = dataset
        self.grid = config.grid
        self.weight = config.weight
        self.threads = _effective_threads(threads)
        self.cache: dict[tuple[int, ...], SubsetCandidate] = {}
        self.fits_evaluated = 0
        self.subset_fits = 0
        self.cache_hits = 0

    def score_new(self, keys: list[tuple[int, ...]]) -> list[SubsetCandidate]:
        """Score subsets not yet in the cache, preserving input order."""
        def one(key):
            bw, score = select_bandwidth(self.dataset, key, self.grid, self.weight)
            return SubsetCandidate(key, score, bw)

        if self.threads > 1 and len(keys) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                scored = list(pool.map(one, keys))
        else:
            scored = [one(k) for k in keys]
        for cand in scored:
            self.cache[cand.indices] = cand
        self.subset_fits += len(scored)
        self.fits_evaluated += len(scored) * len(self.grid.multipliers)
        return scored


def _effective_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise ValueError("threads must be at least 1")
    return threads


def _check_engine_inputs(dataset: Dataset, config: SelectorConfig) -> int:
    if not dataset.standardized:
        raise ValueError("dataset must be standardized before selection")
    if dataset.p < 2:
        raise ValueError("selection needs at least 2 covariates")
    return config.budget_q if config.budget_q is not None else dataset.p


def novas_select(dataset: Dataset, config: SelectorConfig | None = None, *,
                 threads: int | None = None,
                 force_stages: int | None = None) -> SelectionTrace:
    """Sequential subset-merging search.

    Stage 1 scores every singleton and keeps the top p1 = floor(sqrt(q)).
    Each later stage scores the pairwise unions of the previous survivors
    (after dropping unions equal to a parent and subsets already scored) and
    keeps the best p1. The search stops when the relative gain between
    consecutive stage winners is at most the threshold, returning the earlier
    winner; it also stops at ``max_stages`` or when no new subsets appear.

    ``force_stages`` runs exactly that many stages with the stopping rule
    bypassed (used by the timing benchmark).
    """
    config = config or SelectorConfig()
    q = _check_engine_inputs(dataset, config)
    p = dataset.p
    p1 = retention_width(q, p)
    total_stages = force_stages if force_stages is not None else config.max_stages
    if total_stages < 1:
        raise ValueError("stage count must be at least 1")

    scorer = _Scorer(dataset, config, threads)
    stages: list[StageRecord] = []

    singletons = [(j,) for j in range(1, p + 1)]
    ranked = sorted(scorer.score_new(singletons), key=SubsetCandidate.sort_key)
    retained = ranked[:p1]
    stages.append(StageRecord(
        stage=1, candidates=tuple(retained), best=ranked[0],
        generated=p, parent_skips=0, cache_hits=0, scored=p,
        fits_evaluated=scorer.fits_evaluated, subset_fits=scorer.subset_fits))

    prev_best = ranked[0]
    best_seen = ranked[0]
    final = None
    stop_reason = ""

    for stage_no in range(2, total_stages + 1):
        if force_stages is None and prev_best.score == 0.0:
            final, stop_reason = prev_best, "perfect_fit"
            break

        generated = 0
        parent_skips = 0
        duplicate_hits = 0
        new_keys: list[tuple[int, ...]] = []
        pending: set[tuple[int, ...]] = set()
        parents = [c.indices for c in retained]
        for a in range(len(parents)):
            for b in range(a + 1, len(parents)):
                generated += 1
                union = tuple(sorted(set(parents[a]) | set(parents[b])))
                if union == parents[a] or union == parents[b]:
                    parent_skips += 1
                elif union in scorer.cache or union in pending:
                    duplicate_hits += 1
                else:
                    pending.add(union)
                    new_keys.append(union)
        scorer.cache_hits += duplicate_hits

        if not new_keys:
            if stage_no == 2:
                raise EmptyStage("stage-2 filtering removed every candidate")
            final, stop_reason = best_seen, "no_new_subsets"
            break

        ranked = sorted(scorer.score_new(new_keys), key=SubsetCandidate.sort_key)
        retained = ranked[:min(p1, len(ranked))]
        stages.append(StageRecord(
            stage=stage_no, candidates=tuple(retained), best=ranked[0],
            generated=generated, parent_skips=parent_skips,
            cache_hits=duplicate_hits, scored=len(new_keys),
            fits_evaluated=scorer.fits_evaluated, subset_fits=scorer.subset_fits))

        current = ranked[0]
        if current.sort_key() < best_seen.sort_key():
            best_seen = current
        if force_stages is None:
            if relative_gain(prev_best.score, current.score) <= config.threshold_t:
                final, stop_reason = prev_best, "gain_threshold"
                break
        prev_best = current
    else:
        final = best_seen
        stop_reason = "forced_stages" if force_stages is not None else "max_stages"

    return SelectionTrace(
        selector="novas", stages=tuple(stages),
        final_subset=final.indices, final_score=final.score,
        final_bandwidth=final.bandwidth,
        fits_evaluated=scorer.fits_evaluated, subset_fits=scorer.subset_fits,
        cache_hits=scorer.cache_hits, stop_reason=stop_reason)


def mpdp_select(dataset: Dataset, config: SelectorConfig | None = None, *,
                threads: int | None = None) -> SelectionTrace:
    """Greedy forward selection ("most predictive design points" style).

    Step k scores ``current + {j}`` for every remaining candidate j and adds
    the minimizer. The stopping rule matches ``novas_select``: once the
    relative gain over the previous step is at most the threshold, the set
    from before the insufficient gain is returned.
    """
    config = config or SelectorConfig()
    q = _check_engine_inputs(dataset, config)
    p = dataset.p
    cap = retention_width(q, p)

    scorer = _Scorer(dataset, config, threads)
    stages: list[StageRecord] = []
    remaining = list(range(1, p + 1))
    current: tuple[int, ...] = ()
    prev_best: SubsetCandidate | None = None
    final = None
    stop_reason = ""

    for step in range(1, config.max_stages + 1):
        if prev_best is not None and prev_best.score == 0.0:
            final, stop_reason = prev_best, "perfect_fit"
            break
        keys = [tuple(sorted(current + (j,))) for j in remaining]
        ranked = sorted(scorer.score_new(keys), key=SubsetCandidate.sort_key)
        best = ranked[0]
        stages.append(StageRecord(
            stage=step, candidates=tuple(ranked[:cap]), best=best,
            generated=len(keys), parent_skips=0, cache_hits=0, scored=len(keys),
            fits_evaluated=scorer.fits_evaluated, subset_fits=scorer.subset_fits))

        if prev_best is not None:
            if relative_gain(prev_best.score, best.score) <= config.threshold_t:
                final, stop_reason = prev_best, "gain_threshold"
                break
        added = (set(best.indices) - set(current)).pop()
        remaining.remove(added)
        current = best.indices
        prev_best = best
        if not remaining:
            final, stop_reason = prev_best, "exhausted_covariates"
            break
    else:
        final, stop_reason = prev_best, "max_stages"

    return SelectionTrace(
        selector="mpdp", stages=tuple(stages),
        final_subset=final.indices, final_score=final.score,
        final_bandwidth=final.bandwidth,
        fits_evaluated=scorer.fits_evaluated, subset_fits=scorer.subset_fits,
        cache_hits=scorer.cache_hits, stop_reason=stop_reason)


SUBSET_GUARD = 1_000_000


def exhaustive_select(dataset: Dataset, config: SelectorConfig | None = None,
                      max_size: int = 3, *,
                      threads: int | None = None) -> SubsetCandidate:
    """Score every subset of size at most ``max_size``; return the minimizer.

    Ground-truth oracle for small problems. Refuses to enumerate more than
    ``SUBSET_GUARD`` subsets.
    """
    config = config or SelectorConfig()
    _check_engine_inputs(dataset, config)
    p = dataset.p
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    sizes = range(1, min(max_size, p) + 1)
    total = sum(math.comb(p, k) for k in sizes)
    if total > SUBSET_GUARD:
        raise TooManySubsets(
            f"{total} subsets of size <= {max_size} exceeds guard {SUBSET_GUARD}")

    scorer = _Scorer(dataset, config, threads)
    keys = [combo for k in sizes
            for combo in itertools.combinations(range(1, p + 1), k)]
    scored = scorer.score_new(keys)
    return min(scored, key=SubsetCandidate.sort_key)
