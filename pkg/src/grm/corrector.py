"""Local correction: repeatedly find a suspicious point and fix its value.

The locator estimates, for each point ``b``, the rejection rate of tests
that query ``b``.  A planted error drives that rate close to 1, while a clean
point only sees the background rate.  The value at the chosen point is then
replaced by whichever field element minimises the same conditional rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameters
from .mpoly import EvalTable, index_point, point_index
from .oracle import exact_degree
from .stats import chunk_rng, chunked
from .tester import TesterSpec, estimate_rejection, run_batch, sample_maps

TABULATE_LIMIT = 2**20


def _pick_support_points(spec: TesterSpec, count: int, rng) -> np.ndarray:
    """Uniform points of ``supp_H`` as ``(count, s + t)`` coordinates."""
    q, t = spec.fs.q, spec.t
    ia = rng.integers(0, spec.H_points.shape[0], count)
    tail = rng.integers(0, q, (count, t))
    return np.hstack([spec.H_points[ia], tail])


def sample_through(spec: TesterSpec, n: int, b, count: int, rng):
    """Maps with ``T(a) = b`` for a uniform ``a`` in ``supp_H``."""
    fs = spec.fs
    b = np.asarray(b, dtype=np.int64)
    a = _pick_support_points(spec, count, rng)
    M, _ = sample_maps(fs, n, spec.arity, count, rng)
    Ma = fs.sum(fs.mul[M, a[:, None, :]], axis=2)
    c = fs.sub[b[None, :], Ma]
    return M, c


def conditional_rejection(f: EvalTable, spec: TesterSpec, b, trials: int, seed: int = 0,
                          stream: int = 21) -> float:
    """``Pr[reject | b is queried]`` with ``T`` uniform in ``C_{a,b}`` and ``a`` uniform in ``supp_H``."""
    if trials < 1:
        raise InvalidParameters("trials must be positive")
    rejects = 0
    for ci, count in chunked(trials):
        rng = chunk_rng(seed, ci, stream)
        M, c = sample_through(spec, f.m, b, count, rng)
        rejects += int(run_batch(f, spec, M, c).reject.sum())
    return rejects / trials


def screen_points(f: EvalTable, spec: TesterSpec, trials: int, seed: int = 0):
    """Per-point conditional rejection estimated from shared uniform tests.

    Each test contributes to every distinct point it queries.  Returns
    ``(rejects, hits)`` arrays over all ``q^n`` points.
    """
    fs = spec.fs
    N = fs.q**f.m
    rej_counts = np.zeros(N, dtype=np.int64)
    hit_counts = np.zeros(N, dtype=np.int64)
    size = max(8, min(256, 2_000_000 // spec.supp_H_size))
    for ci, count in chunked(trials, size):
        rng = chunk_rng(seed, ci, stream=23)
        M, c = sample_maps(fs, f.m, spec.arity, count, rng)
        res = run_batch(f, spec, M, c, keep_indices=True)
        idx = np.sort(res.indices.reshape(count, -1), axis=1)
        first = np.ones_like(idx, dtype=bool)
        first[:, 1:] = idx[:, 1:] != idx[:, :-1]
        hit_counts += np.bincount(idx[first], minlength=N)
        rows = np.broadcast_to(res.reject[:, None], idx.shape)
        rej_counts += np.bincount(idx[first & rows], minlength=N)
    return rej_counts, hit_counts


@dataclass
class Candidate:
    point: tuple
    rate: float
    zero_rate: bool = False
    ranked: list = field(default_factory=list)


def find_error_candidate(f: EvalTable, spec: TesterSpec, candidates="all", trials: int = 400,
                         seed: int = 0, screen_trials: int = 3000, top_k: int = 6) -> Candidate:
    """The point with the highest conditional rejection rate.

    With ``candidates="all"`` every point is first scored by
    :func:`screen_points` and the ``top_k`` best are re-estimated with
    :func:`conditional_rejection`.  Ties go to the lexicographically smallest point.
    """
    q, n = f.fs.q, f.m
    if isinstance(candidates, str):
        if candidates != "all":
            raise InvalidParameters("candidates must be 'all' or a list of points")
        if q**n > TABULATE_LIMIT:
            raise InvalidParameters("too many points for an exhaustive candidate sweep")
        rej, hit = screen_points(f, spec, screen_trials, seed)
        score = np.where(hit > 0, rej / np.maximum(hit, 1), 0.0)
        if not rej.any():
            return Candidate(index_point(0, q, n), 0.0, True)
        order = np.lexsort((np.arange(score.size), -score))[:top_k]
        pts = [index_point(int(i), q, n) for i in order]
    else:
        pts = [tuple(int(v) for v in b) for b in candidates]
        if not pts:
            raise InvalidParameters("empty candidate list")
    rates = [(conditional_rejection(f, spec, b, trials, seed), b) for b in pts]
    best = min(rates, key=lambda rb: (-rb[0], rb[1]))
    ranked = sorted(rates, key=lambda rb: (-rb[0], rb[1]))
    return Candidate(best[1], best[0], best[0] == 0.0, ranked)


@dataclass
class Correction:
    gamma: int
    rate: float
    rates: list
    no_improvement: bool


def best_correction(f: EvalTable, spec: TesterSpec, b, trials: int = 400, seed: int = 0) -> Correction:
    """Value at ``b`` minimising the conditional rejection rate at ``b``.

    All ``q`` candidates are scored on the same sampled maps.  Ties go to the
    smallest code; if every value ties the result is flagged ``no_improvement``.
    """
    q = f.fs.q
    pos = int(point_index(b, q))
    work = f.copy()
    rates = []
    for g in range(q):
        work.values[pos] = g
        rates.append(conditional_rejection(work, spec, b, trials, seed))
    best = min(range(q), key=lambda g: (rates[g], g))
    return Correction(best, rates[best], rates, len(set(rates)) == 1)


@dataclass
class CorrectionStep:
    point: tuple
    old: int
    new: int
    rate_before: float
    rate_after: float


@dataclass
class CorrectionTrace:
    steps: list = field(default_factory=list)
    final_verdict: str = "failed"
    reason: str = ""
    decoded: EvalTable | None = None
    confirmation_trials: int = 0

    @property
    def total_corrections(self) -> int:
        return len(self.steps)

    def as_dict(self):
        return {
            "final_verdict": self.final_verdict,
            "reason": self.reason,
            "total_corrections": self.total_corrections,
            "confirmation_trials": self.confirmation_trials,
            "steps": [
                {"point": list(s.point), "old": s.old, "new": s.new,
                 "rate_before": s.rate_before, "rate_after": s.rate_after}
                for s in self.steps
            ],
        }


def confirmation_budget(spec: TesterSpec, n: int, C: float = 50) -> int:
    """Samples needed before rate 0 is accepted: ``C q`` times the expected
    number of tests between visits to a fixed point."""
    q = spec.fs.q
    return int(math.ceil(C * q * q**n / spec.supp_H_size))


def decode(f: EvalTable, spec: TesterSpec, max_steps: int = 10, trials: int = 400, seed: int = 0,
           estimate_trials: int = 2000, confirm_C: float = 50, candidates="all",
           screen_trials: int = 3000) -> CorrectionTrace:
    """Iterative local correction.

    Each round estimates the global rejection rate on a fixed set of maps,
    locates a candidate point, picks its best value and keeps the change only
    if the global rate strictly drops.  A codeword is claimed only after a
    confirmation run of all-accepting samples and, when the table is small
    enough, an exact degree check.
    """
    if max_steps < 1:
        raise InvalidParameters("max_steps must be at least 1")
    work = f.copy()
    trace = CorrectionTrace()
    d = spec.params.d
    budget = confirmation_budget(spec, f.m, confirm_C)
    # the global estimate doubles as the confirmation run, so it never uses
    # fewer samples than the confirmation budget
    n_est = max(estimate_trials, budget)
    trace.confirmation_trials = n_est

    def global_rate(g):
        return estimate_rejection(g, spec, n_est, seed=seed, stream=31).rate

    rate = global_rate(work)
    for step in range(max_steps + 1):
        if rate == 0.0:
            if work.fs.q**work.m <= TABULATE_LIMIT and exact_degree(work) > d:
                trace.reason = "confirmation passed but exact degree exceeds d"
                return trace
            trace.final_verdict = "codeword"
            trace.decoded = work
            return trace
        if step == max_steps:
            trace.reason = "step limit reached"
            return trace
        cand = find_error_candidate(work, spec, candidates, trials, seed + step,
                                    screen_trials=screen_trials)
        if cand.zero_rate:
            trace.reason = "no point has elevated rejection"
            return trace
        applied = False
        for _, b in cand.ranked:
            corr = best_correction(work, spec, b, trials, seed + step)
            pos = int(point_index(b, work.fs.q))
            old = int(work.values[pos])
            if corr.no_improvement or corr.gamma == old:
                continue
            trial = work.copy()
            trial.values[pos] = corr.gamma
            new_rate = global_rate(trial)
            if new_rate < rate:
                trace.steps.append(CorrectionStep(b, old, corr.gamma, rate, new_rate))
                work, rate, applied = trial, new_rate, True
                break
        if not applied:
            trace.reason = "no improving correction"
            return trace
    return trace
