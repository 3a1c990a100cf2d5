"""Exact selection of K classifiers and their per-class weights.

The mixed-integer model is solved exactly: the binary selection layer is
enumerated (or branch-and-bound searched for large pools) and each candidate
subset's continuous weight problem goes to the dense QP solver. The weight
model, stated over accuracies ``v`` and weights ``w``:

    maximize (1/m) sum_ij w_ij v_ij
             - lam * (alpha * sum_ij w_ij + (1-alpha)/2 * sum_ij w_ij**2)

subject to the constraint families, numbered as in the package README:

    (2) x_i in {0, 1}                 (3) w_ij >= 0
    (4) sum_i x_i == K                (5) sum_i w_ij == 1 per class
    (6) sum_j w_ij <= m * x_i         (7) sum_j w_ij + M(1 - x_i) >= eps
    (8) sum_i w_ij v_ij >= mean_i(v_ij) + eps per class
    (9) (1/m) sum_ij w_ij v_ij >= mean_ij(v_ij) + eps

The (8)/(9) right-hand averages always divide by the full pool size n, not
the subset size.
"""

from __future__ import annotations

import heapq
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    AccuracyMatrix,
    HyperParams,
    ObjectiveBreakdown,
    SelectionVector,
    WeightMatrix,
    objective_value,
)
from .qpsolve import QpProblem, QpSolution, QpStatus, solve_qp

TIE_TOL = 1e-9
VALIDATION_TOL = 1e-6


class AllSubsetsInfeasible(RuntimeError):
    """No classifier subset admits weights satisfying the accuracy floors.

    Happens when no weighting can beat the uniform per-class average by the
    required margin, e.g. a single classifier or identical per-class
    accuracies.
    """

    def __init__(self, message: str, subset_rank=()):
        super().__init__(message)
        self.subset_rank = tuple(subset_rank)


@dataclass(frozen=True)
class SubsetResult:
    """Outcome of one candidate subset's weight subproblem."""

    subset: tuple[int, ...]
    status: QpStatus
    objective: float | None


@dataclass(frozen=True)
class MipSolution:
    selection: SelectionVector
    weights: WeightMatrix
    objective: ObjectiveBreakdown
    subset_rank: tuple[SubsetResult, ...]


@dataclass(frozen=True)
class ConstraintCheck:
    constraint_id: int
    name: str
    satisfied: bool
    worst_violation: float
    location: str | None = None


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]
    tol: float

    @property
    def conformant(self) -> bool:
        return all(c.satisfied for c in self.checks)

    def check(self, constraint_id: int) -> ConstraintCheck:
        for c in self.checks:
            if c.constraint_id == constraint_id:
                return c
        raise KeyError(constraint_id)


def enumerate_subsets(n: int, k: int):
    """All size-k classifier index subsets, lexicographic."""
    if n < 1 or n > 30:
        raise ValueError(f"classifier pool size must be in 1..30, got {n}")
    if k < 1 or k > n:
        raise ValueError(f"ensemble size must be in 1..{n}, got {k}")
    return itertools.combinations(range(n), k)


def build_subset_problem(
    v: AccuracyMatrix, params: HyperParams, subset: tuple[int, ...]
) -> QpProblem:
    """Continuous weight subproblem for a fixed selected subset.

    Variables are the selected classifiers' weights in classifier-major
    order; unselected rows are fixed at zero by omission. The inequality
    block carries, in order: the per-class accuracy floors (8), the
    per-selected-classifier weight floors from (7), and the overall
    accuracy floor (9).
    """
    vals = v.values
    n, m = vals.shape
    k = len(subset)
    nv = k * m
    lam, alpha, eps = params.lam, params.alpha, params.epsilon

    sub = vals[list(subset), :]  # (k, m)
    c = (sub / m - lam * alpha).reshape(nv)
    q = np.full(nv, lam * (1.0 - alpha) / 2.0)

    a_eq = np.zeros((m, nv))
    for j in range(m):
        a_eq[j, j::m] = 1.0
    b_eq = np.ones(m)

    a_in = np.zeros((m + k + 1, nv))
    b_in = np.empty(m + k + 1)
    for j in range(m):
        a_in[j, j::m] = sub[:, j]
        b_in[j] = vals[:, j].mean() + eps
    for li in range(k):
        a_in[m + li, li * m:(li + 1) * m] = 1.0
        b_in[m + li] = eps
    a_in[m + k] = sub.reshape(nv) / m
    b_in[m + k] = vals.mean() + eps
    return QpProblem(q, c, a_eq, b_eq, a_in, b_in)


def _subset_obviously_infeasible(vals: np.ndarray, subset, eps: float) -> bool:
    # even all mass on the subset's best classifier cannot clear a class floor
    sub = vals[list(subset), :]
    return bool(np.any(sub.max(axis=0) < vals.mean(axis=0) + eps))


def _embed(w_flat: np.ndarray, subset, n: int, m: int) -> np.ndarray:
    w = np.zeros((n, m))
    for li, i in enumerate(subset):
        w[i] = w_flat[li * m:(li + 1) * m]
    return w


def _solve_subset(v, params, subset, tol):
    if _subset_obviously_infeasible(v.values, subset, params.epsilon):
        return None
    return solve_qp(build_subset_problem(v, params, subset), tol=tol)


def solve_weighting(
    v: AccuracyMatrix,
    params: HyperParams,
    workers: int = 1,
    method: str = "auto",
    tol: float = 1e-8,
) -> MipSolution:
    """Globally optimal selection + weights for ensemble size ``params.k``.

    method: "enumerate" solves every C(n, K) subset (the default below 21
    classifiers), "bnb" runs best-first branch-and-bound on the relaxed
    selection, "auto" picks between them. Ties in objective (within 1e-9)
    resolve to the lexicographically smallest subset under enumeration.

    Raises AllSubsetsInfeasible when no subset admits feasible weights.
    """
    n, m = v.n, v.m
    if params.k > n:
        raise ValueError(f"ensemble size {params.k} exceeds pool size {n}")
    if method not in ("auto", "enumerate", "bnb"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "enumerate" if n <= 20 else "bnb"
    if method == "bnb":
        return _solve_bnb(v, params, tol)

    subsets = list(enumerate_subsets(n, params.k))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(
                pool.map(lambda s: _solve_subset(v, params, s, tol), subsets)
            )
    else:
        solutions = [_solve_subset(v, params, s, tol) for s in subsets]

    results: list[SubsetResult] = []
    best: tuple[float, tuple[int, ...], QpSolution] | None = None
    for subset, sol in zip(subsets, solutions):
        if sol is None:
            results.append(SubsetResult(subset, QpStatus.INFEASIBLE, None))
            continue
        if sol.status is QpStatus.OPTIMAL:
            results.append(SubsetResult(subset, sol.status, sol.objective))
            if best is None or sol.objective > best[0] + TIE_TOL:
                best = (sol.objective, subset, sol)
        else:
            if sol.status is QpStatus.MAX_ITERATIONS:
                warnings.warn(
                    f"subset {subset}: weight subproblem did not converge; "
                    "excluded from the search"
                )
            results.append(SubsetResult(subset, sol.status, None))

    rank = tuple(
        sorted(
            results,
            key=lambda r: (-(r.objective if r.objective is not None else -math.inf),
                           r.subset),
        )
    )
    if best is None:
        raise AllSubsetsInfeasible(
            f"all {len(subsets)} subsets of size {params.k} are infeasible: "
            "no weighting beats the uniform accuracy floors",
            subset_rank=rank,
        )
    objective, subset, sol = best
    selection = SelectionVector.from_indices(subset, n)
    weights = WeightMatrix(_embed(sol.w, subset, n, m))
    return MipSolution(
        selection=selection,
        weights=weights,
        objective=objective_value(v, weights, params),
        subset_rank=rank,
    )


# --- branch and bound over the relaxed selection ----------------------------


def _build_relaxation(v, params, fixed: dict[int, int]) -> QpProblem:
    vals = v.values
    n, m = vals.shape
    nv = n * m + n  # weights then selection flags
    lam, alpha, eps, big_m = params.lam, params.alpha, params.epsilon, params.big_m

    c = np.zeros(nv)
    c[: n * m] = (vals / m - lam * alpha).reshape(n * m)
    q = np.zeros(nv)
    q[: n * m] = lam * (1.0 - alpha) / 2.0

    a_eq = np.zeros((m + 1 + len(fixed), nv))
    b_eq = np.empty(m + 1 + len(fixed))
    for j in range(m):
        a_eq[j, j:n * m:m] = 1.0
        b_eq[j] = 1.0
    a_eq[m, n * m:] = 1.0
    b_eq[m] = float(params.k)
    for r, (i, val) in enumerate(sorted(fixed.items())):
        a_eq[m + 1 + r, n * m + i] = 1.0
        b_eq[m + 1 + r] = float(val)

    mi = m + 1 + 3 * n
    a_in = np.zeros((mi, nv))
    b_in = np.empty(mi)
    for j in range(m):  # per-class accuracy floor (8)
        a_in[j, j:n * m:m] = vals[:, j]
        b_in[j] = vals[:, j].mean() + eps
    a_in[m, : n * m] = vals.reshape(n * m) / m  # overall floor (9)
    b_in[m] = vals.mean() + eps
    for i in range(n):
        r = m + 1 + 3 * i
        # (6): m x_i - sum_j w_ij >= 0
        a_in[r, i * m:(i + 1) * m] = -1.0
        a_in[r, n * m + i] = float(m)
        b_in[r] = 0.0
        # (7): sum_j w_ij - M x_i >= eps - M
        a_in[r + 1, i * m:(i + 1) * m] = 1.0
        a_in[r + 1, n * m + i] = -big_m
        b_in[r + 1] = eps - big_m
        # x_i <= 1
        a_in[r + 2, n * m + i] = -1.0
        b_in[r + 2] = -1.0
    # normalize rows: the big-M coefficients otherwise wreck conditioning
    norms = np.maximum(np.abs(a_in).max(axis=1), 1.0)
    a_in /= norms[:, None]
    b_in /= norms
    return QpProblem(q, c, a_eq, b_eq, a_in, b_in)


def _solve_bnb(v, params, tol, max_nodes: int = 100_000) -> MipSolution:
    n, m = v.n, v.m
    counter = itertools.count()
    incumbent: tuple[float, tuple[int, ...], QpSolution] | None = None
    explored: list[SubsetResult] = []

    def try_subset(subset):
        nonlocal incumbent
        exact = _solve_subset(v, params, subset, tol)
        if exact is not None and exact.status is QpStatus.OPTIMAL:
            explored.append(SubsetResult(subset, exact.status, exact.objective))
            if incumbent is None or exact.objective > incumbent[0] + TIE_TOL or (
                abs(exact.objective - incumbent[0]) <= TIE_TOL
                and subset < incumbent[1]
            ):
                incumbent = (exact.objective, subset, exact)
        else:
            explored.append(SubsetResult(subset, QpStatus.INFEASIBLE, None))

    root = solve_qp(_build_relaxation(v, params, {}), tol=tol)
    if root.status is QpStatus.INFEASIBLE:
        raise AllSubsetsInfeasible(
            "selection relaxation infeasible: no weighting beats the uniform "
            "accuracy floors"
        )
    root_bound = root.objective if root.status is QpStatus.OPTIMAL else math.inf
    root_x = root.w[n * m:] if root.status is QpStatus.OPTIMAL else None
    heap = [(-root_bound, next(counter), {}, root_x)]
    nodes = 0
    while heap:
        neg_bound, _, fixed, x = heapq.heappop(heap)
        bound = -neg_bound
        if incumbent is not None and bound <= incumbent[0] + TIE_TOL:
            continue
        nodes += 1
        if nodes > max_nodes:
            raise RuntimeError(f"branch-and-bound exceeded {max_nodes} nodes")
        if x is not None:
            frac = np.abs(x - np.round(x))
            if frac.max() <= 1e-6:
                subset = tuple(int(i) for i in np.flatnonzero(np.round(x) > 0.5))
                try_subset(subset)
                continue
            branch_i = int(np.argmax(frac))
        else:
            branch_i = min(i for i in range(n) if i not in fixed)
        for val in (1, 0):
            child_fixed = dict(fixed)
            child_fixed[branch_i] = val
            ones = sum(child_fixed.values())
            zeros = len(child_fixed) - ones
            if ones > params.k or zeros > n - params.k:
                continue
            if len(child_fixed) == n:
                try_subset(tuple(i for i, f in sorted(child_fixed.items()) if f))
                continue
            child = solve_qp(_build_relaxation(v, params, child_fixed), tol=tol)
            if child.status is QpStatus.INFEASIBLE:
                continue
            if child.status is QpStatus.OPTIMAL:
                child_bound = min(bound, child.objective)
                child_x = child.w[n * m:]
            else:
                # unsolved relaxation: inherit the parent's valid bound and
                # keep branching on the fixing order
                child_bound = bound
                child_x = None
            if incumbent is not None and child_bound <= incumbent[0] + TIE_TOL:
                continue
            heapq.heappush(
                heap, (-child_bound, next(counter), child_fixed, child_x)
            )

    if incumbent is None:
        raise AllSubsetsInfeasible(
            f"all subsets of size {params.k} are infeasible",
            subset_rank=tuple(explored),
        )
    objective, subset, sol = incumbent
    selection = SelectionVector.from_indices(subset, n)
    weights = WeightMatrix(_embed(sol.w, subset, n, m))
    rank = tuple(
        sorted(
            explored,
            key=lambda r: (-(r.objective if r.objective is not None else -math.inf),
                           r.subset),
        )
    )
    return MipSolution(
        selection=selection,
        weights=weights,
        objective=objective_value(v, weights, params),
        subset_rank=rank,
    )


# --- literal constraint validation ------------------------------------------


def validate_constraints(
    v: AccuracyMatrix,
    weights: WeightMatrix,
    selection: SelectionVector,
    params: HyperParams,
    tol: float = VALIDATION_TOL,
) -> ConstraintReport:
    """Check a candidate solution against every constraint family (2)-(9).

    Always returns a full report; a solution is conformant iff every check
    passes at ``tol``. Equality families report absolute deviation,
    inequality families the amount by which the bound is missed.
    """
    vals = v.values
    n, m = vals.shape
    w = weights.w
    x = np.asarray(selection.x, dtype=np.float64)
    if w.shape != (n, m) or x.shape != (n,):
        raise ValueError("weights/selection shape does not match the accuracy matrix")
    clf = v.classifiers.names
    cls = v.classes.names
    checks = []

    dist = np.minimum(np.abs(x), np.abs(x - 1.0))
    i = int(np.argmax(dist))
    checks.append(ConstraintCheck(
        2, "binary-selection", bool(dist[i] <= tol), float(dist[i]), f"classifier {clf[i]}"
    ))

    neg = np.maximum(0.0, -w)
    i, j = np.unravel_index(np.argmax(neg), neg.shape)
    checks.append(ConstraintCheck(
        3, "nonnegative-weights", bool(neg[i, j] <= tol), float(neg[i, j]),
        f"({clf[i]}, {cls[j]})"
    ))

    dev = abs(float(x.sum()) - params.k)
    checks.append(ConstraintCheck(
        4, "ensemble-size", bool(dev <= tol), dev, "global"
    ))

    col_dev = np.abs(w.sum(axis=0) - 1.0)
    j = int(np.argmax(col_dev))
    checks.append(ConstraintCheck(
        5, "class-weight-sum", bool(col_dev[j] <= tol), float(col_dev[j]), f"class {cls[j]}"
    ))

    row_sums = w.sum(axis=1)
    over = row_sums - m * x
    i = int(np.argmax(over))
    checks.append(ConstraintCheck(
        6, "unselected-zero-weights", bool(over[i] <= tol), float(max(0.0, over[i])),
        f"classifier {clf[i]}"
    ))

    floor_gap = params.epsilon - (row_sums + params.big_m * (1.0 - x))
    i = int(np.argmax(floor_gap))
    checks.append(ConstraintCheck(
        7, "selected-weight-floor", bool(floor_gap[i] <= tol),
        float(max(0.0, floor_gap[i])), f"classifier {clf[i]}"
    ))

    class_gap = vals.mean(axis=0) + params.epsilon - (w * vals).sum(axis=0)
    j = int(np.argmax(class_gap))
    checks.append(ConstraintCheck(
        8, "per-class-accuracy", bool(class_gap[j] <= tol),
        float(max(0.0, class_gap[j])), f"class {cls[j]}"
    ))

    overall_gap = vals.mean() + params.epsilon - (w * vals).sum() / m
    checks.append(ConstraintCheck(
        9, "overall-accuracy", bool(overall_gap <= tol), float(max(0.0, overall_gap)),
        "global"
    ))
    return ConstraintReport(tuple(checks), tol)


# --- hyper-parameter tuning ---------------------------------------------------


@dataclass(frozen=True)
class TuneResult:
    lam: float
    alpha: float
    score: float
    solution: MipSolution


def tune_hyperparams(
    v: AccuracyMatrix,
    k: int,
    start: tuple[float, float],
    steps: tuple[float, float],
    score,
    epsilon: float = 1e-6,
    big_m: float = 1e6,
    workers: int = 1,
) -> TuneResult:
    """Coordinate-wise hill climb over (lam, alpha).

    For lam first and alpha second, the climb tries one step up, then one
    step down, and keeps stepping in the first direction that strictly
    improves ``score(weights)``; it stops at the first non-improvement.
    lam stays >= 0 and alpha inside [0, 1]. ``score`` must be deterministic.
    """
    d_lam, d_alpha = steps
    if d_lam <= 0 or d_alpha <= 0:
        raise ValueError("step sizes must be positive")

    cache: dict[tuple[float, float], tuple[float, MipSolution]] = {}

    def evaluate(lam: float, alpha: float) -> tuple[float, MipSolution]:
        key = (lam, alpha)
        if key not in cache:
            params = HyperParams(k=k, lam=lam, alpha=alpha,
                                 epsilon=epsilon, big_m=big_m)
            solution = solve_weighting(v, params, workers=workers)
            cache[key] = (float(score(solution.weights)), solution)
        return cache[key]

    lam, alpha = float(start[0]), float(start[1])
    best_score, best_sol = evaluate(lam, alpha)

    def climb(value, delta, lo, hi, apply):
        nonlocal best_score, best_sol
        for direction in (+1.0, -1.0):
            moved = False
            while True:
                cand = min(hi, max(lo, value + direction * delta))
                if cand == value:
                    break
                cand_score, cand_sol = apply(cand)
                if cand_score > best_score:
                    value = cand
                    best_score, best_sol = cand_score, cand_sol
                    moved = True
                else:
                    break
            if moved:
                break
        return value

    lam = climb(lam, d_lam, 0.0, math.inf, lambda c: evaluate(c, alpha))
    alpha = climb(alpha, d_alpha, 0.0, 1.0, lambda c: evaluate(lam, c))
    return TuneResult(lam=lam, alpha=alpha, score=best_score, solution=best_sol)
