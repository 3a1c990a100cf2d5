"""Dense convex quadratic programming for the fixed-selection subproblem.

``solve_qp`` runs a primal-dual interior-point method (Mehrotra
predictor-corrector); ``grid_oracle`` is an independent brute-force
enumerator used to validate it. Problems are stated in one canonical form:

    maximize    c.w - sum_i q_i * w_i**2
    subject to  a_eq @ w == b_eq
                a_in @ w >= b_in
                w >= 0

with ``q >= 0`` (convexity). Equalities are kept separate from the
inequality block rather than split into opposing pairs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import IPM_CONVERGED, IPM_DIVERGED

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200

_ORACLE_MAX_VARS = 8
_ORACLE_MAX_POINTS = 5_000_000


class QpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class QpProblem:
    """Canonical-form convex QP data; see module docstring for the model."""

    q: np.ndarray
    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_in: np.ndarray
    b_in: np.ndarray

    def __post_init__(self):
        q = np.ascontiguousarray(self.q, dtype=np.float64)
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        nv = c.shape[0]
        a_eq = np.ascontiguousarray(self.a_eq, dtype=np.float64).reshape(-1, nv)
        b_eq = np.ascontiguousarray(self.b_eq, dtype=np.float64).reshape(-1)
        a_in = np.ascontiguousarray(self.a_in, dtype=np.float64).reshape(-1, nv)
        b_in = np.ascontiguousarray(self.b_in, dtype=np.float64).reshape(-1)
        if q.shape != (nv,):
            raise ValueError(f"q has shape {q.shape}, expected ({nv},)")
        if a_eq.shape[0] != b_eq.shape[0]:
            raise ValueError("a_eq/b_eq row count mismatch")
        if a_in.shape[0] != b_in.shape[0]:
            raise ValueError("a_in/b_in row count mismatch")
        for name, arr in (("q", q), ("c", c), ("a_eq", a_eq),
                          ("b_eq", b_eq), ("a_in", a_in), ("b_in", b_in)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        if q.size and q.min() < 0.0:
            raise ValueError(
                f"negative quadratic coefficient {q.min()}: problem is non-convex"
            )
        for fname, arr in (("q", q), ("c", c), ("a_eq", a_eq),
                           ("b_eq", b_eq), ("a_in", a_in), ("b_in", b_in)):
            arr.flags.writeable = False
            object.__setattr__(self, fname, arr)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @classmethod
    def build(cls, q, c, a_eq=None, b_eq=None, a_in=None, b_in=None) -> "QpProblem":
        c = np.asarray(c, dtype=np.float64)
        nv = c.shape[0]
        if a_eq is None:
            a_eq, b_eq = np.zeros((0, nv)), np.zeros(0)
        if a_in is None:
            a_in, b_in = np.zeros((0, nv)), np.zeros(0)
        return cls(np.asarray(q, dtype=np.float64), c, a_eq, b_eq, a_in, b_in)

    def objective(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=np.float64)
        return float(self.c @ w - self.q @ (w * w))


@dataclass(frozen=True)
class QpSolution:
    """Solver output.

    ``y_eq``/``z_in``/``z_bounds`` are the equality, inequality and bound
    multipliers; like ``kkt_residuals`` they are None for grid-oracle
    solutions, which carry no dual information.
    """

    w: np.ndarray
    objective: float
    status: QpStatus
    kkt_residuals: dict[str, float] | None = None
    iterations: int = 0
    certificate: str | None = None
    y_eq: np.ndarray | None = None
    z_in: np.ndarray | None = None
    z_bounds: np.ndarray | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status is QpStatus.OPTIMAL


def _run_kernel(problem: QpProblem, tol: float, max_iter: int):
    try:
        return _kernels.ipm_solve(
            problem.q, problem.c, problem.a_eq, problem.b_eq,
            problem.a_in, problem.b_in, tol, max_iter,
        )
    except np.linalg.LinAlgError:
        nv = problem.n_vars
        return (np.zeros(nv), np.zeros(problem.b_eq.shape[0]),
                np.zeros(problem.b_in.shape[0] + nv), IPM_DIVERGED, 0,
                np.inf, np.inf, np.inf)


def _phase1(problem: QpProblem, tol: float, max_iter: int):
    """Elastic feasibility LP: minimal total constraint violation.

    Returns (violation, per-eq-row violation, per-ineq-row violation).
    """
    nv = problem.n_vars
    me = problem.b_eq.shape[0]
    mi = problem.b_in.shape[0]
    ne = nv + 2 * me + mi

    c = np.zeros(ne)
    c[nv:] = -1.0
    q = np.zeros(ne)

    a_eq = np.zeros((me, ne))
    a_eq[:, :nv] = problem.a_eq
    a_eq[:, nv:nv + me] = np.eye(me)
    a_eq[:, nv + me:nv + 2 * me] = -np.eye(me)

    a_in = np.zeros((mi, ne))
    a_in[:, :nv] = problem.a_in
    a_in[:, nv + 2 * me:] = np.eye(mi)

    elastic = QpProblem(q, c, a_eq, problem.b_eq, a_in, problem.b_in)
    w, _, _, status, _, _, _, _ = _run_kernel(elastic, tol, max_iter)
    if status != IPM_CONVERGED:
        return np.inf, np.zeros(me), np.zeros(mi)
    t_pos = w[nv:nv + me]
    t_neg = w[nv + me:nv + 2 * me]
    u = w[nv + 2 * me:]
    return float(t_pos.sum() + t_neg.sum() + u.sum()), t_pos + t_neg, u


def solve_qp(
    problem: QpProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> QpSolution:
    """Solve the canonical QP to KKT residuals <= ``tol``.

    A non-converged run is re-checked with an elastic feasibility
    subproblem: if that certifies violation, the result is INFEASIBLE with
    the offending constraint rows named; otherwise MAX_ITERATIONS with the
    best iterate found.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    w, y, z, status, iters, r_stat, r_primal, r_comp = _run_kernel(
        problem, tol, max_iter
    )
    mi = problem.b_in.shape[0]
    residuals = {
        "stationarity": float(r_stat),
        "primal": float(r_primal),
        "dual": float(max(0.0, -(z.min() if z.size else 0.0))),
        "complementarity": float(r_comp),
    }
    if status == IPM_CONVERGED:
        return QpSolution(
            w=w,
            objective=problem.objective(w),
            status=QpStatus.OPTIMAL,
            kkt_residuals=residuals,
            iterations=int(iters),
            y_eq=y,
            z_in=z[:mi],
            z_bounds=z[mi:],
        )

    scale = 1.0 + max(
        float(np.max(np.abs(problem.b_eq), initial=0.0)),
        float(np.max(np.abs(problem.b_in), initial=0.0)),
    )
    feas_tol = max(tol, 1e-9) * scale
    violation, eq_viol, in_viol = _phase1(problem, tol, max_iter)
    if violation > feas_tol:
        bad_eq = [int(i) for i in np.flatnonzero(eq_viol > feas_tol)]
        bad_in = [int(i) for i in np.flatnonzero(in_viol > feas_tol)]
        certificate = (
            f"total violation {violation:.3e}; "
            f"unsatisfiable equality rows {bad_eq}, inequality rows {bad_in}"
        )
        return QpSolution(
            w=w,
            objective=problem.objective(w),
            status=QpStatus.INFEASIBLE,
            kkt_residuals=residuals,
            iterations=int(iters),
            certificate=certificate,
        )
    return QpSolution(
        w=w,
        objective=problem.objective(w),
        status=QpStatus.MAX_ITERATIONS,
        kkt_residuals=residuals,
        iterations=int(iters),
    )


# --- grid oracle -----------------------------------------------------------


def _find_simplex_blocks(a_eq: np.ndarray, b_eq: np.ndarray):
    """Split variables into unit-simplex blocks defined by equality rows.

    A row qualifies when its coefficients are exactly 0/1, its target is 1,
    and its variables appear in no other equality row. Returns (blocks,
    covered_eq_rows) where blocks is a list of variable-index arrays; any
    variable outside all blocks becomes its own box block.
    """
    me, nv = a_eq.shape
    var_rows = [[] for _ in range(nv)]
    for r in range(me):
        for k in np.flatnonzero(a_eq[r]):
            var_rows[k].append(r)
    blocks = []
    covered_rows = []
    for r in range(me):
        support = np.flatnonzero(a_eq[r])
        if support.size == 0:
            continue
        is_simplex = (
            b_eq[r] == 1.0
            and np.all(a_eq[r, support] == 1.0)
            and all(var_rows[k] == [r] for k in support)
        )
        if is_simplex:
            blocks.append(("simplex", support))
            covered_rows.append(r)
    covered_vars = set()
    for _, support in blocks:
        covered_vars.update(int(k) for k in support)
    for k in range(nv):
        if k not in covered_vars:
            blocks.append(("box", np.array([k], dtype=np.int64)))
    return blocks, set(covered_rows)


def _block_candidates(kind: str, size: int, units: int) -> np.ndarray:
    if kind == "simplex":
        count = math.comb(units + size - 1, size - 1)
        if count > _ORACLE_MAX_POINTS:
            raise ValueError(
                f"grid too large: {count} simplex points for a {size}-variable block"
            )
        comps = np.empty((count, size), dtype=np.int64)
        _kernels.fill_compositions(comps, units, size)
        return comps.astype(np.float64) / units
    return np.linspace(0.0, 1.0, units + 1).reshape(-1, 1)


def grid_oracle(problem: QpProblem, step: float) -> QpSolution:
    """Best feasible grid point by exhaustive enumeration.

    Feasibility is checked with tolerance ``step`` on every constraint.
    Variables tied together by unit-simplex equality rows are enumerated as
    compositions of round(1/step) grid units; remaining variables sweep the
    unit interval. Independent blocks are maximized separately; constraints
    spanning several blocks force a (capped) product enumeration unless they
    are satisfied by every candidate combination.

    Intended for validation only: the variable count is limited to
    {max_vars} and candidate counts to {max_points}.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    nv = problem.n_vars
    if nv > _ORACLE_MAX_VARS:
        raise ValueError(
            f"grid oracle limited to {_ORACLE_MAX_VARS} variables, got {nv}"
        )
    units = max(1, round(1.0 / step))

    blocks, covered_rows = _find_simplex_blocks(problem.a_eq, problem.b_eq)
    supports = [support for _, support in blocks]
    candidates = [
        _block_candidates(kind, support.size, units) for kind, support in blocks
    ]

    # classify constraint rows: handled by construction / single block / cross
    eq_rows = [
        (problem.a_eq[r], float(problem.b_eq[r]), True)
        for r in range(problem.b_eq.shape[0])
        if r not in covered_rows
    ]
    in_rows = [
        (problem.a_in[r], float(problem.b_in[r]), False)
        for r in range(problem.b_in.shape[0])
    ]
    cross = []
    for coeffs, target, is_eq in eq_rows + in_rows:
        touching = [
            bi for bi, support in enumerate(supports)
            if np.any(coeffs[support] != 0.0)
        ]
        if len(touching) <= 1:
            bi = touching[0] if touching else 0
            support = supports[bi]
            vals = candidates[bi] @ coeffs[support]
            if is_eq:
                keep = np.abs(vals - target) <= step
            else:
                keep = vals >= target - step
            candidates[bi] = candidates[bi][keep]
        else:
            cross.append((coeffs, target, is_eq))

    for bi, cand in enumerate(candidates):
        if cand.shape[0] == 0:
            return QpSolution(
                w=np.zeros(nv),
                objective=-np.inf,
                status=QpStatus.INFEASIBLE,
                certificate=f"no grid point satisfies the block-{bi} constraints",
            )

    # per-block objective contributions
    scores = []
    for support, cand in zip(supports, candidates):
        c_blk = problem.c[support]
        q_blk = problem.q[support]
        scores.append(cand @ c_blk - (cand * cand) @ q_blk)

    # cross-block rows that no candidate combination can violate are dropped
    live_cross = []
    for coeffs, target, is_eq in cross:
        contrib = [cand @ coeffs[support] for support, cand in zip(supports, candidates)]
        lo = sum(float(v.min()) for v in contrib)
        hi = sum(float(v.max()) for v in contrib)
        slop = 1e-9 * (1.0 + abs(target))
        if is_eq:
            if hi - target <= step + slop and target - lo <= step + slop:
                continue
        elif lo >= target - step - slop:
            continue
        live_cross.append((coeffs, target, is_eq, contrib))

    if not live_cross:
        w = np.zeros(nv)
        total = 0.0
        for support, cand, sc in zip(supports, candidates, scores):
            best = int(np.argmax(sc))
            w[support] = cand[best]
            total += float(sc[best])
        return QpSolution(
            w=w, objective=total, status=QpStatus.OPTIMAL, iterations=0
        )

    # coupled case: enumerate the candidate product
    counts = [cand.shape[0] for cand in candidates]
    n_points = math.prod(counts)
    if n_points > _ORACLE_MAX_POINTS:
        raise ValueError(
            f"grid too large: {n_points} coupled candidate combinations"
        )
    grids = np.meshgrid(*[np.arange(cnt) for cnt in counts], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)

    total = np.zeros(n_points)
    for bi, sc in enumerate(scores):
        total += sc[idx[:, bi]]
    feasible = np.ones(n_points, dtype=bool)
    for coeffs, target, is_eq, contrib in live_cross:
        vals = np.zeros(n_points)
        for bi, v in enumerate(contrib):
            vals += v[idx[:, bi]]
        if is_eq:
            feasible &= np.abs(vals - target) <= step
        else:
            feasible &= vals >= target - step
    if not feasible.any():
        return QpSolution(
            w=np.zeros(nv),
            objective=-np.inf,
            status=QpStatus.INFEASIBLE,
            certificate="no grid point satisfies the coupling constraints",
        )
    total[~feasible] = -np.inf
    best = int(np.argmax(total))
    w = np.zeros(nv)
    for bi, (support, cand) in enumerate(zip(supports, candidates)):
        w[support] = cand[idx[best, bi]]
    return QpSolution(
        w=w, objective=float(total[best]), status=QpStatus.OPTIMAL, iterations=0
    )


grid_oracle.__doc__ = grid_oracle.__doc__.format(
    max_vars=_ORACLE_MAX_VARS, max_points=_ORACLE_MAX_POINTS
)
