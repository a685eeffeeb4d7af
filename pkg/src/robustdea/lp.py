"""Dense revised simplex kernel.

Every LP is converted to the computational form

    min c.x   s.t.   A x + s = b,   lo <= (x, s) <= hi

with one logical column ``s_i`` per row: ``<=`` rows get ``s_i >= 0``,
``>=`` rows get ``s_i <= 0`` and ``=`` rows get ``s_i == 0``.  Column ``j`` of
the standardized space is structural variable ``j`` for ``j < n_vars`` and the
logical of row ``j - n_vars`` otherwise; a :class:`Basis` lists one such index
per row.  Because logicals exist for every row, the slack basis is always
available and bases transfer between LPs that share structural columns.

Cold solves run a two-phase bounded primal simplex, warm starts a bounded
dual simplex.  Rows are scaled by their max-abs coefficient before solving;
all tolerances apply to the scaled problem.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

LE, GE, EQ = "<=", ">=", "="

_PIVOT_TOL = 1e-11
_REFACTOR_EVERY = 64

# nonbasic/basic status codes
_AT_LOWER, _AT_UPPER, _FREE, _FIXED, _BASIC = 0, 1, 2, 3, 4


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class SingularBasisError(ArithmeticError):
    """A basis matrix could not be factorized."""


@dataclass(frozen=True)
class LinearProgram:
    """``min objective.x`` subject to row constraints and variable bounds.

    ``row_labels`` is optional bookkeeping carried for callers that need to
    map rows back to model entities (e.g. for basis transfer).
    """

    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_senses: tuple[str, ...]
    rhs: np.ndarray
    variable_lower_bounds: np.ndarray | None = None
    variable_upper_bounds: np.ndarray | None = None
    free_variable_flags: np.ndarray | None = None
    row_labels: tuple | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        A = np.asarray(self.constraint_matrix, dtype=float)
        b = np.asarray(self.rhs, dtype=float)
        if A.ndim != 2:
            A = A.reshape(len(b), len(c))
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "constraint_senses", tuple(self.constraint_senses))
        m, n = A.shape
        if len(b) != m or len(self.constraint_senses) != m:
            raise ValueError(f"row count mismatch: matrix has {m} rows, "
                             f"rhs {len(b)}, senses {len(self.constraint_senses)}")
        if len(c) != n:
            raise ValueError(f"objective has {len(c)} entries, matrix has {n} columns")
        bad = set(self.constraint_senses) - {LE, GE, EQ}
        if bad:
            raise ValueError(f"unknown constraint senses {sorted(bad)}")
        if not (np.isfinite(c).all() and np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("LP data must be finite")
        lo = np.zeros(n) if self.variable_lower_bounds is None else np.asarray(
            self.variable_lower_bounds, dtype=float)
        hi = np.full(n, np.inf) if self.variable_upper_bounds is None else np.asarray(
            self.variable_upper_bounds, dtype=float)
        if self.free_variable_flags is not None:
            free = np.asarray(self.free_variable_flags, dtype=bool)
            lo = np.where(free, -np.inf, lo)
            hi = np.where(free, np.inf, hi)
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("bound vectors must match the number of variables")
        if np.any(lo > hi) or np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise ValueError("inconsistent variable bounds")
        object.__setattr__(self, "variable_lower_bounds", lo)
        object.__setattr__(self, "variable_upper_bounds", hi)

    @property
    def n_rows(self) -> int:
        return self.constraint_matrix.shape[0]

    @property
    def n_vars(self) -> int:
        return self.constraint_matrix.shape[1]

    def logical_index(self, row: int) -> int:
        """Standardized column index of the logical variable of ``row``."""
        return self.n_vars + row


@dataclass(frozen=True)
class Basis:
    basic_variable_indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.basic_variable_indices)
        if len(set(idx)) != len(idx):
            raise ValueError("basis indices must be distinct")
        object.__setattr__(self, "basic_variable_indices", idx)

    def __len__(self):
        return len(self.basic_variable_indices)


@dataclass
class SolverOptions:
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    gap_tol: float = 1e-7
    max_iterations: int | None = None  # None -> 50 * (rows + cols)
    anti_cycling_threshold: int = 50
    verbose: bool = False

    def __post_init__(self):
        if min(self.feas_tol, self.opt_tol, self.gap_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.anti_cycling_threshold < 1:
            raise ValueError("anti_cycling_threshold must be >= 1")

    def iteration_limit(self, lp: LinearProgram) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 50 * (lp.n_rows + lp.n_vars)


@dataclass
class LpSolution:
    status: Status
    objective: float
    primal_values: np.ndarray
    row_multipliers: np.ndarray
    basis: Basis | None
    iterations: int = 0
    warmstart_fallback: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Work:
    """Mutable working state of one solve on the computational form."""

    def __init__(self, lp: LinearProgram, options: SolverOptions):
        A = lp.constraint_matrix
        m, n = A.shape
        scale = np.abs(A).max(axis=1) if n else np.ones(m)
        scale = np.where(scale > 0, scale, 1.0)
        self.row_scale = 1.0 / scale
        self.m, self.n = m, n
        self.M = np.hstack([A * self.row_scale[:, None], np.eye(m)])
        self.b = lp.rhs * self.row_scale
        self.c = np.concatenate([lp.objective, np.zeros(m)])
        slo = np.array([0.0 if s == LE else -np.inf if s == GE else 0.0
                        for s in lp.constraint_senses])
        shi = np.array([np.inf if s == LE else 0.0 for s in lp.constraint_senses])
        self.lo = np.concatenate([lp.variable_lower_bounds, slo])
        self.hi = np.concatenate([lp.variable_upper_bounds, shi])
        self.opts = options
        self.max_iter = options.iteration_limit(lp)
        self.iterations = 0
        self.verbose = options.verbose

    # -- basis bookkeeping -------------------------------------------------

    def set_basis(self, basic, status=None):
        N = self.M.shape[1]
        self.B = np.array(basic, dtype=np.intp)
        if status is None:
            status = np.where(np.isfinite(self.lo), _AT_LOWER,
                              np.where(np.isfinite(self.hi), _AT_UPPER, _FREE))
            status = np.where(self.lo == self.hi, _FIXED, status)
        self.status = np.array(status, dtype=np.int8)
        self.status[self.B] = _BASIC
        self.x = np.zeros(N)
        self._place_nonbasic()
        self.refactor()

    def _place_nonbasic(self):
        st = self.status
        self.x = np.where((st == _AT_LOWER) | (st == _FIXED), self.lo,
                          np.where(st == _AT_UPPER, self.hi, 0.0))

    def refactor(self):
        try:
            self.Binv = np.linalg.inv(self.M[:, self.B])
        except np.linalg.LinAlgError as exc:
            raise SingularBasisError("basis matrix is singular") from exc
        if not np.isfinite(self.Binv).all() or np.abs(self.Binv).max() > 1e12:
            raise SingularBasisError("basis matrix is numerically singular")
        self.recompute_primal()
        self.since_refactor = 0

    def recompute_primal(self):
        xn = np.where(self.status == _BASIC, 0.0, self.x)
        self.x[self.B] = self.Binv @ (self.b - self.M @ xn)

    def reduced_costs(self, c):
        y = c[self.B] @ self.Binv
        d = c - y @ self.M
        d[self.B] = 0.0
        return y, d

    def pivot(self, r, q, col):
        """Basic position ``r`` leaves, column ``q`` enters."""
        piv = col[r]
        Binv = self.Binv
        Binv[r] /= piv
        others = col.copy()
        others[r] = 0.0
        Binv -= np.outer(others, Binv[r])
        self.B[r] = q
        self.status[q] = _BASIC
        self.since_refactor += 1
        if self.since_refactor >= _REFACTOR_EVERY:
            self.refactor()

    def leave_to(self, var, bound_code):
        self.status[var] = _FIXED if self.lo[var] == self.hi[var] else bound_code
        self.x[var] = self.lo[var] if bound_code == _AT_LOWER else self.hi[var]

    # -- primal simplex -----------------------------------------------------

    def primal(self, c):
        """Bounded primal simplex from a primal feasible basis."""
        tol = self.opts.opt_tol
        ftol = self.opts.feas_tol
        degenerate = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                return Status.ITERATION_LIMIT
            y, d = self.reduced_costs(c)
            st = self.status
            viol = np.where(st == _AT_LOWER, -d,
                            np.where(st == _AT_UPPER, d,
                                     np.where(st == _FREE, np.abs(d), 0.0)))
            cand = viol > tol
            if not cand.any():
                return Status.OPTIMAL
            q = int(np.argmax(cand)) if bland else int(np.argmax(viol))
            direction = 1.0 if d[q] < 0 else -1.0
            col = self.Binv @ self.M[:, q]
            rate = -direction * col  # d x_B / d t
            xB = self.x[self.B]
            loB, hiB = self.lo[self.B], self.hi[self.B]
            with np.errstate(divide="ignore", invalid="ignore"):
                lim = np.where(rate < -_PIVOT_TOL, (xB - loB) / -rate,
                               np.where(rate > _PIVOT_TOL, (hiB - xB) / rate, np.inf))
            lim = np.maximum(lim, 0.0)
            own = self.hi[q] - self.lo[q]
            t = lim.min() if len(lim) else np.inf
            if own <= t:
                if not np.isfinite(own):
                    return Status.UNBOUNDED
                # bound flip, no basis change
                self.x[q] += direction * own
                self.x[self.B] = xB + rate * own
                self.status[q] = _AT_UPPER if direction > 0 else _AT_LOWER
                self.iterations += 1
                degenerate = 0
                continue
            if not np.isfinite(t):
                return Status.UNBOUNDED
            ties = np.flatnonzero(lim <= t + ftol * 1e-3)
            if bland:
                r = int(ties[np.argmin(self.B[ties])])
            else:
                r = int(ties[np.argmax(np.abs(col[ties]))])
            leaving = int(self.B[r])
            to_code = _AT_LOWER if rate[r] < 0 else _AT_UPPER
            self.x[q] += direction * t
            self.x[self.B] = xB + rate * t
            self.leave_to(leaving, to_code)
            if self.verbose:
                log.debug("primal pivot %d: in %d out %d step %.3g", self.iterations, q, leaving, t)
            self.pivot(r, q, col)
            self.iterations += 1
            degenerate = degenerate + 1 if t <= 1e-12 else 0
            if degenerate >= self.opts.anti_cycling_threshold:
                bland = True

    # -- dual simplex -------------------------------------------------------

    def dual(self, c):
        """Bounded dual simplex from a dual feasible basis."""
        ftol = self.opts.feas_tol
        degenerate = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                return Status.ITERATION_LIMIT
            xB = self.x[self.B]
            loB, hiB = self.lo[self.B], self.hi[self.B]
            below = loB - xB
            above = xB - hiB
            infeas = np.maximum(below, above)
            cand = infeas > ftol
            if not cand.any():
                return Status.OPTIMAL
            if bland:
                rows = np.flatnonzero(cand)
                r = int(rows[np.argmin(self.B[rows])])
            else:
                r = int(np.argmax(infeas))
            to_lower = below[r] > ftol
            y, d = self.reduced_costs(c)
            alpha = self.Binv[r] @ self.M
            st = self.status
            if to_lower:
                elig = (((st == _AT_LOWER) & (alpha < -_PIVOT_TOL))
                        | ((st == _AT_UPPER) & (alpha > _PIVOT_TOL)))
            else:
                elig = (((st == _AT_LOWER) & (alpha > _PIVOT_TOL))
                        | ((st == _AT_UPPER) & (alpha < -_PIVOT_TOL)))
            elig |= (st == _FREE) & (np.abs(alpha) > _PIVOT_TOL)
            js = np.flatnonzero(elig)
            if len(js) == 0:
                return Status.INFEASIBLE
            ratios = np.abs(d[js]) / np.abs(alpha[js])
            best = ratios.min()
            ties = js[ratios <= best + self.opts.opt_tol]
            if bland:
                q = int(ties.min())
            else:
                q = int(ties[np.argmax(np.abs(alpha[ties]))])
            col = self.Binv @ self.M[:, q]
            leaving = int(self.B[r])
            target = self.lo[leaving] if to_lower else self.hi[leaving]
            step = (xB[r] - target) / alpha[q]
            self.x[q] += step
            self.x[self.B] = xB - step * col
            self.leave_to(leaving, _AT_LOWER if to_lower else _AT_UPPER)
            if self.verbose:
                log.debug("dual pivot %d: out %d in %d", self.iterations, leaving, q)
            self.pivot(r, q, col)
            self.iterations += 1
            degenerate = degenerate + 1 if best <= 1e-12 else 0
            if degenerate >= self.opts.anti_cycling_threshold:
                bland = True

    def dual_feasible(self, c):
        """Choose bound sides for boxed nonbasics; report dual feasibility."""
        _, d = self.reduced_costs(c)
        tol = self.opts.opt_tol
        st = self.status
        boxed = np.isfinite(self.lo) & np.isfinite(self.hi) & (st != _BASIC) & (st != _FIXED)
        flip_up = boxed & (d < -tol)
        flip_down = boxed & (d > tol)
        if flip_up.any() or flip_down.any():
            st[flip_up] = _AT_UPPER
            st[flip_down] = _AT_LOWER
            self._restore_basic_values()
        bad = (((st == _AT_LOWER) & (d < -tol)) | ((st == _AT_UPPER) & (d > tol))
               | ((st == _FREE) & (np.abs(d) > tol)))
        return not bad.any()

    def _restore_basic_values(self):
        self._place_nonbasic()
        self.recompute_primal()

    def primal_feasible(self):
        xB = self.x[self.B]
        tol = self.opts.feas_tol
        return bool(np.all(xB >= self.lo[self.B] - tol) and np.all(xB <= self.hi[self.B] + tol))

    # -- result ---------------------------------------------------------------

    def solution(self, status, lp, **meta):
        n = self.n
        x = self.x[:n].copy()
        y_scaled, _ = self.reduced_costs(self.c)
        y = y_scaled * self.row_scale
        obj = float(lp.objective @ x)
        basis = Basis(tuple(int(i) for i in self.B))
        return LpSolution(status, obj, x, y, basis, self.iterations, **meta)


def _phase_one(work: _Work, lp: LinearProgram) -> Status:
    """Find a feasible basis using one artificial column per violated row."""
    m, n = work.m, work.n
    N = n + m
    status = np.where(np.isfinite(work.lo), _AT_LOWER,
                      np.where(np.isfinite(work.hi), _AT_UPPER, _FREE)).astype(np.int8)
    status = np.where(work.lo == work.hi, _FIXED, status).astype(np.int8)
    xs = np.where((status == _AT_LOWER) | (status == _FIXED), work.lo,
                  np.where(status == _AT_UPPER, work.hi, 0.0))[:n]
    resid = work.b - work.M[:, :n] @ xs
    slo, shi = work.lo[n:], work.hi[n:]
    low_viol = resid < slo - work.opts.feas_tol
    high_viol = resid > shi + work.opts.feas_tol
    bad = np.flatnonzero(low_viol | high_viol)
    if len(bad) == 0:
        work.set_basis(np.arange(n, N), status)
        return Status.OPTIMAL

    k = len(bad)
    sign = np.where(high_viol[bad], 1.0, -1.0)
    art = np.zeros((m, k))
    art[bad, np.arange(k)] = sign
    M0, lo0, hi0, c0 = work.M, work.lo, work.hi, work.c
    work.M = np.hstack([M0, art])
    work.lo = np.concatenate([lo0, np.zeros(k)])
    work.hi = np.concatenate([hi0, np.full(k, np.inf)])
    basic = np.arange(n, N).copy()
    basic[bad] = N + np.arange(k)
    st = np.concatenate([status, np.zeros(k, dtype=np.int8)])
    for i in bad:
        st[n + i] = _AT_UPPER if high_viol[i] else _AT_LOWER
        if work.lo[n + i] == work.hi[n + i]:
            st[n + i] = _FIXED
    work.set_basis(basic, st)
    c1 = np.concatenate([np.zeros(N), np.ones(k)])
    res = work.primal(c1)
    infeas = float(work.x[N:].sum())
    if res is Status.ITERATION_LIMIT:
        outcome = res
    elif infeas > work.opts.feas_tol * max(1.0, np.abs(work.b).max()):
        outcome = Status.INFEASIBLE
    else:
        outcome = Status.OPTIMAL
    # Artificial columns are +-e_i, parallel to the row logical, so a basic
    # artificial can always be swapped for its logical.
    B = work.B.copy()
    for pos, j in enumerate(B):
        if j >= N:
            B[pos] = n + bad[j - N]
    status_final = work.status[:N].copy()
    work.M, work.lo, work.hi, work.c = M0, lo0, hi0, c0
    for j in range(n, N):
        if status_final[j] == _BASIC and j not in B:
            status_final[j] = _AT_LOWER if np.isfinite(work.lo[j]) else _AT_UPPER
    work.set_basis(B, status_final)
    return outcome


def solve_primal(lp: LinearProgram, options: SolverOptions | None = None) -> LpSolution:
    """Cold solve with the two-phase bounded primal simplex."""
    options = options or SolverOptions()
    work = _Work(lp, options)
    res = _phase_one(work, lp)
    if res is Status.OPTIMAL:
        res = work.primal(work.c)
    if res is not Status.OPTIMAL:
        return _non_optimal(work, lp, res)
    return work.solution(res, lp)


def _non_optimal(work, lp, status, **meta):
    n = work.n
    return LpSolution(status, float("nan"), work.x[:n].copy(), np.full(work.m, np.nan),
                      None, work.iterations, **meta)


def solve_dual_warmstart(lp: LinearProgram, start: Basis,
                         options: SolverOptions | None = None) -> LpSolution:
    """Re-solve ``lp`` from ``start`` using the bounded dual simplex.

    A start basis that is primal but not dual feasible continues with primal
    simplex.  One that is singular, malformed or neither primal nor dual
    feasible falls back to :func:`solve_primal` and the returned solution has
    ``warmstart_fallback`` set.
    """
    options = options or SolverOptions()
    work = _Work(lp, options)
    N = work.n + work.m
    idx = start.basic_variable_indices
    if len(idx) != work.m or any(i < 0 or i >= N for i in idx):
        return _fallback(lp, options, "basis dimension mismatch")
    try:
        work.set_basis(idx)
    except SingularBasisError:
        return _fallback(lp, options, "singular start basis")
    if work.dual_feasible(work.c):
        res = work.dual(work.c)
        if res is Status.INFEASIBLE:
            return _non_optimal(work, lp, res)
    elif work.primal_feasible():
        res = work.primal(work.c)
    else:
        return _fallback(lp, options, "start basis neither primal nor dual feasible")
    if res is not Status.OPTIMAL:
        return _non_optimal(work, lp, res)
    # guards against drift in the dual pivots
    if not work.dual_feasible(work.c):
        res = work.primal(work.c)
        if res is not Status.OPTIMAL:
            return _non_optimal(work, lp, res)
    return work.solution(res, lp)


def _fallback(lp, options, reason):
    log.debug("warm start fallback: %s", reason)
    sol = solve_primal(lp, options)
    sol.warmstart_fallback = True
    sol.metadata["fallback_reason"] = reason
    return sol


def slack_basis(lp: LinearProgram) -> Basis:
    return Basis(tuple(range(lp.n_vars, lp.n_vars + lp.n_rows)))


def check_solution(lp: LinearProgram, sol: LpSolution) -> dict:
    """Residuals of an optimal solution: scaled primal infeasibility,
    reduced-cost violation and duality gap."""
    A, b = lp.constraint_matrix, lp.rhs
    scale = np.abs(A).max(axis=1)
    scale = np.where(scale > 0, scale, 1.0)
    ax = A @ sol.primal_values
    viol = np.zeros(lp.n_rows)
    for i, s in enumerate(lp.constraint_senses):
        if s == LE:
            viol[i] = max(ax[i] - b[i], 0.0)
        elif s == GE:
            viol[i] = max(b[i] - ax[i], 0.0)
        else:
            viol[i] = abs(ax[i] - b[i])
    viol /= scale
    x = sol.primal_values
    lo, hi = lp.variable_lower_bounds, lp.variable_upper_bounds
    bound_viol = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    y = sol.row_multipliers
    d = lp.objective - A.T @ y
    basic = set(sol.basis.basic_variable_indices) if sol.basis else set()
    rc_viol = 0.0
    bound_term = 0.0
    for j in range(lp.n_vars):
        if j in basic:
            continue
        at_lo = np.isfinite(lo[j]) and abs(x[j] - lo[j]) <= 1e-9 * max(1.0, abs(lo[j]))
        at_hi = np.isfinite(hi[j]) and abs(x[j] - hi[j]) <= 1e-9 * max(1.0, abs(hi[j]))
        if at_lo and at_hi:
            pass
        elif at_lo:
            rc_viol = max(rc_viol, -d[j])
        elif at_hi:
            rc_viol = max(rc_viol, d[j])
        else:
            rc_viol = max(rc_viol, abs(d[j]))
        bound_term += d[j] * x[j]
    # row-multiplier sign conditions (logical columns have zero cost)
    for i, s in enumerate(lp.constraint_senses):
        if lp.logical_index(i) in basic:
            continue
        if s == LE:
            rc_viol = max(rc_viol, y[i])
        elif s == GE:
            rc_viol = max(rc_viol, -y[i])
    gap = abs(float(lp.objective @ x) - (float(b @ y) + bound_term))
    return {
        "primal_infeasibility": float(max(viol.max(initial=0.0), bound_viol.max(initial=0.0))),
        "reduced_cost_violation": float(rc_viol),
        "duality_gap": gap,
    }
