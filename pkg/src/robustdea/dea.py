"""Radial input-oriented DEA envelopment LPs (CCR and BCC) per variable subset.

Masks are plain ints over the dataset's candidate variables: bit ``c`` is set
when the ``c``-th candidate (in dataset column order) enters the model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .lp import EQ, GE, LE, Basis, LinearProgram, LpSolution, SolverOptions, solve_dual_warmstart, solve_primal

MAX_CANDIDATES = 30
CLAMP_TOL = 1e-9
CONST = "const"


class Role(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


class Membership(enum.Enum):
    FIXED = "fixed"
    CANDIDATE = "candidate"


class ReturnsToScale(enum.Enum):
    CRS = "crs"
    VRS = "vrs"


class DatasetError(ValueError):
    pass


class MaskError(ValueError):
    def __init__(self, mask, message):
        super().__init__(f"mask {mask:#b}: {message}")
        self.mask = mask


class ScoreError(RuntimeError):
    """An LP outcome that cannot occur for valid DEA data."""

    def __init__(self, message, mask=None, dmu=None):
        where = []
        if dmu is not None:
            where.append(f"dmu {dmu}")
        if mask is not None:
            where.append(f"mask {mask:#b}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.mask = mask
        self.dmu = dmu


@dataclass(frozen=True)
class VariableDef:
    name: str
    role: Role
    membership: Membership = Membership.CANDIDATE


@dataclass(frozen=True)
class ModelSpec:
    returns_to_scale: ReturnsToScale = ReturnsToScale.CRS


@dataclass
class Dataset:
    """``n`` DMUs described by ``values[j, k]`` for variable ``variables[k]``."""

    dmu_names: list[str]
    variables: list[VariableDef]
    values: np.ndarray
    constant_input_mode: bool = False
    candidates: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.dmu_names = list(self.dmu_names)
        self.variables = list(self.variables)
        n, k = self.values.shape if self.values.ndim == 2 else (len(self.dmu_names), -1)
        if self.values.ndim != 2 or n != len(self.dmu_names) or k != len(self.variables):
            raise DatasetError(f"values shape {self.values.shape} does not match "
                               f"{len(self.dmu_names)} DMUs x {len(self.variables)} variables")
        if n < 1:
            raise DatasetError("dataset has no DMUs")
        names = [v.name for v in self.variables]
        dup = sorted({x for x in names if names.count(x) > 1})
        if dup:
            raise DatasetError(f"duplicate variable names: {', '.join(dup)}")
        if not np.isfinite(self.values).all():
            j, c = np.argwhere(~np.isfinite(self.values))[0]
            raise DatasetError(f"non-finite value at DMU {self.dmu_names[j]!r}, "
                               f"variable {names[c]!r}")
        if (self.values < 0).any():
            j, c = np.argwhere(self.values < 0)[0]
            raise DatasetError(f"negative value at DMU {self.dmu_names[j]!r}, "
                               f"variable {names[c]!r}")
        outs = [i for i, v in enumerate(self.variables) if v.role is Role.OUTPUT]
        if not outs:
            raise DatasetError("dataset has no outputs")
        dead = np.flatnonzero(self.values[:, outs].max(axis=1) <= 0)
        if len(dead):
            raise DatasetError(f"DMU {self.dmu_names[dead[0]]!r} has no positive output")
        if not self.constant_input_mode and not any(v.role is Role.INPUT for v in self.variables):
            raise DatasetError("dataset has no inputs (use constant input mode)")
        self.candidates = tuple(i for i, v in enumerate(self.variables)
                                if v.membership is Membership.CANDIDATE)
        if len(self.candidates) > MAX_CANDIDATES:
            raise DatasetError(f"{len(self.candidates)} candidates exceed the limit of {MAX_CANDIDATES}")

    @property
    def n(self) -> int:
        return len(self.dmu_names)

    @property
    def q(self) -> int:
        return len(self.candidates)

    @property
    def full_mask(self) -> int:
        return (1 << self.q) - 1

    @property
    def candidate_names(self) -> list[str]:
        return [self.variables[i].name for i in self.candidates]

    def effective_columns(self, mask: int) -> list[int]:
        """Dataset columns in the model for ``mask``, in dataset order."""
        chosen = {self.candidates[c] for c in range(self.q) if mask >> c & 1}
        return [i for i, v in enumerate(self.variables)
                if v.membership is Membership.FIXED or i in chosen]

    def with_values(self, values) -> "Dataset":
        return Dataset(self.dmu_names, self.variables, values, self.constant_input_mode)


def row_labels(dataset: Dataset, mask: int, spec: ModelSpec | None = None) -> tuple:
    """Constraint row identities: inputs, the constant input, outputs, convexity."""
    cols = dataset.effective_columns(mask)
    ins = [("in", i) for i in cols if dataset.variables[i].role is Role.INPUT]
    if dataset.constant_input_mode:
        ins.append(("in", CONST))
    outs = [("out", i) for i in cols if dataset.variables[i].role is Role.OUTPUT]
    conv = [("conv", None)] if spec is not None and spec.returns_to_scale is ReturnsToScale.VRS else []
    return tuple(ins + outs + conv)


def is_degenerate(dataset: Dataset, mask: int) -> bool:
    """True for masks whose model lacks inputs or outputs (score fixed at 1)."""
    if mask == 0:
        return True
    labels = row_labels(dataset, mask)
    return not any(k == "in" for k, _ in labels) or not any(k == "out" for k, _ in labels)


def build_lp(dataset: Dataset, dmu_index: int, mask: int, spec: ModelSpec = ModelSpec()) -> LinearProgram:
    """Envelopment LP for ``dmu_index``; columns are ``[theta, lambda_1..lambda_n]``."""
    if not 0 <= mask <= dataset.full_mask:
        raise MaskError(mask, f"does not fit {dataset.q} candidates")
    labels = row_labels(dataset, mask, spec)
    if not any(k == "in" for k, _ in labels) or not any(k == "out" for k, _ in labels):
        raise MaskError(mask, "effective variable set needs at least one input and one output")
    X = dataset.values
    n = dataset.n
    A = np.zeros((len(labels), n + 1))
    rhs = np.zeros(len(labels))
    senses = []
    for r, (kind, col) in enumerate(labels):
        if kind == "in":
            data = np.ones(n) if col == CONST else X[:, col]
            A[r, 0] = -data[dmu_index]
            A[r, 1:] = data
            senses.append(LE)
        elif kind == "out":
            A[r, 1:] = X[:, col]
            rhs[r] = X[dmu_index, col]
            senses.append(GE)
        else:
            A[r, 1:] = 1.0
            rhs[r] = 1.0
            senses.append(EQ)
    c = np.zeros(n + 1)
    c[0] = 1.0
    return LinearProgram(c, A, tuple(senses), rhs, row_labels=labels)


def transfer_basis(basis: Basis, parent_labels: tuple, child_labels: tuple, n_vars: int) -> Basis:
    """Map a basis onto an LP with a superset of rows; new rows get their logicals."""
    pos = {lab: i for i, lab in enumerate(child_labels)}
    out = []
    for j in basis.basic_variable_indices:
        if j < n_vars:
            out.append(j)
        else:
            lab = parent_labels[j - n_vars]
            if lab in pos:
                out.append(n_vars + pos[lab])
    have = set(out)
    parents = set(parent_labels)
    fill = ([i for i, lab in enumerate(child_labels) if lab not in parents]
            + [i for i, lab in enumerate(child_labels) if lab in parents])
    for i in fill:
        if len(out) >= len(child_labels):
            break
        if n_vars + i not in have:
            out.append(n_vars + i)
    return Basis(tuple(out))


@dataclass
class MaskResult:
    theta: float
    solution: LpSolution | None = None
    labels: tuple | None = None
    degenerate: bool = False

    @property
    def solved(self) -> bool:
        return self.solution is not None


def solve_mask(dataset: Dataset, dmu_index: int, mask: int, spec: ModelSpec = ModelSpec(),
               options: SolverOptions | None = None, start: tuple | None = None) -> MaskResult:
    """Score one mask; ``start`` is an optional ``(basis, labels)`` to warm start from."""
    if is_degenerate(dataset, mask):
        return MaskResult(1.0, degenerate=True)
    lp = build_lp(dataset, dmu_index, mask, spec)
    if start is None:
        sol = solve_primal(lp, options)
    else:
        basis, labels = start
        sol = solve_dual_warmstart(lp, transfer_basis(basis, labels, lp.row_labels, lp.n_vars), options)
    if not sol.optimal:
        raise ScoreError(f"LP ended with status {sol.status.value}", mask, dmu_index)
    return MaskResult(_clamp(sol.objective, mask, dmu_index), sol, lp.row_labels)


def _clamp(theta, mask, dmu):
    if theta < -CLAMP_TOL or theta > 1.0 + CLAMP_TOL:
        raise ScoreError(f"efficiency score {theta!r} outside [0, 1]", mask, dmu)
    return min(max(theta, 0.0), 1.0)


def efficiency_score(dataset: Dataset, dmu_index: int, mask: int, spec: ModelSpec = ModelSpec(),
                     options: SolverOptions | None = None) -> float:
    """Efficiency of ``dmu_index`` under ``mask``; degenerate masks score 1."""
    return solve_mask(dataset, dmu_index, mask, spec, options).theta


def dual_weights(solution: LpSolution, dataset: Dataset, mask: int) -> np.ndarray:
    """|row multiplier| of each candidate's row; unselected candidates get 0."""
    labels = row_labels(dataset, mask)
    pos = {lab: i for i, lab in enumerate(labels)}
    w = np.zeros(dataset.q)
    for c, col in enumerate(dataset.candidates):
        if mask >> c & 1:
            kind = "in" if dataset.variables[col].role is Role.INPUT else "out"
            w[c] = abs(solution.row_multipliers[pos[(kind, col)]])
    return w
