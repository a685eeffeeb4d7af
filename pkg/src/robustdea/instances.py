"""Dataset ingestion from CSV, the random-instance generator and the tennis corpus.

CSV schema: the first column is ``dmu``; every other header is ``in:<name>``
or ``out:<name>``.  Cells are decimal numbers.

Random instances draw every value i.i.d. from ``Uniform[low, high)`` using
``numpy.random.Generator(PCG64(seed))`` via ``default_rng(seed).uniform``,
row by row (DMU-major), inputs before outputs.  With no inputs the dataset
uses constant-input mode.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .dea import Dataset, DatasetError, Membership, Role, VariableDef

_PREFIX = {"in": Role.INPUT, "out": Role.OUTPUT}


class CandidatePolicy(enum.Enum):
    ALL_CANDIDATE = "all"
    OUTPUTS_CANDIDATE = "outputs"


@dataclass(frozen=True)
class GeneratorConfig:
    n_dmus: int
    n_inputs: int
    n_outputs: int
    value_range: tuple[float, float] = (50.0, 100.0)
    seed: int = 0
    candidate_policy: CandidatePolicy = CandidatePolicy.ALL_CANDIDATE

    def __post_init__(self):
        if self.n_dmus < 1:
            raise ValueError("n_dmus must be at least 1")
        if self.n_inputs < 0 or self.n_outputs < 1:
            raise ValueError("need at least one output and a non-negative input count")
        if self.n_inputs + self.n_outputs < 2:
            raise ValueError("need at least two variables")
        low, high = self.value_range
        if not low < high:
            raise ValueError(f"empty value range {self.value_range}")
        if low < 0:
            raise ValueError("values must be non-negative")
        if self.candidate_policy is CandidatePolicy.OUTPUTS_CANDIDATE and self.n_inputs < 1:
            raise ValueError("OUTPUTS_CANDIDATE needs at least one (fixed) input")

    @property
    def q(self) -> int:
        if self.candidate_policy is CandidatePolicy.OUTPUTS_CANDIDATE:
            return self.n_outputs
        return self.n_inputs + self.n_outputs


def _parse_header(header: list[str]):
    if not header or header[0].strip() != "dmu":
        raise DatasetError("line 1: first column must be 'dmu'")
    variables = []
    for col, cell in enumerate(header[1:], start=2):
        kind, sep, name = cell.strip().partition(":")
        if not sep or kind not in _PREFIX or not name:
            raise DatasetError(f"line 1, column {col}: header {cell!r} is not 'in:<name>' or 'out:<name>'")
        variables.append((name, _PREFIX[kind]))
    names = [n for n, _ in variables]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise DatasetError(f"line 1: duplicate variable names: {', '.join(dup)}")
    return variables


def read_csv(stream: Iterable[str], fixed: Iterable[str] = (), constant_input: bool = False,
             source: str = "<csv>") -> Dataset:
    rows = csv.reader(stream)
    try:
        header = next(rows)
    except StopIteration:
        raise DatasetError(f"{source}: empty file") from None
    variables = _parse_header(header)
    fixed = {f.strip() for f in fixed if f.strip()}
    unknown = fixed - {n for n, _ in variables}
    if unknown:
        raise DatasetError(f"{source}: unknown fixed variable(s): {', '.join(sorted(unknown))}")
    dmus, values = [], []
    for line, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DatasetError(f"{source}, line {line}: expected {len(header)} cells, got {len(row)}")
        name = row[0].strip()
        if name in dmus:
            raise DatasetError(f"{source}, line {line}: duplicate DMU {name!r}")
        vals = []
        for (var, _), cell in zip(variables, row[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(f"{source}, line {line}, column {var!r}: "
                                   f"not a number: {cell!r}") from None
            if not math.isfinite(v):
                raise DatasetError(f"{source}, line {line}, column {var!r}: non-finite value {cell!r}")
            if v < 0:
                raise DatasetError(f"{source}, line {line}, column {var!r}: negative value {cell!r}")
            vals.append(v)
        dmus.append(name)
        values.append(vals)
    if not dmus:
        raise DatasetError(f"{source}: no data rows")
    defs = [VariableDef(n, r, Membership.FIXED if n in fixed else Membership.CANDIDATE)
            for n, r in variables]
    return Dataset(dmus, defs, np.array(values, dtype=float), constant_input)


def load_csv(path, fixed: Iterable[str] = (), constant_input: bool = False) -> Dataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return read_csv(fh, fixed, constant_input, source=str(path))


def _fmt(v: float) -> str:
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(float(v))


def dumps_csv(dataset: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dmu"] + [("in:" if v.role is Role.INPUT else "out:") + v.name
                          for v in dataset.variables])
    for name, row in zip(dataset.dmu_names, dataset.values):
        w.writerow([name] + [_fmt(float(v)) for v in row])
    return buf.getvalue()


def save_csv(dataset: Dataset, path) -> None:
    """Write ``dataset``; floats use their shortest round-trip repr."""
    Path(path).write_text(dumps_csv(dataset), encoding="utf-8")


def generate_random(config: GeneratorConfig) -> Dataset:
    rng = np.random.default_rng(config.seed)
    low, high = config.value_range
    k = config.n_inputs + config.n_outputs
    values = rng.uniform(low, high, size=(config.n_dmus, k))
    outputs_only = config.candidate_policy is CandidatePolicy.OUTPUTS_CANDIDATE
    variables = [VariableDef(f"x{i + 1}", Role.INPUT,
                             Membership.FIXED if outputs_only else Membership.CANDIDATE)
                 for i in range(config.n_inputs)]
    variables += [VariableDef(f"y{r + 1}", Role.OUTPUT) for r in range(config.n_outputs)]
    names = [f"DMU{j + 1}" for j in range(config.n_dmus)]
    # without generated inputs every DMU gets the unit input
    return Dataset(names, variables, values, constant_input_mode=config.n_inputs == 0)


TENNIS_RESOURCE = "tennis.csv"


def tennis_csv_text() -> str:
    return resources.files("robustdea").joinpath("data", TENNIS_RESOURCE).read_text(encoding="utf-8")


def tennis_dataset() -> Dataset:
    """46 players, nine percentage outputs, constant unit input."""
    return read_csv(io.StringIO(tennis_csv_text()), constant_input=True, source=TENNIS_RESOURCE)


def load_data(spec: str, fixed: Iterable[str] = (), constant_input: bool = False) -> Dataset:
    """``spec`` is a CSV path or the word ``tennis`` for the bundled corpus."""
    if spec == "tennis":
        text = tennis_csv_text()
        return read_csv(io.StringIO(text), fixed, True, source=TENNIS_RESOURCE)
    return load_csv(spec, fixed, constant_input)
