import csv
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from robustdea.dea import Dataset, Membership, Role, VariableDef
from robustdea.instances import tennis_dataset

settings.register_profile("ci", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile("ci")

DATA = Path(__file__).parent / "data"


def random_dataset(rng, n, n_in, n_out, fixed_inputs=0, low=50.0, high=100.0, integer=False):
    """Uniform data; the first ``fixed_inputs`` inputs are fixed, the rest candidates."""
    vals = rng.uniform(low, high, size=(n, n_in + n_out))
    if integer:
        vals = np.floor(vals)
    variables = [VariableDef(f"x{i}", Role.INPUT,
                             Membership.FIXED if i < fixed_inputs else Membership.CANDIDATE)
                 for i in range(n_in)]
    variables += [VariableDef(f"y{r}", Role.OUTPUT) for r in range(n_out)]
    return Dataset([f"d{j}" for j in range(n)], variables, vals)


@pytest.fixture(scope="session")
def tennis():
    return tennis_dataset()


@pytest.fixture(scope="session")
def tennis_reference():
    with open(DATA / "tennis_reference.csv", newline="") as fh:
        return {row["dmu"]: {k: float(v) for k, v in row.items() if k != "dmu"}
                for row in csv.DictReader(fh)}


@pytest.fixture(scope="session")
def tennis_scores(tennis):
    """Every subset score of every player, exact engine."""
    from robustdea.report import subset_scores
    scores, _ = subset_scores(tennis)
    return scores


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
