import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_dataset
from robustdea.dea import (Dataset, DatasetError, MaskError, Membership, ModelSpec, ReturnsToScale,
                           Role, ScoreError, VariableDef, build_lp, dual_weights, efficiency_score,
                           is_degenerate, row_labels, solve_mask, transfer_basis)
from robustdea.lp import EQ, Basis

VRS = ModelSpec(ReturnsToScale.VRS)


def two_dmu():
    return Dataset(["A", "B"], [VariableDef("x", Role.INPUT), VariableDef("y", Role.OUTPUT)],
                   [[1.0, 2.0], [1.0, 4.0]])


class TestDataset:
    def test_shape_mismatch(self):
        with pytest.raises(DatasetError, match="shape"):
            Dataset(["A"], [VariableDef("y", Role.OUTPUT)], [[1.0, 2.0]], True)

    def test_negative_value_is_located(self):
        with pytest.raises(DatasetError, match=r"'B'.*'y'"):
            Dataset(["A", "B"], [VariableDef("x", Role.INPUT), VariableDef("y", Role.OUTPUT)],
                    [[1.0, 2.0], [1.0, -4.0]])

    def test_needs_positive_output(self):
        with pytest.raises(DatasetError, match="positive output"):
            Dataset(["A"], [VariableDef("x", Role.INPUT), VariableDef("y", Role.OUTPUT)], [[1.0, 0.0]])

    def test_needs_input(self):
        with pytest.raises(DatasetError, match="no inputs"):
            Dataset(["A"], [VariableDef("y", Role.OUTPUT)], [[1.0]])
        Dataset(["A"], [VariableDef("y", Role.OUTPUT)], [[1.0]], constant_input_mode=True)

    def test_duplicate_names(self):
        with pytest.raises(DatasetError, match="duplicate"):
            Dataset(["A"], [VariableDef("y", Role.OUTPUT), VariableDef("y", Role.OUTPUT)],
                    [[1.0, 1.0]], True)

    def test_candidate_limit(self):
        with pytest.raises(DatasetError, match="limit"):
            Dataset(["A"], [VariableDef(f"y{i}", Role.OUTPUT) for i in range(31)],
                    np.ones((1, 31)), True)

    def test_fixed_variables_are_not_candidates(self):
        ds = Dataset(["A"], [VariableDef("x", Role.INPUT, Membership.FIXED),
                             VariableDef("y", Role.OUTPUT), VariableDef("z", Role.OUTPUT)],
                     [[1.0, 2.0, 3.0]])
        assert ds.q == 2 and ds.candidate_names == ["y", "z"]
        assert ds.effective_columns(0b10) == [0, 2]


class TestBuildLp:
    def test_row_order_and_convexity(self):
        ds = random_dataset(np.random.default_rng(0), 5, 2, 3)
        labels = row_labels(ds, ds.full_mask, VRS)
        assert [k for k, _ in labels] == ["in", "in", "out", "out", "out", "conv"]
        lp = build_lp(ds, 0, ds.full_mask, VRS)
        eq = [i for i, s in enumerate(lp.constraint_senses) if s == EQ]
        assert eq == [lp.n_rows - 1]
        np.testing.assert_array_equal(lp.constraint_matrix[-1], np.r_[0.0, np.ones(5)])

    def test_constant_input_row(self, tennis):
        labels = row_labels(tennis, 0b1)
        assert labels == (("in", "const"), ("out", 0))

    def test_degenerate_mask_rejected(self):
        ds = random_dataset(np.random.default_rng(0), 4, 1, 2)
        with pytest.raises(MaskError, match="0b110"):
            build_lp(ds, 0, 0b110)
        with pytest.raises(MaskError):
            build_lp(ds, 0, 1 << 5)

    def test_two_dmu_ratio(self):
        assert efficiency_score(two_dmu(), 0, 0b11) == pytest.approx(0.5)
        assert efficiency_score(two_dmu(), 1, 0b11) == pytest.approx(1.0)


class TestEfficiencyScore:
    def test_empty_mask(self):
        assert efficiency_score(two_dmu(), 0, 0) == 1.0

    def test_degenerate_masks(self):
        ds = random_dataset(np.random.default_rng(1), 6, 2, 2)
        # only inputs, or only outputs
        for mask in (0b0001, 0b0011, 0b0100, 0b1100):
            assert is_degenerate(ds, mask)
            assert efficiency_score(ds, 2, mask) == 1.0
        assert not is_degenerate(ds, 0b0101)

    def test_lone_dmu(self):
        ds = random_dataset(np.random.default_rng(2), 1, 2, 3)
        for mask in range(1, 1 << ds.q):
            assert efficiency_score(ds, 0, mask) == pytest.approx(1.0)

    def test_djokovic_full_mask(self, tennis):
        j = tennis.dmu_names.index("Novak Djokovic")
        assert efficiency_score(tennis, j, tennis.full_mask) == pytest.approx(1.0, abs=1e-9)

    def test_clamp_rejects_large_excursion(self):
        import robustdea.dea as dea
        assert dea._clamp(1.0 + 5e-10, 1, 0) == 1.0
        with pytest.raises(ScoreError, match="outside"):
            dea._clamp(1.0 + 1e-6, 1, 0)


class TestDualWeights:
    def test_shape_and_zero_for_unselected(self):
        ds = random_dataset(np.random.default_rng(3), 8, 2, 3)
        res = solve_mask(ds, 0, 0b01101)
        w = dual_weights(res.solution, ds, 0b01101)
        assert w.shape == (ds.q,)
        assert w[1] == 0 and w[4] == 0
        assert (w >= 0).all()

    def test_single_output_carries_the_multiplier(self):
        res = solve_mask(two_dmu(), 0, 0b11)
        w = dual_weights(res.solution, two_dmu(), 0b11)
        # v * x_A = 1 and u * y_A = theta
        np.testing.assert_allclose(w, [1.0, 0.25])

    def test_isner_relies_on_serve(self, tennis):
        # outputs 1-5 are service statistics, 6-9 return statistics
        j = tennis.dmu_names.index("John Isner")
        res = solve_mask(tennis, j, tennis.full_mask)
        w = dual_weights(res.solution, tennis, tennis.full_mask)
        assert w[:5].sum() > 0 and w[5:].sum() == 0


def test_transfer_basis_keeps_structurals_and_adds_logicals():
    parent = (("in", 0), ("out", 2))
    child = (("in", 0), ("in", 1), ("out", 2))
    n_vars = 5
    b = transfer_basis(Basis((3, n_vars + 0)), parent, child, n_vars)
    assert b.basic_variable_indices == (3, n_vars + 0, n_vars + 1)


@given(seed=st.integers(0, 2**31), col=st.integers(0, 4), factor=st.floats(0.01, 100.0))
def test_unit_invariance(seed, col, factor):
    ds = random_dataset(np.random.default_rng(seed), 7, 2, 3)
    scaled = ds.values.copy()
    scaled[:, col] *= factor
    ds2 = ds.with_values(scaled)
    for mask in (ds.full_mask, 0b00101, 0b11010):
        assert efficiency_score(ds2, 1, mask) == pytest.approx(efficiency_score(ds, 1, mask), abs=1e-9)


@given(seed=st.integers(0, 2**31))
def test_monotone_in_variable_set_and_crs_below_vrs(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, int(rng.integers(2, 12)), 2, 3)
    dmu = int(rng.integers(ds.n))
    checked = 0
    while checked < 10:
        small = int(rng.integers(1 << ds.q))
        big = small | int(rng.integers(1 << ds.q))
        # the unit score of degenerate masks sits outside the ordering
        if is_degenerate(ds, small):
            continue
        checked += 1
        assert efficiency_score(ds, dmu, small) <= efficiency_score(ds, dmu, big) + 1e-9
        crs = efficiency_score(ds, dmu, big)
        vrs = efficiency_score(ds, dmu, big, VRS)
        assert crs <= vrs + 1e-9
        assert 0.0 <= crs <= 1.0 and vrs <= 1.0
