import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifgi.chain import (
    ChainParams,
    PathAmplitudes,
    absorption_weight,
    compute_transfer,
    cycle_step,
    transfer_grid,
)

from .conftest import matrix_transfer

losses = st.floats(0.0, 1.0, allow_nan=False)


def test_params_derived_quantities():
    p = ChainParams(4, 0.19, 0.36)
    assert p.theta == math.pi / 8
    assert p.eta0 == pytest.approx(0.9)
    assert p.eta1 == pytest.approx(0.8)


@pytest.mark.parametrize("bad", [dict(M=0), dict(M=2.5), dict(M=3, gamma0=-0.1), dict(M=3, gamma1=1.01)])
def test_params_rejects_invalid(bad):
    with pytest.raises(ValueError):
        ChainParams(**bad)


@given(st.integers(1, 200), losses, losses)
def test_eta_squared_plus_gamma_is_one(M, g0, g1):
    p = ChainParams(M, g0, g1)
    assert p.eta0**2 + p.gamma0 == pytest.approx(1.0, abs=1e-15)
    assert p.eta1**2 + p.gamma1 == pytest.approx(1.0, abs=1e-15)


class TestCycleStep:
    def test_quarter_turn_transparent(self):
        state, absorbed = cycle_step(PathAmplitudes(1, 0), ChainParams(1), "transparent")
        assert state.lower == pytest.approx(0, abs=1e-15)
        assert state.upper == pytest.approx(1)
        assert absorbed == 0

    def test_quarter_turn_opaque_absorbs_everything(self):
        state, absorbed = cycle_step(PathAmplitudes(1, 0), ChainParams(1), "opaque")
        assert state.lower == pytest.approx(0, abs=1e-15)
        assert state.upper == 0
        assert absorbed == pytest.approx(1)

    def test_small_angle_opaque(self):
        state, absorbed = cycle_step(PathAmplitudes(1, 0), ChainParams(5), "opaque")
        assert state.lower == pytest.approx(math.cos(math.pi / 10))
        assert state.upper == 0
        assert absorbed == pytest.approx(0.309016994374947424, abs=1e-15)

    def test_mirror_applied_after_sample(self):
        p = ChainParams(3, 0.36, 0.75)
        state, absorbed = cycle_step(PathAmplitudes(0.6, 0.8), p, "transparent")
        c, s = math.cos(p.theta), math.sin(p.theta)
        assert state.lower == pytest.approx(0.8 * (0.6 * c - 0.8 * s))
        assert state.upper == pytest.approx(0.5 * (0.6 * s + 0.8 * c))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            cycle_step(PathAmplitudes(), ChainParams(2), "grey")

    @given(st.integers(1, 30), losses, losses, st.floats(0, 2 * math.pi))
    def test_norm_never_grows(self, M, g0, g1, phi):
        start = PathAmplitudes(math.cos(phi), math.sin(phi))
        for kind in ("transparent", "opaque"):
            state, absorbed = cycle_step(start, ChainParams(M, g0, g1), kind)
            assert state.power + abs(absorbed) ** 2 <= 1 + 1e-12


def test_compute_transfer_equals_iterated_cycle_step():
    p = ChainParams(7, 0.2, 0.05)
    tc = compute_transfer(p)
    for kind, (c0, c1) in (("transparent", (tc.chi_p0, tc.chi_p1)), ("opaque", (tc.chi_b0, tc.chi_b1))):
        state, absorbed = PathAmplitudes(), []
        for _ in range(p.M):
            state, a = cycle_step(state, p, kind)
            absorbed.append(a)
        assert (state.lower, state.upper) == (c0, c1)
        if kind == "opaque":
            np.testing.assert_array_equal(absorbed, tc.chi_abs)


def test_single_pass_is_traditional_setup():
    tc = compute_transfer(ChainParams(1))
    assert abs(tc.chi_p0) < 1e-15
    assert tc.chi_p1 == pytest.approx(1)
    assert abs(tc.chi_b0) < 1e-15
    assert tc.chi_b1 == 0
    assert tc.absorption_weight == pytest.approx(1)


def test_five_stage_ideal_values():
    tc = compute_transfer(ChainParams(5))
    assert tc.chi_b0.real == pytest.approx(0.778093214025868835, abs=1e-14)
    assert tc.absorption_weight == pytest.approx(0.394570950286893473, abs=1e-14)


@pytest.mark.parametrize("M", [100, 400, 2000])
def test_large_m_limits(M):
    tc = compute_transfer(ChainParams(M))
    assert abs(tc.chi_p1) == pytest.approx(1, abs=1e-10)
    assert abs(tc.chi_b0) == pytest.approx(1, abs=2 * math.pi**2 / (8 * M))
    assert tc.absorption_weight * 4 * M / math.pi**2 == pytest.approx(1, rel=2.0 / M)


@pytest.mark.parametrize(
    "params, expected",
    [
        (ChainParams(1), 1.0),
        (ChainParams(10), 0.219453930218859830),
        (ChainParams(10, gamma0=1.0), 0.0244717418524232139),
    ],
)
def test_absorption_weight_examples(params, expected):
    assert absorption_weight(params) == pytest.approx(expected, abs=1e-14)
    assert compute_transfer(params).absorption_weight == pytest.approx(expected, abs=1e-14)


@settings(max_examples=200)
@given(st.integers(1, 60), losses, losses)
def test_matches_matrix_oracle(M, g0, g1):
    tc = compute_transfer(ChainParams(M, g0, g1))
    p0, p1, b0, b1, absorbed = matrix_transfer(M, g0, g1)
    np.testing.assert_allclose([tc.chi_p0, tc.chi_p1, tc.chi_b0, tc.chi_b1], [p0, p1, b0, b1], atol=1e-12)
    np.testing.assert_allclose(tc.chi_abs, absorbed, atol=1e-12)
    assert tc.absorption_weight == pytest.approx(absorption_weight(ChainParams(M, g0, g1)), abs=1e-12)


@given(st.integers(1, 60), losses, losses)
def test_closed_forms_and_dissipation(M, g0, g1):
    p = ChainParams(M, g0, g1)
    tc = compute_transfer(p)
    q = p.eta0 * math.cos(p.theta)
    assert tc.chi_b1 == 0
    assert abs(tc.chi_b0 - q**M) <= 1e-12
    m = np.arange(1, M + 1)
    np.testing.assert_allclose(tc.chi_abs, q ** (m - 1) * math.sin(p.theta), atol=1e-12, rtol=0)
    assert abs(tc.chi_p0) ** 2 + abs(tc.chi_p1) ** 2 <= 1 + 1e-12
    assert abs(tc.chi_b0) ** 2 + tc.absorption_weight <= 1 + 1e-12


def test_transfer_grid_matches_scalar():
    g = np.linspace(0, 0.99, 7)
    G0, G1 = np.meshgrid(g, g, indexing="ij")
    tc = transfer_grid(6, G0, G1)
    for i in range(len(g)):
        for j in range(len(g)):
            ref = compute_transfer(ChainParams(6, g[i], g[j]))
            assert tc.chi_p0[i, j] == ref.chi_p0
            assert tc.chi_p1[i, j] == ref.chi_p1
            assert tc.chi_b0[i, j] == ref.chi_b0
            np.testing.assert_array_equal(tc.chi_abs[:, i, j], ref.chi_abs)


def test_transfer_grid_rejects_bad_loss():
    with pytest.raises(ValueError):
        transfer_grid(3, [0.1, 1.2], 0.0)
