import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import maxcorr_2x2
from entdetect.coherence import c_alpha_rho_p_closed_form
from entdetect.divergences import relative_entropy, sandwiched_renyi
from entdetect.errors import ParameterError, ValidationError
from entdetect.linalg import DensityMatrix, kron, random_density_matrix
from entdetect.measures import (DEFAULT_ALPHA_GRID, assemble_sep_state, e_alpha_star_D, e_star_D,
                                exponent_curve, maxcorr_e_star, maxcorr_state, pure_state_e_alpha,
                                v_alpha_map, v_map)
from entdetect.nets import ComplexNet, basis_net, complex_net
from entdetect.solver import BlockState, SolverConfig

KL_UNIFORM_VS_09 = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)


def _random_state_blocks(rng, count, d):
    g = rng.standard_normal((count, d, d)) + 1j * rng.standard_normal((count, d, d))
    b = g @ np.swapaxes(g, 1, 2).conj() + 0.1 * np.eye(d)
    return BlockState(b / np.real(np.trace(b, axis1=1, axis2=2)).sum())


class TestAssemble:
    def test_single_point(self, rng):
        rho_a = random_density_matrix(3, rng)
        psi = np.array([0.6, 0.8j])
        net = ComplexNet.from_points(psi[None], eps2_bound=math.inf)
        out = assemble_sep_state(BlockState(rho_a.data[None]), net)
        assert np.allclose(out.data, kron(rho_a.data, np.outer(psi, psi.conj())))
        assert out.dims == (3, 2)

    def test_equal_blocks_on_basis(self, rng):
        rho_a = random_density_matrix(2, rng)
        blocks = np.stack([rho_a.data / 3] * 3)
        out = assemble_sep_state(BlockState(blocks), basis_net(3))
        assert np.allclose(out.data, kron(rho_a.data, np.eye(3) / 3))

    def test_mismatch(self):
        with pytest.raises(ValidationError):
            assemble_sep_state(BlockState.uniform(4, 2), complex_net(4, 2))

    @given(st.integers(0, 2**32 - 1))
    def test_always_valid(self, seed):
        rng = np.random.default_rng(seed)
        net = complex_net(4, 2)
        assemble_sep_state(_random_state_blocks(rng, len(net), 3), net)


class TestVMap:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20)
    def test_objective_identity(self, seed):
        rng = np.random.default_rng(seed)
        net = complex_net(4, 2)
        rho = random_density_matrix(6, rng, dims=(3, 2))
        state = _random_state_blocks(rng, len(net), 3)
        v = v_map(state, net, rho)
        lhs = np.real(np.einsum("cij,cji->", state.blocks, v))
        assert lhs == pytest.approx(relative_entropy(assemble_sep_state(state, net), rho), abs=1e-9)
        assert np.max(np.abs(v - np.swapaxes(v, 1, 2).conj())) < 1e-12

    def test_model_class_zero(self, rng):
        net = basis_net(2)
        rho_a = [random_density_matrix(2, rng).data for _ in range(2)]
        state = BlockState(np.stack([0.3 * rho_a[0], 0.7 * rho_a[1]]))
        rho = assemble_sep_state(state, net)
        v = v_map(state, net, rho)
        assert abs(np.real(np.einsum("cij,cji->", state.blocks, v))) < 1e-10


class TestVAlphaMap:
    def test_alpha_two_diagonal(self):
        # A trivial, basis net: V_c = q_c / r_c and sum q V = sum q^2 / r
        q, r = np.array([0.3, 0.7]), np.array([0.6, 0.4])
        rho = DensityMatrix(np.diag(r), (1, 2))
        state = BlockState(q.reshape(2, 1, 1).astype(complex))
        v = v_alpha_map(state, basis_net(2), rho, 2.0)
        assert np.allclose(v.ravel(), [0.5, 1.75])

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.5, 2.0, 3.0])
    def test_trace_identity(self, alpha, rng):
        net = complex_net(4, 2)
        rho = random_density_matrix(4, rng, dims=(2, 2))
        state = _random_state_blocks(rng, len(net), 2)
        v = v_alpha_map(state, net, rho, alpha)
        lhs = np.real(np.einsum("cij,cji->", state.blocks, v))
        sigma = assemble_sep_state(state, net)
        q = math.exp((alpha - 1) * sandwiched_renyi(sigma, rho, alpha))
        assert lhs == pytest.approx(q, abs=1e-9)
        assert np.max(np.abs(v - np.swapaxes(v, 1, 2).conj())) < 1e-12

    def test_bad_alpha(self):
        net = complex_net(4, 2)
        with pytest.raises(ParameterError):
            v_alpha_map(BlockState.uniform(16, 2), net, DensityMatrix(np.eye(4) / 4, (2, 2)), 1.0)


class TestEStarD:
    def test_product_state(self, rng):
        rho = DensityMatrix(kron(random_density_matrix(2, rng).data, random_density_matrix(2, rng).data), (2, 2))
        res = e_star_D(rho, complex_net(16, 2), SolverConfig(max_iter=1000))
        assert res.value <= 0.02

    def test_maximally_mixed(self):
        res = e_star_D(DensityMatrix(np.eye(4) / 4, (2, 2)), complex_net(16, 2), SolverConfig(max_iter=200))
        assert res.value <= 1e-6

    def test_maxcorr_closed_form(self):
        rho = maxcorr_2x2(0.9, 0.1)
        res = e_star_D(rho, complex_net(16, 2), SolverConfig(max_iter=2000))
        assert res.value == pytest.approx(KL_UNIFORM_VS_09, abs=0.01)
        # restriction can only raise the value
        assert res.value >= maxcorr_e_star([[0.5, 0.4], [0.4, 0.5]]) - 1e-9
        lo, hi = res.interval
        assert lo <= hi and lo <= res.value <= hi + res.gap_bound
        assert res.gap_bound == pytest.approx(math.log(2 * 256) / res.iterations)
        res.sep_state.data  # validated on construction

    def test_swap_larger_first(self, rng):
        rho = random_density_matrix(6, rng, dims=(2, 3))
        res = e_star_D(rho, complex_net(6, 2), SolverConfig(max_iter=100))
        assert res.swapped and res.sep_state.dims == (2, 3)
        assert res.value == pytest.approx(relative_entropy(res.sep_state, rho))

    def test_net_dim_checked(self, rng):
        rho = random_density_matrix(6, rng, dims=(3, 2))
        with pytest.raises(ValidationError):
            e_star_D(rho, complex_net(4, 3))

    def test_json(self, tmp_path, bell):
        res = e_star_D(bell, complex_net(4, 2), SolverConfig(max_iter=20))
        assert res.value == math.inf
        res.save(tmp_path / "m.json", tmp_path / "s.json")
        obj = json.loads((tmp_path / "m.json").read_text())
        assert obj["value"] == "inf"
        assert set(obj) >= {"value", "alpha", "iterations", "gap_bound", "interval", "eps2"}
        assert (tmp_path / "s.json").exists()


class TestEAlphaStarD:
    def test_bell_half(self, bell):
        res = e_alpha_star_D(bell, complex_net(16, 2), 0.5, SolverConfig(max_iter=2000, adaptive_gamma=True))
        assert res.value == pytest.approx(math.log(2), abs=0.02)

    def test_pure_product(self):
        psi = np.kron([0.6, 0.8], [1 / math.sqrt(2), 1j / math.sqrt(2)])
        rho = DensityMatrix.from_vector(psi, (2, 2))
        res = e_alpha_star_D(rho, complex_net(16, 2), 0.5, SolverConfig(max_iter=1000, adaptive_gamma=True))
        assert res.value <= 0.02

    def test_near_one(self):
        rho = maxcorr_2x2(0.9, 0.1)
        net = complex_net(16, 2)
        e1 = e_star_D(rho, net, SolverConfig(max_iter=1000)).value
        ea = e_alpha_star_D(rho, net, 0.999, SolverConfig(max_iter=1000, adaptive_gamma=True)).value
        assert ea == pytest.approx(e1, abs=0.05)

    @pytest.mark.parametrize("alpha", [0.05, 0.2, 0.75])
    def test_maxcorr_small_alpha(self, alpha):
        # the maximally correlated state reduces to the coherence problem on rho(p)
        expected = c_alpha_rho_p_closed_form([0.9, 0.1], alpha)
        res = e_alpha_star_D(maxcorr_2x2(0.9, 0.1), complex_net(16, 2), alpha,
                             SolverConfig(max_iter=2000, adaptive_gamma=True))
        assert res.value == pytest.approx(expected, abs=1e-6)
        assert res.dual_bound <= expected + 1e-9

    def test_monotone_in_alpha(self):
        rho = random_density_matrix(4, np.random.default_rng(11), dims=(2, 2))
        net = complex_net(8, 2)
        cfg = SolverConfig(max_iter=1500, adaptive_gamma=True)
        vals = [e_alpha_star_D(rho, net, a, cfg).value for a in (0.3, 0.5, 0.7, 0.9)]
        assert all(b >= a - 1e-3 for a, b in zip(vals, vals[1:]))

    def test_trace_form_runs(self, rng):
        rho = random_density_matrix(4, rng, dims=(2, 2))
        net = complex_net(8, 2)
        cfg = SolverConfig(max_iter=500, adaptive_gamma=True)
        a = e_alpha_star_D(rho, net, 2.0, cfg, form="trace").value
        b = e_alpha_star_D(rho, net, 2.0, cfg, form="norm").value
        assert a == pytest.approx(b, abs=1e-3)

    def test_bad_form(self, bell):
        with pytest.raises(ParameterError):
            e_alpha_star_D(bell, complex_net(4, 2), 0.5, form="other")


class TestClosedForms:
    @pytest.mark.parametrize("p,alpha,expected", [
        ([0.5, 0.5], 0.5, math.log(2)),
        ([1.0], 0.5, 0.0),
        ([0.25] * 4, 0.5, math.log(4)),
    ])
    def test_pure_state(self, p, alpha, expected):
        assert pure_state_e_alpha(p, alpha) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 0.0])
    def test_pure_state_bad_alpha(self, alpha):
        with pytest.raises(ParameterError):
            pure_state_e_alpha([0.5, 0.5], alpha)

    def test_pure_state_matches_bell_alpha_greater_one_infinite(self, bell):
        res = e_alpha_star_D(bell, complex_net(8, 2), 2.0, SolverConfig(max_iter=50, adaptive_gamma=True))
        assert res.value == math.inf

    def test_maxcorr_diagonal_zero(self):
        assert maxcorr_e_star(np.diag([0.3, 0.7])) == pytest.approx(0, abs=1e-12)

    def test_maxcorr_rho_p(self):
        assert maxcorr_e_star([[0.5, 0.4], [0.4, 0.5]]) == pytest.approx(KL_UNIFORM_VS_09, abs=1e-9)

    def test_maxcorr_state_layout(self):
        assert np.allclose(maxcorr_state([[0.5, 0.4], [0.4, 0.5]]).data, maxcorr_2x2(0.9, 0.1).data)

    def test_maxcorr_invalid(self):
        with pytest.raises(ValidationError):
            maxcorr_e_star([[0.5, 0.9], [0.9, 0.5]])


class TestExponentCurve:
    def test_constant(self):
        grid = [0.1, 0.5, 0.9, 1.5, 2.0]
        curve = exponent_curve({a: 0.4 for a in grid}, [0.0, 0.1])
        assert curve.achievability[0] == pytest.approx(0.4)
        assert curve.achievability[1] == pytest.approx(0.4 - 0.1 * 0.1 / 0.9)
        assert curve.strong_converse[0] == pytest.approx(0.4)

    def test_classical_pair(self):
        s, r = np.array([0.5, 0.3, 0.2]), np.array([0.2, 0.2, 0.6])
        sigma, rho = DensityMatrix(np.diag(s)), DensityMatrix(np.diag(r))
        e = {a: sandwiched_renyi(sigma, rho, a) for a in DEFAULT_ALPHA_GRID}
        r_grid = np.linspace(0, 1, 11)
        curve = exponent_curve(e, r_grid)
        for i, rate in enumerate(r_grid):
            ach = max(math.log(np.sum(s**a * r**(1 - a))) / (a - 1) - a * rate / (1 - a)
                      for a in DEFAULT_ALPHA_GRID if a < 1)
            conv = min(math.log(np.sum(s**a * r**(1 - a))) / (a - 1) + a * rate / (a - 1)
                       for a in DEFAULT_ALPHA_GRID if a > 1)
            assert curve.achievability[i] == pytest.approx(ach, abs=1e-9)
            assert curve.strong_converse[i] == pytest.approx(conv, abs=1e-9)

    @given(st.dictionaries(st.floats(0.01, 0.99), st.floats(0, 3), min_size=1, max_size=8))
    def test_achievability_nonincreasing(self, e):
        curve = exponent_curve(e, np.linspace(0, 2, 21))
        assert all(b <= a + 1e-12 for a, b in zip(curve.achievability, curve.achievability[1:]))
        assert curve.achievability[0] == pytest.approx(max(e.values()))
        assert all(math.isnan(x) for x in curve.strong_converse)

    def test_alpha_one_ignored(self):
        curve = exponent_curve({0.5: 0.1, 1.0: 99.0, 2.0: 0.3}, [0.0])
        assert curve.alpha_grid == [0.5, 2.0]

    def test_empty(self):
        with pytest.raises(ParameterError):
            exponent_curve({}, [0.0])

    def test_csv(self, tmp_path):
        curve = exponent_curve({0.5: 0.1, 2.0: 0.3}, [0.0, 0.1])
        curve.to_csv(tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_text().splitlines()[0] == "r,achievability,strong_converse"
