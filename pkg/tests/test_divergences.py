import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entdetect.divergences import approximation_gap, eta0, relative_entropy, sandwiched_renyi
from entdetect.errors import ParameterError, ValidationError
from entdetect.linalg import DensityMatrix, random_density_matrix

seeds = st.integers(0, 2**32 - 1)


def _diag(*p):
    return DensityMatrix(np.diag(p))


def _classical_renyi(s, r, alpha):
    s, r = np.asarray(s), np.asarray(r)
    return math.log(np.sum(s**alpha * r**(1 - alpha))) / (alpha - 1)


class TestRelativeEntropy:
    @pytest.mark.parametrize("seed", range(4))
    def test_self_zero(self, seed):
        rho = random_density_matrix(4, np.random.default_rng(seed))
        assert abs(relative_entropy(rho, rho)) < 1e-10

    def test_classical_kl(self):
        expected = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)
        assert relative_entropy(_diag(0.5, 0.5), _diag(0.9, 0.1)) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.51083, abs=1e-5)

    def test_disjoint_support_infinite(self):
        assert relative_entropy(_diag(0.0, 1.0), _diag(1.0, 0.0)) == math.inf

    def test_shared_support_finite(self):
        assert math.isfinite(relative_entropy(_diag(1.0, 0.0), _diag(0.5, 0.5)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            relative_entropy(_diag(1.0, 0.0), DensityMatrix(np.eye(3) / 3))

    @given(seeds, st.integers(2, 5))
    def test_nonnegative(self, seed, d):
        rng = np.random.default_rng(seed)
        s, r = random_density_matrix(d, rng), random_density_matrix(d, rng)
        assert relative_entropy(s, r) >= -1e-9

    @given(seeds, st.integers(2, 5))
    def test_dominates_diagonal_kl(self, seed, d):
        rng = np.random.default_rng(seed)
        s, r = random_density_matrix(d, rng), random_density_matrix(d, rng)
        ps, pr = np.diag(s.data).real, np.diag(r.data).real
        assert relative_entropy(s, r) >= float(np.sum(ps * np.log(ps / pr))) - 1e-9


class TestSandwichedRenyi:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 2.0, 3.0])
    def test_self_zero(self, alpha, rng):
        rho = random_density_matrix(3, rng)
        assert abs(sandwiched_renyi(rho, rho, alpha)) < 1e-10

    def test_classical_half(self):
        expected = -2 * math.log(math.sqrt(0.45) + math.sqrt(0.05))
        assert sandwiched_renyi(_diag(0.5, 0.5), _diag(0.9, 0.1), 0.5) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(math.log(1.25), abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.1, 0.7, 1.5, 2.0, 4.0])
    def test_commuting_matches_classical(self, alpha, rng):
        s, r = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        value = sandwiched_renyi(_diag(*s), _diag(*r), alpha)
        assert value == pytest.approx(_classical_renyi(s, r, alpha), abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.02, 0.05])
    def test_small_alpha_wide_spectrum_rotated(self, alpha, rng):
        # Z has eigenvalues near 1e-20 here; they still weigh in at small alpha
        s, r = np.array([0.5, 0.3, 0.2]), np.array([0.9, 0.0999, 0.0001])
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        rot = lambda p: DensityMatrix(q @ np.diag(p) @ q.conj().T)
        value = sandwiched_renyi(rot(s), rot(r), alpha)
        assert value == pytest.approx(_classical_renyi(s, r, alpha), rel=1e-7)

    @pytest.mark.parametrize("seed", range(3))
    def test_limit_one(self, seed):
        rng = np.random.default_rng(seed)
        s, r = random_density_matrix(3, rng), random_density_matrix(3, rng)
        assert sandwiched_renyi(s, r, 0.999) == pytest.approx(relative_entropy(s, r), abs=1e-2)

    @pytest.mark.parametrize("alpha", [0.0, -1.0, 1.0])
    def test_bad_alpha(self, alpha):
        with pytest.raises(ParameterError):
            sandwiched_renyi(_diag(0.5, 0.5), _diag(0.5, 0.5), alpha)

    @given(seeds)
    def test_monotone_in_alpha(self, seed):
        rng = np.random.default_rng(seed)
        s, r = random_density_matrix(3, rng), random_density_matrix(3, rng)
        vals = [sandwiched_renyi(s, r, a) for a in (0.3, 0.5, 0.7, 0.9, 1.1, 1.5, 2.0)]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


class TestEta0:
    def test_zero(self):
        assert eta0(0.0) == 0.0

    def test_knee(self):
        assert eta0(1 / math.e) == pytest.approx(1 / math.e)

    def test_point(self):
        assert eta0(0.1) == pytest.approx(0.23026, abs=1e-5)

    def test_flat_beyond(self):
        assert eta0(3.0) == 1 / math.e

    def test_negative(self):
        with pytest.raises(ParameterError):
            eta0(-0.1)


class TestApproximationGap:
    def test_zero_eps(self):
        assert approximation_gap(0.0, DensityMatrix(np.eye(4) / 4, (2, 2))) == 0.0

    def test_mixed(self):
        expected = 0.1 * (math.log(4) + math.log(4)) - 0.1 * math.log(0.1)
        assert approximation_gap(0.1, DensityMatrix(np.eye(4) / 4, (2, 2))) == pytest.approx(expected)
        assert expected == pytest.approx(0.50752, abs=1e-5)

    def test_needs_dims(self):
        with pytest.raises(ValidationError):
            approximation_gap(0.1, DensityMatrix(np.eye(4) / 4))

    def test_monotone(self, rng):
        rho = random_density_matrix(6, rng, dims=(3, 2))
        gaps = [approximation_gap(e, rho) for e in np.linspace(0, 2, 41)]
        assert all(b >= a for a, b in zip(gaps, gaps[1:]))
