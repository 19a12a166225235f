import json
import math

import numpy as np
import pytest

from entdetect.divergences import relative_entropy
from entdetect.errors import NumericalError, ValidationError
from entdetect.linalg import DensityMatrix, kron, logm, op_norm, random_density_matrix
from entdetect.measures import e_star_D
from entdetect.nets import complex_net
from entdetect.solver import SolverConfig
from entdetect.states import rho_p_lambda_delta
from entdetect.witness import (extract_witness, from_product_coefficients, hermitian_basis,
                               hyperplane_points, net_min_margin, product_coefficients, product_margins,
                               pythagorean_residual, validate_witness, witness_margin)


@pytest.fixture(scope="module")
def instance():
    rho = rho_p_lambda_delta(0.5, 0.9, 0.01)
    net = complex_net(16, 2)
    res = e_star_D(rho, net, SolverConfig(max_iter=1500))
    return rho, net, res, extract_witness(rho, res)


class TestExtract:
    def test_definition(self, instance):
        rho, _, res, w = instance
        expected = logm(res.sep_state.data) - logm(rho.data) - w.offset * np.eye(8)
        assert np.max(np.abs(w.W - expected)) < 1e-10
        assert w.offset == pytest.approx(relative_entropy(res.sep_state, rho))
        assert w.slack == pytest.approx(op_norm(w.log_ratio) * res.eps2_used)

    def test_log_ratio_on_rho(self, instance):
        rho, _, res, w = instance
        lhs = np.real(np.trace(rho.data @ w.log_ratio))
        assert lhs == pytest.approx(-relative_entropy(rho, res.sep_state), abs=1e-8)
        assert w.tr_rho_w == pytest.approx(lhs - w.offset, abs=1e-8)
        assert w.tr_rho_w < 0

    def test_sigma_star_on_hyperplane(self, instance):
        _, _, res, w = instance
        assert witness_margin(w, res.sep_state) == pytest.approx(0, abs=1e-8)

    def test_separable_rho_equals_sigma(self, rng):
        rho = DensityMatrix(kron(random_density_matrix(2, rng).data, np.eye(2) / 2), (2, 2))
        res = e_star_D(rho, complex_net(8, 2), SolverConfig(max_iter=300))
        res.sep_state = rho
        w = extract_witness(rho, res)
        assert w.tr_rho_w == pytest.approx(0, abs=1e-10)
        report = validate_witness(w, 200)
        assert report.violations == 0

    def test_infinite_offset(self, bell):
        res = e_star_D(bell, complex_net(4, 2), SolverConfig(max_iter=10))
        with pytest.raises(NumericalError):
            extract_witness(bell, res)

    def test_dims_must_match(self, instance, rng):
        _, _, res, _ = instance
        with pytest.raises(ValidationError):
            extract_witness(random_density_matrix(8, rng, dims=(2, 4)), res)


class TestMargins:
    def test_dimension_mismatch(self, instance):
        _, _, _, w = instance
        with pytest.raises(ValidationError):
            witness_margin(w, np.eye(4) / 4)

    def test_product_margins_vs_explicit(self, instance, rng):
        _, _, _, w = instance
        a = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
        b = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        explicit = [np.real(np.vdot(np.kron(x, y), w.W @ np.kron(x, y))) for x, y in zip(a, b)]
        assert np.allclose(product_margins(w, a, b, chunk=2), explicit)

    def test_net_min_margin_vs_sampling(self, instance, rng):
        _, net, _, w = instance
        exact = net_min_margin(w, net)
        idx = rng.integers(len(net), size=2000)
        a = rng.standard_normal((2000, 4)) + 1j * rng.standard_normal((2000, 4))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        assert exact <= np.min(product_margins(w, a, net.points[idx])) + 1e-12

    def test_validate_reports(self, instance):
        _, net, _, w = instance
        report = validate_witness(w, 2000, seed=1, net=net)
        assert report.violations == 0 and report.ok
        assert report.net_min_margin >= -w.slack
        again = validate_witness(w, 2000, seed=1)
        assert again.min_margin == report.min_margin


class TestGeometry:
    def test_pythagorean(self, instance):
        rho, _, _, w = instance
        pts = hyperplane_points(w, 20, np.random.default_rng(0))
        for p in pts:
            assert abs(np.trace(p.data @ w.W)) < 1e-8
            assert abs(pythagorean_residual(w, rho, p)) < 1e-6

    def test_hermitian_basis_orthonormal(self):
        for d in (2, 3, 4):
            g = hermitian_basis(d)
            gram = np.einsum("mij,nji->mn", g, g)
            assert g.shape == (d * d, d, d)
            assert np.allclose(gram, np.eye(d * d))

    def test_product_expansion(self, instance):
        _, _, _, w = instance
        c = product_coefficients(w.W, w.dims)
        assert c.shape == (16, 4)
        assert np.max(np.abs(from_product_coefficients(c, w.dims) - w.W)) < 1e-10


def test_save_sidecar(instance, tmp_path):
    _, _, _, w = instance
    report = validate_witness(w, 100)
    w.save(tmp_path / "w.json", report=report)
    meta = json.loads((tmp_path / "w.json.meta.json").read_text())
    assert set(meta) == {"offset", "eps2", "slack", "tr_rho_W", "min_sampled_margin"}
    assert meta["min_sampled_margin"] == report.min_margin
