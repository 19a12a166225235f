"""Entanglement witnesses from the net-restricted minimizer.

With ``sigma*`` the minimizer and ``L = log sigma* - log rho``, the operator
``W = L - D(sigma*||rho) I`` vanishes in expectation on ``sigma*`` and is
negative on ``rho``.  Because ``sigma*`` only minimizes over the net model,
separable states are guaranteed ``Tr sigma W >= -||L|| eps2`` rather than
``>= 0``; that slack is stored with the witness.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .divergences import relative_entropy
from .errors import NumericalError, ParameterError, ValidationError
from .linalg import DEFAULT_EIG_FLOOR, DensityMatrix, haar_vectors, hermitize, logm, op_norm, save_matrix
from .measures import MeasureResult, block_reduce
from .nets import ComplexNet

MARGIN_ATOL = 1e-12  # rounding allowance when counting margins below -slack


@dataclass(frozen=True, eq=False)
class WitnessOperator:
    W: np.ndarray
    offset: float
    sigma_star: DensityMatrix
    eps2: float
    slack: float
    dims: Tuple[int, int]
    tr_rho_w: float = math.nan
    gap_bound: float = math.nan  # convergence bound of the run that produced sigma*

    @property
    def log_ratio(self) -> np.ndarray:
        """``log sigma* - log rho``, i.e. ``W`` without the offset."""
        return self.W + self.offset * np.eye(self.W.shape[0])

    def save(self, path, sidecar_path=None, report: Optional["WitnessReport"] = None) -> None:
        save_matrix(path, self.W, self.dims)
        meta = {
            "offset": self.offset,
            "eps2": self.eps2,
            "slack": self.slack,
            "tr_rho_W": self.tr_rho_w,
            "min_sampled_margin": None if report is None else report.min_margin,
        }
        with open(sidecar_path or f"{path}.meta.json", "w") as fh:
            json.dump(meta, fh, indent=2)


@dataclass
class WitnessReport:
    samples: int
    min_margin: float
    violations: int
    tr_rho_w: float
    slack: float
    net_min_margin: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.violations == 0 and (self.net_min_margin is None
                                         or self.net_min_margin >= -self.slack - MARGIN_ATOL)


def extract_witness(rho: DensityMatrix, measure: MeasureResult,
                    eig_floor: float = DEFAULT_EIG_FLOOR) -> WitnessOperator:
    """Build the witness from the minimizer stored in ``measure``."""
    sigma = measure.sep_state
    if sigma is None:
        raise ValidationError("the measure result carries no minimizer")
    if sigma.dims != rho.dims:
        raise ValidationError(f"dims {sigma.dims} of the minimizer differ from {rho.dims}")
    offset = relative_entropy(sigma, rho, eig_floor)
    if not math.isfinite(offset):
        raise NumericalError("D(sigma*||rho) is infinite; rho lacks support where sigma* has weight")
    ratio = hermitize(logm(sigma.data, eig_floor) - logm(rho.data, eig_floor))
    w = ratio - offset * np.eye(rho.dim)
    tr_rho_w = float(np.real(np.trace(rho.data @ w)))
    slack = op_norm(ratio) * measure.eps2_used
    return WitnessOperator(w, offset, sigma, measure.eps2_used, slack, rho.dims,
                           tr_rho_w, measure.gap_bound)


def witness_margin(w: WitnessOperator, sigma) -> float:
    """``Tr sigma W``."""
    s = sigma.data if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    if s.shape != w.W.shape:
        raise ValidationError(f"state of shape {s.shape} does not match witness {w.W.shape}")
    return float(np.real(np.trace(s @ w.W)))


def product_margins(w: WitnessOperator, vec_a: np.ndarray, vec_b: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """``<a b| W |a b>`` for paired rows of ``vec_a`` and ``vec_b``."""
    d_a, d_b = w.dims
    t = w.W.reshape(d_a, d_b, d_a, d_b)
    out = np.empty(vec_a.shape[0])
    for i in range(0, vec_a.shape[0], chunk):
        a, b = vec_a[i:i + chunk], vec_b[i:i + chunk]
        m = np.einsum("na,nb,abcd,nc,nd->n", a.conj(), b.conj(), t, a, b, optimize=True)
        out[i:i + chunk] = m.real
    return out


def net_min_margin(w: WitnessOperator, net: ComplexNet) -> float:
    """Exact minimum of ``Tr W (phi (x) psi_c)`` over all pure ``phi`` and net points ``psi_c``."""
    if net.d != w.dims[1]:
        raise ValidationError("net dimension differs from the B system")
    blocks = block_reduce(w.W, net.projectors, w.dims[0])
    return float(np.min(np.linalg.eigvalsh(blocks)))


def validate_witness(w: WitnessOperator, samples: int, seed: int = 0,
                     net: Optional[ComplexNet] = None) -> WitnessReport:
    """Check the separable-margin guarantee on random product states.

    Draws ``samples`` Haar-random ``phi (x) psi`` (A vectors first, then B,
    from one generator seeded with ``seed``) and counts margins below
    ``-slack`` (less a rounding allowance).  With ``net`` given, also
    minimizes exactly over the A state for every net point on B.
    """
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    d_a, d_b = w.dims
    vec_a = haar_vectors(d_a, samples, rng)
    vec_b = haar_vectors(d_b, samples, rng)
    margins = product_margins(w, vec_a, vec_b)
    report = WitnessReport(samples, float(np.min(margins)), int(np.sum(margins < -w.slack - MARGIN_ATOL)),
                           w.tr_rho_w, w.slack)
    if net is not None:
        report.net_min_margin = net_min_margin(w, net)
    return report


# --- hyperplane geometry ----------------------------------------------------------

def hyperplane_points(w: WitnessOperator, count: int, rng: np.random.Generator,
                      scale: float = 0.5) -> list:
    """States ``sigma* + H`` with ``Tr H = 0`` and ``Tr H W = 0``.

    ``H`` is a random Hermitian direction with the identity and ``W``
    components projected out, sized to keep the result positive definite.
    """
    sig = w.sigma_star.data
    dim = sig.shape[0]
    lmin = float(np.linalg.eigvalsh(sig)[0])
    if lmin <= 0:
        raise NumericalError("sigma* is singular; no interior hyperplane points")
    eye = np.eye(dim) / math.sqrt(dim)
    l0 = w.log_ratio - np.trace(w.log_ratio).real / dim * np.eye(dim)
    l0 = l0 / np.linalg.norm(l0) if np.linalg.norm(l0) > 0 else l0
    pts = []
    for _ in range(count):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        h = 0.5 * (g + g.conj().T)
        for b in (eye, l0):
            h = h - np.real(np.trace(b @ h)) * b
        h = h / op_norm(h) * lmin * scale * rng.uniform()
        pts.append(DensityMatrix(sig + h, w.dims))
    return pts


def pythagorean_residual(w: WitnessOperator, rho: DensityMatrix, sigma: DensityMatrix,
                         eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    """``D(sigma||rho) - D(sigma||sigma*) - D(sigma*||rho)`` (zero on the hyperplane)."""
    return (relative_entropy(sigma, rho, eig_floor) - relative_entropy(sigma, w.sigma_star, eig_floor)
            - w.offset)


# --- local-operator expansion -------------------------------------------------------

def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of ``d x d`` Hermitian matrices, shape ``(d*d, d, d)``."""
    out = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1.0
        out.append(e)
    r = 1 / math.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = r
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j * r, 1j * r
            out.extend([s, a])
    return np.array(out)


def product_coefficients(op: np.ndarray, dims: Tuple[int, int]) -> np.ndarray:
    """Real coefficients ``c[i, j] = Tr op (G_i (x) H_j)`` in product Hermitian bases."""
    d_a, d_b = dims
    ga, gb = hermitian_basis(d_a), hermitian_basis(d_b)
    t = np.asarray(op).reshape(d_a, d_b, d_a, d_b)
    c = np.einsum("ikjl,mji,nlk->mn", t, ga, gb)
    return c.real


def from_product_coefficients(coeffs: np.ndarray, dims: Tuple[int, int]) -> np.ndarray:
    d_a, d_b = dims
    ga, gb = hermitian_basis(d_a), hermitian_basis(d_b)
    t = np.einsum("mn,mij,nkl->ikjl", coeffs, ga, gb)
    return t.reshape(d_a * d_b, d_a * d_b)
