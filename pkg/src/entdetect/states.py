"""The phase-damped two-branch family on ``C^4 (x) C^2``."""

import math
import warnings

import numpy as np

from .errors import ParameterError
from .linalg import DensityMatrix


def phi_theta(theta: float) -> np.ndarray:
    """``(|0> + e^{i theta}|1>) / sqrt 2``."""
    return np.array([1.0, np.exp(1j * theta)]) / math.sqrt(2)


def _damp(mat: np.ndarray, lam: float) -> np.ndarray:
    out = mat.copy()
    out[0, 1] *= lam
    out[1, 0] *= lam
    return out


def phase_damping(rho, lam: float) -> np.ndarray:
    """Qubit channel keeping the diagonal and scaling off-diagonals by ``lam``."""
    if not 0 <= lam <= 1:
        raise ParameterError(f"lambda must lie in [0, 1], got {lam!r}")
    mat = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if mat.shape != (2, 2):
        raise ParameterError("phase damping acts on a qubit")
    return _damp(mat, lam)


def psi_p(p: float) -> np.ndarray:
    """``sqrt(p)|phi_0 phi_0 0> + sqrt(1-p)|phi_pi/2 phi_pi/2 1>`` as an 8-vector."""
    if not 0 <= p <= 1:
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    a, b = phi_theta(0.0), phi_theta(math.pi / 2)
    return math.sqrt(p) * np.kron(np.kron(a, a), e0) + math.sqrt(1 - p) * np.kron(np.kron(b, b), e1)


def rho_p_lambda_delta(p: float, lam: float, delta: float) -> DensityMatrix:
    """``(1-delta) (E_lam (x) E_lam (x) id)(|Psi_p><Psi_p|) + delta I/8`` with dims ``(4, 2)``.

    The first two qubits form the A system.
    """
    if not 0 <= lam <= 1:
        raise ParameterError(f"lambda must lie in [0, 1], got {lam!r}")
    if not 0 <= delta <= 1:
        raise ParameterError(f"delta must lie in [0, 1], got {delta!r}")
    if delta == 0:
        warnings.warn("delta = 0 gives a rank-deficient state; measures may be infinite",
                      RuntimeWarning, stacklevel=2)
    v = psi_p(p)
    t = np.outer(v, v.conj()).reshape(2, 2, 2, 2, 2, 2)
    # off-diagonal in qubit k picks up one factor lam
    bits = np.arange(2)
    for axis in (0, 1):
        flip = bits[:, None] != bits[None, :]
        shape = [1] * 6
        shape[axis], shape[axis + 3] = 2, 2
        t = t * np.where(flip, lam, 1.0).reshape(shape)
    mat = (1 - delta) * t.reshape(8, 8) + delta * np.eye(8) / 8
    return DensityMatrix(mat, (4, 2))
