"""Quantum relative entropy, sandwiched Renyi divergence and the net gap.

Divergences are returned as plain floats in nats; ``math.inf`` marks a
genuinely infinite value (support mismatch), never a large finite number.
"""

import math

import numpy as np

from .errors import ParameterError, ValidationError
from .linalg import DEFAULT_EIG_FLOOR, DensityMatrix, as_operator, hermitize, logm, op_norm

SUPPORT_ATOL = 1e-10


def _arr(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.data
    return hermitize(as_operator(state))


def _xlogx_trace(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(np.sum(w * np.log(w)))


def _outside_support(sigma: np.ndarray, w: np.ndarray, v: np.ndarray, eig_floor: float) -> bool:
    null = w < eig_floor
    if not np.any(null):
        return False
    vn = v[:, null]
    weight = np.real(np.einsum("ik,ij,jk->", vn.conj(), sigma, vn))
    return weight > SUPPORT_ATOL


def relative_entropy(sigma, rho, eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    """``Tr sigma (log sigma - log rho)`` in nats.

    Returns ``math.inf`` when ``sigma`` puts weight above 1e-10 on the
    eigenvectors of ``rho`` whose eigenvalues fall below ``eig_floor``.
    """
    s, r = _arr(sigma), _arr(rho)
    if s.shape != r.shape:
        raise ValidationError(f"dimension mismatch {s.shape} vs {r.shape}")
    w, v = np.linalg.eigh(r)
    if _outside_support(s, w, v, eig_floor):
        return math.inf
    log_r = (v * np.log(np.maximum(w, eig_floor))) @ v.conj().T
    val = _xlogx_trace(np.linalg.eigvalsh(s)) - float(np.real(np.trace(s @ log_r)))
    return val


def sandwich_spectrum(sigma: np.ndarray, w: np.ndarray, v: np.ndarray, alpha: float,
                      eig_floor: float = DEFAULT_EIG_FLOOR):
    """Positive eigenvalues ``z`` of ``Z = rho^s sigma rho^s`` and ``M = rho^s U``.

    ``w, v`` is the eigendecomposition of ``rho`` and ``U`` holds the
    eigenvectors of ``Z`` belonging to ``z``, so ``f(Z)`` sandwiched by
    ``rho^s`` is ``M diag(f(z)) M^H``.

    ``Z`` is formed as ``B^H B`` with ``B = sigma^(1/2) rho^s`` written in the
    eigenbasis of ``rho``.  There ``B`` is a column-scaled matrix, and its
    SVD keeps tiny singular values to high relative accuracy; ``eigh`` of
    ``Z`` itself loses everything below ``eps * ||Z||``, which for small
    ``alpha`` (large ``s``) includes eigenvalues that still carry weight
    in ``sum z**alpha``.

    For ``alpha < 1`` only the support of ``rho`` (eigenvalues above
    ``eig_floor``) enters; for ``alpha > 1`` ``rho`` is floored.  Eigenvalues
    of ``sigma`` restricted there that fall below ``eig_floor`` times the
    largest are treated as zero; the count of such directions is returned
    as the third element.
    """
    s = (1.0 - alpha) / (2.0 * alpha)
    if alpha < 1:
        cols = w > eig_floor
        lam = w[cols] ** s
    else:
        cols = np.ones(w.shape, dtype=bool)
        lam = np.maximum(w, eig_floor) ** s
    vc = v[:, cols]
    order = np.argsort(-lam)
    vc, lam = vc[:, order], lam[order]
    g = hermitize(vc.conj().T @ sigma @ vc)
    gw, gv = np.linalg.eigh(g)
    top = float(gw[-1]) if gw.size else 0.0
    if top <= 0:
        return np.zeros(0), np.zeros((w.size, 0), dtype=complex), int(gw.size)
    keep = gw > eig_floor * top
    c = np.sqrt(gw[keep])[:, None] * gv[:, keep].conj().T
    _, sv, vh = np.linalg.svd(c * lam[None, :], full_matrices=False)
    m = vc @ (lam[:, None] * vh.conj().T)
    return sv**2, m, int(np.sum(~keep))


def trace_power(z: np.ndarray, alpha: float) -> float:
    """``sum z_i**alpha`` over the positive entries of ``z``."""
    z = np.asarray(z, dtype=float)
    return float(np.sum(z[z > 0] ** alpha))


def sandwiched_renyi(sigma, rho, alpha: float, eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    r"""Sandwiched Renyi divergence of order ``alpha`` (``alpha > 0``, ``alpha != 1``).

    .. math:: \frac{1}{\alpha-1}\log\operatorname{Tr}
              (\rho^{s}\sigma\rho^{s})^{\alpha},\quad s = \frac{1-\alpha}{2\alpha}
    """
    if not alpha > 0 or alpha == 1:
        raise ParameterError(f"alpha must be positive and different from 1, got {alpha!r}")
    s_mat, r = _arr(sigma), _arr(rho)
    if s_mat.shape != r.shape:
        raise ValidationError(f"dimension mismatch {s_mat.shape} vs {r.shape}")
    w, v = np.linalg.eigh(r)
    if alpha > 1 and _outside_support(s_mat, w, v, eig_floor):
        return math.inf
    z, _, _ = sandwich_spectrum(s_mat, w, v, alpha, eig_floor)
    q = trace_power(z, alpha)
    if q <= 0.0:
        return math.inf
    return math.log(q) / (alpha - 1.0)


def eta0(x: float) -> float:
    """``-x ln x`` on ``[0, 1/e]`` and ``1/e`` beyond."""
    if x < 0:
        raise ParameterError(f"eta0 needs x >= 0, got {x!r}")
    if x == 0:
        return 0.0
    if x <= 1.0 / math.e:
        return -x * math.log(x)
    return 1.0 / math.e


def log_norm(rho, eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    """Operator norm of the (floored) logarithm of a state."""
    return op_norm(logm(_arr(rho), eig_floor))


def approximation_gap(eps2: float, rho: DensityMatrix, eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    """Certified width between the net-restricted and the exact minimum.

    ``eps2 * (||log rho|| + ln(d_A d_B)) + eta0(eps2)``; the exact value lies
    in ``[value - gap, value]`` for the net-restricted ``value``.
    """
    if not isinstance(rho, DensityMatrix) or rho.dims is None:
        raise ValidationError("approximation_gap needs a DensityMatrix with bipartite dims")
    if eps2 < 0:
        raise ParameterError(f"eps2 must be nonnegative, got {eps2!r}")
    if eps2 == 0:
        return 0.0
    return eps2 * (log_norm(rho, eig_floor) + math.log(rho.dim)) + eta0(eps2)
