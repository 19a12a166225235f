"""Coherence analogues of the entanglement measures.

Incoherent states are the diagonal ones.  ``C*(rho)`` minimizes
``D(sigma || rho)`` over them and has the closed form ``D(I_c(rho) || rho)``
with ``I_c(rho) = exp(diag(log rho)) / t``.  The Renyi version ``C*_alpha``
has no general closed form and is computed with the block iteration on a
trivial A system and the computational basis as the net.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .divergences import relative_entropy
from .errors import ParameterError, ValidationError
from .linalg import DEFAULT_EIG_FLOOR, DensityMatrix, logm, matrix_fn
from .measures import e_alpha_star_D, e_star_D
from .nets import basis_net
from .solver import SolverConfig


@dataclass(frozen=True, eq=False)
class DiagonalState:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size == 0 or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-10:
            raise ValidationError("probs must be a probability vector")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self.probs).astype(complex))


def _state(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def i_c(rho, eig_floor: float = DEFAULT_EIG_FLOOR) -> DensityMatrix:
    """The incoherent state closest to ``rho`` in the first argument of ``D``."""
    rho = _state(rho)
    diag = np.real(np.diag(logm(rho.data, eig_floor)))
    w = np.exp(diag - diag.max())
    return DensityMatrix(np.diag(w / w.sum()).astype(complex))


def c_star(rho, eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    """``min over diagonal sigma of D(sigma || rho)``, via the closed form."""
    rho = _state(rho)
    return relative_entropy(i_c(rho, eig_floor), rho, eig_floor)


def _as_trivial_bipartite(rho: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(rho.data, (1, rho.dim))


def default_coherence_config() -> SolverConfig:
    return SolverConfig(max_iter=20000, rel_tol=0.0, gap_tol=1e-7)


def c_star_iterative(rho, config: Optional[SolverConfig] = None) -> float:
    """``C*`` from the block iteration (cross-check of :func:`c_star`)."""
    rho = _state(rho)
    res = e_star_D(_as_trivial_bipartite(rho), basis_net(rho.dim),
                   config or default_coherence_config(), swap_larger=False)
    return res.value


def c_alpha_star(rho, alpha: float, config: Optional[SolverConfig] = None) -> float:
    """``min over diagonal sigma of D_alpha(sigma || rho)`` (sandwiched)."""
    rho = _state(rho)
    cfg = config or SolverConfig(max_iter=20000, rel_tol=0.0, gap_tol=1e-9, adaptive_gamma=True)
    res = e_alpha_star_D(_as_trivial_bipartite(rho), basis_net(rho.dim), alpha, cfg,
                         swap_larger=False)
    return res.value


def c_alpha_variational(rho, alpha: float, tau, eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    """Lower bound on ``C*_alpha`` from a trial state ``tau``, for ``alpha`` in [1/2, 1).

    Evaluates ``alpha/(alpha-1) * ln max_i (rho^s tau^(-2s) rho^s)_ii`` with
    ``s = (1-alpha)/(2 alpha)``; maximizing over ``tau`` gives ``C*_alpha``.
    """
    if not 0.5 <= alpha < 1:
        raise ParameterError(f"the variational form needs alpha in [1/2, 1), got {alpha!r}")
    rho, tau = _state(rho), _state(tau)
    if np.linalg.eigvalsh(tau.data)[0] < eig_floor:
        raise ValidationError("tau must be full rank")
    s = (1 - alpha) / (2 * alpha)
    rs = matrix_fn(rho.data, lambda w: np.maximum(w, 0.0) ** s)
    ti = matrix_fn(tau.data, lambda w: w ** (-2 * s))
    top = float(np.max(np.real(np.diag(rs @ ti @ rs))))
    return alpha / (alpha - 1) * math.log(top)


def rho_of_p(p) -> DensityMatrix:
    """``sum_j p_j Z^j |+><+| Z^-j`` with the clock matrix ``Z``."""
    p = DiagonalState(p).probs
    d = p.size
    # entry (k, l) is (1/d) sum_j p_j w^{j(k-l)}
    k = np.arange(d)
    phases = np.exp(2j * np.pi * np.outer(k, k) / d)  # phases[j, k] = w^{jk}
    f = p @ phases  # f[m] = sum_j p_j w^{jm}
    mat = f[(k[:, None] - k[None, :]) % d] / d
    return DensityMatrix(mat)


def additivity_check(rho1, rho2, eig_floor: float = DEFAULT_EIG_FLOOR) -> Tuple[float, float]:
    """``(C*(rho1 (x) rho2), C*(rho1) + C*(rho2))``."""
    r1, r2 = _state(rho1), _state(rho2)
    joint = DensityMatrix(np.kron(r1.data, r2.data))
    return c_star(joint, eig_floor), c_star(r1, eig_floor) + c_star(r2, eig_floor)


def c_star_rho_p_closed_form(p) -> float:
    """``D(p_mix || p)``, the value of ``C*`` on ``rho(p)``."""
    p = DiagonalState(p).probs
    if np.any(p == 0):
        return math.inf
    return float(-np.mean(np.log(p)) - math.log(p.size))


def c_alpha_rho_p_closed_form(p, alpha: float) -> float:
    """``D_alpha(p_mix || p)`` for ``alpha`` in (0,1) or (1,2]."""
    if not (0 < alpha < 1 or 1 < alpha <= 2):
        raise ParameterError(f"closed form holds for alpha in (0,1) or (1,2], got {alpha!r}")
    p = DiagonalState(p).probs
    d = p.size
    if alpha > 1 and np.any(p == 0):
        return math.inf
    total = float(np.sum(p ** (1 - alpha)))
    return math.log(total) / (alpha - 1) - alpha / (alpha - 1) * math.log(d)
