"""Separability decision with a promise gap, plus the partial-transpose test.

The rule: run the relative-entropy iteration for ``t`` steps on a net with
covering bound ``eps2``.  With

    low = eps2 (||log rho|| + ln(d_A d_B)) + eta0(eps2) + ln(d_A |D|)/t

an objective at most ``low`` is consistent with a separable state (H0), one
above ``eps1`` indicates entanglement (H1), and anything in between is
inconclusive.
"""

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .divergences import approximation_gap
from .errors import InfeasibleParameters, ParameterError, ValidationError
from .linalg import DensityMatrix, partial_transpose
from .measures import MeasureResult, e_star_D
from .nets import ComplexNet
from .solver import SolverConfig

SEPARABLE = "separable-consistent"
ENTANGLED = "entangled"
INCONCLUSIVE = "inconclusive"

PAD_WEIGHT = 1e-6


@dataclass
class MembershipVerdict:
    decision: str
    objective: float
    threshold_low: float
    threshold_high: float
    iterations_used: int
    ppt_min_eig: float
    ppt_decision: bool
    certified: bool = False  # interval lower end of E* is positive
    promise_ok: bool = True  # the required iteration count was attainable
    warnings: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("objective", "threshold_low", "threshold_high"):
            if math.isinf(d[k]):
                d[k] = "inf" if d[k] > 0 else "-inf"
        return d

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @property
    def exit_code(self) -> int:
        return {SEPARABLE: 0, ENTANGLED: 1}.get(self.decision, 2)


def required_iterations(eps1: float, eps2: float, rho: DensityMatrix, net_size: int) -> int:
    """Iterations needed so that the promise gap ``eps1`` separates the hypotheses.

    Raises :class:`InfeasibleParameters` when the net approximation gap alone
    already reaches ``eps1``.
    """
    if net_size < 1:
        raise ParameterError("net_size must be >= 1")
    gap = approximation_gap(eps2, rho)
    room = eps1 - gap
    if not room > 0:
        raise InfeasibleParameters(
            f"net approximation gap {gap:.4g} is not below eps1={eps1:.4g}; refine the net", gap=gap)
    return math.ceil(math.log(rho.d_a * net_size) / room)


def ppt_test(rho: DensityMatrix, threshold: float = -1e-8) -> Tuple[float, bool]:
    """Minimum eigenvalue of the partial transpose and whether it is below ``threshold``."""
    if rho.dims is None:
        raise ValidationError("ppt_test needs bipartite dims")
    lmin = float(np.linalg.eigvalsh(partial_transpose(rho.data, rho.dims))[0])
    return lmin, lmin < threshold


def embed_state(rho: DensityMatrix, dims: Tuple[int, int], pad: float = PAD_WEIGHT) -> DensityMatrix:
    """Place a smaller bipartite state into ``dims`` by padding each factor.

    The result is ``(1-pad) rho (+) pad * (mixed state on the complement)``;
    the complement is everything outside the span of the original factors.
    """
    if rho.dims is None:
        raise ValidationError("embed_state needs bipartite dims")
    (a0, b0), (a1, b1) = rho.dims, tuple(dims)
    if a0 > a1 or b0 > b1:
        raise ValidationError(f"cannot embed {rho.dims} into {dims}")
    idx = (np.arange(a0)[:, None] * b1 + np.arange(b0)[None, :]).ravel()
    n = a1 * b1
    out = np.zeros((n, n), dtype=complex)
    out[np.ix_(idx, idx)] = rho.data
    comp = np.setdiff1d(np.arange(n), idx)
    if comp.size:
        out *= 1.0 - pad
        out[comp, comp] += pad / comp.size
    return DensityMatrix(out, (a1, b1))


def decide_membership(rho: DensityMatrix, net: ComplexNet, eps1: float,
                      config: Optional[SolverConfig] = None,
                      ppt_threshold: float = -1e-8,
                      strict: bool = False,
                      require_certificate: bool = False) -> Tuple[MembershipVerdict, MeasureResult]:
    """Classify ``rho`` as separable-consistent, entangled or inconclusive.

    Runs at least ``required_iterations`` steps.  When that count is infinite
    (the net gap already exceeds ``eps1``) it falls back to
    ``config.max_iter`` and clears ``promise_ok``; with ``strict`` the
    :class:`InfeasibleParameters` error propagates instead.

    An objective above ``eps1`` is reported as entangled even when the net
    gap leaves the certified lower bound at 0 (``certified`` is then False and
    a warning is attached); ``require_certificate`` downgrades such cases to
    inconclusive.
    """
    if not eps1 > 0:
        raise ParameterError(f"eps1 must be positive, got {eps1!r}")
    cfg = config or SolverConfig(max_iter=2000)
    notes = []
    promise_ok = True
    oriented = rho.swapped() if rho.d_b > rho.d_a else rho
    try:
        t_req = required_iterations(eps1, net.eps2_bound, oriented, len(net))
    except InfeasibleParameters as exc:
        if strict:
            raise
        promise_ok = False
        t_req = cfg.max_iter
        notes.append(f"promise gap infeasible at this net ({exc}); used max_iter={t_req}")
    run_cfg = SolverConfig(gamma=cfg.gamma, max_iter=max(t_req, cfg.max_iter), rel_tol=0.0,
                           eig_floor=cfg.eig_floor, adaptive_gamma=cfg.adaptive_gamma)
    res = e_star_D(rho, net, run_cfg)
    objective = res.value
    t = max(res.iterations, 1)
    low = approximation_gap(net.eps2_bound, oriented, cfg.eig_floor) + math.log(oriented.d_a * len(net)) / t
    certified = res.interval[0] > 0
    if objective > eps1:
        decision = ENTANGLED if certified or not require_certificate else INCONCLUSIVE
        if not certified:
            notes.append("objective exceeds eps1 but the net gap leaves the certified lower bound at 0"
                         + ("; downgraded to inconclusive" if require_certificate else ""))
    elif objective <= low:
        decision = SEPARABLE
    else:
        decision = INCONCLUSIVE
    lmin, ppt_ent = ppt_test(rho, ppt_threshold)
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    verdict = MembershipVerdict(decision, objective, low, eps1, res.iterations, lmin, ppt_ent,
                                certified, promise_ok, notes)
    return verdict, res
