"""Entanglement measures restricted to a finite net of B-states.

``E*_D(rho)`` minimizes ``D(sigma || rho)`` over
``sigma = sum_c X_c (x) |psi_c><psi_c|`` with ``psi_c`` ranging over a net;
``E*_{alpha,D}`` does the same with the sandwiched Renyi divergence.  Both
are computed with the block iteration in :mod:`entdetect.solver`.

Both runs also track a convexity lower bound: for any feasible ``X`` the
minimum is at least ``min_c lambda_min(V_c)`` (relative entropy), so every
result carries a certified bracket on the net-restricted value besides the
``ln(d_A |D|) / t`` bound.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .divergences import approximation_gap, relative_entropy, sandwich_spectrum, sandwiched_renyi, trace_power
from .errors import ParameterError, ValidationError
from .linalg import DensityMatrix, hermitize, save_matrix
from .nets import ComplexNet
from .solver import BlockState, IterationTrace, SolverConfig, minimize

DEFAULT_ALPHA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20)) + (1.05, 1.1, 1.25, 1.5, 2.0, 3.0)


@dataclass
class MeasureResult:
    """Outcome of one net-restricted measure evaluation.

    ``value`` is the net-restricted divergence at the best iterate (an upper
    bound on the net-restricted minimum).  ``interval`` brackets the
    unrestricted measure: the upper end is ``value`` and the lower end
    subtracts both the convergence and the net approximation gaps (clipped at
    zero).  Only the relative-entropy case gets a net gap; for Renyi orders
    the lower end is the convergence bracket alone.
    """

    value: float
    alpha: float
    iterations: int
    gap_bound: float
    interval: Tuple[float, float]
    sep_state: Optional[DensityMatrix]
    eps2_used: float
    dual_bound: float = -math.inf
    swapped: bool = False
    trace: Optional[IterationTrace] = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "value": _num(self.value),
            "alpha": self.alpha,
            "iterations": self.iterations,
            "gap_bound": _num(self.gap_bound),
            "interval": [_num(self.interval[0]), _num(self.interval[1])],
            "eps2": self.eps2_used,
            "dual_bound": _num(self.dual_bound),
            "swapped": self.swapped,
        }

    def save(self, path, state_path=None) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
        if state_path is not None and self.sep_state is not None:
            save_matrix(state_path, self.sep_state.data, self.sep_state.dims)


def _num(x: float):
    # JSON has no infinity literal
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


# --- assembling and oracles ---------------------------------------------------

def _assemble(blocks: np.ndarray, projectors: np.ndarray) -> np.ndarray:
    d_a, d_b = blocks.shape[1], projectors.shape[1]
    s = np.einsum("cij,ckl->ikjl", blocks, projectors)
    return s.reshape(d_a * d_b, d_a * d_b)


def block_reduce(op: np.ndarray, projectors: np.ndarray, d_a: int) -> np.ndarray:
    """``Tr_B[op (I (x) P_c)]`` for every ``c``."""
    d_b = projectors.shape[1]
    t = op.reshape(d_a, d_b, d_a, d_b)
    out = np.einsum("ikjl,clk->cij", t, projectors)
    return hermitize(out)


def _check_pair(state: BlockState, net: ComplexNet, dims) -> None:
    if len(state) != len(net):
        raise ValidationError(f"{len(state)} blocks but {len(net)} net points")
    if dims is not None and (state.block_dim, net.d) != tuple(dims):
        raise ValidationError(f"block/net dims {(state.block_dim, net.d)} do not match {tuple(dims)}")


def assemble_sep_state(state: BlockState, net: ComplexNet, dims=None) -> DensityMatrix:
    """``sum_c X_c (x) |psi_c><psi_c|`` as a validated state on ``A (x) B``."""
    _check_pair(state, net, dims)
    return DensityMatrix(_assemble(state.blocks, net.projectors), (state.block_dim, net.d))


def _eigh_fn(h: np.ndarray, f) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(h))
    return (v * f(w)) @ v.conj().T


class _RelEntOracle:
    """``V_c = Tr_B[(log sigma - log rho)(I (x) P_c)]``."""

    def __init__(self, rho: DensityMatrix, net: ComplexNet, eig_floor: float):
        self.d_a = rho.d_a
        self.proj = net.projectors
        self.floor = eig_floor
        self.log_rho = _eigh_fn(rho.data, lambda w: np.log(np.maximum(w, eig_floor)))

    def __call__(self, blocks: np.ndarray) -> np.ndarray:
        sigma = _assemble(blocks, self.proj)
        diff = _eigh_fn(sigma, lambda w: np.log(np.maximum(w, self.floor))) - self.log_rho
        return block_reduce(diff, self.proj, self.d_a)


class _RenyiOracle:
    """``V_{alpha,c} = Tr_B[rho^s Z^(alpha-1) rho^s (I (x) P_c)]`` with ``Z = rho^s sigma rho^s``."""

    def __init__(self, rho: DensityMatrix, net: ComplexNet, alpha: float, eig_floor: float):
        self.d_a = rho.d_a
        self.proj = net.projectors
        self.alpha = alpha
        self.floor = eig_floor
        self.w, self.v = np.linalg.eigh(rho.data)
        self.last_trace = math.nan
        # directions of sigma treated as zero at the last call; iterates are
        # full rank, so a nonzero count means the gradient is not trustworthy
        self.dropped = 0

    def _spectrum(self, blocks):
        sigma = _assemble(blocks, self.proj)
        z, m, self.dropped = sandwich_spectrum(sigma, self.w, self.v, self.alpha, self.floor)
        return z, m

    def trace_power(self, blocks: np.ndarray) -> float:
        z, _ = self._spectrum(blocks)
        return trace_power(z, self.alpha)

    def __call__(self, blocks: np.ndarray) -> np.ndarray:
        z, m = self._spectrum(blocks)
        a = self.alpha
        self.last_trace = trace_power(z, a)
        pos = z > 0
        pw = np.where(pos, np.where(pos, z, 1.0) ** (a - 1), 0.0)
        k = (m * pw) @ m.conj().T
        return block_reduce(k, self.proj, self.d_a)


def v_map(state: BlockState, net: ComplexNet, rho: DensityMatrix, eig_floor: float = 1e-14) -> np.ndarray:
    """Per-block gradient operators of the relative-entropy objective, shape ``(C, d_A, d_A)``."""
    _check_pair(state, net, rho.dims)
    return _RelEntOracle(rho, net, eig_floor)(state.blocks)


def v_alpha_map(state: BlockState, net: ComplexNet, rho: DensityMatrix, alpha: float,
                eig_floor: float = 1e-14) -> np.ndarray:
    """Per-block operators for the sandwiched Renyi trace objective."""
    _check_alpha(alpha)
    _check_pair(state, net, rho.dims)
    return _RenyiOracle(rho, net, alpha, eig_floor)(state.blocks)


def _check_alpha(alpha: float) -> None:
    if not alpha > 0 or alpha == 1 or not math.isfinite(alpha):
        raise ParameterError(f"alpha must lie in (0,1) or (1,inf), got {alpha!r}")


def _min_eig(vals: np.ndarray) -> float:
    return float(np.min(np.linalg.eigvalsh(vals)))


def _orient(rho: DensityMatrix, net: ComplexNet, swap_larger: bool):
    if rho.dims is None:
        raise ValidationError("the state needs bipartite dims")
    swapped = False
    if swap_larger and rho.d_b > rho.d_a:
        rho, swapped = rho.swapped(), True
    if net.d != rho.d_b:
        raise ValidationError(f"net lives in C^{net.d} but the B system has dimension {rho.d_b}")
    return rho, swapped


def _finish_state(state: BlockState, net: ComplexNet, swapped: bool) -> DensityMatrix:
    blocks = state.blocks / np.sum(state.weights)
    sep = DensityMatrix(_assemble(blocks, net.projectors), (state.block_dim, net.d))
    return sep.swapped() if swapped else sep


def e_star_D(rho: DensityMatrix, net: ComplexNet, config: Optional[SolverConfig] = None,
             swap_larger: bool = True, track_dual: bool = True, stop=None) -> MeasureResult:
    """Relative entropy of entanglement restricted to the net ``net`` on B.

    Starts from the completely mixed block state and reports
    ``gap_bound = gamma ln(d_A |net|) / t``.  If ``d_B > d_A`` the bipartition
    is exchanged first (set ``swap_larger=False`` to keep it, e.g. for the
    trivial-A coherence specialization).  ``stop`` is passed to
    :func:`entdetect.solver.minimize`.
    """
    cfg = config or SolverConfig()
    orig = rho
    rho, swapped = _orient(rho, net, swap_larger)
    oracle = _RelEntOracle(rho, net, cfg.eig_floor)
    init = BlockState.uniform(len(net), rho.d_a)
    lower = (lambda blocks, vals, obj: _min_eig(vals)) if track_dual else None
    best, trace = minimize(oracle, init, cfg, lower_bound=lower, stop=stop)

    sep = _finish_state(best, net, swapped)
    value = relative_entropy(sep, orig, cfg.eig_floor)
    dual = max(trace.lower_bounds) if trace.lower_bounds else -math.inf
    gap = trace.final_gap_bound
    eps2 = net.eps2_bound
    lo_net = max(value - gap, dual)
    approx = approximation_gap(eps2, rho, cfg.eig_floor) if math.isfinite(eps2) else math.inf
    lo = max(0.0, lo_net - approx) if math.isfinite(value) else max(0.0, dual - approx)
    return MeasureResult(value, 1.0, trace.iterations, gap, (lo, value), sep, eps2,
                         dual, swapped, trace)


def e_alpha_star_D(rho: DensityMatrix, net: ComplexNet, alpha: float,
                   config: Optional[SolverConfig] = None, swap_larger: bool = True,
                   track_dual: bool = True, form: str = "norm") -> MeasureResult:
    """Sandwiched Renyi analogue of :func:`e_star_D` of order ``alpha``.

    With ``form="trace"`` the iteration minimizes ``sgn(alpha-1) Tr Z^alpha``
    using the oracle ``sgn(alpha-1) V_alpha``.  ``form="norm"`` minimizes
    ``sgn(alpha-1) (Tr Z^alpha)^(1/alpha)`` instead: same minimizer, but the
    objective is homogeneous of degree one in ``X`` so a large enough
    ``gamma`` always restores the descent condition (with the trace form
    that fails for ``alpha <= 1/2``).  Either way the reported value is
    ``ln(Tr Z^alpha)/(alpha-1)`` at the best iterate and ``gap_bound`` bounds
    the trace objective ``sgn(alpha-1) Tr Z^alpha``, not the divergence.

    With ``adaptive_gamma`` the run starts at ``gamma * min(1, |1-alpha|)``:
    the objective only varies at order ``|1-alpha|`` so near ``alpha = 1`` a
    unit step barely moves, and doubling restores descent if the guess is
    too small.
    """
    _check_alpha(alpha)
    if form not in ("trace", "norm"):
        raise ParameterError(f"form must be 'trace' or 'norm', got {form!r}")
    cfg = config or SolverConfig(adaptive_gamma=True)
    if cfg.adaptive_gamma:
        cfg = replace(cfg, gamma=cfg.gamma * min(1.0, abs(1.0 - alpha)))
    orig = rho
    rho, swapped = _orient(rho, net, swap_larger)
    sign = 1.0 if alpha > 1 else -1.0
    inner = _RenyiOracle(rho, net, alpha, cfg.eig_floor)

    if form == "trace":
        def oracle(blocks):
            return sign * inner(blocks)

        def objective(blocks, vals):
            return sign * inner.last_trace

        def lower(blocks, vals, obj):
            # convexity of the trace objective in sigma
            if inner.dropped:
                return -math.inf
            return (1 - alpha) * obj + alpha * _min_eig(vals)
    else:
        def oracle(blocks):
            vals = inner(blocks)
            return sign * inner.last_trace ** (1 / alpha - 1) * vals

        def objective(blocks, vals):
            return sign * inner.last_trace ** (1 / alpha)

        def lower(blocks, vals, obj):
            # degree-one homogeneous convex: G(Y) >= sum_c Tr Omega_c(X) Y_c
            if inner.dropped:
                return -math.inf
            return _min_eig(vals)

    init = BlockState.uniform(len(net), rho.d_a)
    best, trace = minimize(oracle, init, cfg, objective=objective,
                           lower_bound=lower if track_dual else None)

    if trace.stop_reason == "descent_stall":
        warnings.warn(f"alpha={alpha}: descent could not be restored after {trace.iterations} steps "
                      "(ill-conditioned powers of rho); value is unconverged", RuntimeWarning, stacklevel=2)
    gap = trace.final_gap_bound
    if form == "norm" and math.isfinite(gap):
        # x -> x^alpha is convex (alpha > 1) or concave (alpha < 1); its tangent
        # at N = q^(1/alpha) turns a gap on N into one on q
        n_best = inner.trace_power(best.blocks) ** (1 / alpha)
        gap = alpha * n_best ** (alpha - 1) * gap if n_best > 0 else math.inf

    sep = _finish_state(best, net, swapped)
    value = sandwiched_renyi(sep, orig, alpha, cfg.eig_floor)
    dual = -math.inf
    if trace.lower_bounds:
        # alpha > 1: lower bound on Tr Z^alpha; alpha < 1: upper bound on it
        g = sign * max(trace.lower_bounds)
        if g > 0:
            power = 1.0 if form == "trace" else alpha
            dual = power * math.log(g) / (alpha - 1)
    lo = max(0.0, dual)
    return MeasureResult(value, float(alpha), trace.iterations, gap,
                         (min(lo, value), value), sep, net.eps2_bound, dual, swapped, trace)


# --- closed forms ---------------------------------------------------------------

def _prob_vector(p, name="p") -> np.ndarray:
    arr = np.asarray(p, dtype=float).ravel()
    if arr.size == 0 or np.any(arr < -1e-12) or abs(arr.sum() - 1) > 1e-10:
        raise ValidationError(f"{name} must be a probability vector")
    return np.clip(arr, 0.0, None)


def pure_state_e_alpha(schmidt, alpha: float) -> float:
    """``(alpha/(alpha-1)) ln max_i p_i`` for a pure state with Schmidt weights ``p``."""
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0,1), got {alpha!r}")
    p = _prob_vector(schmidt, "schmidt")
    return alpha / (alpha - 1) * math.log(float(np.max(p)))


def maxcorr_e_star(theta) -> float:
    """Relative entropy of entanglement of ``sum_ij theta_ij |jj><ii|``.

    Equals the coherence measure of the coefficient matrix ``theta``.
    """
    from .coherence import c_star

    mat = np.asarray(theta, dtype=complex)
    return c_star(DensityMatrix(mat))


def maxcorr_state(theta) -> DensityMatrix:
    """Embed the coefficient matrix as the maximally correlated state on ``d (x) d``."""
    t = DensityMatrix(np.asarray(theta, dtype=complex)).data
    d = t.shape[0]
    out = np.zeros((d * d, d * d), dtype=complex)
    idx = np.arange(d) * (d + 1)
    out[np.ix_(idx, idx)] = t
    return DensityMatrix(out, (d, d))


# --- exponent curves --------------------------------------------------------------

@dataclass
class ExponentCurve:
    r_grid: List[float]
    achievability: List[float]
    strong_converse: List[float]
    alpha_grid: List[float]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "achievability", "strong_converse"])
            for r, a, s in zip(self.r_grid, self.achievability, self.strong_converse):
                w.writerow([repr(r), repr(a), repr(s)])


def exponent_curve(e_alpha: Mapping[float, float], r_grid: Sequence[float]) -> ExponentCurve:
    """Pointwise ``sup_{alpha<1}`` and ``inf_{alpha>1}`` of ``E_alpha - alpha r/(1-alpha)``.

    ``e_alpha`` maps orders to measure values; orders equal to 1 are ignored.
    A side with no samples yields ``nan`` for every rate.
    """
    if not e_alpha or len(r_grid) == 0:
        raise ParameterError("need a nonempty alpha map and rate grid")
    alphas = sorted(a for a in e_alpha if a != 1)
    low = np.array([a for a in alphas if a < 1])
    high = np.array([a for a in alphas if a > 1])
    e_low = np.array([e_alpha[a] for a in low])
    e_high = np.array([e_alpha[a] for a in high])
    ach, conv = [], []
    for r in r_grid:
        ach.append(float(np.max(e_low - low * r / (1 - low))) if low.size else math.nan)
        conv.append(float(np.min(e_high + high * r / (high - 1))) if high.size else math.nan)
    return ExponentCurve([float(r) for r in r_grid], ach, conv, [float(a) for a in alphas])


def e_alpha_samples(rho: DensityMatrix, net: ComplexNet, alphas: Sequence[float] = DEFAULT_ALPHA_GRID,
                    config: Optional[SolverConfig] = None) -> Dict[float, float]:
    """Evaluate ``e_alpha_star_D`` on each order of ``alphas``."""
    out = {}
    for a in alphas:
        cfg = config if config is not None else SolverConfig(adaptive_gamma=True)
        out[float(a)] = e_alpha_star_D(rho, net, a, cfg).value
    return out
