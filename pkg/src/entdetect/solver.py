"""Generalized Arimoto-Blahut iteration over classical-quantum block states.

The state is a stack of PSD blocks ``X_c`` (one per classical label ``c``)
with total trace one, i.e. ``sigma_AC = sum_c |c><c| (x) X_c``.  An oracle
maps the stack to a stack of Hermitian blocks ``Omega_c`` and the iteration

    X_c  <-  exp(log X_c - Omega_c / gamma) / kappa

minimizes ``G = sum_c Tr X_c Omega_c``.  With uniform initialization the
objective after ``t`` steps is within ``gamma * ln(d * C) / t`` of the
minimum whenever the descent condition

    sum_c Tr X'_c (Omega'_c - Omega_c) <= gamma * D(X' || X)

holds along the run; ``check_descent`` evaluates it and ``adaptive_gamma``
doubles ``gamma`` whenever a step violates it.  If ``MAX_GAMMA_DOUBLINGS``
doublings do not restore it (an oracle dominated by rounding noise) the run
stops with ``stop_reason = "descent_stall"`` and an infinite gap bound.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import NumericalError, ValidationError
from .linalg import DEFAULT_EIG_FLOOR

Oracle = Callable[[np.ndarray], np.ndarray]

MAX_GAMMA_DOUBLINGS = 60


@dataclass(frozen=True, eq=False)
class BlockState:
    """Stack of PSD blocks ``X_c`` of shape ``(C, d, d)`` with unit total trace."""

    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise ValidationError(f"blocks must have shape (C, d, d), got {b.shape}")
        object.__setattr__(self, "blocks", b)

    @property
    def block_dim(self) -> int:
        return self.blocks.shape[1]

    def __len__(self):
        return self.blocks.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """``Tr X_c`` for every label."""
        return np.real(np.trace(self.blocks, axis1=1, axis2=2))

    def validate(self, atol: float = 1e-9) -> "BlockState":
        b = self.blocks
        herm = np.max(np.abs(b - np.swapaxes(b, 1, 2).conj()))
        if herm > 1e-10:
            raise ValidationError(f"blocks are not Hermitian (deviation {herm:.2e})")
        lmin = float(np.min(np.linalg.eigvalsh(b)))
        if lmin < -1e-10:
            raise ValidationError(f"block has negative eigenvalue {lmin:.2e}")
        total = float(np.sum(self.weights))
        if abs(total - 1.0) > atol:
            raise ValidationError(f"total trace {total!r} differs from 1")
        return self

    @classmethod
    def uniform(cls, count: int, block_dim: int) -> "BlockState":
        """The completely mixed classical-quantum state."""
        eye = np.eye(block_dim, dtype=complex) / (block_dim * count)
        return cls(np.broadcast_to(eye, (count, block_dim, block_dim)).copy())


@dataclass
class SolverConfig:
    gamma: float = 1.0
    max_iter: int = 5000
    rel_tol: float = 1e-12
    eig_floor: float = DEFAULT_EIG_FLOOR
    adaptive_gamma: bool = False
    window: int = 10
    gap_tol: Optional[float] = None  # stop once objective - lower bound <= gap_tol

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma!r}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter!r}")


@dataclass
class IterationTrace:
    """What happened during one ``minimize`` run.

    ``objective_per_step[t]`` is the objective after ``t`` updates (entry 0 is
    the initial state); ``gamma_per_step[t]`` and ``descent_ok[t]`` describe
    the step that produced it.  ``lower_bounds`` is filled only when a lower
    bound function was supplied.
    """

    objective_per_step: List[float] = field(default_factory=list)
    gamma_per_step: List[float] = field(default_factory=list)
    descent_ok: List[bool] = field(default_factory=list)
    lower_bounds: List[float] = field(default_factory=list)
    descent_violations: int = 0
    final_gap_bound: float = math.inf
    iterations: int = 0
    stop_reason: str = ""

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "objective", "gamma", "descent_ok"])
            for t, obj in enumerate(self.objective_per_step):
                w.writerow([t, repr(obj), repr(self.gamma_per_step[t]), int(self.descent_ok[t])])


def _eigh_floor_log(blocks: np.ndarray, eig_floor: float) -> np.ndarray:
    w, v = np.linalg.eigh(blocks)
    lw = np.log(np.maximum(w, eig_floor))
    return (v * lw[..., None, :]) @ np.swapaxes(v, 1, 2).conj()


def _tr_pairs(a: np.ndarray, b: np.ndarray) -> float:
    """``sum_c Tr a_c b_c`` for stacks of Hermitian blocks."""
    return float(np.real(np.einsum("cij,cji->", a, b)))


def _step(log_x: np.ndarray, omega_vals: np.ndarray, gamma: float, eig_floor: float,
          iteration: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    # returns the new blocks and their floored logarithm from one eigh
    m = log_x - omega_vals / gamma
    m = 0.5 * (m + np.swapaxes(m, 1, 2).conj())
    w, v = np.linalg.eigh(m)
    if not np.all(np.isfinite(w)):
        raise NumericalError("non-finite exponent in update", iteration=iteration)
    shift = float(np.max(w))
    ew = np.exp(w - shift)
    kappa = float(np.sum(ew))
    if not (kappa > 0 and math.isfinite(kappa)):
        raise NumericalError(f"normalizer kappa={kappa!r}", iteration=iteration)
    vh = np.swapaxes(v, 1, 2).conj()
    new = (v * (ew / kappa)[..., None, :]) @ vh
    lw = np.maximum(w - shift - math.log(kappa), math.log(eig_floor))
    new_log = (v * lw[..., None, :]) @ vh
    return new, new_log


def f_map(state: BlockState, omega: Oracle, gamma: float,
          eig_floor: float = DEFAULT_EIG_FLOOR, omega_vals: Optional[np.ndarray] = None) -> BlockState:
    """One update ``X_c -> exp(log X_c - Omega_c/gamma) / kappa``."""
    if omega_vals is None:
        omega_vals = omega(state.blocks)
    new, _ = _step(_eigh_floor_log(state.blocks, eig_floor), omega_vals, gamma, eig_floor)
    return BlockState(new)


def block_relative_entropy(new: BlockState, old: BlockState, eig_floor: float = DEFAULT_EIG_FLOOR) -> float:
    """``D(sigma'_AC || sigma_AC)`` for two block states."""
    ln_new = _eigh_floor_log(new.blocks, eig_floor)
    ln_old = _eigh_floor_log(old.blocks, eig_floor)
    return _tr_pairs(new.blocks, ln_new - ln_old)


def check_descent(prev: BlockState, nxt: BlockState, omega: Oracle, gamma: float,
                  eig_floor: float = DEFAULT_EIG_FLOOR) -> Tuple[float, float, bool]:
    """Evaluate the descent condition for the step ``prev -> nxt``.

    Returns ``(lhs, rhs, ok)`` with ``lhs = Tr sigma'(Omega[sigma'] - Omega[sigma])``
    and ``rhs = gamma D(sigma' || sigma)``.
    """
    lhs = _tr_pairs(nxt.blocks, omega(nxt.blocks) - omega(prev.blocks))
    rhs = gamma * max(block_relative_entropy(nxt, prev, eig_floor), 0.0)
    return lhs, rhs, lhs <= rhs + 1e-9


def minimize(omega: Oracle, init: BlockState, config: SolverConfig = None,
             objective: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
             lower_bound: Optional[Callable[[np.ndarray, np.ndarray, float], float]] = None,
             stop: Optional[Callable[[IterationTrace], bool]] = None,
             on_step: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
             ) -> Tuple[BlockState, IterationTrace]:
    """Iterate the update until ``max_iter`` or the objective stalls.

    ``objective(blocks, omega_vals)`` defaults to ``sum_c Tr X_c Omega_c``.
    ``lower_bound(blocks, omega_vals, objective)`` may return a certified lower
    bound on the minimum; it enables the ``gap_tol`` stopping rule.  ``stop``
    is consulted after every step.  Returns the best state seen.
    """
    cfg = config or SolverConfig()
    if objective is None:
        def objective(blocks, vals):
            return _tr_pairs(blocks, vals)

    trace = IterationTrace()
    x = init.blocks
    log_x = _eigh_floor_log(x, cfg.eig_floor)
    vals = omega(x)
    obj = objective(x, vals)
    gamma = cfg.gamma
    trace.objective_per_step.append(obj)
    trace.gamma_per_step.append(gamma)
    trace.descent_ok.append(True)
    if lower_bound is not None:
        trace.lower_bounds.append(lower_bound(x, vals, obj))
    best_obj, best_x = obj, x
    count, dim = x.shape[0], x.shape[1]
    trace.stop_reason = "max_iter"

    for t in range(1, cfg.max_iter + 1):
        doublings = 0
        while True:
            try:
                new, new_log = _step(log_x, vals, gamma, cfg.eig_floor, iteration=t)
                new_vals = omega(new)
            except NumericalError as exc:
                exc.iteration, exc.trace = t, trace
                raise
            except (ArithmeticError, np.linalg.LinAlgError) as exc:
                raise NumericalError(str(exc), iteration=t, trace=trace) from exc
            lhs = _tr_pairs(new, new_vals - vals)
            # D >= 0; floored logs can make it a tiny negative that gamma then amplifies
            rhs = gamma * max(_tr_pairs(new, new_log - log_x), 0.0)
            ok = lhs <= rhs + 1e-9 * max(1.0, abs(obj))
            if ok or not cfg.adaptive_gamma:
                break
            trace.descent_violations += 1
            doublings += 1
            if doublings > MAX_GAMMA_DOUBLINGS:
                break
            gamma *= 2.0
        if doublings > MAX_GAMMA_DOUBLINGS:
            # the oracle is too noisy for any step size; keep what we have
            trace.stop_reason = "descent_stall"
            gamma = trace.gamma_per_step[-1]
            break
        if not ok:
            trace.descent_violations += 1

        x, log_x, vals = new, new_log, new_vals
        obj = objective(x, vals)
        if not math.isfinite(obj):
            raise NumericalError(f"objective became {obj!r}", iteration=t, trace=trace)
        trace.objective_per_step.append(obj)
        trace.gamma_per_step.append(gamma)
        trace.descent_ok.append(ok)
        trace.iterations = t
        if on_step is not None:
            on_step(t, x, vals)
        if obj < best_obj:
            best_obj, best_x = obj, x
        if lower_bound is not None:
            trace.lower_bounds.append(lower_bound(x, vals, obj))
            if cfg.gap_tol is not None and best_obj - max(trace.lower_bounds) <= cfg.gap_tol:
                trace.stop_reason = "gap_tol"
                break
        if stop is not None and stop(trace):
            trace.stop_reason = "callback"
            break
        if t >= cfg.window and cfg.rel_tol > 0:
            past = trace.objective_per_step[t - cfg.window]
            if abs(obj - past) < cfg.rel_tol * abs(obj):
                trace.stop_reason = "rel_tol"
                break

    t_done = max(trace.iterations, 1)
    trace.final_gap_bound = gamma * math.log(dim * count) / t_done if trace.iterations else math.inf
    if trace.stop_reason == "descent_stall":
        trace.final_gap_bound = math.inf
    return BlockState(best_x), trace
