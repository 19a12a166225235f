"""Sweeps over the phase-damped family and the exponent-curve runs.

Every driver returns its rows and optionally writes them as CSV with a header
row and ``repr`` floats.  Grid points are independent; ``workers > 1`` spreads
them over processes while keeping the output in grid order.
"""

import configparser
import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParameterError, ValidationError
from .linalg import DensityMatrix
from .measures import DEFAULT_ALPHA_GRID, ExponentCurve, e_alpha_star_D, e_star_D, exponent_curve
from .membership import ppt_test
from .nets import complex_net
from .solver import SolverConfig
from .states import rho_p_lambda_delta

SWEEP_COLUMNS = ["p", "lambda", "delta", "value", "gap_bound", "interval_lo", "interval_hi", "iterations"]
BOUNDARY_COLUMNS = ["delta", "lambda_ours", "lambda_ppt", "crossings_ok"]
EXPONENT_COLUMNS = ["r", "achievability", "strong_converse"]

BISECT_TOL = 1e-3
BISECT_MAX_STEPS = 20


@dataclass
class ExperimentSpec:
    p: float = 0.5
    lambda_grid: List[float] = field(default_factory=lambda: [round(0.05 * k, 2) for k in range(1, 21)])
    delta_grid: List[float] = field(default_factory=lambda: [1e-1, 1e-2, 1e-4])
    net_n: int = 16
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(max_iter=1000, rel_tol=1e-10))
    seed: int = 0
    output_dir: str = "."
    workers: int = 1

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ParameterError(f"p must lie in [0, 1], got {self.p!r}")
        if not self.lambda_grid or not self.delta_grid:
            raise ParameterError("lambda_grid and delta_grid must be nonempty")
        if any(not 0 <= x <= 1 for x in self.lambda_grid):
            raise ParameterError("lambda values must lie in [0, 1]")
        if any(not 0 < x <= 1 for x in self.delta_grid):
            raise ParameterError("delta values must lie in (0, 1]")
        if self.net_n < 3:
            raise ParameterError("net_n must be at least 3")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


# --- config files -------------------------------------------------------------------

_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
_SPEC_KEYS = {f.name for f in fields(ExperimentSpec)} - {"solver"}


def _parse_list(text: str) -> List[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _coerce(key: str, text: str):
    if key in ("lambda_grid", "delta_grid", "alphas", "r_grid"):
        return _parse_list(text)
    if key in ("net_n", "seed", "workers", "max_iter", "window"):
        return int(text)
    if key == "adaptive_gamma":
        low = text.strip().lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValidationError(f"adaptive_gamma must be a boolean, got {text!r}")
        return low in ("true", "1", "yes")
    if key == "output_dir":
        return text.strip()
    if key == "gap_tol" and text.strip().lower() in ("", "none"):
        return None
    return float(text)


def read_config(path, extra_keys: Sequence[str] = ()) -> Dict[str, object]:
    """Parse a flat ``key = value`` file; unknown keys raise :class:`ValidationError`.

    Keys are the :class:`ExperimentSpec` and :class:`SolverConfig` field
    names plus ``extra_keys``.  ``#`` starts a comment.
    """
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    with open(path) as fh:
        text = fh.read()
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from exc
    allowed = _SPEC_KEYS | _SOLVER_KEYS | set(extra_keys)
    out = {}
    for key, raw in parser["config"].items():
        if key not in allowed:
            raise ValidationError(f"unknown config key {key!r}")
        try:
            out[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ValidationError(f"bad value for {key}: {raw!r}") from exc
    return out


def split_config(values: Dict[str, object]) -> Tuple[Dict[str, object], Dict[str, object]]:
    """Separate solver settings from spec settings."""
    solver = {k: v for k, v in values.items() if k in _SOLVER_KEYS}
    spec = {k: v for k, v in values.items() if k in _SPEC_KEYS}
    return spec, solver


# --- CSV helpers ------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def read_csv_header(path) -> List[str]:
    with open(path, newline="") as fh:
        return next(csv.reader(fh), [])


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- lambda sweep -------------------------------------------------------------------------

def _sweep_point(args) -> dict:
    p, lam, delta, net_n, cfg = args
    row = {"p": p, "lambda": lam, "delta": delta}
    try:
        res = e_star_D(rho_p_lambda_delta(p, lam, delta), complex_net(net_n, 2), cfg)
    except (ArithmeticError, ValueError) as exc:
        row.update(value=f"error:{type(exc).__name__}", gap_bound="", interval_lo="",
                   interval_hi="", iterations="")
        return row
    row.update(value=res.value, gap_bound=res.gap_bound, interval_lo=res.interval[0],
               interval_hi=res.interval[1], iterations=res.iterations)
    return row


def sweep_lambda(spec: ExperimentSpec, path=None) -> List[dict]:
    """Net-restricted measure of ``rho_{p, lambda, delta}`` over the (delta, lambda) grid."""
    items = [(spec.p, float(lam), float(d), spec.net_n, spec.solver)
             for d in spec.delta_grid for lam in spec.lambda_grid]
    rows = _map(_sweep_point, items, spec.workers)
    if path is not None:
        write_csv(path, SWEEP_COLUMNS, rows)
    return rows


# --- boundary scan --------------------------------------------------------------------------

def exceeds_threshold(rho: DensityMatrix, net, threshold: float, config: SolverConfig) -> Tuple[bool, bool]:
    """Whether the net-restricted measure exceeds ``threshold``.

    Runs until the dual bound rises above the threshold or the iterate value
    falls to it, whichever comes first.  Returns ``(exceeds, certified)``;
    ``certified`` is false when ``max_iter`` ran out first and the answer
    rests on the final iterate value.
    """
    def stop(trace):
        # an earlier value at or below the threshold would already have stopped the run
        return trace.lower_bounds[-1] > threshold or trace.objective_per_step[-1] <= threshold

    cfg = SolverConfig(gamma=config.gamma, max_iter=config.max_iter, rel_tol=0.0,
                       eig_floor=config.eig_floor, adaptive_gamma=config.adaptive_gamma)
    res = e_star_D(rho, net, cfg, stop=stop)
    certified = res.dual_bound > threshold or res.value <= threshold
    return res.value > threshold, certified


def bisect_lambda(predicate, lo: float = 0.0, hi: float = 1.0, tol: float = BISECT_TOL,
                  max_steps: int = BISECT_MAX_STEPS) -> Optional[float]:
    """Smallest ``lambda`` (to ``tol``) where the monotone ``predicate`` turns true.

    Returns ``None`` when the interval does not bracket a change.
    """
    if predicate(lo) or not predicate(hi):
        return None
    for _ in range(max_steps):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _boundary_row(args) -> dict:
    p, delta, net_n, cfg, m_thr, ppt_thr = args
    net = complex_net(net_n, 2)

    def ours(lam):
        return exceeds_threshold(rho_p_lambda_delta(p, lam, delta), net, m_thr, cfg)[0]

    def ppt(lam):
        return ppt_test(rho_p_lambda_delta(p, lam, delta), ppt_thr)[1]

    lam_ours, lam_ppt = bisect_lambda(ours), bisect_lambda(ppt)
    ok = lam_ours is not None and lam_ppt is not None
    return {"delta": delta,
            "lambda_ours": math.nan if lam_ours is None else lam_ours,
            "lambda_ppt": math.nan if lam_ppt is None else lam_ppt,
            "crossings_ok": ok}


def boundary_scan(spec: ExperimentSpec, measure_threshold: float = 1e-8,
                  ppt_threshold: float = -1e-8, path=None) -> List[dict]:
    """For each delta, the detection boundaries in lambda of both tests.

    ``lambda_ours`` is the smallest lambda whose net-restricted measure exceeds
    ``measure_threshold``; ``lambda_ppt`` the smallest whose partial transpose
    has an eigenvalue below ``ppt_threshold``.  ``nan`` marks a test that
    never (or always) fires on [0, 1].
    """
    items = [(spec.p, float(d), spec.net_n, spec.solver, measure_threshold, ppt_threshold)
             for d in spec.delta_grid]
    rows = _map(_boundary_row, items, spec.workers)
    if path is not None:
        write_csv(path, BOUNDARY_COLUMNS, rows)
    return rows


# --- exponent curves ---------------------------------------------------------------------------

def exponent_run(rho: DensityMatrix, net, alphas: Sequence[float] = DEFAULT_ALPHA_GRID,
                 r_grid: Optional[Sequence[float]] = None, config: Optional[SolverConfig] = None,
                 path=None) -> ExponentCurve:
    """Evaluate the Renyi measures on ``alphas`` and build the exponent curves."""
    if r_grid is None:
        r_grid = list(np.linspace(0.0, 1.0, 21))
    cfg = config or SolverConfig(max_iter=2000, adaptive_gamma=True)
    values = {float(a): e_alpha_star_D(rho, net, a, cfg).value for a in alphas}
    curve = exponent_curve(values, r_grid)
    if path is not None:
        curve.to_csv(path)
    return curve


# --- plotting scripts ------------------------------------------------------------------------

_PLOT_BODY = {
    "sweep": '''rows = [r for r in rows if not r["value"].startswith("error")]
for delta in sorted({float(r["delta"]) for r in rows}):
    sel = sorted((float(r["lambda"]), float(r["value"])) for r in rows if float(r["delta"]) == delta)
    plt.plot([s[0] for s in sel], [s[1] for s in sel], marker="o", label=f"delta={delta:g}")
plt.xlabel("lambda")
plt.ylabel("E*_D (nats)")
''',
    "boundary": '''d = [float(r["delta"]) for r in rows]
plt.plot(d, [float(r["lambda_ours"]) for r in rows], marker="o", label="relative entropy > threshold")
plt.plot(d, [float(r["lambda_ppt"]) for r in rows], marker="s", label="PPT violation")
plt.xlabel("delta")
plt.ylabel("boundary lambda")
''',
    "exponent": '''r = [float(x["r"]) for x in rows]
plt.plot(r, [float(x["achievability"]) for x in rows], label="achievability")
plt.plot(r, [float(x["strong_converse"]) for x in rows], label="strong converse")
plt.xlabel("r")
plt.ylabel("exponent")
''',
}

_PLOT_COLUMNS = {"sweep": SWEEP_COLUMNS, "boundary": BOUNDARY_COLUMNS, "exponent": EXPONENT_COLUMNS}


def emit_plot_script(csv_path, kind: str, script_path=None) -> str:
    """Write a standalone matplotlib script that plots ``csv_path``; returns its path."""
    if kind not in _PLOT_BODY:
        raise ValidationError(f"kind must be one of {sorted(_PLOT_BODY)}, got {kind!r}")
    if not os.path.exists(csv_path):
        raise ValidationError(f"{csv_path} does not exist")
    header = read_csv_header(csv_path)
    if header != _PLOT_COLUMNS[kind]:
        raise ValidationError(f"{csv_path} has columns {header}, expected {_PLOT_COLUMNS[kind]}")
    script_path = script_path or os.path.splitext(csv_path)[0] + "_plot.py"
    rel = os.path.relpath(csv_path, os.path.dirname(os.path.abspath(script_path)))
    png = os.path.splitext(os.path.basename(csv_path))[0] + ".png"
    src = (
        "import csv\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n"
        "here = os.path.dirname(os.path.abspath(__file__))\n"
        f"with open(os.path.join(here, {rel!r})) as fh:\n"
        "    rows = list(csv.DictReader(fh))\n\n"
        + _PLOT_BODY[kind]
        + f"plt.legend()\nplt.savefig(os.path.join(here, {png!r}), dpi=150)\n"
    )
    with open(script_path, "w") as fh:
        fh.write(src)
    return script_path
