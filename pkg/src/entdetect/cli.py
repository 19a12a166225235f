"""Command-line entry point ``entdetect``.

Exit codes: 0 success, 64 usage or input errors, 65 infeasible parameters,
70 numerical failures.  ``membership`` returns 0/1/2 for
separable-consistent/entangled/inconclusive.
"""

import argparse
import json
import math
import os
import sys
from typing import Dict, List, Optional

import numpy as np

from .coherence import c_alpha_star, c_star, c_star_iterative
from .errors import DomainError, InfeasibleParameters, NumericalError
from .experiments import (ExperimentSpec, boundary_scan, emit_plot_script, exponent_run, read_config,
                          split_config, sweep_lambda)
from .linalg import DensityMatrix
from .measures import DEFAULT_ALPHA_GRID, e_alpha_star_D, e_star_D
from .membership import decide_membership
from .nets import complex_net, estimate_eps2
from .solver import SolverConfig
from .states import rho_p_lambda_delta
from .witness import extract_witness, validate_witness

EXIT_USAGE = 64
EXIT_INFEASIBLE = 65
EXIT_NUMERICAL = 70

_EXTRA_KEYS = ("alphas", "r_grid", "eps1", "samples", "alpha")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file (ExperimentSpec / SolverConfig fields)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output file (or directory for demo)")
    p.add_argument("--max-iter", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entdetect", description="Net-restricted entanglement measures and witnesses.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("net", help="build a complex net and optionally export it")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--export")
    p.add_argument("--samples", type=int, default=0, help="sampled eps2 estimate with this many probes")
    _common(p)

    p = sub.add_parser("measure", help="E*_D or its Renyi version for a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--net-n", type=int, default=16)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--sep-out", help="write the minimizer in the matrix file format")
    _common(p)

    p = sub.add_parser("coherence", help="coherence measures of a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--iterative", action="store_true", help="also run the iterative cross-check")
    _common(p)

    p = sub.add_parser("witness", help="extract and validate a witness")
    p.add_argument("--state", required=True)
    p.add_argument("--net-n", type=int, default=16)
    p.add_argument("--samples", type=int, default=10000)
    _common(p)

    p = sub.add_parser("membership", help="separability decision with promise gap eps1")
    p.add_argument("--state", required=True)
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--net-n", type=int, default=16)
    p.add_argument("--strict", action="store_true", help="fail (exit 65) when eps1 is below the net gap")
    p.add_argument("--require-certificate", action="store_true",
                   help="report inconclusive unless the certified lower bound is positive")
    _common(p)

    p = sub.add_parser("exponent", help="exponent curves from a grid of Renyi orders")
    p.add_argument("--state", required=True)
    p.add_argument("--net-n", type=int, default=16)
    p.add_argument("--alphas", type=_floats, default=None)
    p.add_argument("--r-grid", type=_floats, default=None)
    p.add_argument("--plot", action="store_true")
    _common(p)

    for name, helptext in (("sweep", "measure vs lambda for several delta"),
                           ("boundary", "detection boundaries in lambda")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--deltas", type=_floats, default=None)
        p.add_argument("--net-n", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--plot", action="store_true")
        if name == "sweep":
            p.add_argument("--lambdas", type=_floats, default=None)
        _common(p)

    p = sub.add_parser("demo", help="sweep, boundary scan and exponent curve in one go")
    p.add_argument("--quick", action="store_true", help="coarse grids for a fast smoke run")
    _common(p)
    return parser


def _config(args) -> Dict[str, object]:
    return read_config(args.config, _EXTRA_KEYS) if args.config else {}


def _solver(cfg: Dict[str, object], args, **defaults) -> SolverConfig:
    _, solver = split_config(cfg)
    merged = dict(defaults)
    merged.update(solver)
    if args.max_iter is not None:
        merged["max_iter"] = args.max_iter
    return SolverConfig(**merged)


def _load_state(path: str) -> DensityMatrix:
    return DensityMatrix.load(path)


def _emit(obj: dict, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2)
    print(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _net_for(rho: DensityMatrix, n: int):
    if rho.dims is None:
        raise ValueError("the state file has no bipartite dims")
    return complex_net(n, min(rho.dims))


def cmd_net(args) -> int:
    net = complex_net(args.n, args.d)
    info = {"n": args.n, "d": args.d, "size": len(net), "eps2_bound": net.eps2_bound}
    if args.samples:
        seed = args.seed if args.seed is not None else 0
        info["eps2_sampled"] = estimate_eps2(net, args.samples, seed)
    if args.export:
        net.save(args.export)
    _emit(info, args.out)
    return 0


def cmd_measure(args) -> int:
    cfg = _config(args)
    rho = _load_state(args.state)
    net = _net_for(rho, args.net_n)
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    if alpha is None or alpha == 1:
        res = e_star_D(rho, net, _solver(cfg, args, max_iter=5000, rel_tol=1e-12))
    else:
        res = e_alpha_star_D(rho, net, float(alpha), _solver(cfg, args, max_iter=5000, adaptive_gamma=True))
    if args.sep_out:
        res.sep_state.save(args.sep_out)
    _emit(res.to_json(), args.out)
    return 0


def cmd_coherence(args) -> int:
    cfg = _config(args)
    rho = _load_state(args.state)
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    out = {"c_star": c_star(rho)}
    if args.iterative:
        out["c_star_iterative"] = c_star_iterative(rho)
    if alpha is not None and alpha != 1:
        out["alpha"] = float(alpha)
        out["c_alpha_star"] = c_alpha_star(rho, float(alpha))
    _emit({k: (str(v) if isinstance(v, float) and math.isinf(v) else v) for k, v in out.items()}, args.out)
    return 0


def cmd_witness(args) -> int:
    cfg = _config(args)
    rho = _load_state(args.state)
    net = _net_for(rho, args.net_n)
    res = e_star_D(rho, net, _solver(cfg, args, max_iter=3000, rel_tol=1e-12))
    w = extract_witness(rho, res)
    samples = int(cfg.get("samples", args.samples))
    report = validate_witness(w, samples, args.seed if args.seed is not None else 0,
                              net if not res.swapped else None)
    if args.out:
        w.save(args.out, report=report)
    _emit({"offset": w.offset, "eps2": w.eps2, "slack": w.slack, "tr_rho_W": w.tr_rho_w,
           "min_sampled_margin": report.min_margin, "violations": report.violations,
           "net_min_margin": report.net_min_margin, "samples": samples}, None)
    return 0


def cmd_membership(args) -> int:
    cfg = _config(args)
    rho = _load_state(args.state)
    net = _net_for(rho, args.net_n)
    verdict, _ = decide_membership(rho, net, args.eps1, _solver(cfg, args, max_iter=2000),
                                   strict=args.strict,
                                   require_certificate=args.require_certificate)
    _emit(verdict.to_json(), args.out)
    return verdict.exit_code


def _spec(cfg, args, **over) -> ExperimentSpec:
    spec_vals, _ = split_config(cfg)
    spec_vals.update({k: v for k, v in over.items() if v is not None})
    solver = _solver(cfg, args, max_iter=1000, rel_tol=1e-10)
    if args.seed is not None:
        spec_vals["seed"] = args.seed
    return ExperimentSpec(solver=solver, **spec_vals)


def cmd_sweep(args) -> int:
    cfg = _config(args)
    spec = _spec(cfg, args, p=args.p, delta_grid=args.deltas, lambda_grid=args.lambdas,
                 net_n=args.net_n, workers=args.workers)
    out = args.out or os.path.join(spec.output_dir, "sweep.csv")
    sweep_lambda(spec, out)
    if args.plot:
        emit_plot_script(out, "sweep")
    print(out)
    return 0


def cmd_boundary(args) -> int:
    cfg = _config(args)
    spec = _spec(cfg, args, p=args.p if args.p is not None else cfg.get("p", 0.1),
                 delta_grid=args.deltas, net_n=args.net_n, workers=args.workers)
    out = args.out or os.path.join(spec.output_dir, "boundary.csv")
    boundary_scan(spec, path=out)
    if args.plot:
        emit_plot_script(out, "boundary")
    print(out)
    return 0


def cmd_exponent(args) -> int:
    cfg = _config(args)
    rho = _load_state(args.state)
    net = _net_for(rho, args.net_n)
    alphas = args.alphas or cfg.get("alphas") or list(DEFAULT_ALPHA_GRID)
    r_grid = args.r_grid or cfg.get("r_grid")
    out = args.out or "exponent.csv"
    exponent_run(rho, net, alphas, r_grid, _solver(cfg, args, max_iter=2000, adaptive_gamma=True), out)
    if args.plot:
        emit_plot_script(out, "exponent")
    print(out)
    return 0


def cmd_demo(args) -> int:
    cfg = _config(args)
    out_dir = args.out or "demo_out"
    os.makedirs(out_dir, exist_ok=True)
    if args.quick:
        lambdas, deltas, b_deltas, iters = [0.05, 0.3, 0.6, 1.0], [1e-1, 1e-2, 1e-4], [0.1], 300
        alphas = [0.25, 0.5, 0.75, 0.95, 1.1, 1.5, 2.0]
    else:
        lambdas, deltas, b_deltas, iters = None, [1e-1, 1e-2, 1e-4], [0.05, 0.1, 0.2], 1000
        alphas = list(DEFAULT_ALPHA_GRID)
    if args.max_iter is None:
        args.max_iter = iters
    sweep_spec = _spec(cfg, args, p=0.5, delta_grid=deltas, lambda_grid=lambdas)
    sweep_csv = os.path.join(out_dir, "sweep.csv")
    sweep_lambda(sweep_spec, sweep_csv)
    emit_plot_script(sweep_csv, "sweep")

    bound_spec = _spec(cfg, args, p=0.1, delta_grid=b_deltas)
    bound_spec.solver = SolverConfig(max_iter=max(3000, args.max_iter))
    bound_csv = os.path.join(out_dir, "boundary.csv")
    boundary_scan(bound_spec, path=bound_csv)
    emit_plot_script(bound_csv, "boundary")

    rho = rho_p_lambda_delta(0.5, 0.9, 0.01)
    exp_csv = os.path.join(out_dir, "exponent.csv")
    exponent_run(rho, complex_net(16, 2), alphas, None,
                 SolverConfig(max_iter=args.max_iter, adaptive_gamma=True), exp_csv)
    emit_plot_script(exp_csv, "exponent")
    print(out_dir)
    return 0


_COMMANDS = {
    "net": cmd_net, "measure": cmd_measure, "coherence": cmd_coherence, "witness": cmd_witness,
    "membership": cmd_membership, "exponent": cmd_exponent, "sweep": cmd_sweep,
    "boundary": cmd_boundary, "demo": cmd_demo,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleParameters as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericalError, DomainError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
