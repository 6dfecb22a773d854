"""Command-line interface: the ``frac`` tool.

Subcommands compute single quantities (lambda, cap, perimeter, cheeger,
torsion, inradius, const) or run the verification harness (verify, sweep).
Output is JSON on stdout (or --out); verify and sweep can emit CSV.
"""

import argparse
import json
import sys

from .constants import build_context, eval_constant, registry_names
from .energy import frac_perimeter
from .geometry import SearchConfig, capacitary_inradius
from .harness import HarnessConfig, parse_config, run_suite, suite_names, sweep
from .lattice import build_domain
from .params import FracParams
from .shapes import parse_shape
from .solvers import capacity, cheeger, frequency, torsion, torsion_identity_gap


def _emit(payload, args):
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _mask_from_shape(env, spec):
    shape = parse_shape(spec, dim=env.dim)
    pts = env.centers()
    return shape.contains(pts).reshape(env.box_shape)


def _cmd_lambda(args):
    dom = build_domain(args.shape, args.h)
    params = FracParams(dim=dom.dim, s=args.s, p=args.p, q=args.q,
                        allow_supercritical=True)
    res = frequency(dom, params)
    _emit({
        "quantity": "lambda",
        "shape": args.shape,
        "params": {"dim": dom.dim, "s": params.s, "p": params.p, "q": params.q},
        "h": args.h,
        "value": res.value,
        "iterations": res.iterations,
        "residual": res.residual,
        "converged": res.converged,
    }, args)
    return 0


def _cmd_cap(args):
    env = build_domain(args.env, args.h)
    params = FracParams(dim=env.dim, s=args.s, p=args.p,
                        allow_supercritical=True)
    sigma = _mask_from_shape(env, args.sigma)
    res = capacity(sigma, env, params)
    _emit({
        "quantity": "capacity",
        "sigma": args.sigma,
        "env": args.env,
        "params": {"dim": env.dim, "s": params.s, "p": params.p},
        "h": args.h,
        "value": res.value,
        "iterations": res.iterations,
        "residual": res.residual,
        "converged": res.converged,
    }, args)
    return 0


def _cmd_perimeter(args):
    dom = build_domain(args.shape, args.h)
    val = frac_perimeter(dom, args.s)
    _emit({
        "quantity": "perimeter",
        "shape": args.shape,
        "s": args.s,
        "h": args.h,
        "value": val,
    }, args)
    return 0


def _cmd_cheeger(args):
    omega = build_domain(args.omega, args.h)
    e_mask = _mask_from_shape(omega, args.e) & omega.active
    res = cheeger(e_mask, omega, args.s)
    _emit({
        "quantity": "cheeger",
        "e": args.e,
        "omega": args.omega,
        "s": args.s,
        "h": args.h,
        "value": res.value,
        "iterations": res.iterations,
        "converged": res.converged,
    }, args)
    return 0


def _cmd_torsion(args):
    params = FracParams(dim=args.dim, s=args.s, p=args.p,
                        allow_supercritical=True)
    res = torsion(args.r, args.R, params, h=args.h)
    gap, lin, en = torsion_identity_gap(res, params)
    _emit({
        "quantity": "torsion",
        "r": args.r,
        "R": args.R,
        "params": {"dim": args.dim, "s": args.s, "p": args.p},
        "h": args.h,
        "value": res.value,
        "source_integral": lin,
        "energy": en,
        "identity_gap": gap,
        "iterations": res.iterations,
        "converged": res.converged,
    }, args)
    return 0


def _cmd_inradius(args):
    dom = build_domain(args.shape, args.h)
    params = FracParams(dim=dom.dim, s=args.s, p=args.p,
                        allow_supercritical=True)
    cfg = SearchConfig(solver_h=args.solver_h or args.h, r_max=args.r_max,
                       center_stride=args.stride)
    res = capacitary_inradius(dom, params, args.gamma, cfg)
    _emit({
        "quantity": "capacitary_inradius",
        "shape": args.shape,
        "params": {"dim": dom.dim, "s": args.s, "p": args.p,
                   "gamma": args.gamma},
        "h": args.h,
        "r_lower": res.r_lower,
        "r_upper": res.r_upper,
        "r_upper_is_heuristic": res.heuristic_upper,
        "witness_center": list(res.witness[0]) if res.witness[0] else None,
        "witness_radius": res.witness[1],
        "samples": res.samples,
        "notes": {k: v for k, v in res.notes.items() if k != "found"},
    }, args)
    return 0


def _cmd_const(args):
    kv = {}
    if args.args:
        for part in args.args.split(","):
            if "=" not in part:
                raise SystemExit(f"bad --args entry {part!r}; expected k=v")
            k, _, v = part.partition("=")
            kv[k.strip()] = float(v)
    params = FracParams(dim=args.dim, s=args.s, p=args.p, q=args.q,
                        gamma=kv.get("gamma"), allow_supercritical=True)
    from .harness import _const_slots

    ctx = build_context(params, h=args.h, slots=_const_slots(args.name))
    val = eval_constant(args.name, ctx, **kv)
    _emit({
        "quantity": "constant",
        "name": args.name,
        "params": {"dim": args.dim, "s": args.s, "p": args.p, "q": params.q},
        "args": kv,
        "value": val,
    }, args)
    return 0


def _cmd_verify(args):
    cfg = parse_config(args.config) if args.config else HarnessConfig()
    report = run_suite(args.suite, cfg, seed=args.seed)
    if args.format == "csv":
        text = report.to_csv()
    else:
        text = report.to_json(include_timings=args.timings)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.all_pass() else 1


def _cmd_sweep(args):
    cfg = parse_config(args.config) if args.config else HarnessConfig()
    grid = [float(x) for x in args.grid.split(",")]
    rows = sweep(args.param, grid, args.target, cfg, seed=args.seed)
    if args.format == "csv":
        lines = ["param,value,target,result"]
        for r in rows:
            lines.append(f"{r['param']},{r['value']!r},{r['target']},"
                         f"{r['result']!r}")
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(rows, args)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="frac",
        description="nonlocal energies, capacities, frequencies and "
                    "capacitary inradii on uniform lattices")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambda", help="principal frequency of a domain")
    p.add_argument("--shape", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_lambda)

    p = sub.add_parser("cap", help="relative (s,p)-capacity")
    p.add_argument("--sigma", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_cap)

    p = sub.add_parser("perimeter", help="nonlocal perimeter of a shape")
    p.add_argument("--shape", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_perimeter)

    p = sub.add_parser("cheeger", help="Cheeger-type constant h_s(E; Omega)")
    p.add_argument("--e", required=True)
    p.add_argument("--omega", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_cheeger)

    p = sub.add_parser("torsion", help="torsion-type minimizer on balls")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_torsion)

    p = sub.add_parser("inradius", help="capacitary inradius bracket")
    p.add_argument("--shape", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--solver-h", type=float, default=None, dest="solver_h")
    p.add_argument("--r-max", type=float, default=None, dest="r_max")
    p.add_argument("--stride", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_inradius)

    p = sub.add_parser("const", help="evaluate a registry constant")
    p.add_argument("--name", required=True, choices=registry_names())
    p.add_argument("--args", default="")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_const)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True,
                   choices=suite_names() + ["all"])
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--timings", action="store_true",
                   help="include runtimes (breaks byte-determinism)")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("sweep", help="tabulate a quantity along a grid")
    p.add_argument("--param", required=True,
                   choices=["s", "gamma", "h", "ratio"])
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.add_argument("--target", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sweep)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
