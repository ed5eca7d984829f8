"""Command line entry point: ``mwlab <command> ...``.

Exit codes: 0 success, 2 validation error, 3 certification failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .convex import body_from_json, john_ellipsoid
from .errors import CertificationError
from .experiments import (
    ExperimentConfig,
    run_duality_experiment,
    run_fs_experiment,
    run_paraproduct_experiment,
)
from .grid import AtomField, DyadicGrid, parse_cube
from .haar import haar_coeffs
from .hermitian import matrix_to_json
from .operators import maximal_convex, maximal_pointwise, maximal_reducing, maximal_strong_dyadic
from .paraproducts import (
    SymbolSpectrum,
    bmo_prod_details,
    duality_pairing,
    h1_norm,
    paraproduct,
)
from .weights import MatrixWeight, ap_characteristic, reducing_operator


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def _weight(path, p=None) -> MatrixWeight:
    return MatrixWeight.from_json(_load(path), p)


def _emit(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> ExperimentConfig:
    obj = _load(args.config) if args.config else {}
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.out:
        obj["output"] = args.out
    return ExperimentConfig.from_dict(obj)


def _report(rep, out):
    text = rep.write(out)
    if not out:
        sys.stdout.write(text)


def _symbol(args, grid):
    return SymbolSpectrum.from_json(_load(args.symbol), grid=grid)


# ---------------------------------------------------------------- commands


def cmd_fs(args):
    _report(run_fs_experiment(_config(args), tilde=not args.no_tilde), args.out)


def cmd_duality(args):
    if args.symbol:
        U, V = (_weight(w, args.p) for w in args.weights)
        B = _symbol(args, U.grid)
        Phi = SymbolSpectrum.from_json(_load(args.phi), grid=U.grid)
        val = duality_pairing(B, Phi)
        bmo = bmo_prod_details(B, U, V, "exhaustive")
        _emit({"pairing": [val.real, val.imag], "bmo": bmo.value, "h1": h1_norm(Phi, U, V)}, args.out)
        return
    _report(run_duality_experiment(_config(args)), args.out)


def cmd_para(args):
    if args.symbol:
        f = AtomField.from_json(_load(args.input))
        B = _symbol(args, f.grid)
        out = paraproduct(args.kind, B, f)
        _emit(out.to_json(), args.out)
        return
    cfg = _config(args)
    if args.kind:
        cfg.kinds = (args.kind,)
    _report(run_paraproduct_experiment(cfg), args.out)


def cmd_bmo(args):
    U, V = (_weight(w, args.p) for w in args.weights)
    B = _symbol(args, U.grid)
    res = bmo_prod_details(B, U, V, args.omega, args.seed or 0)
    _emit({"bmo": res.value, "omega_mode": res.mode, "family_size": res.family_size}, args.out)


def cmd_h1(args):
    U, V = (_weight(w, args.p) for w in args.weights)
    Phi = _symbol(args, U.grid)
    _emit({"h1": h1_norm(Phi, U, V)}, args.out)


def cmd_ap(args):
    W = _weight(args.weight, args.p)
    parameter = args.parameter or ("one" if isinstance(W.grid, DyadicGrid) else "bi")
    val = ap_characteristic(W, args.family, parameter)
    _emit({"ap": val, "p": W.p, "family": args.family, "parameter": parameter}, args.out)


def cmd_reduce(args):
    W = _weight(args.weight, args.p)
    E = parse_cube(args.cube) if args.cube else None
    op = reducing_operator(W, E, method=args.method)
    _emit(op.to_json(), args.out)


def cmd_maximal(args):
    W = _weight(args.weight, args.p)
    f = AtomField.from_json(_load(args.input))
    family = "grid_aligned" if args.family == "aligned" else args.family
    if args.variant == "pointwise":
        out = maximal_pointwise(W, f, family)
    elif args.variant == "reducing":
        out = maximal_reducing(W, f, family)
    elif args.variant == "strong":
        out = maximal_strong_dyadic(W, f)
    else:
        out = maximal_convex(W, f, family)
    _emit(out.to_json(), args.out)


def cmd_haar(args):
    f = AtomField.from_json(_load(args.input))
    S = haar_coeffs(f)
    data = np.asarray(S.data)
    _emit({"grid": f.grid.to_json(), "kind": f.kind, "shape": list(data.shape),
           "re": data.real.ravel().tolist(), "im": data.imag.ravel().tolist()}, args.out)


def cmd_john(args):
    K = body_from_json(_load(args.body))
    G, factor = john_ellipsoid(K)
    _emit({"matrix": matrix_to_json(G.matrix), "sandwich_factor": factor}, args.out)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mwlab", description="Matrix-weighted dyadic analysis lab")
    ap.add_argument("--version", action="version", version=f"mwlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--p", type=float)
        return p

    p = common(sub.add_parser("fs", help="vector-valued maximal inequality experiment"))
    p.add_argument("--no-tilde", action="store_true", help="skip the reducing-operator variant")
    p.set_defaults(func=cmd_fs)

    p = common(sub.add_parser("duality", help="H^1-BMO pairing experiment or single instance"))
    p.add_argument("--symbol")
    p.add_argument("--phi")
    p.add_argument("--weights", nargs=2)
    p.set_defaults(func=cmd_duality)

    p = common(sub.add_parser("para", help="paraproduct evaluation or experiment"))
    p.add_argument("--kind", choices=["11", "00", "gamma", "10", "01", "g10", "g10s", "g01", "g01s"])
    p.add_argument("--symbol")
    p.add_argument("--input")
    p.add_argument("--weights", nargs=2)
    p.set_defaults(func=cmd_para)

    p = common(sub.add_parser("bmo", help="product BMO norm of a symbol"))
    p.add_argument("--symbol", required=True)
    p.add_argument("--weights", nargs=2, required=True)
    p.add_argument("--omega", choices=["auto", "exhaustive", "sampled"], default="auto")
    p.set_defaults(func=cmd_bmo)

    p = common(sub.add_parser("h1", help="H^1 norm of a symbol"))
    p.add_argument("--symbol", required=True)
    p.add_argument("--weights", nargs=2, required=True)
    p.set_defaults(func=cmd_h1)

    p = common(sub.add_parser("ap", help="A_p characteristic of a weight"))
    p.add_argument("--weight", required=True)
    p.add_argument("--family", choices=["dyadic", "grid_aligned", "aligned"], default="dyadic")
    p.add_argument("--parameter", choices=["one", "bi"])
    p.set_defaults(func=cmd_ap)

    p = common(sub.add_parser("reduce", help="reducing operator over a cube or rectangle"))
    p.add_argument("--weight", required=True)
    p.add_argument("--cube")
    p.add_argument("--method", choices=["auto", "closed", "john"], default="auto")
    p.set_defaults(func=cmd_reduce)

    p = common(sub.add_parser("maximal", help="matrix-weighted maximal functions"))
    p.add_argument("--variant", choices=["pointwise", "reducing", "strong", "convex"], default="pointwise")
    p.add_argument("--weight", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--family", choices=["dyadic", "aligned", "grid_aligned"], default="dyadic")
    p.set_defaults(func=cmd_maximal)

    p = common(sub.add_parser("haar", help="Haar spectrum of a field"))
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_haar)

    p = common(sub.add_parser("john", help="John ellipsoid of a convex body"))
    p.add_argument("--body", required=True)
    p.set_defaults(func=cmd_john)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CertificationError as exc:
        print(f"mwlab: certification failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, TypeError) as exc:
        print(f"mwlab: invalid input: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
