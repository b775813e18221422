"""Command-line interface.

Exit codes: 0 success / holds, 1 fails, 2 inconclusive, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..conditions import cianchi_conditions, power_model, spanne_exponent_check, zygmund_condition
from ..field import BallFamily, load_field, make_ball_family, save_field
from ..norms import (bmo_norm, bmo_orlicz_functional, generalized_orlicz_morrey_norm, luxemburg_norm,
                     orlicz_morrey_lambda_norm, weak_orlicz_norm, weight_from_spec)
from ..operators import (RadialWeight, RieszConfig, StepFunction, WeightSpec, commutator, commutator_at,
                         fractional_maximal, hardy, hardy_best_constant, riesz_at, riesz_potential, verify_hardy)
from ..verdict import EXIT_CODES, jsonable
from ..young import (ConstructionError, cianchi_construct, cianchi_psi_p, delta2_test, from_spec, indices_verdict,
                     nabla2_test, sobolev_conjugate, type_indices)
from .experiments import SpecError, run_experiment
from .report import canonical_json, read_report, render_text, to_csv, to_svg, write_report

USAGE = 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj, out):
    out.write(canonical_json(obj))


def _phi(text, name="--phi"):
    try:
        return from_spec(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{name}: {exc}") from None


def _json_arg(text, name):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{name}: invalid JSON ({exc.msg})") from None


def _field(path, name="--field"):
    try:
        return load_field(path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"{name}: {exc}") from None


def _floats(vals):
    return np.asarray(vals, dtype=float)


# ---------------------------------------------------------------------------
# young


def cmd_young(args, out):
    phi = _phi(args.phi)
    pts = _floats(args.at) if args.at else np.array([0.5, 1.0, 2.0])
    if args.action == "inspect":
        rng = (args.range[0], args.range[1], int(args.range[2])) if args.range else (1e-3, 1e3, 121)
        d2, n2 = delta2_test(phi, rng), nabla2_test(phi, rng)
        _emit({"phi": phi.to_spec(), "r": pts, "eval": phi.eval(pts), "inverse": phi.inverse(pts),
               "delta2": d2.to_dict(), "nabla2": n2.to_dict()}, out)
        return 0
    if args.action == "conjugate":
        conj = phi.conjugate()
        _emit({"phi": phi.to_spec(), "conjugate": conj.to_spec(), "r": pts, "value": conj.eval(pts)}, out)
        return 0
    if args.action == "indices":
        rng = (args.range[0], args.range[1], int(args.range[2])) if args.range else (1e-3, 1e3, 121)
        ti = type_indices(phi, rng)
        v = indices_verdict(phi)
        _emit({"phi": phi.to_spec(), "indices": ti.to_dict(), "verdict": v.to_dict()}, out)
        return v.exit_code
    # construct
    try:
        built = _construct(phi, args)
    except ConstructionError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit({"phi": phi.to_spec(), "built": built.to_spec(), "r": pts, "value": built.eval(pts)}, out)
    return 0


def _construct(phi, args):
    if args.sobolev:
        alpha, n = args.sobolev
        built = sobolev_conjugate(phi, alpha, int(n))
    elif args.p is None:
        raise UsageError("construct needs --p (Cianchi) or --sobolev ALPHA N")
    elif args.dual:
        built = cianchi_psi_p(phi, args.p)
    else:
        built = cianchi_construct(phi, args.p)[1]
    return built


# ---------------------------------------------------------------------------
# norms


def _family(f, args):
    if args.family:
        d = _json_arg(args.family, "--family")
        try:
            return BallFamily(np.asarray(d["centers"], dtype=float), d["radii"], {"source": "cli"})
        except (KeyError, ValueError) as exc:
            raise UsageError(f"--family: {exc}") from None
    return make_ball_family(f, stride=args.stride, n_radii=args.radii)


def cmd_norm(args, out):
    f = _field(args.field)
    kind = args.kind
    if kind in ("luxemburg", "weak"):
        phi = _phi(args.phi)
        fn = luxemburg_norm if kind == "luxemburg" else weak_orlicz_norm
        res = fn(f, phi)
    elif kind == "morrey":
        if not args.weight:
            raise UsageError("morrey needs --weight")
        try:
            w = weight_from_spec(_json_arg(args.weight, "--weight"))
        except ValueError as exc:
            raise UsageError(f"--weight: {exc}") from None
        res = generalized_orlicz_morrey_norm(f, _phi(args.phi), w, _family(f, args), weak=args.weak)
    elif kind == "lambda":
        if args.lam is None:
            raise UsageError("lambda needs --lambda")
        res = orlicz_morrey_lambda_norm(f, _phi(args.phi), args.lam, _family(f, args), weak=args.weak)
    elif kind == "bmo":
        res = bmo_norm(f, _family(f, args))
    else:
        res = bmo_orlicz_functional(f, _phi(args.phi), _family(f, args))
    _emit({"norm": kind, "phi": args.phi, **res.to_dict()}, out)
    return 0


# ---------------------------------------------------------------------------
# operators


def _weight(text, name):
    try:
        if text is None:
            return None
        t = text.strip()
        if t.startswith("{"):
            return RadialWeight.from_spec(_json_arg(t, name))
        return RadialWeight(float(t))
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from None


def cmd_op(args, out):
    if args.kind == "hardy":
        w = _weight(args.w, "--w") or RadialWeight(-2.0)
        ws = WeightSpec(w, _weight(args.v1, "--v1") or RadialWeight(0.0), _weight(args.v2, "--v2") or RadialWeight(1.0),
                        args.log)
        rec = {"weights": ws.to_dict()}
        if args.t:
            g = StepFunction.constant(1.0)
            rec["t"] = args.t
            rec["H_w g"] = [hardy(g, ws.w, t, args.log).value for t in args.t]
        B, det = hardy_best_constant(ws)
        ver = verify_hardy(ws)
        rec.update({"B": B, "details": det, "verify": ver.to_dict()})
        _emit(rec, out)
        return 0 if det["tail_resolved"] else 2
    f = _field(args.field)
    if args.n is not None and args.n != f.dim:
        raise UsageError(f"--n {args.n} does not match the field dimension {f.dim}")
    if args.alpha is None:
        raise UsageError(f"{args.kind} needs --alpha")
    try:
        if args.kind == "riesz":
            cfg = RieszConfig(args.alpha, args.mode)
            cfg.check(f.dim)
            if args.at:
                pts = _floats(args.at)
                _emit({"op": "riesz", "alpha": args.alpha, "at": pts, "value": riesz_at(f, args.alpha, pts)}, out)
                return 0
            res = riesz_potential(f, cfg)
        elif args.kind == "maximal":
            res = fractional_maximal(f, args.alpha)
        else:
            if not args.b:
                raise UsageError("commutator needs --b")
            b = _field(args.b, "--b")
            if args.at:
                pts = _floats(args.at)
                _emit({"op": "commutator", "alpha": args.alpha, "at": pts,
                       "value": commutator_at(b, f, args.alpha, pts)}, out)
                return 0
            res = commutator(b, f, RieszConfig(args.alpha, args.mode))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        save_field(res, args.out)
    _emit({"op": args.kind, "alpha": args.alpha, "shape": list(res.shape), "max": float(np.max(res.values)),
           "min": float(np.min(res.values)), "out": args.out}, out)
    return 0


# ---------------------------------------------------------------------------
# conditions


def cmd_check(args, out):
    if args.kind == "spanne":
        need = [("--p", args.p), ("--q", args.q), ("--lambda", args.lam), ("--mu", args.mu), ("--alpha", args.alpha),
                ("--n", args.n)]
        missing = [k for k, v in need if v is None]
        if missing:
            raise UsageError(f"spanne needs {', '.join(missing)}")
        v = spanne_exponent_check(args.p, args.q, args.lam, args.mu, args.alpha, args.n)
        _emit(v.to_dict(), out)
        return v.exit_code
    if args.kind == "cianchi":
        if args.alpha is None or args.n is None:
            raise UsageError("cianchi needs --alpha and --n")
        try:
            weak, strong = cianchi_conditions(_phi(args.phi), _phi(args.psi, "--psi"), args.alpha, args.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _emit({"weak": weak.to_dict(), "strong": strong.to_dict()}, out)
        return strong.exit_code if args.strong else weak.exit_code
    # zygmund
    if args.n is None:
        raise UsageError("zygmund needs --n")
    if args.model:
        p, q, lam, mu = args.model
        phi, psi, w1, w2 = power_model(p, q, lam, mu, args.n)
    else:
        if not (args.w1 and args.w2):
            raise UsageError("zygmund needs --model P Q LAMBDA MU or --phi/--psi/--w1/--w2")
        try:
            w1 = weight_from_spec(_json_arg(args.w1, "--w1"))
            w2 = weight_from_spec(_json_arg(args.w2, "--w2"))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        phi, psi = _phi(args.phi), _phi(args.psi, "--psi")
    rep = zygmund_condition(phi, psi, w1, w2, args.n, log_factor=args.log)
    _emit(rep.to_dict(), out)
    return rep.exit_code


# ---------------------------------------------------------------------------
# experiments and reports


def cmd_experiment(args, out):
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise UsageError(f"spec: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"spec: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if args.timing:
        spec["timing"] = True
    try:
        rep = run_experiment(spec)
    except SpecError as exc:
        raise UsageError(f"spec field {exc}") from None
    if args.out:
        write_report(rep, args.out)
    else:
        _emit(rep, out)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(to_csv(rep))
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(to_svg(rep))
    return EXIT_CODES.get(rep.get("status"), 2)


def cmd_report(args, out):
    try:
        rep = read_report(args.report)
    except (OSError, ValueError) as exc:
        raise UsageError(f"report: {exc}") from None
    fmt = {"text": render_text, "csv": to_csv, "svg": to_svg, "json": canonical_json}[args.format]
    out.write(fmt(rep))
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    p = Parser(prog="orliczmorrey", description="Orlicz-Morrey norms, Riesz potentials and their conditions.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=Parser)

    y = sub.add_parser("young", help="Young-function tools")
    y.add_argument("action", choices=["inspect", "conjugate", "indices", "construct"])
    y.add_argument("--phi", required=True, help="spec: JSON or shorthand like power:2")
    y.add_argument("--at", type=float, nargs="+")
    y.add_argument("--range", type=float, nargs=3, metavar=("LO", "HI", "COUNT"))
    y.add_argument("--p", type=float)
    y.add_argument("--dual", action="store_true", help="build the dual construction from Psi")
    y.add_argument("--sobolev", type=float, nargs=2, metavar=("ALPHA", "N"))
    y.set_defaults(func=cmd_young)

    nrm = sub.add_parser("norm", help="norm functionals of a sampled field")
    nrm.add_argument("kind", choices=["luxemburg", "weak", "morrey", "lambda", "bmo", "bmo_orlicz"])
    nrm.add_argument("--field", required=True)
    nrm.add_argument("--phi", default="power:2")
    nrm.add_argument("--weight")
    nrm.add_argument("--lambda", dest="lam", type=float)
    nrm.add_argument("--weak", action="store_true")
    nrm.add_argument("--family", help='JSON {"centers": [...], "radii": [...]}')
    nrm.add_argument("--stride", type=int, default=4)
    nrm.add_argument("--radii", type=int, default=16)
    nrm.set_defaults(func=cmd_norm)

    op = sub.add_parser("op", help="apply an operator")
    op.add_argument("kind", choices=["riesz", "maximal", "commutator", "hardy"])
    op.add_argument("--field")
    op.add_argument("--b")
    op.add_argument("--alpha", type=float)
    op.add_argument("--n", type=int)
    op.add_argument("--at", type=float, nargs="+")
    op.add_argument("--mode", choices=["direct", "convolution"], default="direct")
    op.add_argument("--out")
    op.add_argument("--w")
    op.add_argument("--v1")
    op.add_argument("--v2")
    op.add_argument("--t", type=float, nargs="+")
    op.add_argument("--log", action="store_true")
    op.set_defaults(func=cmd_op)

    ck = sub.add_parser("check", help="sufficient-condition checkers")
    ck.add_argument("kind", choices=["cianchi", "zygmund", "spanne"])
    ck.add_argument("--phi", default="power:2")
    ck.add_argument("--psi", default="power:4")
    ck.add_argument("--w1")
    ck.add_argument("--w2")
    ck.add_argument("--model", type=float, nargs=4, metavar=("P", "Q", "LAMBDA", "MU"))
    ck.add_argument("--p", type=float)
    ck.add_argument("--q", type=float)
    ck.add_argument("--lambda", dest="lam", type=float)
    ck.add_argument("--mu", type=float)
    ck.add_argument("--alpha", type=float)
    ck.add_argument("--n", type=int)
    ck.add_argument("--log", action="store_true")
    ck.add_argument("--strong", action="store_true", help="exit code from the strong verdict")
    ck.set_defaults(func=cmd_check)

    ex = sub.add_parser("experiment", help="run an experiment spec")
    ex.add_argument("action", choices=["run"])
    ex.add_argument("spec")
    ex.add_argument("--out")
    ex.add_argument("--csv")
    ex.add_argument("--svg")
    ex.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")
    ex.set_defaults(func=cmd_experiment)

    rp = sub.add_parser("report", help="render a saved report")
    rp.add_argument("action", choices=["render"])
    rp.add_argument("report")
    rp.add_argument("--format", choices=["text", "csv", "svg", "json"], default="text")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return int(args.func(args, out))
    except UsageError as exc:
        sys.stderr.write(f"orliczmorrey: error: {exc}\n")
        return USAGE
    except ConstructionError as exc:
        sys.stderr.write(f"orliczmorrey: construction error: {exc}\n")
        return 1


def run():
    sys.exit(main())


__all__ = ["main", "build_parser", "jsonable"]
