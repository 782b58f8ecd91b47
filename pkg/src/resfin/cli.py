"""Command-line front end.

Exit status: 0 when something was verified or found, 1 when the answer is
"none at this context" or the check was refuted, 2 on any error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import io
from .core import FiniteAction
from .errors import ResfinError
from .io import RunManifest, format_value, parse_fraction, parse_system_file, write_json

EXIT_FOUND, EXIT_NONE, EXIT_ERROR = 0, 1, 2

COMMANDS = ("check-witness", "chain-recurrence", "compressible", "recurrence-scan", "paradox",
            "invariant-measure", "equidecompose", "measure-to-model", "affine-lift",
            "fixed-point-model", "bernoulli-model", "algebraic", "microstate-extract", "berg",
            "selftest")


class Usage(ResfinError):
    pass


def _tolerances(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise Usage(f"--tol expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise Usage(f"--tol {k}: {v!r} is not a number") from exc
    return out


def _common(p):
    p.add_argument("--epsilon", help="resolution as p/q")
    p.add_argument("--window", type=int, help="atom or pattern window")
    p.add_argument("--ball", type=int, help="translator or sample radius")
    p.add_argument("--horizon", type=int, help="largest return time scanned")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override")
    p.add_argument("--out", help="write a JSON artifact here")


def build_parser():
    parser = argparse.ArgumentParser(prog="resfin", description="Finite models of group actions.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    common = argparse.ArgumentParser(add_help=False)
    _common(common)

    def cmd(name, help_text, inputs=1):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if inputs:
            p.add_argument("input", help="input file")
        return p

    cmd("check-witness", "re-check a stored witness")
    cmd("chain-recurrence", "epsilon-recurrent set and a model built from epsilon-cycles")
    cmd("compressible", "search for a clopen U with T(U) a proper subset of U")
    p = cmd("recurrence-scan", "least n, m with d(T^n x, T^-m x) < epsilon")
    p.add_argument("--point", default="0", help="point as JSON (default 0)")
    p.add_argument("--min", type=int, default=1, help="least n and m")
    for name, text in (("paradox", "(k, l)-paradoxical decomposition at bounded context"),
                       ("invariant-measure", "invariant measure normalizing A at bounded context")):
        p = cmd(name, text)
        p.add_argument("--set", help="A as a JSON list of atoms (default: every atom)")
        if name == "paradox":
            p.add_argument("--k", type=int, default=2)
            p.add_argument("--l", type=int, default=1)
    p = cmd("equidecompose", "match two labeled unions of atoms piece by piece")
    p.add_argument("--pieces", required=True, help='JSON file {"P": {label: atoms}, "Q": {...}}')
    p = cmd("measure-to-model", "finite model with empirical measure near a product measure")
    p.add_argument("--measure", required=True, help="comma-separated letter probabilities")
    p = cmd("affine-lift", "lift a stored witness to quantized measures")
    p.add_argument("--m", type=int, default=2)
    p = cmd("fixed-point-model", "model of an affine map with a fixed point")
    p.add_argument("--fixed", required=True, help="comma-separated coordinates of the fixed point")
    p.add_argument("--m", type=int, default=4)
    p = cmd("bernoulli-model", "colorings of a finite quotient as a model of the full shift", inputs=0)
    p.add_argument("--alphabet", type=int, default=2)
    p.add_argument("--cyclic", type=int, help="use the quotient Z/n")
    p.add_argument("--rank", type=int, default=1)
    p = cmd("algebraic", "periodic points of an algebraic Z-action", inputs=0)
    p.add_argument("--f", required=True, help="terms exponent:coefficient, e.g. 0:3,1:-1,-1:-1")
    p.add_argument("--period", type=int, required=True)
    p = cmd("microstate-extract", "recover a permutation action from approximate matrices")
    p.add_argument("--noise", type=float, default=0.0, help="perturbation when encoding an action file")
    p.add_argument("--matrices", help="write the encoded matrices here")
    p = cmd("berg", "rotation-interpolated projection on the golden rotation orbit", inputs=0)
    p.add_argument("--n", type=int, default=8)
    cmd("selftest", "run the acceptance suite", inputs=0)
    return parser


def _eps(args, default=None):
    if args.epsilon is None:
        if default is None:
            raise Usage("--epsilon is required")
        return Fraction(default)
    return parse_fraction(args.epsilon, "--epsilon")


def _emit(args, payload, inputs=()):
    if args.out:
        manifest = RunManifest.for_files(args.command, inputs, args.seed, _tolerances(args.tol))
        write_json(args.out, payload, manifest)


def _say(key, value):
    print(f"{key}: {value}")


def _system(args):
    return parse_system_file(args.input).system


# -- commands -----------------------------------------------------------------------------

def cmd_check_witness(args):
    data = io.read_json(args.input)
    if isinstance(data, dict) and data.get("kind") == "paradox-certificate":
        from .paradox import verify_certificate
        cert, ctx = io.certificate_from_dict(data, args.input)
        ok = verify_certificate(cert, ctx)
        _say("context", ctx.bound())
        _say("certificate", "verified" if ok else "refuted")
        return EXIT_FOUND if ok else EXIT_NONE
    eps = parse_fraction(args.epsilon, "--epsilon") if args.epsilon else None
    w = io.witness_from_dict(data, args.input, eps)
    _say("elements", w.action.size)
    _say("epsilon", format_value(w.epsilon))
    _say("density_defect", w.density_defect)
    _say("equivariance_defect", w.equivariance_defect)
    _say("passed", w.passed)
    _emit(args, io.witness_to_dict(w), [args.input])
    return EXIT_FOUND if w.passed else EXIT_NONE


def _as_sample(system, args):
    from .systems import CompactifiedZ, FiniteSample, ShiftSystem
    from .zsystems import shift_sample
    if isinstance(system, FiniteSample):
        return system
    if isinstance(system, CompactifiedZ):
        return system.sample(args.ball or 4)
    if isinstance(system, ShiftSystem) and system.rank == 1:
        return shift_sample(system, args.window or 4)
    raise Usage(f"chain recurrence needs a finite sample, not {system.kind}")


def cmd_chain_recurrence(args):
    from .errors import NoChain
    from .zsystems import build_eps_graph, chain_recurrent_set, model_from_chains
    sample = _as_sample(_system(args), args)
    eps = _eps(args)
    rec = sorted(chain_recurrent_set(build_eps_graph(sample, eps)))
    labels = sample.labels or tuple(range(sample.size))
    _say("sample_size", sample.size)
    _say("recurrent", len(rec))
    _say("recurrent_points", [str(labels[i]) for i in rec])
    try:
        w = model_from_chains(sample, eps)
    except NoChain:
        _say("model", "none")
        _emit(args, {"version": 1, "kind": "chain-recurrence", "recurrent": []}, [args.input])
        return EXIT_NONE
    _say("model_elements", w.action.size)
    _say("density_defect", w.density_defect)
    _say("equivariance_defect", w.equivariance_defect)
    payload = io.witness_to_dict(w)
    payload["recurrent"] = list(rec)
    _emit(args, payload, [args.input])
    return EXIT_FOUND


def cmd_compressible(args):
    from .zsystems import find_compressible_clopen
    window = args.window or 1
    u = find_compressible_clopen(_system(args), window)
    _say("window", window)
    if u is None:
        _say("compressible", "none at this window")
        _emit(args, {"version": 1, "kind": "compressible", "window": window, "atoms": None}, [args.input])
        return EXIT_NONE
    atoms = json.loads(json.dumps(list(u.atoms)))
    _say("compressible", atoms)
    _emit(args, {"version": 1, "kind": "compressible", "window": window, "atoms": atoms}, [args.input])
    return EXIT_FOUND


def cmd_recurrence_scan(args):
    from .zsystems import recurrence_scan
    system = _system(args)
    try:
        point = io.point_from_json(system, json.loads(args.point), "--point")
    except json.JSONDecodeError as exc:
        raise Usage(f"--point is not JSON: {exc.msg}") from exc
    horizon = args.horizon or 100
    rec = recurrence_scan(system, point, _eps(args), args.min, horizon)
    _say("horizon", horizon)
    if rec is None:
        _say("recurrence", "none within the horizon")
        _emit(args, {"version": 1, "kind": "recurrence", "horizon": horizon, "found": None}, [args.input])
        return EXIT_NONE
    _say("n", rec.n)
    _say("m", rec.m)
    _say("distance", rec.distance)
    _emit(args, {"version": 1, "kind": "recurrence", "horizon": horizon,
                 "found": {"n": rec.n, "m": rec.m, "distance": str(rec.distance)}}, [args.input])
    return EXIT_FOUND


def _context(args):
    system = _system(args)
    window, radius = args.window or 1, args.ball or 1
    return system, window, radius, io.build_context(system, window, radius)


def _atoms(ctx, text, where):
    if text is None:
        return tuple(ctx.source)
    lookup = {json.dumps(json.loads(json.dumps(a, default=str)), sort_keys=True): a for a in ctx.source}
    try:
        items = json.loads(text) if isinstance(text, str) else text
    except json.JSONDecodeError as exc:
        raise Usage(f"{where} is not JSON: {exc.msg}") from exc
    out = []
    for a in items:
        key = json.dumps(a, sort_keys=True)
        if key not in lookup:
            raise Usage(f"{where}: {a!r} is not a source atom")
        out.append(lookup[key])
    return tuple(out)


def cmd_paradox(args):
    from .paradox import decide_paradoxical
    system, window, radius, ctx = _context(args)
    A = _atoms(ctx, args.set, "--set")
    cert = decide_paradoxical(ctx, A, args.k, args.l)
    _say("context", ctx.bound())
    if cert is None:
        _say("paradoxical", f"none at this context (k={args.k}, l={args.l})")
        _emit(args, {"version": 1, "kind": "paradox", "context": ctx.bound(), "certificate": None},
              [args.input])
        return EXIT_NONE
    _say("paradoxical", f"certificate with {len(cert.pieces)} pieces (k={cert.k}, l={cert.l})")
    _emit(args, io.certificate_to_dict(cert, system, window, radius), [args.input])
    return EXIT_FOUND


def cmd_invariant_measure(args):
    from .paradox import invariant_measure_lp
    system, window, radius, ctx = _context(args)
    A = _atoms(ctx, args.set, "--set")
    mu = invariant_measure_lp(ctx, A)
    _say("context", ctx.bound())
    if mu is None:
        _say("invariant_measure", "none at this context")
        _emit(args, {"version": 1, "kind": "invariant-measure", "context": ctx.bound(), "weights": None},
              [args.input])
        return EXIT_NONE
    weights = sorted((json.dumps(json.loads(json.dumps(t, default=str))), format_value(w))
                     for t, w in mu.weights.items() if w)
    for t, w in weights:
        _say(t, w)
    _emit(args, {"version": 1, "kind": "invariant-measure", "context": ctx.bound(), "digest": ctx.digest,
                 "weights": [[json.loads(t), w] for t, w in weights]}, [args.input])
    return EXIT_FOUND


def cmd_equidecompose(args):
    from .paradox import equidecompose
    system, window, radius, ctx = _context(args)
    spec = io.read_json(args.pieces)
    try:
        P = {k: _atoms(ctx, v, f"P[{k}]") for k, v in spec["P"].items()}
        Q = {k: _atoms(ctx, v, f"Q[{k}]") for k, v in spec["Q"].items()}
    except (KeyError, AttributeError) as exc:
        raise Usage("--pieces needs objects 'P' and 'Q'") from exc
    pieces = equidecompose(ctx, P, Q)
    _say("context", ctx.bound())
    if pieces is None:
        _say("equidecomposable", "no matching at this context")
        _emit(args, {"version": 1, "kind": "equidecompose", "pieces": None}, [args.input, args.pieces])
        return EXIT_NONE
    from .words import word_str
    out = [{"translator": word_str(s), "from": n, "to": m,
            "atoms": sorted(json.loads(json.dumps(list(c), default=str)), key=json.dumps)}
           for s, n, m, c in pieces]
    _say("pieces", len(out))
    _emit(args, {"version": 1, "kind": "equidecompose", "pieces": out}, [args.input, args.pieces])
    return EXIT_FOUND


def cmd_measure_to_model(args):
    from .measures import measure_to_model, product_measure
    system = _system(args)
    probs = [parse_fraction(v.strip(), "--measure") for v in args.measure.split(",")]
    if sum(probs) != 1:
        raise Usage("--measure probabilities must sum to 1")
    model = measure_to_model(system, args.ball or 0, product_measure(probs), _eps(args, "1/2"))
    w = model.witness
    _say("elements", model.scale)
    _say("perturbation_radius", model.radius)
    _say("density_defect", w.density_defect)
    _say("equivariance_defect", w.equivariance_defect)
    payload = io.witness_to_dict(w)
    payload["weights"] = [[list(a), format_value(x)] for a, x in model.weights.items()]
    payload["perturbation_radius"] = format_value(model.radius)
    _emit(args, payload, [args.input])
    return EXIT_FOUND


def cmd_affine_lift(args):
    from .measures import affine_lift
    w = io.witness_from_dict(io.read_json(args.input), args.input)
    lift = affine_lift(w, args.m)
    _say("lifted_elements", lift.action.size)
    _say("defect", lift.defect)
    _say("base_defect", lift.base_defect)
    _emit(args, {"version": 1, "kind": "affine-lift", "m": args.m, "elements": lift.action.size,
                 "defect": io._number(lift.defect), "base_defect": io._number(lift.base_defect)},
          [args.input])
    return EXIT_FOUND if lift.defect <= lift.base_defect else EXIT_NONE


def cmd_fixed_point_model(args):
    from .measures import fixed_point_model
    system = _system(args)
    w = [parse_fraction(v.strip(), "--fixed") for v in args.fixed.split(",")]
    fm = fixed_point_model(system, system.vertices, w, args.m, epsilon=_eps(args, "1/2"))
    _say("elements", fm.witness.action.size)
    _say("defect", fm.defect)
    _say("bound", fm.bound)
    _say("density_defect", fm.witness.density_defect)
    payload = io.witness_to_dict(fm.witness)
    payload.update(defect=io._number(fm.defect), bound=io._number(fm.bound))
    _emit(args, payload, [args.input])
    return EXIT_FOUND


def cmd_bernoulli_model(args):
    from .symbolic import bernoulli_model
    from .words import FiniteQuotient
    if args.cyclic:
        quotient = FiniteQuotient.cyclic(args.cyclic)
    else:
        quotient = FiniteQuotient.ball_quotient(args.rank, args.ball or 1)
    w = bernoulli_model(args.alphabet, quotient, _eps(args))
    _say("quotient_order", quotient.order)
    _say("elements", w.action.size)
    _say("density_defect", w.density_defect)
    _say("equivariance_defect", w.equivariance_defect)
    _say("passed", w.passed)
    _emit(args, io.witness_to_dict(w))
    return EXIT_FOUND if w.passed else EXIT_NONE


def _group_ring(text):
    f = {}
    for term in text.split(","):
        try:
            e, c = term.split(":")
            f[int(e)] = f.get(int(e), 0) + int(c)
        except ValueError as exc:
            raise Usage(f"--f: bad term {term!r}") from exc
    return f


def cmd_algebraic(args):
    from .symbolic import algebraic_fixed_points, algebraic_model_witness
    f = _group_ring(args.f)
    order, factors = algebraic_fixed_points(f, args.period)
    _say("period", args.period)
    _say("fixed_points", order)
    _say("invariant_factors", list(factors))
    payload = {"version": 1, "kind": "algebraic", "f": {str(k): v for k, v in sorted(f.items())},
               "period": args.period, "order": order, "factors": list(factors)}
    code = EXIT_FOUND
    if args.epsilon:
        w = algebraic_model_witness(f, args.period, _eps(args))
        _say("density_defect", w.density_defect)
        _say("equivariance_defect", w.equivariance_defect)
        _say("passed", w.passed)
        payload["witness"] = io.witness_to_dict(w)
        code = EXIT_FOUND if w.passed else EXIT_NONE
    _emit(args, payload)
    return code


def cmd_microstate_extract(args):
    from .matrix import encode_action, extract_finite_action
    with open(args.input, "rb") as fh:
        head = fh.read(8)
    if head == io.MAGIC:
        t = io.read_matrices(args.input)
    else:
        action = parse_system_file(args.input).system
        if not isinstance(action, FiniteAction):
            raise Usage("microstate-extract takes a matrix file or a finite-action file")
        t = encode_action(action, args.noise, args.seed)
        if args.matrices:
            io.write_matrices(args.matrices, t,
                              RunManifest.for_files(args.command, [args.input], args.seed, _tolerances(args.tol)))
    ex = extract_finite_action(t, seed=args.seed, tols=_tolerances(args.tol) or None)
    _say("dimension", t.dimension)
    _say("delta", f"{ex.delta:.3e}")
    _say("threshold", f"{ex.report['threshold']:.3e}")
    _say("state_action", [list(g) for g in ex.action.generators])
    if ex.label_action is not None:
        _say("label_action", [list(g) for g in ex.label_action.generators])
    _emit(args, {"version": 1, "kind": "microstate", "delta": ex.delta,
                 "state_action": [list(g) for g in ex.action.generators],
                 "labels": list(ex.labels),
                 "label_action": None if ex.label_action is None
                 else [list(g) for g in ex.label_action.generators]}, [args.input])
    return EXIT_FOUND


def cmd_berg(args):
    from .fixtures import berg_fixture
    from .matrix import berg_projection
    orbit, r, s = berg_fixture(args.n)
    res = berg_projection(orbit, args.n, r, s)
    _say("n", args.n)
    _say("r", r)
    _say("s", s)
    _say("window", orbit.length)
    for k, v in sorted(res.norms.items()):
        _say(k, f"{v:.6e}")
    _emit(args, {"version": 1, "kind": "berg", "n": args.n, "r": r, "s": s,
                 "norms": {k: float(v) for k, v in res.norms.items()}})
    return EXIT_FOUND


def cmd_selftest(args):
    from .acceptance import run_all
    results = run_all()
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    _emit(args, {"version": 1, "kind": "selftest",
                 "results": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
                             for r in results]})
    return EXIT_NONE if failed else EXIT_FOUND


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_FOUND
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        return HANDLERS[args.command](args)
    except (ResfinError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
