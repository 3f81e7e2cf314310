"""Command-line entry point: ``f2sketch <subcommand> ...``.

Exit codes: 0 success, 1 a named check ran and failed, 2 validation error
(bad arguments, malformed files, an automaton that is not path independent),
3 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import FORMAT_VERSIONS, __version__
from .boolfn import BoolFun, builtin, wht
from .checks import CHECKS, run_check
from .commsim import (
    best_one_bit_error,
    exact_error,
    make_distribution,
    message_bound_check,
    protocol_from_json,
)
from .errors import CapExceededError, ValidationError, set_caps
from .fourierdim import bound_report, dim_profile, exact_dim, max_subspace_weight
from .gf2 import bits_to_str
from .rng import random_bits
from .sketch import (
    LtfSpec,
    deterministic_sketch,
    eval_sketch_error,
    ltf_preprocess,
    ltf_sketch,
    paired_monte_carlo,
    random_parity_sketch,
    scheme_from_json,
    sign_trick_sketch,
)
from .streamsim import (
    automaton_from_json,
    check_path_independence,
    coset_check,
    gen_stream,
    kernel,
    read_stream,
    run,
    space_lb_report,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(2)


# rendering -------------------------------------------------------------------


def _plain(obj):
    """Make ``obj`` JSON-ready: Fractions become "p/q" strings, numpy scalars become Python ones."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _text(obj, indent=0) -> list[str]:
    pad = "  " * indent
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and any(isinstance(x, (dict, list)) for x in (v.values() if isinstance(v, dict) else v)):
                out.append(f"{pad}{k}:")
                out.extend(_text(v, indent + 1))
            elif isinstance(v, dict):
                out.append(f"{pad}{k}: " + ", ".join(f"{a}={b}" for a, b in v.items()))
            elif isinstance(v, list):
                out.append(f"{pad}{k}: " + " ".join(str(x) for x in v))
            else:
                out.append(f"{pad}{k}: {v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, list) and not any(isinstance(x, (dict, list)) for x in v):
                out.append(f"{pad}- [{', '.join(str(x) for x in v)}]")
            elif isinstance(v, (dict, list)):
                sub = _text(v, indent + 1)
                out.append(f"{pad}- " + sub[0].lstrip() if sub else f"{pad}-")
                out.extend(sub[1:])
            else:
                out.append(f"{pad}- {v}")
    else:
        out.append(f"{pad}{obj}")
    return out


def _emit(args, report, text=None):
    report = _plain(report)
    if args.json:
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    elif text is not None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write("\n".join(_text(report)) + "\n")


def _write_or_print(args, payload: str, report):
    """File-format outputs go to --out when given, else to stdout."""
    if args.out:
        Path(args.out).write_text(payload)
        _emit(args, report)
    else:
        sys.stdout.write(payload if payload.endswith("\n") else payload + "\n")


def _read(path) -> str:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"no such file: {path}")
    return p.read_text()


def _read_json(path):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: bad JSON: {e.msg}", line=e.lineno) from None


def _fraction(s) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational number: {s!r}") from None


def _ltf_spec(spec: str) -> LtfSpec | None:
    """LTF view of a function spec: hamge:n:k or an LTF weight file; None otherwise."""
    if spec.startswith("hamge:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValidationError("hamge takes hamge:n:k")
        try:
            n, k = int(parts[1]), int(parts[2])
        except ValueError:
            raise ValidationError(f"bad integers in {spec!r}") from None
        if not 1 <= k <= n:
            raise ValidationError("hamge needs 1 <= k <= n")
        return LtfSpec.hamge(n, k)
    path = spec[4:] if spec.startswith("ltf:") else spec
    p = Path(path)
    if p.is_file():
        text = p.read_text()
        if spec.startswith("ltf:") or text.lstrip().startswith("theta="):
            return LtfSpec.from_text(text)
    return None


def _truth(spec: str, n: int):
    """Ground truth for evaluation: a BoolFun when the arity allows, otherwise an LtfSpec."""
    if n > 26:
        lt = _ltf_spec(spec)
        if lt is None:
            raise ValidationError(f"{spec!r} is not an LTF; arity {n} needs an LTF spec")
        return lt
    return builtin(spec)


# subcommands -----------------------------------------------------------------


def cmd_spectrum(args):
    f = builtin(args.fn)
    s = wht(f)
    supp = s.support()
    if args.top:
        order = sorted(supp.tolist(), key=lambda a: (-abs(int(s[a])), a))[: args.top]
    else:
        order = supp.tolist()
    coeffs = {bits_to_str(int(a), f.n): s.coefficient(int(a)) for a in order}
    report = {"fn": f.name, "n": f.n, "support_size": int(len(supp)), "coefficients": coeffs}
    lines = [f"{a}  {c}" for a, c in _plain(coeffs).items()]
    _emit(args, report, "\n".join(lines) if lines else "(empty)")


def cmd_dim(args):
    f = builtin(args.fn)
    d, span = exact_dim(f)
    report = {"fn": f.name, "n": f.n, "dim": d, "basis": [bits_to_str(b, f.n) for b in span.basis]}
    if args.d is not None:
        w, A = max_subspace_weight(f, args.d, workers=args.workers)
        report["w_d"] = {"d": args.d, "weight": w, "witness": [bits_to_str(b, f.n) for b in A.basis]}
        _emit(args, report)
    else:
        _emit(args, report, str(d))


def cmd_profile(args):
    f = builtin(args.fn)
    prof = dim_profile(f, workers=args.workers, dmax=args.dmax)
    rep = bound_report(f, prof)
    report = {"profile": prof.to_dict(), "bounds": rep}
    if args.json:
        _emit(args, report)
        return
    lines = [f"fn {f.name}  n={f.n}", "d  w_d  gap  best_sketch<=  any_sketch>=  oneway_floor"]
    for row in rep["per_d"]:
        b = row["bounds"]
        lines.append(
            f"{row['d']}  {row['w_d']}  {row['gap']}  {b['sketch_error_max']}  {b['sketch_error_min']:.6f}  {b['oneway_error_floor'] if b['oneway_error_floor'] is not None else '-'}"
        )
    gc = rep["corollaries"]["gap_choice"]
    lines.append("gap choice: " + ", ".join(f"{k}={v}" for k, v in gc.items()))
    _emit(args, report, "\n".join(lines))


def cmd_sketch_build(args):
    seed = args.seed
    if args.kind == "ltf":
        lt = _ltf_spec(args.fn)
        if lt is None:
            raise ValidationError("--kind ltf needs hamge:n:k or an LTF weight file")
        delta = _fraction(args.delta or "1/10")
        scheme = ltf_sketch(ltf_preprocess(lt), delta, seed)
        extra = {}
    else:
        f = builtin(args.fn)
        extra = {}
        if args.kind == "det":
            scheme = deterministic_sketch(f)
        elif args.kind == "sign":
            if args.d is None:
                raise ValidationError("--kind sign needs --d")
            w, A = max_subspace_weight(f, args.d, workers=args.workers)
            scheme, err = sign_trick_sketch(f, A)
            extra = {"uniform_error": err, "w_d": w}
        else:
            delta = _fraction(args.delta or "1/10")
            scheme = random_parity_sketch(f, delta, seed, args.decoder)
    obj = scheme.to_json()
    payload = json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"
    _write_or_print(args, payload, {"kind": scheme.kind, "n": scheme.n, "k": scheme.k, "out": args.out, **extra})


def cmd_sketch_eval(args):
    obj = _read_json(args.scheme)
    n = int(obj.get("n", 0)) if isinstance(obj, dict) else 0
    truth = _truth(args.fn, n)
    scheme = scheme_from_json(obj, truth if isinstance(truth, BoolFun) else None)
    if truth.n != scheme.n:
        raise ValidationError(f"function arity {truth.n} differs from scheme arity {scheme.n}")
    mode = args.mode
    if mode == "exact":
        res = eval_sketch_error(scheme, truth, "exact")
    elif mode.startswith("monte:"):
        try:
            trials = int(mode[6:])
        except ValueError:
            raise ValidationError(f"bad mode {mode!r}") from None
        if trials <= 0:
            raise ValidationError("trial count must be positive")
        if scheme.n <= 20:
            res = eval_sketch_error(scheme, truth, "monte", trials=trials, seed=args.seed)
        else:
            res = _monte_large(scheme, truth, trials, args)
    else:
        raise ValidationError(f"bad mode {mode!r}; use exact or monte:N")
    _emit(args, {"scheme": scheme.kind, "n": scheme.n, "k": scheme.k, "mode": mode, **res})


def _monte_large(scheme, truth, trials, args):
    """Paired (instance, x) sampling for arities too large to sweep every input."""
    n = scheme.n
    if args.weights:
        try:
            ws = [int(w) for w in args.weights.split(",")]
        except ValueError:
            raise ValidationError("--weights takes comma-separated integers") from None
        if any(not 0 <= w <= n for w in ws):
            raise ValidationError(f"weights must lie in [0, {n}]")

        def sampler(rng):
            w = ws[int(rng.integers(0, len(ws)))]
            v = 0
            for i in rng.choice(n, w, replace=False):
                v |= 1 << int(i)
            return v

    else:

        def sampler(rng):
            return random_bits(rng, n)

    if isinstance(truth, LtfSpec):
        truth_fn = truth.evaluate_many
    else:
        truth_fn = lambda xs: truth.table[xs.astype(np.int64)]  # noqa: E731
    mc = paired_monte_carlo(scheme, truth_fn, sampler, trials, args.seed)
    return {"paired_error": mc["rate"], "paired_error_ci": list(mc["ci"]), "errors": mc["errors"], "trials": trials}


def cmd_comm_onebit(args):
    f = builtin(args.fn)
    mu = make_distribution(args.dist, f)
    err, M = best_one_bit_error(f, mu)
    report = {
        "fn": f.name,
        "n": f.n,
        "dist": mu.kind,
        "z": bits_to_str(mu.z, f.n) if mu.kind == "sec7" else None,
        "min_error": err,
        "witness_message": format(M, f"0{max(1, (1 << f.n) // 4)}x"),
    }
    if args.bound:
        report["correlation_bound"] = message_bound_check(f, mu)
    _emit(args, report)


def cmd_comm_eval(args):
    f = builtin(args.fn)
    p = protocol_from_json(_read_json(args.protocol))
    if p.n != f.n:
        raise ValidationError(f"protocol arity {p.n} differs from function arity {f.n}")
    mu = make_distribution(args.dist, f)
    err = exact_error(p, f, mu)
    _emit(args, {"fn": f.name, "n": f.n, "c": p.c, "dist": mu.kind, "optimal_bob": p.optimal, "error": err})


def cmd_stream_gen(args):
    if args.n is None or args.n < 1:
        raise ValidationError("--n must be a positive integer")
    s, split = gen_stream(args.model, args.n, args.seed, args.length)
    if args.json:
        _emit(args, {"n": s.n, "model": args.model, "split": split, "updates": s.updates})
    else:
        _write_or_print(args, s.to_text(), {"n": s.n, "model": args.model, "split": split, "length": len(s.updates)})


def cmd_stream_run(args):
    obj = _read_json(args.algo)
    s = read_stream(_read(args.stream))
    if isinstance(obj, dict) and "delta" in obj and "output" in obj:
        algo = automaton_from_json(obj)
    else:
        n = int(obj.get("n", 0)) if isinstance(obj, dict) else 0
        fn = None
        if args.fn:
            t = _truth(args.fn, n)
            fn = t if isinstance(t, BoolFun) else None
        algo = scheme_from_json(obj, fn)
    res = run(algo, s, args.sample)
    _emit(args, {"n": s.n, "length": len(s.updates), **res})


def cmd_stream_kernel(args):
    a = automaton_from_json(_read_json(args.automaton))
    w = check_path_independence(a)
    if w is not None:
        _emit(args, {"path_independent": False, "witness": [list(w[0]), list(w[1])]})
        return 2
    K = kernel(a)
    ok, cw = coset_check(a)
    _emit(
        args,
        {
            "path_independent": True,
            "kernel_dim": K.dim,
            "kernel_basis": [bits_to_str(b, a.n) for b in K.basis],
            "coset_check": ok,
            "coset_witness": cw,
            "reachable_states": len(a.reachable()),
        },
    )
    return 0 if ok else 1


def cmd_stream_lb(args):
    _emit(args, space_lb_report(builtin(args.fn), args.workers))


def _coerce(v: str):
    for conv in (int, _fraction):
        try:
            return conv(v)
        except (ValueError, ValidationError):
            pass
    return v


def cmd_check(args):
    kw = {}
    for item in args.param or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValidationError(f"--param takes key=value, got {item!r}")
        kw[key.replace("-", "_")] = _coerce(val)
    if args.k is not None:
        kw["k"] = args.k
    try:
        res = run_check(args.id, **kw)
    except TypeError as e:
        raise ValidationError(f"bad parameter for {args.id}: {e}") from None
    report = {"check": res.name, "passed": res.passed, "details": res.details}
    _emit(args, report, res.line())
    return 0 if res.passed else 1


# parser ----------------------------------------------------------------------


def _global_flags(sub: bool) -> argparse.ArgumentParser:
    """Global flags; subparsers accept them too without clobbering earlier values."""
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: argparse.SUPPRESS) if sub else (lambda v: v)
    p.add_argument("--json", action="store_true", default=d(False), help="JSON report on stdout")
    p.add_argument("--seed", type=int, default=d(0), help="master seed (default 0)")
    p.add_argument("--caps", action="append", default=d([]), metavar="NAME=VAL[,...]", help="override size caps")
    p.add_argument("--workers", type=int, default=d(1), help="worker processes for subspace searches")
    return p


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="f2sketch", description=__doc__.splitlines()[0], parents=[_global_flags(False)])
    top.add_argument("--version", action="store_true", help="print package and file-format versions")
    g = _global_flags(True)
    subs = top.add_subparsers(dest="cmd", parser_class=_Parser)

    p = subs.add_parser("spectrum", parents=[g], help="Fourier coefficients")
    p.add_argument("--fn", required=True)
    p.add_argument("--top", type=int, default=0, help="only the N largest coefficients")
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("dim", parents=[g], help="exact Fourier dimension")
    p.add_argument("--fn", required=True)
    p.add_argument("--d", type=int, help="also report the best d-dimensional subspace weight")
    p.set_defaults(func=cmd_dim)

    p = subs.add_parser("profile", parents=[g], help="w_d for every d and the derived sketch bounds")
    p.add_argument("--fn", required=True)
    p.add_argument("--dmax", type=int)
    p.set_defaults(func=cmd_profile)

    sk = subs.add_parser("sketch", help="build and evaluate sketches").add_subparsers(dest="sub", parser_class=_Parser)
    p = sk.add_parser("build", parents=[g])
    p.add_argument("--kind", required=True, choices=["det", "sign", "parity", "ltf"])
    p.add_argument("--fn", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--delta")
    p.add_argument("--decoder", choices=["equality", "ml"], default="equality")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sketch_build)
    p = sk.add_parser("eval", parents=[g])
    p.add_argument("--scheme", required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--mode", default="exact", help="exact or monte:N")
    p.add_argument("--weights", help="Hamming weights of sampled inputs when n > 20 (e.g. 3,4,5)")
    p.set_defaults(func=cmd_sketch_eval)

    cm = subs.add_parser("comm", help="one-way protocols").add_subparsers(dest="sub", parser_class=_Parser)
    p = cm.add_parser("onebit", parents=[g])
    p.add_argument("--fn", required=True)
    p.add_argument("--dist", choices=["sec7", "uniform"], default="uniform")
    p.add_argument("--bound", action="store_true", help="also check the message-correlation bound")
    p.set_defaults(func=cmd_comm_onebit)
    p = cm.add_parser("eval", parents=[g])
    p.add_argument("--protocol", required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--dist", choices=["sec7", "uniform"], default="uniform")
    p.set_defaults(func=cmd_comm_eval)

    st = subs.add_parser("stream", help="streams and stream automata").add_subparsers(dest="sub", parser_class=_Parser)
    p = st.add_parser("gen", parents=[g])
    p.add_argument("--model", type=int, choices=[1, 2], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--length", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stream_gen)
    p = st.add_parser("run", parents=[g])
    p.add_argument("--algo", required=True, help="scheme or automaton JSON")
    p.add_argument("--stream", required=True)
    p.add_argument("--fn", help="function spec for regenerating a random scheme")
    p.add_argument("--sample", type=int, default=0, help="instance index of a random scheme")
    p.set_defaults(func=cmd_stream_run)
    p = st.add_parser("kernel", parents=[g])
    p.add_argument("--automaton", required=True)
    p.set_defaults(func=cmd_stream_kernel)
    p = st.add_parser("lb", parents=[g], help="space lower bound report")
    p.add_argument("--fn", required=True)
    p.set_defaults(func=cmd_stream_lb)

    p = subs.add_parser("check", parents=[g], help="run a named acceptance check")
    p.add_argument("id", choices=list(CHECKS))
    p.add_argument("--k", type=int, help="recursion depth for recmaj-4d-over-n")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra keyword for the check")
    p.set_defaults(func=cmd_check)
    return top


def _apply_caps(items):
    kw = {}
    for item in items:
        for part in item.split(","):
            key, sep, val = part.partition("=")
            if not sep:
                raise ValidationError(f"--caps takes name=value, got {part!r}")
            try:
                kw[key.strip()] = int(val)
            except ValueError:
                raise ValidationError(f"cap {key!r} needs an integer") from None
    set_caps(**kw)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.version:
        print(json.dumps({"f2sketch": __version__, "formats": FORMAT_VERSIONS}, indent=2, sort_keys=True))
        return 0
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        print("error: missing subcommand", file=sys.stderr)
        return 2
    for attr in ("out",):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    try:
        _apply_caps(args.caps)
        if args.workers < 1:
            raise ValidationError("--workers must be positive")
        code = args.func(args)
    except CapExceededError as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return 3
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
