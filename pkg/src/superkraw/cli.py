"""Command-line front end.

    superkraw validate --params p.json
    superkraw gen-params --gen 2 2 7 --out p.json
    superkraw eval --gen 1 1 0 --degree 2 --format csv
    superkraw transition --params p.json --degree 3
    superkraw verify --suite all --gen 1 1 0 --degree 2
    superkraw fock --params p.json --odd-degree 1 --samples 1000 --seed 3

Exit status: 0 on success, 1 when a residual exceeds ``--tol``, 2 on bad
input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import glaction, krawtchouk, params, spherical
from .numkern import (
    DegeneracyError,
    DimensionError,
    Residual,
    enumerate_compositions,
    enumerate_subsets,
    max_abs,
)
from .superpoly import basis, bits_of

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

SUITES = (
    "orthogonality",
    "recurrence",
    "contravariance",
    "cartan-swap",
    "duality",
    "tform",
    "krzonal",
    "transition",
    "supercommutator",
)


class UsageError(Exception):
    pass


# --- json helpers -----------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return params._encode_scalar(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        x = float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, glaction.GeneratorId):
        return {"row": x.row, "col": x.col, "frame": x.frame}
    return x


def _monomial(mono):
    alpha, eps = mono
    return {"alpha": list(alpha), "eps": list(bits_of(eps))}


def _witness(w):
    """Render a witness tuple with bit sets shown as index lists."""
    if isinstance(w, tuple) and len(w) == 2 and isinstance(w[0], tuple) and isinstance(w[1], int):
        return _monomial(w)
    if isinstance(w, tuple):
        return [_witness(v) for v in w]
    return _jsonable(w)


# --- parameter acquisition ------------------------------------------------------


def _load_params(args) -> params.ParamSet:
    if args.params and args.gen:
        raise UsageError("give either --params or --gen, not both")
    if args.gen:
        m, n, seed = args.gen
        if m < 0 or n < 0:
            raise UsageError("--gen sizes must be non-negative")
        return params.random_paramset(m, n, seed)
    if args.params:
        try:
            return params.load(args.params)
        except OSError as exc:
            raise UsageError(f"cannot read {args.params}: {exc}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"ill-formed parameter file {args.params}: {exc}") from None
    raise UsageError("one of --params FILE or --gen m n seed is required")


def _degree(args):
    if args.degree is None:
        raise UsageError("--degree is required")
    if args.degree < 0:
        raise UsageError("--degree must be >= 0")
    return args.degree


def _odd_degrees(args, ps, D):
    top = min(D, ps.n + 1)
    if args.odd_degree is None:
        return list(range(top + 1))
    if not 0 <= args.odd_degree <= top:
        raise UsageError(f"--odd-degree must lie in 0..{top}")
    return [args.odd_degree]


# --- output -----------------------------------------------------------------------


def _emit(args, payload, rows=None, header=None):
    """Write the structured payload, or ``rows`` as CSV when ``--format csv``."""
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no CSV form")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _idx(v):
    return " ".join(str(i) for i in v)


# --- commands -------------------------------------------------------------------


def cmd_validate(args):
    ps = _load_params(args)
    report = params.validate(ps, args.tol)
    payload = {"ok": report.ok, "tol": args.tol, "residuals": report.residuals, "failures": report.failures()}
    rows = [[k, v, v <= args.tol] for k, v in report.residuals.items()]
    _emit(args, payload, rows, ["check", "residual", "pass"])
    if not report.ok:
        for k, v in report.failures().items():
            print(f"validate: {k} residual {v:.3e} > {args.tol:.1e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_gen_params(args):
    if not args.gen:
        raise UsageError("gen-params needs --gen m n seed")
    ps = _load_params(args)
    payload = params.to_dict(ps)
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _eval_rows(ps, D, ds, kind):
    for d in ds:
        if kind == "p1":
            subs = enumerate_subsets(ps.n + 1, d)
            M = krawtchouk.p1_matrix(ps.odd, d)
            for r, J in enumerate(subs):
                for c, I in enumerate(subs):
                    yield (), J, (), I, M[r, c]
            continue
        sub = basis(ps.m, ps.n, D, d)
        if kind == "p0":
            comps = enumerate_compositions(D - d, ps.m + 1)
            M = krawtchouk.p0_matrix(ps.even, D - d)
            for r, a in enumerate(comps):
                for c, at in enumerate(comps):
                    yield a, (), at, (), M[r, c]
            continue
        M = krawtchouk.p_matrix(ps, D, d)
        for r, (a, e) in enumerate(sub.monomials):
            for c, (at, et) in enumerate(sub.monomials):
                yield a, bits_of(e), at, bits_of(et), M[r, c]


def cmd_eval(args):
    ps = _load_params(args)
    D = _degree(args)
    kind = args.kind
    ds = _odd_degrees(args, ps, D)
    if kind == "p0":
        ds = ds[:1] if args.odd_degree is not None else [0]
    if kind == "p1" and args.odd_degree is None:
        ds = list(range(ps.n + 2))
    table = list(_eval_rows(ps, D, ds, kind))
    payload = {
        "kind": kind,
        "degree": D,
        "entries": [
            {"alpha": list(a), "eps": list(e), "alpha_tilde": list(at), "eps_tilde": list(et), "value": complex(v)}
            for a, e, at, et, v in table
        ],
    }
    rows = [[_idx(a), _idx(e), _idx(at), _idx(et), repr(float(v.real)), repr(float(v.imag))] for a, e, at, et, v in table]
    _emit(args, payload, rows, ["alpha", "eps", "alpha_tilde", "eps_tilde", "value_re", "value_im"])
    return EXIT_OK


def cmd_transition(args):
    ps = _load_params(args)
    D = _degree(args)
    fwd = krawtchouk.transition_matrix(krawtchouk.TILDE_TO_PLAIN, ps, D)
    back = krawtchouk.transition_matrix(krawtchouk.PLAIN_TO_TILDE, ps, D)
    eye = np.eye(len(fwd.basis))
    rt = max(max_abs(fwd.entries @ back.entries - eye), max_abs(back.entries @ fwd.entries - eye))
    payload = {
        "degree": D,
        "basis": [_monomial(mn) for mn in fwd.basis.monomials],
        "tilde_to_plain": fwd.entries,
        "plain_to_tilde": back.entries,
        "round_trip_residual": rt,
    }
    rows = []
    for name, M in (("tilde_to_plain", fwd.entries), ("plain_to_tilde", back.entries)):
        for r in range(M.shape[0]):
            for c in range(M.shape[1]):
                rows.append([name, r, c, repr(float(M[r, c].real)), repr(float(M[r, c].imag))])
    _emit(args, payload, rows, ["matrix", "row", "col", "value_re", "value_im"])
    print(f"round-trip residual {rt:.3e}", file=sys.stderr)
    return EXIT_OK if rt <= args.tol else EXIT_FAIL


# --- verification suites ----------------------------------------------------------


def _suite_orthogonality(ps, D, ds):
    return Residual.combine(krawtchouk.orthogonality_residual(ps, D, d) for d in ds)


def _suite_recurrence(ps, D, ds):
    rec = krawtchouk.recurrence_sweep(ps.odd)
    taut = krawtchouk.tautology_sweep(ps.odd)
    lemma = Residual(krawtchouk.sum_lemma_residual(ps.odd), "sum_lemma", 1)
    wedge = krawtchouk.wedge_sweep(ps.odd)["eigen"]
    return Residual.combine([rec, Residual(taut.value, ("tautology", taut.witness), taut.count), lemma, wedge])


def _suite_contravariance(ps, D, ds):
    return glaction.contravariance_sweep(ps, D)


def _suite_cartan(ps, D, ds):
    out = []
    for which in glaction.CARTAN_IDENTITIES:
        size = ps.n + 1 if which.endswith("odd") else ps.m + 1
        for i in range(size):
            out.append(Residual(glaction.cartan_swap_residual(i, which, ps, D), (which, i), 1))
    return Residual.combine(out)


def _suite_duality(ps, D, ds):
    return krawtchouk.duality_residual(ps, D)


def _suite_tform(ps, D, ds):
    cb = [glaction.cauchy_binet_odd_residual(ps, d) for d in range(ps.n + 2)]
    return Residual.combine([glaction.tform_residual(ps, D)] + cb)


def _suite_krzonal(ps, D, ds):
    res = [spherical.krzonal_sweep(ps.odd)]
    frame = spherical.build_g(ps.odd)
    N = frame.size
    res.append(Residual(frame.orthogonality_residual(), "g g^t - I", 1))
    res.append(Residual(frame.det_residual(), "det g - 1", 1))
    for d in range(N + 1):
        for J in enumerate_subsets(N, d):
            tot = spherical.occupation_probs(ps.odd, J, frame=frame).total()
            res.append(Residual(abs(tot - 1), ("probability_sum", J), 1))
        res.append(Residual(spherical.plucker_residual(frame.g, d), ("plucker", d), 1))
        res.append(Residual(spherical.sigma_independence_residual(frame.g, d), ("sigma_choice", d), 1))
    return Residual.combine(res)


def _suite_transition(ps, D, ds):
    r = krawtchouk.transition_residuals(ps, D)
    return Residual.combine(
        [Residual(r[k], k, 1) for k in ("round_trip", "vs_substitution", "off_block")]
    )


def _suite_supercommutator(ps, D, ds):
    return Residual.combine(
        [
            glaction.supercommutator_residual(ps, D),
            glaction.colorsign_residual(ps, D),
            glaction.phi_antiautomorphism_residual(ps, D),
        ]
    )


SUITE_FUNCS = {
    "orthogonality": _suite_orthogonality,
    "recurrence": _suite_recurrence,
    "contravariance": _suite_contravariance,
    "cartan-swap": _suite_cartan,
    "duality": _suite_duality,
    "tform": _suite_tform,
    "krzonal": _suite_krzonal,
    "transition": _suite_transition,
    "supercommutator": _suite_supercommutator,
}


def run_suite(name, ps, D, ds, tol):
    start = time.perf_counter()
    try:
        r = SUITE_FUNCS[name](ps, D, ds)
    except spherical.DomainError as exc:
        return {"suite": name, "status": "skipped", "reason": str(exc)}
    status = "pass" if r.value <= tol else "fail"
    out = {
        "suite": name,
        "status": status,
        "max_residual": r.value,
        "checks": r.count,
        "seconds": round(time.perf_counter() - start, 4),
    }
    if status == "fail" or r.witness is not None:
        out["witness"] = _witness(r.witness)
    return out


def cmd_verify(args):
    ps = _load_params(args)
    D = _degree(args)
    ds = _odd_degrees(args, ps, D)
    names = SUITES if args.suite == "all" else [args.suite]
    results = [run_suite(n, ps, D, ds, args.tol) for n in names]
    failed = [r for r in results if r["status"] == "fail"]
    payload = {"degree": D, "tol": args.tol, "ok": not failed, "suites": results}
    rows = [[r["suite"], r["status"], r.get("max_residual", ""), json.dumps(r.get("witness"))] for r in results]
    _emit(args, payload, rows, ["suite", "status", "max_residual", "witness"])
    for r in failed:
        print(
            f"verify: {r['suite']} residual {r['max_residual']:.3e} > {args.tol:.1e} at {json.dumps(r['witness'])}",
            file=sys.stderr,
        )
    return EXIT_FAIL if failed else EXIT_OK


def cmd_fock(args):
    ps = _load_params(args)
    if args.odd_degree is None:
        raise UsageError("fock needs --odd-degree d")
    N = ps.n + 1
    d = args.odd_degree
    if not 0 <= d <= N:
        raise UsageError(f"--odd-degree must lie in 0..{N}")
    try:
        frame = spherical.build_g(ps.odd)
    except spherical.DomainError as exc:
        raise UsageError(f"fock needs real positive odd parameters: {exc}") from None
    seed = 0 if args.seed is None else args.seed
    table, rows = [], []
    worst = 0.0
    for J in enumerate_subsets(N, d):
        dist = spherical.occupation_probs(ps.odd, J, frame=frame, seed=seed)
        worst = max(worst, abs(dist.total() - 1))
        entry = {"J": list(J), "probs": [{"I": list(I), "p": p} for I, p in dist.probs.items()]}
        freq = None
        if args.samples:
            freq, _ = spherical.sample_occupation(dist, args.samples)
            entry["frequencies"] = [{"I": list(I), "f": f} for I, f in freq.items()]
        table.append(entry)
        for I, p in dist.probs.items():
            rows.append([_idx(J), _idx(I), repr(p), "" if freq is None else repr(freq[I])])
    payload = {"odd_degree": d, "seed": seed, "samples": args.samples or 0, "g": frame.g, "table": table}
    _emit(args, payload, rows, ["J", "I", "probability", "frequency"])
    return EXIT_OK if worst <= args.tol else EXIT_FAIL


COMMANDS = {
    "validate": cmd_validate,
    "gen-params": cmd_gen_params,
    "eval": cmd_eval,
    "transition": cmd_transition,
    "verify": cmd_verify,
    "fock": cmd_fock,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("parameters")
    src.add_argument("--params", metavar="FILE", help="parameter file (JSON)")
    src.add_argument("--gen", nargs=3, type=int, metavar=("M", "N", "SEED"), help="random admissible parameters")
    common.add_argument("--degree", "-D", type=int, help="total degree D")
    common.add_argument("--odd-degree", "-d", type=int, help="odd degree d (default: all)")
    common.add_argument("--tol", type=float, default=1e-9, help="residual tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, help="sampler seed")
    common.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="superkraw", description="Multivariate super Krawtchouk polynomials.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check admissibility of a parameter set")
    sub.add_parser("gen-params", parents=[common], help="write a random admissible parameter set")
    ev = sub.add_parser("eval", parents=[common], help="tabulate polynomial values")
    ev.add_argument("--kind", choices=("p", "p0", "p1"), default="p")
    sub.add_parser("transition", parents=[common], help="both transition matrices on degree D")
    vf = sub.add_parser("verify", parents=[common], help="run identity suites")
    vf.add_argument("--suite", choices=SUITES + ("all",), default="all")
    fk = sub.add_parser("fock", parents=[common], help="occupation probabilities and sampling")
    fk.add_argument("--samples", type=int, default=0, help="draw this many samples per source state")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.tol <= 0:
        print("superkraw: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"superkraw: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimensionError, DegeneracyError) as exc:
        print(f"superkraw: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
