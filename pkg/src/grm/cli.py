"""Command-line front end: ``grm <command> ...``.

Single reports are printed as one line of JSON, sweeps as CSV.  Exit codes:
0 on success, 2 when an enumeration budget is exceeded, 3 for invalid
parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import corrector, grassmann, oracle
from .affine import ZoomSpec, zoom_contains
from .errors import BudgetExceeded, GRMError, InvalidParameters
from .generic import build_generic, run_generic_batch
from .gf import FieldSpec, parse_field
from .io import format_table, parse_generic_spec, parse_table
from .stats import chunk_rng, wilson
from .tester import build_spec, derive_params, estimate_rejection, flat_tester_queries

EXIT_BUDGET = 2
EXIT_INVALID = 3

# Parameter sets used by ``grm report --all`` and the query-accounting checks.
BUILTIN_PARAMS = [
    ("2", 1, None), ("2", 3, None), ("3", 4, None), ("3", 6, None),
    ("2^2", 3, None), ("2^2", 4, None), ("2^2", 7, None), ("2^2", 11, None),
    ("2^3", 7, None), ("2^3", 8, None), ("2^3", 20, None),
    ("3^2", 17, None), ("3^2", 18, None),
    ("5", 9, None),
]


# ----------------------------------------------------------------------
# command implementations (return plain data; main() prints)
# ----------------------------------------------------------------------


def _spec_for(fs: FieldSpec, d: int, t=None, n=None):
    return build_spec(derive_params(fs.q, fs.p, d, t, n), fs)


def cmd_spec(fs: FieldSpec, d: int, t=None) -> dict:
    spec = _spec_for(fs, d, t)
    pr = spec.params
    return {
        "field": fs.name, "q": fs.q, "d": d, "s": pr.s, "r": pr.r, "t": pr.t,
        "supp_P": int(spec.supp_P.shape[0]),
        "supp_P_bound": (2 ** (fs.p - 1) + fs.p - 1) * fs.q ** (fs.p - 1),
        "supp_H": spec.supp_H_size,
        "valid_exponents": int(spec.valid_exps.shape[0]),
        "lemma_bound": spec.lemma_bound(),
        "headline_bound": spec.headline_bound(),
    }


def cmd_report(fs: FieldSpec, d: int, t=None) -> dict:
    """Query accounting for one parameter set."""
    out = cmd_spec(fs, d, t)
    full = fs.q ** (out["s"] + out["t"])
    out.update({
        "full_flat_points": full,
        "sparse_ratio": out["supp_H"] / full,
        "flat_tester_queries": flat_tester_queries(fs.q, fs.p, d),
        # headline form (3q)^{ceil((d+1)/(q-1)) + O(1)} with the O(1) term set to 2
        "theorem_form": (3 * fs.q) ** (math.ceil((d + 1) / (fs.q - 1)) + 2),
    })
    return out


def perturb(f, count: int, rng):
    """Change ``count`` uniformly chosen positions to uniformly chosen wrong values."""
    fs = f.fs
    g = f.copy()
    pos = rng.choice(g.values.size, size=count, replace=False)
    shift = rng.integers(1, fs.q, count)
    g.values[pos] = fs.add[g.values[pos], shift]
    return g, pos


def cmd_sweep(fs: FieldSpec, d: int, n: int, t=None, deltas=None, trials: int = 2000,
              seed: int = 0, threads: int = 1, budget: int = oracle.DEFAULT_BUDGET) -> dict:
    """Rejection rate against the fraction of corrupted points.

    Each level perturbs the same random codeword at ``ceil(delta q^n)``
    positions.  ``c_fit`` is the smallest ``rate / min(1, Q delta)`` over the
    nonzero levels, with ``Q = |supp_H|``.
    """
    spec = _spec_for(fs, d, t, n)
    N = fs.q**n
    if deltas is None:
        deltas = [k / N for k in (0, 1, 2, 4, 8, 16)]
    base = oracle.random_codeword(fs, n, d, seed)
    Q = spec.supp_H_size
    records = []
    for i, delta in enumerate(deltas):
        rng = chunk_rng(seed, i, stream=51)
        count = math.ceil(delta * N - 1e-9)
        f, _ = perturb(base, count, rng)
        try:
            actual = float(oracle.distance_to_code(f, d, budget).delta)
            source = "oracle"
        except BudgetExceeded:
            actual = count / N
            source = "planted"
        est = estimate_rejection(f, spec, trials, seed=seed + i, threads=threads)
        records.append({
            "delta_target": delta, "delta_actual": actual, "delta_source": source,
            "errors": count, "rejection_rate": est.rate, "ci": est.ci,
            "queries": Q, "trials": trials, "seed": seed,
        })
    ratios = [r["rejection_rate"] / min(1.0, Q * r["delta_actual"])
              for r in records if r["delta_actual"] > 0]
    return {"records": records, "c_fit": min(ratios) if ratios else float("nan")}


def sweep_csv(result: dict) -> str:
    buf = io.StringIO()
    cols = ["delta_target", "delta_actual", "delta_source", "errors", "rejection_rate",
            "ci", "queries", "trials", "seed"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in result["records"]:
        w.writerow(r)
    buf.write(f"# c_fit={result['c_fit']}\n")
    return buf.getvalue()


def cmd_test(fs, d, f, t=None, trials=1000, seed=0, threads=1) -> dict:
    spec = _spec_for(fs, d, t, f.m)
    est = estimate_rejection(f, spec, trials, seed=seed, threads=threads, count_queries=True)
    out = est.as_dict()
    out.update({"seed": seed, "supp_H": spec.supp_H_size})
    return out


def cmd_generic_test(gspec_src, f, trials=1000, seed=0) -> dict:
    gspec = build_generic(parse_generic_spec(gspec_src))
    if gspec.fs.q != f.fs.q:
        raise InvalidParameters("spec and function live over different fields")
    rejects, wit = 0, {}
    rng = chunk_rng(seed, 0, stream=61)
    left = trials
    while left:
        B = min(left, 128)
        M = rng.integers(0, gspec.fs.q, (B, f.m, gspec.arity))
        c = rng.integers(0, gspec.fs.q, (B, f.m))
        rej, wi, _ = run_generic_batch(f, gspec, M, c)
        rejects += int(rej.sum())
        for i in wi[rej]:
            key = " ".join(map(str, gspec.valid_exps[i].tolist()))
            wit[key] = wit.get(key, 0) + 1
        left -= B
    _, _, half = wilson(rejects, trials)
    return {"rate": rejects / trials, "ci": half, "queries": gspec.supp_H_size,
            "witnesses": dict(sorted(wit.items())), "trials": trials, "seed": seed}


def cmd_graph(args, fs) -> dict:
    kind = args.kind
    if kind == "phi":
        return grassmann.phi_checks(fs, args.n, args.ell, args.budget)
    if kind == "expansion":
        z = ZoomSpec(args.zoom, _vec(args.a), _vec(args.b), args.beta)
        S = grassmann.VertexSet(fs, args.n, args.ell, predicate=lambda T: zoom_contains(z, T))
        return grassmann.edge_expansion(S, budget=args.budget).as_dict()
    f = parse_table(Path(args.fn), fs)
    spec = _spec_for(fs, args.d, args.t, f.m)
    if kind == "shadow":
        out = grassmann.shadow_check(f, spec, trials=args.trials, seed=args.seed, mode=args.mode)
        # persistence samples from S_t, which is empty (or too thin) when nothing rejects
        probe = estimate_rejection(f, spec, args.trials, seed=args.seed)
        out["persistence"] = (grassmann.persistence(f, spec, args.trials, args.seed)
                              if probe.rejects else None)
        return out
    if kind == "zoom":
        a, b = np.array(_vec(args.a)), np.array(_vec(args.b))
        rate = grassmann.zoom_in_density_batch(f, spec, a, b, args.trials, chunk_rng(args.seed, 0, 71))
        overall = estimate_rejection(f, spec, args.trials, seed=args.seed).rate
        return {"zoom_in_density": rate, "mu_S": overall, "a": list(a), "b": list(b)}
    raise InvalidParameters(f"unknown graph command {kind!r}")


def _vec(text):
    if text is None:
        raise InvalidParameters("missing vector argument")
    return tuple(int(v) for v in text.replace(",", " ").split())


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="2^2", help="field as p^k (default 2^2)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)

    p = argparse.ArgumentParser(prog="grm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("test", parents=[common], help="estimate the rejection rate of a function")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--t", type=int)
    s.add_argument("--fn", required=True)
    s.add_argument("--trials", type=int, default=1000)

    for name in ("spec", "report"):
        s = sub.add_parser(name, parents=[common], help=f"{name} for one parameter set")
        s.add_argument("--d", type=int)
        s.add_argument("--t", type=int)
        if name == "report":
            s.add_argument("--all", action="store_true", help="every built-in parameter set")

    s = sub.add_parser("sweep", parents=[common], help="rejection rate versus distance (CSV)")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=int)
    s.add_argument("--deltas", help="comma separated counts of corrupted points")
    s.add_argument("--trials", type=int, default=2000)

    s = sub.add_parser("graph", parents=[common], help="graph analytics")
    s.add_argument("kind", choices=["expansion", "shadow", "zoom", "phi"])
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--ell", type=int, default=1)
    s.add_argument("--zoom", default="zoom_in", choices=["zoom_in", "zoom_out", "zoom_in_lin", "zoom_out_lin"])
    s.add_argument("--a")
    s.add_argument("--b")
    s.add_argument("--beta", type=int, default=0)
    s.add_argument("--fn")
    s.add_argument("--d", type=int)
    s.add_argument("--t", type=int)
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--mode", default="flat", choices=["flat", "affine"])

    s = sub.add_parser("oracle", parents=[common], help="exact degree or distance")
    s.add_argument("kind", choices=["degree", "distance"])
    s.add_argument("--fn", required=True)
    s.add_argument("--d", type=int)

    s = sub.add_parser("decode", parents=[common], help="iterative local correction")
    s.add_argument("--fn", required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--t", type=int)
    s.add_argument("--max-steps", type=int, default=10)
    s.add_argument("--trials", type=int, default=400)
    s.add_argument("--out", help="write the corrected table here")

    s = sub.add_parser("generic", parents=[common], help="product-form tester")
    s.add_argument("kind", choices=["test"])
    s.add_argument("--spec", required=True)
    s.add_argument("--fn", required=True)
    s.add_argument("--trials", type=int, default=1000)
    return p


def _run(args) -> str:
    fs = parse_field(args.field)
    cmd = args.command
    if cmd == "spec":
        return json.dumps(cmd_spec(fs, _need(args.d, "--d"), args.t))
    if cmd == "report":
        if args.all:
            rows = [cmd_report(parse_field(f), d, t) for f, d, t in BUILTIN_PARAMS]
            return "\n".join(json.dumps(r) for r in rows)
        return json.dumps(cmd_report(fs, _need(args.d, "--d"), args.t))
    if cmd == "sweep":
        N = fs.q**args.n
        deltas = None
        if args.deltas:
            deltas = [int(k) / N for k in args.deltas.split(",")]
        return sweep_csv(cmd_sweep(fs, args.d, args.n, args.t, deltas, args.trials,
                                   args.seed, args.threads, args.budget)).rstrip("\n")
    if cmd == "test":
        f = parse_table(Path(args.fn), fs)
        if args.n is not None and args.n != f.m:
            raise InvalidParameters(f"--n {args.n} does not match the table arity {f.m}")
        return json.dumps(cmd_test(fs, args.d, f, args.t, args.trials, args.seed, args.threads))
    if cmd == "graph":
        return json.dumps(_finite(cmd_graph(args, fs)), default=_jsonable)
    if cmd == "oracle":
        f = parse_table(Path(args.fn), fs)
        if args.kind == "degree":
            return json.dumps({"degree": oracle.exact_degree(f)})
        res = oracle.distance_to_code(f, _need(args.d, "--d"), args.budget)
        return json.dumps({"delta": float(res.delta), "delta_exact": str(res.delta),
                           "errors": res.errors, "ties": res.ties,
                           "nearest": res.nearest.values.tolist()})
    if cmd == "decode":
        f = parse_table(Path(args.fn), fs)
        spec = _spec_for(fs, args.d, args.t, f.m)
        tr = corrector.decode(f, spec, args.max_steps, args.trials, args.seed)
        if args.out and tr.decoded is not None:
            with open(args.out, "w") as fh:
                fh.write(format_table(tr.decoded))
        return json.dumps(tr.as_dict(), default=_jsonable)
    if cmd == "generic":
        f = parse_table(Path(args.fn), fs)
        with open(args.spec) as fh:
            src = fh.read()
        return json.dumps(cmd_generic_test(src, f, args.trials, args.seed))
    raise InvalidParameters(f"unknown command {cmd!r}")


def _need(v, flag):
    if v is None:
        raise InvalidParameters(f"{flag} is required")
    return v


def _finite(o):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, float) and not math.isfinite(o):
        return None
    return o


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = _run(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidParameters, GRMError, ValueError, OSError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
