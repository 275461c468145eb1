"""Command-line front end: JSON reports for the bgpa modules.

Exit codes: 0 success, 1 I/O or parse error, 2 domain validation failure,
3 inconclusive because of truncation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

SCHEMA = 1
APPROX_TOL = 1e-9

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def _limit_threads():
    n = os.environ.get("PA_FORGE_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


class DomainFailure(Exception):
    def __init__(self, kind: str, message: str, details=None):
        super().__init__(message)
        self.kind = kind
        self.details = details


# --- numeric tagging -----------------------------------------------------------------------

def num(x, tol: float | None = None):
    """Tag a number as exact or approx(tol)."""
    from .scalars import QScalar, format_qscalar, is_exact, to_float
    if is_exact(x):
        text = format_qscalar(x) if isinstance(x, QScalar) else str(x)
        return {"value": text, "float": float(f"{to_float(x):.12g}"), "tag": "exact"}
    if x is None:
        return None
    return {"value": float(f"{to_float(x):.12g}"), "tag": f"approx({tol or APPROX_TOL:g})"}


def _jsonable(obj):
    """Recursively convert numpy scalars and tuples for json."""
    import numpy as np
    if isinstance(obj, dict):
        if "tag" in obj:
            return obj  # already tagged by num()
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return num(float(obj))
    return obj


# --- inputs --------------------------------------------------------------------------------

def add_input_flags(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="graph JSON file")
    src.add_argument("--builder", choices=["diagonal", "bh", "tree", "multi_edge"])
    p.add_argument("--group", default="Z2", help="group for the diagonal builder (Z<n> or S<n>)")
    p.add_argument("--rplus", type=int, default=3)
    p.add_argument("--rminus", type=int, default=3)
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--edges", type=int, default=2, help="edge count for multi_edge")
    p.add_argument("--with-group", action="store_true", help="attach S_n to multi_edge")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["exact", "approx"], default="exact")


def load_input(args):
    from . import builders
    if args.input:
        return builders.from_file(args.input)
    if args.builder == "diagonal":
        return builders.diagonal(args.group)
    if args.builder == "bh":
        return builders.bh_s3()
    if args.builder == "tree":
        return builders.biregular_tree(args.rplus, args.rminus, args.radius)
    return builders.multi_edge(args.edges, args.with_group)


def describe(built, args) -> dict:
    g = built.graph
    out = {"kind": built.info.get("kind"), "vertices": len(g.vertices), "edges": len(g.edges),
           "delta": num(g.delta), "truncated": g.is_truncated}
    for key in ("group", "r_plus", "r_minus", "radius", "n", "path"):
        if key in built.info:
            out[key] = built.info[key]
    return out


# --- commands ------------------------------------------------------------------------------

def cmd_validate(built, args) -> dict:
    from .graph import validate_weight
    rep = validate_weight(built.graph)
    g = built.graph
    mu_pairs = all(g.mu_oe(2 * i) * g.mu_oe(2 * i + 1) == 1 for i in range(len(g.edges)))
    out = {"ok": rep.ok, "delta": num(rep.delta), "exact": rep.exact,
           "checked_vertices": rep.checked_vertices, "max_degree": rep.max_degree,
           "degree_bound_ok": rep.degree_bound_ok, "mu_bounds_ok": rep.mu_bounds_ok,
           "mu_times_mu_bar_is_1": mu_pairs,
           "errors": [{"kind": k, "message": m} for k, m in rep.errors]}
    if not rep.ok:
        kind, msg = rep.errors[0]
        raise DomainFailure(kind, msg, out)
    return out


def cmd_weights(built, args) -> dict:
    from .graph import vertex_weights
    g = built.graph
    cmd_validate(built, args)
    vw = vertex_weights(g)
    return {"base": vw.base, "mu_V": {v: num(x) for v, x in vw.mu_V.items()},
            "mu": {e.id: num(g.mu[e.id]) for e in g.edges}}


def _need_action(built):
    if built.action is None:
        raise DomainFailure("NoSymmetry", "this input has no symmetry group attached")
    return built.action


def cmd_dims(built, args) -> dict:
    from .symmetry import fixed_point_dim
    s = _need_action(built)
    dims = []
    for n in range(1, args.n + 1):
        dims.append({"n": n, "dim": num(fixed_point_dim(built.graph, s, n, args.sign))})
    return {"sign": args.sign, "dims": dims}


def cmd_bratteli(built, args) -> dict:
    from .spectral import bratteli_P, bratteli_Q
    s = _need_action(built)
    bp = bratteli_P(built.graph, args.n, args.sign)
    bq = bratteli_Q(built.graph, s, args.n, args.sign, seed=args.seed)
    return {"n": args.n, "sign": args.sign,
            "P": dict(bp.to_dict(), trace_consistent=bp.trace_consistent, norm=num(bp.norm())),
            "Q": dict(bq.to_dict(), trace_consistent=bq.trace_consistent, norm=num(bq.norm()))}


def norm_chain(built, n_max: int, seed: int = 0) -> dict:
    from .spectral import bratteli_P, bratteli_Q, graph_norm
    g, s = built.graph, built.action
    est = graph_norm(g, built.info)
    rows = []
    ok = True
    for n in range(n_max + 1):
        q = bratteli_Q(g, s, n, seed=seed).norm()
        p = bratteli_P(g, n).norm()
        bound = est.upper if est.upper is not None else est.lower
        good = q <= p + 1e-9 and p <= bound + 1e-9
        ok &= good
        rows.append({"n": n, "Q": num(q), "P": num(p), "chain_holds": good})
    return {"gamma": {"lower": num(est.lower), "upper": num(est.upper), "method": est.method},
            "levels": rows, "chain_holds": ok}


def cmd_norms(built, args) -> dict:
    _need_action(built)
    return norm_chain(built, args.n, args.seed)


def cmd_amenability(built, args) -> dict:
    from .spectral import amenability_verdict
    v = amenability_verdict(built.graph, built.action, built.info, n_max=args.n, seed=args.seed)
    est = v.gamma_norm
    return {"verdict": v.verdict, "delta": num(built.graph.delta),
            "bounds": {"lower": num(est.lower) if est else None,
                       "upper": num(est.upper) if est else None,
                       "method": est.method if est else None},
            "q_norms": [{"n": n, "norm": num(x)} for n, x in v.q_norms],
            "explanation": v.explanation}


def cmd_hecke(built, args) -> dict:
    from .hecke import build_hecke_from_action, hecke_summary, named_pair, normal_quotient_check
    if args.pair:
        ctx = named_pair(args.pair)
    else:
        ctx = build_hecke_from_action(_need_action(built))
    out = hecke_summary(ctx)
    out["pair"] = args.pair or "graph stabilizer"
    out["normal_subgroup"] = normal_quotient_check(ctx)
    return out


def cmd_graded(built, args) -> dict:
    from .graded import property_suite
    if built.graph.is_truncated:
        raise DomainFailure("NotFinite", "the graded suite runs on finite graphs")
    _need_action(built)
    res = property_suite(built, n_max=args.nmax, samples=args.samples, seed=args.seed)
    res["gram_min_eig"] = num(res["gram_min_eig"], 1e-8)
    if not res["ok"]:
        raise DomainFailure("GradedPropertyFailure", "a graded identity failed", res)
    return res


def cmd_report(built, args) -> dict:
    out = {"validate": cmd_validate(built, args), "weights": cmd_weights(built, args)}
    if built.action is None:
        out["note"] = "no symmetry group attached; stopping after weights"
        return out
    out["dims"] = cmd_dims(built, args)
    out["bratteli"] = cmd_bratteli(built, args)
    out["norms"] = norm_chain(built, args.n, args.seed)
    out["amenability"] = cmd_amenability(built, args)
    if not built.graph.is_truncated:
        from .hecke import build_hecke_from_action, hecke_summary
        out["hecke"] = hecke_summary(build_hecke_from_action(built.action))
        from .graded import property_suite
        res = property_suite(built, n_max=args.nmax, samples=args.samples, seed=args.seed)
        res["gram_min_eig"] = num(res["gram_min_eig"], 1e-8)
        out["graded"] = res
    return out


COMMANDS = {
    "validate": cmd_validate, "weights": cmd_weights, "dims": cmd_dims,
    "bratteli": cmd_bratteli, "norms": cmd_norms, "amenability": cmd_amenability,
    "hecke": cmd_hecke, "graded-check": cmd_graded, "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bgpa", description="bipartite graph planar algebra toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        add_input_flags(sp)
        sp.add_argument("--n", type=int, default=2 if name == "dims" else 3,
                        help="box level (dims: up to n; norms/amenability: n_max)")
        sp.add_argument("--sign", choices=["+", "-"], default="+")
        sp.add_argument("--nmax", type=int, default=6, help="graded truncation degree")
        sp.add_argument("--samples", type=int, default=10, help="graded random samples")
        if name == "hecke":
            sp.add_argument("--pair", help="named pair such as S3/S2 instead of the graph action")
    return p


def _emit(report: dict, path: str | None):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    _limit_threads()
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {"schema": SCHEMA, "command": args.command, "seed": args.seed, "mode": args.mode}
    from .graph import FormatError, GraphError
    try:
        built = load_input(args)
    except (OSError, FormatError, json.JSONDecodeError) as exc:
        report.update(status="error", error={"kind": type(exc).__name__, "message": str(exc)})
        _emit(report, args.output)
        return EXIT_IO
    except (GraphError, ValueError) as exc:
        report.update(status="invalid", error={"kind": type(exc).__name__, "message": str(exc)})
        _emit(report, args.output)
        return EXIT_DOMAIN
    report["input"] = describe(built, args)
    code = EXIT_OK
    try:
        report["result"] = COMMANDS[args.command](built, args)
        report["status"] = "ok"
        verdict = report["result"].get("verdict") or report["result"].get("amenability", {}).get("verdict")
        if verdict == "Inconclusive":
            report["status"] = "inconclusive"
            code = EXIT_INCONCLUSIVE
    except DomainFailure as exc:
        report.update(status="invalid", error={"kind": exc.kind, "message": str(exc)})
        if exc.details is not None:
            report["result"] = exc.details
        code = EXIT_DOMAIN
    except (GraphError, ValueError) as exc:
        report.update(status="invalid", error={"kind": type(exc).__name__, "message": str(exc)})
        code = EXIT_DOMAIN
    try:
        _emit(report, args.output)
    except OSError as exc:
        sys.stderr.write(f"cannot write report: {exc}\n")
        return EXIT_IO
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
