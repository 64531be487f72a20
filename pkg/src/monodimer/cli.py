"""Command-line front end.

Every subcommand prints ``key=value`` lines (tables print one row per line
with the same syntax) and can also write a JSON record with ``--output``.
Exit status: 0 on success, 1 when a module rejects the input on
mathematical grounds, 2 on usage errors (bad flags, unreadable files,
malformed numbers or graphs).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from gmpy2 import mpq

from .exact import (ComplexExact, ZeroPartitionFunction, horner, matching_polynomial,
                    p_unmatched, parse_complex, ray_endpoint, to_rational, z_exact)
from .graph import Graph, GraphFormatError, check_profile, parse_graph


class UsageError(Exception):
    pass


# -- argument helpers --------------------------------------------------------

def _gamma(text: str) -> ComplexExact:
    try:
        return parse_complex(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad complex number {text!r}: {exc}") from None


def _rational(text: str):
    try:
        return to_rational(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad rational {text!r}: {exc}") from None


def _family(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 3:
        raise UsageError(f"--family expects 'Delta,a,c', got {text!r}")
    return parts


def _graph(path: str) -> Graph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path!r}: {exc.strerror}") from None
    try:
        return parse_graph(text)
    except GraphFormatError as exc:
        raise UsageError(f"malformed graph file {path!r}: {exc}") from None


def _cx(z) -> str:
    z = complex(z)
    return f"{z.real:.15g}{z.imag:+.15g}i"


def _emit(out, pairs: list[tuple[str, object]]) -> None:
    for k, v in pairs:
        print(f"{k}={v}", file=out)


# -- subcommands ---------------------------------------------------------------

def cmd_exact(a, out):
    g = _graph(a.graph)
    gam = _gamma(a.gamma)
    z = z_exact(g, gam)
    rows = [("n", g.vertex_count), ("m", g.edge_count), ("gamma", gam), ("Z", z),
            ("Z_decimal", z.to_decimal())]
    rec = {"gamma": gam.to_pair_text(), "Z": z.to_pair_text()}
    if a.vertex is not None:
        p = p_unmatched(g, a.vertex, gam)
        rows.append(("p_unmatched", p))
        rec["p_unmatched"] = p.to_pair_text()
    _emit(out, rows)
    return rec


def cmd_approx(a, out):
    from .decay import approx_z
    g = _graph(a.graph)
    gam = _gamma(a.gamma)
    res = approx_z(g, gam, float(_rational(a.eps)), _family(a.family),
                   node_cap=a.node_cap, dps=a.dps)
    rec = res.to_record()
    rows = [("Z_hat", _cx(res.z_hat)), ("eps", res.eps), ("ell", rec["ell"]),
            ("alpha", rec["alpha"]), ("p", rec["p"]), ("q", rec["q"]),
            ("saw_nodes_total", sum(res.node_counts)), ("seconds", rec["seconds"])]
    if a.check:
        from .decay import log_error
        z = z_exact(g, gam)
        err = abs(log_error(res.z_hat, z)) if z else float("inf")
        rows += [("Z_exact", z), ("log_error", f"{err:.3e}"), ("certified", err <= res.eps)]
        rec["log_error"] = err
    _emit(out, rows)
    return rec


def cmd_saw(a, out):
    from .saw import build_saw_tree, eval_tree_ratio
    g = _graph(a.graph)
    t = build_saw_tree(g, a.vertex, a.depth, a.node_cap)
    rows = [("nodes", len(t)), ("cut_leaves", len(t.cut_leaves)),
            ("level_sizes", ",".join(map(str, t.level_sizes())))]
    rec = {"nodes": len(t), "cut_leaves": sorted(t.cut_leaves), "level_sizes": t.level_sizes()}
    if a.gamma is not None:
        x = eval_tree_ratio(t, _gamma(a.gamma), 1, "exact")
        rows.append(("root_ratio", x))
        rec["root_ratio"] = x.to_pair_text()
    _emit(out, rows)
    return rec


def cmd_profile(a, out):
    g = _graph(a.graph)
    d, aa, c = _family(a.family)
    rep = check_profile(g, d, aa, c, a.l_max)
    rows = [("verdict", rep.verdict), ("lengths_checked", len(rep.checked_lengths))]
    if rep.first_failure:
        rows.append(("first_failure", f"{rep.first_failure[0]},{rep.first_failure[1]}"))
    _emit(out, rows)
    return {"verdict": rep.verdict, "first_failure": rep.first_failure}


def cmd_contraction_scan(a, out):
    from .decay import derive_params
    from .metric import contraction_residual, sample_domain
    rows = []
    for gtext in a.gamma:
        gam = _gamma(gtext)
        for delta in a.delta:
            params = derive_params(gam, (delta, 1, 1), 2, 0.5)
            rng = random.Random(a.seed)
            for d in range(1, a.max_arity + 1 if a.max_arity else int(-(-delta // 1)) + 1):
                worst = max(contraction_residual([sample_domain(params.Q, rng) for _ in range(d)], params)
                            for _ in range(a.trials))
                rows.append({"gamma": str(gam), "delta": delta, "d": d, "max_residual": worst})
                print(f"gamma={gam} delta={delta} d={d} max_residual={worst:.12f}", file=out)
    return {"rows": rows}


def _vertex_gadget(a, out):
    from .gadgets.bootstrap import build_vertex_gadget
    gam = _gamma(a.gamma)
    if gam.im:
        raise ValueError("gadget constructions need a real activity")
    gd = build_vertex_gadget(gam.re, a.delta, _rational(a.lam), _rational(a.eps), a.method)
    return gd


def cmd_gadget_vertex(a, out):
    gd = _vertex_gadget(a, out)
    return _gadget_report(gd, a, out)


def cmd_gadget_edge(a, out):
    from .gadgets.bootstrap import build_edge_gadget
    gam = _gamma(a.gamma)
    if gam.im:
        raise ValueError("gadget constructions need a real activity")
    gd = build_edge_gadget(gam.re, a.delta, _rational(a.gamma_prime), _rational(a.eps), a.method)
    return _gadget_report(gd, a, out)


def _gadget_report(gd, a, out):
    if a.verify:
        gd.verify()
    rows = [("kind", gd.kind), ("gamma", gd.gamma), ("target", gd.target), ("accuracy", gd.accuracy),
            ("error", gd.error), ("vertices", gd.vertex_count), ("max_degree", gd.max_degree),
            ("scale", gd.scale), ("construction", gd.info.get("construction"))]
    rows += [(f"achieved[{k}]", v) for k, v in gd.achieved.items()]
    _emit(out, rows)
    return gd.to_record()


def cmd_zero_scan(a, out):
    g = _graph(a.graph)
    coeffs = matching_polynomial(g)
    re_lo, re_hi = _rational(a.re_min), _rational(a.re_max)
    im_lo, im_hi = _rational(a.im_min), _rational(a.im_max)
    steps = a.steps
    if steps < 1:
        raise UsageError("--steps must be positive")
    end = ray_endpoint(g.max_degree)
    rows, zeros, violations = [], 0, 0
    for i in range(steps + 1):
        re = re_lo + (re_hi - re_lo) * mpq(i, steps)
        for j in range(steps + 1):
            im = im_lo + (im_hi - im_lo) * mpq(j, steps)
            gam = ComplexExact(re, im)
            z = horner(coeffs, gam if im else re)
            on_ray = im == 0 and re < end
            if not z:
                zeros += 1
                violations += not on_ray
            rows.append((str(re), str(im), abs(z)))
            print(f"re={float(re):.6g} im={float(im):.6g} abs_Z={float(abs(z)):.12g}", file=out)
    _emit(out, [("grid_points", len(rows)), ("zeros", zeros), ("zeros_off_ray", violations)])
    if violations:
        raise ValueError(f"{violations} zeros found off the excluded ray")
    return {"rows": [[r, i, float(v)] for r, i, v in rows], "zeros": zeros}


def cmd_reduce_demo(a, out):
    from .reduction import binary_search_ratio
    g = _graph(a.graph)
    try:
        e = tuple(int(x) for x in a.edge.split(","))
    except ValueError:
        raise UsageError(f"--edge expects 'u,v', got {a.edge!r}") from None
    if len(e) != 2:
        raise UsageError(f"--edge expects 'u,v', got {a.edge!r}")
    res = binary_search_ratio(g, e, a.oracle, a.iters, a.mode, noise=a.noise, seed=a.seed)
    for i, (lo, hi) in enumerate(res.state.intervals):
        if i % a.trace_every == 0 or i == len(res.state.intervals) - 1:
            print(f"round={i} lo={float(lo):.17g} hi={float(hi):.17g} width={float(hi - lo):.3e}", file=out)
    rows = [("rounds", res.rounds), ("r_goal", res.reconstructed), ("ratio", res.ratio)]
    if res.ratio is not None:
        truth = z_exact(g, mpq(-1, 10)) / z_exact(g.remove_edge(*e), mpq(-1, 10))
        rows.append(("matches_exact", truth == res.ratio))
    _emit(out, rows)
    return {"interval": [str(x) for x in res.interval],
            "r_goal": None if res.reconstructed is None else str(res.reconstructed),
            "ratio": None if res.ratio is None else str(res.ratio)}


def cmd_paths_table(a, out):
    from .reduction import path_partition_values
    vals = path_partition_values(a.n_max)
    for n in range(1, a.n_max + 1):
        print(f"n={n} Z={vals[n]}", file=out)
    return {"values": vals[1:]}


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="monodimer", description=__doc__.splitlines()[0])
    p.add_argument("--output", help="also write a JSON record to this file")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("exact", help="exact Z_G(gamma)")
    s.add_argument("--graph", required=True)
    s.add_argument("--gamma", required=True, help="'re im' with rationals or decimals")
    s.add_argument("--vertex", type=int)
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("approx", help="approximate Z_G(gamma) off the negative axis")
    s.add_argument("--graph", required=True)
    s.add_argument("--gamma", required=True)
    s.add_argument("--eps", required=True)
    s.add_argument("--family", required=True, help="Delta,a,c")
    s.add_argument("--node-cap", type=int, default=2_000_000)
    s.add_argument("--dps", type=int, help="use mpmath with this many digits")
    s.add_argument("--check", action="store_true", help="compare with the exact value")
    s.set_defaults(func=cmd_approx)

    s = sub.add_parser("saw", help="self-avoiding-walk tree summary")
    s.add_argument("--graph", required=True)
    s.add_argument("--vertex", type=int, default=0)
    s.add_argument("--depth", type=int)
    s.add_argument("--node-cap", type=int, default=1_000_000)
    s.add_argument("--gamma", help="also evaluate the root ratio exactly")
    s.set_defaults(func=cmd_saw)

    s = sub.add_parser("profile", help="check a path-growth profile")
    s.add_argument("--graph", required=True)
    s.add_argument("--family", required=True, help="Delta,a,c")
    s.add_argument("--l-max", type=int, required=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("contraction-scan", help="largest contraction residual over random draws")
    s.add_argument("--gamma", action="append", required=True)
    s.add_argument("--delta", type=float, action="append", required=True)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--max-arity", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_contraction_scan)

    s = sub.add_parser("gadget-vertex", help="tree implementing a vertex activity")
    s.add_argument("--gamma", required=True)
    s.add_argument("--delta", type=int, default=3)
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--eps", default="0")
    s.add_argument("--method", default="auto", choices=("auto", "fast", "perfect", "dense"))
    s.add_argument("--verify", action="store_true")
    s.set_defaults(func=cmd_gadget_vertex)

    s = sub.add_parser("gadget-edge", help="tree implementing an edge activity")
    s.add_argument("--gamma", required=True)
    s.add_argument("--delta", type=int, default=3)
    s.add_argument("--gamma-prime", required=True)
    s.add_argument("--eps", required=True)
    s.add_argument("--method", default="auto", choices=("auto", "fast", "perfect", "dense"))
    s.add_argument("--verify", action="store_true")
    s.set_defaults(func=cmd_gadget_edge)

    s = sub.add_parser("zero-scan", help="|Z_G| on a rational grid of activities")
    s.add_argument("--graph", required=True)
    s.add_argument("--re-min", default="-2")
    s.add_argument("--re-max", default="2")
    s.add_argument("--im-min", default="-2")
    s.add_argument("--im-max", default="2")
    s.add_argument("--steps", type=int, default=20)
    s.set_defaults(func=cmd_zero_scan)

    s = sub.add_parser("reduce-demo", help="binary search for the ratio Z_G / Z_{G-e}")
    s.add_argument("--graph", required=True)
    s.add_argument("--edge", required=True, help="u,v")
    s.add_argument("--oracle", default="sign_only",
                   choices=("sign_only", "norm_factor_1_01", "exact_simulated"))
    s.add_argument("--mode", default="direct_f", choices=("direct_f", "composed_graph"))
    s.add_argument("--noise", default="squeeze", choices=("squeeze", "alternating", "random", "none"))
    s.add_argument("--iters", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace-every", type=int, default=50)
    s.set_defaults(func=cmd_reduce_demo)

    s = sub.add_parser("paths-table", help="Z of paths at activity -1")
    s.add_argument("--n-max", type=int, default=24)
    s.set_defaults(func=cmd_paths_table)
    return p


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        record = args.func(args, out)
        if args.output:
            try:
                Path(args.output).write_text(json.dumps(
                    {"command": args.command, "result": _jsonable(record)}, indent=2) + "\n")
            except OSError as exc:
                raise UsageError(f"cannot write {args.output!r}: {exc.strerror}") from None
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, ZeroPartitionFunction, KeyError, IndexError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
