"""Command-line front end.

Exit codes: 0 success, 1 factored/brute disagreement, 2 bad input,
3 size guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import decompose, expectation, graph, independence, io
from .model import (
    AdditiveDecomposition,
    GuardExceeded,
    ModelError,
    Scope,
    ToleranceConfig,
    UtilityTable,
    VariableSpace,
)

EXIT_DISAGREE = 1
EXIT_INPUT = 2
EXIT_GUARD = 3


def parse_scope_expression(text: str, space: VariableSpace) -> Scope | list[Scope]:
    """``"x,y"`` gives a scope; ``"x|y,z"`` gives a list of scopes. Whitespace is ignored.

    Groups may overlap (GAI scopes); callers that need a partition check it.
    """
    text = "".join(text.split())

    def one(part: str) -> Scope:
        names = [n for n in part.split(",") if n] if part else []
        for n in names:
            space.index(n)
        return space.scope(names)

    if "|" in text:
        return [one(p) for p in text.split("|")]
    return one(text)


def _scope(text: str, space: VariableSpace) -> Scope:
    s = parse_scope_expression(text, space)
    if isinstance(s, list):
        raise ModelError(f"expected a single scope, got groups in {text!r}")
    return s


def _groups(text: str, space: VariableSpace) -> list[Scope]:
    s = parse_scope_expression(text, space)
    return s if isinstance(s, list) else [s]


def _assignment(text: str | None, space: VariableSpace) -> dict[str, int]:
    if not text:
        return {}
    out = {}
    for item in "".join(text.split()).split(","):
        if not item:
            continue
        name, sep, label = item.partition("=")
        if not sep:
            raise ModelError(f"expected var=value, got {item!r}")
        if name in out:
            raise ModelError(f"{name!r} assigned twice")
        out[name] = space.value_index(name, label)
    return out


def _dense(u: UtilityTable | AdditiveDecomposition, force: bool) -> UtilityTable:
    return u if isinstance(u, UtilityTable) else u.to_dense(force=force)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def to_dot(g: graph.UndirectedGraph) -> str:
    lines = ["graph U {"]
    lines += [f'  "{v}";' for v in g.vertices]
    lines += [f'  "{a}" -- "{b}";' for a, b in g.sorted_edges()]
    lines.append("}")
    return "\n".join(lines)


def cmd_graph(args, tol):
    u = _dense(io.load_utility(args.utility, force=args.force), args.force)
    g = graph.build_perfect_map(u, tol)
    if args.format == "dot":
        print(to_dot(g))
    else:
        _emit({"vertices": list(g.vertices), "edges": [list(e) for e in g.sorted_edges()], "epsilon": tol.epsilon})


def cmd_cliques(args, tol):
    u = _dense(io.load_utility(args.utility, force=args.force), args.force)
    cliques = graph.maximal_cliques(graph.build_perfect_map(u, tol))
    _emit({"cliques": [list(c) for c in cliques], "epsilon": tol.epsilon})


def _decompose(u: UtilityTable, args, tol) -> decompose.DecompositionReport:
    ref = _assignment(args.reference, u.space)
    return decompose.decompose_over_cliques(u, graph.build_perfect_map(u, tol), ref, tol)


def cmd_decompose(args, tol):
    u = _dense(io.load_utility(args.utility, force=args.force), args.force)
    report = _decompose(u, args, tol)
    factored = io.utility_to_json(report.decomposition)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(factored, fh, indent=2)
            fh.write("\n")
    _emit(
        {
            "utility_file": factored,
            "max_residual": report.max_residual,
            "clique_assignment": [
                {"scope": list(s), "factor": list(c)} for s, c in report.clique_assignment.items()
            ],
            "epsilon": tol.epsilon,
        }
    )


def cmd_check(args, tol):
    u = _dense(io.load_utility(args.utility, force=args.force), args.force)
    space = u.space
    out: dict = {"test": args.test}
    if args.test == "cai":
        x, z, y = _scope(args.x, space), _scope(args.z, space), _scope(args.y, space)
        out.update(x=list(x), z=list(z), y=list(y))
        holds = independence.test_cai(u, (x, z, y), tol, _assignment(args.reference, space))
    elif args.test == "ui":
        x = _scope(args.x, space)
        holds, w = independence.test_utility_independence(u, x, tol)
        out["x"] = list(x)
        if w is not None:
            out["witness"] = {"h": w.h.tolist(), "f": w.f.tolist(), "g": w.g.tolist()}
    elif args.test == "ai":
        parts = _groups(args.partition, space)
        out["partition"] = [list(p) for p in parts]
        holds = independence.test_additive_partition(u, parts, tol)
    else:
        scopes = _groups(args.scopes, space)
        out["scopes"] = [list(s) for s in scopes]
        holds = independence.test_gai(u, scopes, tol)
    _emit({"holds": bool(holds), **out, "epsilon": tol.epsilon})


def _load_prob(path, space):
    obj = io._read(path)
    if isinstance(obj, dict) and "probs" in obj:
        return io.parse_distribution(obj, space)
    return io.parse_bayes_net(obj, space)


def cmd_eu(args, tol):
    u = io.load_utility(args.utility, force=args.force)
    space = u.space
    p = _load_prob(args.model, space)
    ev = _assignment(args.evidence, space)
    out: dict = {"method": args.method}
    if args.method in ("brute", "both"):
        out["brute"] = expectation.eu_brute(_dense(u, args.force), p, ev, force=args.force)
    if args.method in ("factored", "both"):
        if not isinstance(p, expectation.BayesNet):
            raise ModelError("factored expected utility needs a Bayesian network file")
        d = u if isinstance(u, AdditiveDecomposition) else _decompose(u, args, tol).decomposition
        out["factored"] = expectation.eu_factored(d, p, ev)
    status = 0
    if args.method == "both":
        scale = _dense(u, args.force).scale
        agree = abs(out["brute"] - out["factored"]) <= tol.threshold(scale)
        out["agree"] = agree
        status = 0 if agree else EXIT_DISAGREE
    _emit({**out, "evidence": {k: space.variable(k).domain[v] for k, v in ev.items()}, "epsilon": tol.epsilon})
    return status


def cmd_axioms(args, tol):
    u = _dense(io.load_utility(args.utility, force=args.force), args.force)
    _emit({**graph.check_graphoid_axioms(u, tol).to_dict(), "epsilon": tol.epsilon})


def cmd_choose(args, tol):
    u = io.load_utility(args.utility, force=args.force)
    bn = io.load_bayes_net(args.network, u.space)
    actions = io.load_actions(args.actions, u.space)
    d = u if isinstance(u, AdditiveDecomposition) else _decompose(u, args, tol).decomposition
    best, values = expectation.choose_action(d, bn, actions)
    _emit({"best": best, "expected_utility": values, "epsilon": tol.epsilon})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=float, default=1e-9, help="relative equality tolerance")
    common.add_argument("--reference", help="decomposition reference state, e.g. x=0,y=1")
    common.add_argument("--force", action="store_true", help="lift the dense state-count guard")

    parser = argparse.ArgumentParser(
        prog="utilgraph", description="Independence structure of discrete multi-attribute utilities."
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("graph", parents=[common], help="perfect CA-independence graph")
    p.add_argument("utility")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("cliques", parents=[common], help="maximal cliques of the perfect graph")
    p.add_argument("utility")
    p.set_defaults(func=cmd_cliques)

    p = sub.add_parser("decompose", parents=[common], help="additive decomposition over cliques")
    p.add_argument("utility")
    p.add_argument("-o", "--output", help="write the factored utility file here")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("check", help="independence tests")
    checks = p.add_subparsers(dest="test", required=True)
    c = checks.add_parser("cai", parents=[common])
    c.add_argument("utility")
    c.add_argument("--x", required=True)
    c.add_argument("--z", default="")
    c.add_argument("--y", required=True)
    c = checks.add_parser("ui", parents=[common])
    c.add_argument("utility")
    c.add_argument("--x", required=True)
    c = checks.add_parser("ai", parents=[common])
    c.add_argument("utility")
    c.add_argument("--partition", required=True)
    c = checks.add_parser("gai", parents=[common])
    c.add_argument("utility")
    c.add_argument("--scopes", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eu", parents=[common], help="expected utility")
    p.add_argument("utility")
    p.add_argument("model", help="Bayesian network or explicit distribution file")
    p.add_argument("--evidence")
    p.add_argument("--method", choices=("brute", "factored", "both"), default="factored")
    p.set_defaults(func=cmd_eu)

    p = sub.add_parser("axioms", parents=[common], help="exhaustive graphoid check")
    p.add_argument("utility")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("choose", parents=[common], help="maximum expected utility action")
    p.add_argument("utility")
    p.add_argument("network")
    p.add_argument("actions")
    p.set_defaults(func=cmd_choose)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = ToleranceConfig(args.epsilon)
        return args.func(args, tol) or 0
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ModelError, OSError, expectation.ZeroProbabilityEvidence, decompose.DecompositionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
