"""The perfect CA-independence graph of a utility function.

Two variables a, b are joined exactly when CAI({a}, V - {a, b}, {b}) fails.
Because CA-independence satisfies the graphoid conditions (symmetry,
decomposition, intersection, strong union, transitivity), vertex separation
in this graph coincides with CA-independence for every partition of V.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .independence import cai_residual, test_cai_extended
from .model import (
    DEFAULT_TOL,
    GuardExceeded,
    ModelError,
    Scope,
    ToleranceConfig,
    UtilityTable,
    VariableSpace,
)

#: Exhaustive graphoid checks are refused above this many variables.
MAX_AXIOM_VARIABLES = 5

CONDITIONS = ("symmetry", "decomposition", "intersection", "strong_union", "transitivity")


class UndirectedGraph:
    def __init__(self, space: VariableSpace, edges: Iterable[tuple[str, str]] = ()):
        self.space = space
        es = set()
        for a, b in edges:
            space.index(a), space.index(b)
            if a == b:
                raise ModelError(f"self-loop on {a!r}")
            es.add(frozenset((a, b)))
        self.edges: frozenset[frozenset[str]] = frozenset(es)
        self._adj = {n: set() for n in space.names}
        for e in es:
            a, b = tuple(e)
            self._adj[a].add(b)
            self._adj[b].add(a)

    @property
    def vertices(self) -> Scope:
        return self.space.names

    def neighbors(self, name: str) -> set[str]:
        return set(self._adj[name])

    def has_edge(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.edges

    def sorted_edges(self) -> list[tuple[str, str]]:
        """Edges as (first, second) in canonical variable order, sorted."""
        idx = self.space.index
        pairs = [tuple(sorted(e, key=idx)) for e in self.edges]
        return sorted(pairs, key=lambda p: (idx(p[0]), idx(p[1])))

    def __eq__(self, other) -> bool:
        return isinstance(other, UndirectedGraph) and self.space == other.space and self.edges == other.edges

    def __repr__(self) -> str:
        return f"UndirectedGraph({self.sorted_edges()!r})"


def build_perfect_map(u: UtilityTable, tol: ToleranceConfig = DEFAULT_TOL) -> UndirectedGraph:
    space = u.space
    thr = tol.threshold(u.scale)
    edges = [
        (a, b)
        for a, b in itertools.combinations(space.names, 2)
        if cai_residual(u, [a], [b]) > thr
    ]
    return UndirectedGraph(space, edges)


def separates(g: UndirectedGraph, x: Sequence[str], z: Sequence[str], y: Sequence[str]) -> bool:
    """True if every path from ``x`` to ``y`` passes through ``z``."""
    xs, zs, ys = set(x), set(z), set(y)
    for s in (xs, zs, ys):
        for n in s:
            g.space.index(n)
    if xs & zs or xs & ys or zs & ys:
        raise ModelError("separation arguments must be pairwise disjoint")
    seen = set(xs)
    queue = deque(xs)
    while queue:
        v = queue.popleft()
        if v in ys:
            return False
        for w in g._adj[v]:
            if w not in seen and w not in zs:
                seen.add(w)
                queue.append(w)
    return True


def maximal_cliques(g: UndirectedGraph) -> list[Scope]:
    """All maximal cliques, each in canonical order, sorted lexicographically by position."""
    idx = g.space.index
    adj = g._adj
    found: list[Scope] = []

    def expand(r: list[str], p: set[str], x: set[str]) -> None:
        if not p and not x:
            found.append(tuple(sorted(r, key=idx)))
            return
        # pivot with most neighbours in p; ties go to the earliest variable
        pivot = max(sorted(p | x, key=idx), key=lambda v: len(adj[v] & p))
        for v in sorted(p - adj[pivot], key=idx):
            expand(r + [v], p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand([], set(g.vertices), set())
    return sorted(found, key=lambda c: [idx(n) for n in c])


@dataclass
class GraphoidReport:
    checked: dict[str, int] = field(default_factory=lambda: dict.fromkeys(CONDITIONS, 0))
    violated: dict[str, int] = field(default_factory=lambda: dict.fromkeys(CONDITIONS, 0))
    violations: list[tuple[str, Scope, Scope, Scope, Scope]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(self.violated.values())

    def to_dict(self) -> dict:
        return {
            "conditions": {
                c: {"checked": self.checked[c], "violated": self.violated[c]} for c in CONDITIONS
            },
            "violations": [
                {"condition": c, "x": list(x), "z": list(z), "y": list(y), "w": list(w)}
                for c, x, z, y, w in self.violations
            ],
            "ok": self.ok,
        }


def check_graphoid_axioms(u: UtilityTable, tol: ToleranceConfig = DEFAULT_TOL) -> GraphoidReport:
    """Exhaustively verify the five graphoid conditions for extended CAI.

    Every labelling of the variables into X, Z, Y, W and the remainder with
    X and Y nonempty is checked:

    * symmetry:      CAI(X,Z,Y) => CAI(Y,Z,X)
    * decomposition: CAI(X,Z,Y+W) => CAI(X,Z,Y) and CAI(X,Z,W)
    * intersection:  CAI(X,Z+W,Y) and CAI(X,Z+Y,W) => CAI(X,Z,Y+W)
    * strong union:  CAI(X,Z,Y) => CAI(X,Z+W,Y)
    * transitivity:  CAI(X,Z,Y) => CAI(X,Z,w) or CAI(w,Z,Y) for each single w outside X,Y,Z
    """
    space = u.space
    if len(space) > MAX_AXIOM_VARIABLES:
        raise GuardExceeded(f"graphoid check limited to {MAX_AXIOM_VARIABLES} variables")
    cache: dict[tuple[frozenset, frozenset, frozenset], bool] = {}

    def cai(x, z, y) -> bool:
        key = (frozenset(x), frozenset(z), frozenset(y))
        if key not in cache:
            cache[key] = test_cai_extended(u, x, z, y, tol)
        return cache[key]

    report = GraphoidReport()

    def record(cond: str, holds: bool, x, z, y, w) -> None:
        report.checked[cond] += 1
        if not holds:
            report.violated[cond] += 1
            report.violations.append((cond, space.scope(x), space.scope(z), space.scope(y), space.scope(w)))

    names = space.names
    for labels in itertools.product("XZYWR", repeat=len(names)):
        x = {n for n, l in zip(names, labels) if l == "X"}
        z = {n for n, l in zip(names, labels) if l == "Z"}
        y = {n for n, l in zip(names, labels) if l == "Y"}
        w = {n for n, l in zip(names, labels) if l == "W"}
        if not x or not y:
            continue
        if not w:
            record("symmetry", not cai(x, z, y) or cai(y, z, x), x, z, y, w)
            for v in names:
                if v not in x | y | z:
                    ok = not cai(x, z, y) or cai(x, z, {v}) or cai({v}, z, y)
                    record("transitivity", ok, x, z, y, {v})
            continue
        record("decomposition", not cai(x, z, y | w) or (cai(x, z, y) and cai(x, z, w)), x, z, y, w)
        record("intersection", not (cai(x, z | w, y) and cai(x, z | y, w)) or cai(x, z, y | w), x, z, y, w)
        record("strong_union", not cai(x, z, y) or cai(x, z | w, y), x, z, y, w)
    return report
