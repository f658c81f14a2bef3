"""Factored probability models and expected-utility computation.

Expected utility of an additive decomposition is the sum of the expected
values of its factors, so only the marginal on each factor scope is needed.
Marginals come from variable elimination with a min-fill ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import (
    AdditiveDecomposition,
    ModelError,
    Scope,
    UtilityTable,
    VariableSpace,
    expand,
)

ROW_SUM_TOL = 1e-9


class ZeroProbabilityEvidence(ValueError):
    """Conditioning evidence has probability zero."""


@dataclass(frozen=True)
class Node:
    child: str
    parents: Scope
    table: np.ndarray  # shape: parent sizes... + (child size,)


class BayesNet:
    """Per-variable conditional probability tables over a variable space.

    Each CPT is row-major over parent assignments (parents in space order)
    times child values.
    """

    def __init__(self, space: VariableSpace, cpts: Mapping[str, tuple[Sequence[str], object]]):
        self.space = space
        missing = set(space.names) - set(cpts)
        if missing:
            raise ModelError(f"no CPT for {sorted(missing, key=space.index)}")
        nodes = {}
        for child, (parents, table) in cpts.items():
            space.index(child)
            parents = list(parents)
            canon = space.scope(parents)
            if tuple(parents) != canon:
                raise ModelError(f"parents of {child!r} must be listed in variable order {list(canon)}")
            if child in parents:
                raise ModelError(f"{child!r} is its own parent")
            shape = space.scope_shape(canon) + (space.variable(child).size,)
            arr = np.array(table, dtype=np.float64).reshape(-1)
            if arr.size != math.prod(shape):
                raise ModelError(f"CPT of {child!r}: expected {math.prod(shape)} entries, got {arr.size}")
            arr = arr.reshape(shape)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
                raise ModelError(f"CPT of {child!r}: entries must lie in [0, 1]")
            if np.any(np.abs(arr.sum(axis=-1) - 1.0) > ROW_SUM_TOL):
                raise ModelError(f"CPT of {child!r}: rows must sum to 1")
            arr.setflags(write=False)
            nodes[child] = Node(child, canon, arr)
        self.nodes: dict[str, Node] = {n: nodes[n] for n in space.names}
        self.topological_order()

    def topological_order(self) -> list[str]:
        order, state = [], {}

        def visit(n):
            if state.get(n) == 1:
                raise ModelError(f"parent relation has a cycle through {n!r}")
            if state.get(n) == 2:
                return
            state[n] = 1
            for p in self.nodes[n].parents:
                visit(p)
            state[n] = 2
            order.append(n)

        for n in self.space.names:
            visit(n)
        return order

    def families(self) -> list[Scope]:
        return [self.space.scope(node.parents + (node.child,)) for node in self.nodes.values()]

    @classmethod
    def independent(cls, space: VariableSpace, probs: Mapping[str, Sequence[float]] | None = None) -> "BayesNet":
        """Root-only network; uniform marginals unless ``probs`` is given."""
        probs = probs or {}
        return cls(
            space,
            {
                v.name: ((), probs.get(v.name, np.full(v.size, 1.0 / v.size)))
                for v in space.variables
            },
        )


@dataclass(frozen=True)
class ExplicitDistribution:
    space: VariableSpace
    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=np.float64).reshape(-1)
        if arr.size != self.space.n_states:
            raise ModelError(f"distribution needs {self.space.n_states} entries, got {arr.size}")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)) or abs(arr.sum() - 1.0) > ROW_SUM_TOL:
            raise ModelError("distribution entries must be nonnegative and sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def tensor(self) -> np.ndarray:
        return self.probs.reshape(self.space.shape)

    def marginal(self, scope: Sequence[str]) -> np.ndarray:
        """Marginal table over ``scope`` (canonical order), flat."""
        scope = self.space.scope(scope)
        drop = tuple(i for i, n in enumerate(self.space.names) if n not in scope)
        return self.tensor.sum(axis=drop).reshape(-1)


@dataclass(frozen=True)
class ActionSet:
    actions: tuple[tuple[str, dict[str, int]], ...]

    def __post_init__(self):
        labels = [a for a, _ in self.actions]
        if len(set(labels)) != len(labels):
            raise ModelError("action labels must be unique")
        if not labels:
            raise ModelError("need at least one action")


@dataclass(frozen=True)
class ContainmentReport:
    contained: dict[Scope, bool]

    @property
    def uncovered(self) -> int:
        return sum(not c for c in self.contained.values())


# -- factor algebra for variable elimination --------------------------------


class _Factor:
    __slots__ = ("vars", "table")

    def __init__(self, vars: tuple[str, ...], table: np.ndarray):
        self.vars = vars
        self.table = table

    def aligned(self, order: tuple[str, ...]) -> np.ndarray:
        """Table transposed to ``order`` with unit axes for absent variables."""
        present = [v for v in order if v in self.vars]
        t = np.transpose(self.table, [self.vars.index(v) for v in present])
        return t.reshape([t.shape[present.index(v)] if v in self.vars else 1 for v in order])


def _product(factors: list[_Factor], order: tuple[str, ...]) -> np.ndarray:
    out = np.ones([1] * len(order))
    for f in factors:
        out = out * f.aligned(order)
    return out


def _check_evidence(space: VariableSpace, evidence: Mapping[str, int] | None) -> dict[str, int]:
    ev = dict(evidence or {})
    for n, v in ev.items():
        if not 0 <= v < space.variable(n).size:
            raise ModelError(f"evidence value {v} out of range for {n!r}")
    return ev


def _reduced_factors(bn: BayesNet, evidence: Mapping[str, int]) -> list[_Factor]:
    out = []
    for node in bn.nodes.values():
        vars = node.parents + (node.child,)
        idx = tuple(evidence.get(v, slice(None)) for v in vars)
        table = node.table[idx]
        out.append(_Factor(tuple(v for v in vars if v not in evidence), np.asarray(table)))
    return out


def _min_fill_order(space: VariableSpace, factors: list[_Factor], eliminate: set[str]) -> list[str]:
    adj: dict[str, set[str]] = {}
    for f in factors:
        for v in f.vars:
            adj.setdefault(v, set()).update(w for w in f.vars if w != v)
    remaining = set(eliminate)
    order = []
    while remaining:
        def fill(v):
            nb = list(adj.get(v, ()))
            return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])

        v = min(sorted(remaining, key=space.index), key=fill)
        nb = adj.pop(v, set())
        for a in nb:
            adj[a].discard(v)
            adj[a].update(nb - {a})
        remaining.discard(v)
        order.append(v)
    return order


def _unnormalized(bn: BayesNet, target: Scope, evidence: dict[str, int]) -> np.ndarray:
    space = bn.space
    factors = _reduced_factors(bn, evidence)
    hidden = set(space.names) - set(target) - set(evidence)
    for v in _min_fill_order(space, factors, hidden):
        touching = [f for f in factors if v in f.vars]
        if not touching:
            continue
        factors = [f for f in factors if v not in f.vars]
        vars = tuple(sorted(set().union(*(f.vars for f in touching)), key=space.index))
        prod = _product(touching, vars)
        kept = tuple(w for w in vars if w != v)
        factors.append(_Factor(kept, prod.sum(axis=vars.index(v))))
    return _product(factors, target) * np.ones(space.scope_shape(target))


def marginal(bn: BayesNet, target: Sequence[str], evidence: Mapping[str, int] | None = None) -> np.ndarray:
    """P(target | evidence) as a flat table over ``target`` in canonical order."""
    space = bn.space
    target = space.scope(target)
    ev = _check_evidence(space, evidence)
    if set(target) & set(ev):
        raise ModelError("target and evidence variables overlap")
    table = _unnormalized(bn, target, ev)
    z = table.sum()
    if not z > 0:
        raise ZeroProbabilityEvidence(f"evidence {ev} has probability zero")
    return (table / z).reshape(-1)


def joint_probability(bn: BayesNet, a: Mapping[str, int]) -> float:
    p = 1.0
    for node in bn.nodes.values():
        p *= float(node.table[tuple(a[v] for v in node.parents) + (a[node.child],)])
    return p


def joint_table(bn: BayesNet, *, force: bool = False) -> np.ndarray:
    """Dense joint distribution with one axis per variable."""
    bn.space.check_dense(force)
    out = np.ones(bn.space.shape)
    for node in bn.nodes.values():
        out = out * expand(bn.space, node.parents + (node.child,), node.table)
    return out


def _evidence_mask(space: VariableSpace, evidence: Mapping[str, int]) -> np.ndarray:
    mask = np.ones(space.shape, dtype=bool)
    for n, v in evidence.items():
        sel = np.zeros(space.variable(n).size, dtype=bool)
        sel[v] = True
        mask = mask & expand(space, (n,), sel)
    return mask


def eu_brute(
    u: UtilityTable,
    p: ExplicitDistribution | BayesNet,
    evidence: Mapping[str, int] | None = None,
    *,
    force: bool = False,
) -> float:
    """Conditional expected utility by summing over every state."""
    if u.space != p.space:
        raise ModelError("utility and distribution are over different spaces")
    space = u.space
    space.check_dense(force)
    ev = _check_evidence(space, evidence)
    probs = p.tensor if isinstance(p, ExplicitDistribution) else joint_table(p, force=force)
    if ev:
        probs = np.where(_evidence_mask(space, ev), probs, 0.0)
    z = probs.sum()
    if not z > 0:
        raise ZeroProbabilityEvidence(f"evidence {ev} has probability zero")
    return float(np.sum(probs * u.tensor) / z)


def eu_factored(d: AdditiveDecomposition, bn: BayesNet, evidence: Mapping[str, int] | None = None) -> float:
    """Expected utility as a sum of per-factor expectations under scope marginals.

    Evidence variables inside a factor scope are clamped, so each factor is
    averaged over the posterior on its free variables only.
    """
    if d.space != bn.space:
        raise ModelError("decomposition and network are over different spaces")
    space = d.space
    ev = _check_evidence(space, evidence)
    # normalising constant; raises on zero-probability evidence
    marginal(bn, (), ev)
    total = 0.0
    for f in d.factors:
        free = tuple(n for n in f.scope if n not in ev)
        idx = tuple(ev.get(n, slice(None)) for n in f.scope)
        sliced = np.asarray(f.table.reshape(space.scope_shape(f.scope))[idx]).reshape(-1)
        total += float(np.dot(marginal(bn, free, ev), sliced))
    return total


def containment_report(d: AdditiveDecomposition, bn: BayesNet) -> ContainmentReport:
    fams = [set(f) for f in bn.families()]
    return ContainmentReport({s: any(set(s) <= f for f in fams) for s in d.scopes})


def choose_action(
    d: AdditiveDecomposition, bn: BayesNet, actions: ActionSet
) -> tuple[str, dict[str, float]]:
    """Label of the action with maximum expected utility; earlier actions win ties."""
    values = {label: eu_factored(d, bn, ev) for label, ev in actions.actions}
    best = None
    for label, _ in actions.actions:
        if best is None or values[label] > values[best]:
            best = label
    return best, values


def clique_marginal_projection(p: ExplicitDistribution, cliques: Sequence[Sequence[str]]) -> ExplicitDistribution:
    """Junction-tree recombination of the clique marginals of ``p``.

    Returns ``prod_i p(C_i) / prod_i p(S_i)`` where ``S_i`` is the overlap of
    ``C_i`` with the earlier cliques. The cliques must cover every variable
    and be in running-intersection order.
    """
    space = p.space
    cliques = [space.scope(c) for c in cliques]
    if set().union(*map(set, cliques)) != set(space.names):
        raise ModelError("cliques must cover every variable")
    out = np.ones(space.shape)
    seen: set[str] = set()
    for i, c in enumerate(cliques):
        sep = space.scope(seen & set(c))
        if i and not any(set(sep) <= set(prev) for prev in cliques[:i]):
            raise ModelError(f"clique {list(c)} breaks the running-intersection property")
        num = expand(space, c, p.marginal(c))
        den = expand(space, sep, p.marginal(sep))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out * np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        seen |= set(c)
    return ExplicitDistribution(space, out.reshape(-1))
