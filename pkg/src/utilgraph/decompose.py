"""Interaction terms and additive decompositions of utility tables.

For a reference state r, the interaction term on a scope S is

    I_S(x_S) = sum over T subset of S of (-1)^|S - T| * u(x_T, r on V - T)

and u is exactly the sum of I_S over all scopes.  I_S vanishes on every
slice where some variable of S sits at its reference value, and u admits an
additive decomposition over scopes Z_1..Z_k precisely when every nonzero I_S
lies inside some Z_i.  That makes the terms a constructive tool for both
clique decompositions and avoidance queries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .graph import UndirectedGraph, maximal_cliques
from .independence import _reference
from .model import (
    DEFAULT_TOL,
    AdditiveDecomposition,
    GuardExceeded,
    ModelError,
    Scope,
    ToleranceConfig,
    UtilityTable,
    VariableSpace,
    expand,
    merge_factors,
)

#: Enumerating all 2^n scopes is refused beyond this many variables.
MAX_SCOPE_VARIABLES = 20


class DecompositionError(RuntimeError):
    """The supplied graph is not a valid independence map for the utility."""


@dataclass(frozen=True)
class InteractionTerm:
    scope: Scope
    reference: Mapping[str, int] = field(repr=False)
    table: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DecompositionReport:
    decomposition: AdditiveDecomposition
    max_residual: float
    clique_assignment: dict[Scope, Scope]


def _scope_key(space: VariableSpace, scope: Sequence[str]) -> tuple:
    return (len(scope), [space.index(n) for n in scope])


def interaction_table(u: UtilityTable, scope: Sequence[str], ref: Mapping[str, int]) -> np.ndarray:
    """Flat table of I_scope, row-major over ``scope`` in canonical order."""
    space = u.space
    scope = space.scope(scope)
    idx = tuple(slice(None) if n in scope else ref[n] for n in space.names)
    t = np.array(u.tensor[idx], dtype=np.float64)
    # one differencing pass per axis applies the signed sum over subsets
    for axis, name in enumerate(scope):
        base = np.take(t, [ref[name]], axis=axis)
        t = t - base
    return t.reshape(-1)


def _candidate_scopes(space: VariableSpace, restrict: Sequence[Sequence[str]] | None) -> list[Scope]:
    if restrict is None:
        if len(space) > MAX_SCOPE_VARIABLES:
            raise GuardExceeded(
                f"{len(space)} variables exceeds the interaction-term limit of {MAX_SCOPE_VARIABLES}"
            )
        pools = [space.names]
    else:
        pools = [space.scope(r) for r in restrict]
        if any(len(p) > MAX_SCOPE_VARIABLES for p in pools):
            raise GuardExceeded(f"a restricting scope exceeds {MAX_SCOPE_VARIABLES} variables")
    scopes: set[Scope] = set()
    for pool in pools:
        for k in range(len(pool) + 1):
            scopes.update(itertools.combinations(pool, k))
    return sorted(scopes, key=lambda s: _scope_key(space, s))


def interaction_terms(
    u: UtilityTable,
    reference: Mapping[str, int] | None = None,
    restrict: Sequence[Sequence[str]] | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[InteractionTerm]:
    """Nonzero interaction terms of ``u``, plus the constant term.

    Args:
        u: the utility table.
        reference: reference values; unlisted variables default to their
            first domain value.
        restrict: if given, only scopes contained in one of these are computed.
        tol: terms with every entry within tolerance of zero are dropped.

    Returns:
        Terms sorted by scope size, then canonical order. The empty-scope
        term is always first.
    """
    space = u.space
    ref = _reference(space, reference)
    thr = tol.threshold(u.scale)
    out = []
    for scope in _candidate_scopes(space, restrict):
        table = interaction_table(u, scope, ref)
        if scope and not np.any(np.abs(table) > thr):
            continue
        table.setflags(write=False)
        out.append(InteractionTerm(scope, dict(ref), table))
    return out


def _lift(space: VariableSpace, sub: Scope, table: np.ndarray, host: Scope) -> np.ndarray:
    shape = [space.variable(n).size if n in sub else 1 for n in host]
    return np.broadcast_to(table.reshape(shape), space.scope_shape(host))


def residual(u: UtilityTable, d: AdditiveDecomposition) -> float:
    """Largest absolute gap between the dense table and the decomposition."""
    if u.space != d.space:
        raise ModelError("utility and decomposition are over different spaces")
    total = np.zeros(u.space.shape)
    for f in d.factors:
        total = total + expand(u.space, f.scope, f.table)
    return float(np.max(np.abs(u.tensor - total)))


def decompose_over_cliques(
    u: UtilityTable,
    g: UndirectedGraph,
    reference: Mapping[str, int] | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> DecompositionReport:
    """Write ``u`` as a sum of factors, one per maximal clique of ``g``.

    Each interaction term goes to the first clique (in sorted order) that
    contains its scope; the constant goes to the first clique.

    Raises:
        DecompositionError: if the result does not reproduce ``u``, meaning
            ``g`` misses some interaction of ``u``.
    """
    space = u.space
    cliques = maximal_cliques(g)
    terms = interaction_terms(u, reference, restrict=cliques, tol=tol)
    tables = {c: np.zeros(space.scope_shape(c)) for c in cliques}
    owner: dict[Scope, Scope] = {}
    for term in terms:
        host = next(c for c in cliques if set(term.scope) <= set(c))
        tables[host] = tables[host] + _lift(space, term.scope, term.table, host)
        owner[term.scope] = host
    d = AdditiveDecomposition(space, [(c, tables[c].reshape(-1)) for c in cliques])
    res = residual(u, d)
    if res > tol.threshold(u.scale):
        raise DecompositionError(
            f"residual {res:.3g} exceeds tolerance; the graph is not an independence map for u"
        )
    return DecompositionReport(d, res, owner)


def decompose_avoiding(
    u: UtilityTable,
    avoid: Sequence[Sequence[str]],
    reference: Mapping[str, int] | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> AdditiveDecomposition | None:
    """Decomposition none of whose factor scopes contains an ``avoid`` scope, or None.

    Exists exactly when no nonzero interaction term has a scope containing an
    avoided set. The factors returned are the nonzero terms, folded into the
    maximal nonzero scopes.
    """
    space = u.space
    avoid_sets = [set(space.scope(a)) for a in avoid]
    if not avoid_sets or any(not a for a in avoid_sets):
        raise ModelError("avoid scopes must be nonempty")
    terms = interaction_terms(u, reference, tol=tol)
    for t in terms:
        if any(a <= set(t.scope) for a in avoid_sets):
            return None
    return merge_factors(space, [(t.scope, t.table) for t in terms])
