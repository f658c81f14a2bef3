"""Variable spaces, assignments, and dense / factored utility functions.

All tables use one layout: row-major over the variables in space order, the
last variable varying fastest.  A dense table over a space with domain sizes
``(d_1, ..., d_n)`` is therefore ``values.reshape(d_1, ..., d_n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

Scope = tuple[str, ...]
Assignment = Mapping[str, int]

#: Dense tables above this many states need an explicit ``force=True``.
MAX_DENSE_STATES = 2**26


class ModelError(ValueError):
    """Malformed model input (bad names, shapes, values)."""


class GuardExceeded(RuntimeError):
    """A size guard refused an exhaustive computation."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Shared equality tolerance.

    Two utility values are treated as equal when they differ by at most
    ``epsilon * (1 + max|u|)``.
    """

    epsilon: float = 1e-9

    def __post_init__(self):
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise ModelError(f"epsilon must be a finite nonnegative number, got {self.epsilon}")

    def threshold(self, scale: float) -> float:
        return self.epsilon * (1.0 + abs(scale))


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.domain)


class VariableSpace:
    """Ordered finite variables; the product of their domains is the state space."""

    def __init__(self, variables: Iterable[tuple[str, Sequence[str]] | Variable]):
        vs = []
        for v in variables:
            if isinstance(v, Variable):
                name, domain = v.name, v.domain
            else:
                name, domain = v
            domain = tuple(str(d) for d in domain)
            if not isinstance(name, str) or not name:
                raise ModelError(f"variable name must be a nonempty string, got {name!r}")
            if len(domain) < 2:
                raise ModelError(f"variable {name!r} needs at least 2 domain values")
            if len(set(domain)) != len(domain):
                raise ModelError(f"duplicate value labels in domain of {name!r}")
            vs.append(Variable(name, domain))
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            raise ModelError("duplicate variable names")
        self._vars = tuple(vs)
        self._pos = {v.name: i for i, v in enumerate(vs)}

    @classmethod
    def binary(cls, names: Iterable[str]) -> "VariableSpace":
        """Space of 0/1 variables, labels ``"0"`` and ``"1"``."""
        return cls((n, ("0", "1")) for n in names)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self._vars

    @property
    def names(self) -> Scope:
        return tuple(v.name for v in self._vars)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.size for v in self._vars)

    @property
    def n_states(self) -> int:
        return math.prod(self.shape)

    def __len__(self) -> int:
        return len(self._vars)

    def __contains__(self, name) -> bool:
        return name in self._pos

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableSpace) and self._vars == other._vars

    def __hash__(self) -> int:
        return hash(self._vars)

    def __repr__(self) -> str:
        return f"VariableSpace({[(v.name, list(v.domain)) for v in self._vars]!r})"

    def index(self, name: str) -> int:
        try:
            return self._pos[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def variable(self, name: str) -> Variable:
        return self._vars[self.index(name)]

    def value_index(self, name: str, label: str) -> int:
        domain = self.variable(name).domain
        try:
            return domain.index(label)
        except ValueError:
            raise ModelError(f"{label!r} is not in the domain of {name!r}") from None

    def scope(self, names: Iterable[str]) -> Scope:
        """Canonical scope: validated, deduplicated-checked, in space order."""
        names = list(names)
        if len(set(names)) != len(names):
            raise ModelError(f"duplicate variables in scope {names}")
        return tuple(sorted(names, key=self.index))

    def complement(self, *scopes: Iterable[str]) -> Scope:
        used = set().union(*map(set, scopes)) if scopes else set()
        return tuple(n for n in self.names if n not in used)

    def scope_shape(self, scope: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.variable(n).size for n in scope)

    def check_dense(self, force: bool = False, n_states: int | None = None) -> None:
        n = self.n_states if n_states is None else n_states
        if n > MAX_DENSE_STATES and not force:
            raise GuardExceeded(
                f"{n} states exceeds the dense limit of {MAX_DENSE_STATES}; pass force=True to override"
            )

    def assignments(self, scope: Sequence[str] | None = None) -> Iterator[dict[str, int]]:
        """Every assignment over ``scope`` (default: all variables) in canonical order."""
        scope = self.names if scope is None else tuple(scope)
        for idx in itertools.product(*(range(s) for s in self.scope_shape(scope))):
            yield dict(zip(scope, idx))

    def parse_assignment(self, labels: Mapping[str, str]) -> dict[str, int]:
        """Map ``{variable: value label}`` to ``{variable: value index}``."""
        return {name: self.value_index(name, str(label)) for name, label in labels.items()}

    def first_values(self) -> dict[str, int]:
        return {n: 0 for n in self.names}


def _check_assignment(space: VariableSpace, a: Assignment, scope: Sequence[str]) -> None:
    for name in a:
        space.index(name)
    for name in scope:
        if name not in a:
            raise ModelError(f"variable {name!r} is unbound")
        v = a[name]
        size = space.variable(name).size
        if not (isinstance(v, (int, np.integer)) and 0 <= v < size):
            raise ModelError(f"value index {v!r} out of range for {name!r} (size {size})")


def scope_index(space: VariableSpace, scope: Sequence[str], a: Assignment) -> int:
    """Row-major index of ``a`` restricted to ``scope``."""
    _check_assignment(space, a, scope)
    idx = 0
    for name in scope:
        idx = idx * space.variable(name).size + int(a[name])
    return idx


def state_index(space: VariableSpace, a: Assignment) -> int:
    return scope_index(space, space.names, a)


def state_from_index(space: VariableSpace, index: int) -> dict[str, int]:
    if not 0 <= index < space.n_states:
        raise ModelError(f"state index {index} out of range")
    return dict(zip(space.names, (int(i) for i in np.unravel_index(index, space.shape))))


def _as_table(values, n: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.size != n:
        raise ModelError(f"{what}: expected {n} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{what}: values must be finite")
    arr.setflags(write=False)
    return arr


class UtilityTable:
    """Dense utility function over a whole variable space."""

    def __init__(self, space: VariableSpace, values, *, force: bool = False):
        space.check_dense(force)
        self.space = space
        self.values = _as_table(values, space.n_states, "utility table")

    @classmethod
    def from_function(cls, space: VariableSpace, fn, *, force: bool = False) -> "UtilityTable":
        """Tabulate ``fn(assignment) -> float`` over every state."""
        space.check_dense(force)
        return cls(space, [fn(a) for a in space.assignments()], force=force)

    @property
    def tensor(self) -> np.ndarray:
        """The values viewed with one axis per variable."""
        return self.values.reshape(self.space.shape)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __repr__(self) -> str:
        return f"UtilityTable({list(self.space.names)}, n_states={self.values.size})"


@dataclass(frozen=True)
class Factor:
    scope: Scope
    table: np.ndarray = field(repr=False)


class AdditiveDecomposition:
    """A utility written as a sum of factors ``u = sum_i f_i(Z_i)``.

    Factor scopes are canonical and no scope may be a subset of another; use
    :func:`merge_factors` to normalize arbitrary factor lists.
    """

    def __init__(self, space: VariableSpace, factors: Iterable[tuple[Iterable[str], object]]):
        self.space = space
        fs = []
        for scope, table in factors:
            names = list(scope)
            sc = space.scope(names)
            if tuple(names) != sc:
                raise ModelError(f"factor scope {names} is not in canonical variable order")
            fs.append(Factor(sc, _as_table(table, math.prod(space.scope_shape(sc)), f"factor {list(sc)}")))
        for i, f in enumerate(fs):
            for j, g in enumerate(fs):
                if i != j and set(f.scope) <= set(g.scope):
                    raise ModelError(f"factor scope {list(f.scope)} is contained in {list(g.scope)}")
        self.factors: tuple[Factor, ...] = tuple(fs)

    @property
    def scopes(self) -> list[Scope]:
        return [f.scope for f in self.factors]

    def __repr__(self) -> str:
        return f"AdditiveDecomposition({[list(s) for s in self.scopes]})"

    def to_dense(self, *, force: bool = False) -> UtilityTable:
        self.space.check_dense(force)
        total = np.zeros(self.space.shape)
        for f in self.factors:
            total = total + expand(self.space, f.scope, f.table)
        return UtilityTable(self.space, total.reshape(-1), force=force)


def expand(space: VariableSpace, scope: Sequence[str], table: np.ndarray) -> np.ndarray:
    """View a table over ``scope`` as a broadcastable array over the full space."""
    shape = [1] * len(space)
    for name in scope:
        shape[space.index(name)] = space.variable(name).size
    return np.asarray(table).reshape(shape)


def merge_factors(space: VariableSpace, factors: Iterable[tuple[Iterable[str], object]]) -> AdditiveDecomposition:
    """Combine factors so that no scope is contained in another.

    Factors with identical scopes are summed; a factor whose scope lies inside
    another is folded into the first maximal scope (in canonical order) that
    contains it.
    """
    merged: dict[Scope, np.ndarray] = {}
    for scope, table in factors:
        sc = space.scope(scope)
        names = list(scope)
        arr = np.asarray(table, dtype=np.float64).reshape(space.scope_shape(names))
        arr = np.transpose(arr, [names.index(n) for n in sc]).reshape(-1)
        merged[sc] = merged.get(sc, 0.0) + arr
    order = sorted(merged, key=lambda s: [space.index(n) for n in s])
    maximal = [s for s in order if not any(set(s) < set(t) for t in order)]
    out = {s: merged[s].copy() for s in maximal}
    for s in order:
        if s in out:
            continue
        host = next(t for t in maximal if set(s) <= set(t))
        host_shape = space.scope_shape(host)
        lifted = merged[s].reshape([space.variable(n).size if n in s else 1 for n in host])
        out[host] = (out[host].reshape(host_shape) + lifted).reshape(-1)
    return AdditiveDecomposition(space, [(s, out[s]) for s in maximal])


def evaluate_dense(u: UtilityTable, a: Assignment) -> float:
    return float(u.values[state_index(u.space, a)])


def evaluate_decomposition(d: AdditiveDecomposition, a: Assignment) -> float:
    _check_assignment(d.space, a, d.space.names)
    return float(sum(f.table[scope_index(d.space, f.scope, a)] for f in d.factors))


def affine_transform(u: UtilityTable, a: float, b: float) -> UtilityTable:
    """Return ``a * u + b``; only positive ``a`` preserves preferences."""
    if not a > 0:
        raise ModelError(f"affine scale must be positive, got {a}")
    return UtilityTable(u.space, a * u.values + b, force=True)
