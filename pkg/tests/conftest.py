import numpy as np
import pytest

from utilgraph import BayesNet, UtilityTable, VariableSpace


def binary_space(n):
    return VariableSpace.binary([f"v{i}" for i in range(n)])


def utility_from_terms(space, terms):
    """Dense table from ``[(scope_names, table_over_scope), ...]``."""
    t = np.zeros(space.shape)
    for scope, table in terms:
        shape = [1] * len(space)
        for n in scope:
            shape[space.index(n)] = space.variable(n).size
        t = t + np.asarray(table, float).reshape(shape)
    return UtilityTable(space, t.reshape(-1))


def planted_utility(rng, n, max_terms=None, max_arity=3, space=None):
    """Sum of random factors over random small scopes."""
    space = space or binary_space(n)
    names = space.names
    k = rng.integers(1, (max_terms or n) + 1)
    terms = []
    for _ in range(k):
        size = int(rng.integers(1, min(max_arity, n) + 1))
        scope = sorted(rng.choice(n, size=size, replace=False))
        sc = [names[i] for i in scope]
        terms.append((sc, rng.normal(size=space.scope_shape(sc))))
    return utility_from_terms(space, terms)


def random_utility(rng, n, space=None):
    space = space or binary_space(n)
    return UtilityTable(space, rng.normal(size=space.n_states))


def random_bayes_net(rng, space, max_parents=2, zeros=False):
    names = space.names
    cpts = {}
    for i, n in enumerate(names):
        k = int(rng.integers(0, min(max_parents, i) + 1))
        parents = sorted(rng.choice(i, size=k, replace=False)) if k else []
        pnames = [names[j] for j in parents]
        shape = space.scope_shape(pnames) + (space.variable(n).size,)
        t = rng.dirichlet(np.ones(shape[-1]), size=int(np.prod(shape[:-1]))).reshape(shape)
        cpts[n] = (pnames, t)
    return BayesNet(space, cpts)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def hw():
    space = VariableSpace([("health", ["H", "Hbar"]), ("wealth", ["W", "Wbar"])])
    return UtilityTable(space, [5, 2, 1, 0])


@pytest.fixture
def xyz():
    return VariableSpace.binary("xyz")


@pytest.fixture
def chain(xyz):
    return UtilityTable.from_function(xyz, lambda a: a["x"] * a["y"] + a["y"] * a["z"])


@pytest.fixture
def triangle(xyz):
    return UtilityTable.from_function(xyz, lambda a: a["x"] * a["y"] + a["y"] * a["z"] + a["x"] * a["z"])


ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
