"""JSON model files: utilities, Bayesian networks, distributions, action sets.

Utility file::

    {"variables": [{"name": "health", "domain": ["H", "Hbar"]}, ...],
     "utility": {"type": "dense", "order": ["health", "wealth"], "values": [...]}}

or with ``{"type": "factored", "factors": [{"scope": ["x", "y"], "values": [...]}]}``.
Value arrays are row-major in the listed variable order, last fastest.

Bayesian network file::

    {"variables": [...], "cpts": [{"child": "y", "parents": ["x"], "table": [...]}]}

Distribution file ``{"order": [...], "probs": [...]}`` and action file
``{"actions": [{"label": "A", "evidence": {"wealth": "W"}}]}`` refer to the
variables of an accompanying utility or network file.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .expectation import ActionSet, BayesNet, ExplicitDistribution
from .model import (
    AdditiveDecomposition,
    ModelError,
    UtilityTable,
    VariableSpace,
    merge_factors,
)


def _read(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from None


def _keys(obj: Any, what: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ModelError(f"{what} must be a JSON object")
    unknown = set(obj) - required - optional
    if unknown:
        raise ModelError(f"{what}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ModelError(f"{what}: missing field(s) {sorted(missing)}")
    return obj


def _numbers(values: Any, what: str) -> np.ndarray:
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    ):
        raise ModelError(f"{what} must be a list of numbers")
    return np.asarray(values, dtype=np.float64)


def parse_space(variables: Any) -> VariableSpace:
    if not isinstance(variables, list):
        raise ModelError("variables must be a list")
    out = []
    for i, v in enumerate(variables):
        _keys(v, f"variables[{i}]", {"name", "domain"})
        if not isinstance(v["domain"], list) or not all(isinstance(d, str) for d in v["domain"]):
            raise ModelError(f"variables[{i}].domain must be a list of strings")
        out.append((v["name"], v["domain"]))
    return VariableSpace(out)


def space_to_json(space: VariableSpace) -> list[dict]:
    return [{"name": v.name, "domain": list(v.domain)} for v in space.variables]


def _reorder(space: VariableSpace, order: list[str], values: np.ndarray, what: str) -> np.ndarray:
    canon = space.scope(order)
    expected = int(np.prod(space.scope_shape(order)))
    if values.size != expected:
        raise ModelError(f"{what}: expected {expected} values, got {values.size}")
    t = values.reshape(space.scope_shape(order))
    return np.transpose(t, [order.index(n) for n in canon]).reshape(-1)


def parse_utility(obj: Any, *, force: bool = False) -> UtilityTable | AdditiveDecomposition:
    _keys(obj, "utility file", {"variables", "utility"})
    space = parse_space(obj["variables"])
    body = obj["utility"]
    if not isinstance(body, dict) or body.get("type") not in ("dense", "factored"):
        raise ModelError('utility.type must be "dense" or "factored"')
    if body["type"] == "dense":
        _keys(body, "utility", {"type", "order", "values"})
        order = body["order"]
        if not isinstance(order, list) or sorted(order) != sorted(space.names) or len(set(order)) != len(order):
            raise ModelError("utility.order must list every variable exactly once")
        space.check_dense(force)
        values = _reorder(space, order, _numbers(body["values"], "utility.values"), "utility.values")
        return UtilityTable(space, values, force=force)
    _keys(body, "utility", {"type", "factors"})
    if not isinstance(body["factors"], list):
        raise ModelError("utility.factors must be a list")
    factors = []
    for i, f in enumerate(body["factors"]):
        _keys(f, f"utility.factors[{i}]", {"scope", "values"})
        scope = f["scope"]
        if not isinstance(scope, list):
            raise ModelError(f"utility.factors[{i}].scope must be a list")
        space.scope(scope)
        vals = _reorder(space, scope, _numbers(f["values"], f"utility.factors[{i}].values"), f"utility.factors[{i}]")
        factors.append((space.scope(scope), vals))
    return merge_factors(space, factors)


def load_utility(path, *, force: bool = False) -> UtilityTable | AdditiveDecomposition:
    return parse_utility(_read(path), force=force)


def utility_to_json(u: UtilityTable | AdditiveDecomposition) -> dict:
    if isinstance(u, UtilityTable):
        body = {"type": "dense", "order": list(u.space.names), "values": u.values.tolist()}
    else:
        body = {
            "type": "factored",
            "factors": [{"scope": list(f.scope), "values": f.table.tolist()} for f in u.factors],
        }
    return {"variables": space_to_json(u.space), "utility": body}


def parse_bayes_net(obj: Any, space: VariableSpace | None = None) -> BayesNet:
    _keys(obj, "network file", {"cpts"}, {"variables"})
    if "variables" in obj:
        own = parse_space(obj["variables"])
        if space is not None and own != space:
            raise ModelError("network variables differ from the utility variables")
        space = own
    if space is None:
        raise ModelError("network file needs a variables list")
    if not isinstance(obj["cpts"], list):
        raise ModelError("cpts must be a list")
    cpts = {}
    for i, c in enumerate(obj["cpts"]):
        _keys(c, f"cpts[{i}]", {"child", "table"}, {"parents"})
        child = c["child"]
        if child in cpts:
            raise ModelError(f"duplicate CPT for {child!r}")
        space.index(child)
        cpts[child] = (c.get("parents", []), _numbers(c["table"], f"cpts[{i}].table"))
    return BayesNet(space, cpts)


def load_bayes_net(path, space: VariableSpace | None = None) -> BayesNet:
    return parse_bayes_net(_read(path), space)


def bayes_net_to_json(bn: BayesNet) -> dict:
    return {
        "variables": space_to_json(bn.space),
        "cpts": [
            {"child": n.child, "parents": list(n.parents), "table": n.table.reshape(-1).tolist()}
            for n in bn.nodes.values()
        ],
    }


def parse_distribution(obj: Any, space: VariableSpace) -> ExplicitDistribution:
    _keys(obj, "distribution file", {"order", "probs"})
    order = obj["order"]
    if not isinstance(order, list) or sorted(order) != sorted(space.names) or len(set(order)) != len(order):
        raise ModelError("order must list every variable exactly once")
    return ExplicitDistribution(space, _reorder(space, order, _numbers(obj["probs"], "probs"), "probs"))


def load_distribution(path, space: VariableSpace) -> ExplicitDistribution:
    return parse_distribution(_read(path), space)


def parse_evidence(obj: Any, space: VariableSpace, what: str = "evidence") -> dict[str, int]:
    if not isinstance(obj, dict) or not all(isinstance(v, str) for v in obj.values()):
        raise ModelError(f"{what} must map variable names to value labels")
    return space.parse_assignment(obj)


def parse_actions(obj: Any, space: VariableSpace) -> ActionSet:
    _keys(obj, "action file", {"actions"})
    if not isinstance(obj["actions"], list):
        raise ModelError("actions must be a list")
    out = []
    for i, a in enumerate(obj["actions"]):
        _keys(a, f"actions[{i}]", {"label"}, {"evidence"})
        if not isinstance(a["label"], str):
            raise ModelError(f"actions[{i}].label must be a string")
        out.append((a["label"], parse_evidence(a.get("evidence", {}), space, f"actions[{i}].evidence")))
    return ActionSet(tuple(out))


def load_actions(path, space: VariableSpace) -> ActionSet:
    return parse_actions(_read(path), space)
