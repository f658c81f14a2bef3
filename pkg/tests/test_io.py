import json

import numpy as np
import pytest

from utilgraph import AdditiveDecomposition, ModelError, UtilityTable
from utilgraph import io

HW = {
    "variables": [{"name": "health", "domain": ["H", "Hbar"]}, {"name": "wealth", "domain": ["W", "Wbar"]}],
    "utility": {"type": "dense", "order": ["health", "wealth"], "values": [5, 2, 1, 0]},
}


def with_utility(body):
    return {"variables": HW["variables"], "utility": body}


class TestUtilityFile:
    def test_dense(self):
        u = io.parse_utility(HW)
        assert isinstance(u, UtilityTable)
        assert u.values.tolist() == [5, 2, 1, 0]

    def test_dense_reordered(self):
        u = io.parse_utility(with_utility({"type": "dense", "order": ["wealth", "health"], "values": [5, 1, 2, 0]}))
        assert u.values.tolist() == [5, 2, 1, 0]

    def test_factored(self):
        d = io.parse_utility(
            with_utility(
                {"type": "factored", "factors": [{"scope": ["wealth", "health"], "values": [0, 1, 2, 3]}, {"scope": ["health"], "values": [10, 20]}]}
            )
        )
        assert isinstance(d, AdditiveDecomposition)
        assert d.scopes == [("health", "wealth")]
        np.testing.assert_array_equal(d.factors[0].table, [10, 12, 21, 23])

    @pytest.mark.parametrize(
        "obj",
        [
            {**HW, "extra": 1},
            with_utility({**HW["utility"], "bogus": True}),
            with_utility({"type": "dense", "order": ["health"], "values": [5, 2]}),
            with_utility({"type": "dense", "order": ["health", "health"], "values": [5, 2, 1, 0]}),
            with_utility({"type": "dense", "order": ["health", "wealth"], "values": [5, 2, 1]}),
            with_utility({"type": "dense", "order": ["health", "wealth"], "values": [5, 2, 1, "x"]}),
            with_utility({"type": "sparse"}),
            with_utility({"type": "factored", "factors": [{"scope": ["health"], "values": [1, 2, 3]}]}),
            with_utility({"type": "factored", "factors": [{"scope": ["nobody"], "values": [1, 2]}]}),
            {"variables": HW["variables"] * 2, "utility": HW["utility"]},
            {"variables": [{"name": "x", "domain": ["a"]}], "utility": {"type": "factored", "factors": []}},
        ],
    )
    def test_rejects(self, obj):
        with pytest.raises(ModelError):
            io.parse_utility(obj)

    def test_round_trip(self, tmp_path):
        u = io.parse_utility(HW)
        path = tmp_path / "u.json"
        path.write_text(json.dumps(io.utility_to_json(u)))
        assert io.load_utility(path).values.tolist() == u.values.tolist()

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        with pytest.raises(ModelError):
            io.load_utility(path)


class TestOtherFiles:
    def test_bayes_net(self):
        space = io.parse_utility(HW).space
        bn = io.parse_bayes_net(
            {"cpts": [{"child": "health", "table": [0.4, 0.6]}, {"child": "wealth", "parents": ["health"], "table": [1, 0, 0.5, 0.5]}]},
            space,
        )
        assert bn.nodes["wealth"].parents == ("health",)
        back = io.parse_bayes_net(io.bayes_net_to_json(bn))
        np.testing.assert_array_equal(back.nodes["wealth"].table, bn.nodes["wealth"].table)

    def test_bayes_net_rejects(self):
        space = io.parse_utility(HW).space
        with pytest.raises(ModelError):
            io.parse_bayes_net({"cpts": [{"child": "health", "table": [0.4, 0.6]}]}, space)
        with pytest.raises(ModelError):
            io.parse_bayes_net({"cpts": [], "foo": 1}, space)
        with pytest.raises(ModelError):
            io.parse_bayes_net(
                {"cpts": [{"child": "health", "table": [0.4, 0.6]}, {"child": "health", "table": [0.4, 0.6]}]}, space
            )

    def test_distribution(self):
        space = io.parse_utility(HW).space
        p = io.parse_distribution({"order": ["wealth", "health"], "probs": [0.1, 0.2, 0.3, 0.4]}, space)
        np.testing.assert_allclose(p.probs, [0.1, 0.3, 0.2, 0.4])
        with pytest.raises(ModelError):
            io.parse_distribution({"order": ["wealth", "health"], "probs": [0.5, 0.6, 0, 0]}, space)

    def test_actions(self):
        space = io.parse_utility(HW).space
        acts = io.parse_actions({"actions": [{"label": "A", "evidence": {"wealth": "Wbar"}}, {"label": "B"}]}, space)
        assert acts.actions == (("A", {"wealth": 1}), ("B", {}))
        with pytest.raises(ModelError):
            io.parse_actions({"actions": [{"label": "A", "evidence": {"wealth": "rich"}}]}, space)
