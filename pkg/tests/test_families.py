import itertools

import pytest

from seqlearn import engine
from seqlearn.engine import EngineConfig
from seqlearn.families import (
    FAMILY_NAMES,
    Gadget,
    binary_tree_gadget,
    celebrity,
    complete,
    embedded_boosted_complete,
    erdos_renyi,
    fragile_high_q,
    fragile_low_q,
    generate,
    guinea_boosted_complete,
    path,
    preset_k_w,
    star,
    star_forest,
)
from seqlearn.graph import Ordering, OrientedView, build_graph, induced_subgraph
from seqlearn.robustness import follows


def in_degree(inst, v):
    return len(OrientedView(inst.graph, inst.strategic_order).prior_neighbors(v))


def isomorphic(a, b):
    if a.n != b.n or a.num_edges != b.num_edges:
        return False
    target = set(b.edges())
    return any(
        {(min(p[u], p[v]), max(p[u], p[v])) for u, v in a.edges()} == target for p in itertools.permutations(range(a.n))
    )


class TestSimple:
    @pytest.mark.parametrize("n,m", [(1, 0), (3, 3), (5, 10)])
    def test_complete(self, n, m):
        g = complete(n).graph
        assert g.num_edges == m and set(g.degrees) <= {n - 1}

    def test_path_and_star(self):
        assert path(4).graph.num_edges == 3
        s = star(5)
        assert s.graph.degree(0) == 5 and s.role("center") == [0]

    def test_star_forest(self):
        inst = star_forest([2, 3])
        assert inst.graph.n == 7 and inst.role("center") == [0, 3]
        with pytest.raises(ValueError):
            star_forest([0])

    def test_erdos_renyi_seeded(self):
        assert erdos_renyi(20, 0.1, 7).graph == erdos_renyi(20, 0.1, 7).graph
        assert erdos_renyi(10, 0.0, 1).graph.num_edges == 0
        assert erdos_renyi(10, 1.0, 1).graph.num_edges == 45

    def test_celebrity(self):
        inst = celebrity(6, 2)
        g = inst.graph
        assert g.num_edges == 8
        assert inst.role("celebrity") == [0, 1]
        assert all(g.degree(c) == 4 for c in (0, 1)) and all(g.degree(v) == 2 for v in range(2, 6))
        with pytest.raises(ValueError):
            celebrity(3, 3)

    def test_guinea(self):
        inst = guinea_boosted_complete(10, 2, 3)
        g = inst.graph
        assert g.n == 16 and g.num_edges == 45 + 6
        assert all(g.degree(z) == 1 for z in inst.role("guinea"))
        assert all(g.degree(s) == 9 + 3 for s in inst.role("special"))
        assert g.neighbors(10) == (0,) and g.neighbors(13) == (1,)


class TestGadgets:
    def test_tree_sizes(self):
        g2 = binary_tree_gadget(2)
        assert g2.graph.n == 3 and g2.apex == 2
        assert len(OrientedView(g2.graph, g2.internal_order).prior_neighbors(g2.apex)) == 2
        assert binary_tree_gadget(3).graph.n == 7

    def test_apex_beats_single_signal_and_grows(self):
        rates = []
        for d in (1, 2, 3, 4):
            gd = binary_tree_gadget(d)
            rates.append(engine.exact_rate_fixed(OrientedView(gd.graph, gd.internal_order), gd.apex, EngineConfig(q=0.7)))
        assert rates[0] == pytest.approx(0.7)
        assert all(r > 0.7 for r in rates[1:])
        assert all(a <= b + 1e-12 for a, b in zip(rates, rates[1:]))

    def test_apex_must_be_last(self):
        gd = binary_tree_gadget(2)
        with pytest.raises(ValueError):
            Gadget(gd.graph, Ordering.from_sequence([2, 0, 1]), 2)

    def test_embedding(self):
        gd = binary_tree_gadget(2)
        inst = embedded_boosted_complete(10, 2, gd)
        g = inst.graph
        assert g.n == 14
        assert inst.role("apex") == [0, 1]
        bodies = [set(g.neighbors(a)) - set(range(10)) for a in (0, 1)]
        assert not bodies[0] & bodies[1]
        for a, body in zip((0, 1), bodies):
            sub, _ = induced_subgraph(g, sorted(body) + [a])
            assert isomorphic(sub, gd.graph)
        order = inst.strategic_order.order
        assert order[:3] == (10, 11, 0) and order[3:6] == (12, 13, 1)


class TestFragileLow:
    def test_default_size(self):
        inst = fragile_low_q(4)
        assert inst.graph.n == 14
        assert fragile_low_q(4, tail=3).graph.n == 17

    def test_in_degrees(self):
        inst = fragile_low_q(4)
        (v,) = inst.role("v")
        (u0,) = inst.role("u0")
        assert in_degree(inst, v) == 4
        assert all(in_degree(inst, w) == 2 for w in inst.role("w"))
        assert in_degree(inst, u0) == 4

    def test_high_q_layer_copies_v(self):
        inst = fragile_low_q(3)
        tables = engine.build_tables_exact(OrientedView(inst.graph, inst.strategic_order), EngineConfig(q=0.85))
        (v,) = inst.role("v")
        assert all(follows(tables[w], v) for w in inst.role("w"))

    def test_regime_change_around_threshold(self):
        inst = fragile_low_q(2)
        view = OrientedView(inst.graph, inst.strategic_order)
        (v,) = inst.role("v")
        below = engine.build_tables_exact(view, EngineConfig(q=0.78))
        above = engine.build_tables_exact(view, EngineConfig(q=0.80))
        assert not any(follows(below[w], v) for w in inst.role("w"))
        assert all(follows(above[w], v) for w in inst.role("w"))

    def test_chain_copies_u0(self):
        inst = fragile_low_q(2, tail=2)
        view = OrientedView(inst.graph, inst.strategic_order)
        tables = engine.build_tables_exact(view, EngineConfig(q=0.7))
        (u0,) = inst.role("u0")
        assert tables[u0 + 2].rate() >= tables[u0].rate() - 1e-12


class TestFragileHigh:
    def test_size_with_tail(self):
        assert fragile_high_q(3).graph.n == 3 + 3 * 5 + 3 + 1
        assert fragile_high_q(3, tail=2).graph.n == 24

    def test_w_in_degree(self):
        inst = fragile_high_q(3)
        assert all(in_degree(inst, w) == 4 for w in inst.role("w"))

    def test_shared_sources_dominate_at_low_q(self):
        inst = fragile_high_q(3)
        tables = engine.build_tables_exact(OrientedView(inst.graph, inst.strategic_order), EngineConfig(q=0.6))
        xs = inst.role("x")
        for w in inst.role("w"):
            t = tables[w]
            idx = [t.observed.index(x) for x in xs]
            for key in range(t.actions.size):
                bits = {(key >> (j + 1)) & 1 for j in idx}
                if len(bits) == 1:
                    assert t.actions[key] == bits.pop()

    def test_u0_rate_rises_with_q(self):
        inst = fragile_high_q(3)
        view = OrientedView(inst.graph, inst.strategic_order)
        (u0,) = inst.role("u0")
        rates = [engine.exact_rate_fixed(view, u0, EngineConfig(q=q)) for q in (0.6, 0.7, 0.8, 0.9)]
        assert all(a < b for a, b in zip(rates, rates[1:]))


class TestDispatch:
    def test_names(self):
        assert {"complete", "celebrity", "guinea", "fragile-low-q", "fragile-high-q", "embedded", "erdos-renyi", "star-forest"} <= set(FAMILY_NAMES)

    def test_generate(self):
        assert generate("guinea", ["20", "3", "7"]).graph.n == 41
        assert generate("erdos-renyi", ["10", "0.5"], 3).graph == erdos_renyi(10, 0.5, 3).graph
        assert generate("star-forest", ["2", "2"]).graph.n == 6
        with pytest.raises(KeyError):
            generate("nope", [])
        with pytest.raises(ValueError):
            generate("celebrity", ["40"])

    def test_preset(self):
        assert preset_k_w(1024) == 10 and preset_k_w(4) == 3

    def test_sidecar(self):
        side = fragile_low_q(2).sidecar()
        assert side["strategic_order"] == list(range(10))
        assert side["roles"]["4"] == "v"
        assert complete(3).sidecar()["strategic_order"] is None


def test_graphs_are_simple():
    for inst in (celebrity(12, 3), guinea_boosted_complete(8, 2, 4), fragile_high_q(2, 3), embedded_boosted_complete(9, 3, binary_tree_gadget(3))):
        g = inst.graph
        assert build_graph(g.n, g.edges()) == build_graph(g.n, g.edges(), {})
        assert all(v not in g.neighbors(v) for v in range(g.n))
