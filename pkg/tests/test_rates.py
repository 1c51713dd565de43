import itertools
import math

import numpy as np
import pytest
from oracle import reference_random_rates

from seqlearn import suites
from seqlearn.engine import EngineConfig
from seqlearn.families import complete, guinea_boosted_complete
from seqlearn.graph import build_graph
from seqlearn.rates import (
    OracleConfig,
    RateEstimate,
    conditional_rate,
    estimates_to_csv,
    exact_positional_rates,
    exact_random_rates,
    graph_rate,
    learning_oracle,
    non_learners,
    positional_rate,
    rate_random,
    summarize,
    vertex_rates,
    wilson_half_width,
)

CFG = EngineConfig(q=0.7)
K2 = build_graph(2, [(0, 1)])
PATH3 = build_graph(3, [(0, 1), (1, 2)])


def K(n):
    return build_graph(n, itertools.combinations(range(n), 2))


class TestEstimate:
    def test_interval_helpers(self):
        a = RateEstimate(0.8, 0.05, 100, "mc-full")
        b = RateEstimate(0.7, 0.04, 100, "mc-full")
        assert a.separated_above(b) and not b.separated_above(a)
        assert a.contains(0.76) and not a.contains(0.9)

    def test_summarize_normal(self):
        est = summarize([0, 1] * 50, "mc-full")
        assert est.mean == 0.5
        assert est.half_width == pytest.approx(1.959963984540054 * np.std([0, 1] * 50, ddof=1) / 10)

    def test_summarize_wilson_near_edge(self):
        est = summarize([1] * 99 + [0], "mc-full")
        assert est.half_width == pytest.approx(wilson_half_width(0.99, 100))
        assert est.half_width > 0

    def test_single_sample(self):
        assert summarize([1.0], "x").half_width == 1.0


class TestRandomRates:
    def test_single_vertex(self):
        est = rate_random(build_graph(1, []), 0, CFG)
        assert est.mean == pytest.approx(0.7) and est.method == "exact-enum" and est.half_width == 0

    def test_isolated(self):
        g = build_graph(2, [])
        assert rate_random(g, 1, CFG).mean == pytest.approx(0.7)
        assert graph_rate(g, CFG).mean == pytest.approx(0.7)

    def test_k2(self):
        assert exact_random_rates(K2, CFG) == pytest.approx([0.7, 0.7], abs=1e-12)
        assert graph_rate(K2, CFG).mean == pytest.approx(0.7, abs=1e-12)

    @pytest.mark.parametrize("g", [PATH3, K(3), build_graph(4, [(0, 1), (1, 2), (1, 3)]), K(4)])
    def test_matches_rational_reference(self, g):
        ref = reference_random_rates(g.n, g.edges(), 0.7)
        np.testing.assert_allclose(exact_random_rates(g, CFG), [float(r) for r in ref], atol=1e-12)

    def test_mc_agrees_with_enumeration(self):
        g = build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)])
        exact = exact_random_rates(g, CFG)
        for v in range(5):
            est = rate_random(g, v, CFG, trials=3000, rng=v, method="mc")
            assert est.method == "mc-orderings"
            assert abs(est.mean - exact[v]) <= 2 * est.half_width + 1e-9

    def test_tabulated_mc_close(self):
        g = K(5)
        exact = graph_rate(g, CFG).mean
        est = graph_rate(g, EngineConfig(q=0.7, mode="tabulated"), trials=3000, rng=4)
        assert est.method == "mc-full"
        assert abs(est.mean - exact) <= 2 * est.half_width

    def test_seeded(self):
        g = K(7)
        a = rate_random(g, 3, CFG, trials=50, rng=11)
        b = rate_random(g, 3, CFG, trials=50, rng=11)
        assert a == b

    def test_bad_method(self):
        with pytest.raises(ValueError):
            rate_random(K2, 0, CFG, method="fast")

    def test_vertex_rates_shared_orderings(self):
        g = build_graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
        exact = exact_random_rates(g, CFG)
        out = vertex_rates(g, [0, 2, 5], CFG, trials=2000, rng=1)
        assert sorted(out) == [0, 2, 5]
        for v, est in out.items():
            assert abs(est.mean - exact[v]) <= 2 * est.half_width + 1e-9

    def test_larger_graph_uses_sampling(self):
        est = graph_rate(complete(8).graph, CFG, trials=20, rng=0)
        assert est.samples == 20 and est.method == "mc-orderings"


class TestPositional:
    def test_first_is_q(self):
        for g in (PATH3, K(4)):
            for v in range(g.n):
                assert positional_rate(g, v, CFG, 1).mean == pytest.approx(0.7)

    def test_k3_monotone(self):
        r = [positional_rate(K(3), 0, CFG, i).mean for i in (1, 2, 3)]
        assert r[0] == pytest.approx(0.7)
        assert r[0] <= r[1] + 1e-12 <= r[2] + 2e-12

    def test_path_middle_last(self):
        # both neighbours act first as sources; majority of three signals
        assert positional_rate(PATH3, 1, CFG, 3).mean == pytest.approx(0.784, abs=1e-12)

    def test_index_range(self):
        with pytest.raises(ValueError):
            positional_rate(PATH3, 0, CFG, 4)

    def test_mc_route(self):
        g = complete(8).graph
        est = positional_rate(g, 0, CFG, 1, trials=30, rng=2)
        assert est.mean == pytest.approx(0.7, abs=0.35)

    def test_table_averages_to_random_rate(self):
        g = build_graph(5, [(0, 1), (1, 2), (2, 3), (1, 4)])
        np.testing.assert_allclose(exact_positional_rates(g, CFG).mean(axis=1), exact_random_rates(g, CFG), atol=1e-12)


class TestConditional:
    g = build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)])

    def test_always_true(self):
        exact = exact_random_rates(self.g, CFG)[2]
        res = conditional_rate(self.g, 2, CFG, lambda o: True, method="enumerate")
        assert res.estimate.mean == pytest.approx(exact) and res.event_probability == 1.0
        sampled = conditional_rate(self.g, 2, CFG, lambda o: True, trials=2000, rng=3)
        assert abs(sampled.estimate.mean - exact) <= 2 * sampled.estimate.half_width

    def test_first_position(self):
        res = conditional_rate(self.g, 2, CFG, lambda o: o.index(2) == 1, method="enumerate")
        assert res.estimate.mean == pytest.approx(0.7)
        assert res.event_probability == pytest.approx(1 / 5)
        sampled = conditional_rate(self.g, 2, CFG, lambda o: o.index(2) == 1, trials=100, rng=1)
        assert sampled.estimate.mean == pytest.approx(0.7)
        assert 0.1 < sampled.event_probability < 0.3

    def test_impossible_event(self):
        with pytest.raises(ValueError):
            conditional_rate(self.g, 2, CFG, lambda o: False, method="enumerate")
        with pytest.raises(ValueError):
            conditional_rate(self.g, 2, CFG, lambda o: False, trials=5, rng=0, max_attempts=50)

    def test_bound_suite(self):
        rep = suites.conditional_bound()
        assert rep.passed and rep.checked > 100


class TestOracle:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(kind="psychic")
        with pytest.raises(ValueError):
            OracleConfig(t=1.0)
        with pytest.raises(ValueError):
            OracleConfig(kind="labels")

    def test_heuristic_special(self):
        inst = guinea_boosted_complete(10, 1, 25)
        (special,) = inst.role("special")
        assert learning_oracle(inst.graph, special, OracleConfig(tau=10)) == 1

    def test_heuristic_plain(self):
        assert learning_oracle(complete(12).graph, 0, OracleConfig(tau=10)) == 0

    def test_mc_isolated(self):
        g = build_graph(1, [])
        assert learning_oracle(g, 0, OracleConfig(kind="mc", t=0.9, trials=100), EngineConfig(q=0.6), rng=0) == 0

    def test_exact_and_labels(self):
        g = build_graph(5, [(0, i) for i in range(1, 5)])
        rates = exact_random_rates(g, CFG)
        t = float(rates[0]) - 1e-9
        assert learning_oracle(g, 0, OracleConfig(kind="exact", t=t), CFG) == 1
        assert learning_oracle(g, 1, OracleConfig(kind="exact", t=t), CFG) == int(rates[1] >= t)
        labels = OracleConfig(kind="labels", labels=frozenset({2}))
        assert non_learners(g, labels) == [0, 1, 3, 4]

    def test_exact_oracle_caps(self):
        with pytest.raises(ValueError):
            learning_oracle(complete(7).graph, 0, OracleConfig(kind="exact"))


def test_csv_rows():
    text = estimates_to_csv([(0, RateEstimate(0.7, 0.0, 1, "exact-enum"))], 0.7, 5)
    header, row = text.strip().splitlines()
    assert header == "vertex,method,mean,half_width,samples,q,seed"
    assert row == "0,exact-enum,0.7000000000,0.0000000000,1,0.7,5"


def test_hoeffding_style_budget_is_integer():
    # trials are counts; a float budget is rejected early
    with pytest.raises(ValueError):
        graph_rate(complete(8).graph, CFG, trials=0, rng=0)
    assert math.isfinite(graph_rate(complete(8).graph, CFG, trials=3, rng=0).mean)
