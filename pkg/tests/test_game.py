import itertools
import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hatguess.game import (
    Status,
    StrategyTable,
    View,
    correct_guessers,
    decide_winnable,
    hg_exact,
    lift_strategy,
    modular_strategy,
    reduce_instance,
    verify_strategy,
    view_of,
    view_rank,
)
from hatguess.graph import Graph, complete, cycle, empty, path


def adj_of(G):
    return [G.neighbors(v).tolist() for v in range(G.n)]


def tables_of(S):
    return [t.tolist() for t in S.tables]


small_graphs = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2).map(
        lambda bits: Graph.from_edges(
            n, [e for e, b in zip(itertools.combinations(range(n), 2), bits) if b]
        )
    )
)


def test_views():
    assert view_of(path(3), 1, [2, 0, 1]) == View(1, (2, 1))
    assert view_of(empty(3), 0, [1, 2, 0]).neighbor_colors == ()
    assert view_of(complete(3), 2, [0, 1, 2]).neighbor_colors == (0, 1)
    assert view_rank((2, 1), 3) == 7
    with pytest.raises(ValueError):
        view_of(path(3), 0, [0, 1])


def test_verify_examples():
    K2 = complete(2)
    # v0 repeats what it sees, v1 guesses the other color
    S = StrategyTable(2, [[1], [0]], [[0, 1], [1, 0]])
    assert verify_strategy(K2, 2, S).winning
    out = verify_strategy(empty(2), 2, StrategyTable.constant(empty(2), 2, 0))
    assert not out.winning and out.counterexample == (1, 1)
    assert verify_strategy(complete(5), 1, modular_strategy(5, 1)).winning


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_modular_strategy_wins_complete(n):
    S = modular_strategy(n, n)
    assert verify_strategy(complete(n), n, S).winning
    assert oracles.wins_everywhere(n, adj_of(complete(n)), n, tables_of(S))


def test_verify_rejects_mismatched_tables():
    S = modular_strategy(3, 3)
    with pytest.raises(ValueError):
        verify_strategy(path(3), 3, S)
    with pytest.raises(ValueError):
        verify_strategy(complete(3), 2, S)
    with pytest.raises(ValueError):
        StrategyTable(2, [[1], [0]], [[0, 2], [0, 0]])


@given(small_graphs, st.integers(2, 3), st.data())
@settings(max_examples=80, deadline=None)
def test_counterexamples_are_real(G, q, data):
    tables = [
        data.draw(st.lists(st.integers(0, q - 1), min_size=q ** G.degree(v), max_size=q ** G.degree(v)))
        for v in range(G.n)
    ]
    S = StrategyTable(q, [G.neighbors(v) for v in range(G.n)], tables)
    out = verify_strategy(G, q, S)
    lost = oracles.lost_assignments(G.n, adj_of(G), q, tables)
    assert out.winning == (not lost)
    if lost:
        assert out.counterexample == lost[0]
        a = out.counterexample
        for v in range(G.n):
            assert S.guess(v, [a[w] for w in G.neighbors(v)]) != a[v]


def test_correct_guessers_shape():
    S = modular_strategy(3, 3)
    a = np.array([[0, 0, 0], [1, 2, 0]])
    m = correct_guessers(complete(3), S, a)
    assert m.shape == (2, 3) and m.sum(axis=1).tolist() == [1, 1]


def test_strategy_json_roundtrip():
    S = modular_strategy(4, 3)
    doc = json.loads(S.to_json())
    assert doc["schema"] == "strategy-v1" and doc["q"] == 3
    assert len(doc["strategy"]["0"]) == 27
    assert StrategyTable.from_json(S.to_json()) == S
    assert StrategyTable.from_json(S.to_json(), complete(4)) == S
    doc["strategy"].pop("3")
    with pytest.raises(ValueError):
        StrategyTable.from_json(json.dumps(doc))


def test_decide_complete_two_against_brute_force():
    K2 = complete(2)
    a = adj_of(K2)
    assert oracles.enumerate_winnable(2, a, 2) is True
    assert oracles.enumerate_winnable(2, a, 3) is False
    yes = decide_winnable(K2, 2)
    assert yes.status is Status.WINNABLE and verify_strategy(K2, 2, yes.strategy).winning
    assert decide_winnable(K2, 3).status is Status.UNWINNABLE


def test_decide_trivial_cases():
    for G in (empty(3), path(4), complete(4)):
        d = decide_winnable(G, 1)
        assert d.winnable and set(np.concatenate(d.strategy.tables).tolist()) == {0}
    assert decide_winnable(empty(4), 2).status is Status.UNWINNABLE
    assert decide_winnable(empty(0), 2).status is Status.UNWINNABLE
    with pytest.raises(ValueError):
        decide_winnable(path(2), 0)
    with pytest.raises(ValueError):
        decide_winnable(path(2), 2, engine="magic")


@pytest.mark.parametrize("engine", ["sat", "search"])
@pytest.mark.parametrize("reduce", [True, False])
def test_engines_agree_on_cycle(engine, reduce):
    C4 = cycle(4)
    yes = decide_winnable(C4, 3, engine=engine, reduce=reduce)
    assert yes.winnable and verify_strategy(C4, 3, yes.strategy).winning
    no = decide_winnable(C4, 4, engine=engine, reduce=reduce)
    assert no.status is Status.UNWINNABLE


@given(small_graphs, st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_decide_matches_oracle(G, q):
    # q <= 2 or q >= n keeps the oracle on its fast exhaustive paths
    if 2 < q < G.n:
        q = 2
    want = oracles.oracle_winnable(G.n, adj_of(G), q)
    for reduce in (True, False):
        d = decide_winnable(G, q, reduce=reduce)
        assert d.status is (Status.WINNABLE if want else Status.UNWINNABLE)
        if d.winnable:
            assert oracles.wins_everywhere(G.n, adj_of(G), q, tables_of(d.strategy))


def test_reduce_instance_rules():
    # triangle with a pendant path: peeled back to the triangle at q >= 3
    G = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)])
    assert reduce_instance(G, 3) == [[0, 1, 2]]
    assert reduce_instance(G, 2) == [[0, 1, 2, 3, 4]]
    assert reduce_instance(path(7), 3) == []
    two = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert reduce_instance(two, 3) == [[0, 1, 2], [3, 4, 5]]


def test_lift_strategy():
    G = Graph.from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)])
    S = modular_strategy(3, 3)
    L = lift_strategy(G, [0, 1, 2], S)
    assert verify_strategy(G, 3, L).winning
    assert oracles.wins_everywhere(5, adj_of(G), 3, tables_of(L))


def test_hg_examples_and_evidence():
    r = hg_exact(complete(3), 5)
    assert r.exact and r.value == 3
    assert [e.status for e in r.evidence] == [Status.WINNABLE] * 3 + [Status.UNWINNABLE]
    assert hg_exact(path(3), 4).value == 2
    assert hg_exact(complete(1), 3).value == 1
    capped = hg_exact(complete(4), 3)
    assert capped.capped and capped.value == 3


def test_budget_is_reported_not_guessed():
    # one node is not enough for q = 2, 3; q = 4 falls to propagation alone
    r = hg_exact(cycle(4), 4, max_nodes=1, engine="search")
    assert not r.exact and r.lower <= 3 <= r.upper
    assert Status.BUDGET_EXCEEDED in [d.status for d in r.evidence]
    r = hg_exact(cycle(4), 3, max_nodes=1, engine="search")
    assert not r.exact and r.upper is None
    with pytest.raises(ValueError):
        r.value


def test_atlas_invariants_up_to_four_vertices():
    for g in nx.graph_atlas_g()[1:]:
        n = g.number_of_nodes()
        if n > 4:
            break
        G = Graph.from_edges(n, g.edges())
        r = hg_exact(G, n + 1)
        assert r.exact and 1 <= r.value <= n
        assert r.value == oracles.oracle_hg(n, adj_of(G), n + 1)
        # q-monotonicity of the evidence trail
        st_ = [e.status for e in r.evidence]
        assert st_ == [Status.WINNABLE] * r.value + [Status.UNWINNABLE]
