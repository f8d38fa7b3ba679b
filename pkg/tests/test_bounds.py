import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hatguess.bounds import (
    BoundCertificate,
    book_lower_value,
    choose_d,
    chromatic_upper_value,
    dsatur_coloring,
    find_book_embedding,
    greedy_clique,
    lower_bound_certificate,
    max_clique_exact,
    required_petals,
    upper_bound_certificate,
    verify_certificate,
)
from hatguess.graph import Graph, book, complete, cycle, empty, path, sample_gnp


def adj_of(G):
    return [G.neighbors(v).tolist() for v in range(G.n)]


def test_choose_d_examples():
    assert choose_d(10**4, Fraction(1, 2)) == 2
    assert choose_d(20000, Fraction(4, 5)) == 3
    assert choose_d(10, Fraction(1, 10)) == 0
    assert choose_d(20000, "0.8") == 3
    with pytest.raises(ValueError):
        choose_d(100, 1)


@given(st.integers(1, 10**12), st.fractions(min_value=0, max_value=1).filter(lambda p: 0 < p < 1))
@settings(max_examples=200, deadline=None)
def test_choose_d_matches_scan(n, p):
    assert choose_d(n, p) == oracles.choose_d_oracle(n, p)


def test_book_values():
    assert [book_lower_value(d) for d in (1, 2, 3, 4)] == [1, 1, 3, 16]
    assert book_lower_value(40) == 40**38
    assert required_petals(3) == 729
    assert chromatic_upper_value(8, 8) == 7
    assert chromatic_upper_value(100, 4) == 87


def test_greedy_clique_examples():
    assert len(greedy_clique(complete(6))) == 6
    assert len(greedy_clique(empty(6))) == 1
    c = greedy_clique(book(3, 10), restarts=4, seed=1)
    assert len(c) == 4 and book(3, 10).is_clique(c)


def test_greedy_thread_count_does_not_change_result():
    G = sample_gnp(n=120, p="1/2", seed=4)
    a = greedy_clique(G, restarts=16, seed=9, threads=1)
    b = greedy_clique(G, restarts=16, seed=9, threads=8)
    assert a == b and G.is_clique(a)


def test_max_clique_examples():
    assert max_clique_exact(cycle(5)).size == 2
    d = complete(10).to_dense()
    d[2, 7] = d[7, 2] = False
    r = max_clique_exact(Graph.from_dense(d))
    assert r.exact and r.size == 9


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_max_clique_against_oracle(seed):
    G = sample_gnp(n=30, p="1/2", seed=seed)
    r = max_clique_exact(G)
    assert r.exact and G.is_clique(r.clique)
    assert r.size == oracles.max_clique_size(G.n, adj_of(G))


def test_max_clique_budget_returns_incumbent():
    G = sample_gnp(n=200, p="1/2", seed=3)
    r = max_clique_exact(G, max_nodes=5)
    assert not r.exact and G.is_clique(r.clique) and r.size >= 1


def test_dsatur_examples():
    assert dsatur_coloring(complete(4)).num_colors == 4
    assert dsatur_coloring(cycle(6)).num_colors == 2
    assert dsatur_coloring(cycle(5)).num_colors == 3
    assert dsatur_coloring(empty(0)).num_colors == 0


@pytest.mark.parametrize("seed", range(6))
def test_dsatur_proper_and_above_chi(seed):
    G = sample_gnp(n=12, p="2/5", seed=seed)
    col = dsatur_coloring(G)
    for u, v in G.edges().tolist():
        assert col.colors[u] != col.colors[v]
    assert len(set(col.colors)) == col.num_colors
    assert col.num_colors >= oracles.chromatic_number(G.n, adj_of(G))


def test_book_embedding_examples():
    B = book(3, 729)
    emb = find_book_embedding(B, 3, 729)
    assert emb.core == (0, 1, 2) and len(emb.petals) == 729
    assert find_book_embedding(complete(5), 2, 32) is None


def test_book_embedding_exhaustive_phase():
    # hide a book inside noise so the greedy start is unlikely to land on it
    G = sample_gnp(n=60, p="1/5", seed=8)
    d = G.to_dense()
    core, petals = [10, 20], list(range(30, 60))
    d[10, 20] = d[20, 10] = True
    for c in core:
        d[c, petals] = d[petals, c] = True
    H = Graph.from_dense(d)
    emb = find_book_embedding(H, 2, 30, restarts=0)
    assert emb is not None and H.is_clique(emb.core) and len(emb.petals) >= 30
    assert set(emb.petals) <= set(H.common_neighbors(emb.core).tolist())


def test_lower_certificates():
    c = lower_bound_certificate(book(4, 16384))
    assert c.kind == "LowerBook" and c.value == 16 and c.d == 4
    assert verify_certificate(book(4, 16384), c)
    e = lower_bound_certificate(empty(10))
    assert e.value == 1 and verify_certificate(empty(10), e)
    p = lower_bound_certificate(path(5))
    assert p.value == 1 and verify_certificate(path(5), p)


def test_upper_certificates():
    c = upper_bound_certificate(complete(8))
    assert c.kind == "UpperChromatic" and c.chi_ub == 8 and c.value == 7 and c.asymptotic
    assert verify_certificate(complete(8), c)
    t = upper_bound_certificate(cycle(6))
    assert t.kind == "UpperTrivial" and t.value == 6 and verify_certificate(cycle(6), t)


def test_certificate_json_roundtrip():
    c = lower_bound_certificate(book(3, 729))
    doc = json.loads(c.to_json())
    assert doc["value"] == "3" and doc["required_petals"] == "729"
    assert BoundCertificate.from_json(c.to_json()) == c


def _doc(cert):
    return json.loads(cert.to_json())


def test_verifier_rejections():
    B = book(3, 729)
    good = _doc(lower_bound_certificate(B))
    assert verify_certificate(B, good)

    short = dict(good, petals=good["petals"][:-1])
    assert verify_certificate(B, short).reason == "petal-count"
    assert verify_certificate(B, dict(good, value="4")).reason == "value-mismatch"
    assert verify_certificate(B, dict(good, value=3)).reason == "malformed"
    assert verify_certificate(B, dict(good, core=[0, 1, 3])).reason in ("petal-in-core", "core-not-clique")
    assert verify_certificate(B, dict(good, core=[0, 1])).reason == "core-size"
    dup = dict(good, petals=good["petals"][:-1] + good["petals"][:1])
    assert verify_certificate(B, dup).reason == "duplicate-petal"
    assert verify_certificate(book(3, 728), good).reason == "hash-mismatch"
    assert verify_certificate(B, dict(good, kind="LowerMagic")).reason == "unknown-kind"
    assert verify_certificate(B, "{not json").reason == "malformed"

    # a petal set drawn from a book whose core is not a clique
    d = B.to_dense()
    d[0, 1] = d[1, 0] = False
    assert verify_certificate(Graph.from_dense(d), dict(good, graph_hash=Graph.from_dense(d).graph_hash())).reason == "core-not-clique"
    d = B.to_dense()
    d[2, 100] = d[100, 2] = False
    H = Graph.from_dense(d)
    assert verify_certificate(H, dict(good, graph_hash=H.graph_hash())).reason == "petal-not-adjacent"

    K8 = complete(8)
    up = _doc(upper_bound_certificate(K8))
    bad = list(up["coloring"])
    bad[3] = bad[4]
    assert verify_certificate(K8, dict(up, coloring=bad)).reason in ("improper-coloring", "class-count")
    bad = list(up["coloring"])
    bad[0] = bad[1]
    assert verify_certificate(K8, dict(up, coloring=bad, chi_ub=8)).reason in ("improper-coloring", "class-count")
    assert verify_certificate(K8, dict(up, asymptotic=False)).reason == "asymptotic-flag"
    assert verify_certificate(K8, dict(up, value="8")).reason == "value-mismatch"
    C6 = cycle(6)
    two = {"kind": "UpperChromatic", "n": 6, "value": "5", "chi_ub": 2, "coloring": [0, 1] * 3,
           "asymptotic": True, "graph_hash": C6.graph_hash()}
    assert verify_certificate(C6, two).reason == "chi-too-small"


def test_improper_coloring_detected_with_correct_class_count():
    G = Graph.from_edges(6, [(0, 1), (2, 3), (4, 5), (0, 2)])
    doc = {"kind": "UpperChromatic", "n": 6, "value": str(chromatic_upper_value(6, 4)),
           "chi_ub": 4, "coloring": [0, 0, 1, 2, 3, 3], "asymptotic": True,
           "graph_hash": G.graph_hash()}
    assert verify_certificate(G, doc).reason == "improper-coloring"
    doc["coloring"] = [0, 1, 2, 3, 0, 1]
    assert verify_certificate(G, doc)


@given(st.integers(2, 25), st.integers(0, 2**32), st.sampled_from(["1/5", "1/2", "4/5"]))
@settings(max_examples=40, deadline=None)
def test_emitted_certificates_always_verify(n, seed, p):
    G = sample_gnp(n=n, p=p, seed=seed)
    lo = lower_bound_certificate(G, p_hint=p)
    up = upper_bound_certificate(G)
    assert verify_certificate(G, lo) and verify_certificate(G, up)
    assert verify_certificate(G, lo.to_json()) and verify_certificate(G, json.loads(up.to_json()))
    assert lo.value <= n and up.value <= n
