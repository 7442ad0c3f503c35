import itertools
import random
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgexplain.core_logic import K_AND, K_OR, NnfGraph, Vocabulary
from dgexplain.decision_graph import (DecisionGraph, Interval, Leaf, class_formula,
                                      classify, complete_reason, random_graph,
                                      targeted_complete_reason, to_decimal, validate)
from dgexplain.errors import InvalidTarget, ModelFormatError, VocabularyError
from dgexplain.oracle import brute_complete_reason, enumerate_instances, equivalent, truth_tensor

from dgexplain.decision_graph import Test as Node

F = frozenset


def xy_vocab():
    return Vocabulary([("X", ("x1", "x2", "x3")), ("Y", ("y1", "y2"))], ("a", "b"))


def graph(nodes, root=0, vocab=None):
    return DecisionGraph(vocab or xy_vocab(), nodes, root)


# -- validation ------------------------------------------------------------------


def test_small_graph_is_valid():
    g = graph([Node(0, ((F({0}), 1), (F({1, 2}), 2))), Leaf(0),
               Node(1, ((F({0}), 1), (F({1}), 3))), Leaf(1)])
    assert validate(g).valid and validate(g, strict=True).valid
    assert not g.is_tree()


@pytest.mark.parametrize("nodes, kind", [
    ([Node(0, ((F({0}), 1), (F({1, 2}), 7))), Leaf(0)], "dangling-child"),
    ([Node(0, ((F({0, 1}), 1), (F({1, 2}), 2))), Leaf(0), Leaf(1)], "overlapping-edges"),
    ([Node(0, ((F({0}), 1), (F({1, 2}), 2))), Leaf(0), Node(1, ((F({0}), 0), (F({1}), 1)))], "cycle"),
    ([Node(0, ((F({0}), 1), (F({1, 2}), 1))), Leaf(0), Leaf(1)], "unreachable"),
    ([Node(0, ((F({0}), 1), (F({1}), 2))), Leaf(0), Leaf(1)], "root-test-incomplete"),
    ([Node(0, ((F({0}), 1), (F({1, 2}), 2))), Leaf(0),
      Node(0, ((F({0}), 1), (F({2}), 1)))], "not-partition"),
    ([Node(0, ((F({0}), 1), (F({1, 2}), 2))), Leaf(0), Leaf(2)], "unknown-class"),
    ([Node(0, ((F({0, 1, 2}), 1),)), Leaf(0)], "too-few-edges"),
])
def test_validation_violations(nodes, kind):
    report = validate(graph(nodes))
    assert not report.valid
    assert report.first().kind == kind


def test_retest_weak_versus_strict():
    g = graph([Node(0, ((F({0}), 1), (F({1, 2}), 2))), Leaf(0),
               Node(0, ((F({1}), 1), (F({2}), 3))), Leaf(1)])
    assert validate(g).valid
    strict = validate(g, strict=True)
    assert strict.first().kind == "retest"
    assert strict.first().path == (0, 2)


def test_shared_node_with_inconsistent_contexts():
    # node 3 re-tests X on {1,2}, but it is also reached on X=x1
    g = graph([Node(0, ((F({0}), 1), (F({1, 2}), 3))), Node(1, ((F({0}), 3), (F({1}), 2))), Leaf(0),
               Node(0, ((F({1}), 2), (F({2}), 4))), Leaf(1)])
    assert validate(g).first().kind == "not-partition"


# -- classification and class formulas ----------------------------------------------


def test_classify_and_missing_edge():
    g = graph([Node(0, ((F({0}), 1), (F({1, 2}), 2))), Leaf(0), Leaf(1)])
    assert [classify(g, (s, 0)) for s in range(3)] == [0, 1, 1]
    bad = graph([Node(0, ((F({0}), 1), (F({1}), 2))), Leaf(0), Leaf(1)])
    with pytest.raises(VocabularyError):
        classify(bad, (2, 0))


@pytest.mark.parametrize("seed", range(25))
def test_class_formulas_partition_the_instances(seed):
    g = random_graph(n_vars=3, max_states=3, n_classes=3, depth=4, seed=seed, share=0.5 * (seed % 2))
    store = NnfGraph(g.vocab)
    tensors = [truth_tensor(class_formula(g, c, store)) for c in range(len(g.vocab.classes))]
    assert (sum(t.astype(int) for t in tensors) == 1).all()
    for inst in enumerate_instances(g.vocab):
        assert tensors[classify(g, inst)][inst]


def test_class_formula_rejects_unknown_class():
    g = graph([Node(0, ((F({0}), 1), (F({1, 2}), 2))), Leaf(0), Leaf(1)])
    with pytest.raises(VocabularyError):
        class_formula(g, 5)


# -- complete reasons ------------------------------------------------------


def test_admissions_raw_complete_reason(admissions):
    inst = admissions.instance({"SAT": 1300, "GPA": "medium", "Essay": "fail", "Interview": "fail"})
    raw = complete_reason(admissions.graph, inst, raw=True)
    g = raw.graph
    kinds = [g.kind(n) for n in g.reachable(raw.node)]
    # one AND per test node; nine OR gates of which two coincide after hash-consing
    assert kinds.count(K_AND) == 4
    assert kinds.count(K_OR) == 8
    simple = complete_reason(admissions.graph, inst)
    assert equivalent(raw, simple)
    assert simple.size() < raw.size()
    assert simple.flags().monotone and simple.flags().or_decomposable


def test_targeted_complete_reason(targeted):
    vocab = targeted.vocab
    inst = vocab.instance({"X": "x2", "Y": "y1"})
    assert vocab.classes[classify(targeted.graph, inst)] == "c2"
    plain = complete_reason(targeted.graph, inst)
    g = plain.graph
    X2, Y1 = g.literal(0, 1), g.literal(1, 0)
    assert equivalent(plain, type(plain)(g, g.conj([X2, Y1])))
    to_c3 = targeted_complete_reason(targeted.graph, inst, vocab.class_id("c3"), g)
    assert equivalent(to_c3, type(plain)(g, Y1))
    to_c1 = targeted_complete_reason(targeted.graph, inst, vocab.class_id("c1"), g)
    assert equivalent(to_c1, type(plain)(g, X2))
    with pytest.raises(InvalidTarget):
        targeted_complete_reason(targeted.graph, inst, vocab.class_id("c2"))


def test_targeted_reason_models_avoid_target(targeted):
    g = targeted.graph
    for inst in enumerate_instances(g.vocab):
        for t in range(len(g.vocab.classes)):
            if classify(g, inst) == t:
                continue
            T = truth_tensor(targeted_complete_reason(g, inst, t))
            assert T[inst]
            for other in enumerate_instances(g.vocab):
                if T[other]:
                    assert classify(g, other) != t


# -- numeric features -------------------------------------------------------


def test_iris_interval_states(iris):
    vocab = iris.vocab
    assert vocab.variables[vocab.var_id("petalwidth")].states == (
        "(-inf,0.6]", "(0.6,1.5]", "(1.5,1.7]", "(1.7,inf)")
    assert vocab.variables[vocab.var_id("petallength")].states == ("(-inf,4.9]", "(4.9,inf)")


def test_iris_discrete_edges(iris):
    g = iris.graph
    w, l = iris.vocab.var_id("petalwidth"), iris.vocab.var_id("petallength")
    by_label = {g.label(n): g.nodes[n] for n in g.topological()}
    edges = {lab: [sorted(s) for s, _ in node.edges]
             for lab, node in by_label.items() if isinstance(node, Node)}
    assert edges == {"w1": [[0], [1, 2, 3]], "w2": [[1, 2], [3]], "l1": [[0], [1]], "w3": [[1], [2]]}
    assert by_label["l1"].var == l and by_label["w1"].var == w
    assert validate(g).valid
    assert validate(g, strict=True).first().kind == "retest"


def test_iris_instance_mapping(iris):
    inst = iris.instance({"petalwidth": 0.8, "petallength": 5.3})
    assert iris.vocab.instance_names(inst) == {"petalwidth": "(0.6,1.5]", "petallength": "(4.9,inf)"}
    assert iris.vocab.classes[classify(iris.graph, inst)] == "Iris-virginica"
    assert iris.tree.classify({"petalwidth": 0.8, "petallength": 5.3}) == classify(iris.graph, inst)


def test_iris_continuous_and_discrete_agree(iris):
    for w, l in itertools.product(np.arange(0.0, 2.6, 0.05), np.arange(3.0, 7.0, 0.1)):
        values = {"petalwidth": round(float(w), 2), "petallength": round(float(l), 1)}
        assert iris.tree.classify(values) == classify(iris.graph, iris.instance(values))


@pytest.mark.parametrize("value, state", [(0.6, 0), ("0.6", 0), (0.6000001, 1), (1.5, 1),
                                          (1.7, 2), (1.70001, 3), (-3, 0)])
def test_right_closed_boundaries(iris, value, state):
    assert iris.dmap.state_index("petalwidth", value) == state


def test_left_closed_boundary(admissions):
    dm = admissions.dmap
    assert dm.state_index("SAT", 1449) == 0
    assert dm.state_index("SAT", 1450) == 1
    names = admissions.vocab.variables[admissions.vocab.var_id("SAT")].states
    assert names == ("<1450", ">=1450")


def test_interval_formatting_and_membership():
    a = Interval(None, Decimal("0.6"))
    assert str(a) == "(-inf,0.6]" and Decimal("0.6") in a
    b = Interval(Decimal("1"), Decimal("2"), "left")
    assert str(b) == "[1,2)" and Decimal(1) in b and Decimal(2) not in b


def test_to_decimal():
    assert to_decimal(0.1) == Decimal("0.1")
    assert to_decimal("1450") == Decimal(1450)
    assert to_decimal(Decimal("2.5")) == Decimal("2.5")
    for bad in (True, "abc", float("nan"), float("inf"), None):
        with pytest.raises(ModelFormatError):
            to_decimal(bad)


# -- random generation -----------------------------------------------------------


def test_random_graph_is_deterministic():
    a = random_graph(n_vars=4, seed=3, share=0.5)
    b = random_graph(n_vars=4, seed=3, share=0.5)
    assert a.nodes == b.nodes and a.root == b.root


@pytest.mark.parametrize("seed", range(40))
def test_random_graphs_are_valid(seed):
    g = random_graph(n_vars=1 + seed % 5, max_states=2 + seed % 3, n_classes=2 + seed % 2,
                     depth=1 + seed % 6, seed=seed, share=0.5 if seed % 3 == 0 else 0.0)
    assert validate(g).valid


def test_node_budget_tree():
    g = random_graph(n_vars=10, max_states=4, n_classes=2, depth=40, seed=1, nodes=300)
    assert g.is_tree() and validate(g).valid
    assert 250 <= len(g.topological()) <= 350


def test_random_graph_rejects_bad_arguments():
    with pytest.raises(ValueError):
        random_graph(nodes=100, share=0.5)
    with pytest.raises(ValueError):
        random_graph(n_classes=1)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 5), st.integers(2, 4), st.integers(2, 3),
       st.sampled_from([0.0, 0.5]))
def test_complete_reason_matches_quantifier_expansion(seed, n_vars, max_states, n_classes, share):
    g = random_graph(n_vars=n_vars, max_states=max_states, n_classes=n_classes, depth=5,
                     seed=seed, share=share)
    rng = random.Random(seed)
    inst = tuple(rng.randrange(g.vocab.n_states(v)) for v in range(n_vars))
    store = NnfGraph(g.vocab)
    cr = complete_reason(g, inst, store)
    delta = class_formula(g, classify(g, inst), store)
    assert equivalent(cr, brute_complete_reason(delta, inst))
    assert cr.evaluate(inst)
    flags = cr.flags()
    assert flags.monotone and flags.or_decomposable
