"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line."""

import statistics
import time

import pytest

from dgexplain import bench, checks
from dgexplain.core_logic import Formula, NnfGraph, forall_states_fast
from dgexplain.decision_graph import (class_formula, classify, complete_reason,
                                      targeted_complete_reason)
from dgexplain.decision_graph import Test as Node
from dgexplain.oracle import brute_contrastive, equivalent
from dgexplain.reasons import nr, snr, sr, ssr

from cases import REJECT, luna, names, ternary


@pytest.fixture
def report(capsys):
    """Call ``report(n, ok, detail)`` once per criterion."""
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def _suite():
    return list(checks.random_trials(trials=500, seed=0, per_graph=3, max_vars=5,
                                     max_states=4, max_classes=3))


def complete_reason_of(g, delta, inst):
    """Single-pass quantification of a hand-written class formula."""
    return Formula(g, forall_states_fast(g, delta, dict(enumerate(inst))))


def test_criterion_1_golden_examples(report, admissions, iris, targeted):
    failures = []

    def expect(label, got, want):
        if got != want:
            failures.append(f"{label}: got {got}, want {want}")

    g, delta, target, inst = ternary()
    cr = complete_reason_of(g, delta, inst)
    expect("ternary cr", equivalent(cr, Formula(g, target)), True)
    v = g.vocab
    expect("ternary sr", names(v, sr(cr)), [["X=x2", "Y=y2"], ["X=x2", "Z=z1"]])
    expect("ternary nr", names(v, nr(cr)), [["X=x2"], ["Y=y2", "Z=z1"]])
    expect("ternary snr", names(v, snr(cr)), [["X=x2"]])
    expect("ternary ssr", names(v, ssr(cr)), [["X=x2", "Y=y2"], ["X=x2", "Z=z1"]])

    lg, ldelta, lgamma, linst = luna()
    gamma = Formula(lg, lgamma)
    expect("luna cr", equivalent(complete_reason_of(lg, ldelta, linst), gamma), True)
    lv = lg.vocab
    expect("luna sr", sorted(map(sorted, names(lv, sr(gamma)))),
           sorted([["E=1", "G=1", "R=1"], ["E=1", "R=1", "W=1"], ["E=1", "F=0", "R=1"],
                   ["G=1", "R=1", "W=1"]]))
    expect("luna snr", names(lv, snr(gamma)), [["R=1"]])

    av = admissions.vocab
    ainst = admissions.instance(REJECT)
    expect("admissions class", av.classes[classify(admissions.graph, ainst)], "Reject")
    acr = complete_reason(admissions.graph, ainst)
    as_sets = lambda res: {frozenset(m) for m in res.as_names(av)}  # noqa: E731
    expect("admissions sr", as_sets(sr(acr)),
           {frozenset({"SAT=<1450", "GPA=medium", "Interview=fail"}),
            frozenset({"Essay=fail", "Interview=fail"})})
    expect("admissions nr", as_sets(nr(acr)),
           {frozenset({"Interview=fail"}), frozenset({"SAT=<1450", "Essay=fail"}),
            frozenset({"GPA=medium", "Essay=fail"})})
    expect("admissions snr", as_sets(snr(acr)), {frozenset({"Interview=fail"})})

    tv = targeted.vocab
    tinst = tv.instance({"X": "x2", "Y": "y1"})
    expect("targeted nr", names(tv, nr(complete_reason(targeted.graph, tinst))), [["X=x2"], ["Y=y1"]])
    expect("targeted-to-c3 nr",
           names(tv, nr(targeted_complete_reason(targeted.graph, tinst, tv.class_id("c3")))),
           [["Y=y1"]])

    iv = iris.vocab
    expect("iris W states", iv.variables[iv.var_id("petalwidth")].states,
           ("(-inf,0.6]", "(0.6,1.5]", "(1.5,1.7]", "(1.7,inf)"))
    expect("iris L states", iv.variables[iv.var_id("petallength")].states,
           ("(-inf,4.9]", "(4.9,inf)"))
    iinst = iris.instance({"petalwidth": 0.8, "petallength": 5.3})
    expect("iris mapping", iv.instance_names(iinst),
           {"petalwidth": "(0.6,1.5]", "petallength": "(4.9,inf)"})
    expect("iris class", iv.classes[classify(iris.graph, iinst)], "Iris-virginica")
    ig = iris.graph
    edges = {ig.label(n): [sorted(s) for s, _ in ig.nodes[n].edges]
             for n in ig.topological() if isinstance(ig.nodes[n], Node)}
    expect("iris edges", edges,
           {"w1": [[0], [1, 2, 3]], "w2": [[1, 2], [3]], "l1": [[0], [1]], "w3": [[1], [2]]})

    report(1, not failures, "all golden examples match" if not failures else "; ".join(failures))


def test_criterion_2_oracle_equivalence(report):
    t0 = time.perf_counter()
    n, mm = checks.run(_suite())
    took = time.perf_counter() - t0
    ok = mm is None and n == 1500 and took < 300
    detail = (f"{n} instances on 500 random graphs agree with the oracles in {took:.1f}s"
              if mm is None else f"{mm.check} disagrees after {n} instances")
    report(2, ok, detail)


def test_criterion_3_structural_guarantees(report):
    flags_ok = subset_ok = bound_ok = True
    trees = 0
    for g, inst in _suite():
        cr = complete_reason(g, inst)
        f = cr.flags()
        flags_ok &= f.monotone and f.or_decomposable
        fams = [snr(cr), nr(cr), ssr(cr), sr(cr)]
        subset_ok &= all(inst[v] == s for fam in fams for m in fam for v, s in m)
        if g.is_tree():
            trees += 1
            c = classify(g, inst)
            others = sum(1 for n in g.leaves() if g.nodes[n].cls != c)
            bound_ok &= len(fams[1]) <= others
    ok = flags_ok and subset_ok and bound_ok and trees > 0
    report(3, ok, f"flags={flags_ok} subsets={subset_ok} |nr|<=L on {trees} tree instances={bound_ok}")


def test_criterion_4_contrastive_semantics(report):
    bad = 0
    count = 0
    for g, inst in _suite():
        store = NnfGraph(g.vocab)
        delta = class_formula(g, classify(g, inst), store)
        got = set(nr(complete_reason(g, inst, store)).members)
        want = set(brute_contrastive(delta, inst))
        count += 1
        bad += got != want
    report(4, bad == 0, f"nr equals the exhaustive contrastive sets on {count - bad}/{count} instances")


def test_criterion_5_performance(report):
    rows = bench.synthetic_suite(trees=10, instances=1000, nodes=2000, n_vars=20, max_states=8,
                                 seed=0, timeout=60.0)
    pooled = bench.pooled(rows)
    table = bench.to_csv(rows + [pooled])
    header = table.splitlines()[0]
    m = {k: pooled.modes[k] for k in ("snr", "nr", "ssr", "sr")}
    mean = {k: statistics.mean(st.times) if st.times else float("inf") for k, st in m.items()}
    limits = {"snr": 0.010, "nr": 0.100, "ssr": 1.0}
    checks_ = {
        "means": all(mean[k] < lim for k, lim in limits.items()),
        "timeouts": all(st.timeouts <= 10 for st in m.values()),
        "snr<=nr": mean["snr"] <= mean["nr"],
        "ssr_to<=sr_to": m["ssr"].timeouts <= m["sr"].timeouts,
        "table": header.startswith("model,vars,card,thresholds,nodes,edges,instances,cr_nodes,cr_edges"),
    }
    detail = ", ".join(f"{k} mean {mean[k] * 1000:.3f} ms" for k in m) + ", timeouts " + \
        "/".join(str(st.timeouts) for st in m.values()) + \
        f" over {pooled.instances} instances on {len(rows)} trees of ~{pooled.nodes} nodes; " + \
        ", ".join(f"{k}={v}" for k, v in checks_.items())
    report(5, all(checks_.values()), detail)


def test_criterion_6_output_polynomial_work(report):
    points = bench.work_sweep()
    slope, intercept, r2 = bench.fit_slope(points)
    within = all(w <= 2 * m * max(e, 1) for _, w, m, e in points)
    report(6, within and slope > 0,
           f"work vs M*E over {len(points)} runs: slope {slope:.4f}, intercept {intercept:.1f}, "
           f"r^2 {r2:.2f}; work <= 2*M*E on every run: {within}")
