"""Drive the oracles against the fast paths (the ``oracle-check`` command)."""

import random
from dataclasses import dataclass
from math import prod

import numpy as np

from .core_logic import NnfGraph
from .decision_graph import (DecisionGraph, Test, _compact, class_formula, classify,
                             complete_reason, random_graph, validate)
from .errors import CapExceeded
from .oracle import (brute_complete_reason, brute_contrastive, brute_prime_implicants,
                     brute_prime_implicates, conversion_primes, enumerate_instances, equivalent,
                     forall_tensor, shortest, truth_tensor)
from .reasons import ENUMERATORS


@dataclass
class Mismatch:
    check: str
    graph: DecisionGraph
    instance: tuple
    expected: object
    got: object


def faulty_snr(f, g=None, deadline=None, cap=None):
    """snr with its last member dropped: the harness must notice."""
    res = ENUMERATORS["snr"](f, g, deadline=deadline)
    return type(res)(res.kind, res.members[:-1], "snr-faulty", res.k, res.stats)


def _members(fam):
    return [sorted(m) for m in fam]


def check_instance(g: DecisionGraph, inst, impl=None, conversion_limit=64):
    """First disagreement between a fast path and its oracle, or None."""
    impl = dict(ENUMERATORS, **(impl or {}))
    store = NnfGraph(g.vocab)
    c = classify(g, inst)
    delta = class_formula(g, c, store)
    cr = complete_reason(g, inst, store)

    def bad(name, expected, got):
        return Mismatch(name, g, inst, expected, got)

    oracle_cr = brute_complete_reason(delta, inst)
    if not equivalent(cr, oracle_cr):
        return bad("complete_reason", str(oracle_cr), str(cr))
    if not np.array_equal(forall_tensor(truth_tensor(delta), inst), truth_tensor(cr)):
        return bad("complete_reason_semantics", "tensor quantification", str(cr))
    flags = cr.flags()
    if not (flags.monotone and flags.or_decomposable):
        return bad("structure", "monotone and ∨-decomposable", str(flags))
    pis, pcs = brute_prime_implicants(cr), brute_prime_implicates(cr)
    if cr.size()[1] <= conversion_limit:
        conv_pis, conv_pcs = conversion_primes(cr)
        if conv_pis.members != pis.members or conv_pcs.members != pcs.members:
            return bad("oracle_cross_check", _members(pis), _members(conv_pis))
    expected = {"sr": pis, "nr": pcs, "ssr": shortest(pis), "snr": shortest(pcs)}
    for m in ("snr", "nr", "ssr", "sr"):
        got = impl[m](cr)
        if tuple(got.members) != tuple(expected[m].members):
            return bad(m, _members(expected[m]), _members(got))
    contrastive = brute_contrastive(delta, inst)
    if list(expected["nr"].members) != contrastive:
        return bad("contrastive", _members(contrastive), _members(expected["nr"]))
    for fam in expected.values():
        for m in fam.members:
            if any(inst[v] != s for v, s in m):
                return bad("subset_of_instance", inst, sorted(m))
    return None


def minimize(mm: Mismatch, impl=None) -> Mismatch:
    """Greedily bypass test nodes while the same check keeps failing."""
    g = mm.graph
    improved = True
    while improved:
        improved = False
        for n in g.topological()[::-1]:
            node = g.nodes[n]
            if not isinstance(node, Test):
                continue
            for _, child in node.edges:
                nodes = list(g.nodes)
                nodes[n] = g.nodes[child]
                cand = _compact(DecisionGraph(g.vocab, nodes, g.root))
                if not validate(cand).valid:
                    continue
                res = check_instance(cand, mm.instance, impl)
                if res is not None and res.check == mm.check:
                    g, mm = cand, res
                    improved = True
                    break
            if improved:
                break
    return mm


def random_trials(trials=500, seed=0, per_graph=3, max_vars=5, max_states=4, max_classes=3,
                  max_space=10 ** 6):
    """Yield ``(graph, instance)`` pairs from a seeded stream of random graphs."""
    rng = random.Random(seed)
    for _ in range(trials):
        s = rng.randrange(2 ** 31)
        g = random_graph(n_vars=rng.randint(1, max_vars), max_states=rng.randint(2, max_states),
                         n_classes=rng.randint(2, max_classes), depth=rng.randint(1, 6), seed=s,
                         share=rng.choice((0.0, 0.0, 0.5)))
        space = prod(g.vocab.n_states(v) for v in range(len(g.vocab)))
        if space > max_space:
            raise CapExceeded(f"instance space {space} exceeds {max_space}")
        for _ in range(per_graph):
            yield g, tuple(rng.randrange(g.vocab.n_states(v)) for v in range(len(g.vocab)))


def model_trials(g: DecisionGraph, trials=None, seed=0, max_space=10 ** 6):
    """Every instance of a model, or ``trials`` sampled ones."""
    space = prod(g.vocab.n_states(v) for v in range(len(g.vocab)))
    if space > max_space:
        raise CapExceeded(f"instance space {space} exceeds {max_space}")
    if trials is None:
        for inst in enumerate_instances(g.vocab, max_space):
            yield g, inst
        return
    rng = random.Random(seed)
    for _ in range(trials):
        yield g, tuple(rng.randrange(g.vocab.n_states(v)) for v in range(len(g.vocab)))


def run(pairs, impl=None):
    """Check every pair; returns ``(checked, first minimized mismatch or None)``."""
    n = 0
    for g, inst in pairs:
        n += 1
        mm = check_instance(g, inst, impl)
        if mm is not None:
            return n, minimize(mm, impl)
    return n, None
