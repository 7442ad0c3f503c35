"""Necessary and sufficient reasons of monotone, ∨-decomposable NNFs.

Internally a reason is a bitmask over global literal ids, so subset tests
and unions are integer operations.  :class:`ReasonSet` converts back to
``frozenset`` of ``(var, state)`` pairs.

All enumerators take an optional absolute ``deadline`` (``time.perf_counter``
seconds) and a ``cap`` on intermediate family size; they raise
:class:`EnumerationTimeout` / :class:`EnumerationOverflow` carrying partial
statistics when either is hit.
"""

import math
import sys
import time
from dataclasses import dataclass, field

from .core_logic import K_AND, K_FALSE, K_LIT, K_OR, K_TRUE, Formula, NnfGraph
from .errors import (EnumerationOverflow, EnumerationTimeout, UnsupportedStructure,
                     VocabularyError)

DEFAULT_CAP = 10 ** 6
INF = math.inf


@dataclass(frozen=True)
class ReasonSet:
    kind: str  # "implicants" | "implicates"
    members: tuple  # frozensets of (var, state), sorted by size then literal ids
    source: str
    k: int = None  # common length of members for the shortest-reason algorithms
    stats: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item):
        return frozenset(item) in self.members

    @property
    def lengths(self):
        return [len(m) for m in self.members]

    def as_names(self, vocab):
        return [[vocab.format_literal(v, s) for v, s in sorted(m)] for m in self.members]


def _bits(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _order_key(mask):
    return (mask.bit_count(), _bits(mask))


def _reduce(masks):
    """Minimal elements of a family of bitmasks, in canonical order."""
    uniq = sorted(set(masks), key=int.bit_count)
    kept = []
    # sets of equal size cannot subsume each other once duplicates are gone
    smaller = []
    size = -1
    for m in uniq:
        c = m.bit_count()
        if c != size:
            smaller = list(kept)
            size = c
        for k in smaller:
            if k & m == k:
                break
        else:
            kept.append(m)
    return kept


def remove_subsumed(family):
    """Keep the subset-minimal members of a family of literal sets.

    Output order: by size, then by the sorted literals.
    """
    uniq = sorted({frozenset(s) for s in family}, key=lambda s: (len(s), sorted(s)))
    kept = []
    for s in uniq:
        if not any(k <= s for k in kept if len(k) < len(s)):
            kept.append(s)
    return kept


def _to_reason_set(g, masks, kind, source, k=None, stats=None):
    vocab = g.vocab
    ordered = sorted(masks, key=_order_key)
    members = tuple(frozenset(vocab.literal_of(b) for b in _bits(m)) for m in ordered)
    return ReasonSet(kind, members, source, k, dict(stats or {}))


def _unwrap(f, g=None):
    if isinstance(f, Formula):
        return f.graph, f.node
    if g is None:
        raise TypeError("pass a Formula or (graph, node)")
    return g, f


def _prepare(g, node, what):
    if not (g.is_monotone(node) and g.is_or_decomposable(node)):
        raise UnsupportedStructure(f"{what} needs a monotone, ∨-decomposable NNF")
    return node


class _Budget:
    """Deadline and size-cap bookkeeping shared by the enumerators."""

    def __init__(self, source, deadline, cap):
        self.source = source
        self.deadline = deadline
        self.cap = cap
        self.stats = {"work": 0}
        self.ticks = 0

    def tick(self):
        self.ticks += 1
        # the first tick reads the clock too, so an expired deadline fails fast
        if self.deadline is not None and (self.ticks & 63) == 1:
            if time.perf_counter() > self.deadline:
                raise EnumerationTimeout(f"{self.source} timed out", self.stats)

    def check_size(self, n):
        if self.cap is not None and n > self.cap:
            self.stats["family_size"] = n
            raise EnumerationOverflow(
                f"{self.source} intermediate family exceeded {self.cap} members", self.stats)


# -- implicate minimum length and pruning ---------------------------------


def iml(f, g=None) -> dict:
    """Shortest-implicate length of every node: ⊤=∞, ⊥=0, literal=1,
    ∨ adds and ∧ takes the minimum.  Needs a monotone, ∨-decomposable NNF."""
    g, node = _unwrap(f, g)
    if not (g.is_monotone(node) and g.is_or_decomposable(node)):
        raise UnsupportedStructure("iml needs a monotone, ∨-decomposable NNF")
    return _iml(g, node)


def _iml(g, root, order=None):
    kinds, data = g._kind, g._data
    ann = {}
    for n in (order if order is not None else g.reachable(root)):
        k = kinds[n]
        if k == K_LIT:
            ann[n] = 1
        elif k == K_OR:
            ann[n] = sum(ann[c] for c in data[n])
        elif k == K_AND:
            ann[n] = min(ann[c] for c in data[n])
        else:
            ann[n] = INF if k == K_TRUE else 0
    return ann


def prune(f, g=None, annotation=None):
    """Drop every conjunct whose iml exceeds that of its conjunction.

    The prime implicates of the result are the shortest implicates of the
    input.  Returns a node id in the same store.
    """
    g, node = _unwrap(f, g)
    if not (g.is_monotone(node) and g.is_or_decomposable(node)):
        raise UnsupportedStructure("prune needs a monotone, ∨-decomposable NNF")
    ann = annotation if annotation is not None else _iml(g, node)
    kinds, data = g._kind, g._data
    memo = {}
    for n in g.reachable(node):
        k = kinds[n]
        if k == K_AND:
            kept = [memo[c] for c in data[n] if ann[c] == ann[n]]
            memo[n] = g.conj(kept)
        elif k == K_OR:
            memo[n] = g.disj([memo[c] for c in data[n]])
        else:
            memo[n] = n
    return memo[node]


def _kept_nodes(g, order, ann):
    """Subset of ``order`` still reachable once :func:`prune` drops conjuncts."""
    kinds, data = g._kind, g._data
    need = {order[-1]}
    for n in reversed(order):
        if n in need and kinds[n] >= K_AND:
            if kinds[n] == K_AND:
                t = ann[n]
                need.update(c for c in data[n] if ann[c] == t)
            else:
                need.update(data[n])
    return [n for n in order if n in need]


# -- necessary reasons -----------------------------------------------------


def _constant_result(g, node, kind, source):
    # ⊤ has no implicates and the single implicant {}; ⊥ the reverse
    empty = [0]
    if node == NnfGraph.TRUE:
        masks = [] if kind == "implicates" else empty
    else:
        masks = empty if kind == "implicates" else []
    k = (0 if masks else None)
    return _to_reason_set(g, masks, kind, source, k, {"work": 0})


def snr(f, g=None, deadline=None, cap=DEFAULT_CAP) -> ReasonSet:
    """All shortest implicates (shortest necessary reasons).

    Output-polynomial: ∨ takes Cartesian products, ∧ unions the families of
    conjuncts whose iml equals the conjunction's; no subsumption checks.
    ``stats["work"]`` counts members produced by product and union steps.
    """
    g, node = _unwrap(f, g)
    node = g.simplify_constants(node)
    if g.is_constant(node):
        return _constant_result(g, node, "implicates", "snr")
    node = _prepare(g, node, "snr")
    budget = _Budget("snr", deadline, cap)
    kinds, data = g._kind, g._data
    full = g.reachable(node)
    ann = _iml(g, node, full)
    order = _kept_nodes(g, full, ann)
    fam = {}
    work = 0
    lit_id = g.vocab.literal_id
    for n in order:
        budget.tick()
        k = kinds[n]
        if k == K_LIT:
            lit = data[n]
            fam[n] = [1 << lit_id(lit.var, lit.state)]
            work += 1
        elif k == K_OR:
            acc = [0]
            for c in data[n]:
                acc = [a | b for a in acc for b in fam[c]]
                work += len(acc)
                budget.stats["work"] = work
                budget.check_size(len(acc))
            fam[n] = acc
        else:
            target = ann[n]
            s = set()
            for c in data[n]:
                if ann[c] == target:
                    s.update(fam[c])
                    work += len(fam[c])
            fam[n] = list(s)
            budget.check_size(len(s))
    edges = sum(len(data[n]) for n in full if kinds[n] >= K_AND)
    stats = {"work": work, "nodes": len(full), "edges": edges, "iml": ann[node]}
    return _to_reason_set(g, fam[node], "implicates", "snr", ann[node], stats)


def nr(f, g=None, deadline=None, cap=DEFAULT_CAP) -> ReasonSet:
    """All prime implicates (necessary reasons).

    Same skeleton as :func:`snr` without pruning; ∧ unions every conjunct
    and removes subsumed clauses.  ∨-decomposability keeps ∨ products reduced.
    """
    g, node = _unwrap(f, g)
    node = g.simplify_constants(node)
    if g.is_constant(node):
        return _constant_result(g, node, "implicates", "nr")
    node = _prepare(g, node, "nr")
    budget = _Budget("nr", deadline, cap)
    kinds, data = g._kind, g._data
    lit_id = g.vocab.literal_id
    fam = {}
    for n in g.reachable(node):
        budget.tick()
        k = kinds[n]
        if k == K_LIT:
            lit = data[n]
            fam[n] = [1 << lit_id(lit.var, lit.state)]
        elif k == K_OR:
            acc = [0]
            for c in data[n]:
                acc = [a | b for a in acc for b in fam[c]]
                budget.check_size(len(acc))
            fam[n] = acc
        else:
            union = []
            for c in data[n]:
                union.extend(fam[c])
            budget.check_size(len(union))
            fam[n] = _reduce(union)
    return _to_reason_set(g, fam[node], "implicates", "nr")


# -- sufficient reasons ----------------------------------------------------


def sr(f, g=None, deadline=None, cap=DEFAULT_CAP) -> ReasonSet:
    """All prime implicants (sufficient reasons): the dual of :func:`nr`.

    ∨ unions and ∧ takes Cartesian products, both followed by subsumption
    removal.  Worst-case exponential; bounded by ``cap``.
    """
    g, node = _unwrap(f, g)
    node = g.simplify_constants(node)
    if g.is_constant(node):
        return _constant_result(g, node, "implicants", "sr")
    node = _prepare(g, node, "sr")
    budget = _Budget("sr", deadline, cap)
    kinds, data = g._kind, g._data
    lit_id = g.vocab.literal_id
    fam = {}
    for n in g.reachable(node):
        budget.tick()
        k = kinds[n]
        if k == K_LIT:
            lit = data[n]
            fam[n] = [1 << lit_id(lit.var, lit.state)]
        elif k == K_OR:
            union = []
            for c in data[n]:
                union.extend(fam[c])
            budget.check_size(len(union))
            fam[n] = _reduce(union)
        else:
            # small families first keeps the intermediate products small
            kids = sorted(data[n], key=lambda c: len(fam[c]))
            acc = fam[kids[0]]
            for c in kids[1:]:
                other = fam[c]
                budget.check_size(len(acc) * len(other))
                prod = [a | b for a in acc for b in other]
                budget.tick()
                acc = _reduce(prod)
            fam[n] = acc
    return _to_reason_set(g, fam[node], "implicants", "sr")


class _ImplicantSearch:
    """k-implicant enumeration with the (node, k, σ) cache."""

    def __init__(self, g, root, budget):
        self.g = g
        self.budget = budget
        kinds, data = g._kind, g._data
        self.kinds = kinds
        self.data = data
        self.posmask = g._posmask
        lit_id = g.vocab.literal_id
        ann = _iml(g, root)
        self.bit = {}
        self.and_kids = {}
        self.suffix = {}
        for n in g.reachable(root):
            k = kinds[n]
            if k == K_LIT:
                lit = data[n]
                self.bit[n] = 1 << lit_id(lit.var, lit.state)
            elif k == K_AND:
                # cheap conjuncts first: ascending iml, then fewer variables
                kids = sorted(data[n], key=lambda c: (ann[c], g._varmask[c].bit_count(), c))
                self.and_kids[n] = kids
                masks = [0] * (len(kids) + 1)
                for i in range(len(kids) - 1, -1, -1):
                    masks[i] = masks[i + 1] | g._posmask[kids[i]]
                self.suffix[n] = masks
        self.cache = {}
        self.hits = 0

    def _lookup(self, key, k):
        entry = self.cache.get(key)
        if entry is None:
            return None
        kmax, fam = entry
        if fam == [0]:
            self.hits += 1
            return fam
        if kmax >= k:
            self.hits += 1
            return fam if kmax == k else [m for m in fam if m.bit_count() <= k]
        return None

    def imp(self, n, k, sigma):
        """Reduced family of implicants of length <= k for ``n | sigma``."""
        kind = self.kinds[n]
        if kind == K_LIT:
            b = self.bit[n]
            if sigma & b:
                return [0]
            return [b] if k >= 1 else []
        if kind == K_AND:
            return self.imp_and(n, 0, k, sigma)
        key = (n, 0, sigma & self.posmask[n])
        hit = self._lookup(key, k)
        if hit is not None:
            return hit
        self.budget.tick()
        out = []
        for c in self.data[n]:
            sub = self.imp(c, k, sigma)
            if sub == [0]:
                out = [0]
                break
            out.extend(sub)
        self.budget.check_size(len(out))
        self.cache[key] = (k, out)
        return out

    def imp_and(self, n, i, k, sigma):
        kids = self.and_kids[n]
        if i == len(kids) - 1:
            return self.imp(kids[i], k, sigma)
        key = (n, i, sigma & self.suffix[n][i])
        hit = self._lookup(key, k)
        if hit is not None:
            return hit
        self.budget.tick()
        acc = set()
        for s1 in self.imp(kids[i], k, sigma):
            for s2 in self.imp_and(n, i + 1, k - s1.bit_count(), sigma | s1):
                acc.add(s1 | s2)
        self.budget.check_size(len(acc))
        out = _reduce(acc)
        self.cache[key] = (k, out)
        return out


def ssr(f, g=None, deadline=None, cap=DEFAULT_CAP) -> ReasonSet:
    """All shortest implicants (shortest sufficient reasons).

    Iterative deepening on the length bound ``k`` from 0; ``ReasonSet.k``
    holds the terminating bound.
    """
    g, node = _unwrap(f, g)
    node = g.simplify_constants(node)
    if g.is_constant(node):
        return _constant_result(g, node, "implicants", "ssr")
    node = _prepare(g, node, "ssr")
    budget = _Budget("ssr", deadline, cap)
    search = _ImplicantSearch(g, node, budget)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        k = 0
        while True:
            budget.stats["k"] = k
            fam = search.imp(node, k, 0)
            if fam:
                break
            k += 1
    finally:
        sys.setrecursionlimit(limit)
    stats = {"k": k, "cache_entries": len(search.cache), "cache_hits": search.hits}
    return _to_reason_set(g, fam, "implicants", "ssr", k, stats)


ENUMERATORS = {"snr": snr, "nr": nr, "ssr": ssr, "sr": sr}


# -- semantics ---------------------------------------------------------------


def _as_formula(delta, g):
    if isinstance(delta, Formula):
        return delta.graph, delta.node
    return g, delta


def congruent(d1, d2, delta, g=None) -> bool:
    """Do instances ``d1`` and ``d2`` share characteristics that imply ``delta``?"""
    g, node = _as_formula(delta, g)
    if not (g.evaluate(node, d1) and g.evaluate(node, d2)):
        return False
    shared = {v: s for v, (s, t) in enumerate(zip(d1, d2)) if s == t}
    return g.entails(shared, node)


def _literal_set(gamma):
    return {tuple(x) for x in gamma}


def verify_contrastive(gamma, instance, delta, g=None) -> bool:
    """Is ``gamma`` a minimal subset of ``instance`` whose removal breaks ``delta``?

    Removing a subset of ``gamma`` removes fewer characteristics than
    removing ``gamma``, so checking the subsets one literal short is enough.
    """
    g, node = _as_formula(delta, g)
    gamma = _literal_set(gamma)
    inst = set(enumerate(instance))
    if not gamma <= inst:
        raise VocabularyError("gamma must be a subset of the instance")

    def rest_entails(removed):
        return g.entails({v: s for v, s in inst - removed}, node)

    if rest_entails(gamma):
        return False
    return all(rest_entails(gamma - {lit}) for lit in gamma)
