"""Brute-force references for the fast paths.

Everything here works on dense truth tensors (one axis per variable, one
index per state) built straight from the node store, so it shares no
traversal code with :mod:`dgexplain.reasons` or the closed forms.  Only
desk-scale vocabularies are supported; the instance count is capped.

Prime implicants are consistent positive terms (at most one state per
variable) and prime implicates positive clauses of the same shape.  For
monotone formulas these are all the primes there are.
"""

import random
from dataclasses import dataclass
from functools import reduce
from itertools import combinations, product
from math import prod

import numpy as np

from .core_logic import K_AND, K_FALSE, K_LIT, K_OR, K_TRUE, Formula, NnfGraph, Vocabulary
from .errors import CapExceeded, NotAModel, VocabularyError
from .reasons import ReasonSet

DEFAULT_CAP = 10 ** 6


def _check_cap(vocab, cap):
    shape = tuple(vocab.n_states(v) for v in range(len(vocab)))
    total = prod(shape)
    if cap is not None and total > cap:
        raise CapExceeded(f"{total} instances exceed the cap of {cap}")
    return shape


def enumerate_instances(vocab, cap=DEFAULT_CAP):
    """Every instance once, lexicographic by variable then state index."""
    shape = _check_cap(vocab, cap)
    return product(*(range(n) for n in shape))


@dataclass(frozen=True)
class ModelTable:
    vocab: object
    instances: tuple
    verdicts: tuple  # one tuple of bools per formula, aligned with ``instances``

    def models(self, i=0):
        return [inst for inst, ok in zip(self.instances, self.verdicts[i]) if ok]


def model_table(formulas, cap=DEFAULT_CAP) -> ModelTable:
    formulas = list(formulas)
    vocab = formulas[0].vocab
    insts = tuple(enumerate_instances(vocab, cap))
    verdicts = tuple(tuple(bool(x) for x in truth_tensor(f, cap=cap).reshape(-1)) for f in formulas)
    return ModelTable(vocab, insts, verdicts)


def _unwrap(f, g):
    if isinstance(f, Formula):
        return f.graph, f.node
    if g is None:
        raise TypeError("pass a Formula or (graph, node)")
    return g, f


def truth_tensor(f, g=None, cap=DEFAULT_CAP):
    """Boolean array ``T`` with ``T[instance]`` the truth value of ``f``."""
    g, node = _unwrap(f, g)
    vocab = g.vocab
    shape = _check_cap(vocab, cap)
    nv = len(shape)
    val = {}
    for n in g.reachable(node):
        k = g.kind(n)
        if k == K_LIT:
            lit = g.literal_of(n)
            axis = np.arange(shape[lit.var]) == lit.state
            if not lit.positive:
                axis = ~axis
            view = [1] * nv
            view[lit.var] = shape[lit.var]
            val[n] = axis.reshape(view)
        elif k == K_AND:
            val[n] = reduce(np.logical_and, (val[c] for c in g.children(n)))
        elif k == K_OR:
            val[n] = reduce(np.logical_or, (val[c] for c in g.children(n)))
        else:
            val[n] = np.full([1] * nv, k == K_TRUE)
    return np.broadcast_to(val[node], shape).copy()


def equivalent(f, h, cap=DEFAULT_CAP) -> bool:
    """Same model set, by full enumeration."""
    if f.vocab != h.vocab:
        raise VocabularyError("formulas live over different vocabularies")
    return bool(np.array_equal(truth_tensor(f, cap=cap), truth_tensor(h, cap=cap)))


# -- prime sets ----------------------------------------------------------------


def _implicant_table(T):
    """Extend each axis by a 'free' index: entry is True iff the partial
    assignment (free index = unassigned) implies the formula."""
    out = T
    for a in range(T.ndim):
        out = np.concatenate([out, out.all(axis=a, keepdims=True)], axis=a)
    return out


def _implicate_table(T):
    """Entry is True iff the positive clause (chosen state per axis, free
    index = absent) is implied by the formula.  Counts the models that
    falsify the clause; the clause is an implicate iff none do."""
    cnt = T.astype(np.int64)
    for a in range(T.ndim):
        tot = cnt.sum(axis=a, keepdims=True)
        cnt = np.concatenate([tot - cnt, tot], axis=a)
    return cnt == 0


def _primes(table, shape):
    """Members of ``table`` that stop being members when any assigned
    variable is freed."""
    prime = table.copy()
    for a, n in enumerate(shape):
        freed = np.take(table, [n], axis=a)
        keep = ~freed
        # freeing an already free axis is not a weakening
        idx = [slice(None)] * table.ndim
        idx[a] = slice(n, n + 1)
        cond = np.broadcast_to(keep, table.shape).copy()
        cond[tuple(idx)] = True
        prime &= cond
    members = []
    for pos in np.argwhere(prime):
        members.append(frozenset((v, int(s)) for v, s in enumerate(pos) if s < shape[v]))
    return members


def _sort_key(vocab):
    return lambda m: (len(m), sorted(vocab.literal_id(v, s) for v, s in m))


def _family(vocab, members, kind, source):
    return ReasonSet(kind, tuple(sorted(set(members), key=_sort_key(vocab))), source)


def brute_prime_implicants(f, g=None, cap=DEFAULT_CAP) -> ReasonSet:
    g, node = _unwrap(f, g)
    T = truth_tensor(node, g, cap)
    members = _primes(_implicant_table(T), T.shape)
    return _family(g.vocab, members, "implicants", "brute")


def brute_prime_implicates(f, g=None, cap=DEFAULT_CAP) -> ReasonSet:
    g, node = _unwrap(f, g)
    T = truth_tensor(node, g, cap)
    members = _primes(_implicate_table(T), T.shape)
    return _family(g.vocab, members, "implicates", "brute")


def shortest(family: ReasonSet) -> ReasonSet:
    """Length-minimal members of a family."""
    if not family.members:
        return family
    k = min(len(m) for m in family.members)
    return ReasonSet(family.kind, tuple(m for m in family.members if len(m) == k),
                     family.source, k)


def _minimal(sets):
    sets = sorted(set(sets), key=len)
    kept = []
    for s in sets:
        if not any(k <= s for k in kept):
            kept.append(s)
    return kept


def conversion_primes(f, g=None):
    """Prime implicants and implicates of a monotone NNF by DNF/CNF
    expansion followed by subsumption removal.  Exponential; tiny inputs only."""
    g, node = _unwrap(f, g)
    if not g.is_monotone(node):
        raise VocabularyError("conversion route needs a monotone NNF")
    dnf, cnf = {}, {}
    for n in g.reachable(node):
        k = g.kind(n)
        if k == K_LIT:
            lit = g.literal_of(n)
            dnf[n] = cnf[n] = [frozenset([(lit.var, lit.state)])]
        elif k == K_TRUE:
            dnf[n], cnf[n] = [frozenset()], []
        elif k == K_FALSE:
            dnf[n], cnf[n] = [], [frozenset()]
        else:
            kids = g.children(n)
            union_side, prod_side = (cnf, dnf) if k == K_AND else (dnf, cnf)
            union = [s for c in kids for s in union_side[c]]
            cross = [frozenset().union(*combo) for combo in product(*(prod_side[c] for c in kids))]
            union_side[n] = _minimal(union)
            prod_side[n] = _minimal(cross)
    vocab = g.vocab
    return (_family(vocab, _minimal(dnf[node]), "implicants", "conversion"),
            _family(vocab, _minimal(cnf[node]), "implicates", "conversion"))


# -- complete reasons -------------------------------------------------------


def _forall(g, root, var, state):
    """``(f|x_i) ∧ ⋀_{j≠i} (x_i ∨ f|x_j)`` written out with the store's constructors."""
    n = g.vocab.n_states(var)
    parts = [g.condition(root, {var: state})]
    xi = g.literal(var, state)
    for j in range(n):
        if j != state:
            parts.append(g.disj([xi, g.condition(root, {var: j})]))
    return g.conj(parts)


def brute_complete_reason(delta, instance, g=None) -> Formula:
    """``∀δ·Δ`` by expanding the quantifier one variable at a time."""
    g, node = _unwrap(delta, g)
    if not g.evaluate(node, instance):
        raise NotAModel("the instance is not a model of the formula")
    out = node
    for var, state in enumerate(instance):
        out = _forall(g, out, var, state)
    return Formula(g, out)


def forall_tensor(T, instance):
    """Tensor semantics of ``∀δ·Δ``.  Quantifying ``x_i`` keeps ``T|x_i`` at
    state ``i`` and puts the conjunction over all states everywhere else."""
    out = T
    for a, s in enumerate(instance):
        at = np.take(out, [s], axis=a)
        every = out.all(axis=a, keepdims=True)
        mask = (np.arange(out.shape[a]) == s).reshape([-1 if i == a else 1 for i in range(out.ndim)])
        out = np.where(mask, at, every)
    return out


def congruent_tensor(T, instance):
    """Instances congruent with ``instance``: their shared part entails Δ."""
    imp = _implicant_table(T)
    shape = T.shape
    out = np.zeros(shape, dtype=bool)
    for other in np.ndindex(*shape):
        idx = tuple(s if s == o else shape[v] for v, (s, o) in enumerate(zip(instance, other)))
        out[other] = T[instance] and T[other] and imp[idx]
    return out


def brute_contrastive(delta, instance, g=None, cap=DEFAULT_CAP):
    """All minimal ``γ ⊆ δ`` with ``δ∖γ ⊭ Δ``, by subset enumeration."""
    g, node = _unwrap(delta, g)
    T = truth_tensor(node, g, cap)
    imp = _implicant_table(T)
    shape = T.shape
    found = []
    nv = len(instance)
    for size in range(nv + 1):
        for gamma in combinations(range(nv), size):
            gs = frozenset((v, instance[v]) for v in gamma)
            if any(f <= gs for f in found):
                continue
            idx = tuple(shape[v] if v in gamma else instance[v] for v in range(nv))
            if not imp[idx]:
                found.append(gs)
    return sorted(found, key=_sort_key(g.vocab))


# -- random inputs ------------------------------------------------------------


def random_vocab(rng, n_vars=4, max_states=3, min_states=2):
    return Vocabulary([(f"V{i}", [f"s{j}" for j in range(rng.randint(min_states, max_states))])
                       for i in range(n_vars)])


def random_nnf(g: NnfGraph, seed=0, kind="general", depth=4, fanout=3, instance=None):
    """Random NNF in ``g``.

    ``kind``: ``"general"`` (any literals), ``"ordec"`` (disjuncts over
    disjoint variable sets), ``"monotone"`` (``"ordec"`` using only the
    positive literal of one fixed state per variable, taken from
    ``instance`` when given).
    """
    if kind not in ("general", "ordec", "monotone"):
        raise ValueError(f"unknown kind {kind!r}")
    rng = random.Random(seed)
    vocab = g.vocab
    nv = len(vocab)
    if kind == "monotone" and instance is None:
        instance = [rng.randrange(vocab.n_states(v)) for v in range(nv)]

    def lit(v):
        if kind == "monotone":
            return g.literal(v, instance[v])
        return g.literal(v, rng.randrange(vocab.n_states(v)), rng.random() < 0.7)

    def gen(vars_, d):
        if d == 0 or rng.random() < 0.2:
            r = rng.random()
            if r < 0.05:
                return g.TRUE if rng.random() < 0.5 else g.FALSE
            return lit(rng.choice(vars_))
        arity = rng.randint(2, fanout)
        if rng.random() < 0.5:
            return g.conj([gen(vars_, d - 1) for _ in range(arity)])
        if kind == "general" or len(vars_) < 2:
            if kind != "general":
                # a lone variable cannot be split; fall back to a literal
                return lit(vars_[0])
            return g.disj([gen(vars_, d - 1) for _ in range(arity)])
        pool = list(vars_)
        rng.shuffle(pool)
        arity = min(arity, len(pool))
        cuts = sorted(rng.sample(range(1, len(pool)), arity - 1))
        groups = [pool[a:b] for a, b in zip([0] + cuts, cuts + [len(pool)])]
        return g.disj([gen(grp, d - 1) for grp in groups])

    return gen(list(range(nv)), depth)
