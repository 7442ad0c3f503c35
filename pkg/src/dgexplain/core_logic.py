"""Discrete formulas as hash-consed NNF DAGs.

Variables and states are dense integers assigned in vocabulary order.  A
positive literal ``X=x_i`` is identified by ``(var, state)``; its global
literal id (``Vocabulary.literal_id``) indexes the bitmasks used by the
reason enumerators.

Nodes live in an append-only :class:`NnfGraph`.  Children always have
smaller ids than their parents, so sorting a set of reachable ids gives a
bottom-up order.
"""

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import UnsupportedStructure, VocabularyError

K_FALSE, K_TRUE, K_LIT, K_AND, K_OR = range(5)


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple


class Literal(NamedTuple):
    var: int
    state: int
    positive: bool = True


class Vocabulary:
    """Discrete variables with ordered state names, plus class labels.

    ``classes`` may be empty when the vocabulary only hosts formulas; when
    given it must list at least two unique names.
    """

    def __init__(self, variables, classes=()):
        vs = []
        for item in variables:
            if isinstance(item, Variable):
                name, states = item.name, item.states
            else:
                name, states = item
            states = tuple(str(s) for s in states)
            if len(states) < 2:
                raise VocabularyError(f"variable {name!r} needs at least two states")
            if len(set(states)) != len(states):
                raise VocabularyError(f"variable {name!r} has duplicate states")
            vs.append(Variable(str(name), states))
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            raise VocabularyError("variable names must be unique")
        classes = tuple(str(c) for c in classes)
        if classes and (len(classes) < 2 or len(set(classes)) != len(classes)):
            raise VocabularyError("need at least two unique class names")
        self.variables = tuple(vs)
        self.classes = classes
        self._var_index = {v.name: i for i, v in enumerate(vs)}
        self._state_index = [{s: j for j, s in enumerate(v.states)} for v in vs]
        self._class_index = {c: i for i, c in enumerate(classes)}
        offsets, total = [], 0
        for v in vs:
            offsets.append(total)
            total += len(v.states)
        self.offsets = tuple(offsets)
        self.n_literals = total
        self._lit_owner = [(i, j) for i, v in enumerate(vs) for j in range(len(v.states))]

    def __len__(self):
        return len(self.variables)

    def __eq__(self, other):
        return (isinstance(other, Vocabulary) and self.variables == other.variables
                and self.classes == other.classes)

    def __hash__(self):
        return hash((self.variables, self.classes))

    def __repr__(self):
        return f"Vocabulary({len(self.variables)} variables, {len(self.classes)} classes)"

    def n_states(self, var):
        return len(self.variables[var].states)

    def var_id(self, name):
        try:
            return self._var_index[name]
        except KeyError:
            raise VocabularyError(f"unknown variable {name!r}") from None

    def state_id(self, var, name):
        try:
            return self._state_index[var][name]
        except KeyError:
            raise VocabularyError(
                f"unknown state {name!r} for variable {self.variables[var].name!r}") from None

    def class_id(self, name):
        try:
            return self._class_index[name]
        except KeyError:
            raise VocabularyError(f"unknown class {name!r}") from None

    def check_state(self, var, state):
        if not (isinstance(var, int) and 0 <= var < len(self.variables)):
            raise VocabularyError(f"unknown variable id {var!r}")
        if not (isinstance(state, int) and 0 <= state < len(self.variables[var].states)):
            raise VocabularyError(f"unknown state id {state!r} for variable {var}")

    def literal_id(self, var, state):
        return self.offsets[var] + state

    def literal_of(self, lid):
        return self._lit_owner[lid]

    def format_literal(self, var, state, positive=True):
        v = self.variables[var]
        text = f"{v.name}={v.states[state]}"
        return text if positive else f"¬{text}"

    def instance(self, assignment):
        """Build an instance tuple from ``{variable name: state name}``."""
        missing = [v.name for v in self.variables if v.name not in assignment]
        if missing:
            raise VocabularyError(f"missing variables: {', '.join(missing)}")
        extra = set(assignment) - set(self._var_index)
        if extra:
            raise VocabularyError(f"unknown variables: {', '.join(sorted(extra))}")
        return tuple(self.state_id(i, assignment[v.name]) for i, v in enumerate(self.variables))

    def term(self, assignment):
        """Build a positive term ``{var id: state id}`` from names."""
        out = {}
        for name, state in assignment.items():
            var = self.var_id(name)
            out[var] = self.state_id(var, state)
        return out

    def instance_names(self, instance):
        return {v.name: v.states[s] for v, s in zip(self.variables, instance)}


class Flags(NamedTuple):
    monotone: bool
    or_decomposable: bool
    and_decomposable: bool


class NnfGraph:
    """Append-only store of hash-consed NNF nodes over one vocabulary.

    ``conj``/``disj`` are smart constructors: they sort and deduplicate
    children and absorb constants.  Passing ``simplify=False`` keeps
    constant children, which is how the raw closed forms are built.
    """

    FALSE = 0
    TRUE = 1

    def __init__(self, vocab):
        self.vocab = vocab
        self._kind = [K_FALSE, K_TRUE]
        self._data = [None, None]
        # per-node masks: variables (bit = var id), positive and negative literal ids
        self._varmask = [0, 0]
        self._posmask = [0, 0]
        self._negmask = [0, 0]
        self._ordec = [True, True]
        self._anddec = [True, True]
        # True when no constant occurs below the node (constants themselves: False)
        self._pure = [False, False]
        self._index = {}

    def __len__(self):
        return len(self._kind)

    # -- construction -------------------------------------------------

    def literal(self, var, state, positive=True):
        self.vocab.check_state(var, state)
        key = (K_LIT, var, state, bool(positive))
        node = self._index.get(key)
        if node is None:
            lbit = 1 << self.vocab.literal_id(var, state)
            node = self._append(K_LIT, Literal(var, state, bool(positive)), 1 << var,
                                lbit if positive else 0, 0 if positive else lbit, True, True, True)
            self._index[key] = node
        return node

    def conj(self, children, simplify=True):
        return self._gate(K_AND, children, simplify)

    def disj(self, children, simplify=True):
        return self._gate(K_OR, children, simplify)

    def _gate(self, kind, children, simplify):
        kids = set(children)
        absorbing, neutral = (self.FALSE, self.TRUE) if kind == K_AND else (self.TRUE, self.FALSE)
        if simplify:
            if absorbing in kids:
                return absorbing
            kids.discard(neutral)
        if not kids:
            return neutral
        if len(kids) == 1:
            return kids.pop()
        kids = tuple(sorted(kids))
        key = (kind, kids)
        node = self._index.get(key)
        if node is not None:
            return node
        vm = pm = nm = 0
        ordec = anddec = pure = True
        disjoint = True
        vmask = self._varmask
        for c in kids:
            cv = vmask[c]
            if vm & cv:
                disjoint = False
            vm |= cv
            pm |= self._posmask[c]
            nm |= self._negmask[c]
            ordec = ordec and self._ordec[c]
            anddec = anddec and self._anddec[c]
            pure = pure and self._pure[c]
        if kind == K_OR:
            ordec = ordec and disjoint
        else:
            anddec = anddec and disjoint
        node = self._append(kind, kids, vm, pm, nm, ordec, anddec, pure)
        self._index[key] = node
        return node

    def _append(self, kind, data, vm, pm, nm, ordec, anddec, pure):
        self._kind.append(kind)
        self._data.append(data)
        self._varmask.append(vm)
        self._posmask.append(pm)
        self._negmask.append(nm)
        self._ordec.append(ordec)
        self._anddec.append(anddec)
        self._pure.append(pure)
        return len(self._kind) - 1

    # -- inspection ---------------------------------------------------

    def kind(self, node):
        return self._kind[node]

    def children(self, node):
        k = self._kind[node]
        return self._data[node] if k in (K_AND, K_OR) else ()

    def literal_of(self, node):
        if self._kind[node] != K_LIT:
            raise ValueError(f"node {node} is not a literal")
        return self._data[node]

    def is_constant(self, node):
        return node in (self.FALSE, self.TRUE)

    def variables(self, node):
        """Set of variable ids mentioned below ``node``."""
        m, out = self._varmask[node], set()
        while m:
            low = m & -m
            out.add(low.bit_length() - 1)
            m ^= low
        return out

    def var_mask(self, node):
        return self._varmask[node]

    def literal_mask(self, node):
        """Bitmask of positive literal ids occurring below ``node``."""
        return self._posmask[node]

    def is_positive(self, node):
        return self._negmask[node] == 0

    def is_monotone(self, node):
        # positive, and one literal per variable
        return (self._negmask[node] == 0
                and self._posmask[node].bit_count() == self._varmask[node].bit_count())

    def is_or_decomposable(self, node):
        return self._ordec[node]

    def is_and_decomposable(self, node):
        return self._anddec[node]

    def structural_flags(self, node):
        return Flags(self.is_monotone(node), self._ordec[node], self._anddec[node])

    def reachable(self, root):
        """Ids reachable from ``root`` in bottom-up (ascending) order."""
        seen = {root}
        stack = [root]
        data, kinds = self._data, self._kind
        while stack:
            n = stack.pop()
            if kinds[n] >= K_AND:
                for c in data[n]:
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        return sorted(seen)

    def size(self, root):
        """``(nodes, edges)`` of the sub-DAG rooted at ``root``."""
        nodes = self.reachable(root)
        return len(nodes), sum(len(self.children(n)) for n in nodes)

    def to_str(self, root):
        memo = {}
        for n in self.reachable(root):
            k = self._kind[n]
            if k == K_FALSE:
                memo[n] = "⊥"
            elif k == K_TRUE:
                memo[n] = "⊤"
            elif k == K_LIT:
                memo[n] = self.vocab.format_literal(*self._data[n])
            else:
                op = " ∧ " if k == K_AND else " ∨ "
                memo[n] = "(" + op.join(memo[c] for c in self._data[n]) + ")"
        return memo[root]

    # -- transformations ----------------------------------------------

    def map_literals(self, root, fn, touch=None):
        """Rebuild ``root`` with each literal node replaced by ``fn(literal)``.

        ``fn`` returns a node id, or None to keep the literal.  Sub-DAGs whose
        variable mask misses ``touch`` are reused untouched.  Rebuilt gates
        go through the smart constructors.
        """
        kinds, data, vmask = self._kind, self._data, self._varmask
        memo = {}
        for n in self.reachable(root):
            if touch is not None and not (vmask[n] & touch):
                memo[n] = n
                continue
            k = kinds[n]
            if k == K_LIT:
                out = fn(data[n])
                memo[n] = n if out is None else out
            elif k >= K_AND:
                kids = data[n]
                new = [memo[c] for c in kids]
                if all(a == b for a, b in zip(new, kids)):
                    memo[n] = n
                else:
                    memo[n] = self._gate(k, new, True)
            else:
                memo[n] = n
        return memo[root]

    def _check_term(self, term):
        term = dict(term)
        for var, state in term.items():
            self.vocab.check_state(var, state)
        return term

    def condition(self, root, term):
        """Condition on a positive term ``{var: state}`` (``f|γ``)."""
        term = self._check_term(term)
        if not term:
            return root
        touch = 0
        for var in term:
            touch |= 1 << var
        T, F = self.TRUE, self.FALSE

        def sub(lit):
            hit = term.get(lit.var)
            if hit is None:
                return None
            return T if (hit == lit.state) == lit.positive else F

        return self.map_literals(root, sub, touch)

    def evaluate(self, root, instance):
        """True iff ``instance`` (a state id per variable) is a model."""
        if len(instance) != len(self.vocab):
            raise VocabularyError("instance must assign every variable")
        kinds, data = self._kind, self._data
        val = {}
        for n in self.reachable(root):
            k = kinds[n]
            if k == K_LIT:
                lit = data[n]
                val[n] = (instance[lit.var] == lit.state) == lit.positive
            elif k == K_AND:
                val[n] = all(val[c] for c in data[n])
            elif k == K_OR:
                val[n] = any(val[c] for c in data[n])
            else:
                val[n] = k == K_TRUE
        return val[root]

    def make_positive(self, root):
        """Replace each negative literal ``¬x_i`` by ``∨_{j≠i} x_j``."""
        if self.is_positive(root):
            return root

        def sub(lit):
            if lit.positive:
                return None
            n = self.vocab.n_states(lit.var)
            return self.disj([self.literal(lit.var, j) for j in range(n) if j != lit.state])

        return self.map_literals(root, sub)

    def simplify_constants(self, root):
        """Equivalent NNF where constants can only appear as the root."""
        if self._pure[root] or root <= self.TRUE:
            return root
        kinds, data = self._kind, self._data
        memo = {}
        for n in self.reachable(root):
            k = kinds[n]
            memo[n] = self._gate(k, [memo[c] for c in data[n]], True) if k >= K_AND else n
        return memo[root]

    def _constant_eval(self, root, literal_value):
        kinds, data = self._kind, self._data
        val = {}
        for n in self.reachable(root):
            k = kinds[n]
            if k == K_LIT:
                val[n] = literal_value
            elif k == K_AND:
                val[n] = all(val[c] for c in data[n])
            elif k == K_OR:
                val[n] = any(val[c] for c in data[n])
            else:
                val[n] = k == K_TRUE
        return val[root]

    def is_valid(self, root):
        """Linear-time validity; needs a monotone or ∨-decomposable NNF."""
        # for ∨-decomposable input, validity distributes over ∧ and over ∨;
        # either way a literal on its own is never valid
        if self.is_monotone(root) or self._ordec[root]:
            return self._constant_eval(root, False)
        raise UnsupportedStructure("validity fast path needs a monotone or ∨-decomposable NNF")

    def is_satisfiable(self, root):
        """Linear-time satisfiability; needs a monotone or ∧-decomposable NNF."""
        if self.is_monotone(root) or self._anddec[root]:
            return self._constant_eval(root, True)
        raise UnsupportedStructure("satisfiability fast path needs a monotone or ∧-decomposable NNF")

    def entails(self, term, root):
        """Does the positive term ``{var: state}`` imply ``root``?

        Uses the validity fast path when the conditioned formula allows it
        and falls back to enumerating the remaining variables otherwise.
        """
        h = self.condition(root, term)
        if h == self.TRUE:
            return True
        if h == self.FALSE:
            return False
        if self.is_monotone(h) or self._ordec[h]:
            return self.is_valid(h)
        free = sorted(self.variables(h))
        inst = [0] * len(self.vocab)
        for var, state in term.items():
            inst[var] = state
        for combo in product(*(range(self.vocab.n_states(v)) for v in free)):
            for v, s in zip(free, combo):
                inst[v] = s
            if not self.evaluate(h, inst):
                return False
        return True


@dataclass(frozen=True)
class Formula:
    """A node together with the store that owns it."""

    graph: NnfGraph
    node: int

    @property
    def vocab(self):
        return self.graph.vocab

    def __str__(self):
        return self.graph.to_str(self.node)

    def flags(self):
        return self.graph.structural_flags(self.node)

    def size(self):
        return self.graph.size(self.node)

    def evaluate(self, instance):
        return self.graph.evaluate(self.node, instance)

    def is_constant(self):
        return self.graph.is_constant(self.node)


def positive_term(vocab, literals: Iterable) -> dict:
    """Turn ``(var, state)`` pairs into a term, enforcing one state per variable."""
    term = {}
    for var, state in literals:
        vocab.check_state(var, state)
        if term.get(var, state) != state:
            raise VocabularyError(f"two states for variable {vocab.variables[var].name!r}")
        term[var] = state
    return term


def forall_state_general(g: NnfGraph, root: int, var: int, state: int) -> int:
    """Universal quantification of state ``x_i`` from any NNF.

    ``(f|x_i) ∧ ∧_{j≠i} (x_i ∨ f|x_j)``.
    """
    g.vocab.check_state(var, state)
    if not g.var_mask(root) & (1 << var):
        return root
    xi = g.literal(var, state)
    parts = [g.condition(root, {var: state})]
    for j in range(g.vocab.n_states(var)):
        if j != state:
            parts.append(g.disj([xi, g.condition(root, {var: j})]))
    return g.conj(parts)


def forall_states_general(g: NnfGraph, root: int, states: Iterable) -> int:
    """Quantify ``(var, state)`` pairs one after another with the general rule."""
    for var, state in states:
        root = forall_state_general(g, root, var, state)
    return root


def forall_states_fast(g: NnfGraph, root: int, term: Mapping[int, int]) -> int:
    """Quantify a set of states from a ∨-decomposable NNF in one pass.

    For each ``x_i`` in the term: ``¬x_i -> ⊥``, ``x_j -> ⊥``, ``¬x_j -> x_i``.
    """
    if not g.is_or_decomposable(root):
        raise UnsupportedStructure("single-pass quantification needs a ∨-decomposable NNF")
    term = g._check_term(term)
    if not term:
        return root
    touch = 0
    for var in term:
        touch |= 1 << var
    F = g.FALSE

    def sub(lit):
        i = term.get(lit.var)
        if i is None:
            return None
        if lit.positive:
            return None if lit.state == i else F
        return F if lit.state == i else g.literal(lit.var, i)

    return g.map_literals(root, sub, touch)


def replace_state(g: NnfGraph, root: int, var: int, state: int, by: int) -> int:
    """``f[x_i -> by]`` for the positive literal ``x_i``."""

    def sub(lit):
        return by if lit.positive and lit.var == var and lit.state == state else None

    return g.map_literals(root, sub, 1 << var)


def state_disjunction_condition(g: NnfGraph, alpha: int, var: int, states: Sequence[int]) -> bool:
    """Syntactic side condition for distributing ``∀x_i`` over ``α ∨ ∨_{k∈S} x_k``.

    True iff ``var`` occurs in ``α`` only as positive literals grouped in
    disjunctions whose state set contains ``S``.
    """
    want = set(states)
    kinds, data = g._kind, g._data

    def is_var_lit(n):
        return kinds[n] == K_LIT and data[n].var == var

    if is_var_lit(alpha):
        lit = data[alpha]
        return lit.positive and want <= {lit.state}
    for n in g.reachable(alpha):
        k = kinds[n]
        if k == K_AND and any(is_var_lit(c) for c in data[n]):
            return False
        if k == K_OR:
            lits = [data[c] for c in data[n] if is_var_lit(c)]
            if not lits:
                continue
            if any(not lit.positive for lit in lits):
                return False
            if not want <= {lit.state for lit in lits}:
                return False
    return True
