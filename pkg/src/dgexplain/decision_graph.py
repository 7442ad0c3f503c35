"""Decision trees and graphs over discrete variables.

A graph is a table of :class:`Leaf` and :class:`Test` nodes indexed by int
id.  Test edges carry disjoint state sets.  Variables may be re-tested on a
path as long as each re-test partitions the state set taken at the
previous test of that variable (weak test-once).
"""

import bisect
import random
from collections import deque
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Optional

from .core_logic import Formula, NnfGraph, Vocabulary
from .errors import InvalidTarget, ModelFormatError, VocabularyError


@dataclass(frozen=True)
class Leaf:
    cls: int


@dataclass(frozen=True)
class Test:
    var: int
    edges: tuple  # ((frozenset of state ids, child id), ...)


class DecisionGraph:
    def __init__(self, vocab: Vocabulary, nodes, root: int, labels=None):
        self.vocab = vocab
        self.nodes = tuple(nodes)
        self.root = root
        # optional external node names, kept for serialization
        self.labels = tuple(labels) if labels is not None else None
        self._routes = {}

    def __len__(self):
        return len(self.nodes)

    def label(self, n):
        return self.labels[n] if self.labels is not None else f"n{n}"

    def route(self, n):
        """``{state id: edge index}`` for test node ``n``."""
        r = self._routes.get(n)
        if r is None:
            r = {s: j for j, (states, _) in enumerate(self.nodes[n].edges) for s in states}
            self._routes[n] = r
        return r

    def topological(self):
        """Reachable node ids, children before parents."""
        order, seen = [], set()
        stack = [(self.root, False)]
        while stack:
            n, done = stack.pop()
            if done:
                order.append(n)
                continue
            if n in seen:
                continue
            seen.add(n)
            stack.append((n, True))
            node = self.nodes[n]
            if isinstance(node, Test):
                for _, child in reversed(node.edges):
                    if child not in seen:
                        stack.append((child, False))
        return order

    def is_tree(self):
        indeg = {}
        for n in self.topological():
            node = self.nodes[n]
            if isinstance(node, Test):
                for _, c in node.edges:
                    indeg[c] = indeg.get(c, 0) + 1
        return all(v == 1 for v in indeg.values())

    def leaves(self):
        return [n for n in self.topological() if isinstance(self.nodes[n], Leaf)]

    def edge_count(self):
        return sum(len(self.nodes[n].edges) for n in self.topological()
                   if isinstance(self.nodes[n], Test))


@dataclass(frozen=True)
class Violation:
    kind: str
    node: Optional[int]
    message: str
    path: tuple = ()


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.violations

    def __bool__(self):
        return self.valid

    def first(self):
        return self.violations[0] if self.violations else None


def _structural_violations(g):
    out = []
    vocab = g.vocab
    n_nodes = len(g.nodes)
    if not (isinstance(g.root, int) and 0 <= g.root < n_nodes):
        return [Violation("dangling-child", None, f"root {g.root!r} is not a node")]
    for n, node in enumerate(g.nodes):
        if isinstance(node, Leaf):
            if not (0 <= node.cls < len(vocab.classes)):
                out.append(Violation("unknown-class", n, f"leaf {g.label(n)} has unknown class {node.cls!r}"))
            continue
        if not isinstance(node, Test):
            out.append(Violation("bad-node", n, f"node {g.label(n)} is neither a leaf nor a test"))
            continue
        if not (0 <= node.var < len(vocab)):
            out.append(Violation("unknown-variable", n, f"node {g.label(n)} tests unknown variable {node.var!r}"))
            continue
        if len(node.edges) < 2:
            out.append(Violation("too-few-edges", n, f"node {g.label(n)} has fewer than two edges"))
        seen = set()
        for states, child in node.edges:
            if not (isinstance(child, int) and 0 <= child < n_nodes):
                out.append(Violation("dangling-child", n, f"node {g.label(n)} points to undefined child {child!r}"))
            if not states:
                out.append(Violation("empty-edge", n, f"node {g.label(n)} has an edge with no states"))
            bad = [s for s in states if not (0 <= s < vocab.n_states(node.var))]
            if bad:
                out.append(Violation("unknown-state", n, f"node {g.label(n)} uses unknown states {bad}"))
            if seen & states:
                out.append(Violation("overlapping-edges", n, f"node {g.label(n)} has overlapping edge state sets"))
            seen |= states
    if out:
        return out
    # cycles and reachability
    color = {}
    stack = [(g.root, iter(_kids(g, g.root)))]
    color[g.root] = 1
    while stack:
        n, it = stack[-1]
        for c in it:
            if color.get(c) == 1:
                return [Violation("cycle", c, f"cycle through node {g.label(c)}",
                                  tuple(x for x, _ in stack) + (c,))]
            if c not in color:
                color[c] = 1
                stack.append((c, iter(_kids(g, c))))
                break
        else:
            color[n] = 2
            stack.pop()
    for n in range(n_nodes):
        if n not in color:
            out.append(Violation("unreachable", n, f"node {g.label(n)} is not reachable from the root"))
    return out


def _kids(g, n):
    node = g.nodes[n]
    return [c for _, c in node.edges] if isinstance(node, Test) else []


def _tested_vars(g):
    """Per node, the variables tested anywhere in its sub-graph."""
    tested = {}
    for n in g.topological():
        node = g.nodes[n]
        if isinstance(node, Leaf):
            tested[n] = frozenset()
        else:
            acc = {node.var}
            for _, c in node.edges:
                acc |= tested[c]
            tested[n] = frozenset(acc)
    return tested


def validate(g: DecisionGraph, strict=False) -> ValidationReport:
    """Check DAG shape, edge partitions and the weak test-once property.

    Live state sets are propagated with a work-list over ``(node, context)``
    pairs, where the context only keeps variables still tested below the
    node.  The first inconsistent live set is reported with its path.
    ``strict=True`` also rejects any re-test of a variable on a path.
    """
    report = ValidationReport(_structural_violations(g))
    if report.violations:
        return report
    tested = _tested_vars(g)
    vocab = g.vocab
    start = (g.root, ())
    parent = {start: None}
    queue = deque([start])
    while queue:
        n, ctx = state = queue.popleft()
        node = g.nodes[n]
        if isinstance(node, Leaf):
            continue
        live = dict(ctx)
        x = node.var
        union = frozenset().union(*(s for s, _ in node.edges))
        vname = vocab.variables[x].name
        if x in live:
            if strict:
                report.violations.append(Violation(
                    "retest", n, f"node {g.label(n)} re-tests {vname} (strict test-once)", _path(parent, state)))
                return report
            if union != live[x]:
                report.violations.append(Violation(
                    "not-partition", n,
                    f"node {g.label(n)} edges on {vname} do not partition the states taken earlier",
                    _path(parent, state)))
                return report
        elif len(union) != vocab.n_states(x):
            report.violations.append(Violation(
                "root-test-incomplete", n,
                f"first test of {vname} at node {g.label(n)} does not cover all states", _path(parent, state)))
            return report
        for states, child in node.edges:
            live[x] = states
            keep = tested[child]
            cctx = tuple(sorted((v, s) for v, s in live.items() if v in keep))
            nxt = (child, cctx)
            if nxt not in parent:
                parent[nxt] = state
                queue.append(nxt)
    return report


def _path(parent, state):
    out = []
    while state is not None:
        out.append(state[0])
        state = parent[state]
    return tuple(reversed(out))


def classify(g: DecisionGraph, instance) -> int:
    n = g.root
    nodes = g.nodes
    while True:
        node = nodes[n]
        if isinstance(node, Leaf):
            return node.cls
        j = g.route(n).get(instance[node.var])
        if j is None:
            raise VocabularyError(
                f"instance state {instance[node.var]} has no edge at node {g.label(n)}")
        n = node.edges[j][1]


def _store(g, store):
    if store is None:
        return NnfGraph(g.vocab)
    if store.vocab != g.vocab:
        raise VocabularyError("store vocabulary differs from the graph vocabulary")
    return store


def class_formula(g: DecisionGraph, c: int, store: NnfGraph = None) -> Formula:
    """Positive NNF whose models are the instances the graph puts in class ``c``."""
    if not (0 <= c < len(g.vocab.classes)):
        raise VocabularyError(f"unknown class id {c!r}")
    nnf = _store(g, store)
    memo = {}
    for n in g.topological():
        node = g.nodes[n]
        if isinstance(node, Leaf):
            memo[n] = nnf.TRUE if node.cls == c else nnf.FALSE
            continue
        x = node.var
        parts = []
        for states, child in node.edges:
            others = [nnf.literal(x, i) for i in range(g.vocab.n_states(x)) if i not in states]
            parts.append(nnf.disj([memo[child]] + others))
        memo[n] = nnf.conj(parts)
    return Formula(nnf, memo[g.root])


def _closed_form(g, instance, is_positive_leaf, store, raw):
    nnf = _store(g, store)
    simplify = not raw
    memo = {}
    for n in g.topological():
        node = g.nodes[n]
        if isinstance(node, Leaf):
            memo[n] = nnf.TRUE if is_positive_leaf(node.cls) else nnf.FALSE
            continue
        x = node.var
        s = instance[x]
        k = g.route(n).get(s)
        parts = []
        for j, (_, child) in enumerate(node.edges):
            # ℓ_j is the instance state if it lies on a sibling edge, else ⊥
            ell = nnf.literal(x, s) if k is not None and k != j else nnf.FALSE
            parts.append(nnf.disj([memo[child], ell], simplify=simplify))
        memo[n] = nnf.conj(parts, simplify=simplify)
    return Formula(nnf, memo[g.root])


def complete_reason(g: DecisionGraph, instance, store: NnfGraph = None, raw=False) -> Formula:
    """Closed-form complete reason for the decision on ``instance``.

    The result is monotone and ∨-decomposable, with one NNF gate per graph
    node.  ``raw=True`` keeps the constant leaves of the construction;
    otherwise constants are absorbed while building.
    """
    c = classify(g, instance)
    return _closed_form(g, instance, lambda cls: cls == c, store, raw)


def targeted_complete_reason(g: DecisionGraph, instance, target: int,
                             store: NnfGraph = None, raw=False) -> Formula:
    """Complete reason for why ``instance`` is *not* in class ``target``."""
    if not (0 <= target < len(g.vocab.classes)):
        raise VocabularyError(f"unknown class id {target!r}")
    if classify(g, instance) == target:
        raise InvalidTarget(
            f"instance is already classified as {g.vocab.classes[target]!r}")
    return _closed_form(g, instance, lambda cls: cls != target, store, raw)


# -- numeric features ----------------------------------------------------


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # "nominal" | "numeric"
    states: tuple = ()
    # numeric only: "right" tests X <= t, "left" tests X < t
    closed: str = "right"
    # numeric only: optional display names for the interval states
    labels: tuple = ()


@dataclass(frozen=True)
class Threshold:
    var: int
    threshold: Decimal
    below: int  # child for values on the low side of the threshold
    above: int


@dataclass(frozen=True)
class Interval:
    lo: Optional[Decimal]  # None means -inf
    hi: Optional[Decimal]  # None means +inf
    closed: str = "right"

    def __str__(self):
        lo = "-inf" if self.lo is None else _fmt_decimal(self.lo)
        hi = "inf" if self.hi is None else _fmt_decimal(self.hi)
        if self.closed == "right":
            return f"({lo},{hi})" if self.hi is None else f"({lo},{hi}]"
        return f"({lo},{hi})" if self.lo is None else f"[{lo},{hi})"

    def __contains__(self, value):
        if self.closed == "right":
            return (self.lo is None or value > self.lo) and (self.hi is None or value <= self.hi)
        return (self.lo is None or value >= self.lo) and (self.hi is None or value < self.hi)


def _below(value, threshold, closed):
    return value <= threshold if closed == "right" else value < threshold


def _fmt_decimal(d):
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def to_decimal(value):
    """Exact decimal view of a number or numeric string; rejects non-finite values."""
    if isinstance(value, bool):
        raise ModelFormatError(f"expected a number, got {value!r}")
    if isinstance(value, Decimal):
        d = value
    else:
        try:
            d = Decimal(value if isinstance(value, str) else repr(value))
        except (InvalidOperation, TypeError, ValueError):
            raise ModelFormatError(f"not a number: {value!r}") from None
    if not d.is_finite():
        raise ModelFormatError(f"non-finite value {value!r}")
    return d


class ThresholdTree:
    """Tree (or DAG) mixing ``X <= t`` (or ``X < t``) tests on numeric features with nominal tests.

    Nominal :class:`Test` nodes index into ``features`` and use state ids of
    that feature.
    """

    def __init__(self, features, classes, nodes, root, labels=None):
        self.features = tuple(features)
        self.classes = tuple(classes)
        self.nodes = tuple(nodes)
        self.root = root
        self.labels = tuple(labels) if labels is not None else None
        for node in self.nodes:
            if isinstance(node, Threshold):
                to_decimal(node.threshold)
                if self.features[node.var].kind != "numeric":
                    raise ModelFormatError(
                        f"threshold test on nominal feature {self.features[node.var].name!r}")

    def classify(self, values):
        """Classify a map ``{feature name: number or state name}`` directly."""
        n = self.root
        while True:
            node = self.nodes[n]
            if isinstance(node, Leaf):
                return node.cls
            f = self.features[node.var]
            if isinstance(node, Threshold):
                low = _below(to_decimal(values[f.name]), node.threshold, f.closed)
                n = node.below if low else node.above
            else:
                s = f.states.index(values[f.name])
                for states, child in node.edges:
                    if s in states:
                        n = child
                        break
                else:
                    raise VocabularyError(f"no edge for {f.name}={values[f.name]}")


class DiscretizationMap:
    """Interval states for each numeric feature of a threshold tree."""

    def __init__(self, vocab, features, thresholds):
        self.vocab = vocab
        self.features = tuple(features)
        # feature name -> sorted thresholds; only numeric features that are tested
        self.thresholds = dict(thresholds)
        self._feature = {f.name: f for f in self.features}

    def intervals(self, name):
        ts = self.thresholds[name]
        bounds = [None] + list(ts) + [None]
        closed = self._feature[name].closed
        return [Interval(bounds[i], bounds[i + 1], closed) for i in range(len(ts) + 1)]

    def state_index(self, name, value):
        # right-closed (t_{k-1}, t_k]: a value equal to t_k maps to state k;
        # left-closed [t_{k-1}, t_k): it maps to state k + 1
        find = bisect.bisect_left if self._feature[name].closed == "right" else bisect.bisect_right
        return find(self.thresholds[name], to_decimal(value))

    def map_instance(self, values):
        """Discrete instance for ``{feature name: value}``."""
        missing = [f.name for f in self.features if f.name not in values]
        if missing:
            raise VocabularyError(f"missing variables: {', '.join(missing)}")
        extra = set(values) - {f.name for f in self.features}
        if extra:
            raise VocabularyError(f"unknown variables: {', '.join(sorted(extra))}")
        out = []
        for f in self.features:
            v = values[f.name]
            if f.kind == "numeric":
                d = to_decimal(v)
                if f.name in self.thresholds:
                    out.append(self.state_index(f.name, d))
            else:
                var = self.vocab.var_id(f.name)
                out.append(self.vocab.state_id(var, v))
        return tuple(out)


def map_instance(m: DiscretizationMap, values):
    return m.map_instance(values)


def discretize(t: ThresholdTree):
    """Turn numeric thresholds into interval states.

    Each threshold test becomes a two-edge test whose first edge carries the
    live interval states below the threshold.  A test with one empty
    side on the current path is skipped.  Numeric features that are never
    tested are left out of the discrete vocabulary.
    """
    thresholds = {}
    for node in t.nodes:
        if isinstance(node, Threshold):
            name = t.features[node.var].name
            thresholds.setdefault(name, set()).add(to_decimal(node.threshold))
    thresholds = {k: tuple(sorted(v)) for k, v in thresholds.items()}
    variables, var_of = [], {}
    for i, f in enumerate(t.features):
        if f.kind == "numeric":
            if f.name not in thresholds:
                continue
            ts = thresholds[f.name]
            if f.labels:
                if len(f.labels) != len(ts) + 1:
                    raise ModelFormatError(
                        f"variable {f.name!r} lists {len(f.labels)} labels for {len(ts) + 1} intervals")
                states = list(f.labels)
            else:
                bounds = [None] + list(ts) + [None]
                states = [str(Interval(bounds[k], bounds[k + 1], f.closed)) for k in range(len(ts) + 1)]
        else:
            states = list(f.states)
        var_of[i] = len(variables)
        variables.append((f.name, states))
    vocab = Vocabulary(variables, t.classes)
    dmap = DiscretizationMap(vocab, t.features, thresholds)

    nodes, labels = [], []
    memo = {}

    def emit(node, label):
        nodes.append(node)
        labels.append(label)
        return len(nodes) - 1

    def tlabel(n):
        return t.labels[n] if t.labels is not None else f"n{n}"

    # iterative build keyed by (tree node, live interval sets of numeric vars)
    def build(n0, ctx0):
        stack = [(n0, ctx0, False)]
        while stack:
            n, ctx, ready = stack.pop()
            key = (n, ctx)
            if key in memo and not ready:
                continue
            node = t.nodes[n]
            if isinstance(node, Leaf):
                memo[key] = emit(Leaf(node.cls), tlabel(n))
                continue
            live = dict(ctx)
            if isinstance(node, Threshold):
                name = t.features[node.var].name
                x = var_of[node.var]
                idx = bisect.bisect_left(thresholds[name], node.threshold)
                cur = live.get(x, frozenset(range(vocab.n_states(x))))
                high = frozenset(s for s in cur if s <= idx)
                low = cur - high
                branches = [(high, node.below), (low, node.above)]
            else:
                x = var_of[node.var]
                cur = live.get(x)
                branches = [(s if cur is None else frozenset(s) & cur, c) for s, c in node.edges]
            branches = [(s, c) for s, c in branches if s]
            child_keys = []
            for s, c in branches:
                live2 = dict(live)
                live2[x] = s
                child_keys.append((c, tuple(sorted(live2.items()))))
            if len(branches) == 1:
                # redundant test on this path: forward to the only live child
                ck = child_keys[0]
                if ck in memo:
                    memo[key] = memo[ck]
                else:
                    stack.append((n, ctx, True))
                    stack.append((ck[0], ck[1], False))
                continue
            pending = [ck for ck in child_keys if ck not in memo]
            if pending:
                stack.append((n, ctx, True))
                for ck in pending:
                    stack.append((ck[0], ck[1], False))
                continue
            edges = tuple((s, memo[ck]) for (s, _), ck in zip(branches, child_keys))
            memo[key] = emit(Test(x, edges), tlabel(n))

    build(t.root, ())
    root = memo[(t.root, ())]
    return _compact(DecisionGraph(vocab, nodes, root, labels)), dmap


def _compact(g):
    """Drop nodes not reachable from the root and renumber."""
    order = g.topological()
    new_id = {n: i for i, n in enumerate(order)}
    nodes = []
    for n in order:
        node = g.nodes[n]
        if isinstance(node, Test):
            node = Test(node.var, tuple((s, new_id[c]) for s, c in node.edges))
        nodes.append(node)
    labels = [g.labels[n] for n in order] if g.labels is not None else None
    return DecisionGraph(g.vocab, nodes, new_id[g.root], labels)


# -- random generation -----------------------------------------------------


def random_graph(n_vars=5, max_states=3, n_classes=3, depth=4, seed=0, *,
                 nodes=None, share=0.0, retest=0.25, leaf_prob=0.15, max_edges=3,
                 min_states=2) -> DecisionGraph:
    """Random valid decision graph, deterministic for a given seed.

    Without ``nodes`` the graph grows depth-first, stopping at ``depth`` or
    with probability ``leaf_prob``.  ``share > 0`` then reuses finished
    sub-graphs whose tested variables have the same live states as where
    they were built, which yields a DAG with one leaf per class.  With
    ``nodes`` a tree grows breadth-first, expanding random open slots until
    about that many nodes exist.  ``retest`` is the chance of re-testing a
    variable on its live states.
    """
    if n_vars < 1 or max_states < 2 or n_classes < 2 or depth < 0:
        raise ValueError("need n_vars >= 1, max_states >= 2, n_classes >= 2, depth >= 0")
    if nodes is not None and share:
        raise ValueError("node-budget growth builds trees; use share=0")
    rng = random.Random(seed)
    variables = []
    for i in range(n_vars):
        k = rng.randint(min(min_states, max_states), max_states)
        variables.append((f"X{i}", [str(j) for j in range(k)]))
    vocab = Vocabulary(variables, [f"c{i}" for i in range(n_classes)])

    def pick_split(ctx):
        fresh = [v for v in range(n_vars) if v not in ctx]
        again = [v for v, s in ctx.items() if len(s) >= 2]
        if again and (not fresh or rng.random() < retest):
            x = rng.choice(again)
            live = sorted(ctx[x])
        elif fresh:
            x = rng.choice(fresh)
            live = list(range(vocab.n_states(x)))
        else:
            return None
        rng.shuffle(live)
        k = rng.randint(2, min(len(live), max_edges))
        cuts = sorted(rng.sample(range(1, len(live)), k - 1))
        parts, prev = [], 0
        for c in cuts + [len(live)]:
            parts.append(frozenset(live[prev:c]))
            prev = c
        return x, parts

    if nodes is None:
        return _grow_depth_first(vocab, rng, pick_split, depth, share, leaf_prob, n_classes)
    return _grow_breadth_first(vocab, rng, pick_split, depth, nodes, n_classes)


def _grow_depth_first(vocab, rng, pick_split, depth, share, leaf_prob, n_classes):
    table, tested, pool = [], [], []
    leaves = {}

    def leaf():
        c = rng.randrange(n_classes)
        if share > 0 and c in leaves:
            return leaves[c]
        table.append(Leaf(c))
        tested.append(frozenset())
        leaves[c] = len(table) - 1
        return len(table) - 1

    def grow(ctx, d):
        if d >= depth or (d > 0 and rng.random() < leaf_prob):
            return leaf()
        if share > 0 and d > 0 and pool and rng.random() < share:
            # a sub-graph is reusable where its tested variables have the
            # same live states as where it was built
            options = [p for p, req in pool
                       if {v: ctx[v] for v in tested[p] if v in ctx} == req]
            if options:
                return rng.choice(options)
        split = pick_split(ctx)
        if split is None:
            return leaf()
        x, parts = split
        edges, below = [], {x}
        for s in parts:
            cctx = dict(ctx)
            cctx[x] = s
            child = grow(cctx, d + 1)
            edges.append((s, child))
            below |= tested[child]
        table.append(Test(x, tuple(edges)))
        tested.append(frozenset(below))
        pool.append((len(table) - 1, {v: ctx[v] for v in below if v in ctx}))
        return len(table) - 1

    root = grow({}, 0)
    return _compact(DecisionGraph(vocab, table, root))


def _grow_breadth_first(vocab, rng, pick_split, depth, budget, n_classes):
    table = []  # entries: ("leaf", cls) or ["test", var, [[states, child], ...]]
    root = [None]
    holes = [(None, 0, {}, 0)]

    def fill(parent, j, node_id):
        if parent is None:
            root[0] = node_id
        else:
            table[parent][2][j][1] = node_id

    while holes:
        i = rng.randrange(len(holes))
        holes[i], holes[-1] = holes[-1], holes[i]
        parent, j, ctx, d = holes.pop()
        split = None
        if d < depth and len(table) + len(holes) + 1 < budget:
            split = pick_split(ctx)
        if split is None:
            table.append(("leaf", rng.randrange(n_classes)))
            fill(parent, j, len(table) - 1)
            continue
        x, parts = split
        me = len(table)
        table.append(["test", x, [[s, None] for s in parts]])
        fill(parent, j, me)
        for idx, s in enumerate(parts):
            cctx = dict(ctx)
            cctx[x] = s
            holes.append((me, idx, cctx, d + 1))
    out = [Leaf(e[1]) if e[0] == "leaf" else Test(e[1], tuple((s, c) for s, c in e[2]))
           for e in table]
    return _compact(DecisionGraph(vocab, out, root[0]))
