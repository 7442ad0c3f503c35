"""JSON model and instance documents.

A model document lists variables, classes and a node table whose entries
are leaves (``{"id", "class"}``), nominal tests (``{"id", "test",
"edges": [{"states", "child"}]}``) or numeric threshold tests (``{"id",
"test", "threshold", "below", "above"}``).  Node references use string ids.
Thresholds are decimal strings so golden files never pick up float noise.
A numeric variable tests ``X <= t`` by default; ``"closed": "left"``
switches it to ``X < t``, and ``"labels"`` names its interval states.
The schema lives in ``data/model.schema.json``.
"""

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import jsonschema

from .core_logic import Vocabulary
from .decision_graph import (DecisionGraph, Feature, Leaf, Test, Threshold, ThresholdTree,
                             _fmt_decimal, classify, discretize, to_decimal, validate)
from .errors import ModelFormatError, VocabularyError

FORMAT = "dgexplain-model"
VERSION = 1


@lru_cache(maxsize=None)
def load_schema(name):
    text = resources.files("dgexplain").joinpath("data", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def _json_path(parts):
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _decode(data, what):
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelFormatError(f"{what} is not UTF-8: {e}") from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{what} is not valid JSON: {e}") from None


def check_schema(obj, name):
    """Raise :class:`ModelFormatError` for the most relevant schema violation."""
    validator = jsonschema.Draft202012Validator(load_schema(name))
    err = jsonschema.exceptions.best_match(validator.iter_errors(obj))
    if err is not None:
        raise ModelFormatError(err.message, _json_path(err.absolute_path))


@dataclass(frozen=True)
class ModelDocument:
    kind: str  # "decision-graph" | "threshold-tree"
    features: tuple  # Feature
    classes: tuple
    ids: tuple  # external node ids, aligned with ``nodes``
    nodes: tuple  # Leaf / Test / Threshold with integer references
    root: int

    def build(self):
        return Model(self)


class Model:
    """A parsed model ready for classification and explanation.

    ``graph`` is always a discrete :class:`DecisionGraph`; threshold trees
    are discretized first and ``dmap`` maps raw values to interval states.
    """

    def __init__(self, doc: ModelDocument):
        self.doc = doc
        if doc.kind == "decision-graph":
            vocab = Vocabulary([(f.name, f.states) for f in doc.features], doc.classes)
            self.graph = DecisionGraph(vocab, doc.nodes, doc.root, doc.ids)
            self.tree = None
            self.dmap = None
        else:
            self.tree = ThresholdTree(doc.features, doc.classes, doc.nodes, doc.root, doc.ids)
            self.graph, self.dmap = discretize(self.tree)
        self.vocab = self.graph.vocab

    def instance(self, values):
        """Discrete instance for ``{variable: value}``."""
        if not isinstance(values, dict):
            raise ModelFormatError("an instance must be a JSON object")
        if self.dmap is not None:
            return self.dmap.map_instance(values)
        names = {}
        for k, v in values.items():
            if not isinstance(v, str):
                raise VocabularyError(f"variable {k!r} needs a state name, got {v!r}")
            names[k] = v
        return self.vocab.instance(names)

    def classify(self, values):
        return self.vocab.classes[classify(self.graph, self.instance(values))]


def _fail(msg, *path):
    raise ModelFormatError(msg, _json_path(path))


def parse_model(data) -> ModelDocument:
    """Parse and check a model document (bytes, str or an already decoded dict).

    Decision graphs must also pass the weak test-once check; threshold
    trees must discretize.
    """
    obj = data if isinstance(data, dict) else _decode(data, "model")
    check_schema(obj, "model")
    kind = obj["kind"]
    features, fidx = [], {}
    for i, v in enumerate(obj["variables"]):
        name = v["name"]
        if name in fidx:
            _fail(f"duplicate variable {name!r}", "variables", i, "name")
        if v["kind"] == "nominal":
            states = v.get("states")
            if states is None:
                _fail(f"nominal variable {name!r} needs states", "variables", i)
            if len(set(states)) != len(states):
                _fail(f"variable {name!r} has duplicate states", "variables", i, "states")
        else:
            if "states" in v:
                _fail(f"numeric variable {name!r} must not list states", "variables", i)
            labels = v.get("labels", ())
            if len(set(labels)) != len(labels):
                _fail(f"variable {name!r} has duplicate labels", "variables", i, "labels")
            if kind == "decision-graph":
                _fail(f"numeric variable {name!r} requires kind threshold-tree", "variables", i)
            states = ()
        if v["kind"] == "nominal" and ("closed" in v or "labels" in v):
            _fail(f"nominal variable {name!r} cannot set closed or labels", "variables", i)
        fidx[name] = i
        features.append(Feature(name, v["kind"], tuple(states), v.get("closed", "right"),
                                tuple(v.get("labels", ()))))
    classes = tuple(obj["classes"])
    if len(set(classes)) != len(classes):
        _fail("duplicate class names", "classes")
    cidx = {c: i for i, c in enumerate(classes)}

    raw_nodes = obj["nodes"]
    nidx = {}
    for i, nd in enumerate(raw_nodes):
        if nd["id"] in nidx:
            _fail(f"duplicate node id {nd['id']!r}", "nodes", i, "id")
        nidx[nd["id"]] = i
    if obj["root"] not in nidx:
        _fail(f"root {obj['root']!r} is not a defined node", "root")

    def ref(nid, node_id, *path):
        if nid not in nidx:
            _fail(f"node {node_id!r} points to undefined child {nid!r}", "nodes", *path)
        return nidx[nid]

    nodes = []
    for i, nd in enumerate(raw_nodes):
        nid = nd["id"]
        if "class" in nd:
            if nd["class"] not in cidx:
                _fail(f"node {nid!r} has unknown class {nd['class']!r}", "nodes", i, "class")
            nodes.append(Leaf(cidx[nd["class"]]))
            continue
        var = nd["test"]
        if var not in fidx:
            _fail(f"node {nid!r} tests unknown variable {var!r}", "nodes", i, "test")
        f = features[fidx[var]]
        if "threshold" in nd:
            if f.kind != "numeric":
                _fail(f"node {nid!r} puts a threshold on nominal variable {var!r}", "nodes", i)
            nodes.append(Threshold(fidx[var], to_decimal(nd["threshold"]),
                                   ref(nd["below"], nid, i, "below"), ref(nd["above"], nid, i, "above")))
            continue
        if f.kind != "nominal":
            _fail(f"node {nid!r} needs a threshold for numeric variable {var!r}", "nodes", i)
        sidx = {s: k for k, s in enumerate(f.states)}
        edges = []
        for j, e in enumerate(nd["edges"]):
            bad = [s for s in e["states"] if s not in sidx]
            if bad:
                _fail(f"node {nid!r} uses unknown states {bad} of {var!r}", "nodes", i, "edges", j)
            edges.append((frozenset(sidx[s] for s in e["states"]), ref(e["child"], nid, i, "edges", j, "child")))
        nodes.append(Test(fidx[var], tuple(edges)))

    _check_shape(nodes, nidx[obj["root"]], [nd["id"] for nd in raw_nodes])
    doc = ModelDocument(kind, tuple(features), classes, tuple(nd["id"] for nd in raw_nodes),
                        tuple(nodes), nidx[obj["root"]])
    if kind == "threshold-tree":
        doc.build()
    else:
        report = validate(doc.build().graph)
        if not report.valid:
            v = report.first()
            where = ("nodes", v.node) if v.node is not None else ()
            _fail(v.message, *where)
    return doc


def _children(node):
    if isinstance(node, Threshold):
        return [node.below, node.above]
    if isinstance(node, Test):
        return [c for _, c in node.edges]
    return []


def _check_shape(nodes, root, ids):
    """No cycles and no unreachable nodes."""
    state = {root: 1}
    stack = [(root, iter(_children(nodes[root])))]
    while stack:
        n, it = stack[-1]
        for c in it:
            if state.get(c) == 1:
                _fail(f"cycle through node {ids[c]!r}", "nodes", c)
            if c not in state:
                state[c] = 1
                stack.append((c, iter(_children(nodes[c]))))
                break
        else:
            state[n] = 2
            stack.pop()
    for n in range(len(nodes)):
        if n not in state:
            _fail(f"node {ids[n]!r} is not reachable from the root", "nodes", n)


def model_to_dict(doc: ModelDocument) -> dict:
    variables = []
    for f in doc.features:
        entry = {"name": f.name, "kind": f.kind}
        if f.kind == "nominal":
            entry["states"] = list(f.states)
        else:
            if f.closed != "right":
                entry["closed"] = f.closed
            if f.labels:
                entry["labels"] = list(f.labels)
        variables.append(entry)
    nodes = []
    for nid, node in zip(doc.ids, doc.nodes):
        if isinstance(node, Leaf):
            nodes.append({"id": nid, "class": doc.classes[node.cls]})
        elif isinstance(node, Threshold):
            nodes.append({"id": nid, "test": doc.features[node.var].name,
                          "threshold": _fmt_decimal(node.threshold),
                          "below": doc.ids[node.below], "above": doc.ids[node.above]})
        else:
            f = doc.features[node.var]
            nodes.append({"id": nid, "test": f.name,
                          "edges": [{"states": [f.states[s] for s in sorted(states)],
                                     "child": doc.ids[c]} for states, c in node.edges]})
    return {"format": FORMAT, "version": VERSION, "kind": doc.kind, "variables": variables,
            "classes": list(doc.classes), "root": doc.ids[doc.root], "nodes": nodes}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def emit_model(doc: ModelDocument) -> bytes:
    """Canonical UTF-8 JSON for a document."""
    return dumps(model_to_dict(doc)).encode("utf-8")


def document_from_graph(g: DecisionGraph) -> ModelDocument:
    vocab = g.vocab
    features = tuple(Feature(v.name, "nominal", v.states) for v in vocab.variables)
    ids = tuple(g.label(n) for n in range(len(g.nodes)))
    return ModelDocument("decision-graph", features, vocab.classes, ids, g.nodes, g.root)


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_model(data).build()
    except ModelFormatError as e:
        raise ModelFormatError(str(e), str(path)) from None


def parse_instance(data, model: Model):
    """Instance tuple from a JSON object, or a list of them from a JSON array."""
    obj = data if isinstance(data, (dict, list)) else _decode(data, "instance")
    if isinstance(obj, list):
        return [model.instance(o) for o in obj]
    return model.instance(obj)


def bundled_model(name) -> Model:
    """One of the fixtures shipped in ``data/`` (``admissions``, ``iris``, ``targeted``)."""
    text = resources.files("dgexplain").joinpath("data", f"{name}.json").read_bytes()
    return parse_model(text).build()
