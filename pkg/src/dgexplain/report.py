"""Explanation reports: one JSON object per explained instance.

The human-readable text is rendered from the JSON object only.
"""

import math
import time

from .decision_graph import classify, complete_reason, targeted_complete_reason
from .errors import EnumerationOverflow, EnumerationTimeout, InvalidTarget
from .io import check_schema
from .reasons import DEFAULT_CAP, ENUMERATORS, _iml

ORDER = ("snr", "nr", "ssr", "sr")
KIND = {"snr": "necessary", "nr": "necessary", "ssr": "sufficient", "sr": "sufficient"}
TITLE = {"snr": "shortest necessary reasons", "nr": "necessary reasons",
         "ssr": "shortest sufficient reasons", "sr": "sufficient reasons"}


def build_report(model, values, modes=ORDER, target=None, timeout=60.0, cap=DEFAULT_CAP,
                 timing=True) -> dict:
    """Classify ``values``, build the (targeted) complete reason and run ``modes``.

    ``modes`` run in the fixed snr, nr, ssr, sr order whatever order they
    are given in.
    """
    vocab = model.vocab
    inst = model.instance(values)
    c = classify(model.graph, inst)
    if target is None:
        cr = complete_reason(model.graph, inst)
    else:
        try:
            t = vocab.class_id(target)
        except ValueError:
            raise InvalidTarget(f"unknown target class {target!r}") from None
        cr = targeted_complete_reason(model.graph, inst, t)
    g = cr.graph
    node = g.simplify_constants(cr.node)
    n_nodes, n_edges = g.size(node)
    root_iml = _iml(g, node)[node]
    families = []
    for m in ORDER:
        if m not in modes:
            continue
        entry = {"algorithm": m, "kind": KIND[m], "status": "ok", "count": None,
                 "lengths": [], "members": [], "k": None, "time": None}
        t0 = time.perf_counter()
        try:
            res = ENUMERATORS[m](cr, deadline=t0 + timeout, cap=cap)
        except EnumerationTimeout:
            entry["status"] = "timeout"
        except EnumerationOverflow:
            entry["status"] = "overflow"
        else:
            entry["count"] = len(res)
            entry["lengths"] = res.lengths
            entry["members"] = res.as_names(vocab)
            entry["k"] = res.k
        if timing:
            entry["time"] = round(time.perf_counter() - t0, 4)
        families.append(entry)
    report = {
        "format": "dgexplain-report",
        "version": 1,
        "instance": dict(values),
        "discrete_instance": vocab.instance_names(inst),
        "predicted": vocab.classes[c],
        "target": target,
        "complete_reason": {"nodes": n_nodes, "edges": n_edges,
                            "iml": "inf" if math.isinf(root_iml) else int(root_iml),
                            "formula": g.to_str(node)},
        "reasons": families,
    }
    check_schema(report, "report")
    return report


def status_of(reports):
    """Worst status across reports: ``ok``, ``overflow`` or ``timeout``."""
    seen = {f["status"] for r in reports for f in r["reasons"]}
    for s in ("timeout", "overflow"):
        if s in seen:
            return s
    return "ok"


def render_text(report) -> str:
    lines = []
    inst = ", ".join(f"{k}={v}" for k, v in report["discrete_instance"].items())
    lines.append(f"instance: {inst}")
    lines.append(f"class: {report['predicted']}")
    if report["target"] is not None:
        lines.append(f"target: not {report['target']}")
    cr = report["complete_reason"]
    lines.append(f"complete reason: {cr['formula']}")
    lines.append(f"  nodes={cr['nodes']} edges={cr['edges']} iml={cr['iml']}")
    for f in report["reasons"]:
        head = f"{TITLE[f['algorithm']]} ({f['algorithm']})"
        if f["time"] is not None:
            head += f" [{f['time']:.4f}s]"
        if f["status"] != "ok":
            lines.append(f"{head}: {f['status']}")
            continue
        lines.append(f"{head}: {f['count']}")
        for m in f["members"]:
            lines.append("  {" + ", ".join(m) + "}")
    return "\n".join(lines) + "\n"
