"""Benchmark harness: time the four enumerators on complete reasons.

Each row holds model statistics and the complete-reason size, then per
algorithm the mean count and mean time over completed instances, the number
of timeouts and overflows, plus stdev and maximum time.  Instances are sampled from a seeded RNG, so counts are
reproducible; times are not, which is what ``timing=False`` is for.
"""

import csv
import io
import json
import random
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .decision_graph import DecisionGraph, complete_reason, random_graph
from .errors import EnumerationOverflow, EnumerationTimeout
from .reasons import DEFAULT_CAP, ENUMERATORS

MODES = ("snr", "nr", "ssr", "sr")


@dataclass
class ModeStats:
    counts: list = field(default_factory=list)
    times: list = field(default_factory=list)
    timeouts: int = 0
    overflows: int = 0


@dataclass
class BenchRow:
    name: str
    n_vars: int
    max_states: int
    thresholds: int
    nodes: int
    edges: int
    instances: int
    cr_nodes: float
    cr_edges: float
    modes: dict  # mode -> ModeStats

    def as_dict(self, timing=True):
        out = {"model": self.name, "vars": self.n_vars, "card": self.max_states,
               "thresholds": self.thresholds, "nodes": self.nodes, "edges": self.edges,
               "instances": self.instances, "cr_nodes": round(self.cr_nodes, 1),
               "cr_edges": round(self.cr_edges, 1)}
        for m, st in self.modes.items():
            out[f"{m}_count"] = round(statistics.mean(st.counts), 1) if st.counts else None
            out[f"{m}_count_sd"] = round(statistics.pstdev(st.counts), 1) if st.counts else None
            out[f"{m}_count_max"] = max(st.counts) if st.counts else None
            if timing:
                out[f"{m}_time"] = round(statistics.mean(st.times), 4) if st.times else None
                out[f"{m}_time_sd"] = round(statistics.pstdev(st.times), 4) if st.times else None
                out[f"{m}_time_max"] = round(max(st.times), 4) if st.times else None
            out[f"{m}_timeouts"] = st.timeouts
            out[f"{m}_overflows"] = st.overflows
        return out


def _sample(g, rng, n):
    vocab = g.vocab
    return [tuple(rng.randrange(vocab.n_states(v)) for v in range(len(vocab))) for _ in range(n)]


def bench_graph(g: DecisionGraph, instances, name="model", modes=MODES, timeout=60.0,
                cap=DEFAULT_CAP, thresholds=0) -> BenchRow:
    stats = {m: ModeStats() for m in modes}
    cr_nodes, cr_edges = [], []
    for inst in instances:
        cr = complete_reason(g, inst)
        n, e = cr.size()
        cr_nodes.append(n)
        cr_edges.append(e)
        for m in modes:
            fn = ENUMERATORS[m]
            t0 = time.perf_counter()
            try:
                res = fn(cr, deadline=t0 + timeout, cap=cap)
            except EnumerationTimeout:
                stats[m].timeouts += 1
                continue
            except EnumerationOverflow:
                stats[m].overflows += 1
                continue
            stats[m].times.append(time.perf_counter() - t0)
            stats[m].counts.append(len(res))
    vocab = g.vocab
    return BenchRow(name, len(vocab), max(vocab.n_states(v) for v in range(len(vocab))),
                    thresholds, len(g.topological()), g.edge_count(), len(instances),
                    statistics.mean(cr_nodes) if cr_nodes else 0.0,
                    statistics.mean(cr_edges) if cr_edges else 0.0, stats)


def pooled(rows, name="ALL") -> BenchRow:
    """Merge rows into one, pooling per-instance samples."""
    modes = {}
    for m in rows[0].modes:
        st = ModeStats()
        for r in rows:
            st.counts += r.modes[m].counts
            st.times += r.modes[m].times
            st.timeouts += r.modes[m].timeouts
            st.overflows += r.modes[m].overflows
        modes[m] = st
    total = sum(r.instances for r in rows)

    def wmean(attr):
        return sum(getattr(r, attr) * r.instances for r in rows) / total if total else 0.0

    return BenchRow(name, max(r.n_vars for r in rows), max(r.max_states for r in rows),
                    max(r.thresholds for r in rows), max(r.nodes for r in rows),
                    max(r.edges for r in rows), total, wmean("cr_nodes"), wmean("cr_edges"), modes)


def synthetic_suite(trees=10, instances=1000, nodes=2000, n_vars=20, max_states=8, n_classes=2,
                    seed=0, modes=MODES, timeout=60.0, cap=DEFAULT_CAP):
    """Random trees of about ``nodes`` nodes; ``instances`` split evenly across them."""
    rng = random.Random(seed)
    rows = []
    per = [instances // trees + (1 if i < instances % trees else 0) for i in range(trees)]
    for i in range(trees):
        g = random_graph(n_vars=n_vars, max_states=max_states, n_classes=n_classes,
                         depth=4 * n_vars, seed=rng.randrange(2 ** 31), nodes=nodes)
        rows.append(bench_graph(g, _sample(g, rng, per[i]), f"tree{i}", modes, timeout, cap))
    return rows


def bench_model(model, instances=100, seed=0, modes=MODES, timeout=60.0, cap=DEFAULT_CAP, name="model"):
    """Benchmark a parsed :class:`dgexplain.io.Model` on random discrete instances."""
    rng = random.Random(seed)
    thresholds = sum(len(t) for t in model.dmap.thresholds.values()) if model.dmap else 0
    return bench_graph(model.graph, _sample(model.graph, rng, instances), name, modes,
                       timeout, cap, thresholds)


def to_csv(rows, timing=True) -> str:
    dicts = [r.as_dict(timing) for r in rows]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(dicts[0]), lineterminator="\n")
    w.writeheader()
    for d in dicts:
        w.writerow({k: ("" if v is None else v) for k, v in d.items()})
    return buf.getvalue()


def to_json(rows, timing=True) -> str:
    return json.dumps([r.as_dict(timing) for r in rows], indent=2) + "\n"


# -- output-polynomial instrumentation ------------------------------------------


def work_sweep(sizes=(50, 100, 200, 400, 800, 1600), per_size=20, n_vars=12, max_states=4,
               n_classes=2, seed=0):
    """``(M*E, work, M, E)`` per snr run over random trees of growing size.

    ``M`` is the number of shortest reasons and ``E`` the edge count of the
    complete reason.
    """
    rng = random.Random(seed)
    points = []
    for size in sizes:
        for _ in range(per_size):
            g = random_graph(n_vars=n_vars, max_states=max_states, n_classes=n_classes,
                             depth=4 * n_vars, seed=rng.randrange(2 ** 31), nodes=size)
            inst = _sample(g, rng, 1)[0]
            cr = complete_reason(g, inst)
            if cr.is_constant():
                continue
            res = ENUMERATORS["snr"](cr)
            m, e = len(res), res.stats["edges"]
            points.append((m * e, res.stats["work"], m, e))
    return points


def fit_slope(points):
    """Least-squares ``work ≈ slope * (M*E) + intercept`` and its r²."""
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot else 1.0
    return float(slope), float(intercept), r2
