"""Command-line interface: ``dgexplain <command> ...``.

Exit codes: 0 success, 1 input or usage error, 3 an enumerator timed out,
4 an enumerator overflowed its size cap, 5 an oracle check failed.
"""

import argparse
import json
import os
import sys

from . import bench as bench_mod
from . import checks
from .decision_graph import classify, random_graph, validate
from .errors import CapExceeded, DgExplainError
from .io import document_from_graph, dumps, emit_model, load_model, parse_instance
from .report import ORDER, build_report, render_text, status_of

EXIT_OK, EXIT_ERROR, EXIT_TIMEOUT, EXIT_OVERFLOW, EXIT_MISMATCH = 0, 1, 3, 4, 5
TIMEOUT_ENV = "DGEXPLAIN_TIMEOUT"
DEFAULT_TIMEOUT = 60.0


def _default_timeout():
    raw = os.environ.get(TIMEOUT_ENV)
    if raw is None:
        return DEFAULT_TIMEOUT
    try:
        value = float(raw)
    except ValueError:
        raise DgExplainError(f"{TIMEOUT_ENV} must be a number of seconds, got {raw!r}") from None
    if value <= 0:
        raise DgExplainError(f"{TIMEOUT_ENV} must be positive")
    return value


def _read_instances(arg):
    """Inline JSON if the argument looks like JSON, else a path ('-' is stdin)."""
    text = arg.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    if arg == "-":
        return json.load(sys.stdin)
    with open(arg, "rb") as fh:
        return json.loads(fh.read().decode("utf-8"))


def _write(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _modes(text):
    if text == "all":
        return ORDER
    picked = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in picked if m not in ORDER]
    if bad or not picked:
        raise argparse.ArgumentTypeError(f"modes must be 'all' or a list from {','.join(ORDER)}")
    return tuple(m for m in ORDER if m in picked)


def cmd_validate(args):
    model = load_model(args.model)
    report = validate(model.graph, strict=args.strict)
    if report.valid:
        print("valid" + (" (strict test-once)" if args.strict else ""))
        return EXIT_OK
    v = report.first()
    path = " -> ".join(model.graph.label(n) for n in v.path)
    print(f"invalid: {v.kind}: {v.message}" + (f" (path {path})" if path else ""))
    return EXIT_ERROR


def cmd_classify(args):
    model = load_model(args.model)
    data = _read_instances(args.instance)
    single = isinstance(data, dict)
    insts = parse_instance(data, model)
    for inst in [insts] if single else insts:
        print(model.vocab.classes[classify(model.graph, inst)])
    return EXIT_OK


def cmd_explain(args):
    model = load_model(args.model)
    data = _read_instances(args.instance)
    single = isinstance(data, dict)
    timeout = args.timeout if args.timeout is not None else _default_timeout()
    reports = [build_report(model, values, args.mode, args.target, timeout, args.cap,
                            timing=not args.no_timing)
               for values in ([data] if single else data)]
    if args.format == "json":
        _write(dumps(reports[0] if single else reports), args.out)
    else:
        _write("\n".join(render_text(r) for r in reports), args.out)
    status = status_of(reports)
    return {"ok": EXIT_OK, "timeout": EXIT_TIMEOUT, "overflow": EXIT_OVERFLOW}[status]


def cmd_bench(args):
    timeout = args.timeout if args.timeout is not None else _default_timeout()
    if args.model:
        model = load_model(args.model)
        rows = [bench_mod.bench_model(model, args.instances, args.seed, args.mode, timeout,
                                      args.cap, name=os.path.basename(args.model))]
    else:
        rows = bench_mod.synthetic_suite(args.trees, args.instances, args.nodes, args.vars,
                                         args.states, args.classes, args.seed, args.mode,
                                         timeout, args.cap)
        rows.append(bench_mod.pooled(rows))
    timing = not args.no_timing
    text = bench_mod.to_csv(rows, timing) if args.format == "csv" else bench_mod.to_json(rows, timing)
    _write(text, args.out)
    return EXIT_OK


def cmd_oracle_check(args):
    impl = {"snr": checks.faulty_snr} if args.inject_fault else None
    try:
        if args.model:
            model = load_model(args.model)
            pairs = checks.model_trials(model.graph, args.trials, args.seed, args.max_space)
        else:
            pairs = checks.random_trials(args.trials or 500, args.seed, max_space=args.max_space)
        n, mm = checks.run(pairs, impl)
    except CapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if mm is None:
        print(f"pass: {n} instances agree with the oracles")
        return EXIT_OK
    vocab = mm.graph.vocab
    dump = {"check": mm.check, "instance": vocab.instance_names(mm.instance),
            "expected": mm.expected, "got": mm.got,
            "model": json.loads(emit_model(document_from_graph(mm.graph)))}
    print(f"FAIL: {mm.check} disagrees with its oracle after {n} instances")
    print(json.dumps(dump, indent=2, ensure_ascii=False, default=str))
    return EXIT_MISMATCH


def cmd_gen(args):
    g = random_graph(n_vars=args.vars, max_states=args.states, n_classes=args.classes,
                     depth=args.depth, seed=args.seed, nodes=args.nodes, share=args.share)
    _write(emit_model(document_from_graph(g)).decode("utf-8"), args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="dgexplain",
                                description="Explain decisions of decision trees and graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a model document and the weak test-once property")
    v.add_argument("model")
    v.add_argument("--strict", action="store_true", help="also reject any re-test of a variable")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("classify", help="classify one instance or an array of instances")
    c.add_argument("model")
    c.add_argument("instance", help="instance JSON file, '-' for stdin, or inline JSON")
    c.set_defaults(func=cmd_classify)

    e = sub.add_parser("explain", help="complete reason plus necessary and sufficient reasons")
    e.add_argument("model")
    e.add_argument("instance", help="instance JSON file, '-' for stdin, or inline JSON")
    e.add_argument("--mode", type=_modes, default=ORDER, help="all, or a comma list of snr,nr,ssr,sr")
    e.add_argument("--target", help="explain why the instance is not in this class")
    e.add_argument("--timeout", type=float, help=f"seconds per enumerator (default ${TIMEOUT_ENV} or 60)")
    e.add_argument("--cap", type=int, default=10 ** 6, help="maximum intermediate family size")
    e.add_argument("--format", choices=("json", "text"), default="json")
    e.add_argument("--no-timing", action="store_true", help="omit wall times for stable output")
    e.add_argument("--out", help="output file (default stdout)")
    e.set_defaults(func=cmd_explain)

    b = sub.add_parser("bench", help="time the enumerators on a model or a synthetic suite")
    b.add_argument("--model", help="model file; omit for random trees")
    b.add_argument("--instances", type=int, default=1000)
    b.add_argument("--trees", type=int, default=10)
    b.add_argument("--nodes", type=int, default=2000)
    b.add_argument("--vars", type=int, default=20)
    b.add_argument("--states", type=int, default=8)
    b.add_argument("--classes", type=int, default=2)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--timeout", type=float)
    b.add_argument("--cap", type=int, default=10 ** 6)
    b.add_argument("--mode", type=_modes, default=ORDER)
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--no-timing", action="store_true")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle-check", help="compare every fast path with brute force")
    o.add_argument("--model", help="model file; omit for random graphs")
    o.add_argument("--trials", type=int, help="random graphs (default 500) or sampled model instances")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--max-space", type=int, default=10 ** 6, help="largest instance space to enumerate")
    o.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    o.set_defaults(func=cmd_oracle_check)

    gnr = sub.add_parser("gen", help="emit a random model document")
    gnr.add_argument("--vars", type=int, default=5)
    gnr.add_argument("--states", type=int, default=3)
    gnr.add_argument("--classes", type=int, default=3)
    gnr.add_argument("--depth", type=int, default=4)
    gnr.add_argument("--nodes", type=int)
    gnr.add_argument("--share", type=float, default=0.0)
    gnr.add_argument("--seed", type=int, default=0)
    gnr.add_argument("--out")
    gnr.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DgExplainError, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
