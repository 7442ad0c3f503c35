"""Hand-built formulas shared by several test modules."""

from dgexplain.core_logic import NnfGraph, Vocabulary


def ternary():
    """``x̄1 (x2 + ȳ1) (ȳ1 + z1)`` over three ternary variables, with its store."""
    v = Vocabulary([("X", ("x1", "x2", "x3")), ("Y", ("y1", "y2", "y3")), ("Z", ("z1", "z2", "z3"))])
    g = NnfGraph(v)
    L = g.literal
    delta = g.conj([L(0, 0, False), g.disj([L(0, 1), L(1, 0, False)]),
                    g.disj([L(1, 0, False), L(2, 0)])])
    target = g.conj([L(0, 1), g.disj([L(1, 1), L(2, 0)])])
    return g, delta, target, (1, 1, 0)


def luna():
    """Boolean admissions example; state "1" is the positive reading."""
    names = ["E", "F", "G", "R", "W"]
    v = Vocabulary([(n, ("1", "0")) for n in names])
    g = NnfGraph(v)
    e, f, gg, r, w = (g.literal(i, 0) for i in range(5))
    nf = g.literal(1, 1)
    delta = g.conj([g.disj([e, gg]), g.disj([e, r]), g.disj([e, w]), g.disj([f, r]),
                    g.disj([nf, gg, w])])
    gamma = g.conj([g.disj([e, gg]), g.disj([e, w]), r, g.disj([nf, gg, w])])
    return g, delta, gamma, (0, 1, 0, 0, 0)


def names(vocab, family):
    return [sorted(vocab.format_literal(v, s) for v, s in m) for m in family]


REJECT = {"SAT": 1300, "GPA": "medium", "Essay": "fail", "Interview": "fail"}
