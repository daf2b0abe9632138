"""Independent reference implementations used to check the engine.

Everything here is deliberately naive: quantifiers expand into explicit
Python lists, terms are evaluated with plain integer arithmetic, and streams
are indexed directly into their value tuples.  None of it shares code with
the evaluator under test.
"""

from __future__ import annotations

import random

from tagmon.formulas import (
    And,
    Apply,
    BoolLit,
    Cmp,
    Lit,
    Not,
    Or,
    Quant,
    StreamAt,
    Var,
)
from tagmon.streams import Stream, Window
from tagmon.values import BOTTOM

_CMP_FN = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


def brute_term(term, env, streams):
    """Plain-integer term evaluation (no decimals, no bottoms)."""
    if isinstance(term, Lit):
        return term.value
    if isinstance(term, Var):
        return env[term.name]
    if isinstance(term, StreamAt):
        s = streams[term.stream]
        idx = brute_term(term.index, env, streams)
        return s.values[idx - s.window.start]
    if isinstance(term, Apply):
        args = [brute_term(a, env, streams) for a in term.args]
        if term.op == "add":
            return args[0] + args[1]
        if term.op == "sub":
            return args[0] - args[1]
        if term.op == "mul":
            return args[0] * args[1]
        if term.op == "max":
            return max(args)
        if term.op == "min":
            return min(args)
    raise AssertionError(f"oracle cannot evaluate {term!r}")


def brute_formula(formula, env, streams):
    """Quantifiers expand by full enumeration; connectives do not short-circuit."""
    if isinstance(formula, BoolLit):
        return formula.value
    if isinstance(formula, Cmp):
        return _CMP_FN[formula.op](brute_term(formula.lhs, env, streams),
                                   brute_term(formula.rhs, env, streams))
    if isinstance(formula, Not):
        return not brute_formula(formula.body, env, streams)
    if isinstance(formula, And):
        lhs = brute_formula(formula.lhs, env, streams)
        rhs = brute_formula(formula.rhs, env, streams)
        return lhs and rhs
    if isinstance(formula, Or):
        lhs = brute_formula(formula.lhs, env, streams)
        rhs = brute_formula(formula.rhs, env, streams)
        return lhs or rhs
    if isinstance(formula, Quant):
        lo = brute_term(formula.lo, env, streams)
        hi = brute_term(formula.hi, env, streams)
        rows = [brute_formula(formula.body, {**env, formula.var: k}, streams)
                for k in range(lo, hi + 1)]
        return all(rows) if formula.quantifier == "forall" else any(rows)
    raise AssertionError(f"oracle cannot evaluate {formula!r}")


def count_samples(t1, t2, s):
    """Enumerate sample points t1 + k*s while they stay within t2."""
    n = 0
    k = 0
    while t1 + k * s <= t2:
        n += 1
        k += 1
    return n


def band_oracle(sample_raws, eps_raw, delta_raw):
    """Classify raw scaled samples; None marks a missed reading."""
    if any(v is None for v in sample_raws):
        return "absent"
    peak = max(sample_raws)
    if peak < eps_raw - delta_raw:
        return "green"
    if peak > eps_raw + delta_raw:
        return "red"
    return "amber"


# -- random generation ---------------------------------------------------------

_VAR_POOL = ("i", "j", "k")


def random_int_stream(rng: random.Random, start: int, length: int,
                      lo=-9, hi=9, bottom_rate=0.0) -> Stream:
    values = []
    for _ in range(length):
        if bottom_rate and rng.random() < bottom_rate:
            values.append(BOTTOM)
        else:
            values.append(rng.randint(lo, hi))
    return Stream(Window(start, start + length), tuple(values))


def random_term(rng: random.Random, depth: int, scope: dict,
                window: int, stream_name: str = "S"):
    """Integer-valued term; stream indices always land inside the window."""
    if depth <= 0 or rng.random() < 0.4:
        roll = rng.random()
        if roll < 0.35 and scope:
            return Var(rng.choice(sorted(scope)))
        if roll < 0.6:
            safe_vars = [v for v, (lo, hi) in scope.items()
                         if 0 <= lo and hi < window]
            if safe_vars and rng.random() < 0.7:
                return StreamAt(stream_name, Var(rng.choice(sorted(safe_vars))))
            return StreamAt(stream_name, Lit(rng.randrange(window)))
        return Lit(rng.randint(-20, 20))
    op = rng.choice(("add", "sub", "mul"))
    return Apply(op, (random_term(rng, depth - 1, scope, window, stream_name),
                      random_term(rng, depth - 1, scope, window, stream_name)))


def random_formula(rng: random.Random, depth: int, scope: dict,
                   window: int, stream_name: str = "S", quants_left: int = 2):
    """Closed random formula over one integer stream named stream_name."""
    if depth <= 0:
        if rng.random() < 0.1:
            return BoolLit(rng.random() < 0.5)
        op = rng.choice(("eq", "ne", "lt", "le", "gt", "ge"))
        return Cmp(op, random_term(rng, 1, scope, window, stream_name),
                   random_term(rng, 1, scope, window, stream_name))
    roll = rng.random()
    if roll < 0.2:
        return Not(random_formula(rng, depth - 1, scope, window,
                                  stream_name, quants_left))
    if roll < 0.45:
        node = And if rng.random() < 0.5 else Or
        return node(random_formula(rng, depth - 1, scope, window,
                                   stream_name, quants_left),
                    random_formula(rng, depth - 1, scope, window,
                                   stream_name, quants_left))
    if roll < 0.7 and quants_left > 0:
        var = rng.choice(_VAR_POOL)
        lo = rng.randrange(window)
        hi = min(window - 1, lo + rng.randint(0, 7))
        body_scope = dict(scope)
        body_scope[var] = (lo, hi)
        body = random_formula(rng, depth - 1, body_scope, window,
                              stream_name, quants_left - 1)
        quantifier = "forall" if rng.random() < 0.5 else "exists"
        return Quant(quantifier, var, Lit(lo), Lit(hi), body)
    op = rng.choice(("eq", "ne", "lt", "le", "gt", "ge"))
    return Cmp(op, random_term(rng, 2, scope, window, stream_name),
               random_term(rng, 2, scope, window, stream_name))
