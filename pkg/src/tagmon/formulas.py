"""Attribute formulas: terms, formulas, evaluation and templates.

Attributes over behaviour streams are written in a small first-order language
whose quantifiers always carry explicit finite integer bounds, which keeps
every formula evaluable by direct expansion.  Terms may read a stream at a
computed tick (``b[t1 + k*s]``) or hand a whole stream to the sampling
reductions ``max``/``min`` (``max(b, t1, t2, s)`` is the maximum of the
readings at t1, t1+s, ..., up to t2).

Undefined readings are strict: a BOTTOM anywhere inside a term makes the term
BOTTOM, and an atomic test over BOTTOM raises BottomEncountered rather than
inventing a truth value.  The monitoring layer routes that exception to the
scenario's missing-data judgement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple, Union

from .errors import (
    ArityMismatch,
    BottomEncountered,
    BoundNotInteger,
    KindError,
    KindMismatch,
    MissingParameter,
    UnboundIdentifier,
    UnknownSymbol,
)
from .streams import BASE_SIGNATURE, Signature, Stream
from .values import BOTTOM, CarrierValue, compare, format_value, is_carrier

# -- terms --------------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: CarrierValue


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Apply:
    op: str
    args: Tuple["Term", ...]


@dataclass(frozen=True)
class StreamAt:
    stream: str
    index: "Term"


Term = Union[Lit, Var, Apply, StreamAt]


# -- formulas -----------------------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # eq ne lt le gt ge
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class TestApp:
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Quant:
    quantifier: str  # "forall" | "exists"
    var: str
    lo: Term
    hi: Term
    body: "Formula"


Formula = Union[BoolLit, Cmp, TestApp, Not, And, Or, Quant]


@dataclass(frozen=True)
class Environment:
    """Evaluation bindings: plain variables and named behaviour streams."""

    variables: Mapping[str, CarrierValue] = field(default_factory=dict)
    streams: Mapping[str, Stream] = field(default_factory=dict)


# -- evaluation ---------------------------------------------------------------


def _lookup(name: str, env: Environment, sig: Signature):
    if name in env.variables:
        return env.variables[name]
    if name in env.streams:
        return env.streams[name]
    if name in sig.constants:
        return sig.constants[name]
    raise UnboundIdentifier(f"unbound identifier {name!r}")


def _sampled_reduce(op: str, args, sig: Signature):
    if len(args) != 4:
        raise ArityMismatch(
            f"sampled {op} takes (stream, start, end, step), got {len(args)} "
            "arguments")
    stream, t1, t2, s = args
    for bound in (t1, t2, s):
        if bound is BOTTOM:
            return BOTTOM
        if isinstance(bound, bool) or not isinstance(bound, int):
            raise KindError(f"sample bounds must be integers, got {bound!r}")
    if s < 1:
        raise KindError(f"sample step must be positive, got {s}")
    if t2 < t1:
        raise KindError(f"empty sample range [{t1}, {t2}]")
    count = (t2 - t1) // s
    samples = [stream.at(t1 + k * s) for k in range(count + 1)]
    if any(v is BOTTOM for v in samples):
        return BOTTOM
    return sig.operation(op).fn(*samples) if len(samples) > 1 else samples[0]


def eval_term(term: Term, env: Environment,
              sig: Optional[Signature] = None):
    """Value of a term; returns BOTTOM if any reading involved is undefined.

    A bare identifier bound to a stream evaluates to the stream itself, which
    is only consumable as the first argument of ``max``/``min``.
    """
    sig = sig or BASE_SIGNATURE
    if isinstance(term, Lit):
        return term.value
    if isinstance(term, Var):
        return _lookup(term.name, env, sig)
    if isinstance(term, StreamAt):
        bound = _lookup(term.stream, env, sig)
        if not isinstance(bound, Stream):
            raise KindError(f"{term.stream!r} is not bound to a stream")
        idx = eval_term(term.index, env, sig)
        if idx is BOTTOM:
            return BOTTOM
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise KindError(f"stream index must be an integer, got {idx!r}")
        return bound.at(idx)
    if isinstance(term, Apply):
        if term.op not in sig.operations:
            raise UnknownSymbol(f"unknown operation {term.op!r}")
        args = [eval_term(a, env, sig) for a in term.args]
        if args and isinstance(args[0], Stream):
            if term.op in ("max", "min"):
                return _sampled_reduce(term.op, args, sig)
            raise KindError(
                f"stream argument is only valid in sampled max/min, "
                f"not {term.op!r}")
        if any(isinstance(a, Stream) for a in args):
            raise KindError(f"stream used as a plain value in {term.op!r}")
        op = sig.operation(term.op)
        if op.arity is not None and op.arity != len(args):
            raise ArityMismatch(
                f"{term.op} expects {op.arity} arguments, got {len(args)}")
        if op.arity is None and len(args) < 2:
            raise ArityMismatch(f"{term.op} needs at least 2 arguments")
        if any(a is BOTTOM for a in args):
            return BOTTOM
        try:
            return op.fn(*args)
        except KindMismatch as exc:
            raise KindError(str(exc)) from None
    raise KindError(f"not a term: {term!r}")


def _int_bound(term: Term, env: Environment, sig: Signature) -> int:
    v = eval_term(term, env, sig)
    if v is BOTTOM:
        raise BottomEncountered("quantifier bound is undefined")
    if isinstance(v, bool) or not isinstance(v, int):
        raise BoundNotInteger(f"quantifier bound {v!r} is not an integer")
    return v


def _atom_value(term: Term, env: Environment, sig: Signature):
    v = eval_term(term, env, sig)
    if v is BOTTOM:
        raise BottomEncountered("test touched an undefined reading")
    if isinstance(v, Stream):
        raise KindError("stream used as a plain value in a test")
    return v


def eval_formula(formula: Formula, env: Environment,
                 sig: Optional[Signature] = None) -> bool:
    """Tarskian evaluation; quantifiers range over their inclusive bounds."""
    sig = sig or BASE_SIGNATURE
    if isinstance(formula, BoolLit):
        return formula.value
    if isinstance(formula, Cmp):
        lhs = _atom_value(formula.lhs, env, sig)
        rhs = _atom_value(formula.rhs, env, sig)
        try:
            return compare(formula.op, lhs, rhs)
        except KindMismatch as exc:
            raise KindError(str(exc)) from None
    if isinstance(formula, TestApp):
        if formula.name not in sig.tests:
            raise UnknownSymbol(f"unknown test {formula.name!r}")
        ts = sig.test(formula.name)
        args = [_atom_value(a, env, sig) for a in formula.args]
        if ts.arity is not None and ts.arity != len(args):
            raise ArityMismatch(
                f"{formula.name} expects {ts.arity} arguments, "
                f"got {len(args)}")
        try:
            return bool(ts.fn(*args))
        except KindMismatch as exc:
            raise KindError(str(exc)) from None
    if isinstance(formula, Not):
        return not eval_formula(formula.body, env, sig)
    if isinstance(formula, And):
        return (eval_formula(formula.lhs, env, sig)
                and eval_formula(formula.rhs, env, sig))
    if isinstance(formula, Or):
        return (eval_formula(formula.lhs, env, sig)
                or eval_formula(formula.rhs, env, sig))
    if isinstance(formula, Quant):
        lo = _int_bound(formula.lo, env, sig)
        hi = _int_bound(formula.hi, env, sig)
        scope = dict(env.variables)
        inner = Environment(scope, env.streams)
        if formula.quantifier == "forall":
            for k in range(lo, hi + 1):
                scope[formula.var] = k
                if not eval_formula(formula.body, inner, sig):
                    return False
            return True
        for k in range(lo, hi + 1):
            scope[formula.var] = k
            if eval_formula(formula.body, inner, sig):
                return True
        return False
    raise KindError(f"not a formula: {formula!r}")


# -- structural helpers -------------------------------------------------------


def free_names(formula: Formula) -> frozenset:
    """Identifiers not bound by any enclosing quantifier.

    Stream ids referenced through ``name[...]`` accesses are included; the
    caller decides which names the evaluation environment will provide.
    """
    out = set()

    def walk_term(t, bound):
        if isinstance(t, Var):
            if t.name not in bound:
                out.add(t.name)
        elif isinstance(t, Apply):
            for a in t.args:
                walk_term(a, bound)
        elif isinstance(t, StreamAt):
            if t.stream not in bound:
                out.add(t.stream)
            walk_term(t.index, bound)

    def walk(f, bound):
        if isinstance(f, Cmp):
            walk_term(f.lhs, bound)
            walk_term(f.rhs, bound)
        elif isinstance(f, TestApp):
            for a in f.args:
                walk_term(a, bound)
        elif isinstance(f, Not):
            walk(f.body, bound)
        elif isinstance(f, (And, Or)):
            walk(f.lhs, bound)
            walk(f.rhs, bound)
        elif isinstance(f, Quant):
            walk_term(f.lo, bound)
            walk_term(f.hi, bound)
            walk(f.body, bound | {f.var})

    walk(formula, frozenset())
    return frozenset(out)


def substitute(formula: Formula, mapping: Mapping[str, CarrierValue]):
    """Replace free identifiers by literal values.

    Substituted values are literals, so no capture is possible; occurrences
    shadowed by a quantifier of the same name are left alone.
    """

    def sub_term(t, blocked):
        if isinstance(t, Var):
            if t.name in mapping and t.name not in blocked:
                return Lit(mapping[t.name])
            return t
        if isinstance(t, Apply):
            return Apply(t.op, tuple(sub_term(a, blocked) for a in t.args))
        if isinstance(t, StreamAt):
            return StreamAt(t.stream, sub_term(t.index, blocked))
        return t

    def sub(f, blocked):
        if isinstance(f, Cmp):
            return Cmp(f.op, sub_term(f.lhs, blocked),
                       sub_term(f.rhs, blocked))
        if isinstance(f, TestApp):
            return TestApp(f.name,
                           tuple(sub_term(a, blocked) for a in f.args))
        if isinstance(f, Not):
            return Not(sub(f.body, blocked))
        if isinstance(f, And):
            return And(sub(f.lhs, blocked), sub(f.rhs, blocked))
        if isinstance(f, Or):
            return Or(sub(f.lhs, blocked), sub(f.rhs, blocked))
        if isinstance(f, Quant):
            return Quant(f.quantifier, f.var,
                         sub_term(f.lo, blocked), sub_term(f.hi, blocked),
                         sub(f.body, blocked | {f.var}))
        return f

    return sub(formula, frozenset())


# -- attribute templates ------------------------------------------------------


@dataclass(frozen=True)
class AttributeSpec:
    """Named formula template backing one judgement label.

    ``params`` are the identifiers substituted at instantiation time;
    ``stream_name`` is the identifier the behaviour stream is bound to during
    observation.  A spec with ``matches_undefined`` set holds exactly when
    evaluating its formula touches an undefined reading; this is how a
    missing-data judgement is expressed without a three-valued logic.
    """

    name: str
    label: str
    template: Formula
    params: Tuple[str, ...] = ()
    stream_name: str = "b"
    matches_undefined: bool = False


def instantiate(spec: AttributeSpec,
                bindings: Mapping[str, CarrierValue]) -> Formula:
    """Close a template by substituting every declared parameter."""
    missing = [p for p in spec.params if p not in bindings]
    if missing:
        raise MissingParameter(
            f"{spec.name}: unbound parameters {missing}")
    chosen = {}
    for p in spec.params:
        v = bindings[p]
        if v is BOTTOM or not is_carrier(v):
            raise KindError(
                f"{spec.name}: parameter {p}={v!r} is not a carrier value")
        chosen[p] = v
    return substitute(spec.template, chosen)


# -- canonical printing -------------------------------------------------------

_CMP_TEXT = {"eq": "=", "ne": "!=", "lt": "<", "le": "<=",
             "gt": ">", "ge": ">="}
_INFIX = {"add": (" + ", 1), "sub": (" - ", 1),
          "mul": (" * ", 2), "div": (" / ", 2)}


def print_term(term: Term) -> str:
    return _pt(term, 0)


def _pt(t: Term, req: int) -> str:
    if isinstance(t, Lit):
        return format_value(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, StreamAt):
        return f"{t.stream}[{_pt(t.index, 0)}]"
    if isinstance(t, Apply):
        if t.op in _INFIX and len(t.args) == 2:
            text, prec = _INFIX[t.op]
            s = _pt(t.args[0], prec) + text + _pt(t.args[1], prec + 1)
            return f"({s})" if prec < req else s
        if t.op == "neg" and len(t.args) == 1:
            s = "-" + _pt(t.args[0], 3)
            return f"({s})" if req > 3 else s
        return f"{t.op}({', '.join(_pt(a, 0) for a in t.args)})"
    raise KindError(f"not a term: {t!r}")


def print_formula(formula: Formula) -> str:
    """Canonical concrete syntax; parse(print(f)) reproduces f structurally."""
    return _pf(formula, 0)


def _pf(f: Formula, req: int) -> str:
    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        return f"{_pt(f.lhs, 1)} {_CMP_TEXT[f.op]} {_pt(f.rhs, 1)}"
    if isinstance(f, TestApp):
        return f"{f.name}({', '.join(_pt(a, 0) for a in f.args)})"
    if isinstance(f, Not):
        s = "not " + _pf(f.body, 3)
        return f"({s})" if req > 3 else s
    if isinstance(f, And):
        s = _pf(f.lhs, 2) + " and " + _pf(f.rhs, 3)
        return f"({s})" if req > 2 else s
    if isinstance(f, Or):
        s = _pf(f.lhs, 1) + " or " + _pf(f.rhs, 2)
        return f"({s})" if req > 1 else s
    if isinstance(f, Quant):
        s = (f"{f.quantifier} {f.var} in {_pt(f.lo, 0)} .. {_pt(f.hi, 0)}"
             f" : {_pf(f.body, 0)}")
        return f"({s})" if req > 0 else s
    raise KindError(f"not a formula: {f!r}")
