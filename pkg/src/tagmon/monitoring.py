"""Monitoring stack: bind behaviours to entities, observe attributes, emit records.

An entity's characteristics parameterise both its behaviour stream and the
attributes observed over it.  Observation of a predicate family evaluates one
closed formula per judgement label and demands that exactly one of them
holds; anything else means the family was mis-specified and is reported
loudly instead of being masked by evaluation order.

Everything here is pure: monitoring never mutates characteristics or streams,
so records are audit-stable snapshots.  The only mutation in the whole engine
happens downstream, in the intervention layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Tuple

from .errors import (
    AmbiguousJudgement,
    BottomEncountered,
    KindMismatch,
    NoJudgement,
    UnboundBehaviour,
    UnknownField,
)
from .formulas import AttributeSpec, Environment, eval_formula, instantiate
from .streams import Signature, Stream
from .values import CarrierValue, format_value, is_carrier


@dataclass(frozen=True)
class JudgementSet:
    """Finite, ordered set of judgement labels."""

    labels: Tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise KindMismatch("judgement set must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise KindMismatch(f"duplicate judgement labels: {self.labels}")

    def __contains__(self, label):
        return label in self.labels

    def __iter__(self):
        return iter(self.labels)


class Characteristics:
    """Immutable ordered record of named fields.

    A field holds either a carrier value or a nested Characteristics
    sub-record (a sentence inside an offender's characteristics, say).  The
    schema is fixed at construction: updates may replace values but never add
    or remove fields.
    """

    __slots__ = ("_fields",)

    def __init__(self, fields: Sequence[Tuple[str, object]]):
        seen = set()
        for name, value in fields:
            if name in seen:
                raise KindMismatch(f"duplicate field {name!r}")
            seen.add(name)
            if not isinstance(value, Characteristics) and not is_carrier(value):
                raise KindMismatch(f"field {name!r} holds {value!r}")
        object.__setattr__(self, "_fields", tuple(fields))

    @classmethod
    def of(cls, **fields) -> "Characteristics":
        return cls(tuple(fields.items()))

    def __setattr__(self, name, value):
        raise AttributeError("Characteristics are immutable")

    @property
    def field_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self._fields)

    def get(self, name: str):
        for n, v in self._fields:
            if n == name:
                return v
        raise UnknownField(f"no characteristics field {name!r}")

    def with_field(self, name: str, value) -> "Characteristics":
        """Copy with one existing top-level field replaced."""
        if name not in self.field_names:
            raise UnknownField(f"no characteristics field {name!r}")
        return Characteristics(tuple(
            (n, value if n == name else v) for n, v in self._fields))

    def flatten(self) -> dict:
        """Leaf fields by name, descending into sub-records.

        Leaf names must be unique across the whole record; these are the
        bindings attribute templates are instantiated from.
        """
        out = {}

        def walk(rec):
            for n, v in rec._fields:
                if isinstance(v, Characteristics):
                    walk(v)
                else:
                    if n in out:
                        raise KindMismatch(
                            f"flattened field name {n!r} is ambiguous")
                    out[n] = v

        walk(self)
        return out

    def fingerprint(self) -> str:
        """Canonical one-line text; also the records-file serialization."""
        parts = []
        for n, v in self._fields:
            if isinstance(v, Characteristics):
                parts.append(f"{n}=({v.fingerprint().replace(';', ',')})")
            else:
                parts.append(f"{n}={format_value(v)}")
        return ";".join(parts)

    def __eq__(self, other):
        return (isinstance(other, Characteristics)
                and self._fields == other._fields)

    def __hash__(self):
        return hash(self._fields)

    def __repr__(self):
        return f"Characteristics({self.fingerprint()})"


@dataclass(frozen=True)
class PredicateFamily:
    """One attribute template per judgement label, evaluated together.

    ``derive_params`` may extend the bindings drawn from an entity's
    characteristics with computed values (a threshold built from a limit and
    an error margin, say) before templates are instantiated.
    """

    name: str
    judgements: JudgementSet
    specs: Tuple[AttributeSpec, ...]
    derive_params: Optional[Callable[[dict], dict]] = None

    def __post_init__(self):
        spec_labels = [s.label for s in self.specs]
        if sorted(spec_labels) != sorted(self.judgements.labels):
            raise KindMismatch(
                f"family {self.name}: specs cover {sorted(spec_labels)}, "
                f"judgements are {sorted(self.judgements.labels)}")
        stream_names = {s.stream_name for s in self.specs}
        if len(stream_names) != 1:
            raise KindMismatch(
                f"family {self.name}: inconsistent stream names "
                f"{sorted(stream_names)}")

    @property
    def stream_name(self) -> str:
        return self.specs[0].stream_name

    def bindings_for(self, entity: str, chi: Characteristics,
                     extra: Optional[Mapping[str, CarrierValue]] = None) -> dict:
        bindings = chi.flatten()
        if extra:
            bindings.update(extra)
        if self.derive_params is not None:
            bindings = self.derive_params(bindings)
        return bindings


@dataclass(frozen=True)
class Record:
    """Monitoring output: who, under what characteristics, judged what."""

    entity: str
    characteristics: Characteristics
    attribute: str
    judgement: str
    evaluated_at: int


class BehaviourBinding:
    """Assignment of behaviour streams to (entity, characteristics) pairs.

    Recorded traces are usually bound per entity regardless of the current
    characteristics; a characteristics-specific binding takes precedence when
    present, which is how a feedback loop that genuinely changes behaviour
    would be wired in.
    """

    def __init__(self):
        self._by_chi = {}
        self._default = {}

    def bind(self, entity: str, stream: Stream) -> "BehaviourBinding":
        self._default[entity] = stream
        return self

    def bind_for(self, entity: str, chi: Characteristics,
                 stream: Stream) -> "BehaviourBinding":
        self._by_chi[(entity, chi)] = stream
        return self

    def resolve(self, entity: str, chi: Characteristics) -> Stream:
        key = (entity, chi)
        if key in self._by_chi:
            return self._by_chi[key]
        if entity in self._default:
            return self._default[entity]
        raise UnboundBehaviour(f"no behaviour bound for entity {entity!r}")


def behaviour_of(entity: str, chi: Characteristics,
                 binding: BehaviourBinding) -> Stream:
    return binding.resolve(entity, chi)


def observe_uniform(spec: AttributeSpec, a: Stream,
                    sig: Optional[Signature] = None) -> bool:
    """Evaluate a closed (parameter-free) attribute over one behaviour."""
    formula = instantiate(spec, {})
    env = Environment({}, {spec.stream_name: a})
    return eval_formula(formula, env, sig)


def _spec_holds(spec: AttributeSpec, bindings, a: Stream,
                sig: Optional[Signature]) -> bool:
    formula = instantiate(spec, bindings)
    env = Environment({}, {spec.stream_name: a})
    try:
        value = eval_formula(formula, env, sig)
    except BottomEncountered:
        return spec.matches_undefined
    return False if spec.matches_undefined else value


def observe_family(family: PredicateFamily, entity: str,
                   chi: Characteristics, a: Stream,
                   sig: Optional[Signature] = None,
                   extra_params: Optional[Mapping] = None) -> str:
    """Judgement label whose predicate holds; every predicate is checked.

    All labels are evaluated even after a hit so that coverage and
    disjointness violations surface as NoJudgement/AmbiguousJudgement instead
    of being hidden by declaration order.
    """
    bindings = family.bindings_for(entity, chi, extra_params)
    holders = [spec.label for spec in family.specs
               if _spec_holds(spec, bindings, a, sig)]
    if not holders:
        raise NoJudgement(
            f"family {family.name}: no predicate holds for {entity!r}")
    if len(holders) > 1:
        raise AmbiguousJudgement(
            f"family {family.name}: predicates overlap on {holders} "
            f"for {entity!r}")
    return holders[0]


def monitor(entity: str, chi: Characteristics, family: PredicateFamily,
            binding: BehaviourBinding, now: int,
            sig: Optional[Signature] = None,
            extra_params: Optional[Mapping] = None) -> Record:
    """Observe one entity and produce its record; inputs are left untouched."""
    a = behaviour_of(entity, chi, binding)
    judgement = observe_family(family, entity, chi, a, sig, extra_params)
    return Record(entity=entity, characteristics=chi, attribute=family.name,
                  judgement=judgement, evaluated_at=now)


def format_record(rec: Record) -> str:
    """Records-file line: evaluated_at|entity|attribute|judgement|chi."""
    return (f"{rec.evaluated_at}|{rec.entity}|{rec.attribute}"
            f"|{rec.judgement}|{rec.characteristics.fingerprint()}")
