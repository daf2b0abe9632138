"""Trigger->action intervention rules and the per-cycle engine loop.

An intervention inspects the judgement in a monitoring record and, when its
trigger fires, transforms the entity's characteristics and emits a
notification to whatever infrastructure sits outside the data stack.  A
policy is an ordered list of interventions applied sequentially, each to the
characteristics the previous one produced; updates take effect from the next
monitoring cycle, never retroactively.

The engine is deterministic by construction: entities are processed in
identifier order within a cycle, so replaying the same traces and initial
characteristics reproduces byte-identical logs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

from .errors import KindMismatch, MonitorError, UnknownJudgement
from .monitoring import (
    BehaviourBinding,
    Characteristics,
    JudgementSet,
    PredicateFamily,
    Record,
    monitor,
)
from .streams import Signature
from .values import CarrierValue, format_value, is_carrier

TAXONOMY = ("access-control", "permission", "penalty", "incentive",
            "recommendation", "social-support")

_NULL = "null"
_SET_FIELD = "set-field"
_SET_FROM_JUDGEMENT = "set-from-judgement"


@dataclass(frozen=True)
class Trigger:
    """Total boolean condition on a judgement set, given extensionally."""

    domain: JudgementSet
    fires_on: frozenset

    def __post_init__(self):
        bad = set(self.fires_on) - set(self.domain.labels)
        if bad:
            raise KindMismatch(
                f"trigger fires on labels outside its domain: {sorted(bad)}")

    def fires(self, judgement: str) -> bool:
        if judgement not in self.domain:
            raise UnknownJudgement(
                f"judgement {judgement!r} outside trigger domain "
                f"{self.domain.labels}")
        return judgement in self.fires_on


@dataclass(frozen=True)
class Action:
    """Characteristics transformer; the null action is the identity."""

    kind: str
    field: Optional[str] = None
    value: Optional[CarrierValue] = None

    def __post_init__(self):
        if self.kind not in (_NULL, _SET_FIELD, _SET_FROM_JUDGEMENT):
            raise KindMismatch(f"unknown action kind {self.kind!r}")
        if self.kind != _NULL and not self.field:
            raise KindMismatch(f"{self.kind} action needs a field name")
        if self.kind == _SET_FIELD and not is_carrier(self.value):
            raise KindMismatch(f"set-field value {self.value!r} is not "
                               "a carrier value")

    @classmethod
    def null(cls) -> "Action":
        return cls(_NULL)

    @classmethod
    def set_field(cls, field: str, value: CarrierValue) -> "Action":
        return cls(_SET_FIELD, field, value)

    @classmethod
    def set_from_judgement(cls, field: str) -> "Action":
        return cls(_SET_FROM_JUDGEMENT, field)

    def apply(self, chi: Characteristics, judgement: str) -> Characteristics:
        if self.kind == _NULL:
            return chi
        if self.kind == _SET_FIELD:
            return chi.with_field(self.field, self.value)
        return chi.with_field(self.field, judgement)


@dataclass(frozen=True)
class Intervention:
    """A named trigger->action rule with a purpose tag.

    The tag classifies what the rule is for (penalty, incentive, ...) and is
    metadata only.  ``notify_always`` opts a rule into emitting a heartbeat
    notification even on cycles where its trigger does not fire.
    """

    name: str
    trigger: Trigger
    action: Action
    tag: str = "penalty"
    notify_always: bool = False

    def __post_init__(self):
        if self.tag not in TAXONOMY:
            raise KindMismatch(
                f"intervention tag {self.tag!r} not in {TAXONOMY}")


@dataclass(frozen=True)
class Policy:
    """Ordered interventions; application order is declaration order."""

    rules: Tuple[Intervention, ...] = ()


@dataclass(frozen=True)
class Notification:
    """What a fired intervention tells the outside infrastructure."""

    entity: str
    rule: str
    judgement: str
    evaluated_at: int
    before: Characteristics
    after: Characteristics


def apply_intervention(rec: Record,
                       intervention: Intervention) -> Tuple[str, Characteristics]:
    """Apply one rule to a record: act on fire, identity otherwise."""
    if intervention.trigger.fires(rec.judgement):
        return rec.entity, intervention.action.apply(rec.characteristics,
                                                     rec.judgement)
    return rec.entity, rec.characteristics


def apply_policy(rec: Record, policy: Policy
                 ) -> Tuple[str, Characteristics, List[Notification]]:
    """Apply every rule in order, threading characteristics through.

    One notification is emitted per fired rule; rules marked notify_always
    emit even when they do not fire.
    """
    chi = rec.characteristics
    notifications = []
    for rule in policy.rules:
        fired = rule.trigger.fires(rec.judgement)
        new_chi = rule.action.apply(chi, rec.judgement) if fired else chi
        if fired or rule.notify_always:
            notifications.append(Notification(
                entity=rec.entity, rule=rule.name, judgement=rec.judgement,
                evaluated_at=rec.evaluated_at, before=chi, after=new_chi))
        chi = new_chi
    return rec.entity, chi, notifications


@dataclass
class CycleResult:
    characteristics: dict
    records: List[Record]
    notifications: List[Notification]
    errors: List[Tuple[str, MonitorError]]


def run_cycle(entities: Sequence[str],
              characteristics: Mapping[str, Characteristics],
              binding: BehaviourBinding,
              families: Mapping[str, PredicateFamily],
              policy: Policy,
              now: int,
              sig: Optional[Signature] = None,
              params_by_entity: Optional[Mapping[str, Mapping]] = None
              ) -> CycleResult:
    """Monitor the given entities at one time point and apply the policy.

    A failing entity is recorded and skipped; the cycle continues for the
    others.  Updated characteristics feed the next cycle through the returned
    map; records and notifications are appended in (now, entity) order.
    """
    updated = dict(characteristics)
    records: List[Record] = []
    notifications: List[Notification] = []
    errors: List[Tuple[str, MonitorError]] = []
    for entity in sorted(entities):
        extra = params_by_entity.get(entity) if params_by_entity else None
        try:
            rec = monitor(entity, updated[entity], families[entity],
                          binding, now, sig, extra)
            _, chi, notes = apply_policy(rec, policy)
        except MonitorError as exc:
            errors.append((entity, exc))
            continue
        updated[entity] = chi
        records.append(rec)
        notifications.extend(notes)
    return CycleResult(updated, records, notifications, errors)


def format_notification(note: Notification) -> str:
    """Log line: evaluated_at|entity|rule|judgement|field=old->new;..."""
    changes = []
    for name in note.before.field_names:
        old, new = note.before.get(name), note.after.get(name)
        if old != new:
            old_s = (old.fingerprint() if isinstance(old, Characteristics)
                     else format_value(old))
            new_s = (new.fingerprint() if isinstance(new, Characteristics)
                     else format_value(new))
            changes.append(f"{name}={old_s}->{new_s}")
    return (f"{note.evaluated_at}|{note.entity}|{note.rule}"
            f"|{note.judgement}|{';'.join(changes)}")
