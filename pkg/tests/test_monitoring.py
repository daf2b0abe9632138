import random

import pytest

from tagmon.errors import (
    AmbiguousJudgement,
    BottomEncountered,
    KindMismatch,
    NoJudgement,
    UnboundBehaviour,
    UnknownField,
)
from tagmon.formulas import AttributeSpec
from tagmon.monitoring import (
    BehaviourBinding,
    Characteristics,
    JudgementSet,
    PredicateFamily,
    behaviour_of,
    format_record,
    monitor,
    observe_family,
    observe_uniform,
)
from tagmon.parser import parse_formula
from tagmon.scenarios import Sentence, alcohol_family, compliance_judgement
from tagmon.streams import Stream, save_trace
from tagmon.values import BOTTOM, Dec4

SIGMA = Sentence(0, 120, 30, Dec4.parse("0.0200"), Dec4.parse("0.0050"))


def bac_trace(level=Dec4(100), gap_at=None, peak_at=None, peak=None):
    values = [level] * 121
    if peak_at is not None:
        values[peak_at] = peak
    if gap_at is not None:
        values[gap_at] = BOTTOM
    return Stream.of(0, values)


def test_judgement_set_validation():
    js = JudgementSet(("green", "red"))
    assert "green" in js and list(js) == ["green", "red"]
    with pytest.raises(KindMismatch):
        JudgementSet(())
    with pytest.raises(KindMismatch):
        JudgementSet(("a", "a"))


def test_characteristics_are_immutable_records():
    chi = SIGMA.characteristics("green")
    assert chi.field_names == ("sentence", "status")
    assert chi.get("status") == "green"
    with pytest.raises(AttributeError):
        chi.status = "red"
    updated = chi.with_field("status", "red")
    assert updated.get("status") == "red"
    assert chi.get("status") == "green"
    with pytest.raises(UnknownField):
        chi.with_field("colour", "blue")
    with pytest.raises(UnknownField):
        chi.get("colour")


def test_characteristics_flatten_and_fingerprint():
    chi = SIGMA.characteristics("green")
    flat = chi.flatten()
    assert flat["t1"] == 0 and flat["t2"] == 120 and flat["s"] == 30
    assert flat["epsilon"] == Dec4(200) and flat["status"] == "green"
    assert chi.fingerprint() == ("sentence=(t1=0,t2=120,s=30,"
                                 "epsilon=0.0200,delta=0.0050);status=green")
    with pytest.raises(KindMismatch):
        Characteristics.of(a=Characteristics.of(x=1),
                           b=Characteristics.of(x=2)).flatten()


def test_behaviour_binding_resolution(tmp_path):
    trace = bac_trace()
    path = tmp_path / "b.trace"
    save_trace(path, trace, "b", "decimal")
    from tagmon.streams import load_trace
    _, _, loaded = load_trace(path)
    chi = SIGMA.characteristics("green")
    binding = BehaviourBinding().bind("PID-7", loaded)
    assert behaviour_of("PID-7", chi, binding) == trace
    assert behaviour_of("PID-7", chi, binding) == behaviour_of(
        "PID-7", chi, binding)
    with pytest.raises(UnboundBehaviour):
        behaviour_of("PID-8", chi, binding)
    special = bac_trace(level=Dec4(90))
    binding.bind_for("PID-7", chi, special)
    assert behaviour_of("PID-7", chi, binding) == special


def test_observe_uniform():
    always = AttributeSpec("always", "ok", parse_formula("true"))
    assert observe_uniform(always, bac_trace()) is True
    red = AttributeSpec(
        "red-probe", "red",
        parse_formula("max(b, 0, 120, 30) > 0.0250"))
    assert observe_uniform(red, bac_trace(peak_at=60, peak=Dec4(300))) is True
    with pytest.raises(BottomEncountered):
        observe_uniform(red, bac_trace(gap_at=30))


def test_observe_family_bands():
    family = alcohol_family()
    chi = SIGMA.characteristics("green")
    assert observe_family(family, "e", chi, bac_trace()) == "green"
    assert observe_family(family, "e", chi,
                          bac_trace(peak_at=30, peak=Dec4(300))) == "red"
    assert observe_family(family, "e", chi,
                          bac_trace(peak_at=30, peak=Dec4(200))) == "amber"
    assert observe_family(family, "e", chi, bac_trace(gap_at=60)) == "absent"


def bad_family(first, second):
    specs = (
        AttributeSpec("a", "yes", parse_formula(first)),
        AttributeSpec("b", "no", parse_formula(second)),
    )
    return PredicateFamily("broken", JudgementSet(("yes", "no")), specs)


def test_observe_family_reports_overlap_and_gaps():
    chi = Characteristics.of(status="green")
    with pytest.raises(AmbiguousJudgement):
        observe_family(bad_family("true", "true"), "e", chi, bac_trace())
    with pytest.raises(NoJudgement):
        observe_family(bad_family("false", "false"), "e", chi, bac_trace())


def test_family_label_coverage_is_validated():
    with pytest.raises(KindMismatch):
        PredicateFamily(
            "short", JudgementSet(("yes", "no")),
            (AttributeSpec("a", "yes", parse_formula("true")),))


def test_monitor_produces_stable_records():
    family = alcohol_family()
    chi = SIGMA.characteristics("green")
    binding = BehaviourBinding().bind("PID-7",
                                      bac_trace(peak_at=30, peak=Dec4(300)))
    rec = monitor("PID-7", chi, family, binding, now=120)
    assert rec.entity == "PID-7"
    assert rec.judgement == "red"
    assert rec.attribute == "bac-band"
    assert rec.evaluated_at == 120
    assert rec.characteristics == chi  # snapshot of the pre-intervention state
    again = monitor("PID-7", chi, family, binding, now=120)
    assert again == rec
    assert chi.get("status") == "green"


def test_record_fidelity_matches_standalone_observation():
    family = alcohol_family()
    chi = SIGMA.characteristics("green")
    trace = bac_trace(peak_at=90, peak=Dec4(170))
    binding = BehaviourBinding().bind("e", trace)
    rec = monitor("e", chi, family, binding, now=120)
    assert rec.judgement == observe_family(family, "e", chi, trace)


def test_format_record_line():
    family = alcohol_family()
    chi = SIGMA.characteristics("green")
    binding = BehaviourBinding().bind("PID-7", bac_trace())
    rec = monitor("PID-7", chi, family, binding, now=120)
    assert format_record(rec) == (
        "120|PID-7|bac-band|green|sentence=(t1=0,t2=120,s=30,"
        "epsilon=0.0200,delta=0.0050);status=green")


def test_uniform_individual_coherence():
    """A family without characteristic parameters agrees with uniform
    observation label by label."""
    specs = (
        AttributeSpec("low", "low", parse_formula("max(b, 0, 120, 30) < 0.0200")),
        AttributeSpec("high", "high", parse_formula("max(b, 0, 120, 30) >= 0.0200")),
    )
    family = PredicateFamily("split", JudgementSet(("low", "high")), specs)
    chi = Characteristics.of(status="green")
    for trace in (bac_trace(), bac_trace(peak_at=30, peak=Dec4(250))):
        label = observe_family(family, "e", chi, trace)
        holders = [s.label for s in specs if observe_uniform(s, trace)]
        assert holders == [label]


def test_exactly_one_judgement_on_random_traces():
    family = alcohol_family()
    chi = SIGMA.characteristics("green")
    rng = random.Random(6)
    labels = set()
    for _ in range(1000):
        values = [Dec4(rng.randrange(0, 400)) for _ in range(121)]
        if rng.random() < 0.3:
            values[rng.randrange(121)] = BOTTOM
        trace = Stream.of(0, values)
        label = observe_family(family, "e", chi, trace)
        labels.add(label)
        assert label == compliance_judgement(SIGMA, trace)
    assert labels == {"green", "amber", "red", "absent"}
