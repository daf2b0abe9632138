import pytest

from tagmon.errors import ScenarioFormatError
from tagmon.scenario_file import (
    Diagnostic,
    EntityConfig,
    RuleConfig,
    ScenarioConfig,
    ScheduleConfig,
    build_scenario,
    format_clock,
    format_scenario,
    parse_clock,
    parse_scenario,
    validate_scenario,
)
from tagmon.streams import Stream, save_trace
from tagmon.values import Dec4

ALCOHOL_TEXT = """\
# worked example
[entity PID-7]
sentence = 0,720,30,0.0200,0.0050
status = green
trace = traces/dry.trace

[policy]
rule = record-breach: on amber,red,absent set status
"""


def write_dry_trace(directory, minutes=720, name="dry.trace"):
    (directory / "traces").mkdir(exist_ok=True)
    path = directory / "traces" / name
    save_trace(path, Stream.of(0, [Dec4(100)] * (minutes + 1)), "b",
               "decimal")
    return path


def test_parse_clock():
    assert parse_clock("07:00") == 420
    assert parse_clock("23:00") == 1380
    assert format_clock(420) == "07:00"
    with pytest.raises(ScenarioFormatError):
        parse_clock("25:00")
    with pytest.raises(ScenarioFormatError):
        parse_clock("7h30")


def test_parse_alcohol_scenario():
    config = parse_scenario(ALCOHOL_TEXT)
    assert config == ScenarioConfig(
        entities=(EntityConfig(
            entity="PID-7",
            sentence=(0, 720, 30, Dec4(200), Dec4(50)),
            status="green", trace="traces/dry.trace"),),
        schedule=None,
        rules=(RuleConfig("record-breach", ("amber", "red", "absent"),
                          "status"),),
    )


def test_parse_schedule_and_curfew():
    text = """\
[entity A]
curfew = 19:00,07:00
nights = 7
status = compliant
trace = t.trace

[schedule]
uploads = 07:00,15:00,23:00
days = 100
"""
    config = parse_scenario(text)
    assert config.entities[0].curfew == (1140, 420)
    assert config.entities[0].nights == 7
    assert config.schedule == ScheduleConfig((420, 900, 1380), 100)


@pytest.mark.parametrize("mutation, fragment", [
    ("[entity PID-7]\nspeed = 3\n", "unknown entity key"),
    ("[widgets]\n", "bad section header"),
    ("status = green\n", "outside any section"),
    ("[entity A]\ntrace = a\n[entity A]\n", "duplicate entity"),
    ("[entity A]\nstatus = green\nstatus = red\n", "duplicate key"),
    ("[entity A]\nsentence = 1,2,3\n", "sentence needs"),
    ("[policy]\nrule = broken\n", "bad rule"),
    ("[schedule]\nuploads = 9am\n", "bad clock time"),
])
def test_parse_rejects_bad_input(mutation, fragment):
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(mutation)
    assert fragment in str(err.value)


def test_format_parse_round_trip():
    config = parse_scenario(ALCOHOL_TEXT)
    assert parse_scenario(format_scenario(config)) == config


def test_format_parse_round_trip_full():
    config = ScenarioConfig(
        entities=(
            EntityConfig("PID-1", sentence=(0, 720, 30, Dec4(200), Dec4(50)),
                         status="green", trace="a.trace"),
            EntityConfig("PID-2", curfew=(1140, 420), nights=7,
                         status="compliant", trace="b.trace"),
        ),
        schedule=ScheduleConfig((420, 900, 1380), 100),
        rules=(RuleConfig("r1", ("red",), "status"),
               RuleConfig("r2", ("violation", "absent-signal"), "status")),
    )
    assert parse_scenario(format_scenario(config)) == config


def test_validate_clean_scenario(tmp_path):
    write_dry_trace(tmp_path)
    config = parse_scenario(ALCOHOL_TEXT)
    assert validate_scenario(config, tmp_path) == []


def test_validate_sentence_invariant(tmp_path):
    write_dry_trace(tmp_path)
    bad = ALCOHOL_TEXT.replace("0,720,30,", "0,720,900,")
    diagnostics = validate_scenario(parse_scenario(bad), tmp_path)
    assert len(diagnostics) == 1
    assert "sample interval" in diagnostics[0].message
    assert diagnostics[0].line == 2


def test_validate_trace_coverage(tmp_path):
    write_dry_trace(tmp_path, minutes=500)
    diagnostics = validate_scenario(parse_scenario(ALCOHOL_TEXT), tmp_path)
    assert any("does not cover" in d.message for d in diagnostics)


def test_validate_missing_trace(tmp_path):
    diagnostics = validate_scenario(parse_scenario(ALCOHOL_TEXT), tmp_path)
    assert any("not found" in d.message for d in diagnostics)


def test_validate_wrong_trace_kind(tmp_path):
    (tmp_path / "traces").mkdir()
    save_trace(tmp_path / "traces" / "dry.trace",
               Stream.of(0, [True] * 721), "b", "boolean")
    diagnostics = validate_scenario(parse_scenario(ALCOHOL_TEXT), tmp_path)
    assert any("expected 'decimal'" in d.message for d in diagnostics)


def test_validate_unknown_rule_labels(tmp_path):
    write_dry_trace(tmp_path)
    bad = ALCOHOL_TEXT.replace("on amber,red,absent", "on amber,purple")
    diagnostics = validate_scenario(parse_scenario(bad), tmp_path)
    assert any("purple" in d.message for d in diagnostics)


def test_validate_status_outside_judgements(tmp_path):
    write_dry_trace(tmp_path)
    bad = ALCOHOL_TEXT.replace("status = green", "status = compliant")
    diagnostics = validate_scenario(parse_scenario(bad), tmp_path)
    assert any("'compliant' not in" in d.message for d in diagnostics)


def test_build_scenario_runs(tmp_path):
    write_dry_trace(tmp_path)
    config = parse_scenario(ALCOHOL_TEXT)
    run = build_scenario(config, tmp_path)
    result = run.execute()
    assert [r.judgement for r in result.records] == ["green"]
    assert [rule.name for rule in run.policy.rules] == ["record-breach"]


def test_build_scenario_without_policy_section(tmp_path):
    write_dry_trace(tmp_path)
    config = parse_scenario(ALCOHOL_TEXT.split("[policy]")[0])
    run = build_scenario(config, tmp_path)
    assert run.policy.rules == ()
    result = run.execute()
    assert len(result.records) == 1 and result.notifications == []


def test_diagnostic_render():
    assert Diagnostic(3, "boom").render("x.scenario") == "x.scenario:3: boom"
