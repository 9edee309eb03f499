import pytest

from dstc.enforcement import TlsVersion
from dstc.handshake import AttackKind
from dstc.scenarios import (
    ScenarioFileError,
    UnknownScenarioReference,
    parse_scenario_file,
    run_builtin_suite,
    run_scenario_suite,
)

SCENARIO_FILE = """
# downgrade exercises
PROFILE wide VERSIONS TLS1.2,TLS1.1,TLS1.0,SSL3.0 SUITES ECDHE-RSA-AES128-GCM-SHA256,AES128-SHA
PROFILE buggy VERSIONS TLS1.2,TLS1.0 SUITES ECDHE-RSA-AES128-GCM-SHA256,AES128-SHA FRAGBUG

SCENARIO plain-strict CLIENT strict SERVER wide ATTACK none EXPECT established
SCENARIO poodle-style CLIENT default SERVER wide ATTACK drop:2 EXPECT established
SCENARIO drop-out CLIENT default SERVER wide ATTACK drop:3 EXPECT exhausted
SCENARIO frag-strict CLIENT strict SERVER buggy ATTACK fragment EXPECT aborted
SCENARIO mod-strict CLIENT strict SERVER wide ATTACK modver:1.0 EXPECT aborted
"""


def test_parse_scenario_file():
    profiles, scenarios = parse_scenario_file(SCENARIO_FILE)
    assert set(profiles) == {"wide", "buggy"}
    assert profiles["buggy"].fragmentation_bug is True
    assert profiles["wide"].fragmentation_bug is False
    assert TlsVersion.SSL30 in profiles["wide"].supported_versions
    assert len(scenarios) == 5
    assert scenarios[1].attack.kind is AttackKind.DROP_CLIENT_HELLO
    assert scenarios[1].attack.drop_count == 2


def test_run_scenario_suite_from_file():
    profiles, scenarios = parse_scenario_file(SCENARIO_FILE)
    report = run_scenario_suite(scenarios, profiles, suite_name="file")
    assert report.all_passed, report.render()
    assert [row.name for row in report.rows] == [s.name for s in scenarios]
    # transcripts are embedded per row
    assert all(row.transcript for row in report.rows)


def test_empty_scenario_list_gives_empty_report():
    report = run_scenario_suite([], {}, suite_name="empty")
    assert report.rows == ()
    assert report.all_passed


def test_unknown_profile_reference():
    _, scenarios = parse_scenario_file(
        "SCENARIO x CLIENT strict SERVER ghost ATTACK none EXPECT established\n"
    )
    with pytest.raises(UnknownScenarioReference):
        run_scenario_suite(scenarios, {})


@pytest.mark.parametrize("line", [
    "PROFILE a VERSIONS TLS1.2",                      # missing suites
    "PROFILE a VERSIONS TLS1.2 SUITES AES128-SHA X",  # bad trailing token
    "SCENARIO a CLIENT loose SERVER s ATTACK none EXPECT established",
    "SCENARIO a CLIENT strict SERVER s ATTACK warp EXPECT established",
    "SCENARIO a CLIENT strict SERVER s ATTACK none EXPECT mangled",
    "NOISE x",
])
def test_scenario_file_rejects_bad_lines(line):
    with pytest.raises(ScenarioFileError):
        parse_scenario_file(line + "\n")


def test_duplicate_scenario_names_rejected():
    text = (
        "PROFILE s VERSIONS TLS1.2 SUITES ECDHE-RSA-AES128-GCM-SHA256\n"
        "SCENARIO a CLIENT strict SERVER s ATTACK none EXPECT established\n"
        "SCENARIO a CLIENT default SERVER s ATTACK none EXPECT established\n"
    )
    with pytest.raises(ScenarioFileError):
        parse_scenario_file(text)


def test_builtin_table2(zone_keys):
    report = run_builtin_suite("table2", keys=zone_keys)
    assert report.all_passed, report.render()
    assert [row.name for row in report.rows] == [
        "tls12-registered-strong",
        "tls10-registered-legacy",
        "tls11-unregistered-legacy",
    ]
    assert [row.decision for row in report.rows] == [
        "Strict/OK", "Strict/OK", "Default/NoRecord",
    ]
    # the matrix outcome pattern: success, failure, success
    assert report.rows[0].actual.startswith("Established@TLS1.2")
    assert report.rows[1].actual == "AbortedByClient"
    assert report.rows[2].actual.startswith("Established@TLS1.1")


def test_builtin_poodle(zone_keys):
    report = run_builtin_suite("poodle", keys=zone_keys)
    assert report.all_passed, report.render()
    by_name = {row.name: row for row in report.rows}
    assert by_name["poodle-default-downgraded"].actual.startswith("Established@TLS1.0")
    assert by_name["poodle-strict-aborted"].actual == "AbortedByClient"


def test_builtin_fragment(zone_keys):
    report = run_builtin_suite("fragment", keys=zone_keys)
    assert report.all_passed, report.render()
    by_name = {row.name: row for row in report.rows}
    assert by_name["fragment-default-downgraded"].actual.startswith("Established@TLS1.0")
    assert by_name["fragment-strict-aborted"].actual == "AbortedByClient"


def test_builtin_forgery(zone_keys):
    report = run_builtin_suite("forgery", keys=zone_keys)
    assert report.all_passed, report.render()
    expected = {
        "add-unregistered-policy": "InvalidSignature",
        "modify-signed-record": "InvalidSignature",
        "delete-from-signed-set": "InvalidSignature",
        "replay-stale-policy": "RejectedStale",
        "replay-revoked-policy": "RejectedStale",
        "drop-after-first-connection": "Strict/DropAlarm",
    }
    assert {row.name: row.actual for row in report.rows} == expected


def test_unknown_builtin_suite():
    with pytest.raises(UnknownScenarioReference):
        run_builtin_suite("nonesuch")


def test_suite_report_render(zone_keys):
    text = run_builtin_suite("table2", keys=zone_keys).render()
    assert "[PASS]" in text
    assert "ClientHello" in text  # transcripts included
