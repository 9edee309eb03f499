"""Named negotiation scenarios and the built-in attack suites.

A scenario file is line oriented (``#`` comments, blank lines allowed):

    PROFILE <name> VERSIONS <v1,v2,...> SUITES <s1,s2,...> [FRAGBUG]
    SCENARIO <name> CLIENT <strict|default> SERVER <profile> \
        ATTACK <none|drop:N|fragment|modver:V> EXPECT <established|aborted|exhausted>

The built-in suites wire the whole stack together: a zone is signed, the
client decides per domain from the DNS answer, and the resulting hello
configuration is driven against a server, possibly through an attacker.

  table2    three-server feasibility matrix (registered strong server,
            registered legacy server, unregistered legacy server)
  poodle    hello-dropping version downgrade against default and strict
  fragment  hello-fragmentation version downgrade against default and strict
  forgery   record add / modify / delete / replay / drop against zone+store
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

from . import enforcement
from .dnssec import (
    ZoneKeyPair,
    ZoneStore,
    TrustAnchor,
    TrustAnchorSet,
    VerifyStatus,
    resolve,
    sign_rrset,
    verify_rrset,
)
from .enforcement import (
    DEFAULT_CLIENT,
    Mode,
    PolicyDecision,
    Reason,
    TlsVersion,
    apply,
    decide,
)
from .handshake import (
    AttackerStrategy,
    HandshakeOutcome,
    HandshakeResult,
    NO_ATTACK,
    ServerProfile,
    run_handshake,
)
from .policy import PolicyRecord, serialize_policy
from .store import PolicyStore, StoreAction


class ScenarioFileError(ValueError):
    """A scenario file could not be parsed."""


class UnknownScenarioReference(ValueError):
    """A scenario names a profile or suite that does not exist."""


@dataclass(frozen=True)
class Expectation:
    results: frozenset[HandshakeResult]
    version: TlsVersion | None = None

    def matches(self, outcome: HandshakeOutcome) -> bool:
        if outcome.result not in self.results:
            return False
        return self.version is None or outcome.negotiated_version is self.version

    def describe(self) -> str:
        kinds = "|".join(sorted(r.value for r in self.results))
        return kinds if self.version is None else f"{kinds}@{self.version}"


EXPECT_TOKENS = {
    "established": Expectation(frozenset({HandshakeResult.ESTABLISHED})),
    "aborted": Expectation(
        frozenset(
            {HandshakeResult.ABORTED_BY_CLIENT, HandshakeResult.ABORTED_BY_SERVER}
        )
    ),
    "exhausted": Expectation(frozenset({HandshakeResult.EXHAUSTED})),
}


@dataclass(frozen=True)
class Scenario:
    name: str
    client_policy: str  # "strict" | "default"
    server: str
    attack: AttackerStrategy
    expect: Expectation


@dataclass(frozen=True)
class ScenarioRow:
    """One executed scenario, ready for reporting."""

    name: str
    expected: str
    actual: str
    passed: bool
    transcript: tuple[str, ...] = ()
    decision: str | None = None


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    rows: tuple[ScenarioRow, ...]

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def render(self) -> str:
        lines = [f"suite {self.suite}: {len(self.rows)} scenario(s)"]
        for row in self.rows:
            mark = "PASS" if row.passed else "FAIL"
            decision = f" decision={row.decision}" if row.decision else ""
            lines.append(
                f"[{mark}] {row.name}: expected={row.expected} actual={row.actual}{decision}"
            )
            lines.extend(f"    {event}" for event in row.transcript)
        return "\n".join(lines)


def parse_scenario_file(text: str) -> tuple[dict[str, ServerProfile], list[Scenario]]:
    profiles: dict[str, ServerProfile] = {}
    scenarios: list[Scenario] = []
    names: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            if fields[0] == "PROFILE":
                profile = _parse_profile(fields)
                profiles[profile.domain] = profile
            elif fields[0] == "SCENARIO":
                scenario = _parse_scenario(fields)
                if scenario.name in names:
                    raise ScenarioFileError(f"duplicate scenario {scenario.name!r}")
                names.add(scenario.name)
                scenarios.append(scenario)
            else:
                raise ScenarioFileError(f"unknown line kind {fields[0]!r}")
        except ScenarioFileError:
            raise
        except (ValueError, IndexError) as exc:
            raise ScenarioFileError(f"line {lineno}: {exc}") from exc
    return profiles, scenarios


def _parse_profile(fields: list[str]) -> ServerProfile:
    # PROFILE <name> VERSIONS <list> SUITES <list> [FRAGBUG]
    if len(fields) < 6 or fields[2] != "VERSIONS" or fields[4] != "SUITES":
        raise ScenarioFileError("PROFILE needs VERSIONS and SUITES sections")
    fragbug = False
    if len(fields) == 7:
        if fields[6] != "FRAGBUG":
            raise ScenarioFileError(f"unexpected trailing token {fields[6]!r}")
        fragbug = True
    elif len(fields) != 6:
        raise ScenarioFileError("too many PROFILE tokens")
    versions = frozenset(TlsVersion.parse(tok) for tok in fields[3].split(","))
    suites = tuple(s for s in fields[5].split(",") if s)
    return ServerProfile(fields[1], versions, suites, fragbug)


def _parse_scenario(fields: list[str]) -> Scenario:
    # SCENARIO <name> CLIENT <strict|default> SERVER <profile> ATTACK <...> EXPECT <...>
    if (
        len(fields) != 10
        or fields[2] != "CLIENT"
        or fields[4] != "SERVER"
        or fields[6] != "ATTACK"
        or fields[8] != "EXPECT"
    ):
        raise ScenarioFileError(
            "SCENARIO needs CLIENT, SERVER, ATTACK and EXPECT sections"
        )
    if fields[3] not in ("strict", "default"):
        raise ScenarioFileError(f"client policy must be strict or default, got {fields[3]!r}")
    if fields[9] not in EXPECT_TOKENS:
        raise ScenarioFileError(f"unknown expectation {fields[9]!r}")
    return Scenario(
        name=fields[1],
        client_policy=fields[3],
        server=fields[5],
        attack=AttackerStrategy.parse(fields[7]),
        expect=EXPECT_TOKENS[fields[9]],
    )


def client_config(policy: str) -> enforcement.EffectiveTlsConfig:
    caps = DEFAULT_CLIENT
    if policy == "strict":
        return apply(PolicyDecision(Mode.STRICT, Reason.OK), caps)
    return apply(PolicyDecision(Mode.DEFAULT, Reason.NO_RECORD), caps)


def run_scenario_suite(
    scenarios: list[Scenario],
    profiles: dict[str, ServerProfile],
    suite_name: str = "custom",
) -> SuiteReport:
    """Execute scenarios in order against their named server profiles."""
    rows = []
    for scenario in scenarios:
        if scenario.server not in profiles:
            raise UnknownScenarioReference(
                f"scenario {scenario.name!r} references unknown profile {scenario.server!r}"
            )
        outcome = run_handshake(
            client_config(scenario.client_policy),
            profiles[scenario.server],
            scenario.attack,
        )
        rows.append(
            ScenarioRow(
                name=scenario.name,
                expected=scenario.expect.describe(),
                actual=_outcome_token(outcome),
                passed=scenario.expect.matches(outcome),
                transcript=outcome.transcript,
            )
        )
    return SuiteReport(suite_name, tuple(rows))


def _outcome_token(outcome: HandshakeOutcome) -> str:
    if outcome.result is HandshakeResult.ESTABLISHED:
        return (
            f"Established@{outcome.negotiated_version} "
            f"suite={outcome.negotiated_suite}"
        )
    return outcome.result.value


# -- built-in fixtures ------------------------------------------------------

FIXTURE_NOW = date(2018, 7, 1)

STRONG_SUITES = (
    "ECDHE-RSA-AES128-GCM-SHA256",
    "ECDHE-RSA-AES256-GCM-SHA384",
    "ECDHE-RSA-CHACHA20-POLY1305",
)
LEGACY_SUITES = ("ECDHE-RSA-AES128-SHA", "AES128-SHA")


def fixture_policy(
    valid_from: date = date(2018, 5, 1),
    valid_to: date = date(2019, 5, 1),
    report: str = "admin@tls12.test",
    **kwargs,
) -> PolicyRecord:
    return PolicyRecord(
        valid_from=valid_from, valid_to=valid_to, report=report, **kwargs
    )


@dataclass
class SignedFixture:
    """A zone with registered policies, its trust anchors, and a fresh cache."""

    zone: ZoneStore
    anchors: TrustAnchorSet
    store: PolicyStore
    keys: ZoneKeyPair
    now: date

    def decide_for(self, domain: str) -> PolicyDecision:
        return decide(resolve(self.zone, domain), self.anchors, self.store, domain, self.now)

    def config_for(self, domain: str) -> enforcement.EffectiveTlsConfig:
        return apply(self.decide_for(domain), DEFAULT_CLIENT)


def build_fixture(
    registered: dict[str, PolicyRecord],
    keys: ZoneKeyPair | None = None,
    now: date = FIXTURE_NOW,
    signature_days: tuple[date, date] = (date(2018, 5, 1), date(2019, 5, 1)),
) -> SignedFixture:
    """Sign the given records into a zone under one trust-anchored key."""
    keys = keys or ZoneKeyPair.generate("zsk-1")
    zone = ZoneStore()
    anchors = TrustAnchorSet()
    inception, expiration = signature_days
    for domain, record in registered.items():
        zone.publish(
            sign_rrset(keys, domain, [serialize_policy(record)], inception, expiration)
        )
        anchors.add(TrustAnchor(domain, keys.key_id, keys.public_der()))
    zone.add_key(keys.key_id, keys.public_der())
    return SignedFixture(zone, anchors, PolicyStore(), keys, now)


TABLE2_PROFILES = {
    "tls12.test": ServerProfile(
        "tls12.test", frozenset({TlsVersion.TLS12}), STRONG_SUITES
    ),
    "tls10.test": ServerProfile(
        "tls10.test", frozenset({TlsVersion.TLS10}), LEGACY_SUITES
    ),
    "tls11.test": ServerProfile(
        "tls11.test", frozenset({TlsVersion.TLS11}), LEGACY_SUITES
    ),
}


def run_table2(keys: ZoneKeyPair | None = None) -> SuiteReport:
    """Feasibility matrix: who completes a handshake under policy enforcement.

    Registered strong server succeeds strictly, registered legacy server is
    refused by the strict client, unregistered legacy server still works
    under the default policy.
    """
    fixture = build_fixture(
        {
            "tls12.test": fixture_policy(report="admin@tls12.test"),
            "tls10.test": fixture_policy(report="admin@tls10.test"),
        },
        keys=keys,
    )
    expectations = [
        (
            "tls12-registered-strong",
            "tls12.test",
            Expectation(frozenset({HandshakeResult.ESTABLISHED}), TlsVersion.TLS12),
            Mode.STRICT,
        ),
        (
            "tls10-registered-legacy",
            "tls10.test",
            Expectation(frozenset({HandshakeResult.ABORTED_BY_CLIENT})),
            Mode.STRICT,
        ),
        (
            "tls11-unregistered-legacy",
            "tls11.test",
            Expectation(frozenset({HandshakeResult.ESTABLISHED}), TlsVersion.TLS11),
            Mode.DEFAULT,
        ),
    ]
    rows = []
    for name, domain, expect, expected_mode in expectations:
        decision = fixture.decide_for(domain)
        outcome = run_handshake(
            apply(decision, DEFAULT_CLIENT), TABLE2_PROFILES[domain], NO_ATTACK
        )
        rows.append(
            ScenarioRow(
                name=name,
                expected=expect.describe(),
                actual=_outcome_token(outcome),
                passed=expect.matches(outcome) and decision.mode is expected_mode,
                transcript=outcome.transcript,
                decision=f"{decision.mode.value}/{decision.reason.value}",
            )
        )
    return SuiteReport("table2", tuple(rows))


def run_poodle(keys: ZoneKeyPair | None = None) -> SuiteReport:
    """Hello-dropping downgrade: default clients walk down, strict ones abort."""
    fixture = build_fixture({"bank.test": fixture_policy(report="admin@bank.test")}, keys=keys)
    server = ServerProfile(
        "bank.test",
        frozenset({TlsVersion.SSL30, TlsVersion.TLS10, TlsVersion.TLS11, TlsVersion.TLS12}),
        STRONG_SUITES + LEGACY_SUITES,
    )
    attack = AttackerStrategy.parse("drop:2")

    # Unregistered neighbour: the client has no prior knowledge and stays on
    # the default policy, so the dropped hellos walk it down the versions.
    default_decision = fixture.decide_for("news.test")
    default_outcome = run_handshake(apply(default_decision, DEFAULT_CLIENT), server, attack)
    strict_decision = fixture.decide_for("bank.test")
    strict_outcome = run_handshake(apply(strict_decision, DEFAULT_CLIENT), server, attack)

    rows = (
        ScenarioRow(
            name="poodle-default-downgraded",
            expected="Established@TLS1.0",
            actual=_outcome_token(default_outcome),
            passed=(
                default_outcome.result is HandshakeResult.ESTABLISHED
                and default_outcome.negotiated_version is TlsVersion.TLS10
            ),
            transcript=default_outcome.transcript,
            decision=f"{default_decision.mode.value}/{default_decision.reason.value}",
        ),
        ScenarioRow(
            name="poodle-strict-aborted",
            expected=HandshakeResult.ABORTED_BY_CLIENT.value,
            actual=_outcome_token(strict_outcome),
            passed=strict_outcome.result is HandshakeResult.ABORTED_BY_CLIENT,
            transcript=strict_outcome.transcript,
            decision=f"{strict_decision.mode.value}/{strict_decision.reason.value}",
        ),
    )
    return SuiteReport("poodle", rows)


def run_fragment(keys: ZoneKeyPair | None = None) -> SuiteReport:
    """Fragmented-hello downgrade against a server with the version bug."""
    fixture = build_fixture({"shop.test": fixture_policy(report="admin@shop.test")}, keys=keys)
    server = ServerProfile(
        "shop.test",
        frozenset({TlsVersion.TLS10, TlsVersion.TLS11, TlsVersion.TLS12}),
        STRONG_SUITES + LEGACY_SUITES,
        fragmentation_bug=True,
    )
    attack = AttackerStrategy.parse("fragment")

    default_decision = fixture.decide_for("blog.test")
    default_outcome = run_handshake(apply(default_decision, DEFAULT_CLIENT), server, attack)
    strict_decision = fixture.decide_for("shop.test")
    strict_outcome = run_handshake(apply(strict_decision, DEFAULT_CLIENT), server, attack)

    rows = (
        ScenarioRow(
            name="fragment-default-downgraded",
            expected="Established@TLS1.0",
            actual=_outcome_token(default_outcome),
            passed=(
                default_outcome.result is HandshakeResult.ESTABLISHED
                and default_outcome.negotiated_version is TlsVersion.TLS10
            ),
            transcript=default_outcome.transcript,
            decision=f"{default_decision.mode.value}/{default_decision.reason.value}",
        ),
        ScenarioRow(
            name="fragment-strict-aborted",
            expected=HandshakeResult.ABORTED_BY_CLIENT.value,
            actual=_outcome_token(strict_outcome),
            passed=strict_outcome.result is HandshakeResult.ABORTED_BY_CLIENT,
            transcript=strict_outcome.transcript,
            decision=f"{strict_decision.mode.value}/{strict_decision.reason.value}",
        ),
    )
    return SuiteReport("fragment", rows)


def run_forgery(keys: ZoneKeyPair | None = None) -> SuiteReport:
    """Record-forgery matrix: each manipulation and the defence that stops it."""
    keys = keys or ZoneKeyPair.generate("zsk-1")
    now = FIXTURE_NOW
    rows = []

    def row(name, expected, actual, transcript):
        rows.append(
            ScenarioRow(
                name=name,
                expected=expected,
                actual=actual,
                passed=(actual == expected),
                transcript=tuple(transcript),
            )
        )

    # add: inject a policy for a domain that never registered one.
    fixture = build_fixture({}, keys=keys)
    fixture.anchors.add(TrustAnchor("victim.test", keys.key_id, keys.public_der()))
    fixture.zone.attacker_add_txt_value(
        "victim.test", serialize_policy(fixture_policy(report="mallory@evil.test"))
    )
    rrset = fixture.zone.rrset_for("victim.test")
    status = verify_rrset(keys.public_key, rrset, now)
    row(
        "add-unregistered-policy",
        VerifyStatus.INVALID_SIGNATURE.value,
        status.value,
        ["attacker: injected unsigned policy record", f"verify: {status.value}"],
    )

    # modify: change a directive inside a signed record.
    fixture = build_fixture({"tls12.test": fixture_policy()}, keys=keys)
    original = fixture.zone.rrset_for("tls12.test").values[0]
    fixture.zone.attacker_modify_txt_value(
        "tls12.test", 0, original.replace("validTo=01-05-2019", "validTo=01-05-2018")
    )
    status = verify_rrset(keys.public_key, fixture.zone.rrset_for("tls12.test"), now)
    row(
        "modify-signed-record",
        VerifyStatus.INVALID_SIGNATURE.value,
        status.value,
        ["attacker: rewrote validTo inside the signed record", f"verify: {status.value}"],
    )

    # delete: strip one value out of a signed multi-value set.
    zone = ZoneStore()
    zone.publish(
        sign_rrset(
            keys,
            "multi.test",
            [serialize_policy(fixture_policy()), "v=spf1 -all"],
            date(2018, 5, 1),
            date(2019, 5, 1),
        )
    )
    zone.attacker_delete_txt_value("multi.test", 1)
    status = verify_rrset(keys.public_key, zone.rrset_for("multi.test"), now)
    row(
        "delete-from-signed-set",
        VerifyStatus.INVALID_SIGNATURE.value,
        status.value,
        ["attacker: removed one value from the signed set", f"verify: {status.value}"],
    )

    # replay-stale: replay an older, correctly signed policy.
    store = PolicyStore()
    old = fixture_policy(valid_from=date(2018, 1, 1))
    new = fixture_policy(valid_from=date(2018, 5, 1))
    store.update("tls12.test", new, now)
    action = store.update("tls12.test", old, now)
    row(
        "replay-stale-policy",
        StoreAction.REJECTED_STALE.value,
        action.value,
        ["attacker: replayed an older signed policy", f"store: {action.value}"],
    )

    # replay-revoked: replay the policy that a revocation deleted.
    store = PolicyStore()
    store.update("tls12.test", old, now)
    revoke = fixture_policy(valid_from=date(2018, 6, 1), revoke=True)
    revoke_action = store.update("tls12.test", revoke, now)
    action = store.update("tls12.test", old, now)
    row(
        "replay-revoked-policy",
        StoreAction.REJECTED_STALE.value,
        action.value,
        [
            f"owner: revocation applied ({revoke_action.value})",
            "attacker: replayed the revoked policy",
            f"store: {action.value} (tombstone)",
        ],
    )

    # drop: suppress the record after the client cached the policy.
    fixture = build_fixture({"tls12.test": fixture_policy()}, keys=keys)
    first = fixture.decide_for("tls12.test")
    fixture.zone.attacker_drop_rrset("tls12.test")
    second = fixture.decide_for("tls12.test")
    row(
        "drop-after-first-connection",
        f"{Mode.STRICT.value}/{Reason.DROP_ALARM.value}",
        f"{second.mode.value}/{second.reason.value}",
        [
            f"first connection: {first.mode.value}/{first.reason.value}",
            "attacker: suppressed the record set",
            f"second connection: {second.mode.value}/{second.reason.value}",
        ],
    )

    return SuiteReport("forgery", tuple(rows))


BUILTIN_SUITES = {
    "table2": run_table2,
    "poodle": run_poodle,
    "fragment": run_fragment,
    "forgery": run_forgery,
}


def run_builtin_suite(name: str, keys: ZoneKeyPair | None = None) -> SuiteReport:
    if name not in BUILTIN_SUITES:
        raise UnknownScenarioReference(f"unknown built-in suite {name!r}")
    return BUILTIN_SUITES[name](keys=keys)
