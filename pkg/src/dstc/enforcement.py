"""Ciphersuite classification and the query-verify-decide-apply pipeline.

A client runs ``decide`` on the DNS answer for a domain, then ``apply`` turns
the decision into a concrete hello configuration: strict mode offers a single
protocol version and only forward-secret AEAD suites with fallback disabled,
default mode offers the whole legacy-compatible range with fallback enabled.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum, IntEnum
from functools import lru_cache

from .dnssec import (
    Disposition,
    DnsResponse,
    TrustAnchorSet,
    VerifyStatus,
    normalize_domain,
    verify_rrset,
)
from .policy import (
    MalformedPolicy,
    NotDstc,
    PolicyStatus,
    parse_policy,
    policy_status,
    STRICT_CONFIG,
)
from .store import PolicyStore, StoreAction


class TlsVersion(IntEnum):
    """Protocol versions in negotiation order (wire values give ordering)."""

    SSL30 = 0x0300
    TLS10 = 0x0301
    TLS11 = 0x0302
    TLS12 = 0x0303

    @property
    def label(self) -> str:
        return _VERSION_LABELS[self]

    def __str__(self) -> str:
        return self.label

    @classmethod
    def parse(cls, token: str) -> "TlsVersion":
        key = token.strip().lower()
        if key in _VERSION_TOKENS:
            return _VERSION_TOKENS[key]
        raise ValueError(f"unknown TLS version {token!r}")


_VERSION_LABELS = {
    TlsVersion.SSL30: "SSL3.0",
    TlsVersion.TLS10: "TLS1.0",
    TlsVersion.TLS11: "TLS1.1",
    TlsVersion.TLS12: "TLS1.2",
}

_VERSION_TOKENS = {
    "ssl3.0": TlsVersion.SSL30,
    "sslv3": TlsVersion.SSL30,
    "ssl3": TlsVersion.SSL30,
    "tls1.0": TlsVersion.TLS10,
    "1.0": TlsVersion.TLS10,
    "tls1.1": TlsVersion.TLS11,
    "1.1": TlsVersion.TLS11,
    "tls1.2": TlsVersion.TLS12,
    "1.2": TlsVersion.TLS12,
}


class SuiteLabel(Enum):
    FS_AE = "FS+AE"
    FS_NONAE = "FS+nonAE"
    NONFS_AE = "nonFS+AE"
    NONFS_NONAE = "nonFS+nonAE"


_FS_PREFIXES = ("ECDHE", "DHE")
_AE_TOKENS = ("GCM", "CCM", "CCM8", "CHACHA20")


def normalize_suite_name(name: str) -> str:
    """Map IANA-style ``TLS_..._WITH_...`` names onto scanner-style names."""
    s = name.strip().upper()
    if s.startswith("TLS_"):
        s = s[4:]
    return s.replace("_", "-")


@lru_cache(maxsize=4096)
def classify_ciphersuite(name: str) -> SuiteLabel:
    """Label a ciphersuite by forward secrecy and authenticated encryption.

    Forward secrecy: the leading dash-separated token is ECDHE or DHE.
    Authenticated encryption: the name contains GCM, CCM, CCM8, or CHACHA20.
    """
    if not name or not name.strip():
        raise ValueError("ciphersuite name must be non-empty")
    s = normalize_suite_name(name)
    fs = s.split("-", 1)[0] in _FS_PREFIXES
    ae = any(token in s for token in _AE_TOKENS)
    if fs and ae:
        return SuiteLabel.FS_AE
    if fs:
        return SuiteLabel.FS_NONAE
    if ae:
        return SuiteLabel.NONFS_AE
    return SuiteLabel.NONFS_NONAE


class NoStrongSuites(ValueError):
    """Strict filtering left no ciphersuite to offer."""


@dataclass(frozen=True)
class ClientCapabilities:
    """What the client implementation can speak at all."""

    latest_version: TlsVersion
    version_floor: TlsVersion
    suite_list: tuple[str, ...]

    def __post_init__(self):
        if self.version_floor > self.latest_version:
            raise ValueError("version floor above latest version")
        if not any(
            classify_ciphersuite(s) is SuiteLabel.FS_AE for s in self.suite_list
        ):
            raise ValueError("suite list carries no FS+AE ciphersuite")


# Desktop-browser-style TLS 1.2 suite list (3DES left out), 6 of 14 FS+AE.
DEFAULT_CLIENT_SUITES = (
    "ECDHE-ECDSA-AES128-GCM-SHA256",
    "ECDHE-RSA-AES128-GCM-SHA256",
    "ECDHE-ECDSA-CHACHA20-POLY1305",
    "ECDHE-RSA-CHACHA20-POLY1305",
    "ECDHE-ECDSA-AES256-GCM-SHA384",
    "ECDHE-RSA-AES256-GCM-SHA384",
    "ECDHE-ECDSA-AES256-SHA",
    "ECDHE-ECDSA-AES128-SHA",
    "ECDHE-RSA-AES128-SHA",
    "ECDHE-RSA-AES256-SHA",
    "DHE-RSA-AES128-SHA",
    "DHE-RSA-AES256-SHA",
    "AES128-SHA",
    "AES256-SHA",
)

DEFAULT_CLIENT = ClientCapabilities(
    latest_version=TlsVersion.TLS12,
    version_floor=TlsVersion.TLS10,
    suite_list=DEFAULT_CLIENT_SUITES,
)


class Mode(Enum):
    STRICT = "Strict"
    DEFAULT = "Default"


class Reason(Enum):
    OK = "OK"
    NO_RECORD = "NoRecord"
    INVALID_SIGNATURE = "InvalidSignature"
    SIGNATURE_EXPIRED = "SignatureExpired"
    POLICY_EXPIRED = "PolicyExpired"
    POLICY_NOT_YET_VALID = "PolicyNotYetValid"
    MALFORMED = "Malformed"
    AMBIGUOUS_RECORDS = "AmbiguousRecords"
    REVOKED = "Revoked"
    DROP_ALARM = "DropAlarm"


# Reasons that indicate active interference rather than plain absence or
# operator error; surfaced as a non-zero exit by the CLI.
ATTACK_REASONS = frozenset(
    {Reason.INVALID_SIGNATURE, Reason.DROP_ALARM, Reason.AMBIGUOUS_RECORDS}
)


@dataclass(frozen=True)
class PolicyDecision:
    mode: Mode
    reason: Reason
    report_address: str | None = None

    def __post_init__(self):
        if self.mode is Mode.STRICT and self.reason not in (
            Reason.OK,
            Reason.DROP_ALARM,
        ):
            raise ValueError(f"strict mode cannot carry reason {self.reason}")


@dataclass(frozen=True)
class EffectiveTlsConfig:
    """The concrete hello parameters a client will use."""

    versions: tuple[TlsVersion, ...]
    ciphersuites: tuple[str, ...]
    fallback_enabled: bool


def apply(decision: PolicyDecision, caps: ClientCapabilities) -> EffectiveTlsConfig:
    """Materialise the decision against the client's capabilities.

    Only the decision mode matters: strict offers the single latest version
    and the FS+AE subset with fallback off; default offers every version down
    to the floor and the full list with fallback on.
    """
    if decision.mode is Mode.STRICT:
        suites = tuple(
            s
            for s in caps.suite_list
            if classify_ciphersuite(s) is SuiteLabel.FS_AE
        )
        if not suites:
            raise NoStrongSuites("no FS+AE ciphersuite available")
        return EffectiveTlsConfig((caps.latest_version,), suites, False)
    versions = tuple(
        v
        for v in sorted(TlsVersion, reverse=True)
        if caps.version_floor <= v <= caps.latest_version
    )
    return EffectiveTlsConfig(versions, tuple(caps.suite_list), True)


def decide(
    response: DnsResponse,
    anchors: TrustAnchorSet,
    store: PolicyStore,
    domain: str,
    now: date,
) -> PolicyDecision:
    """Run the full verification pipeline and emit the governing decision.

    Strict/OK requires every check to pass: a valid signature under the
    domain's trust anchor, exactly one well-formed policy record, active
    dates, strict-config level, no revoke flag, and a store that accepts or
    already holds the record. Any failure falls back to default with the
    specific reason, except where the cache says the domain must be strict:
    then the failure is surfaced as a drop alarm and strict stays in force.
    """
    domain = normalize_domain(domain)
    if response.disposition is not Disposition.ANSWERED:
        return _absence(store, domain, response.disposition, now)

    rrset = response.rrset
    anchor = anchors.lookup(domain)
    if anchor is None or anchor.key_id != rrset.key_id:
        return _failure(store, domain, Reason.INVALID_SIGNATURE, now)
    status = verify_rrset(anchor.public_key(), rrset, now)
    if status is VerifyStatus.INVALID_SIGNATURE:
        return _failure(store, domain, Reason.INVALID_SIGNATURE, now)
    if status is not VerifyStatus.VALID:
        # Both window violations surface as an expired-signature decision.
        return _failure(store, domain, Reason.SIGNATURE_EXPIRED, now)

    records = []
    for value in rrset.values:
        try:
            records.append(parse_policy(value))
        except NotDstc:
            continue
        except MalformedPolicy:
            return _failure(store, domain, Reason.MALFORMED, now)
    if not records:
        return _absence(store, domain, response.disposition, now)
    if len(records) > 1:
        return _failure(store, domain, Reason.AMBIGUOUS_RECORDS, now)

    record = records[0]
    status = policy_status(record, now)
    if status is PolicyStatus.EXPIRED:
        return _failure(store, domain, Reason.POLICY_EXPIRED, now, record.report)
    if status is PolicyStatus.NOT_YET_VALID:
        return _failure(store, domain, Reason.POLICY_NOT_YET_VALID, now, record.report)
    if record.tls_level != STRICT_CONFIG:
        return _failure(store, domain, Reason.MALFORMED, now)

    if record.revoke:
        store.update(domain, record, now)
        return PolicyDecision(Mode.DEFAULT, Reason.REVOKED, record.report)

    action = store.update(domain, record, now)
    if action in (StoreAction.STORED_NEW, StoreAction.REPLACED, StoreAction.UNCHANGED):
        return PolicyDecision(Mode.STRICT, Reason.OK, record.report)

    # RejectedStale: a valid but outdated record was replayed. If a fresher
    # entry is cached it keeps governing; a tombstone means the domain
    # revoked and the replay is the revoked policy coming back.
    entry = store.get_exact(domain, now)
    if entry is not None:
        return PolicyDecision(Mode.STRICT, Reason.DROP_ALARM, entry.record.report)
    return PolicyDecision(Mode.DEFAULT, Reason.REVOKED, record.report)


def _absence(store, domain, disposition, now) -> PolicyDecision:
    action = store.observe_absence(domain, disposition, now)
    if action is StoreAction.DROP_ALARM:
        entry = store.get_exact(domain, now)
        report = entry.record.report if entry else None
        return PolicyDecision(Mode.STRICT, Reason.DROP_ALARM, report)
    governing = store.lookup(domain, now)
    if governing is not None:
        # A cached ancestor record opted this subdomain into strict mode.
        return PolicyDecision(Mode.STRICT, Reason.OK, governing.record.report)
    return PolicyDecision(Mode.DEFAULT, Reason.NO_RECORD)


def _failure(store, domain, reason, now, report=None) -> PolicyDecision:
    action = store.observe_absence(domain, "verification-failure", now)
    if action is StoreAction.DROP_ALARM:
        entry = store.get_exact(domain, now)
        stored_report = entry.record.report if entry else report
        return PolicyDecision(Mode.STRICT, Reason.DROP_ALARM, stored_report)
    governing = store.lookup(domain, now)
    if governing is not None:
        # The domain's own record is unusable but a cached ancestor mandates
        # strict mode; treat the unusable answer as interference.
        return PolicyDecision(
            Mode.STRICT, Reason.DROP_ALARM, governing.record.report
        )
    return PolicyDecision(Mode.DEFAULT, reason, report)
