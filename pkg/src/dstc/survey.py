"""Version and ciphersuite statistics over a corpus of server profiles.

The corpus is a text file, one profile per line:

    <domain> | <comma-separated versions> | <comma-separated ciphersuites>

Blank lines and ``#`` comments are ignored. Version-support figures use the
full responding population as denominator; ciphersuite figures only make
sense for servers speaking the latest version, so they use that
subpopulation, and the report states both denominators. Percentages are
rounded half-up to two decimals.

``generate_corpus`` builds a synthetic corpus hitting exact target counts,
so the survey arithmetic can be validated against known ground truth.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP

from .enforcement import SuiteLabel, TlsVersion, classify_ciphersuite
from .handshake import ServerProfile


class EmptyCorpus(ValueError):
    """The corpus contains no profiles."""


class CorpusFormatError(ValueError):
    """A corpus line could not be parsed."""


def pct(count: int, denominator: int) -> str:
    """Half-up two-decimal percentage, as a string like '97.29'."""
    if denominator == 0:
        return "0.00"
    value = (Decimal(count) * 100 / Decimal(denominator)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP
    )
    return f"{value:.2f}"


def parse_corpus(text: str) -> list[ServerProfile]:
    profiles = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 3:
            raise CorpusFormatError(
                f"line {lineno}: expected '<domain> | <versions> | <suites>'"
            )
        domain, versions_part, suites_part = parts
        try:
            versions = frozenset(
                TlsVersion.parse(tok) for tok in versions_part.split(",") if tok.strip()
            )
            suites = tuple(s.strip() for s in suites_part.split(",") if s.strip())
            profiles.append(ServerProfile(domain, versions, suites))
        except ValueError as exc:
            raise CorpusFormatError(f"line {lineno}: {exc}") from exc
    return profiles


def render_corpus(profiles: list[ServerProfile]) -> str:
    lines = []
    for p in profiles:
        versions = ",".join(v.label for v in sorted(p.supported_versions, reverse=True))
        lines.append(f"{p.domain} | {versions} | {','.join(p.suite_preference)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SurveyReport:
    responding: int
    latest_count: int
    latest_pct: str
    latest_exclusive_count: int
    latest_exclusive_pct: str
    latest_two_count: int          # supports latest and the one below
    latest_two_pct: str
    latest_three_count: int        # supports the top three versions
    latest_three_pct: str
    modal_suite_count: int | None  # most frequent number of suites per server
    modal_servers: int
    modal_pct: str
    label_counts: dict             # SuiteLabel -> suite occurrences
    fsae_any_count: int            # servers with at least one FS+AE suite
    fsae_any_pct: str
    fsae_mixed_count: int          # FS+AE plus at least one weaker label
    fsae_mixed_pct: str

    @property
    def latest_denominator(self) -> int:
        """Denominator for the ciphersuite figures."""
        return self.latest_count


def survey(profiles: list[ServerProfile]) -> SurveyReport:
    """Compute the survey statistics over parsed profiles."""
    if not profiles:
        raise EmptyCorpus("no profiles to survey")
    responding = len(profiles)
    latest = TlsVersion.TLS12
    prev = TlsVersion.TLS11
    floor = TlsVersion.TLS10

    latest_servers = [p for p in profiles if latest in p.supported_versions]
    exclusive = sum(
        1 for p in latest_servers if p.supported_versions == frozenset({latest})
    )
    two = sum(1 for p in latest_servers if prev in p.supported_versions)
    three = sum(
        1
        for p in latest_servers
        if prev in p.supported_versions and floor in p.supported_versions
    )

    count_freq = Counter(len(p.suite_preference) for p in latest_servers)
    if count_freq:
        top = max(count_freq.values())
        modal_count = min(c for c, n in count_freq.items() if n == top)
        modal_servers = count_freq[modal_count]
    else:
        modal_count, modal_servers = None, 0

    label_counts: Counter = Counter()
    fsae_any = 0
    fsae_mixed = 0
    for p in latest_servers:
        labels = [classify_ciphersuite(s) for s in p.suite_preference]
        label_counts.update(labels)
        if SuiteLabel.FS_AE in labels:
            fsae_any += 1
            if any(l is not SuiteLabel.FS_AE for l in labels):
                fsae_mixed += 1

    n_latest = len(latest_servers)
    return SurveyReport(
        responding=responding,
        latest_count=n_latest,
        latest_pct=pct(n_latest, responding),
        latest_exclusive_count=exclusive,
        latest_exclusive_pct=pct(exclusive, responding),
        latest_two_count=two,
        latest_two_pct=pct(two, responding),
        latest_three_count=three,
        latest_three_pct=pct(three, responding),
        modal_suite_count=modal_count,
        modal_servers=modal_servers,
        modal_pct=pct(modal_servers, n_latest),
        label_counts=dict(label_counts),
        fsae_any_count=fsae_any,
        fsae_any_pct=pct(fsae_any, n_latest),
        fsae_mixed_count=fsae_mixed,
        fsae_mixed_pct=pct(fsae_mixed, n_latest),
    )


def render_report_text(r: SurveyReport) -> str:
    """Aligned human-readable report."""
    label_lines = [
        f"    {label.value:<12} {r.label_counts.get(label, 0)}"
        for label in SuiteLabel
    ]
    modal = "-" if r.modal_suite_count is None else str(r.modal_suite_count)
    return "\n".join(
        [
            f"responding profiles            {r.responding}",
            f"supports TLS1.2                {r.latest_count} ({r.latest_pct}% of {r.responding})",
            f"supports TLS1.2 exclusively    {r.latest_exclusive_count} ({r.latest_exclusive_pct}% of {r.responding})",
            f"supports TLS1.2 and TLS1.1     {r.latest_two_count} ({r.latest_two_pct}% of {r.responding})",
            f"supports TLS1.2, 1.1 and 1.0   {r.latest_three_count} ({r.latest_three_pct}% of {r.responding})",
            f"modal suite count              {modal} in {r.modal_servers} servers ({r.modal_pct}% of {r.latest_denominator})",
            "suite labels across TLS1.2 servers:",
            *label_lines,
            f"servers with any FS+AE suite   {r.fsae_any_count} ({r.fsae_any_pct}% of {r.latest_denominator})",
            f"FS+AE plus weaker suites       {r.fsae_mixed_count} ({r.fsae_mixed_pct}% of {r.latest_denominator})",
        ]
    )


def render_report_kv(r: SurveyReport) -> str:
    """Machine-readable key=value lines."""
    pairs = [
        ("responding", r.responding),
        ("latest_count", r.latest_count),
        ("latest_pct", f"{r.latest_pct}%"),
        ("latest_exclusive_count", r.latest_exclusive_count),
        ("latest_exclusive_pct", f"{r.latest_exclusive_pct}%"),
        ("latest_two_count", r.latest_two_count),
        ("latest_two_pct", f"{r.latest_two_pct}%"),
        ("latest_three_count", r.latest_three_count),
        ("latest_three_pct", f"{r.latest_three_pct}%"),
        ("modal_suite_count", r.modal_suite_count),
        ("modal_servers", r.modal_servers),
        ("modal_pct", f"{r.modal_pct}%"),
        *(
            (f"label_{label.value}", r.label_counts.get(label, 0))
            for label in SuiteLabel
        ),
        ("fsae_any_count", r.fsae_any_count),
        ("fsae_any_pct", f"{r.fsae_any_pct}%"),
        ("fsae_mixed_count", r.fsae_mixed_count),
        ("fsae_mixed_pct", f"{r.fsae_mixed_pct}%"),
    ]
    return "\n".join(f"{k}={v}" for k, v in pairs)


# Suite pools for the synthetic generator, by label.
STRONG_POOL = (
    "ECDHE-ECDSA-AES128-GCM-SHA256",
    "ECDHE-RSA-AES128-GCM-SHA256",
    "ECDHE-ECDSA-AES256-GCM-SHA384",
    "ECDHE-RSA-AES256-GCM-SHA384",
    "ECDHE-RSA-CHACHA20-POLY1305",
    "ECDHE-ECDSA-CHACHA20-POLY1305",
    "DHE-RSA-AES128-GCM-SHA256",
    "DHE-RSA-AES256-GCM-SHA384",
)
WEAK_POOL = (
    "ECDHE-RSA-AES128-SHA",
    "ECDHE-RSA-AES256-SHA",
    "ECDHE-ECDSA-AES128-SHA",
    "ECDHE-ECDSA-AES256-SHA",
    "DHE-RSA-AES128-SHA",
    "DHE-RSA-AES256-SHA",
    "AES128-GCM-SHA256",
    "AES256-GCM-SHA384",
    "AES128-CCM",
    "AES256-CCM8",
    "AES128-SHA",
    "AES256-SHA",
    "AES128-SHA256",
    "AES256-SHA256",
    "CAMELLIA128-SHA",
    "DES-CBC3-SHA",
)

# Suite-count cycle for the non-modal mixed servers; every value differs from
# the modal count and appears rarely enough to never contest the mode.
_OTHER_COUNTS = (10, 12, 14, 16, 18, 22, 24)


def generate_corpus(
    total: int = 7080,
    latest: int = 6888,
    latest_exclusive: int = 373,
    latest_two: int = 6462,
    latest_three: int = 6202,
    fsae_any: int = 6500,
    fsae_mixed: int = 6483,
    modal_count: int = 20,
    modal_servers: int = 938,
    seed: int = 20180506,
) -> list[ServerProfile]:
    """Build a deterministic corpus hitting the target counts exactly.

    Targets: profiles responding, supporting the latest version, supporting
    it exclusively, supporting the top two / top three versions cumulatively,
    having at least one FS+AE suite, having FS+AE plus a weaker suite, and
    the modal suite count with its population.
    """
    only_two = latest_two - latest_three
    skipped_prev = latest - latest_exclusive - latest_two
    strong_only = fsae_any - fsae_mixed
    weak_only = latest - fsae_any
    non_latest = total - latest
    if min(only_two, skipped_prev, strong_only, weak_only, non_latest) < 0:
        raise ValueError("inconsistent corpus targets")
    if modal_servers > fsae_mixed:
        raise ValueError("modal population exceeds the mixed-suite population")
    if modal_count > len(STRONG_POOL) + len(WEAK_POOL):
        raise ValueError("modal suite count exceeds the suite pools")

    version_plan = (
        [frozenset({TlsVersion.TLS12})] * latest_exclusive
        + [frozenset({TlsVersion.TLS12, TlsVersion.TLS11, TlsVersion.TLS10})]
        * latest_three
        + [frozenset({TlsVersion.TLS12, TlsVersion.TLS11})] * only_two
        + [frozenset({TlsVersion.TLS12, TlsVersion.TLS10})] * skipped_prev
    )

    suite_plan = []
    for i in range(modal_servers):
        suite_plan.append(_mixed_suites(modal_count))
    for i in range(fsae_mixed - modal_servers):
        suite_plan.append(_mixed_suites(_OTHER_COUNTS[i % len(_OTHER_COUNTS)]))
    for _ in range(strong_only):
        suite_plan.append(STRONG_POOL[:6])
    for _ in range(weak_only):
        suite_plan.append(WEAK_POOL[:8])

    rng = random.Random(seed)
    rng.shuffle(version_plan)
    rng.shuffle(suite_plan)

    profiles = [
        ServerProfile(f"site{i:04d}.example", version_plan[i], tuple(suite_plan[i]))
        for i in range(latest)
    ]
    legacy_versions = (
        frozenset({TlsVersion.TLS11, TlsVersion.TLS10}),
        frozenset({TlsVersion.TLS10}),
        frozenset({TlsVersion.TLS11}),
    )
    for j in range(non_latest):
        profiles.append(
            ServerProfile(
                f"site{latest + j:04d}.example",
                legacy_versions[j % len(legacy_versions)],
                WEAK_POOL[:8],
            )
        )
    rng.shuffle(profiles)
    return profiles


def _mixed_suites(count: int) -> tuple[str, ...]:
    strong = max(1, count // 3)
    weak = count - strong
    if weak > len(WEAK_POOL) or strong > len(STRONG_POOL):
        raise ValueError(f"cannot build a mixed list of {count} suites")
    return STRONG_POOL[:strong] + WEAK_POOL[:weak]
