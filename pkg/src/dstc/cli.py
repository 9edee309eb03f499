"""Command-line surface.

Exit codes: 0 success, 1 policy or verification refusal (attack-signalling
decision, failed handshake, failed scenario expectation), 2 usage or file
errors. Every command takes its inputs from flags and files, reads the clock
only through --now, and writes results to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import date

from . import bench as bench_mod
from . import scenarios as scenarios_mod
from . import survey as survey_mod
from .dnssec import (
    TrustAnchor,
    TrustAnchorSet,
    ZoneFileError,
    ZoneKeyPair,
    ZoneStore,
    resolve,
    sign_rrset,
)
from .enforcement import ATTACK_REASONS, DEFAULT_CLIENT, apply, decide
from .handshake import AttackerStrategy, HandshakeResult, run_handshake
from .policy import (
    MalformedPolicy,
    PolicyRecord,
    parse_policy,
    parse_policy_date,
    serialize_policy,
)
from .store import PolicyStore, StoreFileError

USAGE_ERROR = 2
REFUSAL = 1


def _date_flag(text: str) -> date:
    try:
        return parse_policy_date(text)
    except MalformedPolicy as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _flag01(text: str) -> bool:
    if text == "0":
        return False
    if text == "1":
        return True
    raise argparse.ArgumentTypeError("must be 0 or 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dstc",
        description="Signed DNS policy records for strict TLS configurations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="render a canonical policy TXT value")
    p.add_argument("--valid-from", required=True, type=_date_flag, metavar="DD-MM-YYYY")
    p.add_argument("--valid-to", required=True, type=_date_flag, metavar="DD-MM-YYYY")
    p.add_argument("--report", required=True, help="owner contact, local@domain")
    p.add_argument("--include-sub-domain", type=_flag01, default=False, metavar="0|1")
    p.add_argument("--revoke", type=_flag01, default=False, metavar="0|1")
    p.add_argument("--name", default="DSTC")
    p.add_argument("--tls-level", default="strict-config")

    p = sub.add_parser("sign", help="sign a TXT record set into a zone file")
    p.add_argument("--zone", required=True, help="zone file to create or update")
    p.add_argument("--domain", required=True)
    p.add_argument("--policy-txt", required=True, help="TXT value, e.g. gen output")
    p.add_argument("--extra-txt", action="append", default=[], help="additional TXT value")
    p.add_argument("--key", required=True, help="PEM private key path")
    p.add_argument("--generate-key", action="store_true", help="create the key if missing")
    p.add_argument("--key-id", default="zsk-1")
    p.add_argument("--inception", required=True, type=_date_flag, metavar="DD-MM-YYYY")
    p.add_argument("--expiration", required=True, type=_date_flag, metavar="DD-MM-YYYY")
    p.add_argument("--anchors-out", help="also record the key as a trust anchor here")

    p = sub.add_parser("resolve", help="look up a name's TXT record set")
    p.add_argument("--zone", required=True)
    p.add_argument("--name", required=True)

    p = sub.add_parser("verify", help="decide and show the effective TLS config")
    p.add_argument("--zone", required=True)
    p.add_argument("--anchors", required=True)
    p.add_argument("--domain", required=True)
    p.add_argument("--now", type=_date_flag, default=None, metavar="DD-MM-YYYY")
    p.add_argument("--store", help="policy cache file, loaded and written back")

    p = sub.add_parser("connect-sim", help="verify, then simulate the handshake")
    p.add_argument("--zone", required=True)
    p.add_argument("--anchors", required=True)
    p.add_argument("--domain", required=True)
    p.add_argument("--profiles", required=True, help="scenario file with PROFILE lines")
    p.add_argument("--server", required=True, help="profile name to connect to")
    p.add_argument("--attack", default="none", help="none|drop:N|fragment|modver:V")
    p.add_argument("--now", type=_date_flag, default=None, metavar="DD-MM-YYYY")
    p.add_argument("--store", help="policy cache file, loaded and written back")

    p = sub.add_parser("attack-sim", help="run a built-in or file-based attack suite")
    p.add_argument("suite", nargs="?", choices=sorted(scenarios_mod.BUILTIN_SUITES))
    p.add_argument("--scenario-file", help="run scenarios from a file instead")

    p = sub.add_parser("survey", help="summarise a corpus of server profiles")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kv", action="store_true", help="key=value output")

    p = sub.add_parser("bench", help="time the verification pipeline")
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--zone")
    p.add_argument("--anchors")
    p.add_argument("--domain", default="tls12.test")
    p.add_argument("--now", type=_date_flag, default=None, metavar="DD-MM-YYYY")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "gen": cmd_gen,
        "sign": cmd_sign,
        "resolve": cmd_resolve,
        "verify": cmd_verify,
        "connect-sim": cmd_connect_sim,
        "attack-sim": cmd_attack_sim,
        "survey": cmd_survey,
        "bench": cmd_bench,
    }[args.command]
    try:
        return handler(args)
    except (OSError, ZoneFileError, StoreFileError, scenarios_mod.ScenarioFileError,
            survey_mod.CorpusFormatError, survey_mod.EmptyCorpus, ValueError) as exc:
        print(f"dstc {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR


def _now(args) -> date:
    return args.now if args.now is not None else date.today()


def cmd_gen(args) -> int:
    try:
        record = PolicyRecord(
            name=args.name,
            valid_from=args.valid_from,
            valid_to=args.valid_to,
            tls_level=args.tls_level,
            include_sub_domain=args.include_sub_domain,
            revoke=args.revoke,
            report=args.report,
        )
        # Round-trip through the parser so every directive is validated the
        # same way a client would.
        parse_policy(serialize_policy(record))
    except (MalformedPolicy, ValueError) as exc:
        print(f"dstc gen: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(serialize_policy(record))
    return 0


def cmd_sign(args) -> int:
    if os.path.exists(args.key):
        keys = ZoneKeyPair.load_private_pem(args.key, args.key_id)
    elif args.generate_key:
        keys = ZoneKeyPair.generate(args.key_id)
        keys.save_private_pem(args.key)
        print(f"generated key {args.key_id} at {args.key}", file=sys.stderr)
    else:
        print(f"dstc sign: key file {args.key} not found "
              "(pass --generate-key to create it)", file=sys.stderr)
        return USAGE_ERROR

    parse_policy(args.policy_txt)  # refuse to sign a malformed policy
    zone = ZoneStore.load(args.zone) if os.path.exists(args.zone) else ZoneStore()
    rrset = sign_rrset(
        keys,
        args.domain,
        [args.policy_txt, *args.extra_txt],
        args.inception,
        args.expiration,
    )
    zone.publish(rrset)
    zone.add_key(keys.key_id, keys.public_der())
    zone.save(args.zone)
    print(f"signed {len(rrset.values)} TXT value(s) for {rrset.owner_name} "
          f"into {args.zone}")

    if args.anchors_out:
        anchors = (
            TrustAnchorSet.load(args.anchors_out)
            if os.path.exists(args.anchors_out)
            else TrustAnchorSet()
        )
        anchors.add(TrustAnchor(rrset.owner_name, keys.key_id, keys.public_der()))
        anchors.save(args.anchors_out)
        print(f"trust anchor for {rrset.owner_name} recorded in {args.anchors_out}")
    return 0


def cmd_resolve(args) -> int:
    response = resolve(ZoneStore.load(args.zone), args.name)
    print(f"{response.queried_name}: {response.disposition.value}")
    if response.rrset is not None:
        for value in response.rrset.values:
            print(f'  TXT "{value}"')
        r = response.rrset
        if r.signature:
            print(f"  SIG key={r.key_id} inception={r.inception:%d-%m-%Y} "
                  f"expiration={r.expiration:%d-%m-%Y}")
        else:
            print("  SIG (none)")
    return 0


def _load_store(path: str | None) -> PolicyStore:
    if path and os.path.exists(path):
        return PolicyStore.load(path)
    return PolicyStore()


def _decide_and_print(zone, anchors, store, domain, now):
    decision = decide(resolve(zone, domain), anchors, store, domain, now)
    config = apply(decision, DEFAULT_CLIENT)
    report = decision.report_address or "-"
    print(f"decision: mode={decision.mode.value} reason={decision.reason.value} "
          f"report={report}")
    print(f"config: versions={','.join(v.label for v in config.versions)} "
          f"fallback={'on' if config.fallback_enabled else 'off'}")
    print(f"config: suites={','.join(config.ciphersuites)}")
    if decision.reason in ATTACK_REASONS:
        target = decision.report_address
        if target:
            print(f"report: attack indicators for {domain} should be reported to {target}")
    return decision, config


def cmd_verify(args) -> int:
    zone = ZoneStore.load(args.zone)
    anchors = TrustAnchorSet.load(args.anchors)
    store = _load_store(args.store)
    decision, _ = _decide_and_print(zone, anchors, store, args.domain, _now(args))
    if args.store:
        store.save(args.store)
    return REFUSAL if decision.reason in ATTACK_REASONS else 0


def cmd_connect_sim(args) -> int:
    zone = ZoneStore.load(args.zone)
    anchors = TrustAnchorSet.load(args.anchors)
    store = _load_store(args.store)
    with open(args.profiles, "r", encoding="utf-8") as fh:
        profiles, _ = scenarios_mod.parse_scenario_file(fh.read())
    if args.server not in profiles:
        raise scenarios_mod.ScenarioFileError(
            f"profile {args.server!r} not defined in {args.profiles}"
        )
    attack = AttackerStrategy.parse(args.attack)
    decision, config = _decide_and_print(zone, anchors, store, args.domain, _now(args))
    outcome = run_handshake(config, profiles[args.server], attack)
    print(f"attack: {attack.describe()}")
    print("transcript:")
    for event in outcome.transcript:
        print(f"  {event}")
    if outcome.result is HandshakeResult.ESTABLISHED:
        print(f"outcome: {outcome.result.value} version={outcome.negotiated_version} "
              f"suite={outcome.negotiated_suite}")
    else:
        print(f"outcome: {outcome.result.value}")
    if args.store:
        store.save(args.store)
    return 0 if outcome.result is HandshakeResult.ESTABLISHED else REFUSAL


def cmd_attack_sim(args) -> int:
    if bool(args.suite) == bool(args.scenario_file):
        print("dstc attack-sim: pass exactly one of <suite> or --scenario-file",
              file=sys.stderr)
        return USAGE_ERROR
    if args.scenario_file:
        with open(args.scenario_file, "r", encoding="utf-8") as fh:
            profiles, scenario_list = scenarios_mod.parse_scenario_file(fh.read())
        report = scenarios_mod.run_scenario_suite(
            scenario_list, profiles, suite_name=os.path.basename(args.scenario_file)
        )
    else:
        report = scenarios_mod.run_builtin_suite(args.suite)
    print(report.render())
    return 0 if report.all_passed else REFUSAL


def cmd_survey(args) -> int:
    with open(args.corpus, "r", encoding="utf-8") as fh:
        profiles = survey_mod.parse_corpus(fh.read())
    report = survey_mod.survey(profiles)
    print(survey_mod.render_report_kv(report) if args.kv
          else survey_mod.render_report_text(report))
    return 0


def cmd_bench(args) -> int:
    if args.iterations < 1:
        print("dstc bench: --iterations must be at least 1", file=sys.stderr)
        return USAGE_ERROR
    if bool(args.zone) != bool(args.anchors):
        print("dstc bench: --zone and --anchors go together", file=sys.stderr)
        return USAGE_ERROR
    if args.zone:
        zone = ZoneStore.load(args.zone)
        anchors = TrustAnchorSet.load(args.anchors)
        now = _now(args)
    else:
        fixture = scenarios_mod.build_fixture(
            {args.domain: scenarios_mod.fixture_policy(report=f"admin@{args.domain}")}
        )
        zone, anchors, now = fixture.zone, fixture.anchors, fixture.now
    report = bench_mod.run_bench(zone, anchors, args.domain, now, args.iterations)
    print(bench_mod.render_bench_table(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
