"""Signed TXT record sets in a toy DNS zone.

Zone signing keys are RSA-SHA256 pairs of at least 2048 bits. A signature
covers a canonical byte form of (owner name, type, inception, expiration,
sorted values), so names compare case-insensitively and value order never
matters. Chain-of-trust walking is replaced by a trust-anchor set mapping a
zone apex to the public key a client accepts for that apex and everything
below it.

The zone store doubles as the attack surface: ``attacker_*`` methods mutate
published record sets without access to the signing key, which is exactly
what a man-in-the-middle can do to plain DNS traffic.

File formats (UTF-8, line oriented, ``#`` comments allowed):

  zone file      <name> TXT "<value>"
                 <name> SIG <key_id> <inception> <expiration> <base64 sig>
                 KEY <key_id> <base64 DER public key>
  trust anchors  <zone apex> <key_id> <base64 DER public key>

Dates are dd-mm-yyyy. A TXT set without a SIG line is kept as an unsigned
record set; it can never verify.
"""

from __future__ import annotations

import base64
import struct
import threading
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum

from cryptography.exceptions import InvalidSignature as _BadSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa

from .policy import format_policy_date, parse_policy_date

MIN_KEY_BITS = 2048

_PAD = padding.PKCS1v15()
_HASH = hashes.SHA256()

# Sentinel validity window for unsigned record sets loaded from zone files.
_NO_DATE = date.min


class MissingPrivateKey(ValueError):
    """Signing was requested with a verify-only key pair."""


class ZoneNotLoaded(RuntimeError):
    """resolve() was called before a zone was loaded."""


class ZoneFileError(ValueError):
    """A zone or trust-anchor file could not be parsed."""


def normalize_domain(name: str) -> str:
    return name.strip().rstrip(".").lower()


def canonical_form(
    owner_name: str,
    values: list[str] | tuple[str, ...],
    inception: date,
    expiration: date,
) -> bytes:
    """Deterministic byte form of a TXT record set, the signing input.

    Values are length-prefixed and sorted by byte order, so logically equal
    sets canonicalise identically regardless of in-memory order or name case.
    """
    if not owner_name:
        raise ValueError("owner name must be non-empty")
    head = b"|".join(
        (
            normalize_domain(owner_name).encode("ascii"),
            b"TXT",
            format_policy_date(inception).encode("ascii"),
            format_policy_date(expiration).encode("ascii"),
        )
    )
    body = b"".join(
        struct.pack(">I", len(raw)) + raw
        for raw in sorted(v.encode("utf-8") for v in values)
    )
    return head + b"|" + body


@dataclass
class ZoneKeyPair:
    """A zone signing key. The private half is absent on the client side."""

    key_id: str
    public_key: rsa.RSAPublicKey
    private_key: rsa.RSAPrivateKey | None = None
    algorithm: str = "RSASHA256"

    @classmethod
    def generate(cls, key_id: str, bits: int = MIN_KEY_BITS) -> "ZoneKeyPair":
        if bits < MIN_KEY_BITS:
            raise ValueError(f"key size {bits} below the {MIN_KEY_BITS}-bit floor")
        private = rsa.generate_private_key(public_exponent=65537, key_size=bits)
        return cls(key_id=key_id, public_key=private.public_key(), private_key=private)

    def public_only(self) -> "ZoneKeyPair":
        return ZoneKeyPair(self.key_id, self.public_key, None, self.algorithm)

    def public_der(self) -> bytes:
        return self.public_key.public_bytes(
            serialization.Encoding.DER,
            serialization.PublicFormat.SubjectPublicKeyInfo,
        )

    def save_private_pem(self, path: str) -> None:
        if self.private_key is None:
            raise MissingPrivateKey(self.key_id)
        pem = self.private_key.private_bytes(
            serialization.Encoding.PEM,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        )
        with open(path, "wb") as fh:
            fh.write(pem)

    @classmethod
    def load_private_pem(cls, path: str, key_id: str) -> "ZoneKeyPair":
        with open(path, "rb") as fh:
            private = serialization.load_pem_private_key(fh.read(), password=None)
        if not isinstance(private, rsa.RSAPrivateKey):
            raise ZoneFileError(f"{path}: not an RSA private key")
        if private.key_size < MIN_KEY_BITS:
            raise ValueError(f"{path}: key size below the {MIN_KEY_BITS}-bit floor")
        return cls(key_id=key_id, public_key=private.public_key(), private_key=private)


def public_key_from_der(der: bytes) -> rsa.RSAPublicKey:
    key = serialization.load_der_public_key(der)
    if not isinstance(key, rsa.RSAPublicKey):
        raise ZoneFileError("not an RSA public key")
    return key


@dataclass(frozen=True)
class SignedRRset:
    """A TXT record set plus its detached signature and validity window."""

    owner_name: str
    values: tuple[str, ...]
    signature: bytes
    key_id: str
    inception: date
    expiration: date
    record_type: str = "TXT"

    def canonical_bytes(self) -> bytes:
        return canonical_form(self.owner_name, self.values, self.inception, self.expiration)


class VerifyStatus(Enum):
    VALID = "Valid"
    INVALID_SIGNATURE = "InvalidSignature"
    SIGNATURE_EXPIRED = "SignatureExpired"
    SIGNATURE_NOT_YET_VALID = "SignatureNotYetValid"


def sign_rrset(
    keys: ZoneKeyPair,
    owner_name: str,
    values: list[str] | tuple[str, ...],
    inception: date,
    expiration: date,
) -> SignedRRset:
    """Sign a TXT value set; the result verifies under the pair's public key."""
    if keys.private_key is None:
        raise MissingPrivateKey(keys.key_id)
    if inception > expiration:
        raise ValueError("inception is later than expiration")
    signature = keys.private_key.sign(
        canonical_form(owner_name, values, inception, expiration), _PAD, _HASH
    )
    return SignedRRset(
        owner_name=normalize_domain(owner_name),
        values=tuple(sorted(values, key=lambda v: v.encode("utf-8"))),
        signature=signature,
        key_id=keys.key_id,
        inception=inception,
        expiration=expiration,
    )


def verify_rrset(
    public_key: rsa.RSAPublicKey, rrset: SignedRRset, now: date
) -> VerifyStatus:
    """Check the signature and its validity window.

    A broken signature wins over a window violation, so tampering is reported
    as tampering even on an expired set.
    """
    try:
        public_key.verify(rrset.signature, rrset.canonical_bytes(), _PAD, _HASH)
    except (_BadSignature, ValueError):
        return VerifyStatus.INVALID_SIGNATURE
    if now < rrset.inception:
        return VerifyStatus.SIGNATURE_NOT_YET_VALID
    if now > rrset.expiration:
        return VerifyStatus.SIGNATURE_EXPIRED
    return VerifyStatus.VALID


class Disposition(Enum):
    ANSWERED = "Answered"
    NO_RECORD = "NoRecord"
    NO_SUCH_DOMAIN = "NoSuchDomain"


@dataclass(frozen=True)
class DnsResponse:
    queried_name: str
    disposition: Disposition
    rrset: SignedRRset | None = None

    def __post_init__(self):
        if (self.disposition is Disposition.ANSWERED) != (self.rrset is not None):
            raise ValueError("rrset must be present exactly when Answered")


class ZoneStore:
    """All record sets of one zone, plus the attacker's write access.

    Reads are safe from any thread; mutations (owner publishes and attacker
    manipulations alike) serialise on an internal lock.
    """

    def __init__(self):
        self._names: set[str] = set()
        self._txt: dict[str, SignedRRset] = {}
        self._keys: dict[str, bytes] = {}
        self._lock = threading.RLock()

    # -- owner-side operations

    def register_name(self, name: str) -> None:
        with self._lock:
            self._names.add(normalize_domain(name))

    def publish(self, rrset: SignedRRset) -> None:
        with self._lock:
            self._names.add(rrset.owner_name)
            self._txt[rrset.owner_name] = rrset

    def add_key(self, key_id: str, public_der: bytes) -> None:
        with self._lock:
            self._keys[key_id] = public_der

    def rrset_for(self, name: str) -> SignedRRset | None:
        return self._txt.get(normalize_domain(name))

    def names(self) -> frozenset:
        return frozenset(self._names)

    def key_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._keys))

    # -- attacker operations: record manipulation without the signing key

    def attacker_add_txt_value(self, name: str, value: str) -> None:
        """Inject a TXT value; creates an unsigned set for unknown names."""
        name = normalize_domain(name)
        with self._lock:
            current = self._txt.get(name)
            if current is None:
                self._names.add(name)
                self._txt[name] = SignedRRset(
                    owner_name=name,
                    values=(value,),
                    signature=b"",
                    key_id="-",
                    inception=_NO_DATE,
                    expiration=_NO_DATE,
                )
            else:
                self._txt[name] = replace(current, values=current.values + (value,))

    def attacker_modify_txt_value(self, name: str, index: int, value: str) -> None:
        name = normalize_domain(name)
        with self._lock:
            current = self._txt[name]
            values = list(current.values)
            values[index] = value
            self._txt[name] = replace(current, values=tuple(values))

    def attacker_delete_txt_value(self, name: str, index: int) -> None:
        name = normalize_domain(name)
        with self._lock:
            current = self._txt[name]
            values = list(current.values)
            del values[index]
            self._txt[name] = replace(current, values=tuple(values))

    def attacker_tamper_signature(self, name: str, byte_index: int = 0) -> None:
        name = normalize_domain(name)
        with self._lock:
            current = self._txt[name]
            sig = bytearray(current.signature)
            sig[byte_index] ^= 0x01
            self._txt[name] = replace(current, signature=bytes(sig))

    def attacker_drop_rrset(self, name: str) -> None:
        """Suppress the TXT set; the name itself stays resolvable."""
        name = normalize_domain(name)
        with self._lock:
            self._txt.pop(name, None)

    def attacker_replace_rrset(self, name: str, rrset: SignedRRset) -> None:
        """Substitute a captured record set, e.g. replay an old signed one."""
        name = normalize_domain(name)
        with self._lock:
            self._names.add(name)
            self._txt[name] = replace(rrset, owner_name=name)

    # -- persistence

    def to_text(self) -> str:
        lines = []
        with self._lock:
            for name in sorted(self._txt):
                rrset = self._txt[name]
                for value in rrset.values:
                    if '"' in value:
                        raise ZoneFileError(f"{name}: TXT value contains a quote")
                    lines.append(f'{name} TXT "{value}"')
                if rrset.signature:
                    sig64 = base64.b64encode(rrset.signature).decode("ascii")
                    lines.append(
                        f"{name} SIG {rrset.key_id} "
                        f"{format_policy_date(rrset.inception)} "
                        f"{format_policy_date(rrset.expiration)} {sig64}"
                    )
            for name in sorted(self._names - set(self._txt)):
                lines.append(f"{name} NAME -")
            for key_id in sorted(self._keys):
                der64 = base64.b64encode(self._keys[key_id]).decode("ascii")
                lines.append(f"KEY {key_id} {der64}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ZoneStore":
        zone = cls()
        txt_values: dict[str, list[str]] = {}
        sigs: dict[str, tuple[str, date, date, bytes]] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                zone._parse_line(line, txt_values, sigs)
            except (ZoneFileError, ValueError) as exc:
                raise ZoneFileError(f"line {lineno}: {exc}") from exc
        for name in sigs:
            if name not in txt_values:
                raise ZoneFileError(f"SIG without TXT values for {name}")
        for name, values in txt_values.items():
            key_id, inception, expiration, signature = sigs.get(
                name, ("-", _NO_DATE, _NO_DATE, b"")
            )
            zone._txt[name] = SignedRRset(
                owner_name=name,
                values=tuple(values),
                signature=signature,
                key_id=key_id,
                inception=inception,
                expiration=expiration,
            )
            zone._names.add(name)
        return zone

    def _parse_line(self, line, txt_values, sigs) -> None:
        fields = line.split()
        if fields[0] == "KEY":
            if len(fields) != 3:
                raise ZoneFileError("KEY line needs <key_id> <base64>")
            self._keys[fields[1]] = base64.b64decode(fields[2], validate=True)
            return
        name = normalize_domain(fields[0])
        kind = fields[1] if len(fields) > 1 else ""
        if kind == "TXT":
            rest = line.split(None, 2)[2]
            if not (rest.startswith('"') and rest.endswith('"') and len(rest) >= 2):
                raise ZoneFileError("TXT value must be double-quoted")
            txt_values.setdefault(name, []).append(rest[1:-1])
            self._names.add(name)
        elif kind == "SIG":
            if len(fields) != 6:
                raise ZoneFileError("SIG line needs <key_id> <inception> <expiration> <base64>")
            if name in sigs:
                raise ZoneFileError(f"duplicate SIG for {name}")
            sigs[name] = (
                fields[2],
                parse_policy_date(fields[3], "inception"),
                parse_policy_date(fields[4], "expiration"),
                base64.b64decode(fields[5], validate=True),
            )
            self._names.add(name)
        elif kind == "NAME":
            self._names.add(name)
        else:
            raise ZoneFileError(f"unknown record kind {kind!r}")

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path: str) -> "ZoneStore":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def resolve(zone: ZoneStore | None, name: str) -> DnsResponse:
    """Look up a name's TXT record set in the zone.

    Returns Answered with the signed set, NoRecord for a known name without
    TXT data, and NoSuchDomain otherwise.
    """
    if zone is None:
        raise ZoneNotLoaded("no zone loaded")
    name = normalize_domain(name)
    rrset = zone.rrset_for(name)
    if rrset is not None:
        return DnsResponse(name, Disposition.ANSWERED, rrset)
    if name in zone.names():
        return DnsResponse(name, Disposition.NO_RECORD)
    return DnsResponse(name, Disposition.NO_SUCH_DOMAIN)


@dataclass(frozen=True)
class TrustAnchor:
    apex: str
    key_id: str
    public_key_der: bytes

    def public_key(self) -> rsa.RSAPublicKey:
        return public_key_from_der(self.public_key_der)


class TrustAnchorSet:
    """Out-of-band authenticated zone keys, keyed by zone apex."""

    def __init__(self, anchors: dict[str, TrustAnchor] | None = None):
        self._anchors: dict[str, TrustAnchor] = dict(anchors or {})

    def add(self, anchor: TrustAnchor) -> None:
        self._anchors[normalize_domain(anchor.apex)] = anchor

    def lookup(self, domain: str) -> TrustAnchor | None:
        """Longest-suffix anchor covering the domain, on label boundaries."""
        labels = normalize_domain(domain).split(".")
        for i in range(len(labels)):
            anchor = self._anchors.get(".".join(labels[i:]))
            if anchor is not None:
                return anchor
        return None

    def to_text(self) -> str:
        lines = []
        for apex in sorted(self._anchors):
            anchor = self._anchors[apex]
            der64 = base64.b64encode(anchor.public_key_der).decode("ascii")
            lines.append(f"{apex} {anchor.key_id} {der64}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TrustAnchorSet":
        anchors = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ZoneFileError(
                    f"line {lineno}: expected <apex> <key_id> <base64 key>"
                )
            try:
                der = base64.b64decode(fields[2], validate=True)
                public_key_from_der(der)
            except Exception as exc:
                raise ZoneFileError(f"line {lineno}: bad public key: {exc}") from exc
            anchors.add(TrustAnchor(normalize_domain(fields[0]), fields[1], der))
        return anchors

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path: str) -> "TrustAnchorSet":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())
