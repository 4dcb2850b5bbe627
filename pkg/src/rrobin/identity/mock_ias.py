"""A stand-in attestation service issuing pseudonym-linkable quotes.

Each registered platform maps to a stable pseudonym derived from the
provider's secret, so two enrollments from one platform are linkable while
different platforms stay unlinkable to anyone without the secret.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core.crypto import KeyPair, Tag, hash_parts, sign, verify
from .messages import AttestationQuote


class UnknownPlatform(LookupError):
    pass


@dataclass
class MockIAS:
    key: KeyPair
    secret: bytes
    platforms: set[bytes] = field(default_factory=set)

    @classmethod
    def from_seed(cls, seed: bytes, scheme: str = "ed25519") -> "MockIAS":
        return cls(KeyPair.from_seed(hash_parts(b"ias-key", seed), scheme), hash_parts(b"ias-secret", seed))

    @property
    def provider_pk(self) -> bytes:
        return self.key.pk

    def register(self, platform_id: bytes) -> None:
        self.platforms.add(bytes(platform_id))

    def pseudonym(self, platform_id: bytes) -> bytes:
        return hash_parts(Tag.PSEUDONYM, self.secret, platform_id)

    def issue_quote(self, platform_id: bytes, userdata: bytes, enclave_hash: bytes) -> AttestationQuote:
        if platform_id not in self.platforms:
            raise UnknownPlatform(platform_id.hex())
        nym = self.pseudonym(platform_id)
        sig = sign(self.key, AttestationQuote.signed_body(nym, userdata, enclave_hash))
        return AttestationQuote(nym, userdata, enclave_hash, sig)


def mock_ias_issue_quote(ias: MockIAS, platform_id: bytes, userdata: bytes, enclave_hash: bytes) -> AttestationQuote:
    return ias.issue_quote(platform_id, userdata, enclave_hash)


def verify_quote(provider_pk: bytes, quote: AttestationQuote) -> bool:
    body = AttestationQuote.signed_body(quote.pseudonym, quote.userdata, quote.enclave_hash)
    return verify(provider_pk, body, quote.provider_sig)
