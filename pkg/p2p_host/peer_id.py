import base64
import hashlib
from dataclasses import dataclass

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import x25519


def public_bytes(key):
    if isinstance(key, x25519.X25519PrivateKey):
        key = key.public_key()
    if isinstance(key, (bytes, bytearray)):
        return bytes(key)
    return key.public_bytes(encoding=serialization.Encoding.Raw, format=serialization.PublicFormat.Raw)


def generate_static_key(rng=None):
    """Par X25519; com rng (numpy Generator) a chave é reprodutível."""
    if rng is None:
        return x25519.X25519PrivateKey.generate()
    return x25519.X25519PrivateKey.from_private_bytes(rng.bytes(32))


@dataclass(frozen=True, order=True)
class PeerId:
    """base32 minúsculo, sem padding, do SHA-256 da chave pública estática."""

    id: str

    @classmethod
    def from_public_key(cls, key):
        digest = hashlib.sha256(public_bytes(key)).digest()
        return cls(base64.b32encode(digest).decode("ascii").rstrip("=").lower())

    @classmethod
    def from_bytes(cls, data):
        return cls(bytes(data).decode("utf-8"))

    def to_bytes(self):
        return self.id.encode("utf-8")

    def short(self):
        return self.id[:8]

    def __str__(self):
        return self.id
