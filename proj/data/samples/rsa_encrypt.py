from dataclasses import dataclass


@dataclass
class PublicKey:
    n: int
    e: int


def encrypt_message(key: PublicKey, message: bytes) -> bytes:
    """Encrypts message for the holder of key."""
    m = int.from_bytes(message, "big")
    if m >= key.n:
        raise ValueError("message too long")
    c = pow(m, key.e, key.n)
    return c.to_bytes((key.n.bit_length() + 7) // 8, "big")


def decrypt_message(n: int, d: int, ciphertext: bytes) -> bytes:
    c = int.from_bytes(ciphertext, "big")
    m = pow(c, d, n)
    return m.to_bytes((m.bit_length() + 7) // 8, "big")
