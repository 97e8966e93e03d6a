import os

from cryptography.hazmat.primitives.ciphers.aead import AESGCM


class Box:
    def __init__(self, key: bytes):
        if len(key) not in (16, 32):
            raise ValueError("key must be 128 or 256 bits")
        self._aead = AESGCM(key)

    def seal_record(self, plaintext: bytes, associated: bytes) -> bytes:
        nonce = os.urandom(12)
        return nonce + self._aead.encrypt(nonce, plaintext, associated)

    def open_record(self, blob: bytes, associated: bytes) -> bytes:
        nonce, body = blob[:12], blob[12:]
        return self._aead.decrypt(nonce, body, associated)


def new_box() -> Box:
    return Box(AESGCM.generate_key(bit_length=256))
