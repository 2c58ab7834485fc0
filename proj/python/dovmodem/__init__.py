"""Data-over-voice modem: quaternary codebooks, harmonic 4-PSK symbols,
channel simulation and secure-voice frames."""

from ._core import *  # noqa: F401,F403
from ._core import DovError

__version__ = "0.1.0"


def payload_roundtrip(data: bytes, codebook, training_seconds: float = 2.0):
    """Modulate then demodulate ``data`` over an ideal channel."""
    n = training_symbol_count(training_seconds, codebook.params)  # noqa: F405
    audio = modulate_payload(data, codebook, n)  # noqa: F405
    out, _, _ = demodulate_payload(audio, codebook, n)  # noqa: F405
    return out
