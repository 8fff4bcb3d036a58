"""Per-run secret derivation.

The secret is the only input that varies between runs of an experiment; it
is generated from the run index with splitmix64 so every platform and every
experiment sees the same sequence.
"""

from dataclasses import dataclass
from typing import Iterator

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(seed: int) -> Iterator[int]:
    """Yield successive splitmix64 outputs for ``seed``."""
    state = seed & MASK64
    while True:
        state = (state + GOLDEN_GAMMA) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


@dataclass(frozen=True)
class SecretInput:
    """Secret bytes for one run; ``data`` is written at SECRET_BASE."""

    run_index: int
    data: bytes

    @property
    def secret_id(self) -> str:
        return self.data[:8].hex()

    @property
    def hex(self) -> str:
        return self.data.hex()

    def __len__(self) -> int:
        return len(self.data)


def derive_secret(run_index: int, length: int) -> SecretInput:
    """Derive ``length`` secret bytes for ``run_index``.

    Args:
        run_index: Non-negative run number, used as the splitmix64 seed
        length: Number of bytes, at least 1

    Returns:
        SecretInput whose bytes are the little-endian outputs, truncated

    Raises:
        ValueError: for a zero length or negative run index
    """
    if length < 1:
        raise ValueError(f"secret length must be >= 1, got {length}")
    if run_index < 0:
        raise ValueError(f"run index must be non-negative, got {run_index}")
    out = bytearray()
    stream = splitmix64(run_index)
    while len(out) < length:
        out += next(stream).to_bytes(8, "little")
    return SecretInput(run_index, bytes(out[:length]))
