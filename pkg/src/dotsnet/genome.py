"""582-byte direct encoding of a network.

465 parameters, each a 10-bit unsigned field written most significant bit
first into one contiguous bitstream, in :meth:`Network.to_vector` order.  The
field value ``k`` stands for ``-64 + 128 k / 1023``.  That uses 4650 bits; the
last 6 bits of the 4656-bit string ride along but never reach the phenotype.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import N_PARAMS, Network
from .rng import RngStream

FIELD_BITS = 10
LEVELS = 1 << FIELD_BITS
USED_BITS = N_PARAMS * FIELD_BITS
GENOME_BYTES = 582
GENOME_BITS = GENOME_BYTES * 8
LOW, HIGH = -64.0, 64.0
STEP = (HIGH - LOW) / (LEVELS - 1)

assert 9 * 250 + 24 * 100 == USED_BITS == 4650
assert (USED_BITS + 7) // 8 == GENOME_BYTES and GENOME_BITS - USED_BITS == 6

_PLACE = (1 << np.arange(FIELD_BITS - 1, -1, -1)).astype(np.int64)


@dataclass(frozen=True)
class Genome:
    data: bytes

    def __post_init__(self):
        if not isinstance(self.data, (bytes, bytearray)):
            raise TypeError("genome data must be bytes")
        if len(self.data) != GENOME_BYTES:
            raise ValueError(f"genome must be {GENOME_BYTES} bytes, got {len(self.data)}")
        object.__setattr__(self, "data", bytes(self.data))

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "Genome":
        return cls(np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes())

    @classmethod
    def random(cls, rng: RngStream) -> "Genome":
        return cls(rng.gen.integers(0, 256, GENOME_BYTES, dtype=np.uint8).tobytes())

    @classmethod
    def from_hex(cls, text: str) -> "Genome":
        return cls(bytes.fromhex(text.strip()))

    def bits(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.data, dtype=np.uint8))

    def hex(self) -> str:
        return self.data.hex()

    def indices(self) -> np.ndarray:
        """The 465 quantization indices."""
        fields = self.bits()[:USED_BITS].reshape(N_PARAMS, FIELD_BITS).astype(np.int64)
        return fields @ _PLACE


def quant_value(k):
    """Parameter value of quantization index ``k`` (scalar or array)."""
    arr = np.asarray(k)
    if not np.issubdtype(arr.dtype, np.integer):
        raise TypeError("quantization index must be an integer")
    if np.any(arr < 0) or np.any(arr >= LEVELS):
        raise ValueError(f"quantization index outside [0, {LEVELS - 1}]")
    # k * 128 is exact, so both endpoints come out exact
    vals = LOW + arr.astype(np.float64) * (HIGH - LOW) / (LEVELS - 1)
    return float(vals) if vals.ndim == 0 else vals


def quant_index(x):
    """Nearest quantization index to ``x``; halfway cases go to the even index."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~np.isfinite(arr)) or np.any(arr < LOW) or np.any(arr > HIGH):
        raise ValueError(f"parameter outside [{LOW}, {HIGH}]")
    k = np.rint((arr - LOW) * (LEVELS - 1) / (HIGH - LOW)).astype(np.int64)
    return int(k) if k.ndim == 0 else k


def decode(g: Genome) -> Network:
    return Network.from_vector(quant_value(g.indices()))


def encode(net: Network) -> Genome:
    k = quant_index(net.to_vector())
    fields = ((k[:, None] & _PLACE[None, :]) != 0).astype(np.uint8).ravel()
    bits = np.zeros(GENOME_BITS, dtype=np.uint8)
    bits[:USED_BITS] = fields
    return Genome.from_bits(bits)


def crossover(a: Genome, b: Genome, rng: RngStream) -> tuple[Genome, Genome]:
    """Single-point crossover; the cut falls before bit ``1..4655``."""
    if len(a.data) != len(b.data):
        raise ValueError("parents differ in length")
    cut = 1 + rng.randbelow(GENOME_BITS - 1)
    return crossover_at(a, b, cut)


def crossover_at(a: Genome, b: Genome, cut: int) -> tuple[Genome, Genome]:
    if not 1 <= cut < GENOME_BITS:
        raise ValueError(f"cut point {cut} outside [1, {GENOME_BITS - 1}]")
    x, y = a.bits(), b.bits()
    return (
        Genome.from_bits(np.concatenate([x[:cut], y[cut:]])),
        Genome.from_bits(np.concatenate([y[:cut], x[cut:]])),
    )


def mutate(g: Genome, p: float, rng: RngStream) -> Genome:
    """Flip each of the 4656 bits independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mutation probability {p} outside [0, 1]")
    if p == 0.0:
        return g
    flips = rng.gen.random(GENOME_BITS) < p
    if not flips.any():
        return g
    return Genome.from_bits(g.bits() ^ flips.astype(np.uint8))
