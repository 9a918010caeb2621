"""M-PSK constellations with Gray labeling, differential encode/decode."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Constellation:
    """Unit-modulus M-PSK points with a binary-reflected Gray labeling.

    Phase index m maps to the point exp(j 2 pi m / M) and to the bit
    pattern gray(m) = m ^ (m >> 1); bit-pattern 0 sits on the point 1.
    """

    M: int
    points: np.ndarray = field(init=False)
    gray_codes: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.M < 2 or self.M & (self.M - 1):
            raise ValueError("M must be a power of two >= 2")
        m = np.arange(self.M)
        object.__setattr__(self, "points", np.exp(2j * np.pi * m / self.M))
        object.__setattr__(self, "gray_codes", m ^ (m >> 1))

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.M))

    def index_from_gray(self, g: np.ndarray) -> np.ndarray:
        inv = np.empty(self.M, dtype=int)
        inv[self.gray_codes] = np.arange(self.M)
        return inv[g]

    def nearest_index(self, z) -> np.ndarray:
        """Phase index of the constellation point nearest in angle to z.

        Ties (exactly halfway between two points) break toward the smaller
        phase index; z = 0 maps to index 0.
        """
        x = np.angle(z) * self.M / (2.0 * np.pi)
        return np.ceil(x - 0.5).astype(int) % self.M


def map_bits_to_indices(bits, c: Constellation) -> np.ndarray:
    """Phase indices of the Gray-mapped symbols (MSB first per symbol)."""
    bits = np.asarray(bits, dtype=int)
    k = c.bits_per_symbol
    if bits.size % k:
        raise ValueError("bit count must be divisible by log2(M)")
    groups = bits.reshape(-1, k)
    gray = groups @ (1 << np.arange(k - 1, -1, -1))
    return c.index_from_gray(gray)


def map_bits(bits, c: Constellation) -> np.ndarray:
    """Gray-map a bit vector (MSB first per symbol) onto M-PSK points."""
    return c.points[map_bits_to_indices(bits, c)]


def demap_symbols(symbols, c: Constellation) -> np.ndarray:
    """Inverse of map_bits with nearest-point quantization."""
    idx = c.nearest_index(np.asarray(symbols))
    gray = c.gray_codes[idx]
    k = c.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((gray[:, None] >> shifts[None, :]) & 1).reshape(-1)


def diff_encode(v) -> np.ndarray:
    """s[0] = 1, s[k] = v[k] s[k-1]; output one longer than the input."""
    v = np.asarray(v, dtype=complex)
    if np.any(np.abs(np.abs(v) - 1.0) > 1e-9):
        raise ValueError("differential encoding requires unit-modulus symbols")
    return np.concatenate([[1.0 + 0j], np.cumprod(v)])


def diff_decode(s_hat, c: Constellation) -> np.ndarray:
    """v_hat[k] = s_hat*[k] s_hat[k+1], snapped to the constellation."""
    s_hat = np.asarray(s_hat, dtype=complex)
    if len(s_hat) < 2:
        raise ValueError("need at least two symbols to differentially decode")
    return c.points[c.nearest_index(s_hat[:-1].conj() * s_hat[1:])]


def bit_error_count(c: Constellation, idx_true, idx_hat) -> int:
    """Hamming distance between the Gray bit streams of two index vectors."""
    g = c.gray_codes[np.asarray(idx_true)] ^ c.gray_codes[np.asarray(idx_hat)]
    count = np.zeros_like(g)
    while np.any(g):
        count += g & 1
        g >>= 1
    return int(count.sum())
