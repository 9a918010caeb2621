"""Dual-hop amplify-and-forward transmission chain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fading import FadingProcess


def amp_factor(P0: float, P1: float, sigma2_1: float, N0: float) -> float:
    """Relay gain A = sqrt(P1 / (P0 sigma1^2 + N0)) normalizing relay power to P1."""
    if min(P0, P1, sigma2_1, N0) <= 0:
        raise ValueError("amp_factor requires positive arguments")
    return math.sqrt(P1 / (P0 * sigma2_1 + N0))


@dataclass(frozen=True)
class LinkConfig:
    """Powers, noise level, relay gain and modulation order of one link."""

    P0: float
    P1: float
    N0: float
    rho: float
    A: float
    M: int

    def __post_init__(self):
        if min(self.P0, self.P1, self.N0, self.A) <= 0:
            raise ValueError("powers, noise level and gain must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("power-allocation factor must lie in (0, 1)")
        if self.M < 2:
            raise ValueError("modulation order must be >= 2")

    @classmethod
    def from_total_power(cls, P: float, rho: float, sigma2_1: float,
                         N0: float = 1.0, M: int = 2) -> "LinkConfig":
        """Split total power P as P0 = rho P, P1 = (1 - rho) P with matched A."""
        P0 = rho * P
        P1 = (1.0 - rho) * P
        return cls(P0=P0, P1=P1, N0=N0, rho=rho,
                   A=amp_factor(P0, P1, sigma2_1, N0), M=M)

    @classmethod
    def from_snr_db(cls, snr_db: float, rho: float, sigma2_1: float,
                    N0: float = 1.0, M: int = 2) -> "LinkConfig":
        """P/N0 given in dB, P the total network power."""
        return cls.from_total_power(10.0 ** (snr_db / 10.0) * N0, rho, sigma2_1, N0, M)


@dataclass(frozen=True)
class Frame:
    """One simulated transmission with all intermediate signals retained."""

    s: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    x: np.ndarray
    y: np.ndarray
    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        n = len(self.s)
        for name in ("h1", "h2", "x", "y", "w1", "w2"):
            if len(getattr(self, name)) != n:
                raise ValueError("all frame vectors must share one length")

    def __len__(self) -> int:
        return len(self.s)


def _samples(h) -> np.ndarray:
    return h.samples if isinstance(h, FadingProcess) else np.asarray(h, dtype=complex)


def transmit(s, h1, h2, cfg: LinkConfig, noise_seed: int,
             noiseless: bool = False) -> Frame:
    """Run symbols through both hops.

    x[k] = sqrt(P0) h1[k] s[k] + w1[k] at the relay and
    y[k] = A h2[k] x[k] + w2[k] at the destination, with w1, w2 i.i.d.
    zero-mean complex Gaussian of variance N0 (zeroed when noiseless).
    """
    s = np.asarray(s, dtype=complex)
    h1 = _samples(h1)
    h2 = _samples(h2)
    if not len(s) == len(h1) == len(h2):
        raise ValueError("symbol and channel vectors must share one length")
    n = len(s)
    if noiseless:
        w1 = np.zeros(n, dtype=complex)
        w2 = np.zeros(n, dtype=complex)
    else:
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=int(noise_seed) & (2**64 - 1))))
        scale = math.sqrt(cfg.N0 / 2.0)
        w1 = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        w2 = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    x = math.sqrt(cfg.P0) * h1 * s + w1
    y = cfg.A * h2 * x + w2
    return Frame(s=s, h1=h1, h2=h2, x=x, y=y, w1=w1, w2=w2)
