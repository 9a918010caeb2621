"""Time-correlated Rayleigh channel generation and autocorrelation laws.

Two generators are provided: a sum-of-sinusoids simulator whose empirical
autocorrelation tracks the Jakes law sigma^2 * J0(2 pi f n), and a
first-order autoregressive model matched to the lag-1 autocorrelation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import lfilter

from .numerics import bessel_j0


@dataclass(frozen=True)
class ChannelParams:
    """Variances and normalized Doppler rates of the two hops."""

    sigma2_1: float
    sigma2_2: float
    f1: float
    f2: float

    def __post_init__(self):
        if self.sigma2_1 <= 0 or self.sigma2_2 <= 0:
            raise ValueError("channel variances must be positive")
        for f in (self.f1, self.f2):
            if not 0.0 <= f < 0.5:
                raise ValueError("normalized Doppler must lie in [0, 0.5)")

    def hop(self, which: int) -> tuple[float, float]:
        if which == 1:
            return self.sigma2_1, self.f1
        if which == 2:
            return self.sigma2_2, self.f2
        raise ValueError("hop must be 1 or 2")


def autocorr(params: ChannelParams, hop: int, lag: int) -> float:
    """phi_i(n) = sigma_i^2 * J0(2 pi f_i n)."""
    if lag < 0:
        raise ValueError("lag must be >= 0")
    sigma2, f = params.hop(hop)
    return sigma2 * bessel_j0(2.0 * np.pi * f * lag)


def cascaded_alpha(params: ChannelParams, lag: int = 1) -> float:
    """Normalized autocorrelation of the cascaded channel at the given lag.

    Product of the per-hop normalized autocorrelations J0(2 pi f_i lag).
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    return (bessel_j0(2.0 * np.pi * params.f1 * lag)
            * bessel_j0(2.0 * np.pi * params.f2 * lag))


def cascaded_covariance(params: ChannelParams, n: int) -> np.ndarray:
    """Toeplitz covariance of the cascaded channel, entries phi1(k) phi2(k)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    col = np.array([autocorr(params, 1, k) * autocorr(params, 2, k)
                    for k in range(n)])
    return toeplitz(col)


@dataclass(frozen=True)
class FadingProcess:
    """One realization of a complex fading process."""

    samples: np.ndarray
    params: ChannelParams
    which: int
    generator: str

    def __len__(self) -> int:
        return len(self.samples)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "re", "im"])
            for k, h in enumerate(self.samples):
                w.writerow([k, repr(float(h.real)), repr(float(h.imag))])


def _phasor_count(f: float) -> int:
    # Fewer phasors at slow rates: the record then time-averages the
    # oscillator cross terms fast enough to meet the 2% autocorrelation
    # budget at 1e5 samples.  More phasors at fast rates keep the discrete
    # Doppler spectrum dense enough out to lag 100.
    if f < 0.002:
        return 16
    if f < 0.04:
        return 32
    return 64


@lru_cache(maxsize=32)
def _doppler_cells(count: int, offset: float) -> tuple[np.ndarray, np.ndarray]:
    """Partition of the normalized Doppler band (-1, 1) into spectral cells.

    Cell boundaries are uniform with a fractional-step offset: the asymmetry
    keeps any two cells from mirroring each other exactly (which would lock
    oscillator pairs into non-decaying beat terms), and the two hops use
    different offsets so their frequency sets never coincide.  Each cell
    contributes one phasor at the power centroid of the Jakes spectral
    density, weighted by the cell mass.
    """
    step = 2.0 / count
    inner = -1.0 + (np.arange(count) + offset) * step
    bounds = np.concatenate([[-1.0], inner[(inner > -1.0 + 1e-12)
                                           & (inner < 1.0 - 1e-12)], [1.0]])
    a, b = bounds[:-1], bounds[1:]
    mass = (np.arcsin(b) - np.arcsin(a)) / np.pi
    centroid = (np.sqrt(1.0 - a * a) - np.sqrt(1.0 - b * b)) / (np.arcsin(b) - np.arcsin(a))
    return centroid, mass


def _hop_rng(seed: int, hop: int, stream: int) -> np.random.Generator:
    # Counter-based substreams: (seed, hop, stream) fully determines output.
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=(hop, stream))
    return np.random.Generator(np.random.Philox(ss))


def gen_jakes(params: ChannelParams, hop: int, length: int, seed: int) -> FadingProcess:
    """Sum-of-sinusoids realization with Jakes autocorrelation.

    The process is a sum of complex phasors with deterministic amplitudes
    (one per spectral cell of the Jakes Doppler density) and i.i.d. uniform
    phases, so a single record's mean power and autocorrelation converge to
    sigma^2 and sigma^2 J0(2 pi f n) without ensemble averaging.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    sigma2, f = params.hop(hop)
    rng = _hop_rng(seed, hop, 0)
    if f == 0.0:
        phases = rng.uniform(-np.pi, np.pi, _phasor_count(0.002))
        const = np.sqrt(sigma2 / len(phases)) * np.exp(1j * phases).sum()
        samples = np.full(length, const, dtype=complex)
        return FadingProcess(samples, params, hop, "jakes-sos")
    centroid, mass = _doppler_cells(_phasor_count(f), 0.75 if hop == 1 else 0.25)
    w = 2.0 * np.pi * f * centroid
    phases = rng.uniform(-np.pi, np.pi, len(w))
    k = np.arange(length)[:, None]
    samples = np.sqrt(sigma2) * (
        np.sqrt(mass)[None, :] * np.exp(1j * (w[None, :] * k + phases[None, :]))
    ).sum(axis=1)
    return FadingProcess(samples, params, hop, "jakes-sos")


def gen_ar1(params: ChannelParams, hop: int, length: int, seed: int) -> FadingProcess:
    """AR(1) realization: h[k] = a h[k-1] + sqrt(1-a^2) e[k], a = J0(2 pi f)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    sigma2, f = params.hop(hop)
    rng = _hop_rng(seed, hop, 1)
    a = bessel_j0(2.0 * np.pi * f)
    scale = np.sqrt(sigma2 / 2.0)
    h0 = scale * complex(rng.standard_normal(), rng.standard_normal())
    e = scale * (rng.standard_normal(length - 1) + 1j * rng.standard_normal(length - 1)) \
        if length > 1 else np.empty(0, dtype=complex)
    if length == 1:
        samples = np.array([h0])
    else:
        # stationary start h0, then the recursion driven by innovations e
        driven = lfilter([np.sqrt(1.0 - a * a)], [1.0, -a], e, zi=np.array([a * h0]))[0]
        samples = np.concatenate([[h0], driven])
    return FadingProcess(samples, params, hop, "ar1")


def empirical_autocorr(h: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased-normalization sample autocorrelation at lags 0..max_lag."""
    h = np.asarray(h)
    n = len(h)
    if max_lag >= n:
        raise ValueError("max_lag must be below the sample count")
    return np.array([np.mean(h[: n - m].conj() * h[m:]) for m in range(max_lag + 1)])
