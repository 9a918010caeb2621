"""Monte Carlo experiment runner: scenario presets, BER estimation with
confidence intervals, reproducible parallel execution."""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import ModulationAnalysisParams, cdd_error_floor
from .detectors import cdd_detect_block, coherent_detect_block, msd_detect_stream
from .fading import ChannelParams, cascaded_alpha, gen_jakes
from .link import LinkConfig, transmit
from .modem import Constellation, bit_error_count, diff_encode, map_bits_to_indices

CASE_DOPPLER = {"I": (0.001, 0.001), "II": (0.01, 0.001), "III": (0.02, 0.01)}

WORKERS_ENV = "DIFFRELAY_WORKERS"

_FRAME_CHUNK = 8


@dataclass(frozen=True)
class Scenario:
    """One named simulation setup."""

    name: str
    ch: ChannelParams
    rho: float
    M: int
    fading_case: str | None = None
    detector: str = "cdd"
    msd_window: int | None = None

    def __post_init__(self):
        if self.detector not in ("cdd", "msd", "coherent"):
            raise ValueError("detector must be cdd, msd or coherent")
        if self.detector == "msd" and (self.msd_window is None or self.msd_window < 2):
            raise ValueError("msd detector needs a window length >= 2")
        if self.fading_case is not None:
            expect = CASE_DOPPLER.get(self.fading_case)
            if expect is None:
                raise ValueError("fading_case must be one of I, II, III")
            if (self.ch.f1, self.ch.f2) != expect:
                raise ValueError(f"case {self.fading_case} requires Doppler pair {expect}")

    @classmethod
    def from_case(cls, case: str, sigma2_1: float = 1.0, sigma2_2: float = 1.0,
                  rho: float = 0.3, M: int = 2, detector: str = "cdd",
                  msd_window: int | None = None, name: str | None = None) -> "Scenario":
        f1, f2 = CASE_DOPPLER[case]
        ch = ChannelParams(sigma2_1=sigma2_1, sigma2_2=sigma2_2, f1=f1, f2=f2)
        return cls(name=name or f"case-{case}-{detector}", ch=ch, rho=rho, M=M,
                   fading_case=case, detector=detector, msd_window=msd_window)


@dataclass(frozen=True)
class StoppingRule:
    """Stop a point at the earlier of max_bits and (min_errors AND min_bits)."""

    min_errors: int = 100
    min_bits: int = 100_000
    max_bits: int = 100_000_000


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    ber: float
    errors: int
    trials: int
    ci_low: float
    ci_high: float
    source: str = "simulation"

    def __post_init__(self):
        if self.errors > self.trials:
            raise ValueError("errors cannot exceed trials")
        if not self.ci_low <= self.ber <= self.ci_high:
            raise ValueError("confidence interval must bracket the estimate")


def wilson_interval(errors: int, trials: int, n_eff: float | None = None,
                    z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval.

    n_eff, when given, replaces the raw trial count to account for
    clustered (bursty) errors; the point estimate stays errors/trials.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    n = float(n_eff) if n_eff is not None else float(trials)
    n = min(max(n, 1.0), float(trials))
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = z * np.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return min(os.cpu_count() or 1, 4)


def _frame_seeds(master_seed: int, snr_key: int, frame_idx: int) -> np.ndarray:
    """Counter-based substreams: three 64-bit seeds per (point, frame)."""
    ss = np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1),
                                spawn_key=(snr_key, frame_idx))
    return ss.generate_state(3, dtype=np.uint64)


def _simulate_frame(sc: Scenario, cfg: LinkConfig, snr_key: int, frame_idx: int,
                    master_seed: int, frame_len: int, noiseless: bool) -> tuple[int, int]:
    """One channel-realization frame; returns (bit errors, bits)."""
    c = Constellation(sc.M)
    channel_seed, noise_seed, bits_seed = (int(x) for x in
                                           _frame_seeds(master_seed, snr_key, frame_idx))
    bits_rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(bits_seed)))
    bits = bits_rng.integers(0, 2, frame_len * c.bits_per_symbol)
    v_idx = map_bits_to_indices(bits, c)
    s = diff_encode(c.points[v_idx])
    h1 = gen_jakes(sc.ch, 1, len(s), channel_seed)
    h2 = gen_jakes(sc.ch, 2, len(s), channel_seed)
    frame = transmit(s, h1, h2, cfg, noise_seed, noiseless=noiseless)
    if sc.detector == "cdd":
        vhat_idx = cdd_detect_block(frame.y, c)
    elif sc.detector == "coherent":
        u_idx = coherent_detect_block(frame.y[1:], frame.h1[1:] * frame.h2[1:], c)
        s_idx = np.concatenate([[0], np.cumsum(v_idx) % sc.M])
        vhat_idx = (u_idx - s_idx[:-1]) % sc.M
    else:
        vhat = msd_detect_stream(frame.y, sc.msd_window, cfg, sc.ch, c)
        vhat_idx = c.nearest_index(vhat)
    return bit_error_count(c, v_idx, vhat_idx), frame_len * c.bits_per_symbol


def _simulate_chunk(sc, cfg, snr_key, frame_indices, master_seed, frame_len, noiseless):
    return [_simulate_frame(sc, cfg, snr_key, fi, master_seed, frame_len, noiseless)
            for fi in frame_indices]


def _chunk_stream(sc, cfg, snr_key, master_seed, frame_len, noiseless, workers):
    """Yield per-frame (errors, bits) chunks in frame-index order, forever."""
    start = 0
    if workers <= 1:
        while True:
            idx = list(range(start, start + _FRAME_CHUNK))
            start += _FRAME_CHUNK
            yield _simulate_chunk(sc, cfg, snr_key, idx, master_seed, frame_len, noiseless)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            pending: deque = deque()
            while True:
                while len(pending) <= workers:
                    idx = list(range(start, start + _FRAME_CHUNK))
                    start += _FRAME_CHUNK
                    pending.append(ex.submit(_simulate_chunk, sc, cfg, snr_key, idx,
                                             master_seed, frame_len, noiseless))
                yield pending.popleft().result()


def _run_point(sc: Scenario, snr_db: float, stop: StoppingRule, master_seed: int,
               workers: int, frame_len: int, noiseless: bool) -> BerPoint:
    cfg = LinkConfig.from_snr_db(snr_db, sc.rho, sc.ch.sigma2_1, M=sc.M)
    snr_key = int(round(float(snr_db) * 1000)) % 2**32
    errors = bits = frames = 0
    sum_e2 = sum_eb = sum_b2 = 0.0
    done = False
    stream = _chunk_stream(sc, cfg, snr_key, master_seed, frame_len, noiseless, workers)
    for chunk in stream:
        for e, b in chunk:
            errors += e
            bits += b
            frames += 1
            sum_e2 += float(e) * e
            sum_eb += float(e) * b
            sum_b2 += float(b) * b
            if bits >= stop.max_bits or (errors >= stop.min_errors
                                         and bits >= stop.min_bits):
                done = True
                break
        if done:
            break
    stream.close()
    ber = errors / bits
    n_eff = None
    if errors > 0 and frames > 1:
        # cluster-robust variance over frames: errors arrive in fade bursts,
        # so the bit-level binomial variance understates the uncertainty
        resid = sum_e2 - 2.0 * ber * sum_eb + ber * ber * sum_b2
        var = resid * frames / (frames - 1) / (bits * bits)
        if var > 0:
            n_eff = ber * (1.0 - ber) / var
    lo, hi = wilson_interval(errors, bits, n_eff)
    return BerPoint(snr_db=float(snr_db), ber=ber, errors=errors, trials=bits,
                    ci_low=lo, ci_high=hi, source="simulation")


def run_ber(sc: Scenario, snr_grid, stop: StoppingRule | None = None,
            seed: int = 0, workers: int | None = None, frame_len: int = 1000,
            noiseless: bool = False) -> list[BerPoint]:
    """Simulate the scenario across an SNR grid (P/N0 in dB, P total power).

    Frames of frame_len symbols are drawn until the stopping rule is met;
    every frame's channel, noise and data substreams derive from
    (seed, snr point, frame index), so results are bit-identical for any
    worker count.
    """
    if len(list(snr_grid)) == 0:
        raise ValueError("snr grid must be non-empty")
    stop = stop if stop is not None else StoppingRule()
    workers = resolve_workers(workers)
    return [_run_point(sc, float(snr_db), stop, seed, workers, frame_len, noiseless)
            for snr_db in snr_grid]


@dataclass(frozen=True)
class FloorPoint:
    f: float
    mode: str
    floor_theory: float
    point: BerPoint


def error_floor_sweep(f_grid, mode: str, M: int, seed: int = 0,
                      snr_db: float = 60.0, rho: float = 0.3,
                      stop: StoppingRule | None = None,
                      workers: int | None = None) -> list[FloorPoint]:
    """Theory floor and a high-power simulated BER across fading rates.

    mode "both" sweeps f1 = f2 = f; mode "f1-only" sweeps f1 with
    f2 = 0.001, matching the two graphs of the floor-vs-rate figure.
    """
    if mode not in ("both", "f1-only"):
        raise ValueError("mode must be 'both' or 'f1-only'")
    p = ModulationAnalysisParams.for_order(M)
    out = []
    for f in f_grid:
        f = float(f)
        if not 0.0005 <= f <= 0.1:
            raise ValueError("fading rates must lie in [0.0005, 0.1]")
        ch = ChannelParams(1.0, 1.0, f1=f, f2=(f if mode == "both" else 0.001))
        sc = Scenario(name=f"floor-{mode}-{f}", ch=ch, rho=rho, M=M, detector="cdd")
        floor = cdd_error_floor(cascaded_alpha(ch), p)
        point = run_ber(sc, [snr_db], stop=stop, seed=seed, workers=workers)[0]
        out.append(FloorPoint(f=f, mode=mode, floor_theory=floor, point=point))
    return out
