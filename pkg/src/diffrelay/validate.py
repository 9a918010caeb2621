"""Acceptance-criteria suite shared by the CLI `validate` command and the
test suite: one callable per criterion, each returning a pass/fail record
with the measured numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import (ModulationAnalysisParams, PepConfig, cdd_ber,
                       cdd_error_floor, msd_ber, msd_pep, dominant_error_pair,
                       optimize_power)
from .detectors import msd_build, msd_exhaustive, msd_metric, msd_sphere
from .fading import ChannelParams, cascaded_alpha, empirical_autocorr, gen_jakes
from .harness import (CASE_DOPPLER, Scenario, StoppingRule, error_floor_sweep,
                      run_ber)
from .link import LinkConfig
from .modem import Constellation
from .numerics import bessel_j0, exp_integral_e1, theta_rule

MASTER_SEED = 20260810

_memo: dict = {}


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.name} -- {self.detail}"


def _ratio_ok(a: float, b: float, factor: float) -> bool:
    return b / factor <= a <= b * factor


def _mods(M: int) -> ModulationAnalysisParams:
    return ModulationAnalysisParams.for_order(M)


def _case_channel(case: str, s1=1.0, s2=1.0) -> ChannelParams:
    f1, f2 = CASE_DOPPLER[case]
    return ChannelParams(s1, s2, f1, f2)


def _cfg(snr_db: float, rho: float, s1: float, M: int) -> LinkConfig:
    return LinkConfig.from_snr_db(snr_db, rho, s1, M=M)


def criterion_1(workers=None) -> CriterionResult:
    """Error-floor values for Cases II/III plus 60 dB simulation agreement."""
    p = _mods(2)
    checks = []
    details = []
    for case, paper_value in (("II", 5e-4), ("III", 3e-3)):
        ch = _case_channel(case)
        floor = cdd_error_floor(cascaded_alpha(ch), p)
        checks.append(_ratio_ok(floor, paper_value, 1.5))
        sc = Scenario.from_case(case, rho=0.3, M=2)
        pt = run_ber(sc, [60.0], stop=StoppingRule(min_errors=400),
                     seed=MASTER_SEED, workers=workers)[0]
        checks.append(_ratio_ok(pt.ber, floor, 1.5))
        details.append(f"case {case}: floor={floor:.3e} (paper {paper_value:.0e}), "
                       f"sim60={pt.ber:.3e}")
    return CriterionResult(1, "error-floor values", all(checks), "; ".join(details))


def criterion_2(workers=None) -> CriterionResult:
    """Floor-vs-fading-rate curves: agreement, monotonicity, mode ordering."""
    grid = [0.001, 0.002, 0.005, 0.01, 0.02]
    # 60 dB is not fully asymptotic at the slowest rates (the f1-only
    # f=0.002 point sits at 1.44x its floor in theory), so the agreement
    # check needs the sampling noise well under the remaining headroom.
    stop = StoppingRule(min_errors=600)
    sweeps = {mode: error_floor_sweep(grid, mode, M=2, seed=MASTER_SEED,
                                      stop=stop, workers=workers)
              for mode in ("both", "f1-only")}
    ok = True
    details = []
    for mode, sweep in sweeps.items():
        floors = [fp.floor_theory for fp in sweep]
        sims = [fp.point.ber for fp in sweep]
        if np.any(np.diff(floors) <= 0) or np.any(np.diff(sims) <= 0):
            ok = False
        for fp in sweep:
            if fp.floor_theory >= 1e-5 and not _ratio_ok(fp.point.ber,
                                                         fp.floor_theory, 1.5):
                ok = False
        details.append(f"{mode}: " + " ".join(
            f"{fp.f:g}:{fp.point.ber:.2e}/{fp.floor_theory:.2e}" for fp in sweep))
    for fb, fo in zip(sweeps["both"], sweeps["f1-only"]):
        if fb.f > 0.001 and not fb.floor_theory > fo.floor_theory:
            ok = False
    return CriterionResult(2, "floor vs fading rate", ok, "; ".join(details))


def criterion_3(workers=None) -> CriterionResult:
    """Power allocation optima against the reported table."""
    p = _mods(4)
    targets = {(1.0, 1.0): 0.30, (10.0, 1.0): 0.12, (1.0, 10.0): 0.54}
    ok = True
    details = []
    for (s1, s2), target in targets.items():
        ch = ChannelParams(s1, s2, 0.001, 0.001)
        rho = optimize_power(35.0, ch, p)
        ok &= abs(rho - target) <= 0.05
        details.append(f"[{s1:g},{s2:g}]: rho_opt={rho:.2f} (target {target:.2f})")
    return CriterionResult(3, "power allocation", ok, "; ".join(details))


_AGREEMENT_CONFIGS = (
    ("I", 2, (1.0, 1.0), 0.30, (20.0, 25.0, 30.0)),
    ("II", 2, (1.0, 10.0), 0.54, (20.0, 25.0, 30.0)),
    ("III", 4, (1.0, 1.0), 0.30, (20.0, 25.0, 30.0)),
    ("I", 4, (10.0, 1.0), 0.12, (20.0, 25.0, 30.0)),
)


def criterion_4(workers=None) -> CriterionResult:
    """Simulated CDD BER within the 95% CI of the closed-form value."""
    ok = True
    details = []
    for case, M, (s1, s2), rho, snrs in _AGREEMENT_CONFIGS:
        p = _mods(M)
        ch = _case_channel(case, s1, s2)
        sc = Scenario.from_case(case, s1, s2, rho=rho, M=M)
        pts = run_ber(sc, snrs, stop=StoppingRule(min_errors=1000, min_bits=200_000),
                      seed=MASTER_SEED, workers=workers)
        for pt in pts:
            th = cdd_ber(_cfg(pt.snr_db, rho, s1, M), ch, p)
            if th < 1e-4:
                raise AssertionError("agreement point below the BER floor of the test")
            inside = pt.ci_low <= th <= pt.ci_high
            ok &= inside
            details.append(f"{case}/M{M}/{pt.snr_db:g}dB: sim={pt.ber:.3e} "
                           f"th={th:.3e} {'in' if inside else 'OUT'}")
    return CriterionResult(4, "theory-simulation agreement", ok, "; ".join(details))


def criterion_5(workers=None) -> CriterionResult:
    """SNR gap between CDD and the genie-coherent baseline at BER 1e-3."""
    p = _mods(2)
    ch = _case_channel("I")
    target = 1e-3

    def cdd_theory(snr):
        return cdd_ber(_cfg(snr, 0.3, 1.0, 2), ch, p)

    lo, hi = 20.0, 55.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if cdd_theory(mid) > target:
            lo = mid
        else:
            hi = mid
    snr_cdd = 0.5 * (lo + hi)

    # Genie-coherent detection is memoryless in the channel, so short frames
    # multiply the number of independent fade draws per simulated bit; fade
    # clustering otherwise dominates the crossing-point uncertainty.
    sc = Scenario.from_case("I", rho=0.3, M=2, detector="coherent")
    grid = [33.0, 35.0, 37.0, 39.0]
    pts = run_ber(sc, grid, stop=StoppingRule(min_errors=3000, min_bits=5_000_000),
                  seed=MASTER_SEED, workers=workers, frame_len=100)
    lb = np.log10([pt.ber for pt in pts])
    snr_coh = float(np.interp(math.log10(target), lb[::-1], np.array(grid)[::-1]))
    gap = snr_cdd - snr_coh
    ok = abs(gap - 3.0) <= 0.7
    return CriterionResult(5, "3 dB noncoherent gap", ok,
                           f"CDD@1e-3={snr_cdd:.2f} dB, coherent@1e-3={snr_coh:.2f} dB, "
                           f"gap={gap:.2f} dB (want 3.0 +/- 0.7)")


def _msd_case3_run(workers):
    key = ("msd3", workers)
    if key not in _memo:
        sc = Scenario.from_case("III", rho=0.3, M=2, detector="msd", msd_window=10)
        _memo[key] = run_ber(sc, [30.0, 35.0, 40.0],
                             stop=StoppingRule(min_errors=800),
                             seed=MASTER_SEED, workers=workers)
    return _memo[key]


def criterion_6(workers=None) -> CriterionResult:
    """MSD at 40 dB: >= 5x below the Case III floor, within 3x of Case I CDD."""
    p = _mods(2)
    floor3 = cdd_error_floor(cascaded_alpha(_case_channel("III")), p)
    case1 = cdd_ber(_cfg(40.0, 0.3, 1.0, 2), _case_channel("I"), p)
    pt = _msd_case3_run(workers)[-1]
    below = floor3 / pt.ber
    ratio1 = pt.ber / case1
    ok = below >= 5.0 and (1.0 / 3.0) <= ratio1 <= 3.0
    return CriterionResult(6, "MSD restores fast-fading performance", ok,
                           f"msd40={pt.ber:.3e}, floorIII={floor3:.3e} "
                           f"({below:.2f}x below, want >=5x), caseI cdd={case1:.3e} "
                           f"(ratio {ratio1:.2f}, want within 3x)")


def criterion_7(workers=None) -> CriterionResult:
    """Union bound within a factor 2 of simulated MSD BER at high SNR."""
    pts = _msd_case3_run(workers)[-2:]
    ch = _case_channel("III")
    ok = True
    details = []
    for pt in pts:
        bound = msd_ber(10, 2, _cfg(pt.snr_db, 0.3, 1.0, 2), ch)
        ok &= _ratio_ok(bound, pt.ber, 2.0)
        details.append(f"{pt.snr_db:g}dB: bound={bound:.3e} sim={pt.ber:.3e} "
                       f"ratio={bound / pt.ber:.2f}")
    return CriterionResult(7, "MSD union bound", ok, "; ".join(details))


def criterion_8(workers=None) -> CriterionResult:
    """Sphere decoder metric equals the exhaustive minimum on random windows."""
    rng = np.random.default_rng(MASTER_SEED)
    worst = 0.0
    trials = 0
    for N in (2, 3, 4):
        for M in (2, 4):
            c = Constellation(M)
            for _ in range(1000):
                snr = float(rng.uniform(0.0, 40.0))
                rho = float(rng.uniform(0.1, 0.9))
                f1, f2 = rng.uniform(0.0, 0.05, 2)
                ch = ChannelParams(float(rng.uniform(0.5, 10)),
                                   float(rng.uniform(0.5, 10)),
                                   float(f1), float(f2))
                cfg = LinkConfig.from_snr_db(snr, rho, ch.sigma2_1, M=M)
                y = rng.standard_normal(N) + 1j * rng.standard_normal(N)
                w = msd_build(y * rng.exponential(1.0), cfg, ch)
                d_sph = msd_metric(w, msd_sphere(w, c))
                d_exh = msd_metric(w, msd_exhaustive(w, c))
                worst = max(worst, abs(d_sph - d_exh))
                trials += 1
    ok = worst <= 1e-9
    return CriterionResult(8, "sphere-decoder exactness", ok,
                           f"{trials} windows, worst metric gap {worst:.2e}")


def criterion_9(workers=None) -> CriterionResult:
    """Channel generator statistics: autocorrelation RMS and cascaded variance."""
    ok = True
    details = []
    for f, seed in ((0.001, 11), (0.01, 12), (0.02, 13), (0.05, 14)):
        ch = ChannelParams(1.0, 1.0, f, f)
        h = gen_jakes(ch, 1, 100_000, seed).samples
        lags = np.arange(101)
        emp = empirical_autocorr(h, 100)
        theory = np.array([bessel_j0(2 * np.pi * f * n) for n in lags])
        rms = float(np.sqrt(np.mean(np.abs(emp - theory) ** 2)))
        ok &= rms <= 0.02
        details.append(f"f={f:g}: rms={rms:.4f}")
    ch = ChannelParams(2.0, 5.0, 0.02, 0.01)
    h1 = gen_jakes(ch, 1, 100_000, 21).samples
    h2 = gen_jakes(ch, 2, 100_000, 21).samples
    var = float(np.mean(np.abs(h1 * h2) ** 2))
    ok &= abs(var - 10.0) <= 0.05 * 10.0
    details.append(f"cascaded var={var:.3f} (want 10 +/- 5%)")
    return CriterionResult(9, "channel statistics", ok, "; ".join(details))


def criterion_10(workers=None) -> CriterionResult:
    """Special functions, quadrature stability, characteristic function, PEP series."""
    checks = []
    checks.append(abs(bessel_j0(0.0) - 1.0) < 1e-15)
    checks.append(abs(bessel_j0(2.404825557695773)) <= 1e-10)
    checks.append(abs(bessel_j0(2 * np.pi * 0.001) - 0.9999901304199511) < 1e-12)
    checks.append(abs(exp_integral_e1(1.0) - 0.21938393439552027) < 1e-10)
    checks.append(abs(exp_integral_e1(0.5) - 0.5597735947761607) < 1e-10)

    p = _mods(2)
    ch = _case_channel("III")
    cfg = _cfg(30.0, 0.3, 1.0, 2)
    b201 = cdd_ber(cfg, ch, p, rule=theta_rule(201))  # embeds the doubling check
    b402 = cdd_ber(cfg, ch, p, rule=theta_rule(402))
    checks.append(abs(b402 - b201) <= 1e-8 * abs(b402))
    alpha = cascaded_alpha(ch)
    f201 = cdd_error_floor(alpha, p, rule=theta_rule(201))
    f402 = cdd_error_floor(alpha, p, rule=theta_rule(402))
    checks.append(abs(f402 - f201) <= 1e-8 * abs(f402))

    from .analysis import _char_fn
    from .detectors import build_msd_matrices
    _, _, C, _ = build_msd_matrices(4, cfg, ch)
    checks.append(abs(_char_fn(0.0, C) - 1.0) < 1e-12)

    s, s_hat = dominant_error_pair(10, 2)
    p64 = msd_pep(s, s_hat, cfg, ch, PepConfig(q=64))
    p128 = msd_pep(s, s_hat, cfg, ch, PepConfig(q=128))
    checks.append(abs(p64 - p128) <= 0.005 * p128)
    return CriterionResult(10, "numerics suite", all(checks),
                           f"{sum(checks)}/{len(checks)} checks passed "
                           f"(pep q64={p64:.6e} q128={p128:.6e})")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(numbers=None, workers=None, stream=None) -> list[CriterionResult]:
    wanted = set(numbers) if numbers else set(range(1, len(CRITERIA) + 1))
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        if i not in wanted:
            continue
        res = fn(workers=workers)
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    return results
