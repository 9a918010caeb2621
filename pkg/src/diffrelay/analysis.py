"""Closed-form performance: exact CDD BER, error floor, MSD pairwise error
probability with union bound, and power-allocation optimization."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .detectors import build_msd_matrices
from .fading import ChannelParams, cascaded_alpha
from .link import LinkConfig
from .numerics import QuadratureRule, exp_scaled_e1, theta_rule

log = logging.getLogger(__name__)


class QuadratureConvergenceError(RuntimeError):
    """Order doubling moved the integral by more than the budget."""


@dataclass(frozen=True)
class ModulationAnalysisParams:
    """Unified-approach constants (a, b) of the conditional BER integrand."""

    M: int
    a: float
    b: float

    @classmethod
    def for_order(cls, M: int) -> "ModulationAnalysisParams":
        if M == 2:
            return cls(M=2, a=0.0, b=math.sqrt(2.0))
        if M == 4:
            return cls(M=4, a=math.sqrt(2.0 - math.sqrt(2.0)),
                       b=math.sqrt(2.0 + math.sqrt(2.0)))
        raise ValueError("analysis constants are defined for M in {2, 4}")

    @property
    def beta(self) -> float:
        return self.a / self.b


def g_theta(theta, p: ModulationAnalysisParams):
    """g = (1 - beta^2) / (1 + 2 beta sin(theta) + beta^2)."""
    beta = p.beta
    return (1.0 - beta * beta) / (1.0 + 2.0 * beta * np.sin(theta) + beta * beta)


def q_theta(theta, p: ModulationAnalysisParams):
    """q = (b^2 / log2 M) (1 + 2 beta sin(theta) + beta^2)."""
    beta = p.beta
    return (p.b * p.b / math.log2(p.M)) * (1.0 + 2.0 * beta * np.sin(theta) + beta * beta)


class EffectiveSnrModel:
    """Effective post-detector SNR of two-symbol detection on a time-varying
    cascaded channel: gamma = gamma_bar(|h2|^2) |h1|^2, plus the b1/b2/b3
    shorthands that arise when averaging the conditional BER over |h1|^2."""

    def __init__(self, alpha: float, cfg: LinkConfig, ch: ChannelParams):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        self.alpha = alpha
        self.cfg = cfg
        self.ch = ch
        self.rho1 = cfg.P0 * ch.sigma2_1 / cfg.N0
        a2 = alpha * alpha
        A2 = cfg.A * cfg.A
        self.b1 = (1.0 + a2) / ((1.0 + a2) * A2 + (1.0 - a2) * A2 * self.rho1)

    def gamma_bar(self, lambda2):
        """Mean effective SNR conditioned on |h2|^2 = lambda2."""
        a2 = self.alpha ** 2
        A2 = self.cfg.A ** 2
        p0n0 = self.cfg.P0 / self.cfg.N0
        num = a2 * A2 * p0n0 * np.asarray(lambda2, dtype=float)
        den = 1.0 + a2 + (1.0 + a2 + (1.0 - a2) * self.rho1) * A2 * np.asarray(lambda2, dtype=float)
        return num / den

    def b2(self, theta, p: ModulationAnalysisParams):
        a2 = self.alpha ** 2
        A2 = self.cfg.A ** 2
        q = q_theta(theta, p)
        return (1.0 + a2) / ((1.0 + a2) / self.b1 + a2 * q * A2 * self.rho1)

    def b3(self, theta, p: ModulationAnalysisParams):
        return self.b2(theta, p) / self.b1


def _cdd_ber_integrand(model: EffectiveSnrModel, p: ModulationAnalysisParams,
                       sigma2_2: float):
    def integrand(theta):
        b1 = model.b1
        b2 = model.b2(theta, p)
        x = b2 / sigma2_2
        avg = b2 / b1 * (1.0 + (b1 - b2) / sigma2_2 * exp_scaled_e1(x))
        return g_theta(theta, p) * avg
    return integrand


def _integrate_with_doubling(integrand, rule: QuadratureRule) -> float:
    coarse = np.dot(rule.weights, integrand(rule.nodes)) / (4.0 * np.pi)
    fine_rule = theta_rule(2 * rule.order)
    fine = np.dot(fine_rule.weights, integrand(fine_rule.nodes)) / (4.0 * np.pi)
    if abs(fine - coarse) > 1e-8 * abs(fine):
        raise QuadratureConvergenceError(
            f"order {rule.order} -> {2 * rule.order} moved the BER integral "
            f"from {coarse!r} to {fine!r}")
    return float(fine)


def cdd_ber_given_alpha(alpha: float, cfg: LinkConfig, ch: ChannelParams,
                        p: ModulationAnalysisParams,
                        rule: QuadratureRule | None = None) -> float:
    """Average BER of two-symbol detection for a fixed cascaded
    autocorrelation alpha (alpha = 1 recovers the slow-fading curve)."""
    model = EffectiveSnrModel(alpha, cfg, ch)
    rule = rule if rule is not None else theta_rule()
    return _integrate_with_doubling(
        _cdd_ber_integrand(model, p, ch.sigma2_2), rule)


def cdd_ber(cfg: LinkConfig, ch: ChannelParams, p: ModulationAnalysisParams,
            lag: int = 1, rule: QuadratureRule | None = None) -> float:
    """Exact BER of two-symbol differential detection (theta integral of the
    fading-averaged conditional BER); result lies in (0, 0.5]."""
    return cdd_ber_given_alpha(cascaded_alpha(ch, lag), cfg, ch, p, rule)


def cdd_error_floor(alpha: float, p: ModulationAnalysisParams,
                    rule: QuadratureRule | None = None) -> float:
    """High-power BER limit; depends only on alpha and the modulation."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if alpha == 1.0:
        return 0.0
    a2 = alpha * alpha
    rule = rule if rule is not None else theta_rule()

    def integrand(theta):
        q = q_theta(theta, p)
        return g_theta(theta, p) * (1.0 - a2) / (a2 * q + 1.0 - a2)

    return float(np.dot(rule.weights, integrand(rule.nodes)) / (4.0 * np.pi))


@dataclass(frozen=True)
class PepConfig:
    """Series order and contour constant of the PEP inversion."""

    q: int = 64
    c: float | None = None
    tau: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.q < 2 or self.q % 2:
            raise ValueError("series order q must be even and >= 2")
        if self.c is not None and self.c <= 0:
            raise ValueError("contour constant must be positive")
        k = np.arange(1, self.q // 2 + 1)
        object.__setattr__(self, "tau", np.tan((2 * k - 1) * np.pi / (2 * self.q)))


def pep_contour_constant(Sigma_y_bar: np.ndarray, Q: np.ndarray) -> float:
    """Half the smallest positive real part among the poles -1/lambda_i of
    the quadratic form's characteristic function."""
    lam = np.linalg.eigvals(Sigma_y_bar @ Q)
    lam = lam[np.abs(lam) > 1e-14]
    poles = (-1.0 / lam).real
    positive = poles[poles > 1e-14]
    if len(positive) == 0:
        raise ValueError("no pole with positive real part: "
                         "invalid error-event inputs")
    return 0.5 * float(positive.min())


def _char_fn(t: complex, SQ: np.ndarray) -> complex:
    return 1.0 / np.linalg.det(np.eye(SQ.shape[0]) + t * SQ)


def msd_pep(s, s_hat, cfg: LinkConfig, ch: ChannelParams,
            pc: PepConfig | None = None) -> float:
    """Pairwise error probability P(s -> s_hat) of the window metric.

    The metric difference is the Hermitian quadratic form
    Delta = y^H [diag(s_hat) C^-1 diag(s_hat*) - diag(s) C^-1 diag(s*)] y
    with y treated as zero-mean Gaussian of covariance diag(s) C diag(s*);
    P(Delta <= 0) comes from the Gauss-Chebyshev inversion of the
    characteristic function 1/det(I + t Sigma Q) along Re(t) = c.
    """
    pc = pc if pc is not None else PepConfig()
    s = np.asarray(s, dtype=complex)
    s_hat = np.asarray(s_hat, dtype=complex)
    if s.shape != s_hat.shape or np.allclose(s, s_hat):
        raise ValueError("s and s_hat must be distinct, equal-length vectors")
    n = len(s)
    _, _, C, L = build_msd_matrices(n, cfg, ch)
    Cinv = L @ L.conj().T
    Sigma_y_bar = (s[:, None] * C) * s.conj()[None, :]
    Q = (s_hat[:, None] * Cinv) * s_hat.conj()[None, :] \
        - (s[:, None] * Cinv) * s.conj()[None, :]
    SQ = Sigma_y_bar @ Q
    c = pc.c if pc.c is not None else pep_contour_constant(Sigma_y_bar, Q)
    total = 0.0
    for tk in pc.tau:
        phi = _char_fn(c * (1.0 + 1j * tk), SQ)
        total += phi.real + tk * phi.imag
    pep = total / pc.q
    if not 0.0 <= pep <= 1.0:
        log.debug("PEP %r outside [0, 1]; clamping", pep)
        pep = min(max(pep, 0.0), 1.0)
    return float(pep)


def dominant_error_pair(N: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Canonical nearest-neighbour error event: all-ones transmitted, the
    last symbol rotated by one constellation step in the detected vector."""
    s = np.ones(N, dtype=complex)
    s_hat = np.ones(N, dtype=complex)
    s_hat[-1] = np.exp(2j * np.pi / M)
    return s, s_hat


def msd_ber(N: int, M: int, cfg: LinkConfig, ch: ChannelParams,
            pc: PepConfig | None = None) -> float:
    """Union bound over dominant single-symbol errors:
    w / (log2(M) (N-1)) times the canonical PEP, with Gray weight
    w = 2(N-1) for binary and 4(N-1) for larger constellations."""
    if N < 2:
        raise ValueError("window length must be >= 2")
    s, s_hat = dominant_error_pair(N, M)
    w = 2 * (N - 1) if M == 2 else 4 * (N - 1)
    return w / (math.log2(M) * (N - 1)) * msd_pep(s, s_hat, cfg, ch, pc)


def power_sweep(p_over_n0_db: float, ch: ChannelParams,
                p: ModulationAnalysisParams, n0: float = 1.0,
                rho_grid: np.ndarray | None = None):
    """Slow-fading BER (alpha = 1) across the power-allocation grid."""
    if rho_grid is None:
        rho_grid = np.round(np.arange(0.01, 1.00, 0.01), 2)
    P = 10.0 ** (p_over_n0_db / 10.0) * n0
    bers = []
    for rho in rho_grid:
        cfg = LinkConfig.from_total_power(P, float(rho), ch.sigma2_1, n0, p.M)
        bers.append(cdd_ber_given_alpha(1.0, cfg, ch, p))
    return np.asarray(rho_grid, dtype=float), np.array(bers)


def optimize_power(p_over_n0_db: float, ch: ChannelParams,
                   p: ModulationAnalysisParams, n0: float = 1.0) -> float:
    """Exhaustive search of the slow-fading BER over rho in {0.01..0.99}."""
    grid, bers = power_sweep(p_over_n0_db, ch, p, n0)
    return float(grid[int(np.argmin(bers))])
