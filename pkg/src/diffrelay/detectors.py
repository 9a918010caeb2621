"""Detectors: two-symbol CDD, genie-aided coherent baseline, and
multiple-symbol detection via exact sphere decoding."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular, toeplitz

from .fading import ChannelParams, autocorr, cascaded_covariance
from .link import LinkConfig
from .modem import Constellation


def cdd_detect(y_prev: complex, y_curr: complex, c: Constellation) -> complex:
    """argmin over v of |y_curr - v y_prev|^2; ties toward the smaller index."""
    return c.points[int(c.nearest_index(complex(y_curr) * np.conj(complex(y_prev))))]


def cdd_detect_block(y, c: Constellation) -> np.ndarray:
    """Phase indices of the CDD decisions for all consecutive pairs of y."""
    y = np.asarray(y, dtype=complex)
    if len(y) < 2:
        raise ValueError("need at least two received samples")
    return c.nearest_index(y[1:] * y[:-1].conj())


def coherent_detect(y: complex, h: complex, cfg: LinkConfig, c: Constellation) -> complex:
    """Genie-aided coherent decision on the current differentially-encoded symbol.

    Returns argmin over u of |y - A sqrt(P0) h u|^2; the data estimate is
    u times the conjugate of the known previous transmitted symbol.
    """
    return c.points[int(c.nearest_index(complex(y) * np.conj(complex(h))))]


def coherent_detect_block(y, h, c: Constellation) -> np.ndarray:
    """Phase indices of coherent decisions for each (y[k], h[k]) pair."""
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    return c.nearest_index(y * h.conj())


@dataclass(frozen=True)
class MsdWindow:
    """An N-sample detection window with its covariance machinery.

    C is the modified-metric covariance A^2 P0 Sigma_h + (1 + A^2 sigma2^2) N0 I;
    L is the lower-triangular factor with L L^H = C^-1, and
    U = (L^H diag(y))* is the upper-triangular search matrix whose
    candidate cost ||U s||^2 equals y^H diag(s) C^-1 diag(s*) y.
    """

    N: int
    y: np.ndarray
    Sigma_h1: np.ndarray
    Sigma_h: np.ndarray
    C: np.ndarray
    L: np.ndarray
    U: np.ndarray


def _inverse_cholesky(C: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^H = C^-1, via the flipped Cholesky of C.

    L must come out lower-triangular so that U = (L^H diag(y))* is upper
    triangular for the tree search; the plain Cholesky of C gives the
    opposite orientation.
    """
    n = C.shape[0]
    J = np.eye(n)[::-1]
    G = cholesky(J @ C @ J, lower=True)
    Ginv = solve_triangular(G, np.eye(n), lower=True)
    return J @ Ginv.conj().T @ J


def build_msd_matrices(N: int, cfg: LinkConfig, ch: ChannelParams):
    """(Sigma_h1, Sigma_h, C, L) shared by every window of one stream."""
    if N < 1:
        raise ValueError("window length must be >= 1")
    Sigma_h1 = toeplitz(np.array([autocorr(ch, 1, k) for k in range(N)]))
    Sigma_h = cascaded_covariance(ch, N)
    C = cfg.A**2 * cfg.P0 * Sigma_h + (1.0 + cfg.A**2 * ch.sigma2_2) * cfg.N0 * np.eye(N)
    return Sigma_h1, Sigma_h, C, _inverse_cholesky(C)


def msd_build(y, cfg: LinkConfig, ch: ChannelParams) -> MsdWindow:
    """Assemble the window matrices for one block of received samples."""
    y = np.asarray(y, dtype=complex)
    Sigma_h1, Sigma_h, C, L = build_msd_matrices(len(y), cfg, ch)
    U = (L.conj().T * y[None, :]).conj()
    return MsdWindow(N=len(y), y=y, Sigma_h1=Sigma_h1, Sigma_h=Sigma_h,
                     C=C, L=L, U=U)


def msd_metric(w: MsdWindow, s) -> float:
    """||U s||^2 for a candidate transmit vector."""
    return float(np.sum(np.abs(w.U @ np.asarray(s, dtype=complex)) ** 2))


def _sphere_search(U: np.ndarray, M: int):
    """Exact minimizer of ||U s||^2 over M-PSK^N with s[0] pinned to 1.

    Depth-first Schnorr-Euchner enumeration on the upper-triangular system:
    levels run from the last row (only s[N-1]) up to row 0, children at
    each level are visited in increasing partial-cost order, and a branch
    is abandoned as soon as its accumulated cost reaches the best leaf.
    """
    N = U.shape[0]
    pts = [complex(np.cos(2 * np.pi * m / M), np.sin(2 * np.pi * m / M))
           for m in range(M)]
    rows = [tuple(complex(v) for v in U[i]) for i in range(N)]
    best_cost = math.inf
    best_s = None
    s = [1.0 + 0j] * N

    cands = [None] * N   # cost-sorted candidate list per level
    cursor = [0] * N     # next untried candidate per level
    below = [0.0] * N    # accumulated cost of rows > i when level i was entered

    def enter(i: int, acc: float) -> None:
        row = rows[i]
        xi = 0j
        for j in range(i + 1, N):
            xi += row[j] * s[j]
        if i == 0:
            t = row[0] + xi  # s[0] pinned to the reference point 1
            cands[0] = [(t.real * t.real + t.imag * t.imag, 0, 1.0 + 0j)]
        else:
            diag = row[i]
            opts = []
            for m, p in enumerate(pts):
                t = diag * p + xi
                opts.append((t.real * t.real + t.imag * t.imag, m, p))
            opts.sort()
            cands[i] = opts
        cursor[i] = 0
        below[i] = acc

    level = N - 1
    enter(level, 0.0)
    while True:
        opts = cands[level]
        k = cursor[level]
        if k < len(opts):
            cost, _, p = opts[k]
            total = below[level] + cost
            # children are cost-ordered: once one exceeds the bound, all do
            exhausted = total >= best_cost
        else:
            exhausted = True
        if exhausted:
            level += 1
            if level >= N:
                break
            continue  # cursor at the parent already points past our branch
        cursor[level] = k + 1
        s[level] = p
        if level == 0:
            best_cost = total
            best_s = list(s)
            level += 1
        else:
            level -= 1
            enter(level, total)
    return np.array(best_s), best_cost


def msd_sphere(w: MsdWindow, c: Constellation) -> np.ndarray:
    """Sphere-decoded minimizer of the window metric (s[0] = 1)."""
    s, _ = _sphere_search(w.U, c.M)
    return s


def msd_exhaustive(w: MsdWindow, c: Constellation) -> np.ndarray:
    """Brute-force minimizer over all M^(N-1) candidates; test oracle.

    Candidates are scanned in lexicographic phase-index order and the
    first strict minimum is kept.
    """
    if c.M ** (w.N - 1) > 2**20:
        raise ValueError("exhaustive search space exceeds 2^20 candidates")
    best_cost = math.inf
    best_s = None
    for combo in itertools.product(range(c.M), repeat=w.N - 1):
        s = np.concatenate([[1.0 + 0j], c.points[list(combo)]])
        cost = msd_metric(w, s)
        if cost < best_cost:
            best_cost = cost
            best_s = s
    return best_s


def _window_starts(n: int, N: int):
    """Start indices of windows advancing by N-1 with one-symbol overlap.

    Requires n >= N >= 2.  When the tail is shorter than a full window, a
    final smaller window (size >= 2) starts at the last covered sample.
    """
    starts = list(range(0, n - N + 1, N - 1))
    covered = starts[-1] + N
    if covered < n:
        starts.append(covered - 1)
    return starts


def msd_detect_stream(y, N: int, cfg: LinkConfig, ch: ChannelParams,
                      c: Constellation) -> np.ndarray:
    """Detect a sample stream with overlapping N-sample windows.

    Consecutive windows share exactly one sample; each emits N-1 data
    decisions v[k] = s*[k] s[k+1], for len(y) - 1 decisions in total
    (a shorter final window covers any tail).
    """
    y = np.asarray(y, dtype=complex)
    n = len(y)
    if n < 2:
        raise ValueError("stream must contain at least two samples")
    if N < 2:
        raise ValueError("window length must be >= 2")
    N = min(N, n)
    matrices = {N: build_msd_matrices(N, cfg, ch)}
    out = np.empty(n - 1, dtype=complex)
    for st in _window_starts(n, N):
        size = min(N, n - st)
        if size not in matrices:
            matrices[size] = build_msd_matrices(size, cfg, ch)
        Sh1, Sh, C, L = matrices[size]
        U = (L.conj().T * y[st:st + size][None, :]).conj()
        s_hat, _ = _sphere_search(U, c.M)
        v_hat = c.points[c.nearest_index(s_hat[:-1].conj() * s_hat[1:])]
        out[st:st + size - 1] = v_hat
    return out
