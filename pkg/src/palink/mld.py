"""Genie-aided maximum-likelihood detection benchmarks.

The search places every combination of constellation points on a small
set of carriers (jointly across transmit antennas) while the remaining
carriers stay fixed: to the true data in ``lower`` mode, to one random
draw per frame in ``upper`` mode.  The PA is known exactly, so each
candidate's noiseless prediction runs through the true nonlinearity.

The metric decomposes per transmit antenna, so the 16^(k*Nt) candidates
are scored from per-antenna prediction tables and pairwise per-tone
Gram weights instead of one brute-force pass; the result is identical to
exhaustive search, with ties going to the lexicographically smallest
candidate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from palink.linear_rx import LsEstimate, estimate_freq_response, ls_estimate
from palink.modem import QAM16, QamConstellation
from palink.numerics import dft, idft
from palink.pa import RappPaModel, apply_pa

DEFAULT_BUDGET = 65536


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class MldConfig:
    k_mld: int
    mode: str  # "upper" | "lower"
    constellation: QamConstellation = QAM16
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.mode not in ("upper", "lower"):
            raise ValueError(f"mode must be 'upper' or 'lower', got {self.mode!r}")
        if self.k_mld < 1:
            raise ValueError("k_mld must be >= 1")


def genie_ls_estimate(y_p: np.ndarray, a: np.ndarray, nt: int, l: int) -> LsEstimate:
    """LS estimate using the genie pilot matrix A (exact PA knowledge)."""
    return ls_estimate(y_p, a, nt, l)


def _candidate_tables(base_freq: np.ndarray, searched: np.ndarray, points: np.ndarray,
                      rho: float, pa: RappPaModel | None) -> np.ndarray:
    """Frequency-domain PA outputs for every per-antenna candidate.

    base_freq: (M,) fixed frequency symbol of one antenna.  Returns
    (n_cand, M) with n_cand = order^k, candidate index enumerating the
    searched tones most-significant-first in bit-label order.
    """
    k = searched.size
    order = points.size
    n_cand = order**k
    cands = np.tile(base_freq, (n_cand, 1))
    combos = np.array(list(itertools.product(range(order), repeat=k)), dtype=int)
    cands[:, searched] = np.sqrt(rho) * points[combos]
    return dft(apply_pa(idft(cands), pa))


def mld_detect(y_d: np.ndarray, est: LsEstimate, base_freq_symbols: np.ndarray,
               searched_tones, pa: RappPaModel | None, cfg: MldConfig,
               rho: float) -> np.ndarray:
    """Joint ML search over the searched tones of every transmit antenna.

    y_d: (Nr, M) frequency observations; base_freq_symbols: (Nt, M) values
    for the non-searched tones (mode-dependent, chosen by the caller);
    returns bits of shape (Nt, k_mld*4) in antenna-major, searched-tone
    order.
    """
    y_d = np.asarray(y_d, dtype=complex)
    searched = np.asarray(searched_tones, dtype=int)
    if searched.size != cfg.k_mld:
        raise ValueError(f"expected {cfg.k_mld} searched tones, got {searched.size}")
    nt = base_freq_symbols.shape[0]
    m = base_freq_symbols.shape[1]
    order = cfg.constellation.order
    total = order ** (cfg.k_mld * nt)
    if total > cfg.budget:
        raise SearchBudgetExceeded(
            f"{order}^({cfg.k_mld}*{nt}) = {total} candidates exceeds budget {cfg.budget}")

    g = estimate_freq_response(est, m)  # (Nr, Nt, M)
    tables = [
        _candidate_tables(base_freq_symbols[r], searched, cfg.constellation.points, rho, pa)
        for r in range(nt)
    ]
    n_cand = tables[0].shape[0]

    # metric(i_1..i_Nt) = ||y - sum_r diag(g[:,r]) D_r[i_r]||^2, expanded into
    # per-antenna terms and pairwise cross terms; constant ||y||^2 dropped.
    per_antenna = []
    for r in range(nt):
        w_rr = np.sum(np.abs(g[:, r, :]) ** 2, axis=0)  # (M,)
        u_r = np.sum(np.conj(y_d) * g[:, r, :], axis=0)  # (M,)
        a_r = np.abs(tables[r]) ** 2 @ w_rr - 2.0 * np.real(tables[r] @ u_r)
        per_antenna.append(a_r)

    metric = np.zeros((n_cand,) * nt)
    for r in range(nt):
        shape = [1] * nt
        shape[r] = n_cand
        metric += per_antenna[r].reshape(shape)
    for r in range(nt):
        for r2 in range(r + 1, nt):
            w = np.sum(np.conj(g[:, r, :]) * g[:, r2, :], axis=0)  # (M,)
            cross = 2.0 * np.real((np.conj(tables[r]) * w) @ tables[r2].T)
            shape = [1] * nt
            shape[r] = n_cand
            shape[r2] = n_cand
            metric += cross.reshape(shape)

    best = np.unravel_index(np.argmin(metric), metric.shape)
    bit_labels = cfg.constellation.bit_labels
    bits = np.empty((nt, cfg.k_mld * 4), dtype=np.uint8)
    for r, idx in enumerate(best):
        digits = []
        for _ in range(cfg.k_mld):
            digits.append(idx % order)
            idx //= order
        digits.reverse()  # most-significant digit is the first searched tone
        bits[r] = np.concatenate([bit_labels[d] for d in digits])
    return bits
