"""LS channel estimation and zero-forcing equalization.

The receiver-side pilot matrix B assumes a linear PA; the genie matrix A
(exact PA applied to the full transmitted pilot symbol) is used only by
the MLD benchmarks and by test oracles.  ZF runs per subcarrier on the
Nr x Nt frequency-response blocks, equivalent to the dense stacked
pseudo-inverse but O(M * Nt^2 * Nr).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from palink.modem import OfdmFrame, PilotPlan, QAM16, QamConstellation, hard_demap
from palink.numerics import PINV_RTOL, dft, idft, partial_fourier, pseudo_inverse, row_select
from palink.pa import RappPaModel, apply_pa

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LsEstimate:
    """Stacked per-receive-antenna tap estimates, shape (Nr, Nt*L)."""

    h_hat: np.ndarray
    nt: int
    length: int  # L

    def pair_taps(self, q: int, r: int) -> np.ndarray:
        return self.h_hat[q, r * self.length:(r + 1) * self.length]


def build_B(plan: PilotPlan, m: int, l: int) -> np.ndarray:
    """Pilot observation matrix without PA knowledge.

    B = [diag(x_p^1) F_p, ..., diag(x_p^Nt) F_p], size M_p x Nt*L, where
    F_p keeps the pilot-tone rows of the unnormalized partial Fourier
    matrix.
    """
    if plan.m_p != plan.nt * l:
        raise ValueError(f"M_p={plan.m_p} != Nt*L={plan.nt * l}")
    f_p = row_select(partial_fourier(m, l), plan.tone_indices)
    blocks = [plan.sequences[r][:, None] * f_p for r in range(plan.nt)]
    return np.hstack(blocks)


def build_A_oracle(frame: OfdmFrame, pa: RappPaModel | None, plan: PilotPlan,
                   m: int, l: int) -> np.ndarray:
    """Genie pilot matrix with exact PA knowledge.

    A = [diag(Fp_rows(dft(g(idft(x^1))))) F_p, ...]; with a linear PA this
    reduces to B.
    """
    f_p = row_select(partial_fourier(m, l), plan.tone_indices)
    blocks = []
    for r in range(frame.pilot_symbol.shape[0]):
        distorted = dft(apply_pa(idft(frame.pilot_symbol[r]), pa))
        blocks.append(distorted[plan.tone_indices][:, None] * f_p)
    return np.hstack(blocks)


def ls_estimate(y_p: np.ndarray, b: np.ndarray, nt: int, l: int) -> LsEstimate:
    """Least-squares taps per receive antenna: h_hat^q = pinv(B) y_p^q."""
    y_p = np.atleast_2d(np.asarray(y_p, dtype=complex))
    if y_p.shape[1] != b.shape[0]:
        raise ValueError(f"pilot observation length {y_p.shape[1]} != rows of B {b.shape[0]}")
    s = np.linalg.svd(b, compute_uv=False)
    if s[0] == 0 or np.sum(s > PINV_RTOL * s[0]) < min(b.shape):
        logger.warning("rank-deficient pilot matrix: singular values %s", s)
    h_hat = (pseudo_inverse(b) @ y_p.T).T
    return LsEstimate(h_hat=h_hat, nt=nt, length=l)


def estimate_freq_response(est: LsEstimate, m: int) -> np.ndarray:
    """(Nr, Nt, M) frequency response of the estimated taps."""
    nr = est.h_hat.shape[0]
    taps = est.h_hat.reshape(nr, est.nt, est.length)
    return np.fft.fft(taps, n=m, axis=-1)


def zf_equalize(y_d: np.ndarray, est: LsEstimate, m: int) -> np.ndarray:
    """Zero-forcing estimate of the per-antenna time-domain PA outputs.

    y_d: (Nr, M) frequency-domain data observations.  Per subcarrier the
    Nr x Nt response block is pseudo-inverted (same singular-value cutoff
    as the kernel module), then each antenna's tone estimates are
    transformed back to the time domain.  Returns (Nt, M).
    """
    y_d = np.asarray(y_d, dtype=complex)
    g = estimate_freq_response(est, m)  # (Nr, Nt, M)
    blocks = np.moveaxis(g, -1, 0)  # (M, Nr, Nt)
    u, s, vh = np.linalg.svd(blocks, full_matrices=False)
    cutoff = PINV_RTOL * s[..., :1]
    deficient = np.sum(s > cutoff, axis=-1) < min(est.nt, y_d.shape[0])
    if np.any(deficient):
        logger.warning("rank-deficient ZF blocks at %d tone(s)", int(np.sum(deficient)))
    s_inv = np.where(s > cutoff, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    pinv_blocks = np.conj(np.swapaxes(vh, -1, -2)) * s_inv[..., None, :] @ np.conj(
        np.swapaxes(u, -1, -2))
    d_freq = np.einsum("mtq,qm->tm", pinv_blocks, y_d)  # (Nt, M)
    return idft(d_freq)


def zf_baseline_detect(d_hat: np.ndarray, rho: float,
                       constellation: QamConstellation = QAM16) -> np.ndarray:
    """Classical LS+ZF hard decisions, shape (Nt, 4*M).

    Transforms each antenna's block back to the frequency domain, removes
    the sqrt(rho) data scaling, and demaps against the constellation.
    """
    d_hat = np.atleast_2d(np.asarray(d_hat, dtype=complex))
    tones = dft(d_hat) / np.sqrt(rho)
    return np.vstack([hard_demap(row, constellation) for row in tones])
