"""Random multipath MIMO channel, circulant application, AWGN, SNR bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from palink.config import LinkConfig

MAX_PATHS = 10
MAX_DELAY = 6  # sampling periods


@dataclass(frozen=True)
class ChannelRealization:
    """Nr x Nt set of length-L impulse responses, unit energy in expectation."""

    taps: np.ndarray  # (Nr, Nt, L)

    @property
    def nr(self) -> int:
        return self.taps.shape[0]

    @property
    def nt(self) -> int:
        return self.taps.shape[1]

    @property
    def length(self) -> int:
        return self.taps.shape[2]


@dataclass(frozen=True)
class NoiseSpec:
    """Per-sample complex noise variance and the SNR it came from.

    sigma2 = Nt * rho / 10^(snr_db/10).
    """

    sigma2: float
    snr_db: float

    @classmethod
    def from_snr(cls, snr_db: float, nt: int, rho: float) -> "NoiseSpec":
        return cls(sigma2=nt * rho / 10.0 ** (snr_db / 10.0), snr_db=snr_db)


def sample_channel(cfg: LinkConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw a fresh block-fading realization.

    Per antenna pair: path count uniform in 1..10, delays uniform in 0..6
    (paths landing on the same delay add), complex Gaussian gains with
    equal average power per path scaled so E[||h||^2] = 1.  Taps beyond
    delay 6 are zero.
    """
    if cfg.L < MAX_DELAY + 1:
        raise ValueError(f"L={cfg.L} too short for maximum delay {MAX_DELAY}")
    taps = np.zeros((cfg.Nr, cfg.Nt, cfg.L), dtype=complex)
    for q in range(cfg.Nr):
        for r in range(cfg.Nt):
            n_paths = int(rng.integers(1, MAX_PATHS + 1))
            delays = rng.integers(0, MAX_DELAY + 1, size=n_paths)
            gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths))
            gains *= np.sqrt(1.0 / (2.0 * n_paths))
            np.add.at(taps[q, r], delays, gains)
    return ChannelRealization(taps=taps)


def apply_channel_time(x_time: np.ndarray, ch: ChannelRealization) -> np.ndarray:
    """Propagate per-antenna time signals (CP included) through the channel.

    x_time: (Nt, M + L_cp).  Returns (Nr, M + L_cp): the sum over transmit
    antennas of the linear convolution with each impulse response,
    truncated to the input window.  With L_cp >= L-1 the CP-free part
    equals the circulant-matrix product.
    """
    x_time = np.asarray(x_time)
    nt, n = x_time.shape
    if nt != ch.nt:
        raise ValueError(f"{nt} transmit streams but channel has Nt={ch.nt}")
    out = np.zeros((ch.nr, n), dtype=complex)
    for q in range(ch.nr):
        for r in range(nt):
            out[q] += np.convolve(x_time[r], ch.taps[q, r])[:n]
    return out


def freq_response(ch: ChannelRealization, m: int) -> np.ndarray:
    """Per-pair M-point frequency response F @ h (unnormalized DFT).

    Returns (Nr, Nt, M); satisfies the circulant diagonalization identity
    dft(h circ x) = response * dft(x).
    """
    if m < ch.length:
        raise ValueError(f"M={m} shorter than channel length {ch.length}")
    return np.fft.fft(ch.taps, n=m, axis=-1)


def add_awgn(y: np.ndarray, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise, variance sigma2 per entry."""
    if spec.sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if spec.sigma2 == 0:
        return np.asarray(y, dtype=complex).copy()
    y = np.asarray(y, dtype=complex)
    scale = np.sqrt(spec.sigma2 / 2.0)
    noise = scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y + noise
