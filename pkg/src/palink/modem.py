"""16QAM mapping, OFDM frame assembly, cyclic prefix, pilot construction.

Bit labels follow the Gray table pinned in the README: for label
b3 b2 b1 b0, the pair (b3, b2) selects the I level from
{00: -3, 01: -1, 11: +1, 10: +3} and (b1, b0) selects the Q level
identically; points are scaled by 1/sqrt(10) for unit mean energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from palink.config import LinkConfig
from palink.numerics import idft

_LEVELS = {(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}


def _qam16_points() -> tuple[np.ndarray, np.ndarray]:
    points = np.empty(16, dtype=complex)
    labels = np.empty((16, 4), dtype=np.uint8)
    for label in range(16):
        b3, b2, b1, b0 = (label >> 3) & 1, (label >> 2) & 1, (label >> 1) & 1, label & 1
        i_level = _LEVELS[(b3, b2)]
        q_level = _LEVELS[(b1, b0)]
        points[label] = (i_level + 1j * q_level) / np.sqrt(10)
        labels[label] = (b3, b2, b1, b0)
    return points, labels


@dataclass(frozen=True)
class QamConstellation:
    """16QAM with the pinned Gray labeling, unit average energy."""

    points: np.ndarray = field(default_factory=lambda: _qam16_points()[0])
    bit_labels: np.ndarray = field(default_factory=lambda: _qam16_points()[1])

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return 4


QAM16 = QamConstellation()


def map_bits(bits: np.ndarray, constellation: QamConstellation = QAM16) -> np.ndarray:
    """Map groups of 4 bits to constellation points, in order."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % 4 != 0:
        raise ValueError(f"bit count {bits.size} not divisible by 4")
    groups = bits.reshape(-1, 4)
    labels = groups[:, 0] * 8 + groups[:, 1] * 4 + groups[:, 2] * 2 + groups[:, 3]
    return constellation.points[labels]


def hard_demap(symbols: np.ndarray, constellation: QamConstellation = QAM16) -> np.ndarray:
    """Nearest-point decision per symbol.

    Distances are compared in bit-label order, so exact ties resolve to the
    lowest 4-bit label (np.argmin keeps the first minimum).
    """
    symbols = np.asarray(symbols, dtype=complex).ravel()
    d2 = np.abs(symbols[:, None] - constellation.points[None, :]) ** 2
    labels = np.argmin(d2, axis=1)
    return constellation.bit_labels[labels].reshape(-1)


def add_cyclic_prefix(x_time: np.ndarray, l_cp: int) -> np.ndarray:
    """Prepend the last ``l_cp`` samples (last axis)."""
    x_time = np.asarray(x_time)
    if not 0 <= l_cp <= x_time.shape[-1]:
        raise ValueError(f"L_cp={l_cp} out of range for length {x_time.shape[-1]}")
    if l_cp == 0:
        return x_time.copy()
    return np.concatenate([x_time[..., -l_cp:], x_time], axis=-1)


def remove_cyclic_prefix(x_time: np.ndarray, l_cp: int) -> np.ndarray:
    """Strip the first ``l_cp`` samples (last axis)."""
    x_time = np.asarray(x_time)
    if not 0 <= l_cp < x_time.shape[-1]:
        raise ValueError(f"L_cp={l_cp} out of range for length {x_time.shape[-1]}")
    return x_time[..., l_cp:].copy()


@dataclass(frozen=True)
class PilotPlan:
    """Equispaced pilot tones with per-antenna constant-modulus phase ramps.

    Antenna r's sequence is sqrt(rho) * exp(-2j*pi*k*r*L/M_p) over pilot
    index k; with M_p = Nt*L the Nt ramps are mutually orthogonal.
    """

    m_p: int
    tone_indices: np.ndarray  # (M_p,), 0-based, strictly increasing
    sequences: np.ndarray  # (Nt, M_p)

    @property
    def nt(self) -> int:
        return self.sequences.shape[0]


def build_pilot_plan(cfg: LinkConfig) -> PilotPlan:
    if cfg.M % cfg.M_p != 0:
        raise ValueError(f"M={cfg.M} not divisible by M_p={cfg.M_p}")
    if cfg.M_p != cfg.Nt * cfg.L:
        raise ValueError(f"M_p={cfg.M_p} != Nt*L={cfg.Nt * cfg.L}")
    spacing = cfg.M // cfg.M_p
    tones = np.arange(cfg.M_p) * spacing
    k = np.arange(cfg.M_p)[None, :]
    r = np.arange(cfg.Nt)[:, None]
    sequences = np.sqrt(cfg.rho) * np.exp(-2j * np.pi * k * r * cfg.L / cfg.M_p)
    return PilotPlan(m_p=cfg.M_p, tone_indices=tones, sequences=sequences)


@dataclass(frozen=True)
class OfdmFrame:
    """One pilot symbol plus one data symbol per transmit antenna.

    Frequency-domain vectors of length M; non-pilot tones of the pilot
    symbol are zero; data tones are constellation points scaled by
    sqrt(rho).
    """

    pilot_symbol: np.ndarray  # (Nt, M)
    data_symbol: np.ndarray  # (Nt, M)
    payload_bits: np.ndarray  # (Nt, 4*M)


def build_frame(cfg: LinkConfig, plan: PilotPlan, payload_bits: np.ndarray,
                constellation: QamConstellation = QAM16) -> OfdmFrame:
    payload_bits = np.asarray(payload_bits, dtype=np.uint8)
    if payload_bits.shape != (cfg.Nt, 4 * cfg.M):
        raise ValueError(f"payload bits shape {payload_bits.shape} != {(cfg.Nt, 4 * cfg.M)}")
    pilot = np.zeros((cfg.Nt, cfg.M), dtype=complex)
    pilot[:, plan.tone_indices] = plan.sequences
    data = np.sqrt(cfg.rho) * np.vstack(
        [map_bits(payload_bits[r], constellation) for r in range(cfg.Nt)]
    )
    return OfdmFrame(pilot_symbol=pilot, data_symbol=data, payload_bits=payload_bits)


def frame_to_time(freq_symbol: np.ndarray, l_cp: int) -> np.ndarray:
    """Per-antenna time-domain OFDM symbol with cyclic prefix."""
    return add_cyclic_prefix(idft(freq_symbol), l_cp)
