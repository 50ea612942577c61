"""Memoryless Rapp power-amplifier nonlinearity.

Amplitude transfer Gamma(r) = r * (1 + (r/v_sat)^(2*delta))^(-1/(2*delta)),
phase transfer zero.  g(0) = 0 (the 0/0 form is removable); the gain is
evaluated in log space so extreme inputs or smoothness factors do not
overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def clipping_to_vsat(clipping_db: float, rho: float) -> float:
    """Saturation amplitude for a clipping level 10*log10(v_sat^2/rho)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return float(np.sqrt(rho * 10.0 ** (clipping_db / 10.0)))


@dataclass(frozen=True)
class RappPaModel:
    v_sat: float
    delta: float
    rho: float

    def __post_init__(self):
        if self.v_sat <= 0:
            raise ValueError("v_sat must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @classmethod
    def from_clipping(cls, clipping_db: float, rho: float, delta: float = 5.0) -> "RappPaModel":
        return cls(v_sat=clipping_to_vsat(clipping_db, rho), delta=delta, rho=rho)

    @property
    def clipping_db(self) -> float:
        return float(10.0 * np.log10(self.v_sat**2 / self.rho))


def _gain(r: np.ndarray, pa: RappPaModel) -> np.ndarray:
    """Gamma(r)/r, the amplitude gain; 1 at r=0 (small-signal limit)."""
    r = np.asarray(r, dtype=float)
    gain = np.ones_like(r)
    pos = r > 1e-300
    # log of (1 + (r/v)^(2 delta))^(1/(2 delta)) without overflow
    log_t = np.log(r[pos] / pa.v_sat)
    gain[pos] = np.exp(-np.logaddexp(0.0, 2.0 * pa.delta * log_t) / (2.0 * pa.delta))
    return gain


def amam(r, pa: RappPaModel):
    """Amplitude transfer Gamma(r); monotone, bounded by min(r, v_sat)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("amplitude must be nonnegative")
    out = r * _gain(r, pa)
    return float(out) if out.ndim == 0 else out


def apply_pa(x: np.ndarray, pa: RappPaModel | None) -> np.ndarray:
    """Element-wise PA: x * Gamma(|x|)/|x|.  ``pa=None`` means a linear PA."""
    x = np.asarray(x, dtype=complex)
    if pa is None:
        return x.copy()
    return x * _gain(np.abs(x), pa)
