"""System configuration: link dimensions, power levels, seeds, file I/O."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class LinkConfig:
    """All dimensions and scalar parameters of one link setup.

    ``M`` subcarriers, channel memory ``L`` taps, cyclic prefix ``L_cp``,
    ``Nt`` transmit and ``Nr`` receive antennas, ``M_p`` pilot tones,
    ``K`` carriers detected per network.  ``rho`` is the average
    per-antenna transmit power; ``clipping_db`` is 10*log10(v_sat^2/rho).
    """

    M: int = 64
    L: int = 16
    L_cp: int = 16
    Nt: int = 2
    Nr: int = 4
    M_p: int = 32
    K: int = 8
    snr_db: float = 15.0
    clipping_db: float = 7.0
    delta: float = 5.0
    rho: float = 1.0
    seed: int = 0
    n_train: int = 50_000
    n_test: int = 5_000
    batch_size: int = 300

    def __post_init__(self):
        if self.L_cp < self.L - 1:
            raise ValueError(f"L_cp={self.L_cp} must be >= L-1={self.L - 1}")
        if self.M_p != self.Nt * self.L:
            raise ValueError(f"M_p={self.M_p} must equal Nt*L={self.Nt * self.L}")
        if self.M % self.M_p != 0:
            raise ValueError(f"M={self.M} must be divisible by M_p={self.M_p}")
        if self.M % self.K != 0:
            raise ValueError(f"K={self.K} must divide M={self.M}")
        if self.rho <= 0:
            raise ValueError("rho must be positive")

    @property
    def sigma2(self) -> float:
        """Noise variance per complex sample for the configured SNR."""
        return self.Nt * self.rho / 10.0 ** (self.snr_db / 10.0)

    @property
    def n_groups(self) -> int:
        return self.Nt * self.M // self.K

    def replace(self, **kwargs) -> "LinkConfig":
        return dataclasses.replace(self, **kwargs)


_INT_FIELDS = {"M", "L", "L_cp", "Nt", "Nr", "M_p", "K", "seed", "n_train", "n_test", "batch_size"}
_FLOAT_FIELDS = {"snr_db", "clipping_db", "delta", "rho"}
_ALL_FIELDS = _INT_FIELDS | _FLOAT_FIELDS


def desk_profile(**overrides) -> LinkConfig:
    """Laptop-scale default: 64 carriers, 2x4 antennas."""
    return LinkConfig().replace(**overrides)


def paper_profile(**overrides) -> LinkConfig:
    """Full-scale setup: 128 carriers, 2x8 antennas, 2.4e5 training samples."""
    base = LinkConfig(M=128, Nr=8, n_train=240_000, n_test=20_000)
    return base.replace(**overrides)


def write_config(cfg: LinkConfig, path) -> None:
    """Write a flat ``key = value`` text file with the LinkConfig fields."""
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in dataclasses.fields(cfg)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_config(path) -> LinkConfig:
    """Parse a flat key-value config file.

    Unknown keys are rejected by name.  Lines starting with ``#`` and blank
    lines are ignored.
    """
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _ALL_FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = int(val) if key in _INT_FIELDS else float(val)
    return LinkConfig(**values)
