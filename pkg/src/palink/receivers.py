"""The three learned receivers: input construction, carrier groups, banks.

Every network in a bank sees the same full observation vector (the input
sizes are group-independent); networks differ only in which K carriers'
bits they are supervised on.  Complex observations are packed as all real
parts followed by all imaginary parts, antenna-major and tone-minor.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from palink.config import LinkConfig
from palink.neural import MlpNetwork, load_checkpoint, predict_bits, save_checkpoint

RECEIVER_KINDS = ("type1", "data_driven", "type2")

MANIFEST_HEADER = "palink-bank v1"


@dataclass(frozen=True)
class CarrierGroup:
    """K consecutive tones of one transmit antenna."""

    group_index: int
    antenna: int
    carrier_indices: np.ndarray  # (K,)

    def label_slice(self) -> slice:
        """Slice into the per-antenna 4*M bit stream for this group's bits."""
        start = 4 * int(self.carrier_indices[0])
        return slice(start, start + 4 * len(self.carrier_indices))


def carrier_groups(cfg: LinkConfig) -> list[CarrierGroup]:
    """Antenna-major partition of all (antenna, tone) pairs into K-tone groups."""
    groups = []
    per_antenna = cfg.M // cfg.K
    for a in range(cfg.Nt):
        for g in range(per_antenna):
            idx = a * per_antenna + g
            tones = np.arange(g * cfg.K, (g + 1) * cfg.K)
            groups.append(CarrierGroup(group_index=idx, antenna=a, carrier_indices=tones))
    return groups


def _pack_complex(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    return np.concatenate([vec.real, vec.imag])


def unpack_complex(vec: np.ndarray) -> np.ndarray:
    """Inverse of the real/imag packing used by all input builders."""
    vec = np.asarray(vec, dtype=float)
    half = vec.size // 2
    return vec[:half] + 1j * vec[half:]


def build_input_type1(d_hat: np.ndarray) -> np.ndarray:
    """ZF output packed to reals; length 2*Nt*M."""
    return _pack_complex(d_hat)


def build_input_data_driven(y_p: np.ndarray, x_p: np.ndarray, y_d: np.ndarray) -> np.ndarray:
    """[y_p; x_p; y_d] packed to reals; length 2*(Nr*M_p + Nt*M_p + Nr*M)."""
    stacked = np.concatenate([np.asarray(v, dtype=complex).reshape(-1)
                              for v in (y_p, x_p, y_d)])
    return _pack_complex(stacked)


def build_input_type2(y_p: np.ndarray, x_p: np.ndarray, y_d: np.ndarray,
                      d_hat: np.ndarray) -> np.ndarray:
    """Concatenation of the data-driven and type-1 input vectors."""
    return np.concatenate([build_input_data_driven(y_p, x_p, y_d),
                           build_input_type1(d_hat)])


def input_dim(kind: str, cfg: LinkConfig) -> int:
    if kind == "type1":
        return 2 * cfg.Nt * cfg.M
    if kind == "data_driven":
        return 2 * (cfg.Nr * cfg.M_p + cfg.Nt * cfg.M_p + cfg.Nr * cfg.M)
    if kind == "type2":
        return 2 * (cfg.Nr * cfg.M_p + cfg.Nt * cfg.M_p + cfg.Nr * cfg.M + cfg.Nt * cfg.M)
    raise ValueError(f"unknown receiver kind {kind!r}")


def detect(kind: str, inputs: np.ndarray, bank: dict[int, MlpNetwork],
           groups: list[CarrierGroup], cfg: LinkConfig) -> dict[int, np.ndarray]:
    """Run every bank network on the (batched) kind-specific input vectors.

    inputs: (n_frames, input_dim).  Returns per-group detected bits of
    shape (n_frames, 4*K); missing networks raise.
    """
    if kind not in RECEIVER_KINDS:
        raise ValueError(f"unknown receiver kind {kind!r}")
    inputs = np.atleast_2d(inputs)
    if inputs.shape[1] != input_dim(kind, cfg):
        raise ValueError(f"input length {inputs.shape[1]} != expected {input_dim(kind, cfg)}")
    by_index = {g.group_index: g for g in groups}
    out = {}
    for idx, net in bank.items():
        if idx not in by_index:
            raise KeyError(f"no carrier group with index {idx}")
        if net.output_dim != 4 * cfg.K:
            raise ValueError(f"network for group {idx} outputs {net.output_dim}, "
                             f"expected {4 * cfg.K}")
        out[idx] = predict_bits(net, inputs)
    return out


def assemble_bits(group_bits: dict[int, np.ndarray], groups: list[CarrierGroup],
                  cfg: LinkConfig) -> np.ndarray:
    """Concatenate per-group outputs into the full (n, Nt, 4*M) bit stream.

    Positions of untrained groups are left at zero; the full bank fills
    every position exactly once.
    """
    n = next(iter(group_bits.values())).shape[0]
    bits = np.zeros((n, cfg.Nt, 4 * cfg.M), dtype=np.uint8)
    by_index = {g.group_index: g for g in groups}
    for idx, gbits in group_bits.items():
        g = by_index[idx]
        bits[:, g.antenna, g.label_slice()] = gbits
    return bits


def group_labels(payload_bits: np.ndarray, group: CarrierGroup) -> np.ndarray:
    """Supervision slice for one group; payload_bits is (n, Nt, 4*M)."""
    return payload_bits[:, group.antenna, group.label_slice()]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def save_bank(bank: dict[int, MlpNetwork], kind: str, directory) -> Path:
    """Write one checkpoint per group plus a checksummed manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"{MANIFEST_HEADER} kind={kind}"]
    for idx in sorted(bank):
        name = f"group{idx:03d}.ckpt"
        save_checkpoint(bank[idx], directory / name)
        lines.append(f"group={idx} file={name} sha256={_sha256(directory / name)}")
    manifest = directory / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def load_bank(directory) -> tuple[str, dict[int, MlpNetwork]]:
    """Load a bank, verifying every checkpoint against its manifest checksum."""
    directory = Path(directory)
    lines = (directory / "manifest.txt").read_text().splitlines()
    if not lines or not lines[0].startswith(MANIFEST_HEADER):
        raise ValueError("unrecognized bank manifest")
    kind = lines[0].split("kind=", 1)[1].strip()
    bank = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        fields = dict(part.split("=", 1) for part in line.split())
        path = directory / fields["file"]
        if _sha256(path) != fields["sha256"]:
            raise ValueError(f"checksum mismatch for {path}")
        bank[int(fields["group"])] = load_checkpoint(path)
    return kind, bank
