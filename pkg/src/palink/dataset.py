"""End-to-end sample generation, dataset persistence, and splitting.

One sample is one frame: a pilot OFDM symbol followed by a data OFDM
symbol over a fresh block-fading channel.  The transmit chain per antenna
is idft -> cyclic prefix -> PA -> channel -> AWGN -> CP removal -> dft;
applying the memoryless PA after the prefix is equivalent to before it
since the prefix duplicates samples.
"""

from __future__ import annotations

import dataclasses
import json
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from palink.channel import (ChannelRealization, NoiseSpec, add_awgn, apply_channel_time,
                            sample_channel)
from palink.config import LinkConfig
from palink.linear_rx import build_B, ls_estimate, zf_equalize
from palink.modem import (OfdmFrame, PilotPlan, add_cyclic_prefix, build_frame,
                          build_pilot_plan, remove_cyclic_prefix)
from palink.numerics import dft, idft
from palink.pa import RappPaModel, apply_pa

DATASET_MAGIC = b"PLDS"
DATASET_VERSION = 1


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class FrameSim:
    """Full state of one simulated frame (channel and frame included)."""

    channel: ChannelRealization
    frame: OfdmFrame
    plan: PilotPlan
    y_p: np.ndarray  # (Nr, M_p) pilot-tone observations
    y_d: np.ndarray  # (Nr, M) data-symbol observations


@dataclass
class Sample:
    """Persistable observation triple with labels and provenance."""

    y_p: np.ndarray  # (Nr, M_p)
    x_p: np.ndarray  # (Nt, M_p)
    y_d: np.ndarray  # (Nr, M)
    labels: np.ndarray  # (Nt * 4 * M,) uint8
    snr_db: float
    clipping_db: float  # inf means linear PA
    seed: int
    channel_id: int
    d_hat: np.ndarray | None = None  # (Nt, M) precomputed ZF output


def _transmit_symbol(freq_symbol: np.ndarray, cfg: LinkConfig, pa: RappPaModel | None,
                     ch: ChannelRealization, spec: NoiseSpec,
                     noise_rng: np.random.Generator) -> np.ndarray:
    """One OFDM symbol through the time-domain chain; returns (Nr, M) tones."""
    with_cp = add_cyclic_prefix(idft(freq_symbol), cfg.L_cp)
    rx = apply_channel_time(apply_pa(with_cp, pa), ch)
    rx = add_awgn(rx, spec, noise_rng)
    return dft(remove_cyclic_prefix(rx, cfg.L_cp))


def simulate_frame(cfg: LinkConfig, pa: RappPaModel | None, seed: int,
                   plan: PilotPlan | None = None) -> FrameSim:
    """Simulate one frame deterministically from ``seed``.

    Sub-streams (channel, bits, noise) come from spawned seed sequences so
    tests can reproduce any of them independently.
    """
    ch_rng, bit_rng, noise_rng = frame_rngs(seed)
    if plan is None:
        plan = build_pilot_plan(cfg)
    ch = sample_channel(cfg, ch_rng)
    bits = bit_rng.integers(0, 2, size=(cfg.Nt, 4 * cfg.M), dtype=np.uint8)
    frame = build_frame(cfg, plan, bits)
    spec = NoiseSpec.from_snr(cfg.snr_db, cfg.Nt, cfg.rho)
    rx_pilot = _transmit_symbol(frame.pilot_symbol, cfg, pa, ch, spec, noise_rng)
    rx_data = _transmit_symbol(frame.data_symbol, cfg, pa, ch, spec, noise_rng)
    return FrameSim(channel=ch, frame=frame, plan=plan,
                    y_p=rx_pilot[:, plan.tone_indices], y_d=rx_data)


def frame_rngs(seed: int) -> list[np.random.Generator]:
    """The (channel, bits, noise) generators used by :func:`simulate_frame`."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


def generate_sample(cfg: LinkConfig, seed: int, pa: RappPaModel | None = None,
                    plan: PilotPlan | None = None, with_zf: bool = False) -> Sample:
    """Simulate one frame and package the observation triple.

    ``pa=None`` falls back to the configured clipping level; pass a model
    explicitly (or a linear one) to override.
    """
    if pa is None and np.isfinite(cfg.clipping_db):
        pa = RappPaModel.from_clipping(cfg.clipping_db, cfg.rho, cfg.delta)
    sim = simulate_frame(cfg, pa, seed, plan=plan)
    d_hat = None
    if with_zf:
        b = build_B(sim.plan, cfg.M, cfg.L)
        est = ls_estimate(sim.y_p, b, cfg.Nt, cfg.L)
        d_hat = zf_equalize(sim.y_d, est, cfg.M)
    clipping = pa.clipping_db if pa is not None else float("inf")
    return Sample(y_p=sim.y_p, x_p=sim.plan.sequences.copy(), y_d=sim.y_d,
                  labels=sim.frame.payload_bits.reshape(-1).copy(),
                  snr_db=cfg.snr_db, clipping_db=clipping, seed=seed,
                  channel_id=seed, d_hat=d_hat)


def derive_seeds(master_seed: int, count: int, start: int = 0) -> list[int]:
    """Per-sample seeds: sample index mixed into the master seed."""
    return [
        int(np.random.SeedSequence([master_seed, start + i]).generate_state(1)[0])
        for i in range(count)
    ]


# --- persistence -----------------------------------------------------------
# Record layout (little-endian): f8 snr_db, f8 clipping_db, u64 seed, u64
# channel_id, then y_p, x_p, y_d (and d_hat when the header says so) as
# interleaved re/im f8 pairs, labels as u8, then a CRC32 of the record body.

def _complex_bytes(arr: np.ndarray) -> bytes:
    flat = np.asarray(arr, dtype=complex).reshape(-1)
    inter = np.empty(2 * flat.size)
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    return inter.astype("<f8").tobytes()


def _read_complex(buf: bytes, offset: int, shape: tuple[int, ...]) -> tuple[np.ndarray, int]:
    count = 2 * int(np.prod(shape))
    inter = np.frombuffer(buf, dtype="<f8", count=count, offset=offset)
    return (inter[0::2] + 1j * inter[1::2]).reshape(shape), offset + 8 * count


def write_dataset(path, samples: list[Sample], cfg: LinkConfig) -> None:
    has_d_hat = all(s.d_hat is not None for s in samples)
    if not has_d_hat and any(s.d_hat is not None for s in samples):
        raise ValueError("mixed presence of d_hat across samples")
    header = json.dumps({
        "config": dataclasses.asdict(cfg),
        "n_records": len(samples),
        "has_d_hat": has_d_hat,
    }).encode()
    with open(path, "wb") as f:
        f.write(DATASET_MAGIC)
        f.write(struct.pack("<II", DATASET_VERSION, len(header)))
        f.write(header)
        for s in samples:
            body = struct.pack("<ddQQ", s.snr_db, s.clipping_db, s.seed, s.channel_id)
            body += _complex_bytes(s.y_p) + _complex_bytes(s.x_p) + _complex_bytes(s.y_d)
            if has_d_hat:
                body += _complex_bytes(s.d_hat)
            body += np.asarray(s.labels, dtype=np.uint8).tobytes()
            f.write(body)
            f.write(struct.pack("<I", zlib.crc32(body)))


def read_dataset(path) -> tuple[list[Sample], LinkConfig]:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != DATASET_MAGIC:
        raise DatasetFormatError("not a dataset file")
    version, header_len = struct.unpack_from("<II", data, 4)
    if version != DATASET_VERSION:
        raise DatasetFormatError(f"unsupported dataset version {version}")
    header = json.loads(data[12:12 + header_len].decode())
    cfg = LinkConfig(**header["config"])
    has_d_hat = header["has_d_hat"]
    offset = 12 + header_len
    meta_size = struct.calcsize("<ddQQ")
    complex_counts = cfg.Nr * cfg.M_p + cfg.Nt * cfg.M_p + cfg.Nr * cfg.M
    if has_d_hat:
        complex_counts += cfg.Nt * cfg.M
    record_size = meta_size + 16 * complex_counts + cfg.Nt * 4 * cfg.M + 4
    samples = []
    for i in range(header["n_records"]):
        if offset + record_size > len(data):
            raise DatasetFormatError(f"truncated file at record {i}")
        body = data[offset:offset + record_size - 4]
        (crc,) = struct.unpack_from("<I", data, offset + record_size - 4)
        if zlib.crc32(body) != crc:
            raise DatasetFormatError(f"checksum failure at record {i}")
        snr_db, clipping_db, seed, channel_id = struct.unpack_from("<ddQQ", body, 0)
        pos = meta_size
        y_p, pos = _read_complex(body, pos, (cfg.Nr, cfg.M_p))
        x_p, pos = _read_complex(body, pos, (cfg.Nt, cfg.M_p))
        y_d, pos = _read_complex(body, pos, (cfg.Nr, cfg.M))
        d_hat = None
        if has_d_hat:
            d_hat, pos = _read_complex(body, pos, (cfg.Nt, cfg.M))
        labels = np.frombuffer(body, dtype=np.uint8, count=cfg.Nt * 4 * cfg.M,
                               offset=pos).copy()
        samples.append(Sample(y_p=y_p, x_p=x_p, y_d=y_d, labels=labels,
                              snr_db=snr_db, clipping_db=clipping_db, seed=seed,
                              channel_id=channel_id, d_hat=d_hat))
        offset += record_size
    if offset != len(data):
        raise DatasetFormatError("trailing bytes after last record")
    return samples, cfg


def split(samples: list, fractions: tuple[float, float, float],
          seed: int) -> tuple[list, list, list]:
    """Deterministic shuffled partition into (train, validation, test).

    Sizes are floor(fraction * n); leftovers go one each to the splits in
    declared order.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions {fractions} do not sum to 1")
    if any(f < 0 for f in fractions):
        raise ValueError("fractions must be nonnegative")
    n = len(samples)
    order = np.random.default_rng(seed).permutation(n)
    sizes = [int(np.floor(f * n)) for f in fractions]
    leftover = n - sum(sizes)
    for i in range(leftover):
        sizes[i % 3] += 1
    out = []
    start = 0
    for size in sizes:
        out.append([samples[j] for j in order[start:start + size]])
        start += size
    return tuple(out)
