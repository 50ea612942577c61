"""Experiment harness: BER sweeps, bank training, CSV emission.

Every sweep cell (receiver, SNR point) is seeded independently, and the
seed lands in its CSV row, so any row can be regenerated exactly.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from palink.config import LinkConfig
from palink.dataset import Sample, simulate_frame
from palink.linear_rx import (build_A_oracle, build_B, ls_estimate, zf_baseline_detect,
                              zf_equalize)
from palink.mld import MldConfig, genie_ls_estimate, mld_detect
from palink.modem import build_pilot_plan, map_bits
from palink.neural import AdamState, MlpNetwork, init_network, train
from palink.pa import RappPaModel
from palink.receivers import (RECEIVER_KINDS, CarrierGroup, assemble_bits,
                              build_input_data_driven, build_input_type1,
                              build_input_type2, carrier_groups, detect, group_labels,
                              input_dim)

ALL_RECEIVERS = ("ls_zf_linear", "ls_zf_nonlinear", "mld_upper", "mld_lower",
                 "type1", "data_driven", "type2")


@dataclass(frozen=True)
class SweepSpec:
    cfg: LinkConfig
    snr_points: tuple[float, ...]
    receivers: tuple[str, ...]
    min_bits: int = 100_000
    seed: int = 0
    k_mld: int = 2

    def __post_init__(self):
        if self.min_bits < 10_000:
            raise ValueError("min_bits must be >= 1e4")
        unknown = set(self.receivers) - set(ALL_RECEIVERS)
        if unknown:
            raise ValueError(f"unknown receivers: {sorted(unknown)}")
        if not all(np.isfinite(self.snr_points)):
            raise ValueError("snr_points must be finite")


@dataclass(frozen=True)
class BerRecord:
    receiver: str
    snr_db: float
    clipping_db: float
    bits_simulated: int
    bit_errors: int
    ber: float
    wall_time_s: float
    seed: int


CSV_COLUMNS = [f.name for f in fields(BerRecord)]


def wilson_interval(errors: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for the error probability."""
    if n == 0:
        return (0.0, 1.0)
    p = errors / n
    denom = 1.0 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def cell_seed(master_seed: int, receiver: str, snr_db: float) -> int:
    """Deterministic per-cell seed mixing receiver and SNR into the master."""
    rid = ALL_RECEIVERS.index(receiver)
    sseq = np.random.SeedSequence([master_seed, rid, int(round(snr_db * 1000))])
    return int(sseq.generate_state(1)[0])


def _frame_seed(cseed: int, frame_index: int) -> int:
    return int(np.random.SeedSequence([cseed, frame_index]).generate_state(1)[0])


def _pa_for(cfg: LinkConfig, nonlinear: bool) -> RappPaModel | None:
    return RappPaModel.from_clipping(cfg.clipping_db, cfg.rho, cfg.delta) if nonlinear else None


def _count_zf_cell(cfg: LinkConfig, cseed: int, min_bits: int,
                   nonlinear: bool) -> tuple[int, int]:
    pa = _pa_for(cfg, nonlinear)
    plan = build_pilot_plan(cfg)
    b = build_B(plan, cfg.M, cfg.L)
    bits = errors = 0
    i = 0
    while bits < min_bits:
        sim = simulate_frame(cfg, pa, _frame_seed(cseed, i), plan=plan)
        est = ls_estimate(sim.y_p, b, cfg.Nt, cfg.L)
        detected = zf_baseline_detect(zf_equalize(sim.y_d, est, cfg.M), cfg.rho)
        errors += int(np.sum(detected != sim.frame.payload_bits))
        bits += detected.size
        i += 1
    return bits, errors


def _count_mld_cell(cfg: LinkConfig, cseed: int, min_bits: int, mode: str,
                    k_mld: int) -> tuple[int, int]:
    pa = _pa_for(cfg, nonlinear=True)
    plan = build_pilot_plan(cfg)
    mld_cfg = MldConfig(k_mld=k_mld, mode=mode)
    searched = np.arange(k_mld)
    upper_rng = np.random.default_rng(np.random.SeedSequence([cseed, 0xF1D]))
    bits = errors = 0
    i = 0
    while bits < min_bits:
        sim = simulate_frame(cfg, pa, _frame_seed(cseed, i), plan=plan)
        a = build_A_oracle(sim.frame, pa, plan, cfg.M, cfg.L)
        est = genie_ls_estimate(sim.y_p, a, cfg.Nt, cfg.L)
        if mode == "lower":
            base = sim.frame.data_symbol.copy()
        else:
            random_bits = upper_rng.integers(0, 2, size=(cfg.Nt, 4 * cfg.M), dtype=np.uint8)
            base = np.sqrt(cfg.rho) * np.vstack(
                [map_bits(random_bits[r]) for r in range(cfg.Nt)])
        detected = mld_detect(sim.y_d, est, base, searched, pa, mld_cfg, cfg.rho)
        truth = sim.frame.payload_bits[:, :4 * k_mld]
        errors += int(np.sum(detected != truth))
        bits += detected.size
        i += 1
    return bits, errors


def frame_observation(cfg: LinkConfig, pa, plan, b, seed: int, kind: str):
    """Input vector and true payload bits for one frame of a DL receiver."""
    sim = simulate_frame(cfg, pa, seed, plan=plan)
    d_hat = None
    if kind in ("type1", "type2"):
        est = ls_estimate(sim.y_p, b, cfg.Nt, cfg.L)
        d_hat = zf_equalize(sim.y_d, est, cfg.M)
    if kind == "type1":
        vec = build_input_type1(d_hat)
    elif kind == "data_driven":
        vec = build_input_data_driven(sim.y_p, plan.sequences, sim.y_d)
    else:
        vec = build_input_type2(sim.y_p, plan.sequences, sim.y_d, d_hat)
    return vec, sim.frame.payload_bits


def _count_dl_cell(cfg: LinkConfig, cseed: int, min_bits: int, kind: str,
                   bank: dict[int, MlpNetwork], batch_frames: int = 200) -> tuple[int, int]:
    pa = _pa_for(cfg, nonlinear=True)
    plan = build_pilot_plan(cfg)
    b = build_B(plan, cfg.M, cfg.L)
    groups = carrier_groups(cfg)
    by_index = {g.group_index: g for g in groups}
    bits_per_frame = 4 * cfg.K * len(bank)
    bits = errors = 0
    i = 0
    while bits < min_bits:
        n = min(batch_frames, -(-(min_bits - bits) // bits_per_frame))
        obs, labels = [], []
        for j in range(n):
            vec, payload = frame_observation(cfg, pa, plan, b, _frame_seed(cseed, i + j), kind)
            obs.append(vec)
            labels.append(payload)
        i += n
        inputs = np.vstack(obs)
        payloads = np.stack(labels)  # (n, Nt, 4M)
        group_bits = detect(kind, inputs, bank, groups, cfg)
        for idx, detected in group_bits.items():
            truth = group_labels(payloads, by_index[idx])
            errors += int(np.sum(detected != truth))
            bits += detected.size
    return bits, errors


def run_cell(receiver: str, cfg: LinkConfig, snr_db: float, cseed: int, min_bits: int,
             k_mld: int = 2, bank: dict[int, MlpNetwork] | None = None) -> BerRecord:
    """Simulate one (receiver, SNR) point until ``min_bits`` are counted."""
    cfg = cfg.replace(snr_db=snr_db)
    start = time.perf_counter()
    if receiver == "ls_zf_linear":
        bits, errors = _count_zf_cell(cfg, cseed, min_bits, nonlinear=False)
    elif receiver == "ls_zf_nonlinear":
        bits, errors = _count_zf_cell(cfg, cseed, min_bits, nonlinear=True)
    elif receiver in ("mld_upper", "mld_lower"):
        bits, errors = _count_mld_cell(cfg, cseed, min_bits, receiver.split("_")[1], k_mld)
    elif receiver in RECEIVER_KINDS:
        if not bank:
            raise ValueError(f"receiver {receiver} needs a trained bank")
        bits, errors = _count_dl_cell(cfg, cseed, min_bits, receiver, bank)
    else:
        raise ValueError(f"unknown receiver {receiver!r}")
    return BerRecord(receiver=receiver, snr_db=snr_db, clipping_db=cfg.clipping_db,
                     bits_simulated=bits, bit_errors=errors, ber=errors / bits,
                     wall_time_s=time.perf_counter() - start, seed=cseed)


def read_records(path) -> list[BerRecord]:
    records = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            records.append(BerRecord(
                receiver=row["receiver"], snr_db=float(row["snr_db"]),
                clipping_db=float(row["clipping_db"]),
                bits_simulated=int(row["bits_simulated"]),
                bit_errors=int(row["bit_errors"]), ber=float(row["ber"]),
                wall_time_s=float(row["wall_time_s"]), seed=int(row["seed"])))
    return records


def write_records(path, records: list[BerRecord]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([getattr(r, c) for c in CSV_COLUMNS])


def run_sweep(spec: SweepSpec, banks: dict[str, dict[int, MlpNetwork]] | None = None,
              out_path=None, resume: bool = True, progress=None) -> list[BerRecord]:
    """Run every (receiver, SNR) cell of the sweep, resumable via the CSV.

    ``banks`` maps learned-receiver kind to its trained bank.  Completed
    cells already present in ``out_path`` are skipped when resuming.
    """
    banks = banks or {}
    records: list[BerRecord] = []
    done = set()
    if out_path is not None and resume and Path(out_path).exists():
        records = read_records(out_path)
        done = {(r.receiver, r.snr_db) for r in records}
    for receiver in spec.receivers:
        for snr in spec.snr_points:
            if (receiver, float(snr)) in done:
                continue
            rec = run_cell(receiver, spec.cfg, float(snr),
                           cell_seed(spec.seed, receiver, float(snr)),
                           spec.min_bits, k_mld=spec.k_mld,
                           bank=banks.get(receiver))
            records.append(rec)
            if progress:
                progress(rec)
            if out_path is not None:
                ordered = sorted(records, key=lambda r: (r.receiver, r.snr_db))
                write_records(out_path, ordered)
    return sorted(records, key=lambda r: (r.receiver, r.snr_db))


# --- bank training ----------------------------------------------------------

def training_matrices(samples: list[Sample], kind: str, cfg: LinkConfig
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Stack samples into (inputs, payload bit tensor) for one receiver kind."""
    need_zf = kind in ("type1", "type2")
    obs = []
    for s in samples:
        if need_zf and s.d_hat is None:
            raise ValueError("samples lack precomputed ZF output; regenerate with ZF")
        if kind == "type1":
            obs.append(build_input_type1(s.d_hat))
        elif kind == "data_driven":
            obs.append(build_input_data_driven(s.y_p, s.x_p, s.y_d))
        else:
            obs.append(build_input_type2(s.y_p, s.x_p, s.y_d, s.d_hat))
    inputs = np.vstack(obs)
    payloads = np.stack([s.labels.reshape(cfg.Nt, 4 * cfg.M) for s in samples])
    return inputs, payloads


def train_bank(samples: list[Sample], kind: str, cfg: LinkConfig,
               group_indices: list[int], hidden: tuple[int, ...] = (256, 128),
               epochs: int = 20, lr: float = 0.001, seed: int = 0,
               val_fraction: float = 0.0, progress=None) -> dict[int, MlpNetwork]:
    """Train one network per requested carrier group, independently seeded."""
    inputs, payloads = training_matrices(samples, kind, cfg)
    groups = {g.group_index: g for g in carrier_groups(cfg)}
    dims = [input_dim(kind, cfg), *hidden, 4 * cfg.K]
    bank = {}
    for idx in group_indices:
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        net = init_network(dims, rng)
        labels = group_labels(payloads, groups[idx]).astype(float)
        result = train(net, inputs, labels, epochs=epochs, batch_size=cfg.batch_size,
                       rng=rng, state=AdamState(lr=lr), val_fraction=val_fraction)
        bank[idx] = net
        if progress:
            progress(idx, result)
    return bank
