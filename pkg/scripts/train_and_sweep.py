#!/usr/bin/env python3
"""Full learned-receiver pipeline: generate data, train the three banks,
sweep BER over SNR against the classical baselines.

Training data is generated once per SNR training grid and shared by all
three receiver kinds.  Banks are saved under --workdir so the sweep can be
rerun without retraining.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from palink.config import desk_profile, paper_profile
from palink.dataset import derive_seeds, generate_sample
from palink.harness import SweepSpec, run_sweep, train_bank, wilson_interval
from palink.modem import build_pilot_plan
from palink.pa import RappPaModel
from palink.receivers import RECEIVER_KINDS, load_bank, save_bank


# Per-kind training settings: (hidden sizes, epochs, learning rate).  The
# data-driven net needs the most capacity and epochs; the type-2 net, whose
# input embeds the equalized symbols, generalizes best small and short.
KIND_HP = {
    "type1": ((256, 128), 20, 0.001),
    "data_driven": ((512, 256), 60, 0.003),
    "type2": ((128, 64), 10, 0.01),
}


def build_samples(cfg, snr_grid, n, seed):
    plan = build_pilot_plan(cfg)
    pa = RappPaModel.from_clipping(cfg.clipping_db, cfg.rho, cfg.delta)
    samples = []
    for i, s in enumerate(derive_seeds(seed, n)):
        c = cfg.replace(snr_db=snr_grid[i % len(snr_grid)])
        samples.append(generate_sample(c, s, pa=pa, plan=plan, with_zf=True))
    return samples


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--profile", choices=["desk", "paper"], default="desk")
    ap.add_argument("--snr", type=float, nargs="+", default=[5, 10, 15, 20, 25])
    ap.add_argument("--train-snr", type=float, nargs="+", default=None,
                    help="SNR grid cycled over training samples (default: sweep grid)")
    ap.add_argument("--n-train", type=int, default=None)
    ap.add_argument("--groups", type=int, nargs="+", default=[0, 1, 2, 3])
    ap.add_argument("--hidden", type=int, nargs="+", default=None,
                    help="override hidden sizes for all kinds")
    ap.add_argument("--epochs", type=int, default=None,
                    help="override epoch count for all kinds")
    ap.add_argument("--lr", type=float, default=None,
                    help="override learning rate for all kinds")
    ap.add_argument("--min-bits", type=int, default=100_000)
    ap.add_argument("--clipping", type=float, default=7.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workdir", type=Path, default=Path("results/learned"))
    args = ap.parse_args()

    cfg = (paper_profile() if args.profile == "paper" else desk_profile())
    cfg = cfg.replace(clipping_db=args.clipping)
    n_train = args.n_train or cfg.n_train
    train_snr = args.train_snr or args.snr
    args.workdir.mkdir(parents=True, exist_ok=True)

    banks = {}
    missing = [k for k in RECEIVER_KINDS
               if not (args.workdir / k / "manifest.txt").exists()]
    if missing:
        t0 = time.time()
        samples = build_samples(cfg, train_snr, n_train, args.seed)
        print(f"generated {n_train} samples in {time.time() - t0:.0f}s", flush=True)
        for kind in missing:
            hidden, epochs, lr = KIND_HP[kind]
            t0 = time.time()
            bank = train_bank(samples, kind, cfg, args.groups,
                              hidden=tuple(args.hidden or hidden),
                              epochs=args.epochs or epochs,
                              lr=args.lr or lr, seed=args.seed,
                              progress=lambda i, r: print(
                                  f"  {kind} group {i}: loss {r.loss_trace[-1]:.4f}",
                                  flush=True))
            save_bank(bank, kind, args.workdir / kind)
            print(f"{kind}: trained {len(bank)} nets in {time.time() - t0:.0f}s",
                  flush=True)
    for kind in RECEIVER_KINDS:
        stored_kind, banks[kind] = load_bank(args.workdir / kind)
        assert stored_kind == kind

    spec = SweepSpec(cfg=cfg, snr_points=tuple(args.snr),
                     receivers=("ls_zf_nonlinear", *RECEIVER_KINDS),
                     min_bits=args.min_bits, seed=args.seed)

    def progress(rec):
        lo, hi = wilson_interval(rec.bit_errors, rec.bits_simulated)
        print(f"{rec.receiver:>16s} {rec.snr_db:5.1f} dB  ber={rec.ber:.3e} "
              f"[{lo:.3e}, {hi:.3e}]  {rec.wall_time_s:.1f}s", flush=True)

    out = args.workdir / "ber.csv"
    run_sweep(spec, banks=banks, out_path=out, progress=progress)
    print(f"done: {out}")


if __name__ == "__main__":
    main()
