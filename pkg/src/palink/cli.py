"""Command-line entry points: gen-data, train, sweep, report."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from palink import harness
from palink.config import LinkConfig, desk_profile, paper_profile, read_config
from palink.dataset import derive_seeds, generate_sample, read_dataset, write_dataset
from palink.harness import SweepSpec, run_sweep, train_bank, wilson_interval
from palink.modem import build_pilot_plan
from palink.pa import RappPaModel
from palink.receivers import RECEIVER_KINDS, load_bank, save_bank


def _load_cfg(args) -> LinkConfig:
    if args.config:
        return read_config(args.config)
    return paper_profile() if args.profile == "paper" else desk_profile()


def _add_common(p):
    p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    p.add_argument("--profile", choices=["desk", "paper"], default="desk")
    p.add_argument("--seed", type=int, default=0)


def cmd_gen_data(args) -> int:
    cfg = _load_cfg(args)
    if args.snr is not None:
        snrs = args.snr
    else:
        snrs = [cfg.snr_db]
    n = args.n or cfg.n_train
    plan = build_pilot_plan(cfg)
    pa = None
    if np.isfinite(cfg.clipping_db):
        pa = RappPaModel.from_clipping(cfg.clipping_db, cfg.rho, cfg.delta)
    seeds = derive_seeds(args.seed, n)
    samples = []
    for i, seed in enumerate(seeds):
        c = cfg.replace(snr_db=snrs[i % len(snrs)])
        samples.append(generate_sample(c, seed, pa=pa, plan=plan, with_zf=args.with_zf))
    write_dataset(args.out, samples, cfg)
    print(f"wrote {len(samples)} samples to {args.out} "
          f"(SNRs {snrs}, clipping {cfg.clipping_db} dB)")
    return 0


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    samples, data_cfg = read_dataset(args.data)
    if args.config is None:
        cfg = data_cfg
    group_indices = args.groups if args.groups else list(range(4))
    def progress(idx, result):
        print(f"group {idx}: final loss {result.loss_trace[-1]:.5f}")
    bank = train_bank(samples, args.kind, cfg, group_indices,
                      hidden=tuple(args.hidden), epochs=args.epochs, lr=args.lr,
                      seed=args.seed, progress=progress)
    manifest = save_bank(bank, args.kind, args.out)
    print(f"wrote bank manifest {manifest}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    if args.clipping is not None:
        cfg = cfg.replace(clipping_db=args.clipping)
    banks = {}
    for kind, directory in args.bank or []:
        if kind not in RECEIVER_KINDS:
            raise SystemExit(f"unknown receiver kind {kind!r}")
        stored_kind, bank = load_bank(directory)
        if stored_kind != kind:
            raise SystemExit(f"bank at {directory} was trained for {stored_kind}, not {kind}")
        banks[kind] = bank
    spec = SweepSpec(cfg=cfg, snr_points=tuple(args.snr),
                     receivers=tuple(args.receivers), min_bits=args.min_bits,
                     seed=args.seed, k_mld=args.k_mld)
    def progress(rec):
        lo, hi = wilson_interval(rec.bit_errors, rec.bits_simulated)
        flag = "" if rec.bit_errors >= 100 else "  [unreliable: <100 errors]"
        print(f"{rec.receiver:>16s}  {rec.snr_db:5.1f} dB  ber={rec.ber:.3e} "
              f"[{lo:.3e}, {hi:.3e}]  ({rec.wall_time_s:.1f}s){flag}")
    run_sweep(spec, banks=banks, out_path=args.out, resume=not args.no_resume,
              progress=progress)
    print(f"sweep complete: {args.out}")
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.inputs:
        rows.extend(harness.read_records(path))
    rows.sort(key=lambda r: (r.clipping_db, r.receiver, r.snr_db))
    lines = ["receiver,snr_db,clipping_db,bits_simulated,bit_errors,ber,"
             "wilson_lo,wilson_hi,reliable"]
    for r in rows:
        lo, hi = wilson_interval(r.bit_errors, r.bits_simulated)
        reliable = r.bit_errors >= 100
        lines.append(f"{r.receiver},{r.snr_db},{r.clipping_db},{r.bits_simulated},"
                     f"{r.bit_errors},{r.ber},{lo},{hi},{int(reliable)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="palink",
                                     description="MIMO-OFDM link experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="materialize a dataset")
    _add_common(p)
    p.add_argument("--n", type=int, default=None, help="sample count (default: cfg.n_train)")
    p.add_argument("--snr", type=float, nargs="+", default=None,
                   help="SNR grid cycled over samples (default: cfg.snr_db)")
    p.add_argument("--with-zf", action="store_true",
                   help="precompute ZF outputs (needed for type1/type2 training)")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a receiver bank")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--kind", choices=RECEIVER_KINDS, required=True)
    p.add_argument("--groups", type=int, nargs="+", default=None)
    p.add_argument("--hidden", type=int, nargs="+", default=[256, 128])
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--out", type=Path, required=True, help="bank directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="BER sweep over SNR")
    _add_common(p)
    p.add_argument("--receivers", nargs="+", default=list(harness.ALL_RECEIVERS))
    p.add_argument("--snr", type=float, nargs="+", default=[5, 10, 15, 20, 25])
    p.add_argument("--min-bits", type=int, default=100_000)
    p.add_argument("--k-mld", type=int, default=2)
    p.add_argument("--clipping", type=float, default=None)
    p.add_argument("--bank", nargs=2, action="append", metavar=("KIND", "DIR"),
                   help="trained bank for a learned receiver; repeatable")
    p.add_argument("--no-resume", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="aggregate sweep CSVs with Wilson intervals")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
