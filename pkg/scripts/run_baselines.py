#!/usr/bin/env python3
"""Classical benchmark sweep: LS+ZF (linear and nonlinear PA) and genie MLD.

Writes one CSV with all four curves over the SNR grid.  Resumable: rerun
with the same --out to continue after an interruption.
"""

import argparse
from pathlib import Path

from palink.config import desk_profile, paper_profile
from palink.harness import SweepSpec, run_sweep, wilson_interval


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--profile", choices=["desk", "paper"], default="desk")
    ap.add_argument("--snr", type=float, nargs="+", default=[5, 10, 15, 20, 25])
    ap.add_argument("--min-bits", type=int, default=100_000)
    ap.add_argument("--k-mld", type=int, default=2)
    ap.add_argument("--clipping", type=float, default=7.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/baselines.csv"))
    args = ap.parse_args()

    cfg = (paper_profile() if args.profile == "paper" else desk_profile())
    cfg = cfg.replace(clipping_db=args.clipping)
    args.out.parent.mkdir(parents=True, exist_ok=True)

    spec = SweepSpec(cfg=cfg, snr_points=tuple(args.snr),
                     receivers=("ls_zf_linear", "ls_zf_nonlinear",
                                "mld_upper", "mld_lower"),
                     min_bits=args.min_bits, seed=args.seed, k_mld=args.k_mld)

    def progress(rec):
        lo, hi = wilson_interval(rec.bit_errors, rec.bits_simulated)
        print(f"{rec.receiver:>16s} {rec.snr_db:5.1f} dB  ber={rec.ber:.3e} "
              f"[{lo:.3e}, {hi:.3e}]  {rec.wall_time_s:.1f}s", flush=True)

    run_sweep(spec, out_path=args.out, progress=progress)
    print(f"done: {args.out}")


if __name__ == "__main__":
    main()
