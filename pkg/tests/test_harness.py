import numpy as np
import pytest

from palink.config import desk_profile
from palink.dataset import derive_seeds, generate_sample
from palink.harness import (ALL_RECEIVERS, CSV_COLUMNS, BerRecord, SweepSpec,
                            cell_seed, read_records, run_cell, run_sweep,
                            train_bank, wilson_interval, write_records)
from palink.receivers import carrier_groups


def small_cfg(**over):
    return desk_profile(M=16, L=8, L_cp=8, M_p=16, K=4, **over)


class TestWilson:
    def test_known_value(self):
        # 5 errors in 100 trials, z=1.96: standard Wilson bounds
        lo, hi = wilson_interval(5, 100)
        assert lo == pytest.approx(0.0215, abs=2e-3)
        assert hi == pytest.approx(0.1118, abs=2e-3)

    def test_zero_trials(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_interval_contains_point_estimate(self):
        for errors, n in [(0, 50), (1, 10), (999, 1000)]:
            lo, hi = wilson_interval(errors, n)
            assert lo <= errors / n <= hi

    def test_shrinks_with_n(self):
        lo1, hi1 = wilson_interval(10, 100)
        lo2, hi2 = wilson_interval(100, 1000)
        assert hi2 - lo2 < hi1 - lo1


class TestSeeding:
    def test_cell_seed_deterministic(self):
        assert cell_seed(0, "type1", 5.0) == cell_seed(0, "type1", 5.0)

    def test_cell_seed_distinguishes_everything(self):
        seeds = {cell_seed(m, r, s) for m in (0, 1)
                 for r in ("type1", "mld_upper") for s in (5.0, 10.0)}
        assert len(seeds) == 8


class TestSweepSpec:
    def test_min_bits_floor(self):
        with pytest.raises(ValueError):
            SweepSpec(small_cfg(), (5.0,), ("type1",), min_bits=5000)

    def test_unknown_receiver_named(self):
        with pytest.raises(ValueError, match="bogus"):
            SweepSpec(small_cfg(), (5.0,), ("bogus",))

    def test_nonfinite_snr_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(small_cfg(), (float("inf"),), ("type1",))


class TestRunCell:
    def test_zf_record_fields(self):
        cfg = small_cfg(snr_db=15.0)
        rec = run_cell("ls_zf_nonlinear", cfg, 15.0, cseed=7, min_bits=10_000)
        assert rec.receiver == "ls_zf_nonlinear"
        assert rec.bits_simulated >= 10_000
        assert rec.ber == rec.bit_errors / rec.bits_simulated
        assert 0.0 <= rec.ber <= 1.0

    def test_row_reproducible_from_seed(self):
        # acceptance-style check at unit scale: rerunning a cell with the
        # recorded seed reproduces bits and errors exactly
        cfg = small_cfg(snr_db=10.0)
        a = run_cell("ls_zf_linear", cfg, 10.0, cseed=123, min_bits=10_000)
        b = run_cell("ls_zf_linear", cfg, 10.0, cseed=123, min_bits=10_000)
        assert (a.bits_simulated, a.bit_errors) == (b.bits_simulated, b.bit_errors)

    def test_mld_cell_runs(self):
        cfg = small_cfg(snr_db=15.0)
        rec = run_cell("mld_lower", cfg, 15.0, cseed=5, min_bits=10_000, k_mld=1)
        assert rec.bits_simulated >= 10_000

    def test_dl_cell_requires_bank(self):
        cfg = small_cfg()
        with pytest.raises(ValueError, match="bank"):
            run_cell("type1", cfg, 10.0, cseed=1, min_bits=10_000)

    def test_unknown_receiver(self):
        with pytest.raises(ValueError):
            run_cell("nope", small_cfg(), 10.0, cseed=1, min_bits=10_000)


class TestCsv:
    def _records(self):
        return [
            BerRecord("type1", 5.0, 7.0, 100000, 12345, 0.12345, 3.2, 99),
            BerRecord("mld_lower", 15.0, 7.0, 100096, 42, 42 / 100096, 60.1, 7),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "ber.csv"
        recs = self._records()
        write_records(path, recs)
        assert read_records(path) == recs

    def test_header_matches_schema(self, tmp_path):
        path = tmp_path / "ber.csv"
        write_records(path, [])
        header = path.read_text().splitlines()[0].split(",")
        assert header == CSV_COLUMNS
        assert header == ["receiver", "snr_db", "clipping_db", "bits_simulated",
                          "bit_errors", "ber", "wall_time_s", "seed"]


class TestSweep:
    def test_resume_skips_done_cells(self, tmp_path):
        cfg = small_cfg()
        spec = SweepSpec(cfg, (5.0, 15.0), ("ls_zf_linear",), min_bits=10_000, seed=3)
        path = tmp_path / "sweep.csv"
        seen = []
        run_sweep(spec, out_path=path, progress=lambda r: seen.append(r.snr_db))
        assert seen == [5.0, 15.0]
        seen.clear()
        records = run_sweep(spec, out_path=path, progress=lambda r: seen.append(r.snr_db))
        assert seen == []  # everything already on disk
        assert len(records) == 2

    def test_no_resume_recomputes(self, tmp_path):
        cfg = small_cfg()
        spec = SweepSpec(cfg, (10.0,), ("ls_zf_linear",), min_bits=10_000, seed=3)
        path = tmp_path / "sweep.csv"
        a = run_sweep(spec, out_path=path)
        b = run_sweep(spec, out_path=path, resume=False)
        assert a[0].bit_errors == b[0].bit_errors

    def test_records_sorted(self, tmp_path):
        cfg = small_cfg()
        spec = SweepSpec(cfg, (15.0, 5.0), ("ls_zf_linear", "ls_zf_nonlinear"),
                         min_bits=10_000, seed=1)
        records = run_sweep(spec)
        keys = [(r.receiver, r.snr_db) for r in records]
        assert keys == sorted(keys)


class TestTrainBank:
    def test_trains_requested_groups(self):
        cfg = small_cfg(snr_db=15.0, n_train=80, batch_size=20)
        samples = [generate_sample(cfg, s, with_zf=True)
                   for s in derive_seeds(11, 80)]
        bank = train_bank(samples, "type1", cfg, [0, 2], hidden=(16,), epochs=2, seed=5)
        assert set(bank) == {0, 2}
        for net in bank.values():
            assert net.mode == "inference"
            assert net.output_dim == 4 * cfg.K

    def test_missing_zf_rejected_for_type1(self):
        cfg = small_cfg(n_train=10)
        samples = [generate_sample(cfg, s) for s in derive_seeds(12, 10)]
        with pytest.raises(ValueError, match="ZF"):
            train_bank(samples, "type1", cfg, [0], hidden=(8,), epochs=1)

    def test_deterministic_given_seed(self):
        cfg = small_cfg(snr_db=15.0, batch_size=20)
        samples = [generate_sample(cfg, s) for s in derive_seeds(13, 60)]
        a = train_bank(samples, "data_driven", cfg, [1], hidden=(8,), epochs=2, seed=9)
        b = train_bank(samples, "data_driven", cfg, [1], hidden=(8,), epochs=2, seed=9)
        for la, lb in zip(a[1].layers, b[1].layers):
            assert np.array_equal(la.w, lb.w)

    def test_dl_cell_end_to_end(self):
        # a tiny trained bank can be swept; BER must be well-defined
        cfg = small_cfg(snr_db=20.0, batch_size=20)
        samples = [generate_sample(cfg, s, with_zf=True)
                   for s in derive_seeds(14, 60)]
        bank = train_bank(samples, "type1", cfg, [0], hidden=(16,), epochs=3, seed=2)
        rec = run_cell("type1", cfg, 20.0, cseed=4, min_bits=10_000, bank=bank)
        assert rec.bits_simulated >= 10_000
        assert 0.0 <= rec.ber <= 1.0

    def test_full_bank_covers_all_groups(self):
        cfg = small_cfg()
        n_groups = len(carrier_groups(cfg))
        assert n_groups == cfg.Nt * cfg.M // cfg.K
