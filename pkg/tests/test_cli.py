import numpy as np
import pytest

from palink.cli import main
from palink.config import desk_profile, write_config
from palink.dataset import read_dataset
from palink.harness import read_records
from palink.receivers import load_bank


@pytest.fixture
def small_config_file(tmp_path):
    cfg = desk_profile(M=16, L=8, L_cp=8, M_p=16, K=4, snr_db=15.0)
    path = tmp_path / "link.cfg"
    write_config(cfg, path)
    return path


class TestGenData:
    def test_writes_dataset(self, tmp_path, small_config_file, capsys):
        out = tmp_path / "data.plds"
        rc = main(["gen-data", "--config", str(small_config_file),
                   "--n", "20", "--with-zf", "--out", str(out)])
        assert rc == 0
        samples, cfg = read_dataset(out)
        assert len(samples) == 20
        assert all(s.d_hat is not None for s in samples)
        assert "wrote 20 samples" in capsys.readouterr().out

    def test_snr_grid_cycles(self, tmp_path, small_config_file):
        out = tmp_path / "data.plds"
        main(["gen-data", "--config", str(small_config_file), "--n", "6",
              "--snr", "5", "25", "--out", str(out)])
        samples, _ = read_dataset(out)
        assert [s.snr_db for s in samples] == [5.0, 25.0] * 3

    def test_deterministic_for_seed(self, tmp_path, small_config_file):
        outs = []
        for name in ("a.plds", "b.plds"):
            out = tmp_path / name
            main(["gen-data", "--config", str(small_config_file), "--n", "5",
                  "--seed", "7", "--out", str(out)])
            samples, _ = read_dataset(out)
            outs.append(samples)
        for a, b in zip(*outs):
            assert np.array_equal(a.y_d, b.y_d)


class TestTrainAndSweep:
    def test_train_then_sweep(self, tmp_path, small_config_file, capsys):
        data = tmp_path / "data.plds"
        main(["gen-data", "--config", str(small_config_file), "--n", "60",
              "--with-zf", "--out", str(data)])
        bank_dir = tmp_path / "bank"
        rc = main(["train", "--config", str(small_config_file), "--data", str(data),
                   "--kind", "type1", "--groups", "0", "--hidden", "16",
                   "--epochs", "2", "--out", str(bank_dir)])
        assert rc == 0
        kind, bank = load_bank(bank_dir)
        assert kind == "type1" and set(bank) == {0}

        out = tmp_path / "ber.csv"
        rc = main(["sweep", "--config", str(small_config_file),
                   "--receivers", "type1", "--snr", "15",
                   "--min-bits", "10000", "--bank", "type1", str(bank_dir),
                   "--out", str(out)])
        assert rc == 0
        records = read_records(out)
        assert len(records) == 1
        assert records[0].receiver == "type1"
        assert records[0].bits_simulated >= 10_000

    def test_sweep_classical_and_resume(self, tmp_path, small_config_file, capsys):
        out = tmp_path / "ber.csv"
        args = ["sweep", "--config", str(small_config_file),
                "--receivers", "ls_zf_linear", "--snr", "10", "20",
                "--min-bits", "10000", "--out", str(out)]
        main(args)
        first = read_records(out)
        capsys.readouterr()
        main(args)  # resume: nothing recomputed
        assert read_records(out) == first

    def test_bank_kind_mismatch_rejected(self, tmp_path, small_config_file):
        data = tmp_path / "data.plds"
        main(["gen-data", "--config", str(small_config_file), "--n", "30",
              "--out", str(data)])
        bank_dir = tmp_path / "bank"
        main(["train", "--config", str(small_config_file), "--data", str(data),
              "--kind", "data_driven", "--groups", "0", "--hidden", "8",
              "--epochs", "1", "--out", str(bank_dir)])
        with pytest.raises(SystemExit):
            main(["sweep", "--config", str(small_config_file),
                  "--receivers", "type1", "--snr", "15", "--min-bits", "10000",
                  "--bank", "type1", str(bank_dir),
                  "--out", str(tmp_path / "x.csv")])


class TestReport:
    def test_report_adds_wilson_columns(self, tmp_path, small_config_file, capsys):
        csv_path = tmp_path / "ber.csv"
        main(["sweep", "--config", str(small_config_file),
              "--receivers", "ls_zf_nonlinear", "--snr", "15",
              "--min-bits", "10000", "--out", str(csv_path)])
        capsys.readouterr()
        out = tmp_path / "report.csv"
        main(["report", str(csv_path), "--out", str(out)])
        lines = out.read_text().splitlines()
        assert lines[0].endswith("wilson_lo,wilson_hi,reliable")
        fields = lines[1].split(",")
        lo, hi, reliable = float(fields[-3]), float(fields[-2]), int(fields[-1])
        ber = float(fields[5])
        assert lo <= ber <= hi
        assert reliable in (0, 1)

    def test_report_to_stdout(self, tmp_path, small_config_file, capsys):
        csv_path = tmp_path / "ber.csv"
        main(["sweep", "--config", str(small_config_file),
              "--receivers", "ls_zf_linear", "--snr", "10",
              "--min-bits", "10000", "--out", str(csv_path)])
        capsys.readouterr()
        main(["report", str(csv_path)])
        assert "wilson_lo" in capsys.readouterr().out
