"""Tests for the command-line interface."""

import csv
import json

import numpy as np
import pytest

from fracvol.cli import main, parse_vol


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestParseVol:
    def test_tanh(self):
        v = parse_vol("tanh:0.1,0.05")
        assert v(np.array([0.0]))[0] == pytest.approx(0.1)

    def test_const(self):
        v = parse_vol("const:0.3")
        assert v(np.array([2.0]))[0] == pytest.approx(0.3)

    def test_malformed(self):
        with pytest.raises(ValueError):
            parse_vol("garbage")
        with pytest.raises(ValueError):
            parse_vol("tanh:0.1")


class TestExitCodes:
    def test_bad_hurst_is_config_error(self, capsys):
        assert main(["smile", "--hurst", "2.0", "--xs", "0.02"]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_bad_vol_descriptor(self, capsys):
        assert main(["smile", "--vol", "nope", "--xs", "0.02"]) == 2

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"bogus": 1}')
        assert main(["smile", "--config", str(cfg), "--xs", "0.02"]) == 2

    def test_invalid_config_json(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        assert main(["smile", "--config", str(cfg)]) == 2

    def test_unknown_flag_rejected(self):
        with pytest.raises(SystemExit) as exc:
            main(["smile", "--frobnicate"])
        assert exc.value.code == 2


class TestSmileCommand:
    def test_csv_output(self, tmp_path):
        out = tmp_path / "smile.csv"
        assert main(["smile", "--xs", "0.02,0.04", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert [r["x"] for r in rows] == ["0.02", "0.04"]
        for r in rows:
            assert 0.09 < float(r["sigma0"]) < 0.12
            assert float(r["lambda_star"]) > 0.0

    def test_constant_vol_flat(self, tmp_path):
        out = tmp_path / "flat.csv"
        assert main(["smile", "--vol", "const:0.2",
                     "--xs", "0.02,0.05,-0.03", "--out", str(out)]) == 0
        sig = [float(r["sigma0"]) for r in read_csv(out)]
        np.testing.assert_allclose(sig, 0.2, rtol=1e-4)

    def test_json_format(self, tmp_path):
        out = tmp_path / "smile.json"
        assert main(["smile", "--xs", "0.02", "--format", "json",
                     "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["points"][0]["x"] == 0.02


class TestMcCommand:
    def test_deterministic_output(self, tmp_path):
        args = ["mc", "--xs", "0.02", "--paths", "4000", "--steps", "20",
                "--seed", "7"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_file_overridden_by_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"paths": 2000, "steps": 10, "seed": 3}))
        out = tmp_path / "mc.csv"
        assert main(["mc", "--xs", "0.02", "--config", str(cfg),
                     "--paths", "1000", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 1
        assert 0.05 < float(rows[0]["implied_vol"]) < 0.2


class TestLdpCheckCommand:
    def test_columns_and_gap(self, tmp_path):
        out = tmp_path / "ldp.csv"
        code = main(["ldp-check", "--x", "0.1", "--paths", "50000",
                     "--steps", "50", "--maturities", "0.01,0.002",
                     "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        lam = float(rows[0]["lambda_star"])
        gaps = [abs(float(r["neg_t2h_log_prob"]) - lam) for r in rows]
        assert gaps[1] < gaps[0]


class TestLargetimeCommand:
    def test_rate_column_matches_formula(self, tmp_path):
        out = tmp_path / "lt.csv"
        assert main(["largetime", "--beta", "0.5", "--sigma", "1.0",
                     "--s-grid", "1.0,2.0", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert float(rows[0]["cev_rate"]) == pytest.approx(2.0)
        assert float(rows[1]["cev_rate"]) == pytest.approx(
            2.0 ** 1.0 * 2.0, rel=1e-12)


class TestSimulateFbmCommand:
    def test_shape_and_increment_normality(self, tmp_path):
        out = tmp_path / "paths.csv"
        assert main(["simulate-fbm", "--hurst", "0.5", "--paths", "20000",
                     "--steps", "50", "--maturity", "1.0", "--seed", "2",
                     "--out", str(out)]) == 0
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert data.shape == (20000, 51)
        inc = np.diff(data, axis=1).ravel()
        z = inc / inc.std()
        skew = np.mean(z ** 3)
        assert abs(skew) < 0.05


class TestReproduceTables:
    def test_writes_both_tables(self, tmp_path):
        code = main(["reproduce-tables", "--paths", "2000", "--steps", "20",
                     "--out", str(tmp_path)])
        assert code == 0
        t1 = read_csv(tmp_path / "table1.csv")
        t2 = read_csv(tmp_path / "table2.csv")
        assert len(t1) == 6 and len(t2) == 8
        for r in t1 + t2:
            assert 0.08 < float(r["sigma0"]) < 0.12
