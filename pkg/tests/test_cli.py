import csv
import json

import pytest
import yaml

from dressedsim.cli import SWEEP_CSV_HEADER, main


def write_yaml(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def small_sweep_doc(out, **sweep_kw):
    sweep = {
        "mode_freqs": [2.0, 10.0],
        "alpha_abs": [0.0, 0.25, 0.5],
        "truncation": {"mode": "fixed", "n_max": 12},
    }
    sweep.update(sweep_kw)
    return {"output": out, "sweep": sweep}


def read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


class TestSweepCommand:
    def test_missing_config_exits_2(self):
        assert main(["sweep", "--config", "/no/such.yaml"]) == 2

    def test_missing_sweep_section_exits_2(self, tmp_path):
        cfg = write_yaml(tmp_path, {"output": str(tmp_path)})
        assert main(["sweep", "--config", cfg]) == 2

    def test_writes_csv_and_svg(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write_yaml(tmp_path, small_sweep_doc(str(out)))
        assert main(["sweep", "--config", cfg]) == 0
        header, rows = read_rows(out / "sweep.csv")
        assert header == SWEEP_CSV_HEADER
        assert len(rows) == 6
        svg = (out / "sweep.svg").read_text()
        assert svg.lstrip().startswith("<?xml")
        assert "</svg>" in svg
        assert "sweep: 6 rows ok, 0 failed" in capsys.readouterr().out

    def test_zero_coupling_grid_override(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_yaml(tmp_path, small_sweep_doc(str(out)))
        assert main(["sweep", "--config", cfg, "--alpha-grid", "0"]) == 0
        _, rows = read_rows(out / "sweep.csv")
        assert len(rows) == 2
        for rec in rows:
            assert abs(float(rec[4]) - 1.0) < 1e-9

    def test_bad_alpha_grid_exits_2(self, tmp_path):
        cfg = write_yaml(tmp_path, small_sweep_doc(str(tmp_path / "out")))
        assert main(["sweep", "--config", cfg, "--alpha-grid", "0,zero"]) == 2

    def test_failed_rows_exit_1(self, tmp_path, capsys):
        doc = {
            "output": str(tmp_path / "out"),
            "sweep": {
                "mode_freqs": [0.01, 2.0],
                "alpha_abs": [0.2],
                "truncation": {"mode": "adaptive", "hard_cap": 64},
            },
        }
        cfg = write_yaml(tmp_path, doc)
        assert main(["sweep", "--config", cfg]) == 1
        assert "FAILED omega_b=0.01" in capsys.readouterr().out

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_yaml(tmp_path, small_sweep_doc("unused"))
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["sweep", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["sweep", "--config", cfg, "--out", str(out_b)]) == 0
        assert (out_a / "sweep.csv").read_bytes() == (out_b / "sweep.csv").read_bytes()
        assert (out_a / "sweep.svg").read_bytes() == (out_b / "sweep.svg").read_bytes()

    def test_seed_flag_changes_output(self, tmp_path):
        cfg = write_yaml(tmp_path, small_sweep_doc("unused"))
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["sweep", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["sweep", "--config", cfg, "--out", str(out_b), "--seed", "13"]) == 0
        assert (out_a / "sweep.csv").read_bytes() != (out_b / "sweep.csv").read_bytes()

    def test_dressed_readout_flag(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_yaml(tmp_path, small_sweep_doc(str(out)))
        assert main(["sweep", "--config", cfg, "--readout", "dressed"]) == 0
        _, rows = read_rows(out / "sweep.csv")
        for rec in rows:
            assert abs(float(rec[4]) - 1.0) < 1e-9


class TestCircuitCommand:
    def circuit_doc(self, out):
        return {
            "output": out,
            "circuit": {
                "qubit_freqs": [2.0, 2.0],
                "mode_freqs": [2.0],
                "alpha_abs": 0.3,
                "readout": "dressed",
                "truncation": {"mode": "fixed", "n_max": 8},
                "segments": [
                    {"duration": 0.5, "eta": [1.0, 0.0]},
                    {"duration": 0.5, "eta": [0.0, 0.0], "jj": [[0, 1, 0.5]]},
                ],
            },
        }

    def test_runs_and_reports(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write_yaml(tmp_path, self.circuit_doc(str(out)))
        assert main(["circuit", "--config", cfg]) == 0
        header, rows = read_rows(out / "circuit.csv")
        assert header == ["segment", "elapsed", "readout", "fidelity"]
        assert [rec[0] for rec in rows] == ["0", "1", "2"]
        for rec in rows:
            assert rec[2] == "dressed"
            assert abs(float(rec[3]) - 1.0) < 1e-9

    def test_missing_circuit_section_exits_2(self, tmp_path):
        cfg = write_yaml(tmp_path, {"output": str(tmp_path)})
        assert main(["circuit", "--config", cfg]) == 2

    def test_bare_readout_override_degrades(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_yaml(tmp_path, self.circuit_doc(str(out)))
        assert main(["circuit", "--config", cfg, "--readout", "bare"]) == 0
        _, rows = read_rows(out / "circuit.csv")
        assert any(float(rec[3]) < 1.0 - 1e-4 for rec in rows)


class TestVerifyCommand:
    def test_passes(self, capsys):
        assert main(["verify"]) == 0
        out = capsys.readouterr().out
        assert "overall: PASS" in out
        assert "FAIL" not in out

    def test_json_report(self, capsys):
        assert main(["verify", "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True
        assert any(c["name"] == "frame_identity" for c in report["checks"])

    def test_injected_fault_exits_1(self, capsys):
        assert main(["verify", "--inject-nonhermitian"]) == 1
        assert "FAIL" in capsys.readouterr().out


class TestPlotCommand:
    def make_csv(self, tmp_path, rows, header=None):
        path = tmp_path / "sweep.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header or SWEEP_CSV_HEADER)
            writer.writerows(rows)
        return str(path)

    def test_round_trip(self, tmp_path):
        rows = [
            [wb, a, 0.0, 16, f, 0.0, 0.0]
            for wb in (0.01, 2.0, 10.0)
            for a, f in ((0.0, 1.0), (0.25, 0.99), (0.5, 0.95))
        ]
        path = self.make_csv(tmp_path, rows)
        svg = tmp_path / "fig.svg"
        assert main(["plot", path, str(svg)]) == 0
        text = svg.read_text()
        assert "</svg>" in text
        # at least one rendered line element per bath frequency
        assert text.count('id="line2d') >= 3

    def test_deterministic(self, tmp_path):
        rows = [[2.0, a, 0.0, 16, 1.0 - a / 10.0, 0.0, 0.0] for a in (0.0, 0.25, 0.5)]
        path = self.make_csv(tmp_path, rows)
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert main(["plot", path, str(a)]) == 0
        assert main(["plot", path, str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["plot", str(tmp_path / "nope.csv"), str(tmp_path / "x.svg")]) == 2

    def test_wrong_header_exits_2(self, tmp_path):
        path = self.make_csv(tmp_path, [], header=["a", "b"])
        assert main(["plot", path, str(tmp_path / "x.svg")]) == 2

    def test_no_data_rows_exits_2(self, tmp_path):
        path = self.make_csv(tmp_path, [])
        assert main(["plot", path, str(tmp_path / "x.svg")]) == 2

    def test_malformed_row_exits_2(self, tmp_path):
        path = self.make_csv(tmp_path, [[2.0, 0.1, 0.0, 16, "broken", 0.0, 0.0]])
        assert main(["plot", path, str(tmp_path / "x.svg")]) == 2

    def test_nan_rows_are_skipped(self, tmp_path):
        rows = [
            [2.0, 0.0, 0.0, 16, 1.0, 0.0, 0.0],
            [0.01, 0.1, 0.0, -1, "nan", "nan", "nan"],
        ]
        path = self.make_csv(tmp_path, rows)
        assert main(["plot", path, str(tmp_path / "x.svg")]) == 0
