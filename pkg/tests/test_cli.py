"""CLI behavior: flag parsing, config-file precedence, round-trip printing,
and exit codes."""

import io

import pytest

from rtcap import analytics as an
from rtcap.cli import dispatch


def run_cli(argv):
    out = io.StringIO()
    code = dispatch(argv, out=out)
    return code, out.getvalue()


def data_lines(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")]


class TestAnalyze:
    def test_edf_balanced_example(self):
        code, out = run_cli(["analyze", "--topology", "balanced",
                             "--scheduler", "edf", "--n", "100", "--B", "250000",
                             "--u", "10", "--N", "5", "--alpha", "2"])
        assert code == 0
        header, row = data_lines(out)
        assert "bits_per_s" in header
        fields = row.split()
        assert fields[0] == "EDF"
        # printed value round-trips bit-for-bit to the library result
        params = an.AnalyticParams(node_count=100, bandwidth=250000.0,
                                   neighborhood_bound=10, inversion_factor=2.0,
                                   path_length=5.0)
        assert float(fields[3]) == an.rtcc_balanced(an.EDF, params).value
        assert float(fields[3]) == 250000.0

    def test_both_schedulers_ordered(self):
        code, out = run_cli(["analyze", "--n", "100", "--B", "250000",
                             "--u", "10", "--N", "5"])
        assert code == 0
        rows = data_lines(out)[1:]
        assert [r.split()[0] for r in rows] == ["DM", "EDF"]
        assert float(rows[0].split()[3]) <= float(rows[1].split()[3])

    def test_ratio_at_unity(self):
        code, out = run_cli(["analyze", "--ratio", "--Kd", "1"])
        assert code == 0
        assert float(out.strip()) == 1.0

    def test_convergecast_round_trip(self):
        code, out = run_cli(["analyze", "--topology", "convergecast",
                             "--scheduler", "dm", "--m", "10", "--Kd", "4",
                             "--sinks", "4", "--B", "1000", "--alpha", "1"])
        assert code == 0
        row = data_lines(out)[1].split()
        params = an.AnalyticParams(node_count=100, bandwidth=1000.0,
                                   neighborhood_bound=10, inversion_factor=1.0,
                                   path_length=5.0, nodes_per_disk=10.0,
                                   max_hops=4.0, sink_count=4)
        assert float(row[3]) == an.rtcc_convergecast(an.DM, params).value

    def test_feasibility_reports(self):
        code, out = run_cli(["analyze", "--vqs", "0.381966,0.381966"])
        assert code == 0
        lines = data_lines(out)
        dm = next(ln for ln in lines if ln.startswith("DM"))
        edf = next(ln for ln in lines if ln.startswith("EDF"))
        assert dm.split()[1] == "yes"
        assert float(dm.split()[2]) == pytest.approx(1.0, abs=1e-6)
        assert float(edf.split()[2]) == pytest.approx(0.763932, abs=1e-6)

    def test_defaults_echoed(self):
        code, out = run_cli(["analyze"])
        assert code == 0
        assert out.startswith("# params ")
        assert "alpha=2.0" in out

    def test_csv_output(self, tmp_path):
        dest = tmp_path / "bounds.csv"
        code, _ = run_cli(["analyze", "--scheduler", "both", "--csv", str(dest)])
        assert code == 0
        lines = dest.read_text().splitlines()
        assert lines[1].startswith("scheduler,")
        assert len(lines) == 4

    def test_invalid_alpha_is_usage_error(self, capsys):
        code, _ = run_cli(["analyze", "--alpha", "9"])
        assert code == 1
        assert "invalid parameters" in capsys.readouterr().err


class TestUsage:
    def test_no_arguments(self, capsys):
        code, _ = run_cli([])
        assert code == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag(self, capsys):
        code, _ = run_cli(["analyze", "--frobnicate"])
        assert code == 1

    def test_unknown_command(self):
        code, _ = run_cli(["explode"])
        assert code == 1


class TestConfigFile:
    def test_file_values_used_and_overridden(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[analytics]\nN = 5\nB = 250000\nu = 10\nn = 100\n"
                       "alpha = 2\n")
        code, out = run_cli(["analyze", "--config", str(cfg),
                             "--scheduler", "edf"])
        assert code == 0
        assert float(data_lines(out)[1].split()[3]) == 250000.0
        # a flag takes precedence over the file
        code, out = run_cli(["analyze", "--config", str(cfg),
                             "--scheduler", "edf", "--N", "10"])
        assert float(data_lines(out)[1].split()[3]) == 125000.0

    def test_unknown_keys_rejected_by_name(self, tmp_path, capsys):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[analytics]\nbandwidht = 1\n[simulation]\nrate = 1\n")
        code, _ = run_cli(["analyze", "--config", str(cfg)])
        assert code == 1
        assert "analytics.bandwidht" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        code, _ = run_cli(["analyze", "--config", "/nonexistent.ini"])
        assert code == 1


class TestSimulate:
    def test_small_run(self):
        code, out = run_cli(["simulate", "--rows", "3", "--cols", "3",
                             "--radio-range", "15", "--sinks", "1",
                             "--rate", "2", "--duration", "5", "--reps", "2",
                             "--seed", "7"])
        assert code == 0
        assert "# measured u=" in out
        reps = [ln for ln in data_lines(out) if ln.startswith("replication")]
        assert len(reps) == 2
        assert "critical_capacity" in data_lines(out)[-1]

    def test_deterministic_output(self):
        argv = ["simulate", "--rows", "3", "--cols", "3", "--radio-range", "15",
                "--sinks", "1", "--rate", "2", "--duration", "5", "--reps", "1"]
        assert run_cli(argv) == run_cli(argv)

    def test_verbose_adds_delay_stats(self):
        code, out = run_cli(["simulate", "-v", "--rows", "3", "--cols", "3",
                             "--radio-range", "15", "--sinks", "1",
                             "--rate", "2", "--duration", "5", "--reps", "1"])
        assert code == 0
        assert "delays: n=" in out

    def test_event_log_written(self, tmp_path):
        log = tmp_path / "events.log"
        code, _ = run_cli(["simulate", "--rows", "2", "--cols", "2",
                           "--radio-range", "15", "--sinks", "1",
                           "--rate", "2", "--duration", "5", "--reps", "1",
                           "--event-log", str(log)])
        assert code == 0
        assert any(" arrival " in ln for ln in log.read_text().splitlines())

    def test_disconnected_network_is_runtime_error(self, capsys):
        code, _ = run_cli(["simulate", "--rows", "1", "--cols", "3",
                           "--spacing", "100", "--radio-range", "5",
                           "--sinks", "1", "--jitter", "0"])
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestSweep:
    def test_balanced_sweep_writes_csv(self, tmp_path):
        code, out = run_cli(["sweep", "--kind", "balanced_curves",
                             "--values", "1,2,3", "--out-dir", str(tmp_path)])
        assert code == 0
        files = list(tmp_path.glob("balanced_curves_*.csv"))
        assert len(files) == 1
        assert str(files[0]) in out
        assert len(data_lines(files[0].read_text())) == 4  # header + 3 rows

    def test_out_dir_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RTCAP_OUT_DIR", str(tmp_path))
        code, _ = run_cli(["sweep", "--kind", "convergecast_curves",
                           "--values", "1,4"])
        assert code == 0
        assert list(tmp_path.glob("convergecast_curves_*.csv"))

    def test_sim_sweep_small(self, tmp_path):
        code, out = run_cli(["sweep", "--kind", "sink_sweep", "--values", "1,2",
                             "--rows", "5", "--cols", "5", "--radio-range", "15",
                             "--packet-size", "12500", "--duration", "5",
                             "--reps", "2", "--load-factor", "3",
                             "--out-dir", str(tmp_path)])
        assert code == 0
        csv = next(tmp_path.glob("sink_sweep_25_*.csv")).read_text()
        assert len(data_lines(csv)) == 3
