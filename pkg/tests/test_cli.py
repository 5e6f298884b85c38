"""CLI behavior: formats, exit codes, determinism, stream protocol."""

import io
import json

import numpy as np
import pytest

from lrdshift import LrdModel, ScaleConfig, ThresholdResult, DetectionConfig, detect, synthesize_fgn
from lrdshift.cli import main, read_pvalue_csv, read_series


def run(argv):
    return main(argv)


@pytest.fixture
def spiked_series(tmp_path):
    """A unit background with a +9 spike at position 300 (1-based)."""
    x = synthesize_fgn(LrdModel(0.9), 1024, seed=88).values.copy()
    x[299] += 9.0
    path = tmp_path / "spiked.txt"
    path.write_text("".join(repr(float(v)) + "\n" for v in x))
    return path, x


class TestSynth:
    def test_writes_n_lines_deterministically(self, tmp_path):
        out = tmp_path / "a.txt"
        assert run(["synth", "--hurst", "0.9", "--n", "256", "--seed", "7", "--out", str(out)]) == 0
        first = out.read_bytes()
        assert len(first.splitlines()) == 256
        assert run(["synth", "--hurst", "0.9", "--n", "256", "--seed", "7", "--out", str(out)]) == 0
        assert out.read_bytes() == first

    def test_full_precision_round_trip(self, tmp_path):
        out = tmp_path / "a.txt"
        run(["synth", "--hurst", "0.7", "--n", "32", "--seed", "1", "--out", str(out)])
        written = read_series(out)
        direct = synthesize_fgn(LrdModel(0.7), 32, seed=1).values
        assert np.array_equal(written, direct)

    def test_invalid_hurst_exits_2_and_names_the_flag(self, tmp_path, capsys):
        code = run(["synth", "--hurst", "1.2", "--n", "8", "--out", str(tmp_path / "x")])
        assert code == 2
        assert "hurst" in capsys.readouterr().err

    def test_zero_length_exits_2(self, tmp_path):
        assert run(["synth", "--hurst", "0.5", "--n", "0", "--out", str(tmp_path / "x")]) == 2

    def test_unwritable_path_exits_1(self):
        assert run(["synth", "--hurst", "0.5", "--n", "8", "--out", "/nonexistent/dir/x"]) == 1


class TestDetectCommand:
    def detect_args(self, inp, flags, extra=()):
        return [
            "detect", "--in", str(inp), "--hurst", "0.9", "--scales", "6",
            "--alpha", "0.05", "--threshold", "asymptotic",
            "--out-flags", str(flags), *extra,
        ]

    def test_spike_is_flagged_with_schema(self, tmp_path, spiked_series):
        inp, _ = spiked_series
        flags_path = tmp_path / "flags.json"
        assert run(self.detect_args(inp, flags_path)) == 0
        payload = json.loads(flags_path.read_text())
        assert {"alpha", "threshold", "scales", "intervals", "flagged_indices"} <= set(payload)
        assert 300 in payload["flagged_indices"]
        assert any(iv["start"] <= 300 < iv["end"] for iv in payload["intervals"])

    def test_map_csv_layout(self, tmp_path, spiked_series):
        inp, _ = spiked_series
        map_path = tmp_path / "map.csv"
        run(self.detect_args(inp, tmp_path / "f.json",
                             extra=["--out-map", str(map_path), "--method", "swa"]))
        pvalues, labels = read_pvalue_csv(map_path)
        assert pvalues.shape == (6, 1024)
        assert labels[0] == 1 and labels[-1] == 1024
        header = map_path.read_text().splitlines()[0]
        assert header.startswith("scale,1,2,")
        # warm-up cells at the coarsest sliding scale are empty, not numbers
        assert np.isnan(pvalues[5, :31]).all() and not np.isnan(pvalues[5, 31:]).any()

    def test_detect_matches_library(self, tmp_path, spiked_series):
        inp, x = spiked_series
        flags_path = tmp_path / "flags.json"
        run(self.detect_args(inp, flags_path, extra=["--method", "swa"]))
        payload = json.loads(flags_path.read_text())
        from lrdshift import asymptotic_threshold

        config = DetectionConfig(
            scale_config=ScaleConfig(base=2, num_scales=6, hurst=0.9),
            threshold=asymptotic_threshold(0.05, 6),
            method="swa",
        )
        expected = detect(x, config).flags
        assert payload["flagged_indices"] == [int(i) for i in expected]

    def test_missing_hurst_exits_2(self, tmp_path, spiked_series):
        inp, _ = spiked_series
        code = run(["detect", "--in", str(inp), "--out-flags", str(tmp_path / "f.json")])
        assert code == 2

    def test_estimate_hurst_prints_and_stops(self, tmp_path, spiked_series, capsys):
        inp, _ = spiked_series
        flags_path = tmp_path / "f.json"
        code = run(["detect", "--in", str(inp), "--estimate-hurst",
                    "--out-flags", str(flags_path)])
        assert code == 0
        estimate = float(capsys.readouterr().out.strip())
        assert 0.0 < estimate < 1.0
        assert not flags_path.exists(), "detection must not run without an explicit --hurst"

    def test_short_series_exits_2(self, tmp_path):
        inp = tmp_path / "short.txt"
        inp.write_text("1.0\n2.0\n")
        code = run(["detect", "--in", str(inp), "--hurst", "0.9", "--scales", "8",
                    "--out-flags", str(tmp_path / "f.json")])
        assert code == 2

    def test_empty_input_exits_2(self, tmp_path, capsys):
        inp = tmp_path / "empty.txt"
        inp.write_text("")
        code = run(["detect", "--in", str(inp), "--hurst", "0.9",
                    "--out-flags", str(tmp_path / "f.json")])
        assert code == 2
        assert "no numeric data" in capsys.readouterr().err

    def test_parse_error_reports_line_number(self, tmp_path, capsys):
        inp = tmp_path / "bad.txt"
        inp.write_text("1.0\n2.0\nnot-a-number\n")
        code = run(["detect", "--in", str(inp), "--hurst", "0.9", "--scales", "1",
                    "--out-flags", str(tmp_path / "f.json")])
        assert code == 2
        assert "line 3" in capsys.readouterr().err

    def test_header_row_is_skipped(self, tmp_path):
        inp = tmp_path / "headed.csv"
        inp.write_text("timestamp,value\n" + "".join(f"{i},{v}\n" for i, v in enumerate([0.5] * 40)))
        values = read_series(inp, column=2)
        assert len(values) == 40 and values[0] == 0.5

    def test_null_flag_rate_over_scripted_loop(self, tmp_path):
        """Flag count / n on clean background fixtures stays in the
        Monte-Carlo band around alpha across a seeded loop of runs."""
        seeds, n, m, alpha = 20, 512, 5, 0.05
        rates = []
        for i in range(seeds):
            inp = tmp_path / f"fix{i}.txt"
            path = synthesize_fgn(LrdModel(0.9), n, seed=9000 + i)
            inp.write_text("".join(repr(float(v)) + "\n" for v in path.values))
            flags_path = tmp_path / f"fix{i}.json"
            code = run([
                "detect", "--in", str(inp), "--hurst", "0.9", "--scales", str(m),
                "--alpha", str(alpha), "--threshold", "improved",
                "--mc-reps", "30000", "--seed", "17", "--method", "swa",
                "--out-flags", str(flags_path),
            ])
            assert code == 0
            payload = json.loads(flags_path.read_text())
            rates.append(len(payload["flagged_indices"]) / n)
        band = 3 * np.std(rates, ddof=1) / np.sqrt(seeds) + 0.01
        assert abs(np.mean(rates) - alpha) < band, f"rate {np.mean(rates):.4f}"


class TestMapCommand:
    def write_map(self, path, pvalues):
        from lrdshift.cli import write_pvalue_csv

        write_pvalue_csv(path, np.asarray(pvalues, dtype=float))

    def test_single_hot_cell(self, tmp_path):
        map_path, svg_path = tmp_path / "m.csv", tmp_path / "m.svg"
        grid = np.ones((2, 4))
        grid[1, 2] = 0.0
        self.write_map(map_path, grid)
        assert run(["map", "--in-map", str(map_path), "--out-svg", str(svg_path)]) == 0
        svg = svg_path.read_text()
        assert svg.count("#a50026") == 1  # exactly one hottest rect
        assert "#313695" in svg

    def test_uniform_cool_map(self, tmp_path):
        map_path, svg_path = tmp_path / "m.csv", tmp_path / "m.svg"
        self.write_map(map_path, np.ones((3, 5)))
        run(["map", "--in-map", str(map_path), "--out-svg", str(svg_path)])
        svg = svg_path.read_text()
        assert "#a50026" not in svg
        assert svg.count("#313695") == 3  # one merged rect per row

    def test_missing_cells_render_gray(self, tmp_path):
        map_path, svg_path = tmp_path / "m.csv", tmp_path / "m.svg"
        grid = np.ones((2, 3))
        grid[1, 0] = np.nan
        self.write_map(map_path, grid)
        run(["map", "--in-map", str(map_path), "--out-svg", str(svg_path)])
        assert "#b3b3b3" in svg_path.read_text()

    def test_empty_window_exits_2(self, tmp_path):
        map_path = tmp_path / "m.csv"
        self.write_map(map_path, np.ones((2, 4)))
        code = run(["map", "--in-map", str(map_path), "--from", "2", "--to", "2",
                    "--out-svg", str(tmp_path / "m.svg")])
        assert code == 2

    def test_deterministic_bytes(self, tmp_path):
        map_path = tmp_path / "m.csv"
        self.write_map(map_path, np.linspace(0, 1, 12).reshape(3, 4))
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        run(["map", "--in-map", str(map_path), "--out-svg", str(a)])
        run(["map", "--in-map", str(map_path), "--out-svg", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestThresholdCommand:
    def test_asymptotic_value(self, capsys):
        assert run(["threshold", "--alpha", "0.05", "--scales", "15", "--kind", "asymptotic"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["kind"] == "asymptotic"
        assert payload["value"] == pytest.approx(2.9275327016162911, abs=1e-9)
        assert payload["se"] == 0.0

    def test_improved_deterministic(self, capsys):
        args = ["threshold", "--alpha", "0.05", "--scales", "3", "--hurst", "0.9",
                "--kind", "improved", "--mc-reps", "50000", "--seed", "5"]
        run(args)
        first = capsys.readouterr().out
        run(args)
        assert capsys.readouterr().out == first
        payload = json.loads(first)
        assert payload["se"] > 0.0
        assert 1.9 < payload["value"] < 3.0

    def test_hurst_monotonicity_pair(self, capsys):
        values = {}
        for hurst in ("0.6", "0.95"):
            run(["threshold", "--alpha", "0.05", "--scales", "10", "--hurst", hurst,
                 "--kind", "improved", "--mc-reps", "200000", "--seed", "6"])
            values[hurst] = json.loads(capsys.readouterr().out)["value"]
        assert values["0.95"] < values["0.6"]


class TestEvalCommand:
    def test_writes_csv_and_json(self, tmp_path):
        prefix = tmp_path / "study"
        code = run([
            "eval", "--sets", "2", "--sims", "2", "--n", "1024", "--hurst", "0.8",
            "--scales", "5", "--mc-reps", "10000", "--duration-mean", "100",
            "--start-range", "512", "--seed", "3", "--out", str(prefix),
        ])
        assert code == 0
        rows = (prefix.parent / "study.csv").read_text().splitlines()
        assert rows[0] == "set_id,detector,tdr,fdr,fnr"
        assert len(rows) == 1 + 2 * 2
        summary = json.loads((prefix.parent / "study.json").read_text())
        assert set(summary["detectors"]) == {"multiscale", "naive"}


class TestStreamCommand:
    def stream(self, monkeypatch, capsys, lines, args):
        monkeypatch.setattr("sys.stdin", io.StringIO(lines))
        code = run(["stream", *args])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    def test_zeros_emit_nothing(self, monkeypatch, capsys):
        code, out, _ = self.stream(
            monkeypatch, capsys, "0.0\n" * 50,
            ["--hurst", "0.9", "--scales", "3", "--threshold-value", "2.5"],
        )
        assert code == 0 and out == ""

    def test_spike_emitted_once_with_scale(self, monkeypatch, capsys):
        lines = "".join("0.0\n" if i != 30 else "10.0\n" for i in range(60))
        code, out, _ = self.stream(
            monkeypatch, capsys, lines,
            ["--hurst", "1.0", "--scales", "2", "--threshold-value", "6.0"],
        )
        assert code == 0
        records = [line.split(",") for line in out.splitlines()]
        assert [r[0] for r in records] == ["31"]  # 1-based index of the spike
        assert float(records[0][1]) == 10.0
        assert records[0][2] == "1"

    def test_malformed_lines_warn_and_continue(self, monkeypatch, capsys):
        code, out, err = self.stream(
            monkeypatch, capsys, "1.0\nhuh\n9.0\n",
            ["--hurst", "0.9", "--scales", "2", "--threshold-value", "2.0"],
        )
        assert code == 0
        assert "line 2" in err
        assert out.splitlines()[0].startswith("2,9.0")  # bad line not counted as a sample

    def test_matches_batch_detection(self, monkeypatch, capsys, spiked_series):
        """Streaming flags equal batch sliding-window flags from the same
        threshold for every position at or past the largest window."""
        _, x = spiked_series
        lines = "".join(repr(float(v)) + "\n" for v in x)
        code, out, _ = self.stream(
            monkeypatch, capsys, lines,
            ["--hurst", "0.9", "--scales", "6", "--threshold-value", "2.8"],
        )
        assert code == 0
        streamed = {int(line.split(",")[0]) for line in out.splitlines()}
        config = DetectionConfig(
            scale_config=ScaleConfig(base=2, num_scales=6, hurst=0.9),
            threshold=ThresholdResult(value=2.8, kind="asymptotic"),
            method="swa",
        )
        batch = {int(i) for i in detect(x, config).flags}
        biggest = 32
        assert {i for i in streamed if i >= biggest} == {i for i in batch if i >= biggest}
        # and in fact they agree at every position here
        assert streamed == batch

    def test_matches_detect_command(self, monkeypatch, capsys, tmp_path, spiked_series):
        """Piping a file through `stream` gives the same flags as running
        `detect --method swa` on it, when both use the same closed-form
        threshold."""
        inp, x = spiked_series
        common = ["--hurst", "0.9", "--scales", "6", "--alpha", "0.05",
                  "--threshold", "asymptotic"]
        code, out, _ = self.stream(monkeypatch, capsys, inp.read_text(), common)
        assert code == 0
        streamed = {int(line.split(",")[0]) for line in out.splitlines()}
        flags_path = tmp_path / "flags.json"
        assert run(["detect", "--in", str(inp), "--method", "swa",
                    "--out-flags", str(flags_path), *common]) == 0
        batch = set(json.loads(flags_path.read_text())["flagged_indices"])
        biggest = 32
        assert {i for i in streamed if i >= biggest} == {i for i in batch if i >= biggest}

    def test_jsonl_format(self, monkeypatch, capsys):
        code, out, _ = self.stream(
            monkeypatch, capsys, "0.0\n8.0\n",
            ["--hurst", "0.9", "--scales", "2", "--threshold-value", "3.0", "--format", "jsonl"],
        )
        assert code == 0
        record = json.loads(out.splitlines()[0])
        assert record["index"] == 2 and record["argmax_scale"] == 1

    def test_mean_without_std_exits_2(self, monkeypatch, capsys):
        code, _, _ = self.stream(
            monkeypatch, capsys, "0.0\n",
            ["--hurst", "0.9", "--scales", "2", "--threshold-value", "2.0", "--mean", "5.0"],
        )
        assert code == 2


class TestPipelineRoundTrip:
    def test_synth_detect_map_defaults(self, tmp_path):
        """The documented three-step pipeline runs end to end on defaults
        (smaller sizes for test speed) and is byte-identical on rerun."""
        series = tmp_path / "trace.txt"
        flags = tmp_path / "flags.json"
        pmap = tmp_path / "map.csv"
        svg = tmp_path / "map.svg"
        assert run(["synth", "--hurst", "0.9", "--n", "2048", "--seed", "3", "--out", str(series)]) == 0
        detect_args = ["detect", "--in", str(series), "--hurst", "0.9", "--scales", "8",
                       "--mc-reps", "20000", "--seed", "4",
                       "--out-flags", str(flags), "--out-map", str(pmap)]
        assert run(detect_args) == 0
        assert run(["map", "--in-map", str(pmap), "--from", "0", "--to", "512",
                    "--out-svg", str(svg)]) == 0
        snapshot = {p: p.read_bytes() for p in (series, flags, pmap, svg)}
        run(["synth", "--hurst", "0.9", "--n", "2048", "--seed", "3", "--out", str(series)])
        run(detect_args)
        run(["map", "--in-map", str(pmap), "--from", "0", "--to", "512", "--out-svg", str(svg)])
        for path, content in snapshot.items():
            assert path.read_bytes() == content, f"{path.name} changed between reruns"
