import csv
import json

import pytest

from iets.cli import (
    CSV_COLUMNS,
    OutputRecord,
    UsageError,
    emit,
    main,
    parse_invocation,
    parse_snr_range,
    run_suite,
    suite_paths,
)
from iets.engine import BerCurve, BerPoint, ScenarioConfig, run_scenario


def quick_args(*extra):
    return ["--tx", "2", "--rx", "2", "--scheme", "gmd-sic", "--mod", "qpsk",
            "--snr", "0:6:12", "--trials", "20", "--frames-per-trial", "10", "--seed", "5", *extra]


def record(points=((10.0, 1000, (0,)),)):
    pts = tuple(BerPoint.from_counts(s, n, e) for s, n, e in points)
    cfg = ScenarioConfig(1, 1, "gmd-sic", "qpsk", tuple(p[0] for p in points), 5, 100, 1)
    return OutputRecord.from_run(cfg, BerCurve(points=pts, redraws=0, runtime_s=0.5))


class TestParseInvocation:
    def test_fig4a_scenario(self):
        cfg = parse_invocation(
            "--tx 4 --rx 4 --scheme gmd-sic --mod qam16 --snr 0:2:24 --trials 5000 --seed 42".split()
        )
        assert cfg == ScenarioConfig(
            4, 4, "gmd-sic", "qam16", tuple(range(0, 25, 2)), 5000, 100, 42
        )

    def test_no_arguments_lists_required(self):
        with pytest.raises(UsageError) as info:
            parse_invocation([])
        for flag in ("--tx", "--rx", "--scheme", "--mod"):
            assert flag in str(info.value)

    def test_unknown_constellation(self):
        with pytest.raises(UsageError, match="qam32"):
            parse_invocation(quick_args("--mod", "qam32"))

    def test_unknown_flag(self):
        with pytest.raises(UsageError, match="--bogus"):
            parse_invocation(quick_args("--bogus", "1"))

    def test_bad_value_names_token(self):
        with pytest.raises(UsageError, match="four"):
            parse_invocation(["--tx", "four"])

    def test_zf_with_more_tx_rejected(self):
        with pytest.raises(UsageError, match="zf-vblast"):
            parse_invocation("--tx 4 --rx 2 --scheme zf-vblast --mod qpsk".split())

    def test_flags_override_config_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(dict(tx_antennas=3, rx_antennas=3, scheme="svd-eigenmode",
                                        constellation="qam16", master_seed=9)))
        cfg = parse_invocation(["--config", str(path), "--seed", "11"])
        assert (cfg.tx_antennas, cfg.scheme, cfg.master_seed) == (3, "svd-eigenmode", 11)
        assert cfg.channel_trials == 5000

    def test_config_unknown_field(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(dict(tx_antennas=3, antennas=2)))
        with pytest.raises(UsageError, match="antennas"):
            parse_invocation(["--config", str(path)])


class TestSnrRange:
    def test_inclusive(self):
        assert parse_snr_range("0:2:6") == (0.0, 2.0, 4.0, 6.0)

    def test_fractional(self):
        assert parse_snr_range("0:0.1:0.3") == (0.0, 0.1, 0.2, 0.3)

    def test_single(self):
        assert parse_snr_range("7") == (7.0,)

    @pytest.mark.parametrize("text", ["0:2", "a:1:2", "0:0:4", "4:1:0", "0:3:5"])
    def test_invalid(self, text):
        with pytest.raises(UsageError):
            parse_snr_range(text)


class TestEmit:
    def test_single_point_csv(self, tmp_path):
        out = tmp_path / "a.csv"
        emit(record(((10.0, 1000, (7,)),)), "csv", out)
        lines = out.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1].startswith("10.0,1000,7,0.007,")

    def test_zero_ber_row(self, tmp_path):
        out = tmp_path / "a.csv"
        emit(record(), "csv", out)
        row = list(csv.DictReader(out.open()))[0]
        assert row["errors"] == "0" and float(row["ci_low"]) == 0.0 and float(row["ber"]) == 0.0

    def test_json_round_trip(self, tmp_path):
        rec = record(((0.0, 400, (100, 20)), (5.0, 400, (3, 0))))
        out = tmp_path / "a.json"
        emit(rec, "json", out)
        back = OutputRecord.from_dict(json.loads(out.read_text()))
        assert back == rec
        assert back.metadata == {"seed": 1, "redraws": 0, "runtime_s": 0.5}

    def test_csv_and_json_agree(self, tmp_path):
        rec = OutputRecord.from_run(
            cfg := ScenarioConfig(2, 2, "svd-eigenmode", "qam16", (0, 10), 10, 10, 3),
            run_scenario(cfg),
        )
        emit(rec, "csv", tmp_path / "a.csv")
        emit(rec, "json", tmp_path / "a.json")
        rows = list(csv.DictReader((tmp_path / "a.csv").open()))
        pts = json.loads((tmp_path / "a.json").read_text())["curve"]["points"]
        for row, p in zip(rows, pts):
            assert float(row["snr_db"]) == p["snr_db"]
            assert int(row["bits"]) == p["bits_total"]
            assert int(row["errors"]) == p["bit_errors"]
            for key in ("ber", "ci_low", "ci_high"):
                assert float(row[key]) == p[key]

    def test_stdout(self, capsys):
        emit(record(), "csv", None)
        assert capsys.readouterr().out.startswith("snr_db,bits,errors")

    def test_unwritable(self, tmp_path):
        target = tmp_path / "missing" / "a.csv"
        with pytest.raises(OSError, match="missing"):
            emit(record(), "csv", target)


def write_cfg(path, **over):
    cfg = dict(tx_antennas=2, rx_antennas=2, scheme="gmd-sic", constellation="qpsk",
               snr_db_points=[0, 10], channel_trials=10, symbol_vectors_per_trial=10, master_seed=1)
    cfg.update(over)
    path.write_text(json.dumps(cfg))
    return path


class TestSuite:
    def test_empty(self, tmp_path):
        assert run_suite([], tmp_path) == 0
        assert list(tmp_path.iterdir()) == []

    def test_partial_failure(self, tmp_path, capsys):
        cfgs = tmp_path / "cfgs"
        cfgs.mkdir()
        out = tmp_path / "out"
        out.mkdir()
        paths = [
            write_cfg(cfgs / "a.json"),
            write_cfg(cfgs / "b.json", constellation="qam32"),
            write_cfg(cfgs / "c.json", scheme="svd-eigenmode"),
        ]
        assert run_suite(paths, out) == 2
        assert sorted(p.name for p in out.iterdir()) == ["a.csv", "c.csv"]
        assert "b.json" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "name, scheme, mod",
        [("fig4a", "gmd-sic", "qam16"), ("fig4b", "gmd-sic", "qpsk"),
         ("fig5a", "svd-eigenmode", "qam16"), ("fig5b", "svd-eigenmode", "qpsk")],
    )
    def test_shipped_suites(self, name, scheme, mod):
        paths = suite_paths(name)
        assert len(paths) == 4
        cfgs = [ScenarioConfig.from_dict(json.loads(p.read_text())) for p in paths]
        assert [(c.tx_antennas, c.rx_antennas) for c in cfgs] == [(n, n) for n in range(1, 5)]
        assert all(c.scheme == scheme and c.constellation == mod for c in cfgs)
        assert all(c.channel_trials == 5000 for c in cfgs)

    def test_fig4a_layout_writes_four_csvs(self, tmp_path):
        # shipped configs with the trial count cut down
        cfgs = tmp_path / "fig4a"
        cfgs.mkdir()
        for p in suite_paths("fig4a"):
            d = json.loads(p.read_text())
            d.update(channel_trials=5, snr_db_points=[0, 12])
            (cfgs / p.name).write_text(json.dumps(d))
        out = tmp_path / "out"
        assert main(["--suite", str(cfgs), "--out", str(out)]) == 0
        assert sorted(p.name for p in out.iterdir()) == [f"fig4a_{n}x{n}.csv" for n in range(1, 5)]

    def test_unknown_suite(self, capsys):
        assert main(["--suite", "fig9z"]) == 1


class TestMain:
    def test_success_to_file(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(quick_args("--out", str(out))) == 0
        assert len(out.read_text().splitlines()) == 4

    def test_usage_exit(self, capsys):
        assert main([]) == 1
        assert "--tx" in capsys.readouterr().err

    def test_runtime_exit(self, tmp_path, capsys):
        assert main(quick_args("--out", str(tmp_path / "nope" / "r.csv"))) == 2

    def test_json_format(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(quick_args("--format", "json", "--out", str(out))) == 0
        rec = OutputRecord.from_dict(json.loads(out.read_text()))
        assert rec.config.master_seed == 5 and rec.schema_version == 1

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(quick_args("--out", str(a)))
        main(quick_args("--out", str(b), "--workers", "2"))
        assert a.read_bytes() == b.read_bytes()
