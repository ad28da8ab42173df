"""Command-line front end.

Examples
--------
Single campaign to CSV on stdout::

    iets --tx 4 --rx 4 --scheme gmd-sic --mod qam16 --snr 0:2:24 --trials 5000 --seed 42

Shipped reproduction suite, one file per antenna configuration::

    iets --suite fig4a --out results/

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .engine import BerCurve, ScenarioConfig, run_scenario
from .modem import CONSTELLATIONS
from .transceiver import SchemeKind

__all__ = [
    "UsageError",
    "OutputRecord",
    "parse_snr_range",
    "parse_invocation",
    "emit",
    "run_suite",
    "suite_paths",
    "main",
]

SCHEMA_VERSION = 1
CSV_COLUMNS = ("snr_db", "bits", "errors", "ber", "ci_low", "ci_high")
SUITES = ("fig4a", "fig4b", "fig5a", "fig5b")
REQUIRED = ("tx_antennas", "rx_antennas", "scheme", "constellation")
_FLAG_FOR = {
    "tx_antennas": "--tx",
    "rx_antennas": "--rx",
    "scheme": "--scheme",
    "constellation": "--mod",
}

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class OutputRecord:
    config: ScenarioConfig
    curve: BerCurve
    metadata: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_run(cls, config, curve):
        meta = {
            "seed": config.master_seed,
            "redraws": curve.redraws,
            "runtime_s": curve.runtime_s,
        }
        return cls(config=config, curve=curve, metadata=meta)

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "config": self.config.to_dict(),
            "curve": self.curve.to_dict(),
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            config=ScenarioConfig.from_dict(d["config"]),
            curve=BerCurve.from_dict(d["curve"]),
            metadata=dict(d.get("metadata", {})),
            schema_version=d["schema_version"],
        )


def parse_snr_range(text):
    """``start:step:stop`` (inclusive) or a single value."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad --snr value {text!r}; expected start:step:stop") from None
    if len(nums) == 1:
        return (nums[0],)
    if len(nums) != 3:
        raise UsageError(f"bad --snr value {text!r}; expected start:step:stop")
    start, step, stop = nums
    if step <= 0 or stop < start:
        raise UsageError(f"bad --snr value {text!r}; need step > 0 and stop >= start")
    n = int(round((stop - start) / step))
    if abs(start + n * step - stop) > 1e-9 * max(1.0, abs(stop)):
        raise UsageError(f"bad --snr value {text!r}; stop is not reachable in whole steps")
    return tuple(round(start + i * step, 12) for i in range(n + 1))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    p = _Parser(prog="iets", description="MIMO eigenmode transmission BER campaigns.")
    p.add_argument("--tx", type=int, dest="tx_antennas", metavar="N")
    p.add_argument("--rx", type=int, dest="rx_antennas", metavar="M")
    p.add_argument("--scheme", choices=[s.value for s in SchemeKind])
    p.add_argument("--mod", dest="constellation", choices=sorted(CONSTELLATIONS))
    p.add_argument("--snr", dest="snr_db_points", type=parse_snr_range, metavar="START:STEP:STOP")
    p.add_argument("--trials", type=int, dest="channel_trials")
    p.add_argument("--frames-per-trial", type=int, dest="symbol_vectors_per_trial")
    p.add_argument("--seed", type=int, dest="master_seed")
    p.add_argument("--out", help="output file, or directory for --suite (default: stdout / .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", help="JSON file with ScenarioConfig fields")
    p.add_argument("--suite", help=f"one of {', '.join(SUITES)}, or a directory of JSON configs")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    return p


def _load_config_dict(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = set(data) - set(ScenarioConfig.__dataclass_fields__)
    if unknown:
        raise UsageError(f"config {path} has unknown fields: {sorted(unknown)}")
    return data


def _make_config(values):
    missing = [_FLAG_FOR[k] for k in REQUIRED if values.get(k) is None]
    if missing:
        raise UsageError(f"missing required flags: {' '.join(missing)}")
    try:
        return ScenarioConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def parse_invocation(argv):
    """Build a :class:`ScenarioConfig` from command-line arguments.

    Flags override values from ``--config``, which override the defaults
    on :class:`ScenarioConfig`.
    """
    ns = _build_parser().parse_args(list(argv))
    values = _load_config_dict(ns.config) if ns.config else {}
    for key in ScenarioConfig.__dataclass_fields__:
        flag_value = getattr(ns, key, None)
        if flag_value is not None:
            values[key] = flag_value
    return _make_config(values)


def _format_float(x):
    return repr(float(x))


def _csv_text(curve):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in curve.points:
        w.writerow([
            _format_float(p.snr_db), p.bits_total, p.bit_errors,
            _format_float(p.ber), _format_float(p.ci_low), _format_float(p.ci_high),
        ])
    return buf.getvalue()


def emit(record, fmt="csv", destination=None):
    """Write a record as CSV (curve only) or JSON (full record).

    ``destination`` is a path or ``None`` / ``"-"`` for stdout.
    """
    if fmt == "csv":
        text = _csv_text(record.curve)
    elif fmt == "json":
        text = json.dumps(record.to_dict(), indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if destination in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def suite_paths(name):
    """Config files of a shipped suite, or of a directory of JSON files."""
    if name in SUITES:
        root = resources.files("iets") / "suites" / name
        return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))
    path = Path(name)
    if path.is_dir():
        return sorted(path.glob("*.json"))
    raise UsageError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)} or a directory")


def run_suite(paths, out_dir=".", fmt="csv", workers=1, stderr=None):
    """Run every config file and write ``<out_dir>/<stem>.<fmt>`` for each.

    Failures do not stop the remaining configs; they are reported together
    at the end. Returns an exit status.
    """
    stderr = stderr or sys.stderr
    out_dir = Path(out_dir)
    failures = []
    for path in paths:
        path = Path(path)
        try:
            cfg = _make_config(_load_config_dict(path))
            curve = run_scenario(cfg, workers=workers)
            emit(OutputRecord.from_run(cfg, curve), fmt, out_dir / f"{path.stem}.{fmt}")
        except Exception as exc:  # collected, reported below
            failures.append((path, exc))
    for path, exc in failures:
        print(f"iets: {path}: {exc}", file=stderr)
    return EXIT_RUNTIME if failures else EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        ns = _build_parser().parse_args(list(argv))
        if ns.workers < 1:
            raise UsageError("--workers must be >= 1")
        if ns.suite:
            paths = suite_paths(ns.suite)
            out_dir = Path(ns.out or ".")
            out_dir.mkdir(parents=True, exist_ok=True)
            return run_suite(paths, out_dir, ns.format, ns.workers)
        cfg = parse_invocation(argv)
    except UsageError as exc:
        print(f"iets: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        curve = run_scenario(cfg, workers=ns.workers)
        emit(OutputRecord.from_run(cfg, curve), ns.format, ns.out)
    except Exception as exc:
        print(f"iets: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
