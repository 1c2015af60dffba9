"""Command-line front end: configs in, CSV/JSON sweep tables out.

Usage::

    arraydiag run --config exp.yaml --out results.csv --format csv --seed 7
    arraydiag preset --name fig3 --out fig3.csv --seed 7
    arraydiag validate --config exp.yaml

Exit status is 0 on success, 1 for invalid input and 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
from pathlib import Path
from typing import Iterable, Sequence, Union

import yaml

from . import __version__
from .errors import DomainError
from .simulator import (
    PRESETS,
    SWEEP_PARAMS,
    ConfigError,
    ExperimentSpec,
    SweepResult,
    preset,
    run_sweep,
    with_overrides,
)

log = logging.getLogger("arraydiag")

CSV_COLUMNS = (
    "experiment_id", "technique", "n_elements", "n_faults", "fault_mode", "n_paths",
    "quantized", "m_measurements", "snr_db", "aoa_offset_deg", "gain_error_var",
    "aoa_error_var", "sweep_param", "sweep_value", "trials", "p_success", "std_error",
    "seed", "tool_version",
)
_INT_COLUMNS = ("n_elements", "n_faults", "n_paths", "m_measurements", "trials", "seed")
_FLOAT_COLUMNS = ("snr_db", "aoa_offset_deg", "gain_error_var", "aoa_error_var",
                  "p_success", "std_error")

_SPEC_KEYS = {
    "experiment_id", "n_elements", "n_faults", "fault_mode", "n_paths", "quantized",
    "technique", "m_measurements", "snr_db", "aoa_offset_deg", "gain_error_var",
    "aoa_error_var", "csi_from_snr", "trials", "master_seed",
}
_REQUIRED_KEYS = ("n_elements", "n_faults")


class _UniqueKeyLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            raise ConfigError(str(key), "duplicate key")
        seen.add(key)
    return yaml.SafeLoader.construct_mapping(loader, node, deep)


_UniqueKeyLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)
# YAML 1.1 reads "1e-4" as a string; accept exponent floats without a dot
_UniqueKeyLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def parse_config(text: str) -> ExperimentSpec:
    """Build a validated :class:`ExperimentSpec` from a YAML (or JSON) document.

    The swept parameter is given either as a one-entry ``sweep`` mapping
    (``sweep: {snr_db: [0, 10, 20]}``) or as a list-valued top-level
    parameter; more than one sweep is an error.  Missing optional keys take
    the documented defaults.
    """
    try:
        doc = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.YAMLError as exc:
        raise ConfigError("document", f"not well-formed: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("document", "top level must be a key-value mapping")

    sweeps = {}
    sweep_block = doc.pop("sweep", None)
    if sweep_block is not None:
        if not isinstance(sweep_block, dict):
            raise ConfigError("sweep", "must map one parameter name to a list of values")
        for name, values in sweep_block.items():
            sweeps[name] = values
    for name in list(doc):
        if isinstance(doc[name], list):
            if name in sweeps:
                raise ConfigError(name, "swept twice")
            sweeps[name] = doc.pop(name)

    for key in doc:
        if key not in _SPEC_KEYS:
            raise ConfigError(str(key), "unknown key")
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(key, "missing required key")
    if len(sweeps) != 1:
        raise ConfigError("sweep", f"exactly one swept parameter required, got {sorted(sweeps) or 'none'}")
    (name, values), = sweeps.items()
    if name not in SWEEP_PARAMS:
        raise ConfigError(str(name), f"cannot be swept; choose from {SWEEP_PARAMS}")
    if not isinstance(values, list):
        raise ConfigError(name, "sweep values must be a list")
    if name in doc:
        raise ConfigError(name, "given both as fixed value and as sweep")

    try:
        return ExperimentSpec(sweep_param=name, sweep_values=tuple(values), **doc)
    except TypeError as exc:
        raise ConfigError("document", str(exc)) from None


def load_config(path: Union[str, Path]) -> ExperimentSpec:
    return parse_config(Path(path).read_text())


def result_rows(results: Iterable[SweepResult]) -> list:
    """Flatten sweep results into dicts keyed by :data:`CSV_COLUMNS`."""
    out = []
    for result in results:
        spec = result.spec
        for row in result.rows:
            p = row.params
            out.append({
                "experiment_id": spec.experiment_id,
                "technique": row.technique,
                "n_elements": p.n_elements,
                "n_faults": p.n_faults,
                "fault_mode": p.fault_mode,
                "n_paths": p.n_paths,
                "quantized": p.quantized,
                "m_measurements": p.m_measurements,
                "snr_db": p.snr_db,
                "aoa_offset_deg": p.aoa_offset_deg,
                "gain_error_var": p.gain_error_var,
                "aoa_error_var": p.aoa_error_var,
                "sweep_param": spec.sweep_param,
                "sweep_value": row.sweep_value,
                "trials": row.trials,
                "p_success": row.p_success,
                "std_error": row.std_error,
                "seed": row.seed,
                "tool_version": __version__,
            })
    return out


def _csv_cell(key, value) -> str:
    if key in ("p_success", "std_error"):
        return f"{value:.6f}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def emit_results(results: Union[SweepResult, Sequence[SweepResult]], path, fmt: str = "csv") -> Path:
    """Write results to ``path`` as CSV (header always present) or JSON."""
    if isinstance(results, SweepResult):
        results = [results]
    rows = result_rows(results)
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_csv_cell(k, row[k]) for k in CSV_COLUMNS])
    elif fmt == "json":
        with path.open("w") as fh:
            json.dump(rows, fh, indent=1)
            fh.write("\n")
    else:
        raise DomainError(f"unknown output format {fmt!r}")
    return path


def _parse_cell(key, text):
    if key in _INT_COLUMNS:
        return int(text)
    if key in _FLOAT_COLUMNS:
        return float(text)
    if key == "quantized":
        return text == "true"
    if key == "sweep_value":
        value = float(text)
        return int(value) if value.is_integer() and "." not in text and "e" not in text else value
    return text


def load_results(path) -> list:
    """Read rows back from an emitted CSV or JSON file."""
    path = Path(path)
    if path.suffix == ".json":
        return json.loads(path.read_text())
    with path.open(newline="") as fh:
        return [{k: _parse_cell(k, v) for k, v in row.items()} for row in csv.DictReader(fh)]


def spec_from_row(row: dict, trials=None) -> ExperimentSpec:
    """Single-point experiment that reproduces one emitted row."""
    fixed = {k: row[k] for k in ("n_elements", "n_faults", "fault_mode", "n_paths", "quantized",
                                 "m_measurements", "snr_db", "aoa_offset_deg",
                                 "gain_error_var", "aoa_error_var")}
    param = row["sweep_param"]
    value = fixed.pop(param)
    return ExperimentSpec(
        experiment_id=row["experiment_id"], technique=row["technique"],
        sweep_param=param, sweep_values=(value,), trials=trials or row["trials"],
        master_seed=row["seed"], **fixed,
    )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arraydiag", description="Antenna-array fault diagnosis simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="log one line per sweep point")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a sweep described by a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--trials", type=int)
    run.add_argument("--workers", type=int)

    pre = sub.add_parser("preset", help="run one of the figure presets")
    pre.add_argument("--name", required=True, choices=PRESETS)
    pre.add_argument("--out", required=True)
    pre.add_argument("--format", choices=("csv", "json"), default="csv")
    pre.add_argument("--seed", type=int, required=True)
    pre.add_argument("--trials", type=int)
    pre.add_argument("--workers", type=int)

    val = sub.add_parser("validate", help="check a config file (or a preset) without running it")
    group = val.add_mutually_exclusive_group(required=True)
    group.add_argument("--config")
    group.add_argument("--name", choices=PRESETS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        if args.command == "validate":
            specs = [load_config(args.config)] if args.config else list(preset(args.name))
            for spec in specs:
                print(f"{spec.experiment_id}: ok ({spec.sweep_param} x {len(spec.sweep_values)}, "
                      f"{spec.trials} trials)")
            return 0
        if args.command == "run":
            specs = [load_config(args.config)]
        else:
            specs = list(preset(args.name))
        specs = [with_overrides(s, master_seed=args.seed, trials=args.trials) for s in specs]
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        results = []
        for spec in specs:
            results.append(run_sweep(spec, workers=args.workers))
            log.info("finished %s", spec.experiment_id)
        emit_results(results, args.out, args.format)
    except Exception as exc:  # noqa: BLE001 - any runtime failure maps to exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
