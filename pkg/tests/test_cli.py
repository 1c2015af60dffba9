import csv
import json

import pytest

from arraydiag import ExperimentSpec, run_sweep
from arraydiag.cli import (
    CSV_COLUMNS,
    emit_results,
    load_results,
    main,
    parse_config,
    spec_from_row,
)
from arraydiag.simulator import ConfigError, SweepResult

MINIMAL = """
n_elements: 128
n_faults: 6
sweep:
  snr_db: [0, 10, 20, 30]
"""

SMALL = """
experiment_id: small
n_elements: 32
n_faults: 2
n_paths: 2
quantized: false
m_measurements: 16
csi_from_snr: true
trials: 15
sweep:
  snr_db: [10, 30]
"""


def test_minimal_config_gets_defaults():
    spec = parse_config(MINIMAL)
    assert spec.sweep_param == "snr_db" and spec.sweep_values == (0, 10, 20, 30)
    assert spec.n_paths == 1 and spec.fault_mode == "complete" and spec.trials == 500
    assert spec.m_measurements == 35 and spec.technique == "both"


def test_json_config_and_list_sweep():
    spec = parse_config('{"n_elements": 64, "n_faults": 3, "gain_error_var": [0, 1e-3]}')
    assert spec.sweep_param == "gain_error_var" and spec.sweep_values == (0, 1e-3)
    spec = parse_config("n_elements: 64\nn_faults: 3\naoa_error_var: [1e-4]\n")
    assert spec.sweep_values == (1e-4,)


@pytest.mark.parametrize("text, field", [
    ("n_elements: 128\nn_faults: 200\nsweep: {snr_db: [10]}", "n_faults"),
    ("n_elements: 128\nn_faults: 2\nsweep: {snr_db: [10], m_measurements: [5]}", "sweep"),
    ("n_elements: 128\nn_faults: 2\nsweep: {snr_db: [10]}\nm_measurements: [5, 10]", "sweep"),
    ("n_elements: 128\nn_faults: 2\nsweep:\n  snr_db: [10]\n  snr_db: [20]", "snr_db"),
    ("n_elements: 128\nn_faults: 2\nsweep: {snr_db: [10]}\ncolour: red", "colour"),
    ("n_elements: 128\nsweep: {snr_db: [10]}", "n_faults"),
    ("n_elements: 128\nn_faults: 2", "sweep"),
    ("n_elements: 128\nn_faults: 2\nsweep: {n_paths: [1, 2]}", "n_paths"),
    ("n_elements: 128\nn_faults: 2\nsnr_db: 3\nsweep: {snr_db: [10]}", "snr_db"),
    ("[1, 2]", "document"),
])
def test_config_errors_name_field(text, field):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == field
    assert field in str(err.value)


def test_empty_result_header_only(tmp_path):
    spec = parse_config(MINIMAL)
    path = emit_results(SweepResult(spec=spec), tmp_path / "out.csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_one_row_csv(tmp_path):
    spec = ExperimentSpec(n_elements=16, n_faults=1, sweep_param="m_measurements",
                          sweep_values=(6,), technique="proposed", trials=3)
    path = emit_results(run_sweep(spec), tmp_path / "out.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    rows = list(csv.reader(lines))
    assert len(rows[0]) == len(rows[1]) == 19
    record = dict(zip(rows[0], rows[1]))
    assert len(record["p_success"].split(".")[1]) == 6
    assert record["sweep_param"] == "m_measurements" and record["sweep_value"] == "6"


def test_json_round_trip(tmp_path):
    res = run_sweep(parse_config(SMALL))
    emit_results(res, tmp_path / "r.json", "json")
    emit_results(res, tmp_path / "r.csv", "csv")
    from_json = load_results(tmp_path / "r.json")
    from_csv = load_results(tmp_path / "r.csv")
    assert len(from_json) == len(from_csv) == 4
    for j, c in zip(from_json, from_csv):
        assert list(j) == list(CSV_COLUMNS)
        for key in CSV_COLUMNS:
            if key in ("p_success", "std_error"):
                assert c[key] == pytest.approx(j[key], abs=5e-7)
            else:
                assert c[key] == j[key], key
    assert json.loads((tmp_path / "r.json").read_text()) == from_json


def test_rows_are_self_describing(tmp_path):
    res = run_sweep(parse_config(SMALL))
    emit_results(res, tmp_path / "r.csv")
    for row in load_results(tmp_path / "r.csv"):
        (again,) = run_sweep(spec_from_row(row)).rows
        assert f"{again.p_success:.6f}" == f"{row['p_success']:.6f}"


def test_cli_run_and_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text(SMALL)
    out = tmp_path / "out.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "4", "--trials", "5"]) == 0
    rows = load_results(out)
    assert {r["seed"] for r in rows} == {4} and {r["trials"] for r in rows} == {5}

    assert main(["validate", "--config", str(cfg)]) == 0
    bad = tmp_path / "bad.yaml"
    bad.write_text("n_elements: 128\nn_faults: 200\nsweep: {snr_db: [1]}\n")
    assert main(["validate", "--config", str(bad)]) == 1
    assert main(["run", "--config", str(bad), "--out", str(out), "--seed", "1"]) == 1
    assert main(["validate", "--config", str(tmp_path / "missing.yaml")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(cfg)])
    assert exc.value.code == 1
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "no" / "dir.csv"),
                 "--seed", "1", "--trials", "2"]) == 2
    assert "n_faults" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3", "fig4"])
def test_validate_presets(name):
    assert main(["validate", "--name", name]) == 0


def test_shipped_configs_validate():
    from pathlib import Path

    configs = sorted((Path(__file__).parents[1] / "configs").glob("*.yaml"))
    assert configs
    for path in configs:
        assert main(["validate", "--config", str(path)]) == 0, path


def test_preset_command(tmp_path):
    out = tmp_path / "fig4.json"
    assert main(["preset", "--name", "fig4", "--out", str(out), "--seed", "3",
                 "--trials", "2", "--format", "json"]) == 0
    rows = load_results(out)
    assert {r["experiment_id"] for r in rows} == {"fig4-gain", "fig4-aoa"}


def test_shipped_configs_match_presets():
    from pathlib import Path

    from arraydiag.cli import load_config
    from arraydiag.simulator import PRESETS, preset

    root = Path(__file__).parents[1] / "configs"
    for name in PRESETS:
        for spec in preset(name):
            assert load_config(root / f"{spec.experiment_id}.yaml") == spec
