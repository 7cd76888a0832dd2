import csv
import io
import json
import math

import pytest

from cqedwigner import cli
from cqedwigner.cli import (
    CSV_COLUMNS,
    ConfigError,
    Grid2D,
    LineGrid,
    emit,
    format_csv,
    format_json,
    load_config,
    load_json_result,
    parse_range,
    parse_state,
    run_scan,
)
from cqedwigner.dynamics import Engine
from cqedwigner.presets import PRESETS


def write(tmp_path, text):
    path = tmp_path / "scan.cfg"
    path.write_text(text)
    return str(path)


def test_presets_table_rows():
    s1, s2 = PRESETS["set1"], PRESETS["set2"]
    assert (s1.delta, s1.g, s1.eps_D, s1.eps_half_table) == (0.1, 5e-3, 0.025, 0.025)
    assert (s1.kappa_inv_ns, s1.gamma_inv_ns) == (160.0, 2000.0)
    assert (s2.delta, s2.g, s2.eps_D, s2.eps_half_table) == (0.3, 5e-3, 0.025, 0.281)
    assert (s2.kappa_inv_ns, s2.gamma_inv_ns) == (1000.0, 2000.0)
    assert s1.protocol().eps_half_mag == pytest.approx(0.025)
    assert s2.protocol().eps_half_mag == pytest.approx(0.28125)


def test_load_config_file_and_override(tmp_path):
    path = write(tmp_path, "# real-axis scan\npreset = set1\nstate = cat:2,-\nline = -1:1:0.5\n"
                           "engine = effective\nn_fock = 64\n")
    cfg = load_config(path)
    assert cfg.preset == "set1" and cfg.engine is Engine.EFFECTIVE and cfg.n_fock == 64
    assert cfg.grid == LineGrid(-1, 1, 0.5)
    p = cfg.protocol()
    assert p.kappa_inv == 160.0
    cfg2 = load_config(path, preset="set2", engine="exact")
    assert cfg2.preset == "set2" and cfg2.engine is Engine.EXACT
    assert cfg2.protocol().sys.delta == 0.3


@pytest.mark.parametrize("text,needle", [
    ("preset = set2\nline 0:1:0.1\n", ":2"),
    ("preset = set2\nline = 0:1\n", ":2"),
    ("colour = red\n", ":1"),
    ("line = 0:1:0\n", "step"),
    ("line = 0:1:0.1\nn_fock = many\n", ":2"),
])
def test_config_errors_name_the_line(tmp_path, text, needle):
    with pytest.raises(ConfigError, match=needle):
        load_config(write(tmp_path, text))


def test_config_semantic_errors():
    with pytest.raises(ConfigError, match="grid"):
        load_config(preset="set2")
    with pytest.raises(ConfigError, match="preset"):
        load_config(preset="set9", line="0:1:0.5")
    with pytest.raises(ConfigError, match="custom"):
        load_config(preset="custom", line="0:1:0.5")
    with pytest.raises(ConfigError, match="state"):
        load_config(line="0:1:0.5", state="squeezed:1")
    with pytest.raises(ConfigError):
        load_config(line="0:1:0.5", grid2d="0:1:1,0:1:1")


def test_custom_preset():
    cfg = load_config(preset="custom", line="0:0:1", delta="0.2", g="0.004", eps_d="0.02", m="5")
    p = cfg.protocol()
    assert p.sys.delta == 0.2 and p.m == 5
    assert p.eps_half_mag == pytest.approx(0.04 / (8 * 5 * 0.004))


def test_grids():
    assert [p.real for p in parse_range("-0.4:0.4:0.2").points()] == [-0.4, -0.2, 0.0, 0.2, 0.4]
    assert len(parse_range("-4:4:0.2").points()) == 41
    assert parse_range("1:0:0.1").points() == []
    g2 = Grid2D(LineGrid(0, 1, 1), LineGrid(-1, 0, 1))
    assert g2.points() == [-1j, 1 - 1j, 0j, 1 + 0j]


def test_parse_state():
    psi, _ = parse_state("coherent:0.5,-0.25", 32)
    assert abs(psi[1] / psi[0] - (0.5 - 0.25j)) < 1e-12
    psi, _ = parse_state("fock:3", 8)
    assert psi[3] == 1
    with pytest.raises(ConfigError):
        parse_state("fock:9", 8)


def small_config(**kw):
    base = dict(preset="set2", state="vacuum", line="-1:1:0.5", engine="analytic", n_fock="48")
    base.update(kw)
    return load_config(**base)


def test_scan_vacuum_origin_row():
    result = run_scan(small_config(line="0:0:1"))
    (row,) = result.rows
    assert row.w_est == pytest.approx(1 / math.pi, abs=1e-12)
    assert row.w_oracle == pytest.approx(1 / math.pi, abs=1e-12)
    # t_P + 2 t_half = 300 ns + 2 * 8/3 ns at set-2 parameters
    assert row.duration_ns == pytest.approx(300 + 16 / 3)


def test_scan_vacuum_line_accuracy():
    result = run_scan(load_config(preset="set2", state="vacuum", line="-3:3:0.25",
                                  engine="exact", n_fock=128))
    assert len(result.rows) == 25
    assert max(r.abs_err for r in result.rows) <= 5e-3


def test_empty_grid_gives_no_rows():
    result = run_scan(small_config(line="1:0:0.1"))
    assert result.rows == []
    assert format_csv(result).strip().split(",") == CSV_COLUMNS


def test_csv_format():
    result = run_scan(small_config())
    text = format_csv(result)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 6
    assert [float(r[0]) for r in rows[1:]] == [-1, -0.5, 0, 0.5, 1]
    assert all(r[8] in ("0", "1") for r in rows[1:])
    assert float(rows[3][2]) == pytest.approx(1 / math.pi, abs=1e-15)
    # 17 significant digits reproduce every double exactly
    assert [float(r[2]) for r in rows[1:]] == [r.w_est for r in result.rows]


def test_json_header_and_round_trip(tmp_path):
    result = run_scan(small_config())
    doc = json.loads(format_json(result))
    assert doc["header"]["preset"] == "set2"
    assert doc["header"]["m"] == 8
    assert doc["header"]["eps_half_table"] == 0.281
    assert sum(doc["header"]["regime_summary"].values()) == 5
    emit(result, str(tmp_path / "r.json"), "json")
    again = load_json_result(str(tmp_path / "r.json"))
    assert format_csv(again) == format_csv(result)


def test_parallel_and_repeat_runs_identical():
    cfg1 = small_config(engine="exact", workers=1, state="cat:1,-")
    cfg4 = small_config(engine="exact", workers=4, state="cat:1,-")
    a, b, c = format_csv(run_scan(cfg1)), format_csv(run_scan(cfg1)), format_csv(run_scan(cfg4))
    assert a == b == c


def test_workers_env(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert small_config().workers == 3
    monkeypatch.setenv(cli.WORKERS_ENV, "lots")
    with pytest.raises(ConfigError):
        small_config()


def test_main_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert cli.main(["scan", "--preset", "set2", "--state", "vacuum", "--line", "-0.4:0.4:0.2",
                     "--engine", "analytic", "--n-fock", "48", "--out", str(out)]) == 0
    assert out.read_text().startswith(",".join(CSV_COLUMNS))
    assert cli.main(["scan", "--preset", "set2"]) == 2
    assert cli.main(["scan", "--preset", "nope", "--line", "0:1:1"]) == 2
    assert cli.main(["bogus"]) == 2
    assert cli.main(["validate", "--preset", "set1", "--state", "cat:2,-", "--alpha", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["checks"]["half_pi_pulse"]["status"] == "violated"
    assert cli.main(["prepare", "--kind", "coherent", "--alpha", "1", "--n-fock", "48"]) == 0
    prep = json.loads(capsys.readouterr().out)
    assert prep["fidelity"] >= 0.99
    assert cli.main(["prepare", "--kind", "fock1", "--engine", "analytic"]) == 2


def test_main_numerical_failure(monkeypatch):
    def boom(cfg):
        raise ArithmeticError("imaginary Wigner value")
    monkeypatch.setattr(cli, "run_scan", boom)
    assert cli.main(["scan", "--line", "0:1:1"]) == 3
