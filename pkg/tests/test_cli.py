"""End-to-end tests for the command-line interface and config parsing."""

import json

import numpy as np
import pytest

from ddesim import __version__
from ddesim.cli import main
from ddesim.config import ConfigError, parse_config


def read_csv(path):
    comments, header, rows = [], None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh.read().splitlines():
            if line.startswith("# "):
                comments.append(line[2:])
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    return comments, header, rows


def column(header, rows, name, cast=float):
    k = header.index(name)
    return [cast(r[k]) for r in rows]


def test_parse_config_defaults():
    cfg = parse_config()
    assert cfg.params.g0 == 0.05
    assert cfg.params.g1 == 0.05
    assert cfg.params.delta_a == 0.0
    assert cfg.params.eta_a == 0.0
    assert cfg.params.gamma_a_abs == 50e12
    assert cfg.n_times == 200
    assert cfg.n_samples == 4096
    assert cfg.pi_units is False
    assert cfg.t_max is None
    assert cfg.out is None


def test_parse_config_file_and_set_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment line\n"
        "g0 = 0.02\n"
        "\n"
        "ETA0 = 0.03  # keys are case-insensitive\n"
        "pi_units = true\n"
        "n_times = 50\n")
    cfg = parse_config(str(path))
    assert cfg.params.g0 == 0.02
    assert cfg.params.eta0 == 0.03
    assert cfg.pi_units is True
    assert cfg.n_times == 50
    # command-line assignments win over the file
    cfg2 = parse_config(str(path), ("g0=0.07", "n_times = 60"))
    assert cfg2.params.g0 == 0.07
    assert cfg2.n_times == 60


def test_parse_config_unknown_key_names_key_and_line(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("g0 = 0.02\nzeta = 1.0\n")
    with pytest.raises(ConfigError, match=r"unknown key 'zeta' on line 2"):
        parse_config(str(path))


def test_parse_config_malformed_value_names_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("\ng0 = fast\n")
    with pytest.raises(ConfigError, match=r"invalid value for key 'g0' on line 2"):
        parse_config(str(path))


def test_parse_config_malformed_set_argument():
    with pytest.raises(ConfigError, match=r"expected 'key = value'"):
        parse_config(None, ("g0",))
    with pytest.raises(ConfigError, match=r"unknown key 'speed'"):
        parse_config(None, ("speed=3",))


def test_parse_config_validates_run_settings():
    with pytest.raises(ConfigError):
        parse_config(None, ("n_samples=1000",))
    with pytest.raises(ConfigError):
        parse_config(None, ("n_times=1",))
    with pytest.raises(ConfigError):
        parse_config(None, ("t_max=-5",))
    with pytest.raises(ConfigError):
        parse_config(None, ("workers=0",))


def test_populations_csv(tmp_path, capsys):
    out = tmp_path / "pops.csv"
    code = main(["populations", "--set", "t_max=50", "--set", "n_times=5",
                 "--out", str(out)])
    assert code == 0
    assert f"wrote {out} and {out}.meta.json" in capsys.readouterr().out
    comments, header, rows = read_csv(out)
    assert header == ["t_native", "t_seconds", "rho_e", "rho_s", "rho_a", "rho_g",
                      "rho_e_analytic", "rho_s_analytic", "rho_a_analytic",
                      "rho_g_analytic"]
    assert len(rows) == 5
    t_nat = column(header, rows, "t_native")
    t_sec = column(header, rows, "t_seconds")
    assert np.allclose(t_sec, np.array(t_nat) / 50e12)
    analytic = np.array([[float(r[k]) for k in range(6, 10)] for r in rows])
    assert np.allclose(analytic.sum(axis=1), 1.0, atol=1e-12)
    numeric = np.array([[float(r[k]) for k in range(2, 6)] for r in rows])
    assert np.allclose(numeric.sum(axis=1), 1.0, atol=1e-9)
    # both start in the ground state; dissipation separates them later
    assert np.allclose(numeric[0], [0, 0, 0, 1], atol=1e-12)
    assert np.allclose(analytic[0], [0, 0, 0, 1], atol=1e-12)
    assert any("propagation method" in c for c in comments)


def test_populations_without_closed_form(tmp_path):
    out = tmp_path / "pops.csv"
    code = main(["populations", "--set", "eta0=0.03", "--set", "eta1=0.04",
                 "--set", "t_max=50", "--set", "n_times=5", "--out", str(out)])
    assert code == 0
    comments, header, rows = read_csv(out)
    assert any("closed form unavailable" in c for c in comments)
    assert all(r[header.index("rho_g_analytic")] == "nan" for r in rows)


def test_csv_byte_reproducibility(tmp_path):
    args = ["populations", "--set", "t_max=80", "--set", "n_times=7"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_steady_csv(tmp_path):
    out = tmp_path / "steady.csv"
    assert main(["steady", "--out", str(out)]) == 0
    _, header, rows = read_csv(out)
    assert header == ["quantity", "value"]
    table = {r[0]: float(r[1]) for r in rows}
    assert table["concurrence"] > 0.9
    assert abs(table["rho_e"] + table["rho_s"] + table["rho_a"] + table["rho_g"] - 1) < 1e-9
    assert 0.0 <= table["purity"] <= 1.0 + 1e-12
    assert table["n_boson"] >= 0.0
    assert "rho2q_0_0_re" in table
    assert "rho_ss_11_11_re" in table
    meta = json.loads((tmp_path / "steady.csv.meta.json").read_text())
    assert meta["command"] == "steady"
    assert meta["version"] == __version__
    assert meta["params"]["g0"] == 0.05
    assert meta["n_max"] == 2
    assert meta["csv"] == str(out)
    assert meta["concurrence"] == pytest.approx(table["concurrence"], abs=1e-9)
    assert "wall_clock_seconds" in meta


def test_g2_csv_antibunched_and_recovering(tmp_path):
    out = tmp_path / "g2.csv"
    code = main(["g2", "--set", "delta0=0.02", "--set", "delta1=-0.02",
                 "--out", str(out)])
    assert code == 0
    comments, header, rows = read_csv(out)
    assert header == ["tau_native", "tau_seconds", "raw", "normalized"]
    normalized = column(header, rows, "normalized")
    assert normalized[0] < 0.2
    assert abs(normalized[-1] - 1.0) <= 0.05
    tau_nat = column(header, rows, "tau_native")
    tau_sec = column(header, rows, "tau_seconds")
    assert np.allclose(tau_sec, np.array(tau_nat) / 50e12)
    assert any(c.startswith("g2_zero=") for c in comments)
    meta = json.loads((out.parent / "g2.csv.meta.json").read_text())
    assert meta["bright_emitters"] == [0, 1]
    assert meta["method"] in ("spectral", "rk")


def test_concurrence_map_one_dimensional(tmp_path):
    out = tmp_path / "cmap.csv"
    code = main(["concurrence-map", "--out", str(out),
                 "--set", "axis1=delta0", "--set", "axis1_min=-0.02",
                 "--set", "axis1_max=0.02", "--set", "axis1_points=3"])
    assert code == 0
    _, header, rows = read_csv(out)
    assert header == ["axis1_value", "axis2_value", "concurrence", "g2_zero", "error"]
    assert len(rows) == 3
    assert [r[header.index("axis2_value")] for r in rows] == ["", "", ""]
    assert [r[header.index("error")] for r in rows] == ["", "", ""]
    conc = column(header, rows, "concurrence")
    assert all(0.0 <= c <= 1.0 for c in conc)
    assert np.allclose(column(header, rows, "axis1_value"), [-0.02, 0.0, 0.02])


def test_concurrence_map_partial_axis_is_config_error(tmp_path, capsys):
    code = main(["concurrence-map", "--out", str(tmp_path / "x.csv"),
                 "--set", "axis1=delta0", "--set", "axis1_min=-0.02"])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_timescale_map_pi_units(tmp_path):
    base = ["timescale-map", "--set", "eta0=0.03", "--set", "axis1=eta1",
            "--set", "axis1_min=0.028", "--set", "axis1_max=0.032",
            "--set", "axis1_points=2"]
    plain, scaled = tmp_path / "ts.csv", tmp_path / "ts_pi.csv"
    assert main(base + ["--out", str(plain)]) == 0
    assert main(base + ["--out", str(scaled), "--pi-units"]) == 0
    c1, h1, r1 = read_csv(plain)
    c2, h2, r2 = read_csv(scaled)
    assert any("period_display unit: T = 1/gamma_a" in c for c in c1)
    assert any("period_display unit: T = 1/(pi*gamma_a)" in c for c in c2)
    native1 = column(h1, r1, "period_native")
    native2 = column(h2, r2, "period_native")
    assert np.allclose(native1, native2)
    assert np.allclose(column(h1, r1, "period_display"), native1)
    assert np.allclose(column(h2, r2, "period_display"), np.array(native2) * np.pi)
    assert np.allclose(column(h1, r1, "period_seconds"), np.array(native1) / 50e12)


def test_degenerate_parameters_exit_numerical(tmp_path, capsys):
    code = main(["steady", "--out", str(tmp_path / "x.csv"),
                 "--set", "g0=0", "--set", "gamma_r0=0", "--set", "gamma_d0=0"])
    assert code == 2
    assert "numerical error" in capsys.readouterr().err


def test_bad_set_value_exits_config_error(tmp_path, capsys):
    code = main(["steady", "--out", str(tmp_path / "x.csv"), "--set", "g0=abc"])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_validate_exit_codes(monkeypatch, capsys):
    monkeypatch.setattr("ddesim.cli.run_validation", lambda: 0)
    assert main(["validate"]) == 0
    monkeypatch.setattr("ddesim.cli.run_validation", lambda: 2)
    assert main(["validate"]) == 3
    assert "validation failed: 2 check(s)" in capsys.readouterr().err


def test_default_output_name(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["steady"]) == 0
    assert (tmp_path / "steady.csv").exists()
    assert (tmp_path / "steady.csv.meta.json").exists()
    assert "wrote steady.csv and steady.csv.meta.json" in capsys.readouterr().out
