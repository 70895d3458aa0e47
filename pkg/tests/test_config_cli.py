import json
import math
import os

import numpy as np
import pytest

import oracles
from resrelax import ConfigError, ThermalOhmic, parse_config
from resrelax.cli import main

INERTIAL_INI = """\
[system]
omega_0 = 1.0
g = 1.0

[reservoir]
model = inertial_vacuum

[quadrature]
omega_cutoff = 40.0

[evolve]
tau_end = 8.0
"""

THERMAL_INI = """\
[system]
omega_0 = 1.0
g = 1.0

[reservoir]
model = thermal_ohmic
eta = 0.5
omega_j = 5.0
temperature = 1.0

[quadrature]
omega_cutoff = 30.0
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------------------
# config parsing

class TestParseConfig:
    def test_roundtrip_sections(self, tmp_path):
        cfg = parse_config(write(tmp_path, THERMAL_INI))
        spec = cfg.system()
        assert spec.omega_ab(1, 0) == pytest.approx(1.0)
        kernel = cfg.kernel()
        assert isinstance(kernel, ThermalOhmic)
        assert kernel.temperature == 1.0
        assert cfg.quadrature().omega_cutoff == 30.0

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            parse_config("/no/such/file.ini")

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write(tmp_path, INERTIAL_INI + "\n[bogus]\nx = 1\n"))

    def test_unknown_key_rejected(self, tmp_path):
        bad = INERTIAL_INI.replace("omega_0 = 1.0",
                                   "omega_0 = 1.0\nwhatever = 2")
        with pytest.raises(ConfigError):
            parse_config(write(tmp_path, bad))

    def test_reservoir_params_validated_eagerly(self, tmp_path):
        bad = THERMAL_INI.replace("eta = 0.5", "eta = -1.0")
        with pytest.raises(ConfigError):
            parse_config(write(tmp_path, bad))

    def test_explicit_levels(self, tmp_path):
        text = """\
[system]
levels = [("g", -0.5), ("e", 0.5)]
coupling_ops = [[[0, 0.5], [0.5, 0]]]
g = 0.2

[reservoir]
model = inertial_vacuum

[quadrature]
"""
        cfg = parse_config(write(tmp_path, text))
        spec = cfg.system()
        assert spec.labels == ("g", "e")
        assert spec.g == 0.2

    def test_tabulated_path_relative_to_config(self, tmp_path):
        u = np.linspace(0.0, 4.0, 32)
        cs = -1.0 / (4 * math.pi ** 2 * (u ** 2 + 0.01) ** 2) * (u ** 2 - 0.01)
        ca = -0.1 * u / (2 * math.pi ** 2 * (u ** 2 + 0.01) ** 2)
        rows = "\n".join("%.17g,%.17g,%.17g" % t for t in zip(u, cs, ca))
        (tmp_path / "kern.csv").write_text("u,Cs,Ca\n" + rows + "\n")
        text = """\
[system]
omega_0 = 1.0
g = 1.0

[reservoir]
model = tabulated
path = kern.csv

[quadrature]
"""
        cfg = parse_config(write(tmp_path, text))
        k = cfg.kernel()
        assert k.u_max_hint(1.0, 0.0) <= 4.0

    def test_with_overrides(self, tmp_path):
        cfg = parse_config(write(tmp_path, THERMAL_INI))
        hot = cfg.with_overrides({("reservoir", "temperature"): 2.5})
        assert hot.kernel().temperature == 2.5
        assert cfg.kernel().temperature == 1.0  # original untouched


# ---------------------------------------------------------------------------
# CLI plumbing

def run_cli(args):
    return main(args)


class TestRatesCommand:
    def test_row_contract(self, tmp_path, capsys):
        path = write(tmp_path, INERTIAL_INI)
        assert run_cli(["rates", "--config", path]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "mechanism,a,b,omega,gamma_or_Gamma,err"
        assert len(lines) == 1 + 2 + 4
        gamma_lines = [ln for ln in lines[1:] if ln.split(",")[1] == ""]
        assert len(gamma_lines) == 2

    def test_gamma_values(self, tmp_path, capsys):
        path = write(tmp_path, INERTIAL_INI)
        run_cli(["rates", "--config", path])
        lines = capsys.readouterr().out.strip().splitlines()
        rf_line = lines[1].split(",")
        assert rf_line[0] == "rf"
        assert float(rf_line[4]) == pytest.approx(
            oracles.inertial_gamma(1.0), rel=1e-6
        )

    def test_g_zero_all_zero(self, tmp_path, capsys):
        path = write(tmp_path, INERTIAL_INI.replace("g = 1.0", "g = 0.0"))
        run_cli(["rates", "--config", path])
        lines = capsys.readouterr().out.strip().splitlines()
        values = [float(ln.split(",")[4]) for ln in lines[1:]]
        assert values == [0.0] * 6

    def test_thermal_coth_ratio(self, tmp_path, capsys):
        path = write(tmp_path, THERMAL_INI)
        run_cli(["rates", "--config", path])
        lines = capsys.readouterr().out.strip().splitlines()
        rf = float(lines[1].split(",")[4])
        sr = float(lines[2].split(",")[4])
        assert rf / sr == pytest.approx(1.0 / math.tanh(0.5), rel=1e-6)

    def test_config_error_exit_code(self, capsys):
        assert run_cli(["rates", "--config", "/missing.ini"]) == 2


class TestShiftCommand:
    def test_json_fields(self, tmp_path):
        path = write(tmp_path, INERTIAL_INI)
        out = tmp_path / "shift.json"
        assert run_cli(["shift", "--config", path, "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        for key in ("level", "delta_e_rf", "delta_e_sr", "omega_c",
                    "err_quad", "err_cutoff", "delta_sr_relative"):
            assert key in data
        assert data["delta_e_rf"] == pytest.approx(
            oracles.inertial_shift_rf_upper(1.0, 40.0), rel=1e-4
        )
        assert abs(data["delta_sr_relative"]) < 1e-6

    def test_missing_cutoff_names_key(self, tmp_path, capsys):
        text = INERTIAL_INI.replace("omega_cutoff = 40.0", "")
        path = write(tmp_path, text)
        assert run_cli(["shift", "--config", path]) == 2
        assert "quadrature.omega_cutoff" in capsys.readouterr().err

    def test_small_cutoff_exits_3(self, tmp_path, capsys):
        text = INERTIAL_INI.replace("omega_cutoff = 40.0",
                                    "omega_cutoff = 0.5")
        path = write(tmp_path, text)
        assert run_cli(["shift", "--config", path]) == 3
        assert "omega_cutoff" in capsys.readouterr().err

    def test_both_reports_residual(self, tmp_path):
        path = write(tmp_path, INERTIAL_INI)
        out = tmp_path / "shift.json"
        run_cli(["shift", "--config", path, "--method", "both",
                 "--out", str(out)])
        data = json.loads(out.read_text())
        assert data["kk_vs_direct_residual"] < 1e-5


class TestEvolveCommand:
    def test_csv_and_sidecar(self, tmp_path):
        path = write(tmp_path, INERTIAL_INI)
        out = tmp_path / "traj.csv"
        assert run_cli(["evolve", "--config", path, "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "tau,mean_energy,closed_form,ode"
        assert len(lines) == 102
        side = json.loads((tmp_path / "traj.csv.json").read_text())
        assert side["a_up"] == pytest.approx(0.0, abs=1e-8)
        assert side["equilibrium_energy"] == pytest.approx(-0.5, rel=1e-6)
        assert side["fitted_decay_rate"] == pytest.approx(
            side["gamma_rf"], rel=1e-6
        )

    def test_ode_column_tracks_closed_form(self, tmp_path):
        path = write(tmp_path, INERTIAL_INI)
        out = tmp_path / "traj.csv"
        run_cli(["evolve", "--config", path, "--out", str(out)])
        for line in out.read_text().strip().splitlines()[1:]:
            _, _, closed, ode = (float(x) for x in line.split(","))
            assert ode == pytest.approx(closed, abs=1e-8)

    def test_flat_start_at_equilibrium(self, tmp_path):
        text = INERTIAL_INI + "h0 = -0.5\n"
        # inertial ground state is the equilibrium: flat line
        path = write(tmp_path, text.replace("[evolve]\ntau_end = 8.0",
                                            "[evolve]\ntau_end = 8.0"))
        out = tmp_path / "traj.csv"
        run_cli(["evolve", "--config", path, "--out", str(out)])
        rows = out.read_text().strip().splitlines()[1:]
        energies = [float(r.split(",")[1]) for r in rows]
        assert max(abs(e - energies[0]) for e in energies) < 1e-7


class TestKkCheckCommand:
    def test_builtin_suite_passes(self, tmp_path):
        out = tmp_path / "kk.json"
        assert run_cli(["kk-check", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["passed"] is True
        assert data["max_rel_err"] < 1e-4
        assert abs(data["zero_point"]) < 1e-10

    def test_user_table_with_nan_rejected(self, tmp_path, capsys):
        table = tmp_path / "table.csv"
        table.write_text("0.1,1.0,-0.5\n0.2,nan,-0.4\n0.3,0.8,-0.3\n")
        cfg_text = "[kk_check]\ntable = table.csv\n"
        path = write(tmp_path, cfg_text)
        assert run_cli(["kk-check", "--config", path]) == 2


class TestSweepCommand:
    def test_lexicographic_order(self, tmp_path):
        text = THERMAL_INI + (
            "\n[sweep]\nquantity = gamma_rf\n"
            "temperature = [2.0, 0.5, 1.0]\nomega_0 = [1.5, 1.0]\n"
        )
        path = write(tmp_path, text)
        out = tmp_path / "sweep.csv"
        assert run_cli(["sweep", "--config", path, "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "omega_0,temperature,quantity,value,err"
        grid = [tuple(float(x) for x in ln.split(",")[:2])
                for ln in lines[1:]]
        assert grid == sorted(grid)
        assert len(grid) == 6

    def test_values_match_direct_call(self, tmp_path):
        from resrelax import QuadratureConfig, gamma_rf

        text = THERMAL_INI + "\n[sweep]\nquantity = gamma_rf\n" \
                             "temperature = [1.0]\n"
        path = write(tmp_path, text)
        out = tmp_path / "sweep.csv"
        run_cli(["sweep", "--config", path, "--out", str(out)])
        value = float(out.read_text().strip().splitlines()[1].split(",")[2])
        ref = gamma_rf(ThermalOhmic(eta=0.5, omega_j=5.0, temperature=1.0),
                       1.0, 1.0, QuadratureConfig(omega_cutoff=30.0))
        assert value == pytest.approx(ref.value, rel=1e-12)

    def test_jobs_do_not_change_bytes(self, tmp_path):
        text = THERMAL_INI + (
            "\n[sweep]\nquantity = gamma_sr\n"
            "temperature = [0.5, 1.0, 2.0, 4.0]\n"
        )
        path = write(tmp_path, text)
        one = tmp_path / "one.csv"
        four = tmp_path / "four.csv"
        run_cli(["sweep", "--config", path, "--out", str(one)])
        run_cli(["sweep", "--config", path, "--jobs", "4", "--out",
                 str(four)])
        assert one.read_bytes() == four.read_bytes()

    def test_unknown_quantity_rejected(self, tmp_path, capsys):
        text = THERMAL_INI + "\n[sweep]\nquantity = bogus\n" \
                             "temperature = [1.0]\n"
        path = write(tmp_path, text)
        assert run_cli(["sweep", "--config", path]) == 2

    def test_oversized_grid_rejected(self, tmp_path, capsys):
        axis = "[" + ", ".join(str(float(i)) for i in range(1, 102)) + "]"
        text = THERMAL_INI + (
            "\n[sweep]\nquantity = gamma_rf\n"
            "temperature = %s\nomega_0 = %s\neta = %s\n" % (axis, axis, axis)
        )
        path = write(tmp_path, text)
        assert run_cli(["sweep", "--config", path]) == 2
        assert "10^6" in capsys.readouterr().err


def test_no_partial_output_on_failure(tmp_path):
    # a config that fails mid-run must not leave the target file behind
    text = INERTIAL_INI.replace("omega_cutoff = 40.0", "omega_cutoff = 0.5")
    path = write(tmp_path, text)
    out = tmp_path / "shift.json"
    assert run_cli(["shift", "--config", path, "--out", str(out)]) == 3
    assert not out.exists()
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".resrelax")]
    assert leftovers == []
