"""CLI behavior: config validation, outputs, determinism, manifest round-trip."""

import json
import math

import numpy as np
import pytest

from tubarc.cli import PRESETS, ConfigError, RunConfig, main

MINIMAL = {
    "geometry": {"a": 0.85, "L": 100.0, "kappa0": 0.0, "s0": 0.0},
    "basis": {"M": 1, "N": 2},
    "quadrature": {"n_theta": 16, "panels": 4, "points_per_panel": 8},
    "outputs": {"n_states": 4},
}


def write_config(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


class TestConfigValidation:
    def test_minimal_roundtrip(self):
        cfg = RunConfig(MINIMAL)
        assert cfg.cases == [(0.0, 0.0)]
        assert cfg.basis().size == 6

    def test_unknown_top_level_key(self):
        bad = dict(MINIMAL, extra={})
        with pytest.raises(ConfigError, match="extra"):
            RunConfig(bad)

    def test_unknown_nested_key(self):
        bad = json.loads(json.dumps(MINIMAL))
        bad["geometry"]["radius"] = 1.0
        with pytest.raises(ConfigError, match="radius"):
            RunConfig(bad)

    def test_missing_required(self):
        bad = {"basis": {"M": 1, "N": 2}}
        with pytest.raises(ConfigError, match="geometry"):
            RunConfig(bad)

    def test_physical_invariants_checked(self):
        bad = json.loads(json.dumps(MINIMAL))
        bad["geometry"]["kappa0"] = 2.0
        bad["geometry"]["s0"] = 50.0
        with pytest.raises(ValueError, match="degenerate"):
            RunConfig(bad)

    def test_type_errors(self):
        bad = json.loads(json.dumps(MINIMAL))
        bad["basis"]["M"] = 1.5
        with pytest.raises(ConfigError, match="integer"):
            RunConfig(bad)

    def test_custom_lattice(self):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["lattice"] = {"arrangement": "custom", "strength": 10.0,
                          "sites": [[0.0, 50.0], [3.14, 25.0]]}
        lat = RunConfig(cfg).lattice()
        assert lat.size == 2

    def test_presets_all_valid(self):
        for name, preset in PRESETS.items():
            cfg = RunConfig(preset)
            assert cfg.cases, name


class TestSolveCommand:
    def test_straight_solve_outputs(self, tmp_path):
        cfgfile = write_config(tmp_path, MINIMAL)
        out = tmp_path / "out"
        assert main(["solve", "--config", cfgfile, "--out", str(out)]) == 0
        spectrum = json.loads((out / "case_000_k0.00" / "spectrum.json").read_text())
        assert "analytic" in spectrum
        assert spectrum["analytic"]["max_abs_error_meV"] < 1e-8
        assert (out / "case_000_k0.00" / "states.csv").exists()
        assert (out / "table.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "solve"
        assert "case_000_k0.00/spectrum.json" in manifest["outputs_written"]

    def test_sweep_produces_case_dirs(self, tmp_path):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["geometry"].pop("kappa0")
        cfg["geometry"].pop("s0")
        cfg["geometry"]["cases"] = [{"kappa0": 0.0, "s0": 0.0},
                                    {"kappa0": 0.75, "s0": 51.87}]
        cfgfile = write_config(tmp_path, cfg)
        out = tmp_path / "sweep"
        assert main(["solve", "--config", cfgfile, "--out", str(out)]) == 0
        assert (out / "case_000_k0.00").is_dir()
        assert (out / "case_001_k0.75_s51.87").is_dir()

    def test_manifest_reruns_identically(self, tmp_path):
        cfgfile = write_config(tmp_path, MINIMAL)
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        assert main(["solve", "--config", cfgfile, "--out", str(out1)]) == 0
        assert main(["solve", "--config", str(out1 / "manifest.json"),
                     "--out", str(out2)]) == 0
        a = (out1 / "case_000_k0.00" / "spectrum.json").read_bytes()
        b = (out2 / "case_000_k0.00" / "spectrum.json").read_bytes()
        assert a == b

    def test_determinism_across_thread_flag(self, tmp_path):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["geometry"]["kappa0"] = 0.95
        cfg["geometry"]["s0"] = 52.37
        cfgfile = write_config(tmp_path, cfg)
        outs = []
        for threads, sub in [(1, "t1"), (4, "t4")]:
            out = tmp_path / sub
            assert main(["solve", "--config", cfgfile, "--out", str(out),
                         "--threads", str(threads), "--seedless"]) == 0
            outs.append((out / "case_000_k0.95_s52.37" / "spectrum.json").read_bytes()
                        + (out / "case_000_k0.95_s52.37" / "states.csv").read_bytes()
                        + (out / "table.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_config_error_record(self, tmp_path, capsys):
        bad = write_config(tmp_path, {"geometry": {}})
        code = main(["solve", "--config", bad, "--out", str(tmp_path / "x")])
        assert code != 0
        record = json.loads(capsys.readouterr().out)
        assert record["error"]["type"] == "config"

    def test_numerical_error_record(self, tmp_path, capsys):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["quadrature"] = {"n_theta": 16, "panels": 1, "points_per_panel": 2}
        cfg["basis"] = {"M": 2, "N": 4}
        cfgfile = write_config(tmp_path, cfg)
        code = main(["solve", "--config", cfgfile, "--out", str(tmp_path / "y")])
        assert code != 0
        record = json.loads(capsys.readouterr().out)
        assert record["error"]["type"] in ("config", "numerical")


class TestDensityCommand:
    def test_profile_output(self, tmp_path):
        cfgfile = write_config(tmp_path, MINIMAL)
        out = tmp_path / "dens"
        assert main(["density", "--config", cfgfile, "--out", str(out),
                     "--state", "0"]) == 0
        lines = (out / "case_000_k0.00" / "density_state0.csv").read_text().splitlines()
        assert lines[0] == "s_nm,density_per_nm2"
        assert len(lines) == 513
        s, rho = zip(*(map(float, ln.split(",")) for ln in lines[1:]))
        expect = np.sin(np.pi * np.array(s) / 100.0) ** 2 / (np.pi * 85.0)
        np.testing.assert_allclose(rho, expect, atol=1e-12)

    def test_surface_grid_output(self, tmp_path):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["outputs"]["surface_n_theta"] = 8
        cfg["outputs"]["surface_n_s"] = 16
        cfgfile = write_config(tmp_path, cfg)
        out = tmp_path / "surf"
        assert main(["density", "--config", cfgfile, "--out", str(out),
                     "--surface", "--state", "0"]) == 0
        lines = (out / "case_000_k0.00" / "density_surface_state0.csv").read_text().splitlines()
        assert lines[0] == "theta_rad,s_nm,density_per_nm2"
        assert len(lines) == 1 + 8 * 16

    def test_bad_state_index(self, tmp_path, capsys):
        cfgfile = write_config(tmp_path, MINIMAL)
        code = main(["density", "--config", cfgfile, "--out",
                     str(tmp_path / "z"), "--state", "99"])
        assert code != 0
        assert "state index" in capsys.readouterr().out


class TestSitesCommand:
    def test_armchair_reference_counts(self, tmp_path):
        out = tmp_path / "sites"
        assert main(["sites", "--preset", "table5", "--out", str(out)]) == 0
        lines = (out / "sites.csv").read_text().splitlines()
        assert len(lines) == 1 + 1170
        # every site sits a tube radius from the axis
        for ln in lines[1:50]:
            j, k, theta, s, x, y, z = ln.split(",")
            assert 0.0 < float(s) < 100.0

    def test_single_site(self, tmp_path):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["lattice"] = {"arrangement": "armchair", "strength": 1.0,
                          "n_angular": 1, "n_rings": 1}
        cfgfile = write_config(tmp_path, cfg)
        out = tmp_path / "one"
        assert main(["sites", "--config", cfgfile, "--out", str(out)]) == 0
        lines = (out / "sites.csv").read_text().splitlines()
        assert len(lines) == 2
        j, k, theta, s, x, y, z = lines[1].split(",")
        assert float(theta) == 0.0 and float(s) == 50.0

    def test_requires_lattice(self, tmp_path, capsys):
        cfgfile = write_config(tmp_path, MINIMAL)
        code = main(["sites", "--config", cfgfile, "--out", str(tmp_path / "w")])
        assert code != 0
        assert "lattice" in capsys.readouterr().out

    def test_embedded_distance_from_axis(self, tmp_path):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["geometry"]["kappa0"] = 1.0
        cfg["geometry"]["s0"] = 52.5
        cfg["lattice"] = {"arrangement": "armchair", "strength": 1.0,
                          "n_angular": 4, "n_rings": 5}
        cfgfile = write_config(tmp_path, cfg)
        out = tmp_path / "emb"
        assert main(["sites", "--config", cfgfile, "--out", str(out)]) == 0
        from tubarc import TubeGeometry, axis_point
        geom = TubeGeometry(a=0.85, L=100.0, kappa0=1.0, s0=52.5)
        for ln in (out / "sites.csv").read_text().splitlines()[1:]:
            _, _, theta, s, x, y, z = map(float, ln.split(",")[0:7])
            ax, ay, az = axis_point(geom, s)
            d = math.sqrt((x - ax) ** 2 + (y - ay) ** 2 + (z - az) ** 2)
            assert d == pytest.approx(0.85, abs=1e-10)


class TestConvergenceCommand:
    def test_straight_tube_rows_identical_to_analytic(self, tmp_path):
        cfgfile = write_config(tmp_path, MINIMAL)
        out = tmp_path / "conv"
        assert main(["convergence", "--config", cfgfile, "--out", str(out)]) == 0
        rows = (out / "convergence.csv").read_text().splitlines()
        assert rows[0] == "stage,M,N,size,e0,e1,e2,e3"
        report = json.loads((out / "convergence.json").read_text())
        assert report["quadrature_drift_meV"] < 1e-9
        # ground level identical across bases on the straight tube
        basis_rows = [r.split(",") for r in rows[1:] if r.startswith("basis")]
        e0 = [float(r[4]) for r in basis_rows]
        assert max(e0) - min(e0) < 1e-9

    def test_curved_sweep_monotone_and_flagged(self, tmp_path):
        cfg = json.loads(json.dumps(MINIMAL))
        cfg["geometry"]["kappa0"] = 1.0
        cfg["geometry"]["s0"] = 52.5
        cfg["basis"] = {"M": 2, "N": 4}
        cfg["quadrature"] = {"n_theta": 64, "panels": 8, "points_per_panel": 12}
        cfgfile = write_config(tmp_path, cfg)
        out = tmp_path / "conv2"
        assert main(["convergence", "--config", cfgfile, "--out", str(out)]) == 0
        report = json.loads((out / "convergence.json").read_text())
        # flags are present for every enlargement step and honestly computed:
        # the bent-tube ground level is still descending at these sizes
        assert set(report["five_digit_stable_by"]) == {"M2_N4", "M3_N6", "M4_N8"}
        assert report["five_digit_stable_by"]["M2_N4"] is False
        rows = [r.split(",") for r in
                (out / "convergence.csv").read_text().splitlines()[1:]
                if r.startswith("basis")]
        e0 = [float(r[4]) for r in rows]
        # variational: ground level never rises across nested bases
        assert all(later - earlier <= 1e-9
                   for earlier, later in zip(e0[:-1], e0[1:]))


class TestPresets:
    def test_preset_listing_error(self, tmp_path, capsys):
        code = main(["solve", "--preset", "nope", "--out", str(tmp_path / "p")])
        assert code != 0
        assert "unknown preset" in capsys.readouterr().out

    def test_needs_config_or_preset(self, capsys):
        assert main(["solve"]) != 0
        assert "required" in capsys.readouterr().out
