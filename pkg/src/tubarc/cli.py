"""Experiment driver: config in, spectra / densities / site maps / sweeps out.

One process handles one command.  A run is described by a JSON config with
``geometry``, ``basis``, ``quadrature``, optional ``lattice``, and
``outputs`` blocks; the geometry block may carry a ``cases`` list of
(kappa0, s0) overrides for table-style sweeps.  Shipped presets cover the
reference tables and figure datasets.  Every run writes a manifest holding
the fully resolved config, so re-running from the manifest reproduces the
outputs byte for byte: floats are serialized at 17 significant digits, all
reductions in the pipeline are fixed-order, and nothing consumes randomness
or wall-clock time.
"""

from __future__ import annotations

import argparse
import json
import math
import os
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (coefficient_terms, density_profile_at, state_report,
                       surface_density_grid)
from .assembly import DeltaSiteLattice, armchair_lattice
from .basis import BasisSpec
from .geometry import DEFAULT_HBAR2_OVER_2ME, TubeGeometry, embed
from .linalg import IllConditionedBasisError
from .quadrature import (DEFAULT_N_THETA, DEFAULT_PANELS,
                         DEFAULT_POINTS_PER_PANEL, build_grid)
from .solve import SurfaceSolution, solve_surface_spectrum, straight_spectrum

# ----------------------------------------------------------------------
# Deterministic serialization
# ----------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite value {x}")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def _json_dumps(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {_json_dumps(v, indent + 1)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(isinstance(v, (int, float, str, bool)) or v is None for v in seq)
        if flat:
            return "[" + ", ".join(_json_dumps(v) for v in seq) + "]"
        items = [inner + _json_dumps(v, indent + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: Path, obj) -> None:
    _write_atomic(path, _json_dumps(obj) + "\n")


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# Config schema
# ----------------------------------------------------------------------

class ConfigError(ValueError):
    pass


_GEOMETRY_KEYS = {"a", "L", "kappa0", "s0", "mass_ratio", "hbar2_over_2me", "cases"}
_CASE_KEYS = {"kappa0", "s0"}
_BASIS_KEYS = {"M", "N", "family"}
_QUAD_KEYS = {"n_theta", "panels", "points_per_panel"}
_LATTICE_KEYS = {"strength", "arrangement", "n_angular", "n_rings", "sites"}
_OUTPUT_KEYS = {"n_states", "coefficient_threshold", "state_index",
                "profile_theta", "profile_samples", "profile_states",
                "surface", "surface_n_theta", "surface_n_s", "out_dir"}
_TOP_KEYS = {"geometry", "basis", "quadrature", "lattice", "outputs"}


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _need(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return block[key]


def _num(block: dict, key: str, where: str, default=None, integer=False):
    if key not in block:
        if default is None:
            raise ConfigError(f"missing required key {key!r} in {where}")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{where}.{key} must be an integer, got {v!r}")
        return int(v)
    return float(v)


class RunConfig:
    """Validated run description; see the module docstring for the schema."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "config" in raw and set(raw) - {"config"} <= {
                "command", "preset", "package_version", "constants",
                "outputs_written", "threads", "seedless"}:
            raw = raw["config"]  # accept a manifest as a config
        _reject_unknown(raw, _TOP_KEYS, "config")

        geo = _need(raw, "geometry", "config")
        _reject_unknown(geo, _GEOMETRY_KEYS, "geometry")
        self.a = _num(geo, "a", "geometry")
        self.L = _num(geo, "L", "geometry")
        self.mass_ratio = _num(geo, "mass_ratio", "geometry", default=1.0)
        self.hbar2_over_2me = _num(geo, "hbar2_over_2me", "geometry",
                                   default=DEFAULT_HBAR2_OVER_2ME)
        if "cases" in geo:
            if not isinstance(geo["cases"], list) or not geo["cases"]:
                raise ConfigError("geometry.cases must be a non-empty list")
            self.cases = []
            for i, c in enumerate(geo["cases"]):
                _reject_unknown(c, _CASE_KEYS, f"geometry.cases[{i}]")
                k0 = _num(c, "kappa0", f"geometry.cases[{i}]")
                s0 = _num(c, "s0", f"geometry.cases[{i}]", default=0.0)
                self.cases.append((k0, s0))
        else:
            k0 = _num(geo, "kappa0", "geometry", default=0.0)
            s0 = _num(geo, "s0", "geometry", default=0.0)
            self.cases = [(k0, s0)]

        bas = _need(raw, "basis", "config")
        _reject_unknown(bas, _BASIS_KEYS, "basis")
        self.M = _num(bas, "M", "basis", integer=True)
        self.N = _num(bas, "N", "basis", integer=True)
        self.family = bas.get("family", "complex")

        quad = raw.get("quadrature", {})
        _reject_unknown(quad, _QUAD_KEYS, "quadrature")
        self.n_theta = _num(quad, "n_theta", "quadrature",
                            default=DEFAULT_N_THETA, integer=True)
        self.panels = _num(quad, "panels", "quadrature",
                           default=DEFAULT_PANELS, integer=True)
        self.points_per_panel = _num(quad, "points_per_panel", "quadrature",
                                     default=DEFAULT_POINTS_PER_PANEL, integer=True)

        lat = raw.get("lattice")
        self.lattice_cfg = None
        if lat is not None:
            _reject_unknown(lat, _LATTICE_KEYS, "lattice")
            arrangement = lat.get("arrangement", "armchair")
            strength = _num(lat, "strength", "lattice")
            if arrangement == "armchair":
                self.lattice_cfg = {
                    "arrangement": "armchair",
                    "strength": strength,
                    "n_angular": _num(lat, "n_angular", "lattice", integer=True),
                    "n_rings": _num(lat, "n_rings", "lattice", integer=True),
                }
            elif arrangement == "custom":
                sites = _need(lat, "sites", "lattice")
                if not isinstance(sites, list):
                    raise ConfigError("lattice.sites must be a list of [theta, s]")
                self.lattice_cfg = {
                    "arrangement": "custom",
                    "strength": strength,
                    "sites": [[float(t), float(s)] for t, s in sites],
                }
            else:
                raise ConfigError(f"unknown lattice arrangement {arrangement!r}")

        out = raw.get("outputs", {})
        _reject_unknown(out, _OUTPUT_KEYS, "outputs")
        self.n_states = _num(out, "n_states", "outputs", default=8, integer=True)
        self.coefficient_threshold = _num(out, "coefficient_threshold", "outputs",
                                          default=0.1)
        self.state_index = _num(out, "state_index", "outputs", default=0, integer=True)
        self.profile_theta = _num(out, "profile_theta", "outputs", default=math.pi)
        self.profile_samples = _num(out, "profile_samples", "outputs",
                                    default=512, integer=True)
        ps = out.get("profile_states", [0])
        if not isinstance(ps, list) or not all(isinstance(k, int) for k in ps):
            raise ConfigError("outputs.profile_states must be a list of integers")
        self.profile_states = ps
        self.surface = bool(out.get("surface", False))
        self.surface_n_theta = _num(out, "surface_n_theta", "outputs",
                                    default=128, integer=True)
        self.surface_n_s = _num(out, "surface_n_s", "outputs",
                                default=256, integer=True)
        self.out_dir = out.get("out_dir")

        # fail fast on physically invalid geometry, for every case
        for k0, s0 in self.cases:
            self.geometry(k0, s0)

    def geometry(self, kappa0: float, s0: float) -> TubeGeometry:
        return TubeGeometry(a=self.a, L=self.L, kappa0=kappa0, s0=s0,
                            mass_ratio=self.mass_ratio,
                            hbar2_over_2me=self.hbar2_over_2me)

    def basis(self) -> BasisSpec:
        return BasisSpec(M=self.M, N=self.N, L=self.L, family=self.family)

    def grid(self, geom: TubeGeometry, refine: int = 1):
        return build_grid(geom, n_theta=self.n_theta * refine,
                          panels=self.panels,
                          points_per_panel=self.points_per_panel * refine)

    def lattice(self) -> DeltaSiteLattice | None:
        cfg = self.lattice_cfg
        if cfg is None:
            return None
        if cfg["arrangement"] == "armchair":
            return armchair_lattice(cfg["n_angular"], cfg["n_rings"], self.L,
                                    cfg["strength"])
        return DeltaSiteLattice(strength=cfg["strength"],
                                sites=tuple((t, s) for t, s in cfg["sites"]))

    def resolved(self) -> dict:
        geometry = {
            "a": self.a, "L": self.L, "mass_ratio": self.mass_ratio,
            "hbar2_over_2me": self.hbar2_over_2me,
            "cases": [{"kappa0": k0, "s0": s0} for k0, s0 in self.cases],
        }
        cfg = {
            "geometry": geometry,
            "basis": {"M": self.M, "N": self.N, "family": self.family},
            "quadrature": {"n_theta": self.n_theta, "panels": self.panels,
                           "points_per_panel": self.points_per_panel},
            "outputs": {
                "n_states": self.n_states,
                "coefficient_threshold": self.coefficient_threshold,
                "state_index": self.state_index,
                "profile_theta": self.profile_theta,
                "profile_samples": self.profile_samples,
                "profile_states": self.profile_states,
                "surface": self.surface,
                "surface_n_theta": self.surface_n_theta,
                "surface_n_s": self.surface_n_s,
            },
        }
        if self.lattice_cfg is not None:
            cfg["lattice"] = dict(self.lattice_cfg)
        return cfg


# ----------------------------------------------------------------------
# Presets
# ----------------------------------------------------------------------

_TABLE_CASES = [
    {"kappa0": 0.00, "s0": 0.0},
    {"kappa0": 0.75, "s0": 51.87},
    {"kappa0": 0.75, "s0": 55.60},
    {"kappa0": 0.95, "s0": 52.37},
    {"kappa0": 0.95, "s0": 57.08},
    {"kappa0": 1.00, "s0": 52.50},
    {"kappa0": 1.00, "s0": 57.45},
    {"kappa0": 1.15, "s0": 73.79},
]

_LATTICE_CASES = [
    {"kappa0": 0.00, "s0": 0.0},
    {"kappa0": 0.95, "s0": 52.37},
    {"kappa0": 1.00, "s0": 52.50},
]

_ARMCHAIR_1170 = {"arrangement": "armchair", "strength": 400.0,
                  "n_angular": 6, "n_rings": 195}


def _table_preset(state_index: int) -> dict:
    return {
        "geometry": {"a": 0.85, "L": 100.0, "cases": list(_TABLE_CASES)},
        "basis": {"M": 2, "N": 4},
        "outputs": {"n_states": 4, "state_index": state_index,
                    "profile_states": [state_index]},
    }


def _fig_preset(state_index: int) -> dict:
    cfg = _table_preset(state_index)
    cfg["outputs"]["profile_theta"] = math.pi
    cfg["outputs"]["profile_samples"] = 512
    return cfg


PRESETS: dict[str, dict] = {
    "table1": _table_preset(0),
    "table2": _table_preset(1),
    "table3": _table_preset(2),
    "table4": _table_preset(3),
    "table5": {
        "geometry": {"a": 0.85, "L": 100.0, "cases": list(_LATTICE_CASES)},
        "basis": {"M": 6, "N": 4},
        "lattice": dict(_ARMCHAIR_1170),
        "outputs": {"n_states": 4, "state_index": 0},
    },
    "fig2": _fig_preset(0),
    "fig3": _fig_preset(1),
    "fig4": _fig_preset(2),
    "fig5": _fig_preset(3),
    "fig6": {
        "geometry": {"a": 0.85, "L": 100.0,
                     "cases": [{"kappa0": 1.00, "s0": 57.45}]},
        "basis": {"M": 6, "N": 4},
        "lattice": dict(_ARMCHAIR_1170),
        "outputs": {"n_states": 4, "state_index": 0, "surface": True,
                    "surface_n_theta": 128, "surface_n_s": 256},
    },
    "straight": {
        "geometry": {"a": 0.85, "L": 100.0, "cases": [{"kappa0": 0.0, "s0": 0.0}]},
        "basis": {"M": 2, "N": 4},
        "outputs": {"n_states": 20, "state_index": 0},
    },
}


# ----------------------------------------------------------------------
# Command implementations
# ----------------------------------------------------------------------

def _case_label(i: int, kappa0: float, s0: float) -> str:
    if kappa0 == 0.0:
        return f"case_{i:03d}_k0.00"
    return f"case_{i:03d}_k{kappa0:.2f}_s{s0:.2f}"


def _solve_case(cfg: RunConfig, kappa0: float, s0: float) -> SurfaceSolution:
    geom = cfg.geometry(kappa0, s0)
    return solve_surface_spectrum(geom, cfg.basis(), cfg.grid(geom),
                                  cfg.lattice())


def _spectrum_record(cfg: RunConfig, sol: SurfaceSolution) -> dict:
    res = sol.result
    n = min(cfg.n_states, res.size)
    rec = {
        "geometry": {"a": sol.geom.a, "L": sol.geom.L,
                     "kappa0": sol.geom.kappa0, "s0": sol.geom.s0,
                     "mass_ratio": sol.geom.mass_ratio,
                     "hbar2_over_2me": sol.geom.hbar2_over_2me},
        "basis": {"M": sol.spec.M, "N": sol.spec.N, "family": sol.spec.family,
                  "size": sol.spec.size},
        "lattice_sites": 0 if sol.lattice is None else sol.lattice.size,
        "eigenvalues_meV": [float(v) for v in res.eigenvalues[:n]],
        "parities": list(res.parities[:n]),
        "parity_scores": [float(v) for v in res.parity_scores[:n]],
        "residuals": [float(v) for v in res.residuals[:n]],
        "diagnostics": {
            "overlap_residual": sol.hamiltonian.onb.residual,
            "overlap_condition": sol.hamiltonian.overlap.condition_number,
            "overlap_hermiticity_defect": sol.hamiltonian.overlap.hermiticity_defect,
            "assembly_hermiticity_defect": sol.hamiltonian.asymmetry,
            "solver_asymmetry": res.asymmetry,
            "n_theta": sol.grid.n_theta,
            "n_s": sol.grid.n_s,
        },
    }
    if sol.geom.straight and sol.lattice is None:
        exact = straight_spectrum(sol.geom, sol.spec)
        err = float(np.max(np.abs(exact - res.eigenvalues)))
        rec["analytic"] = {
            "eigenvalues_meV": [float(v) for v in exact[:n]],
            "max_abs_error_meV": err,
        }
    return rec


def _states_rows(cfg: RunConfig, sol: SurfaceSolution):
    rows = []
    n = min(cfg.n_states, sol.result.size)
    for k in range(n):
        terms = coefficient_terms(sol.spec, sol.result.xi_coefficients[:, k],
                                  cfg.coefficient_threshold)
        for t in terms:
            rows.append((k, sol.result.eigenvalues[k], sol.result.parities[k],
                         t.m, t.n, t.value))
    return rows


def cmd_solve(cfg: RunConfig, out_dir: Path, manifest_extra: dict) -> list[str]:
    written = []
    table_rows = []
    for i, (k0, s0) in enumerate(cfg.cases):
        label = _case_label(i, k0, s0)
        sol = _solve_case(cfg, k0, s0)
        _write_json(out_dir / label / "spectrum.json", _spectrum_record(cfg, sol))
        _write_csv(out_dir / label / "states.csv",
                   ["state", "energy_meV", "parity", "m", "n", "coefficient"],
                   _states_rows(cfg, sol))
        written += [f"{label}/spectrum.json", f"{label}/states.csv"]
        k = cfg.state_index
        if 0 <= k < sol.result.size:
            rep = state_report(sol, k, cfg.coefficient_threshold)
            expansion = " ".join(f"{t.value:+.4f} {t.label()}" for t in rep.terms)
            # table.csv is the human/paper-precision artifact; the full
            # 17-digit values live in spectrum.json and states.csv
            table_rows.append((f"{k0:.2f}", "-" if k0 == 0.0 else f"{s0:.2f}",
                               k, f"{rep.energy:.4f}", rep.parity, expansion))
    _write_csv(out_dir / "table.csv",
               ["kappa0", "s0", "state", "energy_meV", "parity", "expansion"],
               table_rows)
    written.append("table.csv")
    _write_manifest(cfg, out_dir, "solve", written, manifest_extra)
    return written


def cmd_density(cfg: RunConfig, out_dir: Path, manifest_extra: dict,
                surface: bool = False) -> list[str]:
    written = []
    surface = surface or cfg.surface
    for i, (k0, s0) in enumerate(cfg.cases):
        label = _case_label(i, k0, s0)
        sol = _solve_case(cfg, k0, s0)
        for k in cfg.profile_states:
            if not 0 <= k < sol.result.size:
                raise ConfigError(f"state index {k} out of range for "
                                  f"basis size {sol.result.size}")
            s = np.linspace(0.0, cfg.L, cfg.profile_samples)
            rho = density_profile_at(sol.spec, sol.result.xi_coefficients[:, k],
                                     cfg.profile_theta, s)
            name = f"{label}/density_state{k}.csv"
            _write_csv(out_dir / name, ["s_nm", "density_per_nm2"],
                       zip(s.tolist(), rho.tolist()))
            written.append(name)
        if surface:
            for k in cfg.profile_states:
                theta, s, rho = surface_density_grid(
                    sol.spec, sol.result.xi_coefficients[:, k],
                    cfg.surface_n_theta, cfg.surface_n_s)
                rows = []
                for it, t in enumerate(theta):
                    for js, sv in enumerate(s):
                        rows.append((t, sv, rho[js, it]))
                name = f"{label}/density_surface_state{k}.csv"
                _write_csv(out_dir / name,
                           ["theta_rad", "s_nm", "density_per_nm2"], rows)
                written.append(name)
    _write_manifest(cfg, out_dir, "density", written, manifest_extra)
    return written


def cmd_sites(cfg: RunConfig, out_dir: Path, manifest_extra: dict) -> list[str]:
    lattice = cfg.lattice()
    if lattice is None:
        raise ConfigError("sites command requires a lattice block")
    k0, s0 = cfg.cases[0]
    geom = cfg.geometry(k0, s0)
    rows = []
    for i, (theta, s) in enumerate(lattice.sites):
        if lattice.arrangement == "armchair":
            ring = i // lattice.n_angular + 1
            slot = i % lattice.n_angular + 1
        else:
            ring, slot = 0, i + 1
        x, y, z = embed(geom, theta, s)
        rows.append((slot, ring, theta, s, float(x), float(y), float(z)))
    _write_csv(out_dir / "sites.csv",
               ["j", "k", "theta_rad", "s_nm", "x_nm", "y_nm", "z_nm"], rows)
    _write_manifest(cfg, out_dir, "sites", ["sites.csv"], manifest_extra)
    return ["sites.csv"]


_CONVERGENCE_BASES = [(1, 2), (2, 4), (3, 6), (4, 8)]


def _agree_digits(a: float, b: float) -> bool:
    """True when a and b agree to 5 significant digits."""
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return True
    exponent = math.floor(math.log10(scale))
    return abs(a - b) <= 0.5 * 10.0 ** (exponent - 4)


def cmd_convergence(cfg: RunConfig, out_dir: Path, manifest_extra: dict) -> list[str]:
    k0, s0 = cfg.cases[0]
    geom = cfg.geometry(k0, s0)
    lattice = cfg.lattice()
    rows = []
    prev = None
    basis_stable = []
    # one shared grid, sized for the largest basis in the sweep, keeps the
    # nested-basis comparison exactly variational
    max_m = max(M for M, _ in _CONVERGENCE_BASES)
    sweep_grid = build_grid(geom, n_theta=max(cfg.n_theta, 4 * max_m + 8),
                            panels=cfg.panels,
                            points_per_panel=cfg.points_per_panel)
    for M, N in _CONVERGENCE_BASES:
        spec = BasisSpec(M=M, N=N, L=cfg.L, family=cfg.family)
        sol = solve_surface_spectrum(geom, spec, sweep_grid, lattice)
        lowest = [float(v) for v in sol.eigenvalues[:4]]
        rows.append(("basis", M, N, spec.size, *lowest))
        if prev is not None:
            basis_stable.append(all(_agree_digits(x, y)
                                    for x, y in zip(prev, lowest)))
        prev = lowest
    spec = cfg.basis()
    quad_rows = []
    for refine, tag in [(1, "default"), (2, "doubled")]:
        sol = solve_surface_spectrum(geom, spec, cfg.grid(geom, refine), lattice)
        quad_rows.append([float(v) for v in sol.eigenvalues[:4]])
        rows.append((f"quadrature_{tag}", spec.M, spec.N, spec.size,
                     *quad_rows[-1]))
    quad_drift = max(abs(x - y) for x, y in zip(*quad_rows))
    record = {
        "geometry": {"kappa0": k0, "s0": s0, "a": cfg.a, "L": cfg.L},
        "five_digit_stable_by": {
            f"M{M}_N{N}": bool(stable)
            for (M, N), stable in zip(_CONVERGENCE_BASES[1:], basis_stable)
        },
        "quadrature_drift_meV": quad_drift,
    }
    _write_csv(out_dir / "convergence.csv",
               ["stage", "M", "N", "size", "e0", "e1", "e2", "e3"], rows)
    _write_json(out_dir / "convergence.json", record)
    files = ["convergence.csv", "convergence.json"]
    _write_manifest(cfg, out_dir, "convergence", files, manifest_extra)
    return files


def _write_manifest(cfg: RunConfig, out_dir: Path, command: str,
                    written: list[str], extra: dict) -> None:
    manifest = {
        "command": command,
        "package_version": __version__,
        "config": cfg.resolved(),
        "outputs_written": sorted(written),
    }
    manifest.update(extra)
    _write_json(out_dir / "manifest.json", manifest)


# ----------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------

def _load_config(args) -> tuple[RunConfig, str | None]:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return RunConfig(raw), None
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; "
                              f"available: {', '.join(sorted(PRESETS))}")
        return RunConfig(PRESETS[args.preset]), args.preset
    raise ConfigError("one of --config or --preset is required")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="path to a JSON run config (or a manifest)")
    p.add_argument("--preset", help="named preset, e.g. table1 or fig6")
    p.add_argument("--out", help="output directory (default runs/<name>)")
    p.add_argument("--threads", type=int, default=1,
                   help="advisory thread count; results are identical for any value")
    p.add_argument("--seedless", action="store_true",
                   help="assert the run consumes no randomness (always true)")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tubarc",
        description="Spectra and densities of a particle on a bent tube surface.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("solve", "solve the eigenproblem and write spectrum/state tables"),
            ("density", "write density profiles (and surface maps with --surface)"),
            ("sites", "write the site lattice in surface and 3-space coordinates"),
            ("convergence", "basis and quadrature refinement study")]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "density":
            p.add_argument("--surface", action="store_true",
                           help="also write full (theta, s) density grids")
            p.add_argument("--state", type=int, default=None,
                           help="override the states to profile")
            p.add_argument("--theta", type=float, default=None,
                           help="override the profile angle (rad)")

    args = parser.parse_args(argv)
    try:
        cfg, preset = _load_config(args)
        if args.command == "density":
            if args.state is not None:
                cfg.profile_states = [args.state]
            if args.theta is not None:
                cfg.profile_theta = args.theta
        default_name = preset or (Path(args.config).stem if args.config else "run")
        out_dir = Path(args.out) if args.out else Path("runs") / default_name
        extra = {"preset": preset, "threads": args.threads,
                 "seedless": bool(args.seedless)}
        if args.command == "solve":
            cmd_solve(cfg, out_dir, extra)
        elif args.command == "density":
            cmd_density(cfg, out_dir, extra, surface=getattr(args, "surface", False))
        elif args.command == "sites":
            cmd_sites(cfg, out_dir, extra)
        else:
            cmd_convergence(cfg, out_dir, extra)
    except ConfigError as exc:
        print(_json_dumps({"error": {"type": "config", "message": str(exc)}}))
        return 1
    except (IllConditionedBasisError, np.linalg.LinAlgError, RuntimeError,
            ValueError) as exc:
        print(_json_dumps({"error": {"type": "numerical", "message": str(exc)}}))
        return 1
    print(f"wrote outputs to {out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
