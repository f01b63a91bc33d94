"""Scenario configuration, presets, and output management.

Configs are INI-style ``key = value`` text with sections.  Unknown sections
or keys are hard errors (silent typos are the main reproducibility hazard).
Every run writes the fully expanded config next to its outputs.

Sections and keys (all physical quantities in atomic units unless the key
name says fs):

    [initial]      kind, r0, sigma_r, z_a, z_b, dtau, tolerance, max_steps,
                   relax_kind, freeze_r
    [pulse]        e0, omega, t_p_fs, phi, envelope (gaussian|narrow|uniform|off),
                   lambda, z0, env_z_a, env_z_b, mask_e1, mask_e2
    [grids]        z_min, z_max, n_z, r_min, r_max, n_r, frozen_r
    [propagation]  dt, duration_fs, output_stride, detector_z, cap_eta,
                   cap_onset_z, cap_width_z, cap_order, cap_r_lo, cap_r_hi,
                   cap_width_r, workers
    [output]       snapshot_times_fs (comma separated), partition
                   (auto|direct-product|entangled)
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .grids import Grid1D, build_equidistant_grid, frozen_axis
from .laser import (
    GaussianEnvelope,
    LaserPulse,
    NarrowEnvelope,
    OffEnvelope,
    UniformEnvelope,
)
from .observables import RunRecord, electron_density, write_density_csv
from .potentials import PhysicalParams, assemble_potential
from .propagator import CapSpec, PropagationSettings, RunResult, run
from .state import (
    InitialStateSpec,
    Wavefunction,
    load_snapshot,
    prepare_initial_state,
    save_snapshot,
)
from .units import FS_TO_AU


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully explicit description of one simulation."""

    initial: InitialStateSpec = InitialStateSpec()
    e0: float = 1.0
    omega: float = 1.0
    t_p_fs: float = 5.0
    phi: float = 0.0
    envelope: str = "gaussian"
    env_lambda: float = 861.0
    env_z0: float = -1291.5
    env_z_a: float = -60.0
    env_z_b: float = -40.0
    mask_e1: bool = True
    mask_e2: bool = True
    z_min: float = -145.0
    z_max: float = 145.0
    n_z: int = 464
    r_min: float = 75.0
    r_max: float = 125.0
    n_r: int = 256
    frozen_r: bool = False
    dt: float = 0.021
    duration_fs: float = 20.0
    output_stride: int = 20
    detector_z: float = 91.0
    cap_eta: float = 0.4
    cap_onset_z: float = 95.0
    cap_width_z: float = 50.0
    cap_order: int = 2
    cap_r_lo: float = 80.0
    cap_r_hi: float = 120.0
    cap_width_r: float = 5.0
    workers: int = 2
    snapshot_times_fs: tuple[float, ...] = ()  # empty -> t_p, t_p+2.5, end
    partition: str = "auto"
    preset: str = "none"

    def pulse(self) -> LaserPulse:
        env = {
            "gaussian": lambda: GaussianEnvelope(self.env_lambda, self.env_z0),
            "narrow": lambda: NarrowEnvelope(self.env_z_a, self.env_z_b),
            "uniform": UniformEnvelope,
            "off": OffEnvelope,
        }
        if self.envelope not in env:
            raise ConfigError(
                f"unknown envelope '{self.envelope}' "
                f"(expected one of {sorted(env)})"
            )
        return LaserPulse(
            e0=self.e0,
            omega=self.omega,
            t_p=self.t_p_fs * FS_TO_AU,
            phi=self.phi,
            envelope=env[self.envelope](),
            mask_e1=self.mask_e1,
            mask_e2=self.mask_e2,
        )

    def grids(self) -> tuple[Grid1D, Grid1D, Grid1D]:
        if self.frozen_r:
            rgrid = frozen_axis(self.initial.r0, "R")
        else:
            rgrid = build_equidistant_grid(self.r_min, self.r_max, self.n_r, "R")
        z1 = build_equidistant_grid(self.z_min, self.z_max, self.n_z, "z1")
        z2 = build_equidistant_grid(self.z_min, self.z_max, self.n_z, "z2")
        return rgrid, z1, z2

    def settings(self) -> PropagationSettings:
        cap_z = CapSpec(
            lo=-self.cap_onset_z,
            hi=self.cap_onset_z,
            width=self.cap_width_z,
            eta=self.cap_eta,
            order=self.cap_order,
        )
        cap_r = None
        if not self.frozen_r:
            cap_r = CapSpec(
                lo=self.cap_r_lo,
                hi=self.cap_r_hi,
                width=self.cap_width_r,
                eta=self.cap_eta,
                order=self.cap_order,
            )
        return PropagationSettings(
            dt=self.dt,
            duration=self.duration_fs * FS_TO_AU,
            output_stride=self.output_stride,
            detector_z=self.detector_z,
            cap_z1=cap_z,
            cap_z2=cap_z,
            cap_r=cap_r,
            workers=self.workers,
        )

    def snapshot_schedule_fs(self) -> tuple[float, ...]:
        if self.snapshot_times_fs:
            return self.snapshot_times_fs
        return (self.t_p_fs, self.t_p_fs + 2.5, self.duration_fs)

    def energy_partition(self) -> str:
        if self.partition != "auto":
            return self.partition
        return "direct-product" if self.initial.kind == "direct-product" else "entangled"


_SCHEMA: dict[str, dict[str, str]] = {
    "initial": {
        "kind": "str",
        "r0": "float",
        "sigma_r": "float",
        "z_a": "float",
        "z_b": "float",
        "dtau": "float",
        "tolerance": "float",
        "max_steps": "int",
        "relax_kind": "str",
        "freeze_r": "bool",
    },
    "pulse": {
        "e0": "float",
        "omega": "float",
        "t_p_fs": "float",
        "phi": "float",
        "envelope": "str",
        "lambda": "float",
        "z0": "float",
        "env_z_a": "float",
        "env_z_b": "float",
        "mask_e1": "bool",
        "mask_e2": "bool",
    },
    "grids": {
        "z_min": "float",
        "z_max": "float",
        "n_z": "int",
        "r_min": "float",
        "r_max": "float",
        "n_r": "int",
        "frozen_r": "bool",
    },
    "propagation": {
        "dt": "float",
        "duration_fs": "float",
        "output_stride": "int",
        "detector_z": "float",
        "cap_eta": "float",
        "cap_onset_z": "float",
        "cap_width_z": "float",
        "cap_order": "int",
        "cap_r_lo": "float",
        "cap_r_hi": "float",
        "cap_width_r": "float",
        "workers": "int",
    },
    "output": {
        "snapshot_times_fs": "floats",
        "partition": "str",
    },
}

_BOUNDS: dict[tuple[str, str], tuple[float, float]] = {
    ("pulse", "e0"): (0.0, 10.0),
    ("pulse", "omega"): (1e-3, 100.0),
    ("pulse", "t_p_fs"): (1e-3, 1000.0),
    ("grids", "n_z"): (8, 8192),
    ("grids", "n_r"): (8, 8192),
    ("propagation", "dt"): (1e-6, 1.0),
    ("propagation", "duration_fs"): (1e-6, 10000.0),
    ("propagation", "output_stride"): (1, 1_000_000),
    ("propagation", "cap_eta"): (0.0, 1000.0),
    ("propagation", "cap_order"): (1, 8),
    ("propagation", "workers"): (1, 256),
    ("initial", "sigma_r"): (1e-3, 100.0),
    ("initial", "dtau"): (1e-6, 1.0),
    ("initial", "max_steps"): (1, 10_000_000),
}


def _parse_bool(raw: str, where: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got '{raw}'")


def _convert(section: str, key: str, raw: str):
    kind = _SCHEMA[section][key]
    where = f"[{section}] {key}"
    try:
        if kind == "float":
            val = float(raw)
        elif kind == "int":
            val = int(raw)
        elif kind == "bool":
            return _parse_bool(raw, where)
        elif kind == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        else:
            return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse '{raw}' as {kind}") from exc
    bounds = _BOUNDS.get((section, key))
    if bounds is not None and not (bounds[0] <= val <= bounds[1]):
        raise ConfigError(
            f"{where}: value {val} outside allowed range [{bounds[0]}, {bounds[1]}]"
        )
    return val


_FIELD_MAP = {
    ("pulse", "lambda"): "env_lambda",
    ("pulse", "z0"): "env_z0",
}

_INITIAL_KEYS = set(_SCHEMA["initial"])


def parse_config_text(text: str, preset: str = "none") -> ScenarioConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    unknown_sections = set(cp.sections()) - set(_SCHEMA)
    if unknown_sections:
        raise ConfigError(f"unknown config sections: {sorted(unknown_sections)}")
    cfg_kwargs: dict = {}
    init_kwargs: dict = {}
    for section in cp.sections():
        unknown = set(cp[section]) - set(_SCHEMA[section])
        if unknown:
            raise ConfigError(
                f"unknown keys in [{section}]: {sorted(unknown)}; "
                f"known keys: {sorted(_SCHEMA[section])}"
            )
        for key, raw in cp[section].items():
            val = _convert(section, key, raw)
            if section == "initial":
                init_kwargs[key] = None if (key == "relax_kind" and val == "auto") else val
            else:
                cfg_kwargs[_FIELD_MAP.get((section, key), key)] = val
    initial = InitialStateSpec(**init_kwargs)
    return ScenarioConfig(initial=initial, preset=preset, **cfg_kwargs)


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def dump_config(cfg: ScenarioConfig) -> str:
    """Fully expanded INI text, suitable for reloading (provenance record)."""
    cp = configparser.ConfigParser()
    cp["initial"] = {
        "kind": cfg.initial.kind,
        "r0": repr(cfg.initial.r0),
        "sigma_r": repr(cfg.initial.sigma_r),
        "z_a": repr(cfg.initial.z_a),
        "z_b": repr(cfg.initial.z_b),
        "dtau": repr(cfg.initial.dtau),
        "tolerance": repr(cfg.initial.tolerance),
        "max_steps": str(cfg.initial.max_steps),
        "relax_kind": cfg.initial.relax_kind or "auto",
        "freeze_r": str(cfg.initial.freeze_r).lower(),
    }
    cp["pulse"] = {
        "e0": repr(cfg.e0),
        "omega": repr(cfg.omega),
        "t_p_fs": repr(cfg.t_p_fs),
        "phi": repr(cfg.phi),
        "envelope": cfg.envelope,
        "lambda": repr(cfg.env_lambda),
        "z0": repr(cfg.env_z0),
        "env_z_a": repr(cfg.env_z_a),
        "env_z_b": repr(cfg.env_z_b),
        "mask_e1": str(cfg.mask_e1).lower(),
        "mask_e2": str(cfg.mask_e2).lower(),
    }
    cp["grids"] = {
        "z_min": repr(cfg.z_min),
        "z_max": repr(cfg.z_max),
        "n_z": str(cfg.n_z),
        "r_min": repr(cfg.r_min),
        "r_max": repr(cfg.r_max),
        "n_r": str(cfg.n_r),
        "frozen_r": str(cfg.frozen_r).lower(),
    }
    cp["propagation"] = {
        "dt": repr(cfg.dt),
        "duration_fs": repr(cfg.duration_fs),
        "output_stride": str(cfg.output_stride),
        "detector_z": repr(cfg.detector_z),
        "cap_eta": repr(cfg.cap_eta),
        "cap_onset_z": repr(cfg.cap_onset_z),
        "cap_width_z": repr(cfg.cap_width_z),
        "cap_order": str(cfg.cap_order),
        "cap_r_lo": repr(cfg.cap_r_lo),
        "cap_r_hi": repr(cfg.cap_r_hi),
        "cap_width_r": repr(cfg.cap_width_r),
        "workers": str(cfg.workers),
    }
    cp["output"] = {
        "snapshot_times_fs": ", ".join(repr(t) for t in cfg.snapshot_schedule_fs()),
        "partition": cfg.energy_partition(),
    }
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()


def _preset_overrides() -> dict[str, dict]:
    dp = InitialStateSpec(kind="direct-product")
    ent = InitialStateSpec(kind="entangled-singlet")
    gauss = dict(envelope="gaussian", e0=1.0)
    narrow = dict(envelope="narrow", e0=0.02)
    presets = {
        "fig2-gauss": dict(initial=dp, **gauss),
        "fig2-narrow": dict(initial=dp, **narrow),
        "fig5-gauss-entangled": dict(initial=ent, **gauss),
        "fig5-narrow-entangled": dict(initial=ent, **narrow),
        "fig7c-mask-e1": dict(initial=ent, **narrow, mask_e1=True, mask_e2=False),
        "fig7d-mask-e2": dict(initial=ent, **narrow, mask_e1=False, mask_e2=True),
    }
    for name in list(presets):
        presets[name + "-2d"] = dict(presets[name], frozen_r=True)
    return presets


def presets() -> list[str]:
    return sorted(_preset_overrides())


def preset_config(name: str) -> ScenarioConfig:
    table = _preset_overrides()
    if name not in table:
        raise ConfigError(
            f"unknown preset '{name}'; available presets: {', '.join(sorted(table))}"
        )
    return replace(ScenarioConfig(), preset=name, **table[name])


@dataclass
class ScenarioArtifacts:
    out_dir: Path
    record_csv: Path
    expanded_config: Path
    final_state: Path
    densities: list[Path] = field(default_factory=list)
    relax_energy: float = 0.0
    result: RunResult | None = None


class _DensityWriter:
    """Run observer that writes P(z1), P(z2) snapshots at scheduled times."""

    def __init__(self, out_dir: Path, times_au: list[float], artifacts: ScenarioArtifacts):
        self.out_dir = out_dir
        self.pending = sorted(times_au)
        self.artifacts = artifacts

    def __call__(self, t: float, psi) -> None:
        while self.pending and t >= self.pending[0] - 1e-9:
            nominal = self.pending.pop(0)
            for which, grid in (("e1", psi.z1grid), ("e2", psi.z2grid)):
                path = self.out_dir / f"density_{which}_t{nominal / FS_TO_AU:.2f}fs.csv"
                write_density_csv(path, grid.nodes, electron_density(psi, which))
                self.artifacts.densities.append(path)


def run_scenario(cfg: ScenarioConfig, out_dir, initial_state=None) -> ScenarioArtifacts:
    """Relax (or reuse a stored state), propagate, and write every artifact.

    ``initial_state`` may point at a snapshot written by ``relax_scenario``
    or a previous run's ``final_state.hhwf``; its grids must match the
    configured ones.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    art = ScenarioArtifacts(
        out_dir=out,
        record_csv=out / "record.csv",
        expanded_config=out / "config.expanded.ini",
        final_state=out / "final_state.hhwf",
    )
    art.expanded_config.write_text(dump_config(cfg))

    params = PhysicalParams()
    rgrid, z1grid, z2grid = cfg.grids()
    if initial_state is not None:
        psi = load_snapshot(initial_state)
        for got, want in ((psi.rgrid, rgrid), (psi.z1grid, z1grid), (psi.z2grid, z2grid)):
            if got.n != want.n or got.lo != want.lo or got.hi != want.hi:
                raise ConfigError(
                    f"snapshot grid '{want.label}' ({got.lo}, {got.hi}, {got.n}) "
                    f"does not match the configured ({want.lo}, {want.hi}, {want.n})"
                )
        psi = Wavefunction(psi.values, rgrid, z1grid, z2grid)
        e_relax = float("nan")
    else:
        psi, e_relax = prepare_initial_state(cfg.initial, rgrid, z1grid, z2grid, params)
    art.relax_energy = e_relax
    potential = assemble_potential("full", rgrid, z1grid, z2grid, params)
    settings = cfg.settings()

    # snapshot times beyond the last step snap to the actual end of the run
    actual_end = settings.n_steps * settings.dt
    times_au = {min(t * FS_TO_AU, actual_end) for t in cfg.snapshot_schedule_fs()}
    writer = _DensityWriter(out, sorted(times_au | {0.0}), art)
    record = RunRecord()
    try:
        result = run(
            psi,
            potential,
            cfg.pulse(),
            params,
            settings,
            partition=cfg.energy_partition(),
            observers=[writer],
            record=record,
        )
    except Exception:
        # flush whatever was collected so a failed run is still inspectable
        if len(record):
            record.write_csv(out / "record.partial.csv")
        raise
    art.result = result
    result.record.write_csv(art.record_csv)
    save_snapshot(art.final_state, psi)
    return art


def relax_scenario(cfg: ScenarioConfig, out_dir) -> tuple[Path, float]:
    """Prepare and store only the initial state; returns (path, energy)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.expanded.ini").write_text(dump_config(cfg))
    params = PhysicalParams()
    rgrid, z1grid, z2grid = cfg.grids()
    psi, e_relax = prepare_initial_state(cfg.initial, rgrid, z1grid, z2grid, params)
    path = out / "initial_state.hhwf"
    save_snapshot(path, psi)
    return path, e_relax
