"""Wavefunction storage, initial-state construction, and snapshot files.

Initial states are seeded analytically (exponential atomic orbitals times a
nuclear Gaussian) and refined by imaginary-time propagation.  By default
only the electronic factor is relaxed, at R clamped to the packet center;
the nuclear Gaussian is attached afterwards.  This keeps the nuclear factor
exactly as configured, since the reduced Hamiltonian leaves R nearly free
and unconstrained relaxation would spread the packet without bound.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericsError
from .grids import Grid1D, build_equidistant_grid, frozen_axis
from .observables import hamiltonian_energy
from .potentials import PhysicalParams, PotentialField, assemble_potential
from .propagator import PropagationSettings, Propagator

SNAPSHOT_MAGIC = b"HHWF"
SNAPSHOT_VERSION = 1


@dataclass
class Wavefunction:
    """Complex amplitudes over (R, z1, z2), R slowest / z2 fastest."""

    values: np.ndarray
    rgrid: Grid1D
    z1grid: Grid1D
    z2grid: Grid1D

    def __post_init__(self):
        expected = (self.rgrid.n, self.z1grid.n, self.z2grid.n)
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape != expected:
            raise ConfigError(
                f"wavefunction shape {self.values.shape} does not match grids {expected}"
            )

    @property
    def weights(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.rgrid.weights, self.z1grid.weights, self.z2grid.weights

    def norm2(self) -> float:
        wr, w1, w2 = self.weights
        return float(np.einsum("ijk,i,j,k->", np.abs(self.values) ** 2, wr, w1, w2))

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def normalize(self) -> "Wavefunction":
        self.values /= self.norm()
        return self

    def copy(self) -> "Wavefunction":
        return Wavefunction(self.values.copy(), self.rgrid, self.z1grid, self.z2grid)


@dataclass(frozen=True)
class InitialStateSpec:
    """How to build the t=0 state."""

    kind: str = "direct-product"  # or "entangled-singlet"
    r0: float = 100.0
    sigma_r: float = 0.5
    z_a: float = -50.0
    z_b: float = 50.0
    dtau: float = 0.02
    tolerance: float = 1e-10
    max_steps: int = 50000
    relax_kind: str | None = None  # defaults by kind, see relax_hamiltonian_kind
    freeze_r: bool = True

    def __post_init__(self):
        if self.kind not in ("direct-product", "entangled-singlet"):
            raise ConfigError(f"unknown initial-state kind '{self.kind}'")

    @property
    def relax_hamiltonian_kind(self) -> str:
        """Direct-product states relax under the noninteracting Hamiltonian,
        entangled states under the full one, unless overridden."""
        if self.relax_kind is not None:
            return self.relax_kind
        return "reduced-noninteracting" if self.kind == "direct-product" else "full"


def seed_initial(
    spec: InitialStateSpec, rgrid: Grid1D, z1grid: Grid1D, z2grid: Grid1D
) -> Wavefunction:
    """Normalized analytic seed: exp(-|z-center|) orbitals times a nuclear Gaussian."""
    for g, c in ((z1grid, spec.z_a), (z1grid, spec.z_b), (z2grid, spec.z_a), (z2grid, spec.z_b)):
        if not (g.lo <= c <= g.hi):
            raise ConfigError(f"atom center {c} outside grid '{g.label}' [{g.lo}, {g.hi}]")
    if rgrid.kind == "frozen":
        g_r = np.ones(1)
    else:
        if not (rgrid.lo <= spec.r0 <= rgrid.hi):
            raise ConfigError(f"nuclear center {spec.r0} outside the R grid")
        g_r = np.exp(-((rgrid.nodes - spec.r0) ** 2) / (4.0 * spec.sigma_r**2))
    a1 = np.exp(-np.abs(z1grid.nodes - spec.z_a))
    b2 = np.exp(-np.abs(z2grid.nodes - spec.z_b))
    if spec.kind == "direct-product":
        elec = a1[:, None] * b2[None, :]
    else:
        b1 = np.exp(-np.abs(z1grid.nodes - spec.z_b))
        a2 = np.exp(-np.abs(z2grid.nodes - spec.z_a))
        elec = a1[:, None] * b2[None, :] + b1[:, None] * a2[None, :]
    psi = Wavefunction(
        g_r[:, None, None] * elec[None, :, :], rgrid, z1grid, z2grid
    )
    return psi.normalize()


def relax_imaginary_time(
    psi: Wavefunction,
    spec: InitialStateSpec,
    potential: PotentialField,
    params: PhysicalParams,
    energy_history: list[float] | None = None,
) -> tuple[Wavefunction, float]:
    """Imaginary-time refinement with renormalization after every step.

    Stops when the energy change per step drops below the configured
    tolerance; raises NumericsError (with the last energy and residual)
    otherwise.  Returns the relaxed state and its energy under the relax
    Hamiltonian.
    """
    settings = PropagationSettings(
        dt=spec.dtau, duration=spec.dtau * spec.max_steps, output_stride=1,
        cap_z1=None, cap_z2=None, cap_r=None,
    )
    prop = Propagator(psi, potential, params, settings, imaginary=True)

    def current_energy() -> float:
        return hamiltonian_energy(psi, potential, params)

    e_prev = current_energy()
    if energy_history is not None:
        energy_history.append(e_prev)
    for step in range(spec.max_steps):
        psi.values = prop.advance(psi.values, 0.0)
        n2 = prop.norm2(psi.values)
        if not np.isfinite(n2) or n2 == 0.0:
            raise NumericsError(f"imaginary-time propagation diverged at step {step}")
        psi.values /= np.sqrt(n2)
        e = current_energy()
        if energy_history is not None:
            energy_history.append(e)
        if abs(e - e_prev) < spec.tolerance:
            return psi, e
        e_prev = e
    raise NumericsError(
        f"imaginary time did not converge in {spec.max_steps} steps; "
        f"last energy {e_prev:.12f}, last residual {abs(e - e_prev):.3e}"
    )


def prepare_initial_state(
    spec: InitialStateSpec,
    rgrid: Grid1D,
    z1grid: Grid1D,
    z2grid: Grid1D,
    params: PhysicalParams,
) -> tuple[Wavefunction, float]:
    """Seed and relax; returns the state on the full grids and its energy.

    With freeze_r (default) the electronic factor relaxes on a clamped-R
    subgrid at r0 and the configured nuclear Gaussian is attached unchanged;
    the returned energy is the relax-Hamiltonian energy of the product state.
    """
    if spec.freeze_r and rgrid.kind != "frozen":
        sub_r = frozen_axis(spec.r0, rgrid.label)
        sub = seed_initial(spec, sub_r, z1grid, z2grid)
        pot = assemble_potential(spec.relax_hamiltonian_kind, sub_r, z1grid, z2grid, params)
        sub, _ = relax_imaginary_time(sub, spec, pot, params)
        g_r = np.exp(-((rgrid.nodes - spec.r0) ** 2) / (4.0 * spec.sigma_r**2))
        psi = Wavefunction(
            g_r[:, None, None] * sub.values, rgrid, z1grid, z2grid
        ).normalize()
        pot_full = assemble_potential(
            spec.relax_hamiltonian_kind, rgrid, z1grid, z2grid, params
        )
        return psi, hamiltonian_energy(psi, pot_full, params)
    psi = seed_initial(spec, rgrid, z1grid, z2grid)
    pot = assemble_potential(spec.relax_hamiltonian_kind, rgrid, z1grid, z2grid, params)
    return relax_imaginary_time(psi, spec, pot, params)


def save_snapshot(path, psi: Wavefunction) -> None:
    """Write the binary snapshot: HHWF header, grid descriptors, (re, im) pairs."""
    with open(path, "wb") as f:
        f.write(SNAPSHOT_MAGIC)
        f.write(struct.pack("<IIII", SNAPSHOT_VERSION, psi.rgrid.n, psi.z1grid.n, psi.z2grid.n))
        for g in (psi.rgrid, psi.z1grid, psi.z2grid):
            f.write(struct.pack("<ddd", g.lo, g.hi, float(g.n)))
        np.ascontiguousarray(psi.values, dtype="<c16").tofile(f)


def load_snapshot(path) -> Wavefunction:
    """Read a snapshot written by save_snapshot; grids are rebuilt equidistant
    (a single-node R descriptor restores a frozen axis)."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ConfigError(f"{path}: not a wavefunction snapshot")
        version, n_r, n_z1, n_z2 = struct.unpack("<IIII", f.read(16))
        if version != SNAPSHOT_VERSION:
            raise ConfigError(f"{path}: unsupported snapshot version {version}")
        descs = [struct.unpack("<ddd", f.read(24)) for _ in range(3)]
        data = np.fromfile(f, dtype="<c16", count=n_r * n_z1 * n_z2)
    if data.size != n_r * n_z1 * n_z2:
        raise ConfigError(f"{path}: truncated snapshot payload")

    def rebuild(label: str, desc, n: int) -> Grid1D:
        lo, hi, n_desc = desc
        if int(n_desc) != n:
            raise ConfigError(f"{path}: inconsistent grid descriptor for '{label}'")
        if n == 1:
            return frozen_axis(lo, label)
        return build_equidistant_grid(lo, hi, n, label)

    rg = rebuild("R", descs[0], n_r)
    z1 = rebuild("z1", descs[1], n_z1)
    z2 = rebuild("z2", descs[2], n_z2)
    return Wavefunction(data.reshape(n_r, n_z1, n_z2), rg, z1, z2)
