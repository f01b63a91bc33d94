"""Densities, expectation values, atomic-energy partitions, and fluxes.

Atomic energies split the system energy exactly into E_A + E_B.  Both
partitions share the nuclear kinetic energy, the proton-proton and the
electron-electron terms half-half, and assign each proton's attraction
terms (from both electrons) entirely to its atom.  They differ in the
electron kinetic energy: the direct-product partition gives electron 1's
kinetic energy to atom A and electron 2's to atom B, while the entangled
partition shares both half-half.  Energies are plain matrix elements of the
surviving wavefunction (no renormalization), so the sum always equals the
total energy; expectation values of positions, in contrast, are divided by
the surviving norm so they track the bound part after partial ionization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigError
from .grids import Grid1D, build_kinetic, spectral_derivative_row
from .laser import LaserPulse, effective_amplitudes, electric_field
from .potentials import (
    PhysicalParams,
    attraction_to_a,
    attraction_to_b,
    v_ee,
    v_pp,
)

if TYPE_CHECKING:
    from .state import Wavefunction


def weighted_sum(arr: np.ndarray, wr, w1, w2) -> complex:
    """Triple-weighted reduction over an (R, z1, z2) array."""
    return np.einsum("ijk,i,j,k->", arr, wr, w1, w2)


def norm_squared(psi: "Wavefunction") -> float:
    p = np.abs(psi.values) ** 2
    return float(
        weighted_sum(p, psi.rgrid.weights, psi.z1grid.weights, psi.z2grid.weights).real
    )


def electron_density(psi: "Wavefunction", which: str) -> np.ndarray:
    """Marginal probability P(z_k): |psi|^2 integrated over the other axes.

    Integrating the result with the axis weights gives the surviving norm.
    """
    p = np.abs(psi.values) ** 2
    if which == "e1":
        return np.einsum("ijk,i,k->j", p, psi.rgrid.weights, psi.z2grid.weights)
    if which == "e2":
        return np.einsum("ijk,i,j->k", p, psi.rgrid.weights, psi.z1grid.weights)
    raise ConfigError(f"unknown electron '{which}' (expected 'e1' or 'e2')")


def expectations(
    psi: "Wavefunction", z1_ref: float | None = None, z2_ref: float | None = None
) -> tuple[float, float, float, float, float]:
    """(<R>, <z1>, <z2>, dz1, dz2), normalized by the surviving norm.

    Deviations are relative to the supplied t=0 references (zero if omitted).
    """
    p = np.abs(psi.values) ** 2
    wr, w1, w2 = psi.rgrid.weights, psi.z1grid.weights, psi.z2grid.weights
    n2 = float(weighted_sum(p, wr, w1, w2).real)
    r_mean = float(weighted_sum(p, wr * psi.rgrid.nodes, w1, w2).real) / n2
    z1_mean = float(weighted_sum(p, wr, w1 * psi.z1grid.nodes, w2).real) / n2
    z2_mean = float(weighted_sum(p, wr, w1, w2 * psi.z2grid.nodes).real) / n2
    dz1 = 0.0 if z1_ref is None else z1_mean - z1_ref
    dz2 = 0.0 if z2_ref is None else z2_mean - z2_ref
    return r_mean, z1_mean, z2_mean, dz1, dz2


@dataclass(frozen=True)
class AtomicEnergies:
    e_a: float
    e_b: float
    partition: str  # "direct-product" | "entangled"
    time: float = 0.0

    @property
    def total(self) -> float:
        return self.e_a + self.e_b


class EnergyEvaluator:
    """Caches static potential pieces and kinetic operators for energy splits."""

    def __init__(self, psi: "Wavefunction", params: PhysicalParams):
        self.params = params
        rg, z1g, z2g = psi.rgrid, psi.z1grid, psi.z2grid
        self.wr, self.w1, self.w2 = rg.weights, z1g.weights, z2g.weights
        r = rg.nodes[:, None]
        self.vpp_r = v_pp(rg.nodes)                                  # (N_R,)
        self.attr_a_1 = attraction_to_a(z1g.nodes[None, :], r, params.beta)  # (N_R, N_z1)
        self.attr_a_2 = attraction_to_a(z2g.nodes[None, :], r, params.beta)
        self.attr_b_1 = attraction_to_b(z1g.nodes[None, :], r, params.beta)
        self.attr_b_2 = attraction_to_b(z2g.nodes[None, :], r, params.beta)
        self.vee_12 = v_ee(z1g.nodes[:, None], z2g.nodes[None, :], params.alpha)
        self.kin_r = None
        if rg.kind != "frozen":
            self.kin_r = build_kinetic(rg, params.nuclear_prefactor)
        self.kin_z1 = build_kinetic(z1g, params.electron_prefactor)
        self.kin_z2 = build_kinetic(z2g, params.electron_prefactor)

    def _kinetic(self, values: np.ndarray, op, axis: int) -> float:
        if op is None:
            return 0.0
        tpsi = op.apply(values, axis=axis)
        return float(
            weighted_sum(np.conj(values) * tpsi, self.wr, self.w1, self.w2).real
        )

    def components(self, psi: "Wavefunction") -> dict[str, float]:
        """Raw matrix elements of every Hamiltonian piece."""
        p = np.abs(psi.values) ** 2
        m_r = np.einsum("ijk,j,k->i", p, self.w1, self.w2)
        m_r1 = np.einsum("ijk,k->ij", p, self.w2) * (self.wr[:, None] * self.w1[None, :])
        m_r2 = np.einsum("ijk,j->ik", p, self.w1) * (self.wr[:, None] * self.w2[None, :])
        m_12 = np.einsum("ijk,i->jk", p, self.wr) * (self.w1[:, None] * self.w2[None, :])
        return {
            "t_r": self._kinetic(psi.values, self.kin_r, 0),
            "t_1": self._kinetic(psi.values, self.kin_z1, 1),
            "t_2": self._kinetic(psi.values, self.kin_z2, 2),
            "v_pp": float(np.dot(m_r * self.wr, self.vpp_r)),
            "v_ee": float(np.sum(m_12 * self.vee_12)),
            "attr_a": float(np.sum(m_r1 * self.attr_a_1) + np.sum(m_r2 * self.attr_a_2)),
            "attr_b": float(np.sum(m_r1 * self.attr_b_1) + np.sum(m_r2 * self.attr_b_2)),
        }

    def total(self, psi: "Wavefunction") -> float:
        c = self.components(psi)
        return c["t_r"] + c["t_1"] + c["t_2"] + c["v_pp"] + c["v_ee"] + c["attr_a"] + c["attr_b"]

    def direct_product(self, psi: "Wavefunction", t: float = 0.0) -> AtomicEnergies:
        c = self.components(psi)
        shared = 0.5 * (c["t_r"] + c["v_pp"] + c["v_ee"])
        return AtomicEnergies(
            e_a=shared + c["t_1"] + c["attr_a"],
            e_b=shared + c["t_2"] + c["attr_b"],
            partition="direct-product",
            time=t,
        )

    def entangled(self, psi: "Wavefunction", t: float = 0.0) -> AtomicEnergies:
        c = self.components(psi)
        shared = 0.5 * (c["t_r"] + c["v_pp"] + c["v_ee"] + c["t_1"] + c["t_2"])
        return AtomicEnergies(
            e_a=shared + c["attr_a"],
            e_b=shared + c["attr_b"],
            partition="entangled",
            time=t,
        )


def atomic_energies_direct_product(
    psi: "Wavefunction", params: PhysicalParams, t: float = 0.0
) -> AtomicEnergies:
    return EnergyEvaluator(psi, params).direct_product(psi, t)


def atomic_energies_entangled(
    psi: "Wavefunction", params: PhysicalParams, t: float = 0.0
) -> AtomicEnergies:
    return EnergyEvaluator(psi, params).entangled(psi, t)


def total_energy(psi: "Wavefunction", params: PhysicalParams) -> float:
    return EnergyEvaluator(psi, params).total(psi)


def hamiltonian_energy(psi: "Wavefunction", potential, params: PhysicalParams) -> float:
    """<T + V> for an arbitrary cached potential (full or reduced)."""
    wr, w1, w2 = psi.rgrid.weights, psi.z1grid.weights, psi.z2grid.weights
    v = psi.values
    total = float(weighted_sum(np.abs(v) ** 2 * potential.values, wr, w1, w2).real)
    axes = (
        (psi.rgrid, params.nuclear_prefactor, 0),
        (psi.z1grid, params.electron_prefactor, 1),
        (psi.z2grid, params.electron_prefactor, 2),
    )
    for grid, pref, ax in axes:
        if grid.kind == "frozen":
            continue
        op = build_kinetic(grid, pref)
        total += float(weighted_sum(np.conj(v) * op.apply(v, ax), wr, w1, w2).real)
    return total


@dataclass
class FluxAccumulators:
    """Time-integrated outgoing flux through the four detector planes.

    Detector planes sit at +-z_d on both electron axes.  The atom label
    follows the side: negative-direction flux feeds I_A, positive-direction
    flux feeds I_B, regardless of which electron crosses.  Only the outgoing
    component of the current counts; recrossings are not subtracted, so the
    accumulators are monotone.
    """

    z_d: float = 91.0
    i_a_e1: float = 0.0
    i_a_e2: float = 0.0
    i_b_e1: float = 0.0
    i_b_e2: float = 0.0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.i_a_e1, self.i_a_e2, self.i_b_e1, self.i_b_e2)


def total_ionization(acc: FluxAccumulators) -> tuple[float, float]:
    """Per-side sums: (I_A via either electron, I_B via either electron)."""
    return acc.i_a_e1 + acc.i_a_e2, acc.i_b_e1 + acc.i_b_e2


class FluxDetectors:
    """Precomputed spectral-derivative rows at the snapped detector nodes."""

    def __init__(
        self,
        z1grid: Grid1D,
        z2grid: Grid1D,
        params: PhysicalParams,
        z_d: float = 91.0,
    ):
        for g in (z1grid, z2grid):
            if not (g.lo < -z_d and z_d < g.hi):
                raise ConfigError(
                    f"detector planes +-{z_d} fall outside grid '{g.label}' "
                    f"[{g.lo}, {g.hi}]"
                )
        self.z_d = z_d
        self.inv_mu = 1.0 / params.mu_e
        self.idx = {}
        self.rows = {}
        for name, g in (("z1", z1grid), ("z2", z2grid)):
            ip, im = g.nearest_index(z_d), g.nearest_index(-z_d)
            self.idx[name] = (im, ip)
            self.rows[name] = (
                spectral_derivative_row(g, im),
                spectral_derivative_row(g, ip),
            )
        # actual node positions after snapping
        self.positions = {
            "z1": (z1grid.nodes[self.idx["z1"][0]], z1grid.nodes[self.idx["z1"][1]]),
            "z2": (z2grid.nodes[self.idx["z2"][0]], z2grid.nodes[self.idx["z2"][1]]),
        }

    def accumulate(self, psi: "Wavefunction", dt: float, acc: FluxAccumulators) -> None:
        """Add dt * (outgoing current through each plane) to the accumulators."""
        v = psi.values
        wr, w1, w2 = psi.rgrid.weights, psi.z1grid.weights, psi.z2grid.weights
        im1, ip1 = self.idx["z1"]
        im2, ip2 = self.idx["z2"]
        rm1, rp1 = self.rows["z1"]
        rm2, rp2 = self.rows["z2"]
        # d/dz1 on the detector planes, reduced over (R, z2)
        j_m1 = self.inv_mu * np.imag(np.conj(v[:, im1, :]) * np.tensordot(rm1, v, axes=(0, 1)))
        j_p1 = self.inv_mu * np.imag(np.conj(v[:, ip1, :]) * np.tensordot(rp1, v, axes=(0, 1)))
        j_m2 = self.inv_mu * np.imag(np.conj(v[:, :, im2]) * np.tensordot(rm2, v, axes=(0, 2)))
        j_p2 = self.inv_mu * np.imag(np.conj(v[:, :, ip2]) * np.tensordot(rp2, v, axes=(0, 2)))
        acc.i_a_e1 += dt * float(np.einsum("ik,i,k->", np.maximum(-j_m1, 0.0), wr, w2))
        acc.i_b_e1 += dt * float(np.einsum("ik,i,k->", np.maximum(j_p1, 0.0), wr, w2))
        acc.i_a_e2 += dt * float(np.einsum("ij,i,j->", np.maximum(-j_m2, 0.0), wr, w1))
        acc.i_b_e2 += dt * float(np.einsum("ij,i,j->", np.maximum(j_p2, 0.0), wr, w1))


def probability_difference(p_now: np.ndarray, p_initial: np.ndarray) -> np.ndarray:
    """Pointwise density change relative to t=0 on the same grid."""
    if p_now.shape != p_initial.shape:
        raise ConfigError(
            f"density grids differ: {p_now.shape} vs {p_initial.shape}"
        )
    return p_now - p_initial


RECORD_COLUMNS = [
    "t_au",
    "norm",
    "E_total",
    "E_A",
    "E_B",
    "R_mean",
    "z1_mean",
    "z2_mean",
    "dz1",
    "dz2",
    "I_A_e1",
    "I_A_e2",
    "I_B_e1",
    "I_B_e2",
    "field_A",
    "field_B",
]


@dataclass
class RunRecord:
    """Time series of every recorded quantity; `norm` is the survival
    probability (the squared wavefunction norm)."""

    columns: dict[str, list[float]] = field(
        default_factory=lambda: {c: [] for c in RECORD_COLUMNS}
    )

    def append(self, **values: float) -> None:
        if set(values) != set(RECORD_COLUMNS):
            missing = set(RECORD_COLUMNS) - set(values)
            extra = set(values) - set(RECORD_COLUMNS)
            raise ConfigError(f"bad record row: missing={missing} extra={extra}")
        if self.columns["t_au"] and values["t_au"] <= self.columns["t_au"][-1]:
            raise ConfigError("record rows must be strictly increasing in time")
        for k, v in values.items():
            self.columns[k].append(float(v))

    def __len__(self) -> int:
        return len(self.columns["t_au"])

    def array(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])

    def last(self, name: str) -> float:
        return self.columns[name][-1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(RECORD_COLUMNS)
            for i in range(len(self)):
                w.writerow(f"{self.columns[c][i]:.17g}" for c in RECORD_COLUMNS)

    @classmethod
    def read_csv(cls, path) -> "RunRecord":
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        if not rows or rows[0] != RECORD_COLUMNS:
            raise ConfigError(f"{path}: header does not match the record contract")
        rec = cls()
        for row in rows[1:]:
            rec.append(**dict(zip(RECORD_COLUMNS, map(float, row))))
        return rec


def field_samples(pulse: LaserPulse, t: float) -> tuple[float, float]:
    """Effective fields acting on atoms A and B at time t."""
    e0a, e0b = effective_amplitudes(pulse)
    if pulse.e0 == 0.0:
        return 0.0, 0.0
    shape = electric_field(pulse, t) / pulse.e0
    return e0a * shape, e0b * shape


def write_density_csv(path, z: np.ndarray, p: np.ndarray) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["z", "P"])
        for zi, pi in zip(z, p):
            w.writerow((f"{zi:.17g}", f"{pi:.17g}"))


def read_density_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["z", "P"]:
        raise ConfigError(f"{path}: not a density snapshot file")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return data[:, 0], data[:, 1]
