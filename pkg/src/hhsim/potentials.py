"""Soft-core Coulomb terms and the assembled system potential.

The system potential on the (R, z1, z2) product grid is

    V = 1/R - 1/sqrt((z1-R/2)^2+b) - 1/sqrt((z1+R/2)^2+b)
          - 1/sqrt((z2-R/2)^2+b) - 1/sqrt((z2+R/2)^2+b)
          + 1/sqrt((z1-z2)^2+a)

with softening constants a (electron-electron) and b (electron-proton).
The "reduced-noninteracting" variant keeps only each electron's attraction
to its nearest proton: electron 1 to the proton at -R/2 (atom A), electron 2
to the proton at +R/2 (atom B).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grids import Grid1D

# CODATA proton/electron mass ratio
PROTON_MASS_AU = 1836.15267343


@dataclass(frozen=True)
class PhysicalParams:
    """Masses and softening constants, all in atomic units."""

    m_p: float = PROTON_MASS_AU
    alpha: float = 1.0e-4  # electron-electron softening
    beta: float = 1.995    # electron-proton softening

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("softening constants alpha and beta must be positive")

    @property
    def mu_e(self) -> float:
        """Reduced electron mass 2*m_p/(2*m_p+1)."""
        return 2.0 * self.m_p / (2.0 * self.m_p + 1.0)

    @property
    def gamma(self) -> float:
        """Dipole mass-correction factor 1/(1+2*m_p)."""
        return 1.0 / (1.0 + 2.0 * self.m_p)

    @property
    def nuclear_prefactor(self) -> float:
        """Kinetic prefactor 1/m_p on the internuclear axis."""
        return 1.0 / self.m_p

    @property
    def electron_prefactor(self) -> float:
        """Kinetic prefactor 1/(2*mu_e) on each electron axis."""
        return 1.0 / (2.0 * self.mu_e)


def v_pp(r, /):
    """Proton-proton repulsion 1/R; R must be positive."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ConfigError("v_pp requires R > 0")
    return 1.0 / r


def v_ee(z1, z2, alpha: float):
    """Softened electron-electron repulsion 1/sqrt((z1-z2)^2 + alpha)."""
    d = np.asarray(z1, dtype=float) - np.asarray(z2, dtype=float)
    return 1.0 / np.sqrt(d * d + alpha)


def v_ep(z, r, beta: float):
    """Two-center softened attraction of one electron to both protons at -+R/2."""
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    return -1.0 / np.sqrt((z - r / 2) ** 2 + beta) - 1.0 / np.sqrt((z + r / 2) ** 2 + beta)


def attraction_to_a(z, r, beta: float):
    """Attraction of an electron at z to the atom-A proton at -R/2."""
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    return -1.0 / np.sqrt((z + r / 2) ** 2 + beta)


def attraction_to_b(z, r, beta: float):
    """Attraction of an electron at z to the atom-B proton at +R/2."""
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    return -1.0 / np.sqrt((z - r / 2) ** 2 + beta)


@dataclass(frozen=True)
class PotentialField:
    """Static potential cached on the product grid, shape (N_R, N_z1, N_z2)."""

    kind: str  # "full" | "reduced-noninteracting"
    values: np.ndarray


def assemble_potential(
    kind: str, rgrid: Grid1D, z1grid: Grid1D, z2grid: Grid1D, params: PhysicalParams
) -> PotentialField:
    """Evaluate the chosen potential on the product grid and cache it.

    The array is laid out (R, z1, z2) with R slowest.  A frozen R axis
    (single node) produces a (1, N, N) array without special-casing.
    """
    if kind not in ("full", "reduced-noninteracting"):
        raise ConfigError(f"unknown potential kind '{kind}'")
    r = rgrid.nodes[:, None, None]
    z1 = z1grid.nodes[None, :, None]
    z2 = z2grid.nodes[None, None, :]
    shape = (rgrid.n, z1grid.n, z2grid.n)
    nbytes = int(np.prod(shape)) * 8
    try:
        if kind == "full":
            vals = np.broadcast_to(v_pp(rgrid.nodes)[:, None, None], shape).copy()
            vals += v_ep(z1, r, params.beta)
            vals += v_ep(z2, r, params.beta)
            vals += v_ee(z1, z2, params.alpha)
        else:
            vals = np.zeros(shape)
            vals += attraction_to_a(z1, r, params.beta)
            vals += attraction_to_b(z2, r, params.beta)
    except MemoryError as exc:
        raise ConfigError(
            f"cannot allocate {nbytes / 1e9:.2f} GB for the potential on "
            f"{shape[0]}x{shape[1]}x{shape[2]} nodes"
        ) from exc
    return PotentialField(kind, vals)
