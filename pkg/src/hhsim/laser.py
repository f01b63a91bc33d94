"""Temporal pulse, spatial envelopes, and the dipole coupling term.

The pulse is defined through its vector potential

    A(t)/c = (E0/w) sin^2(pi t/t_p) cos(w t + phi),   0 <= t <= t_p,

so the electric field E(t) = -(1/c) dA/dt carries the envelope-derivative
switching term and integrates to zero over the pulse (no DC component).
The speed of light cancels and never enters the numerics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grids import Grid1D
from .potentials import PhysicalParams

Z_ATOM_A = -50.0
Z_ATOM_B = 50.0


@dataclass(frozen=True)
class GaussianEnvelope:
    """Focal spot exp(-((z-z0)/lam)^2)."""

    lam: float
    z0: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError("gaussian envelope width must be positive")

    def factor(self, z):
        u = (np.asarray(z, dtype=float) - self.z0) / self.lam
        return np.exp(-u * u)


@dataclass(frozen=True)
class NarrowEnvelope:
    """sin^2 window supported on [z_a, z_b], zero outside."""

    z_a: float
    z_b: float

    def __post_init__(self):
        if self.z_a >= self.z_b:
            raise ConfigError("narrow envelope requires z_a < z_b")

    def factor(self, z):
        z = np.asarray(z, dtype=float)
        u = np.pi * (z - self.z_a) / (self.z_b - self.z_a)
        return np.where((z >= self.z_a) & (z <= self.z_b), np.sin(u) ** 2, 0.0)


@dataclass(frozen=True)
class UniformEnvelope:
    def factor(self, z):
        return np.ones_like(np.asarray(z, dtype=float))


@dataclass(frozen=True)
class OffEnvelope:
    def factor(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))


Envelope = GaussianEnvelope | NarrowEnvelope | UniformEnvelope | OffEnvelope


@dataclass(frozen=True)
class LaserPulse:
    """Pulse parameters plus the spatial envelope and per-electron masks."""

    e0: float
    omega: float
    t_p: float
    phi: float = 0.0
    envelope: Envelope = UniformEnvelope()
    mask_e1: bool = True
    mask_e2: bool = True

    def __post_init__(self):
        if self.t_p <= 0 or self.omega <= 0:
            raise ConfigError("pulse requires t_p > 0 and omega > 0")

    @property
    def cycles(self) -> float:
        """Number of optical cycles under the pulse, w*t_p/(2*pi)."""
        return self.omega * self.t_p / (2.0 * np.pi)


def vector_potential_over_c(pulse: LaserPulse, t):
    """A(t)/c; zero outside [0, t_p]."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < pulse.t_p)
    s = np.sin(np.pi * t / pulse.t_p)
    a = (pulse.e0 / pulse.omega) * s * s * np.cos(pulse.omega * t + pulse.phi)
    return np.where(inside, a, 0.0)


def electric_field(pulse: LaserPulse, t):
    """E(t) = -(1/c) dA/dt, including the finite-duration switching term."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < pulse.t_p)
    s2 = np.sin(np.pi * t / pulse.t_p) ** 2
    sw = (np.pi / (pulse.omega * pulse.t_p)) * np.sin(2.0 * np.pi * t / pulse.t_p)
    w = pulse.omega * t + pulse.phi
    e = pulse.e0 * (s2 * np.sin(w) - sw * np.cos(w))
    out = np.where(inside, e, 0.0)
    return float(out) if out.ndim == 0 else out


def spatial_envelope(pulse: LaserPulse, z):
    """Envelope factor F(z) in [0, 1]."""
    return pulse.envelope.factor(z)


def effective_amplitudes(pulse: LaserPulse) -> tuple[float, float]:
    """Local field amplitudes (E0_A, E0_B) = E0 * F(z) at the two atom sites."""
    return (
        float(pulse.e0 * pulse.envelope.factor(Z_ATOM_A)),
        float(pulse.e0 * pulse.envelope.factor(Z_ATOM_B)),
    )


def dipole_coupling(
    pulse: LaserPulse, z1grid: Grid1D, z2grid: Grid1D, params: PhysicalParams
) -> tuple[np.ndarray, np.ndarray]:
    """Static per-axis dipole arrays d_k = mask_k * (1+gamma) * F(z_k) * z_k.

    The full interaction at time t is E(t) * (d1 + d2), separable per axis,
    which the propagator exploits: the time dependence is a scalar factor.
    """
    g = 1.0 + params.gamma
    d1 = float(pulse.mask_e1) * g * pulse.envelope.factor(z1grid.nodes) * z1grid.nodes
    d2 = float(pulse.mask_e2) * g * pulse.envelope.factor(z2grid.nodes) * z2grid.nodes
    return d1, d2


def interaction_potential(
    pulse: LaserPulse, t: float, z1grid: Grid1D, z2grid: Grid1D, params: PhysicalParams
) -> np.ndarray:
    """Multiplicative field-coupling term on the (z1, z2) plane at time t."""
    d1, d2 = dipole_coupling(pulse, z1grid, z2grid, params)
    return electric_field(pulse, t) * (d1[:, None] + d2[None, :])
