"""Coordinate grids and per-axis spectral kinetic-energy operators.

Two kinetic backends share one contract:

* equidistant grids use periodic Fourier differentiation (momentum-space
  multiplication by ``prefactor * k^2``),
* Gauss-Hermite grids use a dense DVR matrix built from the harmonic
  oscillator basis.

Grids and operators are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError

MIN_POINTS = 8


@dataclass(frozen=True)
class Grid1D:
    """One coordinate axis: nodes, quadrature weights, spacing if equidistant.

    ``kind`` is "uniform", "hermite", or "frozen" (a single clamped node,
    used for the nuclear axis in frozen-R mode).
    """

    label: str
    nodes: np.ndarray
    weights: np.ndarray
    spacing: float | None
    kind: str = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.kind != "frozen":
            if self.nodes.size < MIN_POINTS:
                raise ConfigError(
                    f"grid '{self.label}': need at least {MIN_POINTS} nodes, got {self.nodes.size}"
                )
            if not np.all(np.diff(self.nodes) > 0):
                raise ConfigError(f"grid '{self.label}': nodes must be strictly increasing")
        if self.spacing is not None:
            gaps = np.diff(self.nodes)
            if np.max(np.abs(gaps / self.spacing - 1.0)) > 1e-12:
                raise ConfigError(f"grid '{self.label}': nodes are not equidistant")
        if np.any(self.weights <= 0):
            raise ConfigError(f"grid '{self.label}': quadrature weights must be positive")

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    def nearest_index(self, x: float) -> int:
        return int(np.argmin(np.abs(self.nodes - x)))


def build_equidistant_grid(lo: float, hi: float, n: int, label: str = "z") -> Grid1D:
    """Equidistant grid of n nodes spanning [lo, hi]; weights equal the spacing."""
    if hi <= lo:
        raise ConfigError(f"grid '{label}': max {hi} must exceed min {lo}")
    if n < MIN_POINTS:
        raise ConfigError(f"grid '{label}': need at least {MIN_POINTS} nodes, got {n}")
    nodes = np.linspace(lo, hi, n)
    dx = (hi - lo) / (n - 1)
    return Grid1D(label, nodes, np.full(n, dx), dx, kind="uniform")


def frozen_axis(value: float, label: str = "R") -> Grid1D:
    """Single clamped node with unit weight (no kinetic energy on this axis)."""
    return Grid1D(label, np.array([value]), np.array([1.0]), None, kind="frozen")


def _hermite_functions(n: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal harmonic-oscillator eigenfunctions psi_0..psi_{n-1} at x."""
    psi = np.empty((n, x.size))
    psi[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n > 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for m in range(2, n):
        psi[m] = np.sqrt(2.0 / m) * x * psi[m - 1] - np.sqrt((m - 1) / m) * psi[m - 2]
    return psi


def build_hermite_grid(n: int, scale: float, label: str = "z") -> Grid1D:
    """Gauss-Hermite DVR grid: nodes scale*x_i with x_i the Hermite roots.

    Weights are the Hermite-function quadrature weights (Christoffel numbers
    with the Gaussian factor removed), so plain weighted sums integrate
    |psi|^2 like on any other grid.
    """
    if n < MIN_POINTS:
        raise ConfigError(f"grid '{label}': need at least {MIN_POINTS} nodes, got {n}")
    if scale <= 0:
        raise ConfigError(f"grid '{label}': hermite scale must be positive")
    x, _ = np.polynomial.hermite.hermgauss(n)
    phi = _hermite_functions(n, x)
    lam = 1.0 / np.sum(phi * phi, axis=0)  # stable form of w_i * exp(x_i^2)
    return Grid1D(label, scale * x, scale * lam, None, kind="hermite")


@dataclass(frozen=True)
class KineticOperator1D:
    """-prefactor * d^2/dx^2 on one axis, Hermitian and positive semidefinite.

    Fourier backend: ``k2`` holds the momentum-space multipliers
    prefactor*k^2 (and ``k1`` the first-derivative ik multipliers with the
    Nyquist mode zeroed).  DVR backend: ``matrix`` is dense.
    """

    grid: Grid1D
    prefactor: float
    k2: np.ndarray | None = None
    k1: np.ndarray | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def backend(self) -> str:
        return "fourier" if self.k2 is not None else "dvr"

    def apply(self, psi: np.ndarray, axis: int = 0) -> np.ndarray:
        if self.k2 is not None:
            shape = [1] * psi.ndim
            shape[axis] = self.k2.size
            phat = sfft.fft(psi, axis=axis)
            phat *= self.k2.reshape(shape)
            return sfft.ifft(phat, axis=axis)
        out = np.tensordot(self.matrix, psi, axes=([1], [axis]))
        return np.moveaxis(out, 0, axis)

    def dense(self) -> np.ndarray:
        """Dense matrix representation (for eigensolves and tests)."""
        if self.matrix is not None:
            return self.matrix
        eye = np.eye(self.grid.n, dtype=complex)
        return np.ascontiguousarray(self.apply(eye, axis=0))


def build_kinetic(grid: Grid1D, prefactor: float) -> KineticOperator1D:
    """Kinetic operator for a grid; backend chosen by the grid kind."""
    if prefactor <= 0:
        raise ConfigError("kinetic prefactor must be positive")
    if grid.kind == "frozen":
        raise ConfigError(f"axis '{grid.label}' is frozen; it has no kinetic operator")
    if grid.kind == "uniform":
        k = 2.0 * np.pi * sfft.fftfreq(grid.n, grid.spacing)
        k1 = 1j * k
        if grid.n % 2 == 0:
            k1 = k1.copy()
            k1[grid.n // 2] = 0.0  # symmetric derivative: drop the Nyquist mode
        return KineticOperator1D(grid, prefactor, k2=prefactor * k * k, k1=k1)
    if grid.kind == "hermite":
        return KineticOperator1D(grid, prefactor, matrix=_hermite_kinetic(grid, prefactor))
    raise ConfigError(f"unknown grid kind '{grid.kind}'")


def _hermite_kinetic(grid: Grid1D, prefactor: float) -> np.ndarray:
    """Dense -prefactor*d^2/dz^2 in the Hermite DVR.

    In the oscillator basis d^2/dx^2 = x^2 - 2*H_osc, whose exact matrix is
    pentadiagonal; it is transformed to node space with the orthogonal
    collocation matrix U[n,i] = sqrt(lambda_i)*psi_n(x_i).  The returned
    matrix acts on node values, so it is Hermitian with respect to the
    quadrature inner product (not plain-symmetric): K = S * sqrt(l_i/l_j)
    with S the symmetric coefficient-space matrix.
    """
    n = grid.n
    x, _ = np.polynomial.hermite.hermgauss(n)
    scale = float(grid.nodes[-1] / x[-1])
    phi = _hermite_functions(n, x)
    lam = 1.0 / np.sum(phi * phi, axis=0)
    U = phi * np.sqrt(lam)[None, :]
    m = np.arange(n)
    d2 = np.zeros((n, n))
    d2[m, m] = -(2 * m + 1) / 2.0
    mm = np.arange(n - 2)
    d2[mm, mm + 2] = np.sqrt((mm + 1) * (mm + 2)) / 2.0
    d2[mm + 2, mm] = d2[mm, mm + 2]
    s = U.T @ d2 @ U
    s = (s + s.T) / 2.0
    root = np.sqrt(lam)
    return -(prefactor / scale**2) * (s * (root[None, :] / root[:, None]))


def spectral_derivative_row(grid: Grid1D, index: int) -> np.ndarray:
    """Row of the Fourier first-derivative matrix: f'(x_index) = row @ f.

    Identical to differentiating via FFT and reading off one node; used by
    the flux detectors so plane derivatives match the propagation accuracy.
    """
    if grid.kind != "uniform":
        raise ConfigError("spectral derivative rows require an equidistant grid")
    n = grid.n
    k = 2.0 * np.pi * sfft.fftfreq(n, grid.spacing)
    ik = 1j * k
    if n % 2 == 0:
        ik[n // 2] = 0.0
    w = sfft.ifft(ik)
    j = np.arange(n)
    return np.real(w[(index - j) % n])
