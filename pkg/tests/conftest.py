import numpy as np
import pytest
import scipy.linalg as sla


def fd_ground_state_energy(potential, lo, hi, n, prefactor=0.5):
    """Independent oracle: lowest eigenvalue of -prefactor*d2/dx2 + V(x)
    by dense second-order finite differences with Dirichlet walls."""
    x = np.linspace(lo, hi, n)
    dx = x[1] - x[0]
    diag = 2.0 * prefactor / dx**2 + potential(x)
    off = np.full(n - 1, -prefactor / dx**2)
    vals = sla.eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    return float(vals[0])


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
