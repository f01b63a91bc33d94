import numpy as np
import pytest
from numpy.testing import assert_allclose

from hhsim.errors import ConfigError
from hhsim.grids import build_equidistant_grid, frozen_axis
from hhsim.potentials import (
    PhysicalParams,
    assemble_potential,
    v_ee,
    v_ep,
    v_pp,
)


class TestPhysicalParams:
    def test_defaults(self):
        p = PhysicalParams()
        assert p.alpha == 1.0e-4
        assert p.beta == 1.995
        assert 0.999 < p.mu_e < 1.0
        assert 0.0 < p.gamma < 3e-4

    def test_derived_values(self):
        p = PhysicalParams()
        assert_allclose(p.mu_e, 2 * p.m_p / (2 * p.m_p + 1), rtol=1e-15)
        assert_allclose(p.gamma, 1 / (1 + 2 * p.m_p), rtol=1e-15)

    def test_rejects_nonpositive_softening(self):
        with pytest.raises(ConfigError):
            PhysicalParams(alpha=0.0)
        with pytest.raises(ConfigError):
            PhysicalParams(beta=-1.0)


class TestCoulombTerms:
    def test_v_pp_values(self):
        assert_allclose(v_pp(100.0), 0.01)
        assert_allclose(v_pp(1.0), 1.0)
        assert_allclose(v_pp(75.0), 1.0 / 75.0)

    def test_v_pp_rejects_nonpositive(self):
        with pytest.raises(ConfigError):
            v_pp(0.0)
        with pytest.raises(ConfigError):
            v_pp(-3.0)

    def test_v_ee_coincident(self):
        assert_allclose(v_ee(7.0, 7.0, 1e-4), 100.0)

    def test_v_ee_far(self):
        assert_allclose(v_ee(50.0, -50.0, 1e-4), 1.0 / np.sqrt(10000.0001), rtol=1e-14)
        assert abs(v_ee(50.0, -50.0, 1e-4) - 0.01) < 1e-8

    def test_v_ee_symmetric(self, rng):
        a = rng.uniform(-100, 100, size=50)
        b = rng.uniform(-100, 100, size=50)
        assert_allclose(v_ee(a, b, 1e-4), v_ee(b, a, 1e-4), rtol=1e-15)

    def test_v_ep_example_at_atom(self):
        # -1/sqrt(1.995) - 1/sqrt(10000+1.995)
        assert abs(v_ep(-50.0, 100.0, 1.995) - (-0.71800)) < 1e-5

    def test_v_ep_midpoint(self):
        assert abs(v_ep(0.0, 100.0, 1.995) - (-0.039984)) < 1e-5

    def test_v_ep_parity(self, rng):
        z = rng.uniform(-100, 100, size=50)
        assert_allclose(v_ep(z, 100.0, 1.995), v_ep(-z, 100.0, 1.995), rtol=1e-14)

    def test_signs(self, rng):
        z = rng.uniform(-120, 120, size=100)
        r = rng.uniform(75, 125, size=100)
        assert np.all(v_ee(z, z[::-1], 1e-4) >= 0)
        assert np.all(v_ep(z, r, 1.995) < 0)
        assert np.all(v_pp(r) > 0)


class TestAssembledPotential:
    def setup_method(self):
        self.params = PhysicalParams()
        self.rgrid = frozen_axis(100.0)
        # grids put nodes exactly on -50, 0, +50
        self.zgrid = build_equidistant_grid(-120.0, 120.0, 241, "z")

    def _value_at(self, field, z1, z2):
        i = self.zgrid.nearest_index(z1)
        j = self.zgrid.nearest_index(z2)
        return field.values[0, i, j]

    def test_full_at_atom_sites(self):
        f = assemble_potential("full", self.rgrid, self.zgrid, self.zgrid, self.params)
        assert abs(self._value_at(f, -50.0, 50.0) - (-1.41600)) < 1e-4

    def test_reduced_at_atom_sites(self):
        f = assemble_potential(
            "reduced-noninteracting", self.rgrid, self.zgrid, self.zgrid, self.params
        )
        assert abs(self._value_at(f, -50.0, 50.0) - (-2.0 / np.sqrt(1.995))) < 1e-9

    def test_full_minus_reduced_tiny_at_ground_config(self):
        full = assemble_potential("full", self.rgrid, self.zgrid, self.zgrid, self.params)
        red = assemble_potential(
            "reduced-noninteracting", self.rgrid, self.zgrid, self.zgrid, self.params
        )
        gap = self._value_at(full, -50.0, 50.0) - self._value_at(red, -50.0, 50.0)
        assert abs(gap) < 2e-5

    def test_exchange_symmetry(self):
        f = assemble_potential("full", self.rgrid, self.zgrid, self.zgrid, self.params)
        v = f.values[0]
        assert_allclose(v, v.T, rtol=0, atol=1e-14)

    def test_reflection_symmetry(self):
        f = assemble_potential("full", self.rgrid, self.zgrid, self.zgrid, self.params)
        v = f.values[0]
        assert_allclose(v, v[::-1, ::-1], rtol=0, atol=1e-14)

    def test_full_with_live_r_axis(self):
        rgrid = build_equidistant_grid(75.0, 125.0, 16, "R")
        f = assemble_potential("full", rgrid, self.zgrid, self.zgrid, self.params)
        assert f.values.shape == (16, 241, 241)
        i = self.zgrid.nearest_index(-50.0)
        j = self.zgrid.nearest_index(50.0)
        r = rgrid.nodes[4]
        expected = (
            v_pp(r)
            + v_ep(-50.0, r, self.params.beta)
            + v_ep(50.0, r, self.params.beta)
            + v_ee(-50.0, 50.0, self.params.alpha)
        )
        assert_allclose(f.values[4, i, j], expected, rtol=1e-14)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            assemble_potential("bogus", self.rgrid, self.zgrid, self.zgrid, self.params)
