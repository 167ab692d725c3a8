import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqfree.errors import ConfigurationError
from eqfree.patches1d import MicroRhsError, config_patches1, patch_edge_int1
from eqfree.patches2d import (
    config_patches2,
    field_csv_rows,
    full_domain_oracle2,
    geometry_manifest,
    nonlinear_diffusion_rhs2,
    patch_edge_int2,
    patch_rhs2,
    to_field2,
)
from eqfree.systems import heat_rhs1

HUMP_DOMAIN = (-3, 3, -2, 2)
zero_rhs = lambda t, u, x, y: np.zeros_like(u)


def hump(order=0, rhs=nonlinear_diffusion_rhs2, counts=(9, 7)):
    return config_patches2(rhs, HUMP_DOMAIN, counts, order, 0.25, 5)


class TestConfig:
    def test_hump_spacings(self):
        c = hump()
        assert c.gx.H == pytest.approx(2 / 3) and c.gy.H == pytest.approx(4 / 7)
        assert c.shape == (5, 5, 9, 7)
        assert c.x.shape == (5, 1, 9, 1) and c.y.shape == (1, 5, 1, 7)

    def test_even_n_rejected(self):
        with pytest.raises(ConfigurationError):
            config_patches2(zero_rhs, HUMP_DOMAIN, (9, 7), 0, 0.25, 4)

    def test_per_axis_parameters(self):
        c = config_patches2(zero_rhs, HUMP_DOMAIN, (6, 8), (2, 4), (0.2, 0.3), (3, 7))
        assert (c.gx.ordCC, c.gy.ordCC) == (2, 4)
        assert c.shape == (3, 7, 6, 8)

    def test_nan_bc_means_periodic(self):
        assert hump().size == config_patches2(zero_rhs, HUMP_DOMAIN, (9, 7), 0, 0.25, 5, bc=float("nan")).size
        with pytest.raises(ConfigurationError):
            config_patches2(zero_rhs, HUMP_DOMAIN, (9, 7), 0, 0.25, 5, bc="wall")

    def test_manifest(self):
        m = geometry_manifest(hump())
        assert m["x"]["nPatch"] == 9 and len(m["y"]["centres"]) == 7


class TestEdges:
    @pytest.mark.parametrize("order", [0, 2, 4])
    def test_constant(self, order):
        c = hump(order)
        np.testing.assert_allclose(patch_edge_int2(c, np.full(c.shape, -1.5)), -1.5, atol=1e-13)

    def test_separable_fourier_mode(self):
        c = hump()
        u = np.sin(2 * np.pi * c.x / 6) * np.sin(2 * np.pi * c.y / 4) * np.ones(c.shape)
        np.testing.assert_allclose(patch_edge_int2(c, u), u, atol=1e-10)

    def test_bilinear_order2(self):
        c = hump(2)
        u = (c.x + 0.3) * (c.y - 1.1) * np.ones(c.shape)
        out = patch_edge_int2(c, u)
        np.testing.assert_allclose(out[..., 1:-1, 1:-1], u[..., 1:-1, 1:-1], atol=1e-12)

    def test_degenerate_single_patch_column(self):
        c = config_patches2(zero_rhs, HUMP_DOMAIN, (1, 6), 0, 0.25, 5)
        c1 = config_patches1(heat_rhs1, (-2, 2), 6, 0.25, 0, 5)
        g = np.random.default_rng(1).standard_normal(c1.shape)
        u = np.broadcast_to(g[None, :, None, :], c.shape)
        out = patch_edge_int2(c, u)
        expect = patch_edge_int1(c1, g)
        for i in range(5):
            np.testing.assert_allclose(out[i, :, 0, :], expect, atol=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(ConfigurationError):
            patch_edge_int2(hump(), np.zeros(10))

    @settings(max_examples=25, deadline=None)
    @given(ox=st.sampled_from([0, 2, 4]), oy=st.sampled_from([0, 2, 4]), seed=st.integers(0, 10**4))
    def test_separable_tensor_product(self, ox, oy, seed):
        c = config_patches2(zero_rhs, HUMP_DOMAIN, (7, 6), (ox, oy), 0.3, 5)
        cx = config_patches1(heat_rhs1, (-3, 3), 7, 0.3, ox, 5)
        cy = config_patches1(heat_rhs1, (-2, 2), 6, 0.3, oy, 5)
        rng = np.random.default_rng(seed)
        f, g = rng.standard_normal(cx.shape), rng.standard_normal(cy.shape)
        u = f[:, None, :, None] * g[None, :, None, :]
        expect = patch_edge_int1(cx, f)[:, None, :, None] * patch_edge_int1(cy, g)[None, :, None, :]
        np.testing.assert_allclose(patch_edge_int2(c, u), expect, atol=1e-11)

    @settings(max_examples=20, deadline=None)
    @given(order=st.sampled_from([0, 2, 4]), seed=st.integers(0, 10**4))
    def test_idempotent(self, order, seed):
        c = hump(order)
        once = patch_edge_int2(c, np.random.default_rng(seed).standard_normal(c.shape))
        np.testing.assert_allclose(patch_edge_int2(c, once), once, atol=1e-12)

    def test_flat_is_column_major(self):
        c = hump()
        u = np.random.default_rng(0).standard_normal(c.shape)
        np.testing.assert_array_equal(to_field2(c, np.ravel(u, order="F")), u)


class TestRhs:
    def test_zero_micro(self):
        c = hump(rhs=zero_rhs)
        assert np.all(patch_rhs2(c, 0.0, np.ones(c.size)) == 0)

    def test_constant_field_zero_interior(self):
        c = hump()
        ut = to_field2(c, patch_rhs2(c, 0.0, np.full(c.size, 0.7)))
        # centre points see no coupled values; elsewhere only FFT round-off
        assert np.all(ut[2, 2] == 0.0)
        np.testing.assert_allclose(ut, 0.0, atol=1e-11)

    @given(seed=st.integers(0, 1000))
    def test_edge_faces_zero(self, seed):
        c = hump()
        ut = to_field2(c, patch_rhs2(c, 0.0, np.random.default_rng(seed).random(c.size)))
        assert np.all(ut[[0, -1]] == 0) and np.all(ut[:, [0, -1]] == 0)

    def test_failure_names_patch(self):
        def bad(t, u, x, y):
            out = np.zeros_like(u)
            out[2, 2, 4, 3] = np.inf
            return out

        with pytest.raises(MicroRhsError, match=r"\(4, 3\)"):
            patch_rhs2(hump(rhs=bad), 0.0, np.zeros(hump().size))


class TestNonlinearDiffusion:
    def test_unit_field(self):
        ut = nonlinear_diffusion_rhs2(0, np.ones((5, 5)), np.arange(5.0)[:, None], np.arange(5.0)[None, :])
        assert np.all(ut[1:-1, 1:-1] == 0) and np.all(np.isnan(ut[0]))

    def test_point_source(self):
        u = np.zeros((5, 5))
        u[2, 2] = 1.0
        ut = nonlinear_diffusion_rhs2(0, u, np.arange(5.0)[:, None], np.arange(5.0)[None, :])
        assert ut[2, 2] == -4
        assert ut[1, 2] == ut[3, 2] == ut[2, 1] == ut[2, 3] == 1
        assert ut[1, 1] == 0

    def test_gaussian_symmetry(self):
        x = np.linspace(-2, 2, 21)
        u = np.exp(-x[:, None] ** 2 - x[None, :] ** 2)
        ut = nonlinear_diffusion_rhs2(0, u, x[:, None], x[None, :])[1:-1, 1:-1]
        np.testing.assert_allclose(ut, ut[::-1], atol=1e-13)
        np.testing.assert_allclose(ut, ut[:, ::-1], atol=1e-13)


def test_oracle2_conserves_mass():
    rng = np.random.default_rng(0)
    U0 = rng.random((24, 16))
    snaps = full_domain_oracle2(nonlinear_diffusion_rhs2, HUMP_DOMAIN, (24, 16), (0, 0.2), U0, tol=1e-9, t_eval=(0, 0.1, 0.2))
    assert len(snaps) == 3
    assert abs(snaps[-1].sum() - U0.sum()) <= 1e-8
    assert snaps[-1].std() < U0.std()


def test_csv_rows_interior_only():
    c = hump()
    rows = field_csv_rows(c, np.zeros(c.shape))
    assert len(rows) == 9 * 7 * 3 * 3
