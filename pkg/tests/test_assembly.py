import numpy as np
import pytest

from torusflow import (
    CyclicTridiagonal,
    InadmissibleCurveError,
    PeriodicCurve,
    manufactured_forcing,
    radial_direction_load,
    source_load,
    weighted_mass_matrix,
    weighted_stiffness_matrix,
)

from oracles import (
    dense_mass,
    dense_radial_load,
    dense_source_load,
    dense_stiffness,
    random_admissible_positions,
)


def diamond_curve():
    """Diamond about (2, 0): all four edges have length sqrt(2)."""
    return PeriodicCurve(np.array([[3.0, 0.0], [2.0, 1.0], [1.0, 0.0], [2.0, -1.0]]))


class TestCyclicTridiagonal:
    def test_rejects_bad_bands(self):
        ok = np.ones(4)
        with pytest.raises(ValueError):
            CyclicTridiagonal(np.ones((2, 2)), ok, ok)
        with pytest.raises(ValueError):
            CyclicTridiagonal(ok, np.ones(3), ok)
        with pytest.raises(ValueError):
            CyclicTridiagonal(np.ones(2), np.ones(2), np.ones(2))

    def test_bands_are_immutable(self):
        m = CyclicTridiagonal(np.ones(4), np.zeros(4), np.zeros(4))
        with pytest.raises(ValueError):
            m.diag[0] = 5.0

    def test_matvec_matches_dense(self, rng):
        for J in (3, 4, 5, 11):
            m = CyclicTridiagonal(rng.normal(size=J), rng.normal(size=J), rng.normal(size=J))
            dense = m.to_dense()
            x = rng.normal(size=J)
            assert np.allclose(m.matvec(x), dense @ x, rtol=0, atol=1e-14)
            cols = rng.normal(size=(J, 3))
            assert np.allclose(m.matvec(cols), dense @ cols, rtol=0, atol=1e-14)

    def test_matvec_band_placement(self):
        # row j couples sub[j] to node j-1 and sup[j] to node j+1
        J = 5
        m = CyclicTridiagonal(np.zeros(J), np.arange(1.0, 6.0), np.arange(10.0, 15.0))
        x = np.eye(J)[0]  # unit vector at node 0
        y = m.matvec(x)
        assert y[1] == 2.0  # sub[1] reaches back to node 0
        assert y[4] == 14.0  # sup[4] wraps forward to node 0
        assert y[0] == 0.0

    def test_dense_is_full_at_order_three(self):
        # at J = 3 every row has all three columns occupied
        m = CyclicTridiagonal(np.full(3, 2.0), np.full(3, 1.0), np.full(3, 10.0))
        dense = m.to_dense()
        expect = np.array([[2.0, 10.0, 1.0], [1.0, 2.0, 10.0], [10.0, 1.0, 2.0]])
        assert np.array_equal(dense, expect)
        x = np.array([1.0, 2.0, 3.0])
        assert np.allclose(m.matvec(x), dense @ x, rtol=0, atol=1e-14)

    def test_add_and_scale(self, rng):
        a = CyclicTridiagonal(rng.normal(size=6), rng.normal(size=6), rng.normal(size=6))
        b = CyclicTridiagonal(rng.normal(size=6), rng.normal(size=6), rng.normal(size=6))
        combo = 2.0 * a + b
        assert np.allclose(combo.to_dense(), 2.0 * a.to_dense() + b.to_dense())
        with pytest.raises(TypeError):
            a + np.eye(6)

    def test_inf_norm_matches_dense(self, rng):
        for J in (3, 4, 9):
            m = CyclicTridiagonal(rng.normal(size=J), rng.normal(size=J), rng.normal(size=J))
            expect = np.abs(m.to_dense()).sum(axis=1).max()
            assert m.inf_norm() == pytest.approx(expect, rel=1e-14)


class TestHandComputedDiamond:
    """Every entry checked against hand-computed integrals.

    On the diamond all edges have length sqrt(2) and h = 1/4, so the
    squared parametric speed is 32 on every element and the radial
    weight is linear between the node radii 3, 2, 1, 2.
    """

    def test_mass_matrix(self):
        m = weighted_mass_matrix(diamond_curve())
        assert np.allclose(m.diag, [44.0 / 3.0, 32.0 / 3.0, 20.0 / 3.0, 32.0 / 3.0])
        assert np.allclose(m.sub, [10.0 / 3.0, 10.0 / 3.0, 2.0, 2.0])
        assert np.allclose(m.sup, [10.0 / 3.0, 2.0, 2.0, 10.0 / 3.0])

    def test_stiffness_matrix(self):
        k = weighted_stiffness_matrix(diamond_curve())
        assert np.allclose(k.diag, [20.0, 16.0, 12.0, 16.0])
        assert np.allclose(k.sub, [-10.0, -10.0, -6.0, -6.0])
        assert np.allclose(k.sup, [-10.0, -6.0, -6.0, -10.0])

    def test_radial_load(self):
        load = radial_direction_load(diamond_curve())
        assert np.allclose(load[:, 0], 8.0)
        assert np.array_equal(load[:, 1], np.zeros(4))


class TestAgainstDenseOracle:
    @pytest.mark.parametrize("J", [3, 4, 5, 8, 17])
    def test_random_curves(self, J, rng):
        for _ in range(25):
            pos = random_admissible_positions(rng, J)
            curve = PeriodicCurve(pos)
            scale = max(1.0, np.abs(pos).max() ** 3 / curve.spacing)
            mass = weighted_mass_matrix(curve).to_dense()
            assert np.allclose(mass, dense_mass(pos), rtol=0, atol=1e-12 * scale)
            stiff = weighted_stiffness_matrix(curve).to_dense()
            assert np.allclose(stiff, dense_stiffness(pos), rtol=0, atol=1e-12 * scale)
            load = radial_direction_load(curve)
            assert np.allclose(load, dense_radial_load(pos), rtol=0, atol=1e-12 * scale)

    def test_source_load_against_high_order_quadrature(self):
        f = manufactured_forcing()
        ours = source_load(f, 64, 0.0)
        ref = dense_source_load(f, 64, 0.0)
        assert np.abs(ours - ref).max() <= 1e-8 * np.abs(ref).max()

    def test_source_load_other_time(self):
        f = manufactured_forcing()
        ours = source_load(f, 48, 0.37)
        ref = dense_source_load(f, 48, 0.37)
        assert np.abs(ours - ref).max() <= 1e-8 * np.abs(ref).max()


class TestStructuralProperties:
    def test_stiffness_annihilates_constants(self, rng):
        for J in (3, 4, 16):
            curve = PeriodicCurve(random_admissible_positions(rng, J))
            k = weighted_stiffness_matrix(curve)
            ones = np.ones(J)
            assert np.abs(k.matvec(ones)).max() <= 1e-12 * k.inf_norm()

    def test_symmetric_band_storage(self, rng):
        curve = PeriodicCurve(random_admissible_positions(rng, 9))
        for m in (weighted_mass_matrix(curve), weighted_stiffness_matrix(curve)):
            assert np.allclose(np.roll(m.sub, -1), m.sup)
            dense = m.to_dense()
            assert np.allclose(dense, dense.T)

    def test_mass_total_is_weighted_curve_measure(self, rng):
        # summing all entries integrates r * |W_rho|^2 over the period
        curve = PeriodicCurve(random_admissible_positions(rng, 12))
        rl = np.roll(curve.r, 1)
        speed_sq = (curve.edge_lengths() / curve.spacing) ** 2
        expect = float((curve.spacing * speed_sq * 0.5 * (rl + curve.r)).sum())
        m = weighted_mass_matrix(curve)
        assert float(m.to_dense().sum()) == pytest.approx(expect, rel=1e-13)

    def test_cyclic_equivariance(self, rng):
        # relabeling the nodes by a rotation permutes rows and columns
        pos = random_admissible_positions(rng, 7)
        shift = 3
        rolled = PeriodicCurve(np.roll(pos, shift, axis=0))
        base = PeriodicCurve(pos)
        perm = np.roll(np.eye(7), shift, axis=0)
        for build in (weighted_mass_matrix, weighted_stiffness_matrix):
            expect = perm @ build(base).to_dense() @ perm.T
            assert np.allclose(build(rolled).to_dense(), expect, rtol=0, atol=1e-12)
        assert np.allclose(
            radial_direction_load(rolled), perm @ radial_direction_load(base)
        )

    def test_source_load_is_linear_in_field(self, rng):
        from torusflow import SourceField

        def f1(rho, t):
            return np.stack([np.cos(2 * np.pi * rho), np.sin(4 * np.pi * rho)], axis=-1)

        def f2(rho, t):
            return np.stack([rho * 0.0 + t, np.cos(6 * np.pi * rho)], axis=-1)

        combo = SourceField(lambda rho, t: 2.0 * f1(rho, t) - 3.0 * f2(rho, t))
        expect = 2.0 * source_load(SourceField(f1), 32, 0.5) - 3.0 * source_load(
            SourceField(f2), 32, 0.5
        )
        assert np.allclose(source_load(combo, 32, 0.5), expect, rtol=0, atol=1e-13)

    def test_rejects_inadmissible_weight(self):
        axis_cross = PeriodicCurve(np.array([[1.0, 0.0], [-0.5, 1.0], [1.0, 2.0]]))
        for build in (weighted_mass_matrix, weighted_stiffness_matrix, radial_direction_load):
            with pytest.raises(InadmissibleCurveError):
                build(axis_cross)
