import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from trisect.errors import InvalidInput
from trisect.theta import (RiemannMatrix, HalfCharacteristic, theta,
                           theta_batch, theta_gradient, theta_hessian,
                           second_order_theta, second_order_basis,
                           all_epsilons, eps_from_index, index_from_eps)

TAU1 = np.array([[1.0j]])
TAU2 = np.array([[1.0j, 0.3 + 0.1j], [0.3 + 0.1j, 0.2 + 1.5j]])
TAU3 = np.array([[1.2j, 0.2 + 0.1j, -0.1],
                 [0.2 + 0.1j, 1.5j, 0.3 + 0.2j],
                 [-0.1, 0.3 + 0.2j, 0.1 + 1.8j]])


def brute_theta(tau, z, a=None, b=None, box=12):
    """Independent oracle: direct box sum over the integer lattice."""
    tau = np.asarray(tau, dtype=complex)
    z = np.asarray(z, dtype=complex)
    g = len(z)
    a = np.zeros(g) if a is None else np.asarray(a, dtype=float)
    b = np.zeros(g) if b is None else np.asarray(b, dtype=float)
    ranges = [np.arange(-box, box + 1)] * g
    grids = np.meshgrid(*ranges, indexing="ij")
    n = np.stack([grid.ravel() for grid in grids], axis=1) + a
    expo = (1j * np.pi * np.einsum("tg,gh,th->t", n, tau, n)
            + 2j * np.pi * n @ (z + b))
    return complex(np.sum(np.exp(expo)))


class TestAgainstBruteForce:

    @pytest.mark.parametrize("tau", [TAU1, TAU2, TAU3],
                             ids=["g1", "g2", "g3"])
    def test_value_matches_box_sum(self, tau):
        rng = np.random.default_rng(len(tau))
        z = rng.standard_normal(len(tau)) * 0.4 \
            + 0.2j * rng.standard_normal(len(tau))
        expected = brute_theta(tau, z)
        got = theta(tau, z, tol=1e-12)
        assert abs(got.value - expected) < 1e-11 * max(abs(expected), 1.0)

    def test_characteristics_match_box_sum(self):
        rng = np.random.default_rng(7)
        z = rng.standard_normal(2) * 0.3 + 0.2j * rng.standard_normal(2)
        for eps_p in all_epsilons(2):
            for eps_pp in all_epsilons(2):
                char = HalfCharacteristic(eps_p, eps_pp)
                expected = brute_theta(TAU2, z, a=char.a, b=char.b)
                got = theta(TAU2, z, char=char, tol=1e-12)
                assert abs(got.value - expected) < 1e-10

    def test_known_value_lemniscatic(self):
        # theta(0; tau=i) = pi^(1/4) / Gamma(3/4)
        expected = np.pi ** 0.25 / gamma_fn(0.75)
        got = theta(TAU1, [0.0], tol=1e-13)
        assert got.value == pytest.approx(expected, abs=1e-12)

    def test_far_argument_reduced_exactly(self):
        z = np.array([0.13 + 0.07j, -0.2 + 0.11j])
        m = np.array([2.0, -3.0])
        p = np.array([1.0, 2.0])
        shift = m + TAU2 @ p
        direct = theta(TAU2, z + shift, tol=1e-12).value
        factor = np.exp(-1j * np.pi * (p @ TAU2 @ p) - 2j * np.pi * (p @ z))
        base = theta(TAU2, z, tol=1e-12).value
        assert abs(direct - factor * base) < 1e-12 * abs(factor * base)


class TestParityAndIdentities:

    @pytest.mark.parametrize("tau", [TAU2, TAU3], ids=["g2", "g3"])
    def test_all_characteristic_parities(self, tau):
        g = len(tau)
        rng = np.random.default_rng(g)
        z = rng.standard_normal(g) * 0.3 + 0.2j * rng.standard_normal(g)
        origin = np.zeros(g)
        for eps_p in all_epsilons(g):
            for eps_pp in all_epsilons(g):
                char = HalfCharacteristic(eps_p, eps_pp)
                vp, _, _ = theta_batch(tau, z, char=char)
                vm, _, _ = theta_batch(tau, -z, char=char)
                sign = (-1.0) ** char.parity
                assert abs(vm - sign * vp) < 1e-9 * max(abs(vp), 1e-6)
                if char.parity == 1:
                    v0, _, _ = theta_batch(tau, origin, char=char)
                    assert abs(v0) < 1e-10

    def test_addition_formula(self):
        rng = np.random.default_rng(11)
        rm = RiemannMatrix(TAU3)
        Z = rng.standard_normal((30, 3)) + 0.2j * rng.standard_normal((30, 3))
        W = rng.standard_normal((30, 3)) + 0.2j * rng.standard_normal((30, 3))
        lhs = np.einsum("ne,ne->n", second_order_basis(rm, Z),
                        second_order_basis(rm, W))
        tp, _, _ = theta_batch(rm, Z + W)
        tm, _, _ = theta_batch(rm, Z - W)
        assert np.max(np.abs(lhs - tp * tm) / np.abs(tp * tm)) < 1e-9

    def test_second_order_basis_matches_delegation(self):
        rng = np.random.default_rng(3)
        z = rng.standard_normal(2) * 0.3 + 0.2j * rng.standard_normal(2)
        basis = second_order_basis(TAU2, z)
        for idx, eps in enumerate(all_epsilons(2)):
            assert abs(basis[idx] - second_order_theta(TAU2, z, eps)) < 1e-10


class TestDerivatives:

    def test_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(5)
        h = 1e-5
        for _ in range(5):
            z = rng.standard_normal(2) * 0.4 + 0.2j * rng.standard_normal(2)
            grad = theta_gradient(TAU2, z)
            for i in range(2):
                e = np.zeros(2)
                e[i] = h
                fd = (theta(TAU2, z + e).value
                      - theta(TAU2, z - e).value) / (2 * h)
                assert abs(fd - grad[i]) < 1e-8 * max(abs(grad[i]), 1.0)

    def test_hessian_vs_gradient_differences(self):
        rng = np.random.default_rng(6)
        h = 1e-5
        z = rng.standard_normal(2) * 0.4 + 0.2j * rng.standard_normal(2)
        hess = theta_hessian(TAU2, z)
        assert np.allclose(hess, hess.T)
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (theta_gradient(TAU2, z + e)
                  - theta_gradient(TAU2, z - e)) / (2 * h)
            assert np.max(np.abs(fd - hess[i])) \
                < 1e-7 * max(np.max(np.abs(hess[i])), 1.0)

    def test_gradient_at_far_argument(self):
        # derivative picks up the extra prefactor term under reduction
        z = np.array([0.1 + 0.05j, 0.2 - 0.1j])
        p = np.array([0.0, 1.0])
        shift = TAU2 @ p
        h = 1e-6
        grad = theta_gradient(TAU2, z + shift)
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (theta(TAU2, z + shift + e).value
                  - theta(TAU2, z + shift - e).value) / (2 * h)
            assert abs(fd - grad[i]) < 1e-6 * max(abs(grad[i]), 1.0)


class TestErrorControl:

    def test_tail_bound_is_honest(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            z = rng.standard_normal(3) * 0.5 + 0.3j * rng.standard_normal(3)
            loose = theta(TAU3, z, tol=1e-6)
            tight = theta(TAU3, z, tol=1e-13)
            assert abs(loose.value - tight.value) <= loose.bound_on_tail \
                + 1e-13 * abs(tight.value)
            assert loose.bound_on_tail < 1e-6

    def test_tolerance_validation(self):
        with pytest.raises(InvalidInput):
            theta(TAU2, [0.0, 0.0], tol=1e-20)
        with pytest.raises(InvalidInput):
            theta(TAU2, [0.0, 0.0], tol=0.5)

    def test_riemann_matrix_validation(self):
        with pytest.raises(InvalidInput):
            RiemannMatrix(np.array([[1.0j, 0.5], [0.2, 1.0j]]))
        with pytest.raises(InvalidInput):
            RiemannMatrix(np.array([[-1.0j]]))
        with pytest.raises(InvalidInput):
            theta(TAU2, [0.0, 0.0, 0.0])


class TestCharacteristicIndexing:

    def test_lexicographic_order(self):
        assert all_epsilons(2) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_index_roundtrip(self):
        for g in (1, 2, 3, 4):
            for idx in range(2 ** g):
                assert index_from_eps(eps_from_index(idx, g)) == idx

    def test_characteristic_validation(self):
        with pytest.raises(InvalidInput):
            HalfCharacteristic((0, 2), (0, 0))
        with pytest.raises(InvalidInput):
            HalfCharacteristic((0, 1), (0,))
