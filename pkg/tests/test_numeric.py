import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trisect.errors import InvalidInput
from trisect.numeric import (numerical_rank, nearest_lattice_vector,
                             projective_angle, quadrature_nodes)

TAU2 = np.array([[1.0j, 0.3 + 0.1j], [0.3 + 0.1j, 0.2 + 1.5j]])


class TestNumericalRank:

    def test_exact_rank_deficiency(self):
        v = np.array([1.0, 2.0, 3.0 + 1.0j])
        m = np.stack([v, 2.0 * v, np.array([0.0, 1.0, 0.0])])
        cert = numerical_rank(m)
        assert cert.decided_rank == 2
        assert cert.gap_ratio < 1e-12
        assert not cert.full_rank

    def test_full_rank_identity(self):
        cert = numerical_rank(np.eye(4))
        assert cert.decided_rank == 4
        assert cert.full_rank
        assert cert.gap_ratio == 0.0

    def test_spectrum_is_returned_sorted(self):
        m = np.diag([3.0, 1.0, 2.0])
        cert = numerical_rank(m)
        assert np.all(np.diff(cert.singular_values) <= 0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidInput):
            numerical_rank(np.zeros((0, 3)))
        with pytest.raises(InvalidInput):
            numerical_rank(np.array([[np.nan, 1.0]]))
        with pytest.raises(InvalidInput):
            numerical_rank(np.eye(2), tol=2.0)

    @given(st.integers(0, 3), st.integers(1, 4))
    @settings(max_examples=25, deadline=None)
    def test_constructed_rank_recovered(self, rank, extra):
        rng = np.random.default_rng(rank * 10 + extra)
        n = rank + extra
        basis = rng.standard_normal((rank, n)) \
            + 1j * rng.standard_normal((rank, n))
        coeffs = rng.standard_normal((n, rank))
        m = coeffs @ basis if rank else np.zeros((n, n), dtype=complex)
        assert numerical_rank(m).decided_rank == rank

    def test_to_dict_roundtrips_floats(self):
        d = numerical_rank(np.eye(2)).to_dict()
        assert d["decided_rank"] == 2
        assert isinstance(d["singular_values"][0], float)


class TestLatticeReduction:

    @given(st.integers(-3, 3), st.integers(-3, 3),
           st.integers(-3, 3), st.integers(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_recovers_planted_lattice_vector(self, m1, m2, n1, n2):
        m = np.array([m1, m2], dtype=float)
        n = np.array([n1, n2], dtype=float)
        small = np.array([0.05 + 0.02j, -0.03 + 0.04j])
        z = small + m + TAU2 @ n
        red = nearest_lattice_vector(z, TAU2)
        assert np.allclose(red.residual, small, atol=1e-12)
        assert red.residual_norm < 0.1

    def test_idempotent(self):
        z = np.array([0.9 + 1.3j, -2.0 + 0.4j])
        first = nearest_lattice_vector(z, TAU2)
        second = nearest_lattice_vector(first.residual, TAU2)
        assert second.residual_norm <= first.residual_norm + 1e-14
        assert np.allclose(second.residual, first.residual, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            nearest_lattice_vector(np.zeros(3), TAU2)


class TestProjectiveAngle:

    def test_proportional_vectors(self):
        v = np.array([1.0 + 2.0j, -0.5j, 3.0])
        assert projective_angle(v, (2.0 - 1.0j) * v) < 1e-12

    def test_orthogonal_vectors(self):
        assert projective_angle([1, 0], [0, 1]) == pytest.approx(np.pi / 2)

    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidInput):
            projective_angle([0, 0], [1, 0])

    @given(st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_symmetry_and_range(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        a = projective_angle(v, w)
        assert abs(a - projective_angle(w, v)) < 1e-12
        assert 0.0 <= a <= np.pi / 2 + 1e-12


class TestQuadratureNodes:

    def test_inverse_sqrt_weight_integrals(self):
        nodes, weights = quadrature_nodes(40)
        # int (1-t^2)^(-1/2) dt = pi; with t^2 in the numerator: pi/2
        assert np.sum(weights) == pytest.approx(np.pi, abs=1e-12)
        assert np.sum(weights * nodes ** 2) == pytest.approx(np.pi / 2,
                                                             abs=1e-12)
        assert np.sum(weights * nodes ** 4) == pytest.approx(3 * np.pi / 8,
                                                             abs=1e-12)

    def test_too_few_nodes(self):
        with pytest.raises(InvalidInput):
            quadrature_nodes(1)
