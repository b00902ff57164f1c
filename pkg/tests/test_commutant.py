import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisecomm.channels import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    build_phase_damping,
    build_zz_damping,
    collective_operator,
    new_channel,
)
from noisecomm.commutant import (
    algebra_basis,
    commutant_basis,
    commutator_map,
    fixed_point_basis,
    hermitian_spanning_set,
)
from noisecomm.errors import DimensionMismatchError, EmptyInputError, NotSelfAdjointSpanError
from noisecomm.linalg import is_hermitian, orthonormalize_span, span_distance, unvec, vec
from oracles import direct_commutant_dim, word_span_dim
from reference_matrices import COLLECTIVE3_EXTRA, COLLECTIVE3_GENERATOR

from conftest import builder_channels, collective, ket, random_unitary


def random_mixed_unitary(d: int, k: int, seed: int):
    rng = np.random.default_rng(seed)
    return new_channel([random_unitary(d, rng) / np.sqrt(k) for _ in range(k)])


class TestCommutatorMap:
    def test_vectorized_commutator(self, rng):
        a, b = rng.standard_normal((2, 3, 3))
        assert np.allclose(commutator_map(a) @ vec(b), vec(a @ b - b @ a))


class TestCommutantBasis:
    def test_diagonal(self):
        span = commutant_basis([PAULI_Z])
        assert len(span) == 2
        assert all(abs(b[0, 1]) < 1e-12 and abs(b[1, 0]) < 1e-12 for b in span)

    def test_irreducible_pair(self):
        assert len(commutant_basis([PAULI_X, PAULI_Z])) == 1

    def test_correlated_dephasing_pattern(self):
        span = commutant_basis(list(build_zz_damping(0.3).kraus))
        assert len(span) == 8
        free = np.zeros((4, 4), dtype=bool)
        for i, j in [(0, 0), (0, 3), (3, 0), (3, 3), (1, 1), (1, 2), (2, 1), (2, 2)]:
            free[i, j] = True
        for b in span:
            assert np.abs(b[~free]).max() < 1e-12
        # every free entry is reachable
        for i, j in zip(*np.nonzero(free)):
            e = np.zeros((4, 4))
            e[i, j] = 1
            assert span.residual(e) < 1e-12

    def test_identity_first(self):
        span = commutant_basis(list(collective(3).kraus))
        assert np.allclose(span.basis[0], np.eye(8) / np.sqrt(8))
        assert np.allclose(span.gram(), np.eye(len(span)))

    def test_reference_generators_lie_in_commutant(self):
        span = commutant_basis(list(collective(3).kraus))
        assert len(span) == 5
        ref = orthonormalize_span([COLLECTIVE3_GENERATOR, *COLLECTIVE3_EXTRA])
        assert span_distance(span, ref) < 1e-8

    def test_scalar_generators(self):
        assert len(commutant_basis([np.eye(3), 2 * np.eye(3)])) == 9

    def test_errors(self):
        with pytest.raises(EmptyInputError):
            commutant_basis([])
        with pytest.raises(DimensionMismatchError):
            commutant_basis([np.eye(2), np.eye(3)])

    @pytest.mark.parametrize("ch", builder_channels(), ids=lambda c: c.name)
    def test_matches_direct_solve(self, ch):
        assert len(commutant_basis(list(ch.kraus))) == direct_commutant_dim(list(ch.kraus))

    @given(st.integers(0, 2**31 - 1), st.integers(2, 5), st.integers(1, 4))
    @settings(max_examples=25, deadline=None)
    def test_random_operators(self, seed, d, k):
        rng = np.random.default_rng(seed)
        ops = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(k)]
        span = commutant_basis(ops)
        assert len(span) == direct_commutant_dim(ops)
        for b in span:
            for a in ops:
                assert np.linalg.norm(a @ b - b @ a) < 1e-8 * max(1, np.linalg.norm(a))


class TestFixedPoints:
    def test_identity_channel(self):
        assert len(fixed_point_basis(new_channel([np.eye(3)]))) == 9

    def test_phase_damping(self):
        assert len(fixed_point_basis(build_phase_damping(0.25))) == 2

    def test_three_qubit_collective(self):
        assert len(fixed_point_basis(collective(3))) == 5

    @pytest.mark.parametrize("ch", builder_channels(), ids=lambda c: c.name)
    def test_equal_to_commutant(self, ch):
        assert span_distance(fixed_point_basis(ch), commutant_basis(list(ch.kraus))) <= 1e-8

    @given(st.integers(0, 2**31 - 1), st.integers(2, 6), st.integers(2, 4))
    @settings(max_examples=20, deadline=None)
    def test_equal_to_commutant_random(self, seed, d, k):
        ch = random_mixed_unitary(d, k, seed)
        assert span_distance(fixed_point_basis(ch), commutant_basis(list(ch.kraus))) <= 1e-8

    def test_non_unital_channel_differs(self):
        # amplitude damping: only scalars commute, but the fixed state is |0><0|
        ch = new_channel([np.diag([1.0, np.sqrt(0.5)]), np.array([[0.0, np.sqrt(0.5)], [0.0, 0.0]])])
        fix = fixed_point_basis(ch)
        assert len(fix) == 1 and fix.residual(np.diag([1, 0])) < 1e-10
        assert len(commutant_basis(list(ch.kraus))) == 1
        assert span_distance(fix, commutant_basis(list(ch.kraus))) > 0.1


class TestAlgebra:
    def test_diagonal(self):
        assert len(algebra_basis([PAULI_Z])) == 2

    def test_identity(self):
        assert len(algebra_basis([np.eye(3)])) == 1

    @pytest.mark.parametrize("n,expected", [(1, 4), (2, 10), (3, 20), (4, 35)])
    def test_collective_against_word_span(self, n, expected):
        ops = list(collective(n).kraus)
        assert len(algebra_basis(ops)) == expected == word_span_dim(ops)

    @pytest.mark.parametrize("ch", builder_channels()[:3], ids=lambda c: c.name)
    def test_builders_against_word_span(self, ch):
        assert len(algebra_basis(list(ch.kraus))) == word_span_dim(list(ch.kraus))


class TestHermitianSpanningSet:
    def test_already_hermitian(self):
        herm = hermitian_spanning_set(orthonormalize_span([PAULI_I, PAULI_Z]))
        assert len(herm) == 2
        assert span_distance(orthonormalize_span(herm), orthonormalize_span([PAULI_I, PAULI_Z])) < 1e-12

    def test_reference_generators(self):
        span = orthonormalize_span([COLLECTIVE3_GENERATOR, *COLLECTIVE3_EXTRA])
        herm = hermitian_spanning_set(span)
        assert len(herm) == 5
        assert all(is_hermitian(h) for h in herm)

    def test_off_diagonal_units(self):
        span = orthonormalize_span([PAULI_I, np.outer(ket("0"), ket("1")), np.outer(ket("1"), ket("0"))])
        herm = hermitian_spanning_set(span)
        assert len(herm) == 3
        assert span_distance(orthonormalize_span(herm), orthonormalize_span([PAULI_I, PAULI_X, PAULI_Y])) < 1e-12

    def test_not_self_adjoint(self):
        with pytest.raises(NotSelfAdjointSpanError):
            hermitian_spanning_set(orthonormalize_span([np.outer(ket("0"), ket("1"))]))

    @pytest.mark.parametrize("ch", builder_channels(), ids=lambda c: c.name)
    def test_real_dimension_equals_complex_dimension(self, ch):
        span = commutant_basis(list(ch.kraus))
        herm = hermitian_spanning_set(span)
        assert len(herm) == len(span)
        assert all(is_hermitian(h) for h in herm)
        assert span_distance(orthonormalize_span(herm), span) < 1e-8


def test_commutant_of_generators_equals_commutant_of_exponentials():
    # unitize keeps {T_k}' because exp(i.) is injective on these spectra
    for n in (3, 4):
        ops = [collective_operator(s, n) for s in (PAULI_X, PAULI_Y, PAULI_Z)]
        assert span_distance(commutant_basis(ops), commutant_basis(list(collective(n).kraus))) < 1e-8


def test_scalar_kraus_operators_fix_everything():
    ch = new_channel([np.exp(0.3j) * np.eye(3) / np.sqrt(2), np.exp(-1.1j) * np.eye(3) / np.sqrt(2)])
    assert len(fixed_point_basis(ch)) == 9 == len(commutant_basis(list(ch.kraus)))
