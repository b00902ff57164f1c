import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisecomm.channels import apply, build_phase_damping, build_zz_damping, new_channel
from noisecomm.errors import DimensionMismatchError, ParameterError
from noisecomm.linalg import DEFAULT_TOL, range_projection
from noisecomm.structure import analyze
from noisecomm.verify import (
    DensityMatrix,
    NoiselessComponent,
    SupportLeakageError,
    decode,
    encode,
    noiseless_components,
    planted_channel,
    random_density_matrix,
    trace_distance,
    verify_noiseless,
    verify_structure,
)
from reference_matrices import SINGLET_TRIPLET

from conftest import builder_channels, collective, collective_structure, random_unitary


def usable(structure):
    return [nc for nc in noiseless_components(structure) if nc.usable]


class TestDensityMatrix:
    def test_pure(self):
        rho = DensityMatrix.pure([1, 1j])
        assert np.allclose(rho.matrix, [[0.5, -0.5j], [0.5j, 0.5]])

    def test_maximally_mixed(self):
        assert np.allclose(DensityMatrix.maximally_mixed(3).matrix, np.eye(3) / 3)

    @pytest.mark.parametrize(
        "m", [np.eye(2), np.diag([1.5, -0.5]), np.array([[0.5, 1], [0, 0.5]]), np.ones((2, 3)) / 2]
    )
    def test_invalid(self, m):
        with pytest.raises(ValueError):
            DensityMatrix(m)

    @given(st.integers(0, 2**31 - 1), st.integers(1, 6))
    def test_random_states_valid(self, seed, d):
        rho = random_density_matrix(d, np.random.default_rng(seed))
        assert np.isclose(np.trace(rho.matrix).real, 1)
        assert np.linalg.eigvalsh(rho.matrix).min() > -1e-12


class TestTraceDistance:
    def test_orthogonal_pure_states(self):
        assert trace_distance(DensityMatrix.pure([1, 0]), DensityMatrix.pure([0, 1])) == pytest.approx(1)

    def test_identical(self):
        rho = DensityMatrix.maximally_mixed(2)
        assert trace_distance(rho, rho) == 0

    @given(st.integers(0, 2**31 - 1))
    def test_metric_bounds(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_density_matrix(3, rng), random_density_matrix(3, rng)
        d = trace_distance(a, b)
        assert 0 <= d <= 1 + 1e-12
        assert d == pytest.approx(trace_distance(b, a))


class TestNoiselessComponents:
    def test_three_qubit(self):
        comps = usable(collective_structure(3))
        assert [(c.logical_dim, c.cofactor_dim) for c in comps] == [(2, 2)]
        assert comps[0].kind == "subsystem"

    def test_four_qubit(self):
        comps = usable(collective_structure(4))
        assert sorted((c.logical_dim, c.cofactor_dim, c.kind) for c in comps) == [
            (2, 1, "subspace"),
            (3, 3, "subsystem"),
        ]

    def test_scalar_commutant(self):
        assert usable(collective_structure(1)) == []

    def test_all_components_listed(self):
        s = collective_structure(3)
        assert len(noiseless_components(s)) == len(s.components)

    def test_isometries(self):
        for nc in noiseless_components(collective_structure(4)):
            v = nc.isometry
            assert v.shape == (16, nc.logical_dim * nc.cofactor_dim)
            assert np.allclose(v.conj().T @ v, np.eye(v.shape[1]))


class TestEncodeDecode:
    def test_maximally_mixed(self):
        nc = usable(collective_structure(3))[0]
        rho = encode(nc, DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(2))
        v = nc.isometry
        assert np.allclose(rho.matrix, v @ v.conj().T / 4)
        assert np.allclose(decode(nc, rho).matrix, np.eye(2) / 2)

    def test_pure_inputs_give_pure_output(self):
        nc = usable(collective_structure(3))[0]
        rho = encode(nc, DensityMatrix.pure([1, 0]), DensityMatrix.pure([0.6, 0.8j]))
        assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) == 1

    def test_support_in_singlet_triplet_plane(self):
        nc = usable(collective_structure(3))[0]
        rho = encode(nc, DensityMatrix.pure([1, 0]), DensityMatrix.pure([1, 0])).matrix
        p = range_projection(SINGLET_TRIPLET)
        assert np.linalg.norm(p @ rho @ p - rho) < 1e-10

    def test_dimension_mismatch(self):
        nc = usable(collective_structure(3))[0]
        with pytest.raises(DimensionMismatchError):
            encode(nc, DensityMatrix.maximally_mixed(3), DensityMatrix.maximally_mixed(2))
        with pytest.raises(DimensionMismatchError):
            decode(nc, DensityMatrix.maximally_mixed(4))

    def test_leakage(self):
        nc = usable(collective_structure(3))[0]
        with pytest.raises(SupportLeakageError):
            decode(nc, DensityMatrix.maximally_mixed(8))

    @pytest.mark.parametrize("ch", builder_channels(), ids=lambda c: c.name)
    def test_round_trip_without_noise(self, ch):
        s = analyze(ch)
        rng = np.random.default_rng(7)
        for nc in noiseless_components(s):
            anc = random_density_matrix(nc.cofactor_dim, rng)
            sigma = random_density_matrix(nc.logical_dim, rng)
            out = decode(nc, encode(nc, anc, sigma))
            assert trace_distance(out, sigma) <= 10 * DEFAULT_TOL.eps_zero

    def test_one_application(self):
        ch = collective(3)
        nc = usable(collective_structure(3))[0]
        rng = np.random.default_rng(3)
        sigma = random_density_matrix(2, rng)
        rho = encode(nc, random_density_matrix(2, rng), sigma)
        assert trace_distance(decode(nc, apply(ch, rho.matrix)), sigma) <= 1e-9


class TestVerifyNoiseless:
    @pytest.mark.parametrize("n", [3, 4])
    def test_collective(self, n):
        for nc in usable(collective_structure(n)):
            rep = verify_noiseless(collective(n), nc, trials=50, repetitions=5)
            assert rep.passed and rep.max_trace_distance <= 1e-9

    def test_identity_channel(self):
        ch = new_channel([np.eye(3)])
        s = analyze(ch)
        for nc in usable(s):
            assert verify_noiseless(ch, nc, trials=5, repetitions=2).max_trace_distance < 1e-12

    def test_corrupted_isometry(self):
        ch = collective(3)
        nc = usable(collective_structure(3))[0]
        w = random_unitary(8, np.random.default_rng(11))
        bad = NoiselessComponent(nc.component_index, nc.logical_dim, nc.cofactor_dim, w[:, :4])
        rep = verify_noiseless(ch, bad, trials=10, repetitions=5)
        assert rep.max_trace_distance > 0.01 and not rep.passed

    def test_deterministic(self):
        ch = collective(3)
        nc = usable(collective_structure(3))[0]
        a = verify_noiseless(ch, nc, trials=5, repetitions=1)
        b = verify_noiseless(ch, nc, trials=5, repetitions=1)
        assert a == b

    def test_bad_counts(self):
        nc = usable(collective_structure(3))[0]
        with pytest.raises(ParameterError):
            verify_noiseless(collective(3), nc, trials=0)


class TestVerifyStructure:
    @pytest.mark.parametrize("ch", builder_channels(), ids=lambda c: c.name)
    def test_builders_pass(self, ch):
        diags = verify_structure(ch, analyze(ch))
        assert all(d.passed for d in diags), [d for d in diags if not d.passed]

    def test_names(self):
        names = [d.name for d in verify_structure(collective(3), collective_structure(3))]
        for required in ("sum_nm_equals_dim", "commutant_dim", "fixed_points_equal_commutant",
                         "central_projections_commute", "block_diagonal", "matrix_unit_relations"):
            assert required in names

    def test_structure_from_another_channel(self):
        ch = collective(3)
        u = random_unitary(8, np.random.default_rng(5))
        other = new_channel([u @ k @ u.conj().T for k in ch.kraus])
        diags = {d.name: d for d in verify_structure(other, collective_structure(3))}
        assert not diags["central_projections_commute"].passed
        assert not diags["block_diagonal"].passed

    def test_dimension_mismatch(self):
        diags = verify_structure(build_zz_damping(0.3), analyze(build_phase_damping(0.2)))
        assert not all(d.passed for d in diags)

    def test_scalar_commutant(self):
        diags = verify_structure(collective(1), collective_structure(1))
        assert all(d.passed for d in diags)


class TestPlanted:
    def test_recovers_pattern(self):
        ch, expected = planted_channel([(2, 2), (4, 1)], seed=3)
        assert expected == [(4, 1), (2, 2)]
        assert ch.is_unital_channel
        assert analyze(ch).pattern == expected

    def test_dimension_one(self):
        ch, expected = planted_channel([(1, 1)])
        assert ch.dim == 1 and expected == [(1, 1)]
        assert analyze(ch).pattern == [(1, 1)]

    def test_irreducible(self):
        ch, _ = planted_channel([(5, 1)], seed=1)
        s = analyze(ch)
        assert s.commutant_dim == 1

    @pytest.mark.parametrize("pattern", [[(1, 2)], [(2, 2), (4, 1)], [(1, 2), (3, 3), (5, 1)], [(2, 1), (1, 3)]])
    def test_listed_patterns(self, pattern):
        ch, expected = planted_channel(pattern, seed=0)
        assert analyze(ch).pattern == expected

    @pytest.mark.parametrize(
        "pattern,generators", [([], 3), ([(0, 1)], 3), ([(2, -1)], 3), ([(9, 8)], 3), ([(2, 1)], 2)]
    )
    def test_invalid(self, pattern, generators):
        with pytest.raises(ParameterError):
            planted_channel(pattern, generators=generators)
