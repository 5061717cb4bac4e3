import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcapacity.channels import (
    Channel,
    DimensionError,
    adjoint_map,
    apply,
    complementary,
    compose,
    cq_channel,
    cq_complementary_output,
    from_choi,
    from_stinespring,
    identity_channel,
    isometric_equivalence,
    kraus_from_isometry_mix,
    matrix_units,
    minimal_kraus,
    pinching,
    restrict_input,
    stinespring_output,
    to_choi,
    to_stinespring,
    truncate,
    truncated_pair,
)
from qcapacity.qcore import (
    InvalidOperatorError,
    entropy,
    partial_trace,
    random_density_matrix,
    random_pure_vector,
    random_unitary,
)
from qcapacity.structure import detect_cq


def random_channel(d_in, d_out, n_kraus, rng):
    """Random channel from a Haar-like isometry."""
    g = rng.standard_normal((d_out * n_kraus, d_in)) + 1j * rng.standard_normal((d_out * n_kraus, d_in))
    v, _ = np.linalg.qr(g)
    return Channel(v.reshape(n_kraus, d_out, d_in), name="random")


def random_cq(d_in, d_out, rng):
    sigmas = [random_density_matrix(d_out, rng) for _ in range(d_in)]
    return np.eye(d_in), sigmas, cq_channel(np.eye(d_in), sigmas)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
PLUS = np.full((2, 2), 0.5)
HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class TestChannel:
    def test_rejects_incomplete_kraus(self):
        with pytest.raises(InvalidOperatorError):
            Channel([np.diag([1.0, 0.5])])

    def test_operation_may_lose_trace(self):
        op = Channel([np.diag([1.0, 0.5])], trace_preserving=False)
        assert np.trace(apply(op, np.eye(2) / 2)).real == pytest.approx(0.625)

    def test_operation_cannot_increase_trace(self):
        with pytest.raises(InvalidOperatorError):
            Channel([np.diag([1.0, 1.5])], trace_preserving=False)

    def test_call_applies(self):
        c = pinching(np.eye(2))
        assert np.allclose(c(PLUS), np.eye(2) / 2)


class TestStinespring:
    def test_identity(self):
        iso = to_stinespring(identity_channel(2))
        assert iso.dim_env == 1
        assert np.allclose(iso.v, np.eye(2))

    def test_pinching_is_isometry(self):
        iso = to_stinespring(pinching(np.eye(2)))
        assert iso.v.shape == (4, 2)
        assert np.allclose(iso.v.conj().T @ iso.v, np.eye(2), atol=1e-12)

    def test_round_trip_on_matrix_units(self):
        c = random_channel(3, 3, 3, np.random.default_rng(0))
        iso = to_stinespring(c)
        for unit in matrix_units(3):
            assert np.abs(stinespring_output(iso, unit) - apply(c, unit)).max() <= 1e-10
        back = from_stinespring(iso.v, 3)
        for unit in matrix_units(3):
            assert np.abs(apply(back, unit) - apply(c, unit)).max() <= 1e-10


class TestChoi:
    def test_partial_trace_is_identity(self):
        c = random_channel(2, 3, 2, np.random.default_rng(1))
        choi = to_choi(c)
        assert np.allclose(partial_trace(choi.mat, (2, 3), keep=0), np.eye(2), atol=1e-10)

    def test_round_trip(self):
        c = random_channel(2, 2, 3, np.random.default_rng(2))
        back = from_choi(to_choi(c).mat, 2, 2)
        rho = random_density_matrix(2, np.random.default_rng(3))
        assert np.allclose(apply(back, rho), apply(c, rho), atol=1e-10)
        assert back.num_kraus <= 4


class TestComplementary:
    def test_identity_has_trivial_environment(self):
        comp = complementary(identity_channel(2))
        assert comp.dim_out == 1
        rho = random_density_matrix(2, np.random.default_rng(4))
        assert np.allclose(apply(comp, rho), [[1.0]])
        assert entropy(apply(comp, rho)) == 0.0

    def test_pinching_is_self_complementary(self):
        comp = complementary(pinching(np.eye(2)))
        rho = random_density_matrix(2, np.random.default_rng(5))
        assert np.allclose(apply(comp, rho), np.diag(np.diag(rho)), atol=1e-12)

    def test_dim_env_is_choi_rank(self):
        c = Channel([np.eye(2) / np.sqrt(2), np.eye(2) / np.sqrt(2)])
        assert complementary(c).dim_out == 1
        assert complementary(c, trim=False).dim_out == 2

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_pure_input_entropies_match(self, seed):
        rng = np.random.default_rng(seed)
        c = random_channel(2, 3, 2, rng)
        v = random_pure_vector(2, rng)
        psi = np.outer(v, v.conj())
        assert entropy(apply(c, psi)) == pytest.approx(entropy(apply(complementary(c), psi)), abs=1e-9)

    @pytest.mark.parametrize("d_in, d_out", [(2, 2), (2, 3), (3, 2)])
    def test_cq_closed_form(self, d_in, d_out):
        rng = np.random.default_rng(10 * d_in + d_out)
        basis, sigmas, c = random_cq(d_in, d_out, rng)
        comp = complementary(c, trim=False)
        for _ in range(3):
            rho = random_density_matrix(d_in, rng)
            assert np.abs(apply(comp, rho) - cq_complementary_output(basis, sigmas, rho)).max() <= 1e-10

    def test_double_complementary_equivalent(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            c = random_channel(2, 2, 3, rng)
            result = isometric_equivalence(c, complementary(complementary(c)), tol=1e-7)
            assert result.accepted, result.residual


class TestAdjoint:
    def test_unital_dual(self):
        c = random_channel(3, 2, 2, np.random.default_rng(7))
        assert np.allclose(adjoint_map(c, np.eye(2)), np.eye(3), atol=1e-12)

    def test_pinching_kills_coherence(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        assert np.allclose(adjoint_map(pinching(np.eye(2)), x), 0)

    def test_identity(self):
        x = random_density_matrix(2, np.random.default_rng(8))
        assert np.allclose(adjoint_map(identity_channel(2), x), x)

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_duality(self, seed):
        rng = np.random.default_rng(seed)
        c = random_channel(2, 3, 3, rng)
        rho = random_density_matrix(2, rng)
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        x = x + x.conj().T
        lhs = np.trace(apply(c, rho) @ x)
        rhs = np.trace(rho @ adjoint_map(c, x))
        assert abs(lhs - rhs) <= 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            adjoint_map(identity_channel(2), np.eye(3))


class TestCompose:
    def test_with_identity(self):
        c = random_channel(2, 3, 2, np.random.default_rng(9))
        both = compose(c, identity_channel(2))
        for unit in matrix_units(2):
            assert np.allclose(apply(both, unit), apply(c, unit))

    def test_pinching_idempotent(self):
        p = pinching(np.eye(3))
        pp = compose(p, p)
        for unit in matrix_units(3):
            assert np.allclose(apply(pp, unit), apply(p, unit))

    def test_cq_absorbs_pinching(self):
        basis, _, c = random_cq(3, 2, np.random.default_rng(10))
        both = compose(c, pinching(basis))
        for unit in matrix_units(3):
            assert np.abs(apply(both, unit) - apply(c, unit)).max() <= 1e-10

    def test_sequential(self):
        rng = np.random.default_rng(11)
        a, b = random_channel(2, 3, 2, rng), random_channel(3, 2, 2, rng)
        rho = random_density_matrix(2, rng)
        assert np.allclose(apply(compose(b, a), rho), apply(b, apply(a, rho)), atol=1e-10)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            compose(identity_channel(2), identity_channel(3))


class TestPinching:
    def test_fixed_maximally_mixed(self):
        assert np.allclose(pinching(np.eye(2))(np.eye(2) / 2), np.eye(2) / 2)

    def test_plus_state_dephased(self):
        assert np.allclose(pinching(np.eye(2))(PLUS), np.eye(2) / 2)

    def test_hadamard_basis_fixed_point(self):
        assert np.allclose(pinching(HADAMARD)(PLUS), PLUS)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(InvalidOperatorError):
            pinching(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestTruncate:
    def test_identity_projector(self):
        c = random_channel(2, 2, 2, np.random.default_rng(12))
        t = truncate(c, np.eye(2))
        assert t.trace_preserving
        assert np.allclose(t.kraus, c.kraus)

    def test_zero_projector(self):
        c = random_channel(2, 2, 2, np.random.default_rng(13))
        t = truncate(c, np.zeros((2, 2)))
        assert not t.trace_preserving
        assert np.allclose(t(np.eye(2) / 2), 0)

    def test_not_a_projector(self):
        with pytest.raises(InvalidOperatorError):
            truncate(identity_channel(2), np.diag([1.0, 0.5]))

    def test_complement_dominated(self):
        rng = np.random.default_rng(14)
        for _ in range(5):
            c = random_channel(3, 3, 2, rng)
            u = random_unitary(3, rng)
            p = u[:, :2] @ u[:, :2].conj().T
            trunc, comp, comp_n = truncated_pair(c, p)
            rho = random_density_matrix(3, rng)
            assert 0 <= np.trace(trunc(rho)).real <= 1 + 1e-12
            gap = apply(comp, rho) - apply(comp_n, rho)
            assert np.linalg.eigvalsh(gap).min() >= -1e-10


class TestRestrict:
    def test_full_space(self):
        c = random_channel(2, 2, 2, np.random.default_rng(15))
        r = restrict_input(c, np.eye(2))
        assert np.allclose(r.kraus, c.kraus)

    def test_one_dimensional_is_constant(self):
        c = random_channel(2, 2, 2, np.random.default_rng(16))
        r = restrict_input(c, np.array([[1.0], [0.0]]))
        assert r.dim_in == 1
        assert np.allclose(r(np.array([[1.0]])), c(np.diag([1.0, 0.0])))

    def test_cq_restriction_stays_cq(self):
        _, _, c = random_cq(3, 3, np.random.default_rng(17))
        r = restrict_input(c, np.eye(3)[:, :2])
        assert detect_cq(r) is not None

    def test_rank_deficient(self):
        with pytest.raises(InvalidOperatorError):
            restrict_input(identity_channel(2), np.array([[1.0, 1.0], [0.0, 0.0]]))


class TestEquivalence:
    def test_self(self):
        c = random_channel(2, 2, 2, np.random.default_rng(18))
        result = isometric_equivalence(c, c)
        assert result.accepted
        assert np.allclose(result.w.conj().T @ result.w, np.eye(2), atol=1e-8)

    def test_complements_of_two_decompositions(self):
        rng = np.random.default_rng(19)
        c = random_channel(2, 2, 3, rng)
        u = random_unitary(5, rng)[:, :3]
        other = kraus_from_isometry_mix(c, u)
        result = isometric_equivalence(complementary(c, trim=False), complementary(other, trim=False))
        assert result.accepted, result.residual

    def test_identity_complement_vs_pinching(self):
        # inputs must match: use the 2-dim trivial environment padded by a zero row
        comp = complementary(identity_channel(2))
        padded = Channel(np.concatenate([comp.kraus, np.zeros_like(comp.kraus)], axis=1))
        assert not isometric_equivalence(padded, pinching(np.eye(2))).accepted

    def test_minimal_kraus_same_channel(self):
        c = Channel([np.eye(2) / np.sqrt(2)] * 2)
        ops = minimal_kraus(c)
        assert len(ops) == 1
        assert isometric_equivalence(Channel(ops), c).accepted
