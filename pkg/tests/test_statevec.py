import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ket
from stochgate.errors import CapacityError, ConsistencyError, ValidationError
from stochgate.protocol import equatorial_state, rotation_z
from stochgate.statevec import (
    H,
    X,
    StateVector,
    apply_mcx,
    apply_single,
    basis_state,
    branch_probabilities,
    enumerate_branches,
    fidelity_up_to_phase,
    inner_product,
    measure_subset,
    random_state,
    sample_outcome,
    slice_state,
    tensor,
)

S = 1 / math.sqrt(2)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def full_operator(u, q, n):
    """Dense 2^n x 2^n operator for ``u`` on qubit ``q`` (little-endian)."""
    return np.kron(np.kron(np.eye(1 << (n - q - 1)), u), np.eye(1 << q))


def mcx_matrix(controls, target, n):
    dim = 1 << n
    m = np.zeros((dim, dim))
    for i in range(dim):
        j = i ^ (1 << target) if all((i >> c) & 1 for c in controls) else i
        m[j, i] = 1
    return m


class TestConstruction:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            StateVector([1.0, 1.0])

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValidationError):
            StateVector([1.0, 0.0, 0.0])

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            StateVector([np.nan, 0.0])

    def test_amplitudes_read_only(self):
        s = basis_state(2, 1)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 1.0

    def test_num_qubits(self):
        assert basis_state(3).num_qubits == 3
        assert basis_state(0).num_qubits == 0


class TestTensor:
    def test_basis_product_little_endian(self):
        out = tensor(basis_state(1, 0), basis_state(1, 1))
        np.testing.assert_array_equal(out.amplitudes, [0, 0, 1, 0])

    def test_plus_times_zero(self):
        out = tensor(ket(S, S), basis_state(1, 0))
        np.testing.assert_allclose(out.amplitudes, [S, S, 0, 0], atol=1e-15)

    def test_double_loop_oracle(self, rng):
        a, b = random_state(2, rng), random_state(1, rng)
        out = tensor(a, b)
        expected = np.zeros(8, dtype=complex)
        for i in range(4):
            for j in range(2):
                expected[i + 4 * j] = a.amplitudes[i] * b.amplitudes[j]
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)
        assert abs(out.norm() - 1) < 1e-12

    def test_capacity(self):
        with pytest.raises(CapacityError):
            tensor(basis_state(13), basis_state(12))


class TestApplySingle:
    def test_x_flips(self):
        np.testing.assert_array_equal(apply_single(X, 0, basis_state(1)).amplitudes, [0, 1])

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 2.0, 5.9])
    def test_rotation_on_zero(self, alpha):
        out = apply_single(rotation_z(alpha), 0, basis_state(1))
        np.testing.assert_allclose(out.amplitudes, [np.exp(0.5j * alpha), 0], atol=1e-15)

    def test_hadamard_twice(self, rng):
        s = random_state(3, rng)
        out = apply_single(H, 1, apply_single(H, 1, s))
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-12)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValidationError):
            apply_single(np.array([[1, 1], [0, 1]]), 0, basis_state(1))

    def test_qubit_out_of_range(self):
        with pytest.raises(ValidationError):
            apply_single(X, 2, basis_state(2))

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, n=st.integers(1, 5), data=st.data())
    def test_matches_dense_operator(self, seed, n, data):
        rng = np.random.default_rng(seed)
        q = data.draw(st.integers(0, n - 1))
        u, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        s = random_state(n, rng)
        out = apply_single(u, q, s)
        np.testing.assert_allclose(out.amplitudes, full_operator(u, q, n) @ s.amplitudes, atol=1e-12)
        assert abs(out.norm() - 1) < 1e-12


class TestApplyMcx:
    def test_toffoli_truth_table(self):
        for i in range(8):
            out = apply_mcx([0, 1], 2, basis_state(3, i))
            j = i ^ 4 if (i & 3) == 3 else i
            np.testing.assert_array_equal(out.amplitudes, basis_state(3, j).amplitudes)

    def test_empty_controls_is_x(self):
        np.testing.assert_array_equal(apply_mcx([], 0, basis_state(1)).amplitudes, [0, 1])

    @pytest.mark.parametrize("controls,target", [([0, 0], 1), ([1], 1), ([0], 3)])
    def test_bad_indices(self, controls, target):
        with pytest.raises(ValidationError):
            apply_mcx(controls, target, basis_state(3))

    def test_cnot_kickback(self, rng):
        # data = control (qubit 0), program |alpha> = target (qubit 1)
        d = random_state(1, rng)
        alpha = 1.234
        out = apply_mcx([0], 1, tensor(d, equatorial_state(alpha)))
        u = rotation_z(alpha)
        expected = (
            np.outer([1, 0], u @ d.amplitudes).ravel() + np.outer([0, 1], u.conj().T @ d.amplitudes).ravel()
        ) / math.sqrt(2)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, n=st.integers(1, 5), data=st.data())
    def test_permutation_oracle_and_involution(self, seed, n, data):
        qubits = data.draw(st.permutations(range(n)))
        k = data.draw(st.integers(0, n - 1))
        controls, target = list(qubits[:k]), qubits[k]
        s = random_state(n, np.random.default_rng(seed))
        once = apply_mcx(controls, target, s)
        np.testing.assert_allclose(once.amplitudes, mcx_matrix(controls, target, n) @ s.amplitudes, atol=0)
        np.testing.assert_array_equal(apply_mcx(controls, target, once).amplitudes, s.amplitudes)


class TestInnerProduct:
    def test_orthogonal(self):
        assert inner_product(basis_state(1, 0), basis_state(1, 1)) == 0

    def test_self_overlap(self, rng):
        s = random_state(4, rng)
        assert abs(inner_product(s, s) - 1) < 1e-12

    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (2.5, -0.7), (6.0, 0.1)])
    def test_equatorial_overlap(self, a, b):
        # by hand: conj(e^{ib/2}) e^{ia/2}/2 + conj(e^{-ib/2}) e^{-ia/2}/2
        direct = (np.exp(-0.5j * b) * np.exp(0.5j * a) + np.exp(0.5j * b) * np.exp(-0.5j * a)) / 2
        got = inner_product(equatorial_state(b), equatorial_state(a))
        assert abs(got - direct) < 1e-15
        assert abs(got - math.cos((a - b) / 2)) < 1e-15

    def test_conjugate_symmetry(self, rng):
        a, b = random_state(3, rng), random_state(3, rng)
        assert abs(inner_product(a, b) - inner_product(b, a).conjugate()) < 1e-15

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            inner_product(basis_state(1), basis_state(2))


class TestFidelity:
    def test_identical(self, rng):
        s = random_state(2, rng)
        assert fidelity_up_to_phase(s, s) == pytest.approx(1, abs=1e-15)

    @pytest.mark.parametrize("theta", [0.1, 1.7, 3.14159, 5.0])
    def test_global_phase(self, rng, theta):
        s = random_state(2, rng)
        t = StateVector(np.exp(1j * theta) * s.amplitudes)
        assert fidelity_up_to_phase(s, t) == pytest.approx(1, abs=1e-15)

    def test_zero_vs_plus(self):
        assert fidelity_up_to_phase(basis_state(1), ket(S, S)) == pytest.approx(S, abs=1e-15)

    def test_mismatch(self):
        with pytest.raises(ValidationError):
            fidelity_up_to_phase(basis_state(1), basis_state(3))


class TestMeasurement:
    def test_plus(self):
        plus = ket(S, S)
        assert measure_subset(plus, [0], 0.25)[:2] == ("0", pytest.approx(0.5))
        assert measure_subset(plus, [0], 0.75)[:2] == ("1", pytest.approx(0.5))

    def test_bit_order_follows_qubit_list(self):
        s = basis_state(2, 0b10)  # qubit 1 set
        assert measure_subset(s, [0, 1], 0.5)[0] == "01"
        assert measure_subset(s, [1, 0], 0.5)[0] == "10"

    def test_lexicographic_inversion(self):
        s = StateVector(np.sqrt([0.1, 0.2, 0.3, 0.4]))
        # outcome "ab" = (q0, q1); in order 00, 01, 10, 11 the weights are
        # 0.1, 0.3, 0.2, 0.4, so the cumulative steps are 0.1, 0.4, 0.6, 1.0
        cases = {0.05: "00", 0.15: "01", 0.45: "10", 0.7: "11"}
        for draw, bits in cases.items():
            assert measure_subset(s, [0, 1], draw)[0] == bits
        np.testing.assert_allclose(branch_probabilities(s, [0, 1]), [0.1, 0.3, 0.2, 0.4])

    def test_kickback_branches(self, rng):
        d = random_state(1, rng)
        alpha = 0.8
        joint = apply_mcx([0], 1, tensor(d, equatorial_state(alpha)))
        u = rotation_z(alpha)
        for draw, bits, m in [(0.2, "0", u), (0.8, "1", u.conj().T)]:
            b, p, collapsed = measure_subset(joint, [1], draw)
            assert b == bits and p == pytest.approx(0.5, abs=1e-15)
            data = slice_state(collapsed, {1: int(bits)})
            np.testing.assert_allclose(data.amplitudes, m @ d.amplitudes, atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, draw=st.floats(0, 1, exclude_max=True))
    def test_collapsed_normalized(self, seed, draw):
        s = random_state(3, np.random.default_rng(seed))
        bits, p, collapsed = measure_subset(s, [2, 0], draw)
        assert abs(collapsed.norm() - 1) < 1e-12
        assert 0 < p <= 1

    def test_draw_range(self):
        with pytest.raises(ValidationError):
            measure_subset(basis_state(1), [0], 1.0)

    def test_zero_weight_draw(self):
        with pytest.raises(ConsistencyError):
            sample_outcome(np.array([0.0, 0.0]), 0.3)

    def test_enumerate_basis(self):
        (branch,) = enumerate_branches(basis_state(1), [0])
        assert branch[0] == "0" and branch[1] == 1.0
        np.testing.assert_array_equal(branch[2].amplitudes, [1, 0])

    def test_enumerate_matches_sampling(self, rng):
        s = random_state(3, rng)
        branches = enumerate_branches(s, [2, 0])
        assert abs(sum(p for _, p, _ in branches) - 1) < 1e-10
        draws = 100_000
        counts = {}
        for x in rng.random(draws):
            b = measure_subset(s, [2, 0], x)[0]
            counts[b] = counts.get(b, 0) + 1
        for bits, p, _ in branches:
            se = math.sqrt(p * (1 - p) / draws)
            assert abs(counts.get(bits, 0) / draws - p) < 5 * se


def test_slice_state_order(rng):
    a, b = random_state(1, rng), random_state(1, rng)
    joint = tensor(tensor(a, basis_state(1, 1)), b)
    out = slice_state(joint, {1: 1})
    assert fidelity_up_to_phase(out, tensor(a, b)) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ConsistencyError):
        slice_state(joint, {1: 0})
