import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_sat.errors import DimensionError, ScrambleError
from adiabatic_sat.hamiltonian import (
    BitDegrees,
    DiagonalProblem,
    apply_hamiltonian,
    build_degrees,
    build_problem,
    dense_hamiltonian,
    initial_state,
    scramble,
)
from adiabatic_sat.instances import Instance, generate_indexed, make_rng, total_energy


def random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def explicit_dense(s, instance):
    """Dense H(s) assembled entry by entry from the clause definitions."""
    n = instance.n
    dim = 1 << n
    h = np.zeros((dim, dim), dtype=complex)
    for z in range(dim):
        h[z, z] += s * total_energy(instance, z)
        for c in instance.clauses:
            for b in c.bits:
                # (1 - sigma_x)/2 on bit b
                h[z, z] += (1 - s) * 0.5
                h[z ^ (1 << (b - 1)), z] -= (1 - s) * 0.5
    return h


def test_build_problem_three_zeros_for_single_clause():
    inst = Instance.from_clauses(3, [(1, 2, 3)])
    e = build_problem(inst).energies
    assert np.flatnonzero(e == 0).tolist() == [1, 2, 4]


def test_build_problem_unique_zero():
    inst = generate_indexed("EC3", 9, 4, 0)
    e = build_problem(inst).energies
    assert np.flatnonzero(e == 0).tolist() == list(inst.satisfying)


def test_build_problem_matches_recount():
    inst = generate_indexed("EC3", 4, 8, 2)
    e = build_problem(inst).energies
    assert e.tolist() == [total_energy(inst, z) for z in range(16)]


@pytest.mark.parametrize(
    "n, clauses, expected",
    [
        (3, [(1, 2, 3)], [1, 1, 1]),
        (3, [(1, 2, 3), (1, 2, 3)], [2, 2, 2]),
        (3, [(1, 2), (2, 3)], [1, 2, 1]),
    ],
)
def test_build_degrees(n, clauses, expected):
    deg = build_degrees(Instance.from_clauses(n, clauses))
    assert deg.degrees.tolist() == expected
    assert deg.total == sum(expected) == len(clauses[0]) * len(clauses)


def test_initial_state():
    np.testing.assert_allclose(initial_state(1), [2**-0.5, 2**-0.5])
    for n in range(1, 11):
        assert abs(np.vdot(initial_state(n), initial_state(n)).real - 1) < 1e-14


def test_apply_at_s1_is_pointwise_energy():
    inst = generate_indexed("EC3", 6, 1, 0)
    diag, deg = build_problem(inst), build_degrees(inst)
    psi = random_state(6, make_rng(0))
    np.testing.assert_allclose(apply_hamiltonian(1.0, diag, deg, psi), diag.energies * psi)


def test_uniform_state_is_zero_mode_of_beginning_hamiltonian():
    for seed in range(5):
        inst = generate_indexed("EC3", 7, seed, 0)
        out = apply_hamiltonian(0.0, build_problem(inst), build_degrees(inst), initial_state(7))
        assert np.abs(out).max() < 1e-14


def test_single_spin():
    diag = DiagonalProblem(1, np.array([0, 0]))
    deg = BitDegrees(np.array([1]))
    out = apply_hamiltonian(0.0, diag, deg, np.array([1.0, 0.0], dtype=complex))
    np.testing.assert_allclose(out, [0.5, -0.5])


def test_dimension_mismatch():
    inst = generate_indexed("EC3", 5, 1, 0)
    diag, deg = build_problem(inst), build_degrees(inst)
    with pytest.raises(DimensionError):
        apply_hamiltonian(0.5, diag, deg, np.zeros(16, dtype=complex))
    with pytest.raises(DimensionError):
        apply_hamiltonian(0.5, diag, BitDegrees(np.ones(4, dtype=int)), np.zeros(32, dtype=complex))


@pytest.mark.parametrize("problem, n", [("EC3", 3), ("EC3", 4), ("EC2", 2), ("EC2", 4)])
def test_dense_equivalence(problem, n):
    rng = make_rng(11)
    for index in range(3):
        if problem == "EC3" and n == 3:
            inst = Instance.from_clauses(3, [(1, 2, 3), (1, 2, 3)])
        else:
            inst = generate_indexed(problem, n, 5, index)
        diag, deg = build_problem(inst), build_degrees(inst)
        for s in rng.uniform(size=4):
            dense = explicit_dense(s, inst)
            np.testing.assert_allclose(dense_hamiltonian(s, diag, deg), dense, atol=1e-14)
            psi = random_state(n, rng)
            got = apply_hamiltonian(s, diag, deg, psi)
            want = dense @ psi
            assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()
            expectation = np.vdot(psi, got)
            assert abs(expectation.imag) < 1e-12
            assert abs(expectation - np.vdot(psi, want)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_hermiticity(n, s, seed):
    rng = make_rng(seed)
    diag = DiagonalProblem(n, rng.integers(0, 5, size=1 << n))
    deg = BitDegrees(rng.integers(0, 4, size=n))
    psi, phi = random_state(n, rng), random_state(n, rng)
    lhs = np.vdot(phi, apply_hamiltonian(s, diag, deg, psi))
    rhs = np.conj(np.vdot(psi, apply_hamiltonian(s, diag, deg, phi)))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(0, 1), st.integers(0, 2**32 - 1),
       st.complex_numbers(max_magnitude=10, allow_nan=False), st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_linearity(n, s, seed, a, b):
    rng = make_rng(seed)
    diag = DiagonalProblem(n, rng.integers(0, 5, size=1 << n))
    deg = BitDegrees(rng.integers(0, 4, size=n))
    psi, phi = random_state(n, rng), random_state(n, rng)
    lhs = apply_hamiltonian(s, diag, deg, a * psi + b * phi)
    rhs = a * apply_hamiltonian(s, diag, deg, psi) + b * apply_hamiltonian(s, diag, deg, phi)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 20)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_problem_hamiltonian_nonnegative(seed):
    inst = generate_indexed("EC3", 6, seed, 0)
    diag, deg = build_problem(inst), build_degrees(inst)
    psi = random_state(6, make_rng(seed))
    assert np.vdot(psi, apply_hamiltonian(1.0, diag, deg, psi)).real >= 0


def test_scramble_identity_hook():
    diag = build_problem(generate_indexed("EC3", 6, 1, 0))
    out = scramble(diag, None, permutation=np.arange(64))
    assert out.scrambled
    assert out.energies.tolist() == diag.energies.tolist()


@pytest.mark.parametrize("seed", range(10))
def test_scramble_preserves_spectrum_and_unique_ground_state(seed):
    inst = generate_indexed("EC3", 8, seed, 0)
    diag = build_problem(inst)
    out = scramble(diag, seed)
    assert out.scramble_seed == seed
    assert sorted(out.energies.tolist()) == sorted(diag.energies.tolist())
    perm = make_rng(seed).permutation(256)
    zeros = np.flatnonzero(out.energies == 0)
    assert zeros.size == 1
    assert perm[zeros[0]] == inst.satisfying[0]


def test_scramble_is_deterministic_and_rejects_double_scramble():
    diag = build_problem(generate_indexed("EC2", 7, 1, 0))
    a, b = scramble(diag, 9), scramble(diag, 9)
    assert np.array_equal(a.energies, b.energies)
    assert not np.array_equal(a.energies, scramble(diag, 10).energies)
    with pytest.raises(ScrambleError):
        scramble(a, 3)
    with pytest.raises(ScrambleError):
        scramble(diag, None, permutation=np.zeros(128, dtype=int))
