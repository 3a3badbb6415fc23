"""Problem / beginning Hamiltonians and their matrix-free application.

The problem Hamiltonian is diagonal in the computational basis with entries
h(z), the number of violated clauses.  The beginning Hamiltonian is a sum of
single-bit terms (1 - sigma_x)/2, one per clause membership, so it collapses
to per-bit multiplicities d_i.  Nothing here builds a 2**n x 2**n matrix
except :func:`dense_hamiltonian`, which exists for validation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DimensionError, ScrambleError
from .instances import DEFAULT_ENUMERATION_CAP, Instance, energy_vector, make_rng


@dataclass(frozen=True)
class DiagonalProblem:
    n: int
    energies: np.ndarray
    scrambled: bool = False
    scramble_seed: int | None = None

    def __post_init__(self):
        if self.energies.shape != (1 << self.n,):
            raise DimensionError(f"energies must have length 2**{self.n}")

    def ground_states(self) -> list:
        """Zero-energy assignments; after scrambling these are the preimages
        of the original satisfying assignments."""
        return np.flatnonzero(self.energies == 0).tolist()


@dataclass(frozen=True)
class BitDegrees:
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return int(self.degrees.size)

    @property
    def total(self) -> int:
        return int(self.degrees.sum())


def build_problem(instance: Instance, cap: int = DEFAULT_ENUMERATION_CAP) -> DiagonalProblem:
    return DiagonalProblem(instance.n, energy_vector(instance.n, instance.clauses, cap))


def build_degrees(instance: Instance) -> BitDegrees:
    degrees = np.zeros(instance.n, dtype=np.int64)
    for c in instance.clauses:
        for b in c.bits:
            degrees[b - 1] += 1
    return BitDegrees(degrees)


def initial_state(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Uniform superposition, the ground state of the beginning Hamiltonian."""
    if n > cap:
        raise CapacityError(f"n={n} exceeds cap {cap}")
    dim = 1 << n
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)


def flip_bit(psi: np.ndarray, i: int) -> np.ndarray:
    """psi[z XOR 2**(i-1)] for all z (bit ``i`` is 1-based)."""
    stride = 1 << (i - 1)
    return psi.reshape(-1, 2, stride)[:, ::-1, :].reshape(-1)


def apply_beginning(deg: BitDegrees, psi: np.ndarray) -> np.ndarray:
    out = (deg.total / 2.0) * psi
    for i, d in enumerate(deg.degrees, start=1):
        if d:
            out -= (d / 2.0) * flip_bit(psi, i)
    return out


def apply_hamiltonian(s: float, diag: DiagonalProblem, deg: BitDegrees, psi: np.ndarray) -> np.ndarray:
    """Return ((1 - s) H_B + s H_P) psi."""
    if deg.n != diag.n or psi.shape != (1 << diag.n,):
        raise DimensionError(
            f"dimension mismatch: diag n={diag.n}, degrees n={deg.n}, state length={psi.shape}"
        )
    return s * diag.energies * psi + (1.0 - s) * apply_beginning(deg, psi)


def scramble(diag: DiagonalProblem, rng: np.random.Generator | int, *, permutation=None) -> DiagonalProblem:
    """Relabel the diagonal by a uniform random permutation of all 2**n assignments.

    ``rng`` may be a generator or an integer seed; only an integer seed is
    recorded on the result.  Passing ``permutation`` overrides the random draw.
    """
    if diag.scrambled:
        raise ScrambleError("diagonal is already scrambled")
    seed = None
    if permutation is None:
        if not isinstance(rng, np.random.Generator):
            seed = int(rng)
            rng = make_rng(seed)
        permutation = rng.permutation(1 << diag.n)
    else:
        permutation = np.asarray(permutation)
        if sorted(permutation.tolist()) != list(range(1 << diag.n)):
            raise ScrambleError("permutation hook is not a permutation of 0..2**n-1")
    return DiagonalProblem(diag.n, diag.energies[permutation], scrambled=True, scramble_seed=seed)


def dense_hamiltonian(s: float, diag: DiagonalProblem, deg: BitDegrees, cap: int = 6) -> np.ndarray:
    """Explicit matrix of (1 - s) H_B + s H_P built from Kronecker products."""
    n = diag.n
    if n > cap:
        raise CapacityError(f"dense matrix limited to n <= {cap}")
    eye2 = np.eye(2)
    hb1 = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])
    h_b = np.zeros((1 << n, 1 << n))
    for i, d in enumerate(deg.degrees, start=1):
        # integer bit i-1 is the (i-1)-th factor from the right in np.kron order
        term = np.array([[1.0]])
        for j in range(n, 0, -1):
            term = np.kron(term, hb1 if j == i else eye2)
        h_b += d * term
    h_p = np.diag(diag.energies.astype(float))
    return ((1.0 - s) * h_b + s * h_p).astype(np.complex128)
