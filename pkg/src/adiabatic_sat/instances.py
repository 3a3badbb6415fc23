"""Random Exact Cover instances (EC3 / EC2) and brute-force energy evaluation.

Bit convention: bit ``i`` (1-based) of an instance is bit ``i - 1`` of the
assignment integer, so ``z_i = (value >> (i - 1)) & 1``.

A clause is satisfied iff exactly one of its bits is 1.  For two-bit clauses
this is the "01 or 10" rule, for three-bit clauses "one 1 and two 0s".
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapacityError, GenerationError, InvalidClauseError, InvalidParameterError

DEFAULT_ENUMERATION_CAP = 24
DEFAULT_RESTART_CAP = 10**6

PROBLEMS = ("EC3", "EC2", "EC3multi")


@dataclass(frozen=True)
class Clause:
    """An Exact Cover clause over 2 or 3 distinct 1-based bit indices.

    Bits are stored sorted, so any ordering of the same set compares equal.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(sorted(int(b) for b in self.bits))
        if len(bits) not in (2, 3):
            raise InvalidClauseError(f"clause must have 2 or 3 bits, got {len(bits)}")
        if len(set(bits)) != len(bits):
            raise InvalidClauseError(f"clause bits must be distinct: {bits}")
        if bits[0] < 1:
            raise InvalidClauseError(f"bit indices are 1-based: {bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def arity(self) -> int:
        return len(self.bits)

    @property
    def mask(self) -> int:
        return sum(1 << (b - 1) for b in self.bits)

    def check(self, n: int) -> None:
        if self.bits[-1] > n:
            raise InvalidClauseError(f"clause {self.bits} has a bit outside [1, {n}]")


@dataclass(frozen=True)
class Instance:
    n: int
    clauses: tuple[Clause, ...]
    satisfying: tuple[int, ...]
    seed: int | None = None
    problem: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        object.__setattr__(self, "satisfying", tuple(int(z) for z in self.satisfying))
        for c in self.clauses:
            c.check(self.n)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "clauses": [list(c.bits) for c in self.clauses],
            "satisfying": list(self.satisfying),
            "seed": self.seed,
            "problem": self.problem,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, verify: bool = True) -> "Instance":
        n = int(data["n"])
        clauses = tuple(Clause(tuple(bits)) for bits in data["clauses"])
        satisfying = tuple(int(z) for z in data["satisfying"])
        if verify:
            _, recount = count_satisfying(n, clauses)
            if list(satisfying) != recount:
                raise InvalidParameterError("stored satisfying assignments do not match the clauses")
        return cls(n, clauses, satisfying, data.get("seed"), data.get("problem"))

    @classmethod
    def from_json(cls, text: str, verify: bool = True) -> "Instance":
        return cls.from_dict(json.loads(text), verify=verify)

    @classmethod
    def from_clauses(cls, n: int, clauses: Iterable, seed=None, problem=None) -> "Instance":
        clauses = tuple(c if isinstance(c, Clause) else Clause(tuple(c)) for c in clauses)
        _, sat = count_satisfying(n, clauses)
        return cls(n, clauses, tuple(sat), seed, problem)


def _bit(z: int, i: int) -> int:
    return (z >> (i - 1)) & 1


def clause_energy(clause: Clause, z: int, n: int | None = None) -> int:
    """0 if assignment ``z`` satisfies ``clause``, else 1."""
    if n is not None:
        clause.check(n)
    ones = sum(_bit(z, b) for b in clause.bits)
    return 0 if ones == 1 else 1


def total_energy(instance: Instance, z: int) -> int:
    """Number of violated clauses, counted with multiplicity."""
    return sum(clause_energy(c, z) for c in instance.clauses)


def energy_vector(n: int, clauses: Sequence[Clause], cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """h(z) for every z in [0, 2**n) as an int32 array."""
    if n > cap:
        raise CapacityError(f"n={n} exceeds enumeration cap {cap}")
    z = np.arange(1 << n, dtype=np.int64)
    energies = np.zeros(1 << n, dtype=np.int32)
    for c in clauses:
        c.check(n)
        ones = np.zeros_like(z)
        for b in c.bits:
            ones += (z >> (b - 1)) & 1
        energies += ones != 1
    return energies


def count_satisfying(n: int, clauses: Sequence[Clause], cap: int = DEFAULT_ENUMERATION_CAP):
    """Exhaustively enumerate assignments; return ``(count, sorted list)``."""
    energies = energy_vector(n, clauses, cap)
    sat = np.flatnonzero(energies == 0).tolist()
    return len(sat), sat


def derive_seed(master_seed: int, problem: str, n: int, index: int, stream: str = "") -> int:
    """Stable 64-bit seed for one instance, independent of any other instance."""
    key = f"{int(master_seed)}|{problem}|{int(n)}|{int(index)}|{stream}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_clause(n: int, arity: int, rng: np.random.Generator) -> Clause:
    if arity not in (2, 3):
        raise InvalidParameterError(f"arity must be 2 or 3, got {arity}")
    if arity > n:
        raise InvalidParameterError(f"arity {arity} exceeds bit count {n}")
    bits = rng.choice(n, size=arity, replace=False) + 1
    return Clause(tuple(int(b) for b in bits))


def _satisfied_by(clause: Clause, z: np.ndarray) -> np.ndarray:
    ones = np.zeros_like(z)
    for b in clause.bits:
        ones += (z >> (b - 1)) & 1
    return ones == 1


def _stuck(n: int, arity: int, sat: np.ndarray) -> bool:
    # True if no possible clause can remove any current satisfying assignment.
    for bits in combinations(range(1, n + 1), arity):
        if not _satisfied_by(Clause(bits), sat).all():
            return False
    return True


def _grow(
    n: int,
    arity: int,
    rng: np.random.Generator,
    accept: Callable[[int], bool],
    reject: Callable[[int], bool],
    restart_cap: int,
    cap: int,
    trace: list | None = None,
):
    """Add random clauses one at a time until ``accept(count)``.

    An attempt is discarded when ``reject(count)`` holds, or when the count can
    no longer change (only possible for tiny n).
    """
    if n > cap:
        raise CapacityError(f"n={n} exceeds enumeration cap {cap}")
    for _ in range(restart_cap):
        clauses = []
        sat = np.arange(1 << n, dtype=np.int64)
        counts = []
        while True:
            clause = random_clause(n, arity, rng)
            clauses.append(clause)
            before = sat.size
            sat = sat[_satisfied_by(clause, sat)]
            counts.append(int(sat.size))
            if accept(sat.size):
                if trace is not None:
                    trace.extend(counts)
                return clauses, sat
            if reject(sat.size):
                break
            if sat.size == before and _stuck(n, arity, sat):
                break
    raise GenerationError(f"no instance accepted after {restart_cap} restarts (n={n}, arity={arity})")


def _finish(n, clauses, sat, seed, problem) -> Instance:
    return Instance(n, tuple(clauses), tuple(int(z) for z in np.sort(sat)), seed, problem)


def generate_ec3_unique(n: int, rng: np.random.Generator, seed: int | None = None,
                        restart_cap: int = DEFAULT_RESTART_CAP, cap: int = DEFAULT_ENUMERATION_CAP,
                        trace: list | None = None) -> Instance:
    """EC3 instance with exactly one satisfying assignment."""
    if n < 3:
        raise InvalidParameterError("EC3 needs n >= 3")
    clauses, sat = _grow(n, 3, rng, lambda k: k == 1, lambda k: k == 0, restart_cap, cap, trace)
    return _finish(n, clauses, sat, seed, "EC3")


def generate_ec2_pair(n: int, rng: np.random.Generator, seed: int | None = None,
                      restart_cap: int = DEFAULT_RESTART_CAP, cap: int = DEFAULT_ENUMERATION_CAP,
                      trace: list | None = None) -> Instance:
    """EC2 instance with exactly two (mutually complementary) satisfying assignments."""
    if n < 2:
        raise InvalidParameterError("EC2 needs n >= 2")
    clauses, sat = _grow(n, 2, rng, lambda k: k == 2, lambda k: k == 0, restart_cap, cap, trace)
    return _finish(n, clauses, sat, seed, "EC2")


def generate_ec3_multi(n: int, rng: np.random.Generator, seed: int | None = None,
                       restart_cap: int = DEFAULT_RESTART_CAP, cap: int = DEFAULT_ENUMERATION_CAP,
                       trace: list | None = None) -> Instance:
    """EC3 instance with 6 to 9 satisfying assignments.

    Clauses are added while more than 9 assignments survive; a clause that
    jumps the count from above 9 to below 6 discards the attempt.
    """
    if n < 3:
        raise InvalidParameterError("EC3 needs n >= 3")
    clauses, sat = _grow(n, 3, rng, lambda k: 6 <= k <= 9, lambda k: k < 6, restart_cap, cap, trace)
    return _finish(n, clauses, sat, seed, "EC3multi")


GENERATORS = {
    "EC3": generate_ec3_unique,
    "EC2": generate_ec2_pair,
    "EC3multi": generate_ec3_multi,
}


def generate(problem: str, n: int, seed: int, **kwargs) -> Instance:
    """Generate one instance of ``problem`` from an explicit 64-bit seed."""
    try:
        gen = GENERATORS[problem]
    except KeyError:
        raise InvalidParameterError(f"unknown problem {problem!r}; choose from {PROBLEMS}") from None
    return gen(n, make_rng(seed), seed=seed, **kwargs)


def generate_indexed(problem: str, n: int, master_seed: int, index: int, stream: str = "", **kwargs) -> Instance:
    """Instance ``index`` of a reproducible family; does not depend on other indices."""
    return generate(problem, n, derive_seed(master_seed, problem, n, index, stream), **kwargs)


def bit_complement(z: int, n: int) -> int:
    return z ^ ((1 << n) - 1)
