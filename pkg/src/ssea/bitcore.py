"""Bit-string genotypes, fitness-annotated populations and random streams.

A genotype of length ``n`` is stored as a Python ``int`` (word-packed by the
interpreter).  String position ``i`` (1-based, left to right, ``x_1 ... x_n``)
maps to integer bit ``n - i``, so ``Genotype.from_string("0011").bits == 3``
and the string prefix lives in the high bits.

Random streams are :class:`numpy.random.Generator` objects backed by the
counter-based Philox bit generator.  Per-run streams are derived from a
64-bit base seed with :class:`numpy.random.SeedSequence`, whose mixing
function is fixed across numpy releases and platforms.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

RngStream = np.random.Generator

SEED_MASK = (1 << 64) - 1


class InvalidDimensionError(ValueError):
    pass


class InvalidStateError(RuntimeError):
    pass


def make_rng(seed: int) -> RngStream:
    """Return the canonical stream for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed & SEED_MASK)))


def stable_hash(text: str) -> int:
    """64-bit hash of ``text`` that does not depend on PYTHONHASHSEED."""
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def derive_seed(base_seed: int, run_index: int, cell: str = "") -> int:
    """Mix ``(base_seed, cell, run_index)`` into an independent 64-bit seed.

    The mixing is ``SeedSequence(base_seed, spawn_key=(stable_hash(cell),
    run_index))`` followed by drawing one 64-bit word from its state.
    """
    ss = np.random.SeedSequence(base_seed & SEED_MASK, spawn_key=(stable_hash(cell), run_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, slots=True)
class Genotype:
    bits: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidDimensionError(f"genotype length must be >= 1, got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError("bits do not fit in the declared length")

    @classmethod
    def from_string(cls, s: str) -> "Genotype":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls(int(s, 2), len(s))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Genotype":
        return cls.from_string("".join("1" if b else "0" for b in bits))

    @classmethod
    def zeros(cls, n: int) -> "Genotype":
        return cls(0, n)

    @classmethod
    def ones(cls, n: int) -> "Genotype":
        return cls((1 << n) - 1, n)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        """Bit at 0-based string position ``i``."""
        if not -self.n <= i < self.n:
            raise IndexError(i)
        i %= self.n
        return (self.bits >> (self.n - 1 - i)) & 1

    def complement(self) -> "Genotype":
        return Genotype(self.bits ^ ((1 << self.n) - 1), self.n)

    def flip(self, positions: Iterable[int]) -> "Genotype":
        mask = 0
        for p in positions:
            mask ^= 1 << (self.n - 1 - p)
        return Genotype(self.bits ^ mask, self.n)

    def to_array(self) -> np.ndarray:
        """0/1 ``uint8`` array in string order."""
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "big"), dtype=np.uint8)
        return np.unpackbits(raw)[8 * nbytes - self.n:]


def hamming_weight(x: Genotype) -> int:
    return x.bits.bit_count()


def random_genotype(n: int, rng: RngStream) -> Genotype:
    """Uniform sample from {0,1}^n."""
    if n < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {n}")
    words = rng.integers(0, 2, size=n, dtype=np.uint8)
    bits = int.from_bytes(np.packbits(words).tobytes(), "big") >> (-n % 8)
    return Genotype(bits, n)


@dataclass
class Population:
    """Multiset of genotypes with cached fitness values.

    Slots are positional; :func:`ssea.operators.replace_worst` overwrites the
    slot of the removed member with the offspring.
    """

    genotypes: list[Genotype] = field(default_factory=list)
    fitness: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.genotypes)

    def __iter__(self):
        return iter(zip(self.genotypes, self.fitness))

    def add(self, x: Genotype, f: int) -> None:
        self.genotypes.append(x)
        self.fitness.append(f)

    def min_fitness(self) -> int:
        return min(self.fitness)

    def max_fitness(self) -> int:
        return max(self.fitness)

    def argmins(self) -> list[int]:
        lo = min(self.fitness)
        return [i for i, f in enumerate(self.fitness) if f == lo]

    def best_index(self) -> int:
        return max(range(len(self.fitness)), key=self.fitness.__getitem__)

    def copy(self) -> "Population":
        return Population(list(self.genotypes), list(self.fitness))
