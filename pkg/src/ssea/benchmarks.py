"""Analytic benchmark functions with peak-membership predicates.

All fitness values are Python ints.  Every problem object exposes ``n``,
``fitness(x)``, ``peaks(x)`` (a frozenset of labels) and ``name``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

from .bitcore import Genotype, hamming_weight

ALL_ONES = "AllOnes"
ALL_ZEROS = "AllZeros"
GLOBAL_PEAK = "GlobalPeak"
LEFT_PEAK = "LeftPeak"
RIDGE_END = "RidgeEnd"
DESIGNATED = "DesignatedOptimum"
OPT = "OPT"
LOC = "LOC"


class Problem(Protocol):
    n: int

    @property
    def name(self) -> str: ...

    def fitness(self, x: Genotype) -> int: ...

    def peaks(self, x: Genotype) -> frozenset[str]: ...


def integer_cube_root(n: int) -> int:
    r = round(n ** (1 / 3))
    while r ** 3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def _trailing_ones(v: int) -> int:
    return (~v & (v + 1)).bit_length() - 1


# --------------------------------------------------------------------- TwoMax


def two_max(x: Genotype) -> int:
    """``|n/2 - |x|_1|``; requires even ``n`` (see :class:`TwoMaxProblem`)."""
    if x.n % 2:
        raise ValueError("two_max needs even n; use TwoMaxProblem for odd n")
    return abs(x.n // 2 - hamming_weight(x))


def truncated_two_max(x: Genotype, k: int) -> int:
    n = x.n
    if x.n % 2:
        raise ValueError("truncated_two_max needs even n; use TwoMaxProblem for odd n")
    if not 0 <= k <= n // 2:
        raise ValueError(f"truncation k must lie in [0, n/2], got {k}")
    w = hamming_weight(x)
    return abs(n // 2 - w) if w >= n // 2 - k else 0


@dataclass(frozen=True)
class TwoMaxProblem:
    """TwoMax (``k is None`` or ``k == n/2``) or TruncatedTwoMax_k.

    For odd ``n`` all values are doubled (``|n - 2|x|_1|``) so they stay
    integral; this preserves every comparison.
    """

    n: int
    k: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.k is not None and not 0 <= 2 * self.k <= self.n:
            raise ValueError(f"truncation k must lie in [0, n/2], got {self.k}")

    @property
    def truncated(self) -> bool:
        return self.k is not None and 2 * self.k < self.n

    @property
    def doubled(self) -> bool:
        return self.n % 2 == 1

    @property
    def name(self) -> str:
        return "truncated-twomax" if self.truncated else "twomax"

    @property
    def left_weight(self) -> int:
        """Hamming weight of the left peak (plateau for the truncated variant)."""
        return 0 if not self.truncated else math.ceil(self.n / 2 - self.k)

    def value_at_weight(self, w: int) -> int:
        v = abs(self.n - 2 * w)
        if self.truncated and 2 * w < self.n - 2 * self.k:
            v = 0
        return v if self.doubled else v // 2

    def fitness(self, x: Genotype) -> int:
        return self.value_at_weight(hamming_weight(x))

    def peak_labels(self) -> tuple[str, str]:
        """(left, right) labels."""
        return (LEFT_PEAK, GLOBAL_PEAK) if self.truncated else (ALL_ZEROS, ALL_ONES)

    def peaks_at_weight(self, w: int) -> frozenset[str]:
        if w == self.n:
            return frozenset({self.peak_labels()[1]})
        if w == self.left_weight:
            return frozenset({self.peak_labels()[0]})
        return frozenset()

    def peaks(self, x: Genotype) -> frozenset[str]:
        return self.peaks_at_weight(hamming_weight(x))

    def peak_fitness(self) -> tuple[int, int]:
        return self.value_at_weight(self.left_weight), self.value_at_weight(self.n)


# ----------------------------------------------------------- RidgeWithBranches


def ridge_g(x: Genotype, scale: int) -> int:
    """Inner ridge function on a block of length ``L = x.n``.

    Ridge points ``0^(L-i) 1^i`` and off-branch points ``y 0^(L-i-k) 1^i``
    (``k = floor(sqrt(L))``, ``i`` in ``{k, 2k, ..., (k-2)k}``) score
    ``(i + 3) * scale + |x|_1``; everything else scores 0.
    """
    L = x.n
    if L < 9:
        raise ValueError(f"ridge block needs length >= 9, got {L}")
    k = math.isqrt(L)
    v = x.bits
    t = _trailing_ones(v)
    if v == (1 << t) - 1:
        return (t + 3) * scale + t
    low = v & ((1 << (L - k)) - 1)
    t = _trailing_ones(low)
    if low == (1 << t) - 1 and t % k == 0 and k <= t <= (k - 2) * k:
        return (t + 3) * scale + hamming_weight(x)
    return 0


def _split(x: Genotype, m1: int) -> tuple[Genotype, Genotype]:
    m2 = x.n - m1
    return Genotype(x.bits >> m2, m1), Genotype(x.bits & ((1 << m2) - 1), m2)


def ridge_with_branches(x: Genotype, scale: str = "full") -> int:
    """RidgeWithBranches on ``x`` with prefix ``floor(n/2)`` and suffix ``ceil(n/2)``.

    ``scale="full"`` multiplies the inner ridge function by the full
    dimension ``n``; ``scale="suffix"`` uses the suffix length instead.
    """
    n = x.n
    prefix, suffix = _split(x, n // 2)
    if prefix.bits:
        if suffix.bits:
            return n - hamming_weight(suffix)
        return 2 * n - hamming_weight(prefix)
    return ridge_g(suffix, n if scale == "full" else suffix.n)


def _designated_bits(k: int, j: int) -> int:
    m = k * k
    # 0^m 1^k 0^(m-(j+1)k) 1^(jk): the prefix is all zeros, so only the suffix counts.
    return (((1 << k) - 1) << (m - k)) | ((1 << (j * k)) - 1)


def ridge_with_branches_j(x: Genotype, j: int, scale: str = "full") -> int:
    n = x.n
    k = math.isqrt(n // 2)
    if 2 * k * k != n:
        raise ValueError(f"RidgeWithBranches_j needs n = 2k^2, got n={n}")
    if not 1 <= j <= k - 1:
        raise ValueError(f"branch index j must lie in [1, {k - 1}], got {j}")
    if x.bits == _designated_bits(k, j):
        return n ** 3
    return ridge_with_branches(x, scale)


@dataclass(frozen=True)
class RidgeProblem:
    """RidgeWithBranches_j with ``n = 2k^2``; ``j = None`` is the plain function."""

    k: int
    j: int | None = None
    scale: str = "full"

    def __post_init__(self):
        if self.k < 3:
            raise ValueError("ridge parameter k must be >= 3")
        if self.j is not None and not 1 <= self.j <= self.k - 1:
            raise ValueError(f"branch index j must lie in [1, {self.k - 1}], got {self.j}")
        if self.scale not in ("full", "suffix"):
            raise ValueError("scale must be 'full' or 'suffix'")

    @property
    def n(self) -> int:
        return 2 * self.k * self.k

    @property
    def name(self) -> str:
        return "ridge"

    def fitness(self, x: Genotype) -> int:
        if self.j is None:
            return ridge_with_branches(x, self.scale)
        return ridge_with_branches_j(x, self.j, self.scale)

    def branch_points(self) -> list[int]:
        return [i * self.k for i in range(1, self.k - 1)]

    def peaks(self, x: Genotype) -> frozenset[str]:
        k, m = self.k, self.k * self.k
        if x.bits >> m:
            return frozenset()
        suffix = x.bits
        labels = set()
        if suffix == (1 << m) - 1:
            labels.add(RIDGE_END)
        top = ((1 << k) - 1) << (m - k)
        for i in self.branch_points():
            if suffix == top | ((1 << i) - 1):
                labels.add(f"BranchOptimum({i})")
        if self.j is not None and suffix == _designated_bits(k, self.j):
            labels.add(DESIGNATED)
        return frozenset(labels)


# --------------------------------------------------------------- TwoGradients


def lso(x: Genotype, ell: int) -> int:
    """Length of the all-ones run that opens the last ``ell`` bits."""
    if not 0 <= ell <= x.n:
        raise ValueError("suffix length out of range")
    suffix = x.bits & ((1 << ell) - 1)
    return ell - (suffix ^ ((1 << ell) - 1)).bit_length()


@dataclass(frozen=True)
class TwoGradientsProblem:
    """Suffix length ``ell = floor(n^(1/3))``, prefix length ``m = n - ell``.

    The optimum threshold is ``floor(2m/3)``, exact whenever 3 divides m.
    """

    n: int
    ell: int = field(init=False)
    m: int = field(init=False)
    threshold: int = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("TwoGradients needs n >= 2")
        ell = integer_cube_root(self.n)
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "m", self.n - ell)
        object.__setattr__(self, "threshold", (2 * (self.n - ell)) // 3)

    @property
    def name(self) -> str:
        return "twogradients"

    @property
    def threshold_exact(self) -> bool:
        return self.m % 3 == 0

    def value(self, po: int, lso_value: int) -> int:
        n = self.n
        if po <= self.threshold:
            return n * n * lso_value + po
        return n * n * self.ell - self.m - 1 + po

    @property
    def opt_value(self) -> int:
        return self.value(self.threshold, self.ell)

    @property
    def loc_value(self) -> int:
        return self.value(self.m, 0)

    def prefix_ones(self, x: Genotype) -> int:
        return (x.bits >> self.ell).bit_count()

    def fitness(self, x: Genotype) -> int:
        return self.value(self.prefix_ones(x), lso(x, self.ell))

    def peaks(self, x: Genotype) -> frozenset[str]:
        po = self.prefix_ones(x)
        if po == self.m:
            return frozenset({LOC})
        if po == self.threshold and lso(x, self.ell) == self.ell:
            return frozenset({OPT})
        return frozenset()


def two_gradients(x: Genotype) -> int:
    return TwoGradientsProblem(x.n).fitness(x)


def peak_membership(problem: Problem, x: Genotype) -> frozenset[str]:
    return problem.peaks(x)
