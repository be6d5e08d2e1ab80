"""Mutation, parent selection and plus-replacement."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .bitcore import Genotype, InvalidStateError, Population, RngStream


class Selection(enum.Enum):
    UNIFORM = "uniform"
    TOURNAMENT = "tournament"
    INVERSE_TOURNAMENT = "inv-tournament"
    INVERSE_ELITIST = "inv-elitist"


class Mutation(enum.Enum):
    STANDARD_BIT = "sbm"
    ONE_BIT = "rls"


@dataclass(frozen=True)
class SelectionPolicy:
    kind: Selection = Selection.UNIFORM
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"tournament size must be >= 1, got {self.k}")

    @property
    def label(self) -> str:
        if self.kind in (Selection.TOURNAMENT, Selection.INVERSE_TOURNAMENT):
            return f"{self.kind.value}-{self.k}"
        return self.kind.value

    @classmethod
    def parse(cls, name: str, k: int = 1) -> "SelectionPolicy":
        return cls(Selection(name), k)


@dataclass(frozen=True)
class MutationPolicy:
    """``STANDARD_BIT`` flips every bit with probability 1/n."""

    kind: Mutation = Mutation.STANDARD_BIT

    @classmethod
    def parse(cls, name: str) -> "MutationPolicy":
        return cls(Mutation(name))


UNIFORM = SelectionPolicy(Selection.UNIFORM)
INVERSE_ELITIST = SelectionPolicy(Selection.INVERSE_ELITIST)
SBM = MutationPolicy(Mutation.STANDARD_BIT)
RLS = MutationPolicy(Mutation.ONE_BIT)


def mutate(x: Genotype, policy: MutationPolicy, rng: RngStream) -> Genotype:
    n = x.n
    if policy.kind is Mutation.ONE_BIT:
        return Genotype(x.bits ^ (1 << int(rng.integers(n))), n)
    # Bin(n, 1/n) flips at a uniformly random set of positions is the same
    # law as n independent coin flips.
    c = int(rng.binomial(n, 1.0 / n))
    if c == 0:
        return x
    mask = 0
    for p in rng.choice(n, size=c, replace=False):
        mask |= 1 << int(p)
    return Genotype(x.bits ^ mask, n)


def _uniform_among(candidates: list[int], rng: RngStream) -> int:
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.integers(len(candidates)))]


def select_parent(pop: Population, policy: SelectionPolicy, rng: RngStream) -> int:
    """Index of the selected parent.

    Tournament entrants are ``k`` independent uniform draws (with
    replacement); the extreme is drawn uniformly among the entrants that
    attain it.
    """
    mu = len(pop)
    if mu == 0:
        raise InvalidStateError("cannot select from an empty population")
    kind = policy.kind
    if kind is Selection.UNIFORM or (policy.k == 1 and kind is not Selection.INVERSE_ELITIST):
        return int(rng.integers(mu))
    fit = pop.fitness
    if kind is Selection.INVERSE_ELITIST:
        return _uniform_among(pop.argmins(), rng)
    entrants = [int(i) for i in rng.integers(mu, size=policy.k)]
    values = [fit[i] for i in entrants]
    target = min(values) if kind is Selection.INVERSE_TOURNAMENT else max(values)
    return _uniform_among([i for i, v in zip(entrants, values) if v == target], rng)


def replace_worst(pop: Population, child: Genotype, child_fitness: int, rng: RngStream) -> int:
    """Remove a minimum of ``P ∪ {child}`` in place, ties broken uniformly.

    Returns the slot of the removed member, or ``len(pop)`` when the child
    itself was removed.  Otherwise the child takes over the removed slot.
    """
    mu = len(pop)
    lo = min(pop.fitness)
    if child_fitness < lo:
        return mu
    candidates = pop.argmins()
    if child_fitness == lo:
        candidates.append(mu)
    slot = _uniform_among(candidates, rng)
    if slot < mu:
        pop.genotypes[slot] = child
        pop.fitness[slot] = child_fitness
    return slot
