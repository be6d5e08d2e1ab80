"""Reference generational loops over explicit genotypes.

Every engine reports each fitness evaluation to an observer callback; the
callback returns a truthy value to stop the run.  Initial samples are
reported too (with ``parent=None``), but a stop request during
initialisation only takes effect once the initial population is complete.
Initial evaluations count towards the budget.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

from .benchmarks import Problem
from .bitcore import Genotype, Population, RngStream, hamming_weight, random_genotype
from .operators import MutationPolicy, SelectionPolicy, SBM, UNIFORM, mutate, replace_worst, select_parent


class EngineKind(enum.Enum):
    STEADY_STATE = "mu1"
    CROWDING = "crowding"
    ONE_PLUS_ONE = "oneplusone"
    ONE_PLUS_LAMBDA = "onepluslambda"


@dataclass(frozen=True)
class EngineConfig:
    mu: int = 1
    selection: SelectionPolicy = UNIFORM
    mutation: MutationPolicy = SBM
    budget: int = 10 ** 6
    kind: EngineKind = EngineKind.STEADY_STATE
    lam: int = 1

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise ValueError("mu and lambda must be positive")
        if self.budget < self.mu:
            raise ValueError(f"budget {self.budget} cannot cover {self.mu} initial evaluations")


@dataclass
class IterationEvent:
    evaluations: int
    offspring: Genotype
    fitness: int
    parent: Optional[int]
    removed: Optional[int]
    population: Population


Observer = Callable[[IterationEvent], object]


@dataclass
class EngineResult:
    population: Population
    evaluations: int
    budget_exhausted: bool

    @property
    def best(self) -> tuple[Genotype, int]:
        i = self.population.best_index()
        return self.population.genotypes[i], self.population.fitness[i]


def _never(_event: IterationEvent) -> bool:
    return False


def _initialise(config: EngineConfig, problem: Problem, rng: RngStream, observer: Observer,
                size: int) -> tuple[Population, bool]:
    pop = Population()
    stop = False
    for t in range(1, size + 1):
        x = random_genotype(problem.n, rng)
        f = problem.fitness(x)
        pop.add(x, f)
        if observer(IterationEvent(t, x, f, None, None, pop)):
            stop = True
    return pop, stop


def run_steady_state(config: EngineConfig, problem: Problem, rng: RngStream,
                     observer: Observer = _never) -> EngineResult:
    """(mu+1) loop: select a parent, mutate, remove a worst member of P ∪ {y}."""
    pop, stop = _initialise(config, problem, rng, observer, config.mu)
    t = config.mu
    while not stop and t < config.budget:
        i = select_parent(pop, config.selection, rng)
        y = mutate(pop.genotypes[i], config.mutation, rng)
        fy = problem.fitness(y)
        t += 1
        removed = replace_worst(pop, y, fy, rng)
        stop = bool(observer(IterationEvent(t, y, fy, i, removed, pop)))
    return EngineResult(pop, t, not stop)


def run_crowding(config: EngineConfig, problem: Problem, rng: RngStream,
                 observer: Observer = _never) -> EngineResult:
    """Deterministic crowding: the offspring only competes with its own parent."""
    pop, stop = _initialise(config, problem, rng, observer, config.mu)
    mu = config.mu
    t = mu
    while not stop and t < config.budget:
        i = int(rng.integers(mu))
        y = mutate(pop.genotypes[i], config.mutation, rng)
        fy = problem.fitness(y)
        t += 1
        if fy >= pop.fitness[i]:
            pop.genotypes[i] = y
            pop.fitness[i] = fy
            removed = i
        else:
            removed = mu
        stop = bool(observer(IterationEvent(t, y, fy, i, removed, pop)))
    return EngineResult(pop, t, not stop)


def run_one_plus_one(config: EngineConfig, problem: Problem, rng: RngStream,
                     observer: Observer = _never) -> EngineResult:
    """(1+1) EA; ties are resolved in favour of the offspring."""
    pop, stop = _initialise(config, problem, rng, observer, 1)
    t = 1
    while not stop and t < config.budget:
        y = mutate(pop.genotypes[0], config.mutation, rng)
        fy = problem.fitness(y)
        t += 1
        accepted = fy >= pop.fitness[0]
        if accepted:
            pop.genotypes[0] = y
            pop.fitness[0] = fy
        stop = bool(observer(IterationEvent(t, y, fy, 0, 0 if accepted else 1, pop)))
    return EngineResult(pop, t, not stop)


def run_one_plus_lambda(config: EngineConfig, problem: Problem, rng: RngStream,
                        observer: Observer = _never) -> EngineResult:
    """(1+lambda) EA.

    A generation is only started when the remaining budget covers all of
    its ``lambda`` offspring, so ``evaluations == 1 + generations * lambda``.
    The best offspring (ties uniform) replaces the parent if it is not worse.
    """
    pop, stop = _initialise(config, problem, rng, observer, 1)
    lam = config.lam
    t = 1
    while not stop and t + lam <= config.budget:
        parent = pop.genotypes[0]
        best: list[tuple[Genotype, int]] = []
        best_f = None
        for _ in range(lam):
            y = mutate(parent, config.mutation, rng)
            fy = problem.fitness(y)
            t += 1
            if best_f is None or fy > best_f:
                best, best_f = [(y, fy)], fy
            elif fy == best_f:
                best.append((y, fy))
            stop = bool(observer(IterationEvent(t, y, fy, 0, None, pop))) or stop
        y, fy = best[int(rng.integers(len(best)))] if len(best) > 1 else best[0]
        if fy >= pop.fitness[0]:
            pop.genotypes[0] = y
            pop.fitness[0] = fy
    return EngineResult(pop, t, not stop)


ENGINES = {
    EngineKind.STEADY_STATE: run_steady_state,
    EngineKind.CROWDING: run_crowding,
    EngineKind.ONE_PLUS_ONE: run_one_plus_one,
    EngineKind.ONE_PLUS_LAMBDA: run_one_plus_lambda,
}


def run_engine(config: EngineConfig, problem: Problem, rng: RngStream,
               observer: Observer = _never) -> EngineResult:
    return ENGINES[config.kind](config, problem, rng, observer)


def branch_imbalance(pop: Population, n: int) -> int:
    """Members with fewer than n/2 ones minus members with more than n/2 ones."""
    d = 0
    for x in pop.genotypes:
        w2 = 2 * hamming_weight(x)
        if w2 < n:
            d += 1
        elif w2 > n:
            d -= 1
    return d
