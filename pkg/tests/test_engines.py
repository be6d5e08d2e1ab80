import pytest

from ssea.benchmarks import RidgeProblem, TwoMaxProblem
from ssea.bitcore import Genotype, Population, make_rng
from ssea.engines import (EngineConfig, EngineKind, branch_imbalance, run_crowding, run_engine,
                          run_one_plus_lambda, run_one_plus_one, run_steady_state)
from ssea.operators import INVERSE_ELITIST, RLS, UNIFORM, SelectionPolicy

G = Genotype.from_string


class Flat:
    name = "flat"

    def __init__(self, n):
        self.n = n

    def fitness(self, x):
        return 5


def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(mu=0)
    with pytest.raises(ValueError):
        EngineConfig(mu=10, budget=9)
    with pytest.raises(ValueError):
        EngineConfig(lam=0)


def test_steady_state_smoke_twomax():
    p = TwoMaxProblem(20)
    cfg = EngineConfig(mu=5, selection=INVERSE_ELITIST, mutation=RLS, budget=10 ** 6)
    ok = 0
    for seed in range(100):
        res = run_steady_state(cfg, p, make_rng(seed),
                               lambda ev: len(ev.population) == 5 and ev.population.min_fitness() == 10)
        ok += not res.budget_exhausted
    assert ok >= 99


def test_single_member_policies_coincide():
    p = TwoMaxProblem(30)
    a = run_steady_state(EngineConfig(mu=1, selection=INVERSE_ELITIST, budget=500), p, make_rng(3))
    b = run_steady_state(EngineConfig(mu=1, selection=UNIFORM, budget=500), p, make_rng(3))
    assert a.population.genotypes == b.population.genotypes


def test_stop_at_initialisation():
    p = TwoMaxProblem(16)
    seen = []

    def obs(ev):
        seen.append(ev)
        return ev.evaluations >= 3

    res = run_steady_state(EngineConfig(mu=6, budget=100), p, make_rng(1), obs)
    assert res.evaluations == 6 and not res.budget_exhausted
    assert [e.offspring for e in seen] == res.population.genotypes
    assert all(e.parent is None for e in seen)


def test_steady_state_invariants():
    p = TwoMaxProblem(24)
    best = []

    def obs(ev):
        if ev.evaluations > 8:
            assert len(ev.population) == 8
            best.append(ev.population.max_fitness())
            assert ev.evaluations == 8 + len(best)
        return False

    res = run_steady_state(EngineConfig(mu=8, selection=SelectionPolicy.parse("inv-tournament", 3),
                                        budget=3000), p, make_rng(2), obs)
    assert res.budget_exhausted and res.evaluations == 3000
    assert all(b >= a for a, b in zip(best, best[1:]))


def test_reproducible():
    p = TwoMaxProblem(40)
    cfg = EngineConfig(mu=10, selection=SelectionPolicy.parse("tournament", 2), budget=2000)
    a = run_engine(cfg, p, make_rng(77))
    b = run_engine(cfg, p, make_rng(77))
    assert a.population.genotypes == b.population.genotypes
    assert a.population.fitness == b.population.fitness


# ---------------------------------------------------------------- crowding


def test_crowding_accepts_ties():
    # every genotype has the same fitness, so every offspring is accepted
    p = Flat(6)
    events = []
    run_crowding(EngineConfig(mu=3, kind=EngineKind.CROWDING, budget=50), p, make_rng(0), events.append)
    assert all(e.removed == e.parent for e in events[3:])


def test_crowding_rejects_worse():
    p = TwoMaxProblem(20)
    prev = []
    rejected = 0

    def obs(ev):
        nonlocal prev, rejected
        if ev.parent is not None and ev.fitness < prev[ev.parent][1]:
            rejected += 1
            assert ev.removed == 4
            assert list(zip(ev.population.genotypes, ev.population.fitness)) == prev
        prev = list(zip(ev.population.genotypes, ev.population.fitness))
        return False

    run_crowding(EngineConfig(mu=4, kind=EngineKind.CROWDING, budget=3000), p, make_rng(4), obs)
    assert rejected > 100


def test_crowding_lineages():
    p = TwoMaxProblem(20)
    mu = 2
    snapshots = []

    def obs(ev):
        if ev.parent is not None:
            assert ev.removed in (ev.parent, mu)
            snapshots.append((ev.parent, ev.removed, ev.offspring, list(ev.population.genotypes)))
        return False

    run_crowding(EngineConfig(mu=mu, kind=EngineKind.CROWDING, budget=2000), p, make_rng(8), obs)
    for parent, removed, child, pop in snapshots:
        if removed == parent:
            assert pop[parent] == child


# ------------------------------------------------------------------ (1+1)


def test_one_plus_one_prefers_offspring_and_is_monotone():
    p = TwoMaxProblem(30)
    last = [None]

    def obs(ev):
        if ev.parent is None:
            last[0] = ev.fitness
            return False
        if ev.fitness >= last[0]:
            assert ev.removed == 0 and ev.population.genotypes[0] == ev.offspring
        else:
            assert ev.removed == 1
        assert ev.population.fitness[0] >= last[0]
        last[0] = ev.population.fitness[0]
        return False

    run_one_plus_one(EngineConfig(kind=EngineKind.ONE_PLUS_ONE, budget=3000), p, make_rng(5), obs)


# ------------------------------------------------------------------ (1+λ)


def test_lambda_one_matches_one_plus_one():
    p = TwoMaxProblem(30)
    for seed in range(20):
        a = run_one_plus_one(EngineConfig(kind=EngineKind.ONE_PLUS_ONE, budget=400), p, make_rng(seed))
        b = run_one_plus_lambda(EngineConfig(kind=EngineKind.ONE_PLUS_LAMBDA, lam=1, budget=400), p,
                                make_rng(seed))
        assert a.population.genotypes == b.population.genotypes and a.evaluations == b.evaluations


@pytest.mark.parametrize("lam,budget", [(7, 100), (5, 101), (1, 10)])
def test_lambda_bookkeeping(lam, budget):
    res = run_one_plus_lambda(EngineConfig(kind=EngineKind.ONE_PLUS_LAMBDA, lam=lam, budget=budget),
                              TwoMaxProblem(10), make_rng(0))
    gens = (budget - 1) // lam
    assert res.evaluations == 1 + gens * lam


def test_lambda_climbs_ridge_small():
    # k = 3 (n = 18); a few hundred offspring per generation find the ridge end
    p = RidgeProblem(3)
    ends = 0
    for seed in range(10):
        res = run_one_plus_lambda(EngineConfig(kind=EngineKind.ONE_PLUS_LAMBDA, lam=60, budget=60_001),
                                  p, make_rng(seed), lambda ev: "RidgeEnd" in p.peaks(ev.offspring))
        ends += not res.budget_exhausted
    assert ends >= 5


# ------------------------------------------------------------ imbalance


def test_branch_imbalance_examples():
    def pop(*strings):
        q = Population()
        for s in strings:
            q.add(G(s), 0)
        return q

    assert branch_imbalance(pop(*["0000"] * 5), 4) == 5
    assert branch_imbalance(pop("0000", "1111"), 4) == 0
    assert branch_imbalance(pop("0011"), 4) == 0
    assert branch_imbalance(pop("111", "110", "000"), 3) == -1
