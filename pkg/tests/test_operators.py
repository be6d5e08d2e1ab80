from collections import Counter

import pytest

from ssea.bitcore import Genotype, InvalidStateError, Population, hamming_weight, make_rng
from ssea.operators import (INVERSE_ELITIST, RLS, SBM, UNIFORM, Selection, SelectionPolicy, mutate,
                            replace_worst, select_parent)

TRIALS = 100_000


def pop_of(fitness):
    pop = Population()
    for i, f in enumerate(fitness):
        pop.add(Genotype(i, 8), f)
    return pop


def frequencies(pop, policy, seed=0, trials=TRIALS):
    rng = make_rng(seed)
    c = Counter(select_parent(pop, policy, rng) for _ in range(trials))
    return [c[i] / trials for i in range(len(pop))]


def test_rls_single_flip_uniform():
    rng = make_rng(1)
    x = Genotype.from_string("0000")
    c = Counter(str(mutate(x, RLS, rng)) for _ in range(TRIALS))
    assert set(c) == {"1000", "0100", "0010", "0001"}
    for v in c.values():
        assert abs(v / TRIALS - 0.25) <= 0.02


def test_sbm_flip_count_and_copy_rate():
    rng = make_rng(2)
    x = Genotype.zeros(100)
    flips = [hamming_weight(mutate(x, SBM, rng)) for _ in range(TRIALS)]
    assert abs(sum(flips) / TRIALS - 1.0) <= 0.03
    copy_rate = flips.count(0) / TRIALS
    assert abs(copy_rate - (1 - 1 / 100) ** 100) <= 0.01


def test_uniform_selection():
    for p in frequencies(pop_of([1, 2, 3]), UNIFORM):
        assert abs(p - 1 / 3) <= 0.02


def test_inverse_tournament_k2():
    p = frequencies(pop_of([1, 2, 3]), SelectionPolicy(Selection.INVERSE_TOURNAMENT, 2))
    assert abs(p[0] - 5 / 9) <= 0.02
    assert abs(p[1] - 3 / 9) <= 0.02
    assert abs(p[2] - 1 / 9) <= 0.02


def test_inverse_elitist_ties():
    p = frequencies(pop_of([1, 1, 3]), INVERSE_ELITIST)
    assert abs(p[0] - 0.5) <= 0.02 and abs(p[1] - 0.5) <= 0.02 and p[2] == 0


def test_k1_tournaments_are_uniform():
    for kind in (Selection.TOURNAMENT, Selection.INVERSE_TOURNAMENT):
        a = [select_parent(pop_of([1, 2, 3]), SelectionPolicy(kind, 1), make_rng(9)) for _ in range(1)]
        b = [select_parent(pop_of([1, 2, 3]), UNIFORM, make_rng(9)) for _ in range(1)]
        assert a == b


def test_tournament_mirror_image():
    fit = [10, 20, 30, 40, 50]
    k = 3
    fwd = frequencies(pop_of(fit), SelectionPolicy(Selection.TOURNAMENT, k), seed=4)
    inv = frequencies(pop_of(fit), SelectionPolicy(Selection.INVERSE_TOURNAMENT, k), seed=5)
    for r in range(5):
        assert abs(fwd[r] - inv[4 - r]) <= 0.02


def test_tournament_ties_uniform_among_entrants():
    # two members tie at the minimum: each wins half of the time
    p = frequencies(pop_of([1, 1, 5, 5]), SelectionPolicy(Selection.INVERSE_TOURNAMENT, 3), seed=6)
    exact_min = 1 - (2 / 4) ** 3
    assert abs(p[0] + p[1] - exact_min) <= 0.01
    assert abs(p[0] - p[1]) <= 0.01


def test_inverse_tournament_worst_subset_probability():
    mu, L, k = 8, 3, 4
    p = frequencies(pop_of([0] * L + [5] * (mu - L)), SelectionPolicy(Selection.INVERSE_TOURNAMENT, k), seed=8)
    assert abs(sum(p[:L]) - (1 - ((mu - L) / mu) ** k)) <= 0.01


def test_empty_population_rejected():
    with pytest.raises(InvalidStateError):
        select_parent(Population(), UNIFORM, make_rng(0))


def test_bad_tournament_size():
    with pytest.raises(ValueError):
        SelectionPolicy(Selection.TOURNAMENT, 0)


def removal_frequencies(fitness, child_fitness, trials=20_000, seed=0):
    rng = make_rng(seed)
    c = Counter()
    for _ in range(trials):
        pop = pop_of(fitness)
        c[replace_worst(pop, Genotype(255, 8), child_fitness, rng)] += 1
    return {k: v / trials for k, v in c.items()}


def test_replace_worst_examples():
    f = removal_frequencies([3, 1, 2], 1)
    assert set(f) == {1, 3} and abs(f[1] - 0.5) < 0.02
    assert removal_frequencies([3, 3, 3], 0) == {3: 1.0}
    f = removal_frequencies([1, 1, 1], 1)
    assert set(f) == {0, 1, 2, 3}
    for v in f.values():
        assert abs(v - 0.25) < 0.02


def test_replace_worst_elitism_property():
    rng = make_rng(12)
    for _ in range(2000):
        fit = [int(v) for v in rng.integers(0, 5, size=5)]
        pop = pop_of(fit)
        child = int(rng.integers(0, 6))
        before_max = max(fit)
        removed = replace_worst(pop, Genotype(255, 8), child, rng)
        assert len(pop) == 5
        removed_value = child if removed == 5 else fit[removed]
        assert removed_value == min(fit + [child])
        assert pop.max_fitness() >= before_max
