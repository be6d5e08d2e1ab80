"""The compiled lumped kernels against the reference engines."""

from collections import Counter

import numpy as np
import pytest

from ssea.benchmarks import TwoGradientsProblem, TwoMaxProblem
from ssea.bitcore import make_rng
from ssea.engines import EngineKind
from ssea.harness import (BOTH_FOUND, MAX_EVALUATIONS, TIMEOUT, Cell, fast_forward_inverse_tournament,
                          run_generic, run_twogradients_kernel, run_twomax_kernel)
from ssea.operators import MutationPolicy, SelectionPolicy


def cell(problem, n, sel="uniform", k=1, mut="sbm", mu=1, engine=EngineKind.STEADY_STATE):
    return Cell(problem, n, "-", engine, SelectionPolicy.parse(sel, k), MutationPolicy.parse(mut), mu)


def tvd(a, b, runs):
    keys = set(a) | set(b)
    return sum(abs(a[x] - b[x]) for x in keys) / (2 * runs)


def distributions(problem, c, runs, kernel, budget):
    ka, ga = Counter(), Counter()
    for s in range(runs):
        ka[kernel(problem, c, 10_000 + s, budget)[0]] += 1
        ga[run_generic(problem, c, 20_000 + s, budget, "peaks")[0]] += 1
    return ka, ga


CASES = [
    ("twomax", TwoMaxProblem(12), cell("twomax", 12, "inv-elitist", 1, "sbm", 4)),
    ("twomax", TwoMaxProblem(12), cell("twomax", 12, "inv-tournament", 3, "rls", 4)),
    ("twomax", TwoMaxProblem(12), cell("twomax", 12, "tournament", 2, "sbm", 4)),
    ("twomax", TwoMaxProblem(12), cell("twomax", 12, mu=3, engine=EngineKind.CROWDING)),
    ("truncated", TwoMaxProblem(16, 5), cell("truncated-twomax", 16, "inv-elitist", 1, "rls", 6)),
    ("truncated", TwoMaxProblem(16, 5), cell("truncated-twomax", 16, mu=6)),
    ("tg", TwoGradientsProblem(30), cell("twogradients", 30, "inv-tournament", 3, "sbm", 4)),
    ("tg", TwoGradientsProblem(30), cell("twogradients", 30, "inv-elitist", 1, "sbm", 4)),
    ("tg", TwoGradientsProblem(30), cell("twogradients", 30, engine=EngineKind.ONE_PLUS_ONE)),
]


@pytest.mark.parametrize("family,problem,c", CASES, ids=[f"{f}-{c.selection.label}-{c.engine.value}"
                                                        for f, _, c in CASES])
def test_kernel_matches_reference(family, problem, c):
    runs = 500
    if family == "tg":
        ka, ga = distributions(problem, c, runs, run_twogradients_kernel, 200_000)
    else:
        ka, ga = distributions(problem, c, runs, run_twomax_kernel, 200_000)
    assert tvd(ka, ga, runs) < 0.1, (ka, ga)


FROZEN_TWOMAX = ["SinglePeak(AllOnes)", "SinglePeak(AllZeros)", "SinglePeak(AllZeros)", "SinglePeak(AllZeros)",
                 "SinglePeak(AllOnes)", "SinglePeak(AllOnes)", "SinglePeak(AllZeros)", "SinglePeak(AllZeros)"]
FROZEN_TG = ("ConvergedOpt", {"OPT": 427}, 481)


def test_kernel_frozen_runs():
    p = TwoMaxProblem(40)
    c = cell("twomax", 40, "inv-elitist", 1, "sbm", 10)
    assert run_twomax_kernel(p, c, 1, 10 ** 6) == run_twomax_kernel(p, c, 1, 10 ** 6)
    out = [run_twomax_kernel(p, c, s, 10 ** 6)[0] for s in range(8)]
    assert out == FROZEN_TWOMAX


def test_twogradients_kernel_deterministic():
    p = TwoGradientsProblem(100)
    c = cell("twogradients", 100, "inv-tournament", 2, "sbm", 8)
    a = run_twogradients_kernel(p, c, 5, MAX_EVALUATIONS)
    assert a == run_twogradients_kernel(p, c, 5, MAX_EVALUATIONS)
    assert a == FROZEN_TG


def test_budget_is_respected():
    p = TwoMaxProblem(100)
    outcome, hits, t = run_twomax_kernel(p, cell("twomax", 100, mu=50), 3, 120)
    assert outcome == "BudgetExhausted" and t == 120


def test_inverse_elitist_deadlock_is_timeout():
    # a single-member IE population stuck on LOC never leaves it
    p = TwoGradientsProblem(30)
    c = cell("twogradients", 30, "inv-elitist", 1, "sbm", 2)
    outcomes = Counter(run_twogradients_kernel(p, c, s, MAX_EVALUATIONS)[0] for s in range(200))
    assert outcomes[TIMEOUT] > 0
    assert set(outcomes) <= {TIMEOUT, BOTH_FOUND, "ConvergedOpt", "ConvergedLoc"}


def test_fast_forward_waiting_time():
    rng = make_rng(11)
    draws = np.array([fast_forward_inverse_tournament(2, 4, 2, rng) for _ in range(40_000)])
    assert draws.min() >= 1
    assert abs(draws.mean() - 4.0) < 0.1
    assert fast_forward_inverse_tournament(0, 4, 2, rng) == 1
    with pytest.raises(ValueError):
        fast_forward_inverse_tournament(4, 4, 2, rng)


def test_fast_forward_overflow_is_timeout():
    rng = make_rng(0)
    assert fast_forward_inverse_tournament(1999, 2000, 10, rng) == MAX_EVALUATIONS


def test_fast_forward_preserves_hitting_times():
    # unpaired seeds: the skip must leave the law of the both-found time intact
    from scipy.stats import ks_2samp

    p = TwoGradientsProblem(30)
    c = cell("twogradients", 30, "inv-tournament", 6, "sbm", 30)
    on = [run_twogradients_kernel(p, c, s, MAX_EVALUATIONS, True) for s in range(1500)]
    off = [run_twogradients_kernel(p, c, 50_000 + s, MAX_EVALUATIONS, False) for s in range(1500)]
    t_on = [r[2] for r in on if r[0] == BOTH_FOUND]
    t_off = [r[2] for r in off if r[0] == BOTH_FOUND]
    assert ks_2samp(t_on, t_off).pvalue > 0.01
