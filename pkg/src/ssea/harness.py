"""Experiment orchestration: outcome detection, run grids and TSV output.

Runs on TwoMax, TruncatedTwoMax and TwoGradients go through the compiled
simulators in :mod:`ssea.kernels`; everything else (and ``(1+lambda)``)
runs on the reference engines with an observer that detects the outcome.
"""

from __future__ import annotations

import itertools
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels as K
from .benchmarks import LOC, OPT, Problem, RidgeProblem, TwoGradientsProblem, TwoMaxProblem, DESIGNATED, RIDGE_END
from .bitcore import Population, derive_seed, hamming_weight, make_rng
from .engines import EngineConfig, EngineKind, IterationEvent, run_engine
from .instances import BestKnownTable, MaxSatProblem, MkpInstance, MkpProblem, normalized_fitness
from .operators import Mutation, MutationPolicy, Selection, SelectionPolicy, UNIFORM

Z95 = 1.959964
MAX_EVALUATIONS = (1 << 63) - 1

BOTH_FOUND = "BothFound"
CONVERGED_OPT = "ConvergedOpt"
CONVERGED_LOC = "ConvergedLoc"
TIMEOUT = "Timeout"
BUDGET_EXHAUSTED = "BudgetExhausted"


def single_peak(label: str) -> str:
    return f"SinglePeak({label})"


def solved_at(t: int) -> str:
    return f"SolvedAt({t})"


def best_fitness(v: Optional[int]) -> str:
    return f"BestFitness({'none' if v is None else v})"


# ------------------------------------------------------------------ records


@dataclass(frozen=True)
class ProportionCI:
    successes: int
    trials: int
    point: Fraction
    lower: float
    upper: float


def wilson_interval(successes: int, trials: int, z: float = Z95) -> ProportionCI:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("Wilson interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    p = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lower = 0.0 if successes == 0 else max(0.0, centre - half)
    upper = 1.0 if successes == trials else min(1.0, centre + half)
    return ProportionCI(successes, trials, Fraction(successes, trials), lower, upper)


@dataclass
class RunRecord:
    cell: "Cell"
    run_index: int
    seed: int
    outcome: str
    first_hits: dict[str, int] = field(default_factory=dict)
    evaluations: int = 0
    best: Optional[int] = None

    @property
    def outcome_kind(self) -> str:
        return self.outcome.split("(", 1)[0]

    def tsv(self) -> str:
        hits = ",".join(f"{k}={v}" for k, v in sorted(self.first_hits.items())) or "-"
        return "\t".join([*self.cell.fields(), str(self.run_index), str(self.seed),
                          str(self.evaluations), hits, self.outcome])


RUN_HEADER = ["problem", "n", "k_or_l", "engine", "selection", "K", "mutation", "mu",
              "run", "seed", "evaluations", "first_hits", "outcome"]


# ----------------------------------------------------------- outcome trackers


class TwoMaxTracker:
    """Observer for the TwoMax family.

    Records the first construction of each peak (any evaluated genotype
    counts) and stops on BothFound, or on SinglePeak once every member sits
    on a peak while only one peak was ever seen.
    """

    def __init__(self, problem: TwoMaxProblem, mu: int, selection: SelectionPolicy = UNIFORM,
                 steady_state: bool = True):
        self.problem = problem
        self.mu = mu
        self.first_hits: dict[str, int] = {}
        self.outcome: Optional[str] = None
        # inverse elitist deadlocks once the truncated plateau holds every worst member
        self.watch_plateau = (problem.truncated and steady_state
                              and selection.kind is Selection.INVERSE_ELITIST)

    def check(self, pop: Population) -> bool:
        if len(self.first_hits) == 2:
            self.outcome = BOTH_FOUND
        elif self.first_hits and all(self.problem.peaks(x) for x in pop.genotypes):
            self.outcome = single_peak(next(iter(self.first_hits)))
        elif self.watch_plateau and self._plateau_deadlock(pop):
            self.outcome = TIMEOUT
        return self.outcome is not None

    def _plateau_deadlock(self, pop: Population) -> bool:
        left = self.problem.left_weight
        return all(hamming_weight(pop.genotypes[i]) == left for i in pop.argmins())

    def __call__(self, ev: IterationEvent) -> bool:
        labels = self.problem.peaks(ev.offspring)
        for label in labels:
            self.first_hits.setdefault(label, ev.evaluations)
        if ev.parent is None and len(ev.population) < self.mu:
            return False
        # the population can only become all-peak when a peak offspring enters
        if labels or ev.parent is None or self.watch_plateau:
            return self.check(ev.population)
        return False

    def finish(self) -> str:
        return self.outcome or BUDGET_EXHAUSTED


def detect_twomax_outcome(events: Iterable[IterationEvent], problem: TwoMaxProblem, mu: int,
                          policy: SelectionPolicy = UNIFORM) -> tuple[str, dict[str, int]]:
    tracker = TwoMaxTracker(problem, mu, policy)
    for ev in events:
        if tracker(ev):
            break
    return tracker.finish(), tracker.first_hits


class TwoGradientsTracker:
    """Observer for TwoGradients implementing the four terminal rules."""

    def __init__(self, problem: TwoGradientsProblem, mu: int, selection: SelectionPolicy = UNIFORM,
                 steady_state: bool = True):
        self.problem = problem
        self.mu = mu
        self.selection = selection
        self.steady_state = steady_state
        self.first_hits: dict[str, int] = {}
        self.outcome: Optional[str] = None

    def __call__(self, ev: IterationEvent) -> bool:
        for label in self.problem.peaks(ev.offspring):
            self.first_hits.setdefault(label, ev.evaluations)
        if ev.parent is None and len(ev.population) < self.mu:
            return False
        return self.check(ev.population, ev.evaluations)

    def check(self, pop: Population, evaluations: int) -> bool:
        p = self.problem
        if OPT in self.first_hits and LOC in self.first_hits:
            self.outcome = BOTH_FOUND
        elif all(f == p.opt_value for f in pop.fitness):
            self.outcome = CONVERGED_OPT
        elif all(f == p.loc_value for f in pop.fitness):
            self.outcome = CONVERGED_LOC
        elif evaluations >= MAX_EVALUATIONS:
            self.outcome = TIMEOUT
        elif (self.steady_state and self.selection.kind is Selection.INVERSE_ELITIST
              and pop.min_fitness() == p.loc_value):
            # trap copies are the unique worst: never chosen, never removed
            self.outcome = TIMEOUT
        return self.outcome is not None

    def finish(self) -> str:
        return self.outcome or BUDGET_EXHAUSTED


def detect_twogradients_outcome(events: Iterable[IterationEvent], problem: TwoGradientsProblem,
                                mu: int, policy: SelectionPolicy = UNIFORM) -> tuple[str, dict[str, int]]:
    tracker = TwoGradientsTracker(problem, mu, policy)
    for ev in events:
        if tracker(ev):
            break
    return tracker.finish(), tracker.first_hits


class SolveTracker:
    """MaxSat: first evaluation reaching ``target``; otherwise best feasible value."""

    def __init__(self, target: Optional[int] = None):
        self.target = target
        self.solved: Optional[int] = None
        self.best: Optional[int] = None

    def __call__(self, ev: IterationEvent) -> bool:
        f = ev.fitness
        if f >= 0 and (self.best is None or f > self.best):
            self.best = f
        if self.target is not None and f >= self.target and self.solved is None:
            self.solved = ev.evaluations
            return True
        return False

    def outcome(self) -> str:
        if self.target is not None:
            return solved_at(self.solved) if self.solved is not None else BUDGET_EXHAUSTED
        return best_fitness(self.best)


def solve_tracking(events: Iterable[IterationEvent], problem: Problem, target: Optional[int]) -> str:
    tracker = SolveTracker(target)
    for ev in events:
        if tracker(ev):
            break
    return tracker.outcome()


class LabelTracker:
    """First hits of every peak label; stops once ``stop_label`` is built."""

    def __init__(self, problem: Problem, stop_label: Optional[str]):
        self.problem = problem
        self.stop_label = stop_label
        self.first_hits: dict[str, int] = {}
        self.best: Optional[int] = None

    def __call__(self, ev: IterationEvent) -> bool:
        if self.best is None or ev.fitness > self.best:
            self.best = ev.fitness
        for label in self.problem.peaks(ev.offspring):
            self.first_hits.setdefault(label, ev.evaluations)
        return self.stop_label is not None and self.stop_label in self.first_hits


def fast_forward_inverse_tournament(trapped: int, mu: int, k: int, rng) -> int:
    """Iterations until a size-``k`` tournament avoids all ``trapped`` members.

    Returns ``G ~ Geometric(((mu - trapped) / mu) ** k)``: ``G - 1`` iterations
    leave the population unchanged and the ``G``-th draws its tournament from
    the untrapped members only.  Returns ``MAX_EVALUATIONS`` (Timeout) when the
    wait does not fit in a signed 64-bit counter.
    """
    if not 0 <= trapped < mu:
        raise ValueError("fast-forward needs at least one untrapped member")
    g = K.geometric_trials(((mu - trapped) / mu) ** k, rng)
    return MAX_EVALUATIONS if g >= MAX_EVALUATIONS else int(g)


# --------------------------------------------------------------- experiment


FAMILIES = ("twomax", "truncated-twomax", "ridge", "twogradients", "maxsat", "mkp")
STOP_RULES = {
    "twomax": ("peaks",),
    "truncated-twomax": ("peaks",),
    "twogradients": ("peaks",),
    "ridge": ("target", "budget"),
    "maxsat": ("solve", "budget"),
    "mkp": ("budget",),
}


@dataclass(frozen=True)
class ProblemSpec:
    family: str
    n: int = 0
    k: Optional[int] = None          # truncation height or ridge parameter
    j: Optional[int] = None
    scale: str = "full"
    instances: tuple = ()            # (id, MaxSatProblem | MkpInstance)

    def build(self, instance=None) -> Problem:
        if self.family == "twomax":
            return TwoMaxProblem(self.n)
        if self.family == "truncated-twomax":
            return TwoMaxProblem(self.n, self.k)
        if self.family == "ridge":
            return RidgeProblem(self.k, self.j, self.scale)
        if self.family == "twogradients":
            return TwoGradientsProblem(self.n)
        if self.family == "maxsat":
            return instance
        if self.family == "mkp":
            return MkpProblem(instance)
        raise ValueError(f"unknown problem family {self.family!r}")

    @property
    def param(self) -> str:
        if self.family == "truncated-twomax":
            return str(self.k)
        if self.family == "twomax":
            return str(self.n // 2)
        if self.family == "ridge":
            return str(self.k)
        if self.family == "twogradients":
            return str(TwoGradientsProblem(self.n).ell)
        return "-"


@dataclass(frozen=True)
class Cell:
    problem: str
    n: int
    param: str
    engine: EngineKind
    selection: SelectionPolicy
    mutation: MutationPolicy
    mu: int
    lam: int = 1
    instance: str = ""
    baseline: bool = False

    @property
    def engine_label(self) -> str:
        if self.baseline:
            return "parallel-oneplusone"
        if self.engine is EngineKind.ONE_PLUS_LAMBDA:
            return f"onepluslambda-{self.lam}"
        return self.engine.value

    def fields(self) -> list[str]:
        sel = self.selection
        return [self.instance or self.problem, str(self.n), self.param, self.engine_label,
                sel.kind.value, str(sel.k), self.mutation.kind.value, str(self.mu)]

    @property
    def key(self) -> str:
        return "|".join(self.fields())


@dataclass
class ExperimentSpec:
    problem: ProblemSpec
    mu: Sequence[int] = (1,)
    selections: Sequence[SelectionPolicy] = (UNIFORM,)
    mutations: Sequence[MutationPolicy] = (MutationPolicy(),)
    engines: Sequence[EngineKind] = (EngineKind.STEADY_STATE,)
    lam: int = 1
    runs: int = 1
    seed: int = 0
    budget: Optional[int] = None
    stop: Optional[str] = None
    out: Optional[str] = None
    fast_forward: bool = True
    baseline: bool = False
    checkpoints: Optional[Sequence[int]] = None
    best_known: Optional[str] = None
    threads: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.problem.family not in FAMILIES:
            raise ValueError(f"unknown problem family {self.problem.family!r}")
        if self.stop is None:
            self.stop = STOP_RULES[self.problem.family][0]
        elif self.stop not in STOP_RULES[self.problem.family]:
            raise ValueError(f"stop rule {self.stop!r} not available for {self.problem.family}")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")
        if not self.mu or any(m < 1 for m in self.mu):
            raise ValueError("mu values must be positive")

    def cells(self) -> list[Cell]:
        prob = self.problem
        instances = [iid for iid, _ in prob.instances] or [""]
        n = prob.n
        out: list[Cell] = []
        seen = set()
        for inst, eng, sel, mut, mu in itertools.product(instances, self.engines, self.selections,
                                                         self.mutations, self.mu):
            if eng is not EngineKind.STEADY_STATE:
                sel = UNIFORM
            if eng in (EngineKind.ONE_PLUS_ONE, EngineKind.ONE_PLUS_LAMBDA):
                mu = 1
            if inst:
                n = dict(prob.instances)[inst].n
            cell = Cell(prob.family, n, prob.param, eng, sel, mut, mu,
                        self.lam if eng is EngineKind.ONE_PLUS_LAMBDA else 1, inst)
            if cell not in seen:
                seen.add(cell)
                out.append(cell)
        if self.baseline:
            for inst, mut, mu in itertools.product(instances, self.mutations, self.mu):
                if inst:
                    n = dict(prob.instances)[inst].n
                cell = Cell(prob.family, n, prob.param, EngineKind.ONE_PLUS_ONE, UNIFORM, mut, mu,
                            1, inst, baseline=True)
                if cell not in seen:
                    seen.add(cell)
                    out.append(cell)
        return out

    def budget_for(self, cell: Cell) -> int:
        if self.budget is not None:
            return self.budget
        return default_budget(self.problem.family, cell.n, cell.mu)


def default_budget(family: str, n: int, mu: int) -> int:
    if family in ("twomax", "truncated-twomax"):
        return max(mu + 1, math.ceil(200 * mu * n * math.log(max(n, 2))))
    if family == "twogradients":
        return MAX_EVALUATIONS
    return 10 ** 6


# ----------------------------------------------------------------- one run


_SEL_CODES = {
    Selection.UNIFORM: K.SEL_UNIFORM,
    Selection.TOURNAMENT: K.SEL_TOURNAMENT,
    Selection.INVERSE_TOURNAMENT: K.SEL_INVERSE_TOURNAMENT,
    Selection.INVERSE_ELITIST: K.SEL_INVERSE_ELITIST,
}


def _kernel_codes(cell: Cell):
    sel = cell.selection
    code = _SEL_CODES[sel.kind]
    if sel.k == 1 and code in (K.SEL_TOURNAMENT, K.SEL_INVERSE_TOURNAMENT):
        code = K.SEL_UNIFORM
    mut = K.MUT_RLS if cell.mutation.kind is Mutation.ONE_BIT else K.MUT_SBM
    # the (1+1) EA is crowding with a single member
    eng = K.ENG_STEADY if cell.engine is EngineKind.STEADY_STATE else K.ENG_CROWDING
    return code, sel.k, mut, eng


def uses_kernel(family: str, cell: Cell) -> bool:
    return family in ("twomax", "truncated-twomax", "twogradients") and \
        cell.engine is not EngineKind.ONE_PLUS_LAMBDA


def run_twomax_kernel(problem: TwoMaxProblem, cell: Cell, seed: int, budget: int,
                      fast_forward: bool = True, dstats: Optional[np.ndarray] = None):
    n = problem.n
    fit_w = np.array([problem.value_at_weight(w) for w in range(n + 1)], dtype=np.int64)
    sel, k, mut, eng = _kernel_codes(cell)
    if dstats is None:
        dstats = np.zeros(4, np.int64)
    code, hl, hr, t = K.unitation_run(n, cell.mu, fit_w, problem.left_weight, n, problem.truncated,
                                      sel, k, mut, eng, budget, fast_forward, make_rng(seed), dstats)
    left, right = problem.peak_labels()
    hits = {}
    if hl >= 0:
        hits[left] = int(hl)
    if hr >= 0:
        hits[right] = int(hr)
    outcome = {K.BOTH: BOTH_FOUND, K.SINGLE_LEFT: single_peak(left), K.SINGLE_RIGHT: single_peak(right),
               K.TIMEOUT: TIMEOUT, K.BUDGET: BUDGET_EXHAUSTED}[code]
    return outcome, hits, int(t)


def run_twogradients_kernel(problem: TwoGradientsProblem, cell: Cell, seed: int, budget: int,
                            fast_forward: bool = True):
    sel, k, mut, eng = _kernel_codes(cell)
    code, ho, hl, t = K.twogradients_run(problem.n, problem.ell, problem.m, problem.threshold, cell.mu,
                                         sel, k, mut, eng, budget, fast_forward, make_rng(seed))
    hits = {}
    if ho >= 0:
        hits[OPT] = int(ho)
    if hl >= 0:
        hits[LOC] = int(hl)
    outcome = {K.BOTH: BOTH_FOUND, K.CONVERGED_OPT: CONVERGED_OPT, K.CONVERGED_LOC: CONVERGED_LOC,
               K.TIMEOUT: TIMEOUT, K.BUDGET: BUDGET_EXHAUSTED}[code]
    return outcome, hits, int(t)


def _config(cell: Cell, budget: int) -> EngineConfig:
    return EngineConfig(mu=cell.mu, selection=cell.selection, mutation=cell.mutation, budget=budget,
                        kind=cell.engine, lam=cell.lam)


def run_generic(problem: Problem, cell: Cell, seed: int, budget: int, stop: str,
                target: Optional[int] = None):
    """Reference-engine run; returns ``(outcome, first_hits, evaluations, best)``."""
    rng = make_rng(seed)
    config = _config(cell, budget)
    if isinstance(problem, TwoMaxProblem):
        tracker = TwoMaxTracker(problem, config.mu, cell.selection, cell.engine is EngineKind.STEADY_STATE)
        res = run_engine(config, problem, rng, tracker)
        return tracker.finish(), tracker.first_hits, res.evaluations, None
    if isinstance(problem, TwoGradientsProblem):
        tg = TwoGradientsTracker(problem, config.mu, cell.selection, cell.engine is EngineKind.STEADY_STATE)
        res = run_engine(config, problem, rng, tg)
        return tg.finish(), tg.first_hits, res.evaluations, None
    if isinstance(problem, RidgeProblem):
        label = None
        if stop == "target":
            label = DESIGNATED if problem.j is not None else RIDGE_END
        lt = LabelTracker(problem, label)
        res = run_engine(config, problem, rng, lt)
        if label is not None and label in lt.first_hits:
            outcome = solved_at(lt.first_hits[label])
        elif label is None:
            outcome = best_fitness(res.best[1])
        else:
            outcome = BUDGET_EXHAUSTED
        return outcome, lt.first_hits, res.evaluations, res.best[1]
    st = SolveTracker(target if stop == "solve" else None)
    res = run_engine(config, problem, rng, st)
    return st.outcome(), {}, res.evaluations, st.best


def run_parallel_baseline(problem: Problem, cell: Cell, seed: int, budget: int, stop: str,
                          target: Optional[int] = None):
    """``mu`` independent (1+1) EAs, each with ``budget // mu`` evaluations.

    Runs are interleaved round-robin, so a run solving at its own evaluation
    ``t`` solves the ensemble at ``mu * (t - 1) + rank``; the best value is
    the maximum over all runs.
    """
    share = budget // cell.mu
    if share < 1:
        raise ValueError(f"budget {budget} too small for {cell.mu} parallel runs")
    single = Cell(cell.problem, cell.n, cell.param, EngineKind.ONE_PLUS_ONE, UNIFORM, cell.mutation, 1)
    solved = None
    best = None
    used = 0
    for r in range(cell.mu):
        sub_seed = derive_seed(seed, r, "parallel")
        st = SolveTracker(target if stop == "solve" else None)
        res = run_engine(_config(single, share), problem, make_rng(sub_seed), st)
        used += res.evaluations
        if st.best is not None and (best is None or st.best > best):
            best = st.best
        if st.solved is not None:
            t = cell.mu * (st.solved - 1) + r + 1
            solved = t if solved is None else min(solved, t)
    if stop == "solve":
        outcome = solved_at(solved) if solved is not None else BUDGET_EXHAUSTED
        evaluations = solved if solved is not None else used
    else:
        outcome = best_fitness(best)
        evaluations = used
    return outcome, {}, evaluations, best


@dataclass(frozen=True)
class _Task:
    spec_problem: ProblemSpec
    cell: Cell
    run_index: int
    seed: int
    budget: int
    stop: str
    fast_forward: bool


def execute(task: _Task) -> RunRecord:
    cell, prob = task.cell, task.spec_problem
    try:
        inst = dict(prob.instances).get(cell.instance) if cell.instance else None
        problem = prob.build(inst)
        best = None
        if cell.baseline:
            target = problem.target if isinstance(problem, MaxSatProblem) else None
            outcome, hits, t, best = run_parallel_baseline(problem, cell, task.seed, task.budget, task.stop, target)
        elif uses_kernel(prob.family, cell) and isinstance(problem, TwoMaxProblem):
            outcome, hits, t = run_twomax_kernel(problem, cell, task.seed, task.budget, task.fast_forward)
        elif uses_kernel(prob.family, cell):
            outcome, hits, t = run_twogradients_kernel(problem, cell, task.seed, task.budget, task.fast_forward)
        else:
            target = problem.target if isinstance(problem, MaxSatProblem) else None
            outcome, hits, t, best = run_generic(problem, cell, task.seed, task.budget, task.stop, target)
    except Exception as exc:
        raise RuntimeError(f"run failed in cell {cell.key} run {task.run_index} seed {task.seed}: {exc}") from exc
    return RunRecord(cell, task.run_index, task.seed, outcome, hits, t, best)


def tasks_for(spec: ExperimentSpec) -> list[_Task]:
    tasks = []
    for cell in spec.cells():
        for r in range(spec.runs):
            tasks.append(_Task(spec.problem, cell, r, derive_seed(spec.seed, r, cell.key),
                               spec.budget_for(cell), spec.stop, spec.fast_forward))
    return tasks


def run_grid(spec: ExperimentSpec, threads: Optional[int] = None, progress=None) -> list[RunRecord]:
    """Execute every run of every cell; records come back ordered by (cell, run)."""
    tasks = tasks_for(spec)
    threads = threads or spec.threads or 1
    if threads > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("spawn" if os.name == "nt" else "fork")
        with ctx.Pool(threads) as pool:
            records = []
            for rec in pool.imap(execute, tasks, chunksize=max(1, len(tasks) // (threads * 8))):
                records.append(rec)
                if progress:
                    progress(rec)
        return records
    records = []
    for task in tasks:
        rec = execute(task)
        records.append(rec)
        if progress:
            progress(rec)
    return records


# ------------------------------------------------------------------ tables


SUCCESS_HEADER = ["problem", "n", "k_or_l", "engine", "selection", "K", "mutation", "mu", "runs",
                  "both", "single_left", "single_right", "timeout", "p_both", "ci_low", "ci_high",
                  "budget_exhausted"]

NP_HEADER = ["instance", "engine", "selection", "K", "mu", "seed", "solved_at_or_budget",
             "best_fitness", "normalized_fitness"]


def _group(records: Sequence[RunRecord]) -> dict[Cell, list[RunRecord]]:
    out: dict[Cell, list[RunRecord]] = {}
    for rec in records:
        out.setdefault(rec.cell, []).append(rec)
    return out


def _left_right(family: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    if family == "twogradients":
        return (CONVERGED_OPT,), (CONVERGED_LOC,)
    return (single_peak("AllZeros"), single_peak("LeftPeak")), (single_peak("AllOnes"), single_peak("GlobalPeak"))


def success_table(records: Sequence[RunRecord], family: str) -> list[list[str]]:
    """One row per cell.  For TwoGradients ``single_left``/``single_right``
    count ConvergedOpt/ConvergedLoc."""
    left, right = _left_right(family)
    rows = []
    for cell, recs in _group(records).items():
        outs = [r.outcome for r in recs]
        both = outs.count(BOTH_FOUND)
        ci = wilson_interval(both, len(recs))
        rows.append([*cell.fields(), str(len(recs)), str(both),
                     str(sum(o in left for o in outs)), str(sum(o in right for o in outs)),
                     str(outs.count(TIMEOUT)), f"{float(ci.point):.6f}", f"{ci.lower:.6f}", f"{ci.upper:.6f}",
                     str(outs.count(BUDGET_EXHAUSTED))])
    return rows


def default_checkpoints(records: Sequence[RunRecord]) -> list[int]:
    top = max([r.evaluations for r in records] + [1])
    out = []
    e = 0
    while True:
        for m in (1, 2, 5):
            c = m * 10 ** e
            out.append(c)
            if c >= top:
                return out
        e += 1


def time_series(records: Sequence[RunRecord], family: str, checkpoints: Optional[Sequence[int]] = None):
    """Cumulative proportion of runs that have built both / each peak by each checkpoint."""
    cps = list(checkpoints or default_checkpoints(records))
    if family == "twogradients":
        labels = [("opt", (OPT,)), ("loc", (LOC,))]
    elif family == "truncated-twomax":
        labels = [("left", ("LeftPeak",)), ("right", ("GlobalPeak",))]
    else:
        labels = [("left", ("AllZeros", "LeftPeak")), ("right", ("AllOnes", "GlobalPeak"))]
    groups = _group(records)
    header = ["evaluations"]
    cols = []
    for cell, recs in groups.items():
        header.append(f"{cell.key}:both")
        both_t = [max(r.first_hits.values()) for r in recs if r.outcome == BOTH_FOUND]
        cols.append((both_t, len(recs)))
        for name, labs in labels:
            header.append(f"{cell.key}:{name}")
            ts = [min(r.first_hits[x] for x in labs if x in r.first_hits)
                  for r in recs if any(x in r.first_hits for x in labs)]
            cols.append((ts, len(recs)))
    rows = [header]
    for c in cps:
        rows.append([str(c)] + [f"{sum(t <= c for t in ts) / total:.6f}" for ts, total in cols])
    return rows


def np_table(records: Sequence[RunRecord], spec: ExperimentSpec,
             table: Optional[BestKnownTable] = None) -> tuple[list[list[str]], BestKnownTable]:
    """TSV #3 rows.  Best-known values are raised with every run before any
    normalisation, so the column does not depend on run order.  Infeasible
    finals are reported with normalised fitness 0."""
    table = table if table is not None else BestKnownTable()
    insts = dict(spec.problem.instances)
    for iid, inst in insts.items():
        if isinstance(inst, MkpInstance):
            table.update(iid, inst.declared_optimum)
        elif isinstance(inst, MaxSatProblem):
            table.update(iid, inst.target)
    for rec in records:
        if rec.best is not None:
            table.update(rec.cell.instance, rec.best)
    rows = []
    for rec in records:
        iid = rec.cell.instance
        achieved = rec.best if rec.best is not None and rec.best > 0 else 0
        norm = normalized_fitness(iid, achieved, table) if iid in table else None
        when = rec.outcome[len("SolvedAt("):-1] if rec.outcome.startswith("SolvedAt") else str(rec.evaluations)
        rows.append([iid, rec.cell.engine_label, rec.cell.selection.kind.value, str(rec.cell.selection.k),
                     str(rec.cell.mu), str(rec.seed), when, "-" if rec.best is None else str(rec.best),
                     "-" if norm is None else f"{float(norm):.6f}"])
    return rows, table


def write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def metadata(spec: ExperimentSpec) -> list[list[str]]:
    fam = spec.problem.family
    rows = [
        ["family", fam],
        ["runs", str(spec.runs)],
        ["base_seed", str(spec.seed)],
        ["seed_rule", "SeedSequence(base_seed, spawn_key=(sha256_64(cell), run)).generate_state(1)"],
        ["rng", "numpy Philox"],
        ["stop", spec.stop],
        ["budget", str(spec.budget) if spec.budget is not None else f"default({fam})"],
        ["fast_forward", str(spec.fast_forward).lower()],
    ]
    if fam in ("twomax", "truncated-twomax"):
        rows.append(["default_budget", "ceil(200*mu*n*ln n)"])
        rows.append(["single_peak_rule", "stop once every member sits on a peak and one peak was seen"])
    if fam == "twogradients":
        p = TwoGradientsProblem(spec.problem.n)
        rows.append(["threshold", f"floor(2m/3)={p.threshold} (m={p.m}, exact={str(p.threshold_exact).lower()})"])
        rows.append(["converged_opt_rule", "whole population at optimal fitness"])
        rows.append(["single_left/right", "ConvergedOpt/ConvergedLoc"])
    if fam == "ridge":
        rows.append(["ridge_scale", spec.problem.scale])
    if fam == "mkp":
        rows.append(["infeasible_final", "normalized fitness 0"])
    return rows


def write_outputs(spec: ExperimentSpec, records: Sequence[RunRecord], out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    fam = spec.problem.family
    written = []
    p = out / "runs.tsv"
    with open(p, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(RUN_HEADER) + "\n")
        for rec in records:
            fh.write(rec.tsv() + "\n")
    written.append(p)
    if fam in ("maxsat", "mkp"):
        table = BestKnownTable.load(spec.best_known) if spec.best_known and Path(spec.best_known).exists() else None
        rows, table = np_table(records, spec, table)
        p = out / "instances.tsv"
        write_tsv(p, NP_HEADER, rows)
        written.append(p)
        if spec.best_known:
            table.save(spec.best_known)
    else:
        p = out / "success.tsv"
        write_tsv(p, SUCCESS_HEADER, success_table(records, fam))
        written.append(p)
        if fam != "ridge":
            ts = time_series(records, fam, spec.checkpoints)
            p = out / "timeseries.tsv"
            write_tsv(p, ts[0], ts[1:])
            written.append(p)
    p = out / "meta.tsv"
    write_tsv(p, ["key", "value"], metadata(spec))
    written.append(p)
    return written
