"""``ssea`` command line: run, bench, stats, fitness, parse-check.

Exit status: 0 on success, 2 on usage errors and malformed spec files
(the message names the offending field), 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import harness
from .benchmarks import RidgeProblem, TwoGradientsProblem, TwoMaxProblem
from .bitcore import Genotype
from .engines import EngineKind
from .instances import MaxSatProblem, ParseError, parse_dimacs, parse_orlib_mknap
from .operators import Mutation, MutationPolicy, Selection, SelectionPolicy
from . import stats as st

SELECTIONS = [s.value for s in Selection]
MUTATIONS = [m.value for m in Mutation]
ENGINES = [e.value for e in EngineKind]


class UsageError(Exception):
    pass


class SpecError(UsageError):
    def __init__(self, field: str, message: str, source=None):
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}{field}: {message}")
        self.field = field


# ------------------------------------------------------------ instance files


def data_dir() -> Path:
    return Path(os.environ.get("SSEA_DATA_DIR", "."))


def resolve(path: str, base: Optional[Path] = None) -> Path:
    """Absolute paths as given; relative ones against SSEA_DATA_DIR, then ``base``."""
    p = Path(path)
    if p.is_absolute():
        return p
    candidates = [data_dir() / p]
    if base is not None:
        candidates.append(base / p)
    for c in candidates:
        if c.exists():
            return c
    return candidates[0]


def resolve_arg(path: str) -> Path:
    """Command-line file arguments: as given if present, else under SSEA_DATA_DIR."""
    p = Path(path)
    return p if p.exists() else resolve(path)


def file_kind(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".cnf":
        return "cnf"
    if suffix == ".toml":
        return "spec"
    return "mknap"


def load_cnf(path: Path) -> MaxSatProblem:
    formula = parse_dimacs(path.read_bytes(), source=str(path))
    return MaxSatProblem(formula, path.stem)


def load_mknap(path: Path):
    return parse_orlib_mknap(path.read_bytes(), source=str(path))


def load_instances(family: str, paths: Sequence[Path]) -> tuple:
    out = []
    for p in paths:
        if family == "maxsat":
            inst = load_cnf(p)
            out.append((inst.name, inst))
        else:
            for inst in load_mknap(p):
                out.append((inst.name, inst))
    return tuple(out)


# ----------------------------------------------------------------- specs


def _get(table: dict, key: str, kind, field: str, source, default=None, required=False):
    if key not in table:
        if required:
            raise SpecError(field, "missing", source)
        return default
    value = table[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise SpecError(field, f"expected an integer, got {value!r}", source)
    if kind is bool and not isinstance(value, bool):
        raise SpecError(field, f"expected true/false, got {value!r}", source)
    if kind is str and not isinstance(value, str):
        raise SpecError(field, f"expected a string, got {value!r}", source)
    if kind is list and not isinstance(value, list):
        raise SpecError(field, f"expected a list, got {value!r}", source)
    return value


def _int_list(table, key, field, source, default):
    values = _get(table, key, list, field, source, default)
    if not values or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in values):
        raise SpecError(field, f"expected a non-empty list of positive integers, got {values!r}", source)
    return list(values)


def _choice_list(table, key, field, source, default, choices):
    values = _get(table, key, list, field, source, default)
    if not values or any(v not in choices for v in values):
        raise SpecError(field, f"expected a non-empty list drawn from {choices}, got {values!r}", source)
    return list(values)


def parse_spec(text: str, source: Optional[str] = None, base: Optional[Path] = None) -> harness.ExperimentSpec:
    """Build an :class:`ExperimentSpec` from TOML text; instance files are parsed too."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SpecError("syntax", str(exc), source) from None
    known = {"experiment", "problem", "grid"}
    for key in doc:
        if key not in known:
            raise SpecError(key, "unknown section", source)
    exp = doc.get("experiment", {})
    prob = doc.get("problem")
    grid = doc.get("grid", {})
    if prob is None:
        raise SpecError("problem", "missing section", source)
    for name, table, keys in (
        ("experiment", exp, {"name", "seed", "runs", "budget", "out", "fast_forward", "stop", "checkpoints",
                             "threads", "best_known"}),
        ("problem", prob, {"family", "n", "k", "j", "scale", "instances"}),
        ("grid", grid, {"engine", "mu", "selection", "k", "mutation", "lambda", "baseline"}),
    ):
        for key in table:
            if key not in keys:
                raise SpecError(f"{name}.{key}", "unknown field", source)

    family = _get(prob, "family", str, "problem.family", source, required=True)
    if family not in harness.FAMILIES:
        raise SpecError("problem.family", f"expected one of {harness.FAMILIES}, got {family!r}", source)
    n = _get(prob, "n", int, "problem.n", source, 0)
    k = _get(prob, "k", int, "problem.k", source)
    j = _get(prob, "j", int, "problem.j", source)
    scale = _get(prob, "scale", str, "problem.scale", source, "full")
    instances: tuple = ()
    if family in ("twomax", "truncated-twomax", "twogradients"):
        if n < 2:
            raise SpecError("problem.n", "required (integer >= 2)", source)
    try:
        if family == "twomax":
            TwoMaxProblem(n)
        elif family == "truncated-twomax":
            if k is None:
                raise SpecError("problem.k", "truncated-twomax needs the truncation height k", source)
            TwoMaxProblem(n, k)
        elif family == "twogradients":
            TwoGradientsProblem(n)
        elif family == "ridge":
            if k is None:
                raise SpecError("problem.k", "ridge needs the ridge parameter k", source)
            n = RidgeProblem(k, j, scale).n
    except ValueError as exc:
        raise SpecError("problem", str(exc), source) from None
    if family in ("maxsat", "mkp"):
        files = _get(prob, "instances", list, "problem.instances", source, required=True)
        if not files:
            raise SpecError("problem.instances", "empty list", source)
        paths = [resolve(f, base) for f in files]
        for p in paths:
            if not p.exists():
                raise FileNotFoundError(f"instance file not found: {p}")
        instances = load_instances(family, paths)

    engines = _choice_list(grid, "engine", "grid.engine", source, ["mu1"], ENGINES)
    selections = _choice_list(grid, "selection", "grid.selection", source, ["uniform"], SELECTIONS)
    ks = _int_list(grid, "k", "grid.k", source, [2])
    policies = []
    for s in selections:
        kind = Selection(s)
        if kind in (Selection.TOURNAMENT, Selection.INVERSE_TOURNAMENT):
            policies.extend(SelectionPolicy(kind, kk) for kk in ks)
        else:
            policies.append(SelectionPolicy(kind))
    mutations = [MutationPolicy.parse(m) for m in
                 _choice_list(grid, "mutation", "grid.mutation", source, ["sbm"], MUTATIONS)]
    mus = _int_list(grid, "mu", "grid.mu", source, [1])
    lam = _get(grid, "lambda", int, "grid.lambda", source, 1)
    if lam < 1:
        raise SpecError("grid.lambda", "must be >= 1", source)
    baseline = _get(grid, "baseline", bool, "grid.baseline", source, False)
    if baseline and family not in ("maxsat", "mkp"):
        raise SpecError("grid.baseline", "the parallel (1+1) baseline applies to maxsat/mkp only", source)

    runs = _get(exp, "runs", int, "experiment.runs", source, 1)
    if runs < 1:
        raise SpecError("experiment.runs", f"must be >= 1, got {runs}", source)
    seed = _get(exp, "seed", int, "experiment.seed", source, required=True)
    if seed < 0:
        raise SpecError("experiment.seed", "must be non-negative", source)
    budget = _get(exp, "budget", int, "experiment.budget", source)
    if budget is not None and budget < max(mus):
        raise SpecError("experiment.budget", f"must cover the {max(mus)} initial evaluations", source)
    stop = _get(exp, "stop", str, "experiment.stop", source)
    if stop is not None and stop not in harness.STOP_RULES[family]:
        raise SpecError("experiment.stop", f"expected one of {harness.STOP_RULES[family]} for {family}", source)
    checkpoints = _get(exp, "checkpoints", list, "experiment.checkpoints", source)
    if checkpoints is not None:
        checkpoints = _int_list(exp, "checkpoints", "experiment.checkpoints", source, None)
    threads = _get(exp, "threads", int, "experiment.threads", source, 1)
    if threads < 1:
        raise SpecError("experiment.threads", "must be >= 1", source)
    best_known = _get(exp, "best_known", str, "experiment.best_known", source)
    out = _get(exp, "out", str, "experiment.out", source)
    if best_known and base is not None and not Path(best_known).is_absolute():
        best_known = str(base / best_known)
    return harness.ExperimentSpec(
        problem=harness.ProblemSpec(family, n, k, j, scale, instances),
        mu=mus, selections=policies, mutations=mutations, engines=[EngineKind(e) for e in engines],
        lam=lam, runs=runs, seed=seed, budget=budget, stop=stop, out=out,
        fast_forward=_get(exp, "fast_forward", bool, "experiment.fast_forward", source, True),
        baseline=baseline, checkpoints=checkpoints, best_known=best_known, threads=threads)


def load_spec(path: Path) -> harness.ExperimentSpec:
    if not path.exists():
        raise FileNotFoundError(f"spec file not found: {path}")
    return parse_spec(path.read_text(encoding="utf-8"), source=str(path), base=path.parent)


# --------------------------------------------------------------- commands


def _problem_from_args(args) -> tuple[harness.ProblemSpec, object]:
    fam = args.problem
    if fam in ("maxsat", "mkp"):
        if not args.instance:
            raise UsageError(f"--instance is required for {fam}")
        path = resolve_arg(args.instance)
        if not path.exists():
            raise FileNotFoundError(f"instance file not found: {path}")
        insts = load_instances(fam, [path])
        if args.index < 0 or args.index >= len(insts):
            raise UsageError(f"--index {args.index} out of range ({len(insts)} instances)")
        iid, inst = insts[args.index]
        return harness.ProblemSpec(fam, inst.n, instances=(insts[args.index],)), iid
    if fam == "ridge":
        if args.ridge_k is None:
            raise UsageError("--ridge-k is required for ridge")
        p = RidgeProblem(args.ridge_k, args.j, args.scale)
        return harness.ProblemSpec(fam, p.n, args.ridge_k, args.j, args.scale), ""
    if args.n is None:
        raise UsageError("--n is required")
    if fam == "truncated-twomax" and args.trunc is None:
        raise UsageError("--trunc is required for truncated-twomax")
    spec = harness.ProblemSpec(fam, args.n, args.trunc if fam == "truncated-twomax" else None)
    spec.build()
    return spec, ""


def cmd_run(args) -> int:
    pspec, iid = _problem_from_args(args)
    kind = Selection(args.selection)
    sel = SelectionPolicy(kind, args.k if kind in (Selection.TOURNAMENT, Selection.INVERSE_TOURNAMENT) else 1)
    exp = harness.ExperimentSpec(
        pspec, mu=[args.mu], selections=[sel], mutations=[MutationPolicy.parse(args.mutation)],
        engines=[EngineKind(args.engine)], lam=args.lam, runs=1, seed=args.seed, budget=args.budget,
        stop=args.stop, fast_forward=not args.no_fast_forward)
    cell = exp.cells()[0]
    budget = exp.budget_for(cell)
    if budget < cell.mu:
        raise UsageError(f"--budget must cover the {cell.mu} initial evaluations")
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.trace:
            record = _traced_run(exp, cell, budget, out)
        else:
            task = harness._Task(pspec, cell, 0, args.seed, budget, exp.stop, exp.fast_forward)
            record = harness.execute(task)
        out.write("\t".join(harness.RUN_HEADER) + "\n")
        out.write(record.tsv() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _traced_run(exp: harness.ExperimentSpec, cell, budget: int, out) -> harness.RunRecord:
    """Reference-engine run that writes one line per evaluation before the record."""
    pspec = exp.problem
    inst = dict(pspec.instances).get(cell.instance) if cell.instance else None
    problem = pspec.build(inst)
    if isinstance(problem, TwoMaxProblem):
        tracker = harness.TwoMaxTracker(problem, cell.mu, cell.selection,
                                         cell.engine is EngineKind.STEADY_STATE)
    elif isinstance(problem, TwoGradientsProblem):
        tracker = harness.TwoGradientsTracker(problem, cell.mu, cell.selection,
                                              cell.engine is EngineKind.STEADY_STATE)
    elif isinstance(problem, RidgeProblem):
        tracker = harness.LabelTracker(problem, None)
    else:
        tracker = harness.SolveTracker(problem.target if isinstance(problem, MaxSatProblem) and exp.stop == "solve"
                                       else None)
    out.write("#evaluation\tparent\tremoved\tfitness\tpeaks\n")

    def observer(ev):
        peaks = ",".join(sorted(problem.peaks(ev.offspring))) or "-"
        parent = "-" if ev.parent is None else str(ev.parent)
        removed = "-" if ev.removed is None else str(ev.removed)
        out.write(f"#{ev.evaluations}\t{parent}\t{removed}\t{ev.fitness}\t{peaks}\n")
        return tracker(ev)

    res = harness.run_engine(harness._config(cell, budget), problem, harness.make_rng(exp.seed), observer)
    if isinstance(tracker, harness.SolveTracker):
        return harness.RunRecord(cell, 0, exp.seed, tracker.outcome(), {}, res.evaluations, tracker.best)
    if isinstance(tracker, harness.LabelTracker):
        return harness.RunRecord(cell, 0, exp.seed, harness.best_fitness(res.best[1]), tracker.first_hits,
                                 res.evaluations, res.best[1])
    return harness.RunRecord(cell, 0, exp.seed, tracker.finish(), tracker.first_hits, res.evaluations)


def cmd_bench(args) -> int:
    spec = load_spec(Path(args.spec))
    if args.seed is not None:
        spec.seed = args.seed
    if args.budget is not None:
        spec.budget = args.budget
    out = args.out or spec.out
    if not out:
        raise UsageError("no output directory: pass --out or set experiment.out")
    threads = args.threads or spec.threads
    done = [0]
    total = len(spec.cells()) * spec.runs

    def progress(rec):
        done[0] += 1
        if args.verbose:
            print(f"[{done[0]}/{total}] {rec.cell.key} run {rec.run_index}: {rec.outcome}", file=sys.stderr)

    records = harness.run_grid(spec, threads, progress)
    for p in harness.write_outputs(spec, records, Path(out)):
        print(p)
    return 0


def cmd_stats(args) -> int:
    rows = []
    for path in args.tables:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"table not found: {p}")
        rows.extend(st.read_instance_table(p))
    report = st.compare_configs(rows, args.metric or ("time", "fitness"), args.reference, args.alpha)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        out.write("\t".join(st.REPORT_HEADER) + "\n")
        for row in report:
            out.write("\t".join(row) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_fitness(args) -> int:
    x = Genotype.from_string(args.genotype)
    if args.n is None:
        args.n = x.n
    pspec, _ = _problem_from_args(args)
    problem = pspec.build(pspec.instances[0][1] if pspec.instances else None)
    if x.n != problem.n:
        raise UsageError(f"genotype has length {x.n}, problem needs {problem.n}")
    print(problem.fitness(x))
    return 0


def cmd_parse_check(args) -> int:
    failures = 0
    for name in args.files:
        path = resolve_arg(name)
        kind = file_kind(path)
        try:
            if not path.exists():
                raise FileNotFoundError(f"file not found: {path}")
            if kind == "cnf":
                p = load_cnf(path)
                print(f"{path}\tcnf\tnv={p.formula.nv}\tnc={p.formula.nc}")
            elif kind == "spec":
                spec = load_spec(path)
                print(f"{path}\tspec\tcells={len(spec.cells())}\truns={spec.runs}")
            else:
                insts = load_mknap(path)
                print(f"{path}\tmknap\tinstances={len(insts)}\t" +
                      ",".join(f"{i.name}:n={i.n},m={i.m}" for i in insts))
        except (ParseError, SpecError, FileNotFoundError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


# ----------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True, choices=harness.FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--trunc", type=int, help="truncation height k of truncated-twomax")
    p.add_argument("--ridge-k", type=int, help="ridge parameter k (n = 2k^2)")
    p.add_argument("--j", type=int, help="designated branch of ridge")
    p.add_argument("--scale", choices=["full", "suffix"], default="full")
    p.add_argument("--instance", help="instance file (relative paths use SSEA_DATA_DIR)")
    p.add_argument("--index", type=int, default=0, help="instance number inside a multi-instance file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ssea", description="Steady-state EAs with inverse selection pressure.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="one seeded run; prints its run record")
    _problem_args(run)
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--budget", type=int)
    run.add_argument("--mu", type=int, default=1)
    run.add_argument("--selection", choices=SELECTIONS, default="uniform")
    run.add_argument("--k", type=int, default=2, help="tournament size")
    run.add_argument("--mutation", choices=MUTATIONS, default="sbm")
    run.add_argument("--engine", choices=ENGINES, default="mu1")
    run.add_argument("--lambda", dest="lam", type=int, default=1)
    run.add_argument("--stop", help="stopping rule (maxsat: solve|budget, ridge: target|budget)")
    run.add_argument("--no-fast-forward", action="store_true")
    run.add_argument("--trace", action="store_true", help="print every evaluation (reference engine)")
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="run an experiment spec file")
    bench.add_argument("--spec", required=True)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--budget", type=int)
    bench.add_argument("--threads", type=int)
    bench.add_argument("--out")
    bench.add_argument("-v", "--verbose", action="store_true")
    bench.set_defaults(func=cmd_bench)

    stats = sub.add_parser("stats", help="paired Wilcoxon + Holm over instance tables")
    stats.add_argument("tables", nargs="+")
    stats.add_argument("--metric", action="append", choices=list(st.METRICS))
    stats.add_argument("--reference", help="compare this configuration against all others")
    stats.add_argument("--alpha", type=float, default=0.01)
    stats.add_argument("--out")
    stats.set_defaults(func=cmd_stats)

    fit = sub.add_parser("fitness", help="evaluate one genotype")
    _problem_args(fit)
    fit.add_argument("--genotype", required=True)
    fit.set_defaults(func=cmd_fitness)

    pc = sub.add_parser("parse-check", help="validate cnf, mknap and spec files")
    pc.add_argument("files", nargs="+")
    pc.set_defaults(func=cmd_parse_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "budget", None) is not None and args.budget < 1:
            raise UsageError("--budget must be positive")
        if getattr(args, "k", 2) is not None and getattr(args, "k", 2) < 1:
            raise UsageError("--k must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, FileNotFoundError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
