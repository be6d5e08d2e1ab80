"""Paired comparisons: Wilcoxon signed-rank test and Holm's step-down correction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

EXACT_CUTOFF = 25


class DegenerateSampleError(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    statistic: float          # W = min(W+, W-)
    w_plus: float
    w_minus: float
    z: float
    p_one_sided: float
    p_two_sided: float
    n_effective: int
    exact: bool

    __test__ = False  # keep pytest from collecting this class


def _average_ranks(values: Sequence[float]) -> tuple[list[float], list[int]]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    ties = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j + 2) / 2
        for t in range(i, j + 1):
            ranks[order[t]] = r
        ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2))


def _exact_counts(doubled: Sequence[int]) -> list[int]:
    """Number of sign assignments giving each value of 2*W+."""
    total = sum(doubled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled:
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    return counts


def wilcoxon_signed_rank(a: Sequence[float], b: Optional[Sequence[float]] = None,
                         alternative: Optional[str] = None) -> TestResult:
    """Wilcoxon signed-rank test on the differences ``a - b``.

    Zero differences are dropped; tied magnitudes get average ranks.  Up to
    ``EXACT_CUTOFF`` nonzero differences the null distribution is
    enumerated exactly (counting over doubled ranks), beyond that the
    tie-corrected normal approximation with continuity correction is used.

    ``alternative``: ``None`` reports the smaller tail as the one-sided p;
    ``"greater"`` tests ``a > b`` and ``"less"`` tests ``a < b``.
    """
    if b is None:
        diffs = list(a)
    else:
        if len(a) != len(b):
            raise ValueError("paired samples must have equal length")
        diffs = [x - y for x, y in zip(a, b)]
    if not diffs:
        raise DegenerateSampleError("empty sample")
    if alternative not in (None, "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")
    nz = [d for d in diffs if d != 0]
    n = len(nz)
    if n == 0:
        raise DegenerateSampleError("all differences are zero")
    ranks, ties = _average_ranks([abs(d) for d in nz])
    w_plus = float(sum(r for r, d in zip(ranks, nz) if d > 0))
    w_minus = float(sum(r for r, d in zip(ranks, nz) if d < 0))

    mean = n * (n + 1) / 4
    var = n * (n + 1) * (2 * n + 1) / 24 - sum(t ** 3 - t for t in ties) / 48
    dev = w_plus - mean
    if var > 0:
        z = math.copysign(max(abs(dev) - 0.5, 0.0), dev) / math.sqrt(var)
    else:
        z = 0.0

    if n <= EXACT_CUTOFF:
        doubled = [int(round(2 * r)) for r in ranks]
        counts = _exact_counts(doubled)
        obs = int(round(2 * w_plus))
        total = 1 << n
        lower = float(Fraction(sum(counts[: obs + 1]), total))   # P(W+ <= obs)
        upper = float(Fraction(sum(counts[obs:]), total))        # P(W+ >= obs)
        exact = True
    else:
        lower = _norm_sf(-z) if dev < 0 else 1 - _norm_sf(z)
        upper = _norm_sf(z) if dev > 0 else 1 - _norm_sf(-z)
        if dev == 0:
            lower = upper = 0.5
        exact = False
    if alternative == "greater":
        p_one = upper
    elif alternative == "less":
        p_one = lower
    else:
        p_one = min(lower, upper)
    p_two = min(1.0, 2 * min(lower, upper))
    return TestResult(min(w_plus, w_minus), w_plus, w_minus, z, p_one, p_two, n, exact)


def holm_bonferroni(p_values: Sequence[float], alpha: float = 0.01) -> list[bool]:
    """Holm's step-down procedure; ``True`` means the hypothesis is rejected."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    m = len(p_values)
    for p in p_values:
        if not 0 <= p <= 1:
            raise ValueError(f"p-value {p} outside [0, 1]")
    decisions = [False] * m
    for rank, i in enumerate(sorted(range(m), key=lambda i: p_values[i])):
        if p_values[i] > alpha / (m - rank):
            break
        decisions[i] = True
    return decisions


def two_proportion_test(s1: int, n1: int, s2: int, n2: int) -> float:
    """One-sided pooled z-test p-value for ``p1 > p2``."""
    if n1 < 1 or n2 < 1:
        raise ValueError("both groups need trials")
    pooled = (s1 + s2) / (n1 + n2)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    diff = s1 / n1 - s2 / n2
    if se == 0:
        return 0.0 if diff > 0 else 1.0
    return _norm_sf(diff / se)


# ---------------------------------------------------------------- reports


REPORT_HEADER = ["comparison", "metric", "n_pairs", "n_effective", "W", "z", "p_two", "p_one", "holm_decision"]

# metric -> (column in the instance table, larger-is-better)
METRICS = {
    "time": ("solved_at_or_budget", False),
    "fitness": ("best_fitness", True),
}


def read_instance_table(path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty table")
    header = lines[0].split("\t")
    if "instance" not in header or "solved_at_or_budget" not in header:
        raise ValueError(f"{path}: not an instance table (header {header})")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(header):
            raise ValueError(f"{path}: line {lineno}: expected {len(header)} columns, got {len(cells)}")
        rows.append(dict(zip(header, cells)))
    return rows


def config_label(row: dict[str, str]) -> str:
    return f"{row['engine']}/{row['selection']}-{row['K']}/mu={row['mu']}"


def paired_values(rows: Sequence[dict[str, str]], a: str, b: str, column: str) -> tuple[list[int], list[int]]:
    """Pair runs of configurations ``a`` and ``b`` on the same instance by run order."""
    by: dict[tuple[str, str], list[int]] = {}
    for row in rows:
        v = row[column]
        by.setdefault((config_label(row), row["instance"]), []).append(0 if v == "-" else int(v))
    xs, ys = [], []
    for (cfg, inst), vals in by.items():
        if cfg != a:
            continue
        other = by.get((b, inst), [])
        m = min(len(vals), len(other))
        xs.extend(vals[:m])
        ys.extend(other[:m])
    return xs, ys


def compare_configs(rows: Sequence[dict[str, str]], metrics: Sequence[str] = ("time", "fitness"),
                    reference: Optional[str] = None, alpha: float = 0.01) -> list[list[str]]:
    """Report rows for every configuration pair (or reference vs others).

    ``p_one`` is oriented so that small values mean the first
    configuration is better (shorter time, higher fitness); Holm's
    correction is applied to ``p_two`` over the whole report.
    """
    configs = list(dict.fromkeys(config_label(r) for r in rows))
    if reference is not None and reference not in configs:
        raise ValueError(f"reference configuration {reference!r} not found (have {configs})")
    pairs = [(reference, c) for c in configs if c != reference] if reference else \
        [(a, b) for i, a in enumerate(configs) for b in configs[i + 1:]]
    results = []
    for a, b in pairs:
        for metric in metrics:
            column, larger = METRICS[metric]
            xs, ys = paired_values(rows, a, b, column)
            if not xs:
                continue
            try:
                res = wilcoxon_signed_rank(xs, ys, alternative="greater" if larger else "less")
            except ValueError:
                results.append((f"{a} vs {b}", metric, len(xs), None))
                continue
            results.append((f"{a} vs {b}", metric, len(xs), res))
    tested = [r[3].p_two_sided for r in results if r[3] is not None]
    decisions = iter(holm_bonferroni(tested, alpha) if tested else [])
    out = []
    for cid, metric, npairs, res in results:
        if res is None:
            out.append([cid, metric, str(npairs), "0", "-", "-", "1", "1", "accept"])
            continue
        out.append([cid, metric, str(npairs), str(res.n_effective), f"{res.statistic:g}", f"{res.z:.6f}",
                    f"{res.p_two_sided:.6g}", f"{res.p_one_sided:.6g}",
                    "reject" if next(decisions) else "accept"])
    return out
