"""MaxSat (DIMACS CNF) and multidimensional knapsack (OR-Library) instances."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bitcore import Genotype, InvalidDimensionError


class ParseError(ValueError):
    def __init__(self, message: str, *, line: int | None = None, token: int | None = None,
                 source: str | None = None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if token is not None:
            where.append(f"token {token}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
        self.line = line
        self.token = token


def _as_text(data: str | bytes) -> str:
    return data.decode("utf-8") if isinstance(data, bytes) else data


# --------------------------------------------------------------------- MaxSat


@dataclass(frozen=True)
class CnfFormula:
    nv: int
    clauses: tuple[tuple[int, ...], ...]
    _index: np.ndarray = field(init=False, repr=False, compare=False)
    _negated: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        width = max((len(c) for c in self.clauses), default=1)
        index = np.zeros((len(self.clauses), width), dtype=np.intp)
        negated = np.zeros((len(self.clauses), width), dtype=np.uint8)
        for row, c in enumerate(self.clauses):
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.nv:
                    raise ValueError(f"literal {lit} out of range for {self.nv} variables")
            # short clauses are padded by repeating their first literal
            padded = list(c) + [c[0]] * (width - len(c))
            index[row] = [abs(lit) - 1 for lit in padded]
            negated[row] = [lit < 0 for lit in padded]
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_negated", negated)

    @property
    def nc(self) -> int:
        return len(self.clauses)


def parse_dimacs(data: str | bytes, source: str | None = None) -> CnfFormula:
    """Parse DIMACS CNF.

    Comment lines (``c``) are skipped, a ``%`` line ends the clause section
    (SATLIB trailer), and a stray ``0`` after the last clause is accepted.
    """
    nv = nc = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    lineno = 0
    for lineno, raw in enumerate(_as_text(data).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if nv is not None:
                raise ParseError("duplicate problem line", line=lineno, source=source)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed problem line {line!r}", line=lineno, source=source)
            try:
                nv, nc = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed problem line {line!r}", line=lineno, source=source) from None
            if nv < 1 or nc < 0:
                raise ParseError("variable and clause counts must be positive", line=lineno, source=source)
            continue
        if nv is None:
            raise ParseError("clause data before the 'p cnf' header", line=lineno, source=source)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", line=lineno, source=source) from None
            if abs(lit) > nv:
                raise ParseError(f"literal {lit} exceeds variable count {nv}", line=lineno, source=source)
            if lit:
                current.append(lit)
            elif current:
                clauses.append(tuple(current))
                current = []
            elif len(clauses) < nc:
                raise ParseError("empty clause", line=lineno, source=source)
    if nv is None:
        raise ParseError("missing 'p cnf' header", source=source)
    if current:
        clauses.append(tuple(current))
    if len(clauses) != nc:
        raise ParseError(f"header declares {nc} clauses, found {len(clauses)}", line=lineno, source=source)
    return CnfFormula(nv, tuple(clauses))


def maxsat_fitness(formula: CnfFormula, x: Genotype) -> int:
    if x.n != formula.nv:
        raise InvalidDimensionError(f"genotype length {x.n} != {formula.nv} variables")
    values = x.to_array()[formula._index] ^ formula._negated
    return int(values.any(axis=1).sum())


@dataclass(frozen=True)
class MaxSatProblem:
    formula: CnfFormula
    label: str = "maxsat"

    @property
    def n(self) -> int:
        return self.formula.nv

    @property
    def name(self) -> str:
        return self.label

    @property
    def target(self) -> int:
        return self.formula.nc

    def fitness(self, x: Genotype) -> int:
        return maxsat_fitness(self.formula, x)

    def peaks(self, x: Genotype) -> frozenset[str]:
        return frozenset({"Satisfied"}) if self.fitness(x) == self.target else frozenset()


# ------------------------------------------------------------------------ MKP


@dataclass(frozen=True)
class MkpInstance:
    rewards: tuple[int, ...]
    weights: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    declared_optimum: int = 0
    name: str = "mkp"
    penalty: int = field(init=False)

    def __post_init__(self):
        n, m = len(self.rewards), len(self.capacities)
        if n < 1 or m < 1:
            raise ValueError("MKP needs at least one item and one constraint")
        if len(self.weights) != m or any(len(row) != n for row in self.weights):
            raise ValueError(f"weight matrix must be {m}x{n}")
        object.__setattr__(self, "penalty", 1 + sum(self.rewards))
        object.__setattr__(self, "_p", np.asarray(self.rewards, dtype=np.int64))
        object.__setattr__(self, "_r", np.asarray(self.weights, dtype=np.int64))
        object.__setattr__(self, "_b", np.asarray(self.capacities, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.rewards)

    @property
    def m(self) -> int:
        return len(self.capacities)


def parse_orlib_mknap(data: str | bytes, source: str | None = None) -> list[MkpInstance]:
    """Parse an OR-Library ``mknap`` file (Chu-Beasley layout).

    Token stream: instance count, then per instance ``n m optimum``, ``n``
    rewards, ``m`` rows of ``n`` weights and ``m`` capacities.
    """
    tokens = _as_text(data).split()
    pos = 0

    def take(count: int = 1) -> list[int]:
        nonlocal pos
        if pos + count > len(tokens):
            raise ParseError(f"unexpected end of data (needed {count} more tokens)", token=len(tokens),
                             source=source)
        out = []
        for i in range(pos, pos + count):
            try:
                v = int(tokens[i])
            except ValueError:
                raise ParseError(f"non-integer token {tokens[i]!r}", token=i, source=source) from None
            if v < 0:
                raise ParseError(f"negative value {v}", token=i, source=source)
            out.append(v)
        pos += count
        return out

    (count,) = take()
    stem = Path(source).stem if source else "mknap"
    instances = []
    for idx in range(count):
        start = pos
        n, m, opt = take(3)
        if n < 1 or m < 1:
            raise ParseError(f"instance needs n, m >= 1 (got n={n}, m={m})", token=start, source=source)
        rewards = take(n)
        weights = [tuple(take(n)) for _ in range(m)]
        caps = take(m)
        instances.append(MkpInstance(tuple(rewards), tuple(weights), tuple(caps), opt, f"{stem}-{idx + 1:02d}"))
    if pos != len(tokens):
        raise ParseError(f"{len(tokens) - pos} trailing tokens after {count} instances", token=pos, source=source)
    return instances


def mkp_fitness(inst: MkpInstance, x: Genotype) -> int:
    """Reward sum plus ``W`` times the summed negative slack."""
    if x.n != inst.n:
        raise InvalidDimensionError(f"genotype length {x.n} != {inst.n} items")
    sel = x.to_array().astype(bool)
    reward = int(inst._p[sel].sum())
    slack = inst._b - inst._r[:, sel].sum(axis=1)
    violation = int(slack[slack < 0].sum())
    return reward + inst.penalty * violation


@dataclass(frozen=True)
class MkpProblem:
    instance: MkpInstance

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def name(self) -> str:
        return self.instance.name

    def fitness(self, x: Genotype) -> int:
        return mkp_fitness(self.instance, x)

    def peaks(self, x: Genotype) -> frozenset[str]:
        return frozenset()


# ------------------------------------------------------------ best-known table


class BestKnownTable:
    """Instance id -> best known fitness; only ever raised."""

    def __init__(self, values: dict[str, int] | None = None):
        self.values: dict[str, int] = {}
        for k, v in (values or {}).items():
            self.update(k, v)

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def __getitem__(self, key: str) -> int:
        return self.values[key]

    def update(self, key: str, value: int) -> bool:
        if value <= 0:
            return False
        if value > self.values.get(key, 0):
            self.values[key] = value
            return True
        return False

    @classmethod
    def load(cls, path: str | os.PathLike) -> "BestKnownTable":
        table = cls()
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                key, value = line.split("\t")
                table.update(key, int(value))
            except ValueError:
                raise ParseError(f"expected 'id<TAB>integer', got {line!r}", line=lineno, source=str(path)) from None
        return table

    def save(self, path: str | os.PathLike) -> None:
        path = Path(path)
        text = "".join(f"{k}\t{v}\n" for k, v in sorted(self.values.items()))
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)


def normalized_fitness(inst_id: str, achieved: int, table: BestKnownTable) -> Fraction:
    """``achieved / best_known``; raises the table entry when exceeded."""
    if inst_id not in table:
        raise KeyError(f"no best-known value for {inst_id!r}")
    if achieved < 0:
        raise ValueError("normalized fitness is defined for feasible (non-negative) values")
    ratio = Fraction(achieved, table[inst_id])
    table.update(inst_id, achieved)
    return ratio
