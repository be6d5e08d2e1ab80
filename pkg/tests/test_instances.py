from fractions import Fraction

import numpy as np
import pytest

import oracles
from conftest import DATA, all_strings
from ssea.bitcore import Genotype, InvalidDimensionError, make_rng
from ssea.instances import (BestKnownTable, MkpInstance, ParseError, maxsat_fitness, mkp_fitness,
                            normalized_fitness, parse_dimacs, parse_orlib_mknap)

G = Genotype.from_string
SMALL = "p cnf 3 2\n1 2 0\n-1 3 0\n"


# ----------------------------------------------------------------- DIMACS


def test_parse_dimacs_example():
    f = parse_dimacs(SMALL)
    assert f.nv == 3 and f.clauses == ((1, 2), (-1, 3))
    assert parse_dimacs("c comment\n" + SMALL) == f
    assert parse_dimacs(SMALL.encode()) == f


def test_satlib_trailer_accepted():
    f = parse_dimacs(SMALL + "%\n0\n\n")
    assert f.nc == 2


def test_clauses_may_span_lines():
    assert parse_dimacs("p cnf 3 2\n1\n2 0 -1\n3 0\n").clauses == ((1, 2), (-1, 3))


@pytest.mark.parametrize("text,fragment", [
    ("p cnf 2 1\n3 0\n", "line 2"),
    ("1 2 0\n", "header"),
    ("p cnf 3 3\n1 2 0\n-1 3 0\n", "declares 3"),
    ("p cnf 3 1\n1 x 0\n", "bad literal"),
    ("p cnf 3\n", "problem line"),
])
def test_parse_dimacs_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_dimacs(text)


def test_maxsat_examples():
    f = parse_dimacs(SMALL)
    assert maxsat_fitness(f, G("101")) == 2
    assert maxsat_fitness(f, G("010")) == 2
    assert maxsat_fitness(f, G("100")) == 1
    with pytest.raises(InvalidDimensionError):
        maxsat_fitness(f, G("10"))


def _random_cnf(nv, nc, rng):
    clauses = []
    for _ in range(nc):
        vs = rng.choice(nv, size=3, replace=False) + 1
        clauses.append(tuple(int(v) * (1 if rng.random() < 0.5 else -1) for v in vs))
    body = "".join(" ".join(map(str, c)) + " 0\n" for c in clauses)
    return clauses, f"p cnf {nv} {nc}\n{body}"


@pytest.mark.parametrize("nv", [5, 11, 16])
def test_maxsat_oracle_exhaustive(nv):
    rng = make_rng(nv)
    clauses, text = _random_cnf(nv, 4 * nv, rng)
    f = parse_dimacs(text)
    for s in all_strings(nv):
        assert maxsat_fitness(f, G(s)) == oracles.maxsat(clauses, s)


@pytest.mark.parametrize("path", sorted((DATA / "satlib").rglob("*.cnf")), ids=lambda p: p.name)
def test_satlib_corpus_parses(path):
    f = parse_dimacs(path.read_bytes(), source=str(path))
    nv, nc = map(int, path.parent.name[2:].split("-"))
    assert (f.nv, f.nc) == (nv, nc)


# -------------------------------------------------------------------- MKP

EXAMPLE = "1 3 1 0 10 20 30 5 4 3 7"


def test_parse_mknap_example():
    (inst,) = parse_orlib_mknap(EXAMPLE)
    assert (inst.n, inst.m) == (3, 1)
    assert inst.rewards == (10, 20, 30) and inst.weights == ((5, 4, 3),) and inst.capacities == (7,)
    assert inst.penalty == 61


def test_parse_mknap_two_instances_and_layout():
    text = "2\n" + EXAMPLE[2:] + "\n" + "2 2 5\n1 2\n1 1\n1 1\n1 1\n"
    a, b = parse_orlib_mknap(text.replace(" ", "\n"))
    assert a.n == 3 and (b.n, b.m, b.declared_optimum) == (2, 2, 5)


@pytest.mark.parametrize("text,fragment", [
    ("1 3 1 0 10 20 30 5 4 3", "end of data"),
    ("1 3 1 0 10 20 30 5 4 -3 7", "negative"),
    ("1 3 1 0 10 20 30 5 4 3.5 7", "non-integer"),
    ("1 3 1 0 10 20 30 5 4 3 7 9", "trailing"),
])
def test_parse_mknap_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_orlib_mknap(text)


def test_mkp_examples():
    (inst,) = parse_orlib_mknap(EXAMPLE)
    assert mkp_fitness(inst, G("011")) == 50
    assert mkp_fitness(inst, G("111")) == -245
    assert mkp_fitness(inst, G("000")) == 0
    with pytest.raises(InvalidDimensionError):
        mkp_fitness(inst, G("0000"))


def _random_mkp(n, m, seed):
    rng = make_rng(seed)
    p = [int(v) for v in rng.integers(0, 1000, n)]
    r = [[int(v) for v in rng.integers(0, 1000, n)] for _ in range(m)]
    b = [sum(row) // 2 for row in r]
    return MkpInstance(tuple(p), tuple(map(tuple, r)), tuple(b)), p, r, b


def test_mkp_oracle_exhaustive():
    inst, p, r, b = _random_mkp(12, 3, 99)
    for s in all_strings(12):
        assert mkp_fitness(inst, G(s)) == oracles.mkp(p, r, b, s)


def test_penalty_dominance():
    (inst, *_) = parse_orlib_mknap((DATA / "orlib" / "mknapcb-mini.txt").read_text())
    rng = make_rng(5)
    r = np.asarray(inst.weights, dtype=np.int64)
    seen = 0
    while seen < 100_000:
        bits = rng.integers(0, 2, size=(20_000, inst.n), dtype=np.int64)
        infeasible = bits[((bits @ r.T) > np.asarray(inst.capacities)).any(axis=1)]
        for row in infeasible[: 100_000 - seen]:
            assert mkp_fitness(inst, Genotype.from_bits(row.tolist())) < 0
        seen += min(len(infeasible), 100_000 - seen)


def test_repair_monotone():
    inst, *_ = _random_mkp(10, 3, 7)
    for s in all_strings(10):
        x = G(s)
        f = mkp_fitness(inst, x)
        bits = [int(c) for c in s]
        violated = [i for i, row in enumerate(inst.weights)
                    if sum(w * b for w, b in zip(row, bits)) > inst.capacities[i]]
        for j in range(10):
            if s[j] == "1" and any(inst.weights[i][j] > 0 for i in violated):
                assert mkp_fitness(inst, x.flip([j])) >= f


@pytest.mark.parametrize("name", ["mknap-small.txt", "mknapcb-mini.txt"])
def test_orlib_corpus_parses(name):
    insts = parse_orlib_mknap((DATA / "orlib" / name).read_bytes(), source=name)
    assert len(insts) == 2
    assert all(i.penalty == 1 + sum(i.rewards) for i in insts)


def test_declared_optimum_attained_small_corpus():
    # the small instances were generated with brute-forced optima
    insts = parse_orlib_mknap((DATA / "orlib" / "mknap-small.txt").read_text())
    assert [i.declared_optimum for i in insts] == [8114, 8236]


# --------------------------------------------------------------- best known


def test_normalized_fitness_examples():
    t = BestKnownTable({"a": 100})
    assert normalized_fitness("a", 95, t) == Fraction(95, 100)
    assert normalized_fitness("a", 100, t) == 1
    assert normalized_fitness("a", 101, t) == Fraction(101, 100)
    assert t["a"] == 101
    with pytest.raises(KeyError):
        normalized_fitness("b", 1, t)
    with pytest.raises(ValueError):
        normalized_fitness("a", -3, t)


def test_best_known_only_rises(tmp_path):
    t = BestKnownTable()
    assert t.update("x", 10)
    assert not t.update("x", 9)
    assert not t.update("y", 0)
    assert "y" not in t
    path = tmp_path / "best.tsv"
    t.save(path)
    assert path.read_text() == "x\t10\n"
    assert BestKnownTable.load(path).values == {"x": 10}
    path.write_text("x 10\n")
    with pytest.raises(ParseError, match="line 1"):
        BestKnownTable.load(path)
