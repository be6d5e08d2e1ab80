"""Regenerate the synthetic instance corpus under data/.

SATLIB and OR-Library are not redistributed here.  The files written by
this script use their exact layouts: uniform random 3-SAT with a planted
satisfying assignment (SATLIB ``uf`` header, clause lines and ``%``/``0``
trailer) and Chu-Beasley style MKP instances (profits correlated with the
weights, capacities at half the row sums).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent / "data"


def planted_3sat(nv: int, nc: int, rng: np.random.Generator) -> tuple[list[list[int]], list[int]]:
    hidden = rng.integers(0, 2, size=nv)
    clauses = []
    while len(clauses) < nc:
        vs = rng.choice(nv, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3)
        lits = [int(v) if s else -int(v) for v, s in zip(vs, signs)]
        if any((lit > 0) == bool(hidden[abs(lit) - 1]) for lit in lits):
            clauses.append(lits)
    return clauses, [int(b) for b in hidden]


def write_cnf(path: Path, nv: int, nc: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    clauses, _ = planted_3sat(nv, nc, rng)
    lines = [
        f"c This Formular is generated by make_instances.py (planted 3-SAT, seed {seed})",
        "c",
        "c    horn? no ",
        "c    forced? yes ",
        "c    mixed sat? no ",
        "c    clause length = 3 ",
        "c",
        f"p cnf {nv}  {nc} ",
    ]
    lines += [" " + " ".join(str(l) for l in c) + " 0" for c in clauses]
    lines += ["%", "0", ""]
    path.write_text("\n".join(lines), encoding="utf-8")


def mkp_instance(n: int, m: int, rng: np.random.Generator):
    r = rng.integers(0, 1001, size=(m, n))
    b = (r.sum(axis=1) // 2).astype(int)
    p = (r.sum(axis=0) // m + rng.integers(0, 501, size=n)).astype(int)
    return p, r, b


def brute_optimum(p, r, b) -> int:
    n = len(p)
    best = 0
    for chunk in range(0, 1 << n, 1 << 16):
        idx = np.arange(chunk, min(chunk + (1 << 16), 1 << n), dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(n)) & 1).astype(np.int64)
        feas = (bits @ r.T <= b).all(axis=1)
        vals = bits @ p
        if feas.any():
            best = max(best, int(vals[feas].max()))
    return best


def write_mknap(path: Path, specs, seed: int) -> None:
    rng = np.random.default_rng(seed)
    out = [f" {len(specs)}"]
    for n, m, solve in specs:
        p, r, b = mkp_instance(n, m, rng)
        opt = brute_optimum(p, r, b) if solve else 0
        out.append(f" {n} {m} {opt}")
        for row in [p, *r, b]:
            vals = [str(int(v)) for v in row]
            for i in range(0, len(vals), 10):
                out.append(" " + " ".join(vals[i:i + 10]))
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


def main() -> None:
    sat = ROOT / "satlib"
    for nv, nc, count, base in ((20, 91, 3, 100), (100, 430, 2, 200), (250, 1065, 2, 300)):
        d = sat / f"uf{nv}-{nc}"
        d.mkdir(parents=True, exist_ok=True)
        for i in range(1, count + 1):
            write_cnf(d / f"uf{nv}-0{i}.cnf", nv, nc, base + i)
    orlib = ROOT / "orlib"
    orlib.mkdir(parents=True, exist_ok=True)
    write_mknap(orlib / "mknap-small.txt", [(20, 5, True), (20, 10, True)], 7)
    write_mknap(orlib / "mknapcb-mini.txt", [(100, 5, False), (100, 10, False)], 11)


if __name__ == "__main__":
    main()
