"""Independent transcriptions of the benchmark definitions, on bit strings.

Deliberately naive: strings in, Python ints out, no shared helpers with
the package.
"""

import math
from fractions import Fraction


def om(s):
    return s.count("1")


def twomax(s):
    n = len(s)
    return abs(Fraction(n, 2) - om(s))


def truncated_twomax(s, k):
    n = len(s)
    return twomax(s) if om(s) >= Fraction(n, 2) - k else 0


def g(s, N):
    L = len(s)
    k = math.isqrt(L)
    for i in range(L + 1):
        if s == "0" * (L - i) + "1" * i:
            return (i + 3) * N + om(s)
    for i in range(k, (k - 2) * k + 1, k):
        y = s[:k]
        if s == y + "0" * (L - i - k) + "1" * i:
            return (i + 3) * N + om(s)
    return 0


def ridge_with_branches(s, scale="full"):
    n = len(s)
    m1 = n // 2
    x1, x2 = s[:m1], s[m1:]
    if x1 != "0" * len(x1) and x2 != "0" * len(x2):
        return n - om(x2)
    if x1 != "0" * len(x1) and x2 == "0" * len(x2):
        return 2 * n - om(x1)
    return g(x2, n if scale == "full" else len(x2))


def ridge_with_branches_j(s, j, scale="full"):
    n = len(s)
    k = math.isqrt(n // 2)
    m = k * k
    if s == "0" * m + "1" * k + "0" * (m - (j + 1) * k) + "1" * (j * k):
        return n ** 3
    return ridge_with_branches(s, scale)


def icbrt(n):
    r = 0
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def two_gradients(s):
    n = len(s)
    ell = icbrt(n)
    m = n - ell
    po = om(s[:m])
    lso = 0
    for i in range(1, ell + 1):
        prod = 1
        for j in range(1, i + 1):
            prod *= int(s[n - ell + j - 1])
        lso += prod
    thr = Fraction(2 * m, 3)
    if po <= thr:
        return n * n * lso + po
    return n * n * ell - m - 1 + po


def mkp(p, r, b, s):
    W = 1 + sum(p)
    x = [int(c) for c in s]
    total = Fraction(0)
    for j, xj in enumerate(x):
        total += p[j] * xj
    for i in range(len(b)):
        load = sum(Fraction(r[i][j]) * x[j] for j in range(len(x)))
        total += W * min(0, b[i] - load)
    return total


def maxsat(clauses, s):
    sat = 0
    for c in clauses:
        if any((s[abs(l) - 1] == "1") == (l > 0) for l in c):
            sat += 1
    return sat
