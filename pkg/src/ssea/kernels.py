"""Compiled simulators for the experiment-scale benchmark runs.

Both simulators track a lumped state that is exact for the benchmark at
hand, so each run has the same outcome law as the reference engines in
:mod:`ssea.engines`:

* TwoMax / TruncatedTwoMax depend on a genotype only through its Hamming
  weight, and mutating a weight-``w`` string changes the weight by
  ``-Bin(w, 1/n) + Bin(n - w, 1/n)`` (SBM) or by ``+-1`` (RLS).  The
  population is stored as a weight-sorted array with bucket boundaries.
* TwoGradients depends on the prefix only through its number of ones, so a
  member is ``(prefix ones, suffix bits)``; the suffix is kept exactly.

Mutation samples flip positions with geometric gaps, which gives the
standard bit mutation law with about one uniform draw per offspring.
"""

from __future__ import annotations

import math

import numba
import numpy as np

# outcome codes shared with the harness
BOTH = 0
SINGLE_LEFT = 1
SINGLE_RIGHT = 2
CONVERGED_OPT = 3
CONVERGED_LOC = 4
TIMEOUT = 5
BUDGET = 6

SEL_UNIFORM = 0
SEL_TOURNAMENT = 1
SEL_INVERSE_TOURNAMENT = 2
SEL_INVERSE_ELITIST = 3

MUT_SBM = 0
MUT_RLS = 1

ENG_STEADY = 0
ENG_CROWDING = 1
ENG_ONE_PLUS_ONE = 2

INT64_MAX = np.iinfo(np.int64).max


@numba.njit(cache=True)
def geometric_trials(q, rng):
    """Trials up to and including the first success, as a float (may be inf)."""
    if q >= 1.0:
        return 1.0
    if q <= 0.0:
        return math.inf
    u = rng.random()
    return math.floor(math.log1p(-u) / math.log1p(-q)) + 1.0


@numba.njit(cache=True)
def _uniform_int(rng, n):
    i = int(rng.random() * n)
    return i if i < n else n - 1


@numba.njit(cache=True)
def _next_flip(pos, log_keep, rng):
    return pos + int(math.floor(math.log1p(-rng.random()) / log_keep)) + 1


# ------------------------------------------------------------ unitation kernel


@numba.njit(cache=True)
def _move(S, start, a, b):
    """Move one member from weight bucket ``a`` to bucket ``b``."""
    if a < b:
        for w in range(a + 1, b + 1):
            start[w] -= 1
            S[start[w]] = w
    elif a > b:
        for w in range(a, b, -1):
            S[start[w]] = w - 1
            start[w] += 1


@numba.njit(cache=True)
def _side(w, n):
    if 2 * w < n:
        return 1
    if 2 * w > n:
        return -1
    return 0


@numba.njit(cache=True)
def _pick_in_group(g, gstart, order, start, fcnt, rng):
    r = _uniform_int(rng, fcnt[g])
    for j in range(gstart[g], gstart[g + 1]):
        w = order[j]
        c = start[w + 1] - start[w]
        if r < c:
            return w
        r -= c
    return order[gstart[g + 1] - 1]


@numba.njit(cache=True)
def unitation_run(n, mu, fit_w, left_w, right_w, trap, sel, k, mut, engine, budget,
                  fast_forward, rng, dstats):
    """One run on a function of unitation with peaks at ``left_w``/``right_w``.

    ``trap`` marks ``left_w`` as a plateau whose offspring can never beat it
    (TruncatedTwoMax).  ``dstats`` (int64[4]) accumulates branch-imbalance
    moves: +2, -2, any increase, any decrease.

    Returns ``(outcome, first_left, first_right, evaluations)``; a first-hit
    of -1 means never constructed.
    """
    # fitness groups: weights ordered by fitness, equal values contiguous
    order = np.argsort(fit_w, kind="mergesort")
    gid = np.empty(n + 1, np.int64)
    gstart = np.empty(n + 2, np.int64)
    ngroups = 0
    for j in range(n + 1):
        if j == 0 or fit_w[order[j]] != fit_w[order[j - 1]]:
            gstart[ngroups] = j
            ngroups += 1
        gid[order[j]] = ngroups - 1
    gstart[ngroups] = n + 1
    fcnt = np.zeros(ngroups, np.int64)

    hist = np.zeros(n + 1, np.int64)
    hit_l = -1
    hit_r = -1
    t = 0
    for i in range(mu):
        w = 0
        for _ in range(n):
            if rng.random() < 0.5:
                w += 1
        hist[w] += 1
        t += 1
        if w == left_w and hit_l < 0:
            hit_l = t
        if w == right_w and hit_r < 0:
            hit_r = t
    S = np.empty(mu, np.int64)
    start = np.zeros(n + 2, np.int64)
    p = 0
    for w in range(n + 1):
        start[w] = p
        for _ in range(hist[w]):
            S[p] = w
            p += 1
        fcnt[gid[w]] += hist[w]
    start[n + 1] = mu

    g = 0
    log_keep = math.log1p(-1.0 / n)
    restricted = False  # next tournament avoids the trapped plateau
    while True:
        while fcnt[g] == 0:
            g += 1
        if hit_l >= 0 and hit_r >= 0:
            return BOTH, hit_l, hit_r, t
        on_peaks = (start[left_w + 1] - start[left_w]) + (start[right_w + 1] - start[right_w])
        if on_peaks == mu:
            return (SINGLE_LEFT if hit_r < 0 else SINGLE_RIGHT), hit_l, hit_r, t
        if t >= budget:
            return BUDGET, hit_l, hit_r, t
        n_trap = start[left_w + 1] - start[left_w]
        if trap and engine == ENG_STEADY and fcnt[g] == n_trap and fit_w[left_w] == fit_w[order[gstart[g]]]:
            # every worst member sits on the plateau
            if sel == SEL_INVERSE_ELITIST:
                return TIMEOUT, hit_l, hit_r, t
            if sel == SEL_INVERSE_TOURNAMENT and fast_forward:
                q = ((mu - n_trap) / mu) ** k
                G = geometric_trials(q, rng)
                if t + G > INT64_MAX:
                    return TIMEOUT, hit_l, hit_r, INT64_MAX
                if t + G - 1.0 >= budget:
                    return BUDGET, hit_l, hit_r, budget
                t += int(G) - 1
                restricted = True

        # parent selection
        if engine == ENG_CROWDING or sel == SEL_UNIFORM:
            a = S[_uniform_int(rng, mu)]
        elif sel == SEL_INVERSE_ELITIST:
            a = _pick_in_group(g, gstart, order, start, fcnt, rng)
        else:
            a = -1
            best = 0
            ties = 0
            pool = mu - n_trap if restricted else mu
            for _ in range(k):
                pos = _uniform_int(rng, pool)
                if restricted and pos >= start[left_w]:
                    pos += n_trap
                w = S[pos]
                f = fit_w[w]
                better = a < 0 or (f < best if sel == SEL_INVERSE_TOURNAMENT else f > best)
                if better:
                    a = w
                    best = f
                    ties = 1
                elif f == best:
                    ties += 1
                    if _uniform_int(rng, ties) == 0:
                        a = w
            restricted = False

        # mutation
        if mut == MUT_RLS:
            b = a - 1 if rng.random() * n < a else a + 1
        else:
            b = a
            pos = _next_flip(-1, log_keep, rng)
            while pos < n:
                if pos < a:
                    b -= 1
                else:
                    b += 1
                pos = _next_flip(pos, log_keep, rng)
        t += 1
        if b == left_w and hit_l < 0:
            hit_l = t
        if b == right_w and hit_r < 0:
            hit_r = t

        # replacement
        fb = fit_w[b]
        removed = -1
        if engine == ENG_CROWDING:
            if fb >= fit_w[a]:
                removed = a
        else:
            fmin = fit_w[order[gstart[g]]]
            if fb > fmin:
                removed = _pick_in_group(g, gstart, order, start, fcnt, rng)
            elif fb == fmin:
                if _uniform_int(rng, fcnt[g] + 1) != 0:
                    removed = _pick_in_group(g, gstart, order, start, fcnt, rng)
        if removed >= 0 and removed != b:
            _move(S, start, removed, b)
            fcnt[gid[removed]] -= 1
            fcnt[gid[b]] += 1
            delta = _side(b, n) - _side(removed, n)
            if delta > 0:
                dstats[2] += 1
                if delta == 2:
                    dstats[0] += 1
            elif delta < 0:
                dstats[3] += 1
                if delta == -2:
                    dstats[1] += 1


# -------------------------------------------------------- TwoGradients kernel


@numba.njit(cache=True)
def _lso(suf, ell):
    c = 0
    for j in range(ell - 1, -1, -1):
        if (suf >> j) & 1:
            c += 1
        else:
            break
    return c


@numba.njit(cache=True)
def _tg_value(po, lso, n, ell, m, thr):
    if po <= thr:
        return n * n * lso + po
    return n * n * ell - m - 1 + po


@numba.njit(cache=True)
def _upper_bound(fit, v, size):
    lo = 0
    hi = size
    while lo < hi:
        mid = (lo + hi) >> 1
        if fit[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True)
def _reposition(fit, po, suf, r, f, cpo, csuf, size):
    """Overwrite sorted slot ``r`` with a new member and restore the order."""
    q = _upper_bound(fit, f, size)
    if q > r:
        for j in range(r, q - 1):
            fit[j] = fit[j + 1]
            po[j] = po[j + 1]
            suf[j] = suf[j + 1]
        q -= 1
    else:
        for j in range(r, q, -1):
            fit[j] = fit[j - 1]
            po[j] = po[j - 1]
            suf[j] = suf[j - 1]
    fit[q] = f
    po[q] = cpo
    suf[q] = csuf


@numba.njit(cache=True)
def twogradients_run(n, ell, m, thr, mu, sel, k, mut, engine, budget, fast_forward, rng):
    """One run on TwoGradients.  Returns ``(outcome, first_opt, first_loc, evaluations)``.

    Members are kept sorted by fitness, so the worst members form a prefix
    and, whenever the minimum is the trap value, the trap copies are exactly
    that prefix.
    """
    po = np.empty(mu, np.int64)
    suf = np.empty(mu, np.int64)
    fit = np.empty(mu, np.int64)
    opt_value = n * n * ell + thr
    loc_value = n * n * ell - 1
    hit_o = -1
    hit_l = -1
    t = 0
    for i in range(mu):
        c = 0
        for _ in range(m):
            if rng.random() < 0.5:
                c += 1
        s = 0
        for _ in range(ell):
            s = (s << 1) | (1 if rng.random() < 0.5 else 0)
        po[i] = c
        suf[i] = s
        L = _lso(s, ell)
        fit[i] = _tg_value(c, L, n, ell, m, thr)
        t += 1
        if c == m and hit_l < 0:
            hit_l = t
        if c == thr and L == ell and hit_o < 0:
            hit_o = t
    idx = np.argsort(fit, kind="mergesort")
    fit = fit[idx]
    po = po[idx]
    suf = suf[idx]

    log_keep = math.log1p(-1.0 / n)
    skip_prefix = 0  # next tournament avoids the first skip_prefix slots

    while True:
        if hit_o >= 0 and hit_l >= 0:
            return BOTH, hit_o, hit_l, t
        if fit[0] == opt_value:
            return CONVERGED_OPT, hit_o, hit_l, t
        if fit[mu - 1] == loc_value:
            return CONVERGED_LOC, hit_o, hit_l, t
        if t >= budget:
            return BUDGET, hit_o, hit_l, t
        n_min = _upper_bound(fit, fit[0], mu)
        if engine == ENG_STEADY and fit[0] == loc_value:
            # every worst member is a copy of the trap
            if sel == SEL_INVERSE_ELITIST:
                return TIMEOUT, hit_o, hit_l, t
            if sel == SEL_INVERSE_TOURNAMENT and fast_forward:
                q = ((mu - n_min) / mu) ** k
                G = geometric_trials(q, rng)
                if t + G > INT64_MAX:
                    return TIMEOUT, hit_o, hit_l, INT64_MAX
                if t + G - 1.0 >= budget:
                    return BUDGET, hit_o, hit_l, budget
                t += int(G) - 1
                skip_prefix = n_min

        # parent selection
        if engine != ENG_STEADY or sel == SEL_UNIFORM:
            i = _uniform_int(rng, mu)
        elif sel == SEL_INVERSE_ELITIST:
            i = _uniform_int(rng, n_min)
        else:
            i = -1
            nt = 0
            for _ in range(k):
                j = skip_prefix + _uniform_int(rng, mu - skip_prefix)
                better = i < 0 or (fit[j] < fit[i] if sel == SEL_INVERSE_TOURNAMENT else fit[j] > fit[i])
                if better:
                    i = j
                    nt = 1
                elif fit[j] == fit[i]:
                    nt += 1
                    if _uniform_int(rng, nt) == 0:
                        i = j
            skip_prefix = 0

        # mutation
        cpo = po[i]
        csuf = suf[i]
        if mut == MUT_RLS:
            pos = _uniform_int(rng, n)
            if pos < cpo:
                cpo -= 1
            elif pos < m:
                cpo += 1
            else:
                csuf ^= 1 << (ell - 1 - (pos - m))
        else:
            base = cpo
            pos = _next_flip(-1, log_keep, rng)
            while pos < n:
                if pos < base:
                    cpo -= 1
                elif pos < m:
                    cpo += 1
                else:
                    csuf ^= 1 << (ell - 1 - (pos - m))
                pos = _next_flip(pos, log_keep, rng)
        cl = _lso(csuf, ell)
        cf = _tg_value(cpo, cl, n, ell, m, thr)
        t += 1
        if cpo == m and hit_l < 0:
            hit_l = t
        if cpo == thr and cl == ell and hit_o < 0:
            hit_o = t

        # replacement
        slot = -1
        if engine == ENG_STEADY:
            if cf > fit[0]:
                slot = _uniform_int(rng, n_min)
            elif cf == fit[0]:
                r = _uniform_int(rng, n_min + 1)
                if r < n_min:
                    slot = r
        elif cf >= fit[i]:
            slot = i
        if slot >= 0:
            _reposition(fit, po, suf, slot, cf, cpo, csuf, mu)
