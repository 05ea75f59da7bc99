"""Hot numeric kernels with two interchangeable backends.

The numba backend jit-compiles the row-loop implementations below; the numpy
backend runs vectorized equivalents (and keeps the plain loops where the
computation is inherently sequential, as in partition enumeration). Selection:

    PLATFORM_AUCTIONS_BACKEND = auto | numba | numpy    (default auto)

"auto" uses numba when importable. Both backends take identical inputs
(callers pre-draw random arrays) and agree to floating-point roundoff;
results within one backend are bit-reproducible.

Shared conventions: profile matrices are float64 with one profile per row,
sorted descending where noted; partition flag matrices are uint8 with 1
meaning "in sample".
"""

from __future__ import annotations

import os

import numpy as np


def _pick_backend() -> str:
    env = os.environ.get("PLATFORM_AUCTIONS_BACKEND", "auto").strip().lower()
    if env in ("numpy", "python"):
        return "numpy"
    if env == "numba":
        import numba  # noqa: F401  (raise loudly if requested but missing)
        return "numba"
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        return "numpy"


BACKEND = _pick_backend()


def backend_name() -> str:
    return BACKEND


# ---------------------------------------------------------------------------
# loop implementations (compiled under numba, also used as the fallback for
# the partition kernels where vectorization does not apply)
# ---------------------------------------------------------------------------

def _two_level_row(row, p, q, k, alpha, beta):
    n = row.shape[0]
    s = 0
    t = 0
    sum_s = 0.0
    sum_t = 0.0
    for j in range(n):
        v = row[j]
        if v > p:
            s += 1
            sum_s += v
        elif v > q:
            t += 1
            sum_t += v
    if s > k:
        a = k / s
        return alpha * sum_s * a + beta * p * k
    if s + t <= k:
        return alpha * (sum_s + sum_t) + beta * q * (s + t)
    pay = p - (p - q) * (k - s + 1) / (t + 1)
    a = (k - s) / t
    return alpha * sum_s + beta * pay * s + alpha * sum_t * a + beta * q * (k - s)


def _two_level_values_loop(V, p, q, k, alpha, beta):
    rows = V.shape[0]
    out = np.empty(rows)
    for r in range(rows):
        out[r] = _two_level_row(V[r], p, q, k, alpha, beta)
    return out


def _two_level_values_pair_loop(V, ps, qs, k, alpha, beta):
    # one (p, q) pair per row
    rows = V.shape[0]
    out = np.empty(rows)
    for r in range(rows):
        out[r] = _two_level_row(V[r], ps[r], qs[r], k, alpha, beta)
    return out


def _benchmark_values_loop(V, k, alpha, beta):
    # V sorted descending per row; candidates are 0 and the row's values
    rows, n = V.shape
    out = np.empty(rows)
    cand = np.empty(n + 1)
    for r in range(rows):
        cand[0] = 0.0
        for j in range(n):
            cand[j + 1] = V[r, n - 1 - j]    # ascending
        best = 0.0
        for ai in range(n + 1):
            for bi in range(ai + 1):
                val = _two_level_row(V[r], cand[ai], cand[bi], k, alpha, beta)
                if val > best:
                    best = val
        out[r] = best
    return out


def _vickrey_values_loop(V, k, alpha, beta):
    # V sorted descending per row
    rows, n = V.shape
    out = np.empty(rows)
    for r in range(rows):
        w = V[r, k] if n > k else 0.0
        a = 0
        m = 0
        sum_gt = 0.0
        sum_eq = 0.0
        for j in range(n):
            v = V[r, j]
            if v > w:
                a += 1
                sum_gt += v
            elif v == w:
                m += 1
                sum_eq += v
        tie = 0.0
        if m > 0:
            tie = (k - a) / m
            if tie > 1.0:
                tie = 1.0
        out[r] = alpha * (sum_gt + tie * sum_eq) + beta * w * (a + tie * m)
    return out


def _ratio_auction_values_loop(V, r, b, alpha, beta):
    rows = V.shape[0]
    out = np.empty(rows)
    for i in range(rows):
        v1 = V[i, 0]
        v2 = V[i, 1]
        # dictator branches w2 = 0 and w2 = inf, weight (1-b) each
        acc = (1.0 - b) * (alpha * v1 + alpha * v2)
        # branch w2 = 1/r: agent 1 wins iff r*v1 > v2
        if r * v1 > v2:
            lo = alpha * v1 + beta * v2 / r
        elif r * v1 < v2:
            lo = alpha * v2 + beta * r * v1
        else:
            lo = 0.5 * (alpha * v1 + beta * v2 / r) + 0.5 * (alpha * v2 + beta * r * v1)
        # branch w2 = r: agent 1 wins iff v1 > r*v2
        if v1 > r * v2:
            hi = alpha * v1 + beta * r * v2
        elif v1 < r * v2:
            hi = alpha * v2 + beta * v1 / r
        else:
            hi = 0.5 * (alpha * v1 + beta * r * v2) + 0.5 * (alpha * v2 + beta * v1 / r)
        out[i] = acc + (b - 0.5) * (lo + hi)
    return out


def _count_balanced_loop(flags):
    trials, n = flags.shape
    cnt = 0
    for t in range(trials):
        if n < 2 or flags[t, 0] or not flags[t, 1]:
            continue
        c = 1
        ok = True
        for i in range(2, n):
            if flags[t, i]:
                c += 1
            if 4 * c < i + 1 or 4 * c > 3 * (i + 1):
                ok = False
                break
        if ok:
            cnt += 1
    return cnt


def _lottery_value_desc(sv, m, k, p):
    s = 0
    tot = 0.0
    for i in range(m):
        if sv[i] > p:
            s += 1
            tot += sv[i]
    if s == 0:
        return 0.0
    a = 1.0 if s <= k else k / s
    return (tot - p * s) * a


def _opt_price_desc(sv, m, k):
    # candidates ascending; strict improvement keeps the smallest optimal p
    best_p = 0.0
    best_v = _lottery_value_desc(sv, m, k, 0.0)
    for c in range(m - 1, -1, -1):
        p = sv[c]
        if p <= 0.0:
            continue
        if c < m - 1 and sv[c] == sv[c + 1]:
            continue
        val = _lottery_value_desc(sv, m, k, p)
        if val > best_v:
            best_v = val
            best_p = p
    return best_p, best_v


def _sort_desc_prefix(sv, m):
    for a in range(1, m):
        key = sv[a]
        b = a - 1
        while b >= 0 and sv[b] < key:
            sv[b + 1] = sv[b]
            b -= 1
        sv[b + 1] = key


def _rsol_exact_loop(values, k):
    n = values.shape[0]
    total = 1 << n
    alloc = np.zeros(n)
    pay = np.zeros(n)
    sv = np.empty(n)
    for mask in range(total):
        m = 0
        for i in range(n):
            if mask >> i & 1:
                sv[m] = values[i]
                m += 1
        _sort_desc_prefix(sv, m)
        p, _ = _opt_price_desc(sv, m, k)
        s = 0
        for i in range(n):
            if not (mask >> i & 1) and values[i] > p:
                s += 1
        if s > 0:
            a = 1.0 if s <= k else k / s
            for i in range(n):
                if not (mask >> i & 1) and values[i] > p:
                    alloc[i] += a
                    pay[i] += p * a
    inv = 1.0 / total
    return alloc * inv, pay * inv


def _rsol_partition_values_loop(values, k, flags, alpha, beta):
    trials, n = flags.shape
    out = np.empty(trials)
    sv = np.empty(n)
    for t in range(trials):
        m = 0
        for i in range(n):
            if flags[t, i]:
                sv[m] = values[i]
                m += 1
        _sort_desc_prefix(sv, m)
        p, _ = _opt_price_desc(sv, m, k)
        s = 0
        tot = 0.0
        for i in range(n):
            if not flags[t, i] and values[i] > p:
                s += 1
                tot += values[i]
        if s == 0:
            out[t] = 0.0
        else:
            a = 1.0 if s <= k else k / s
            out[t] = alpha * tot * a + beta * p * s * a
    return out


# ---------------------------------------------------------------------------
# vectorized numpy equivalents
# ---------------------------------------------------------------------------

def _two_level_values_np(V, p, q, k, alpha, beta):
    # p and q may be scalars or per-row vectors of shape (rows,)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pc = p[:, None] if p.ndim == 1 else p
    qc = q[:, None] if q.ndim == 1 else q
    mask_s = V > pc
    mask_t = (V > qc) & ~mask_s
    s = mask_s.sum(axis=1)
    t = mask_t.sum(axis=1)
    sum_s = np.where(mask_s, V, 0.0).sum(axis=1)
    sum_t = np.where(mask_t, V, 0.0).sum(axis=1)
    over = s > k
    under = ~over & (s + t <= k)
    a_over = k / np.maximum(s, 1)
    pay = p - (p - q) * (k - s + 1) / (t + 1)
    a_mid = (k - s) / np.maximum(t, 1)
    out = np.where(
        over,
        alpha * sum_s * a_over + beta * p * k,
        np.where(under,
                 alpha * (sum_s + sum_t) + beta * q * (s + t),
                 alpha * sum_s + beta * pay * s + alpha * sum_t * a_mid + beta * q * (k - s)))
    return out


def _benchmark_values_np(V, k, alpha, beta):
    rows, n = V.shape
    cand = np.concatenate([np.zeros((rows, 1)), V[:, ::-1]], axis=1)
    best = np.zeros(rows)
    for ai in range(n + 1):
        p = cand[:, ai]
        for bi in range(ai + 1):
            q = cand[:, bi]
            vals = _two_level_values_np(V, p, q, k, alpha, beta)
            np.maximum(best, vals, out=best)
    return best


def _vickrey_values_np(V, k, alpha, beta):
    rows, n = V.shape
    w = V[:, k] if n > k else np.zeros(rows)
    wc = w[:, None]
    gt = V > wc
    eq = V == wc
    a = gt.sum(axis=1)
    m = eq.sum(axis=1)
    sum_gt = np.where(gt, V, 0.0).sum(axis=1)
    sum_eq = np.where(eq, V, 0.0).sum(axis=1)
    tie = np.minimum((k - a) / np.maximum(m, 1), 1.0)
    return alpha * (sum_gt + tie * sum_eq) + beta * w * (a + tie * m)


def _ratio_auction_values_np(V, r, b, alpha, beta):
    v1 = V[:, 0]
    v2 = V[:, 1]
    acc = (1.0 - b) * (alpha * v1 + alpha * v2)
    a1_lo = alpha * v1 + beta * v2 / r
    a2_lo = alpha * v2 + beta * r * v1
    lo = np.where(r * v1 > v2, a1_lo, np.where(r * v1 < v2, a2_lo, 0.5 * (a1_lo + a2_lo)))
    a1_hi = alpha * v1 + beta * r * v2
    a2_hi = alpha * v2 + beta * v1 / r
    hi = np.where(v1 > r * v2, a1_hi, np.where(v1 < r * v2, a2_hi, 0.5 * (a1_hi + a2_hi)))
    return acc + (b - 0.5) * (lo + hi)


def _count_balanced_np(flags):
    n = flags.shape[1]
    if n < 2:
        return 0
    ok = (flags[:, 0] == 0) & (flags[:, 1] == 1)
    if n > 2:
        c = np.cumsum(flags[:, 2:], axis=1, dtype=np.int64) + 1
        idx = np.arange(3, n + 1, dtype=np.int64)
        ok &= np.all((4 * c >= idx) & (4 * c <= 3 * idx), axis=1)
    return int(np.count_nonzero(ok))


def _opt_prices_np(values, k, B):
    """Per-row optimal lottery price for the agents flagged 1 in B.

    Candidates are 0 and all profile values; extra candidates between the
    flagged agents' values never win because the lottery value is strictly
    decreasing in p inside each cell, so the choice matches the loop kernel.
    """
    n = values.shape[0]
    cand = np.concatenate([np.zeros(1), np.sort(values)])
    G = (values[:, None] > cand[None, :]).astype(np.float64)
    cnt = B @ G
    tot = (B * values[None, :]) @ G
    a = np.minimum(1.0, k / np.maximum(cnt, 1.0))
    vals = (tot - cand[None, :] * cnt) * a
    best_v = vals[:, 0].copy()
    best_c = np.zeros(B.shape[0], dtype=np.int64)
    for c in range(1, n + 1):
        better = vals[:, c] > best_v
        best_v = np.where(better, vals[:, c], best_v)
        best_c = np.where(better, c, best_c)
    return cand, G, best_c, best_v


def _rsol_partition_values_np(values, k, flags, alpha, beta):
    values = np.asarray(values, dtype=np.float64)
    B = flags.astype(np.float64)
    cand, G, best_c, _ = _opt_prices_np(values, k, B)
    M = 1.0 - B
    col = best_c[:, None]
    cnt_m = np.take_along_axis(M @ G, col, axis=1)[:, 0]
    tot_m = np.take_along_axis((M * values[None, :]) @ G, col, axis=1)[:, 0]
    p = cand[best_c]
    a_m = np.minimum(1.0, k / np.maximum(cnt_m, 1.0))
    out = alpha * tot_m * a_m + beta * p * cnt_m * a_m
    return np.where(cnt_m > 0, out, 0.0)


def _rsol_exact_np(values, k):
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    total = 1 << n
    alloc = np.zeros(n)
    pay = np.zeros(n)
    bits = np.arange(n, dtype=np.uint64)[None, :]
    step = 1 << 14
    for start in range(0, total, step):
        masks = np.arange(start, min(start + step, total), dtype=np.uint64)
        B = ((masks[:, None] >> bits) & 1).astype(np.float64)
        cand, _, best_c, _ = _opt_prices_np(values, k, B)
        p = cand[best_c]
        served = (1.0 - B) * (values[None, :] > p[:, None])
        cnt_m = served.sum(axis=1)
        a_m = np.minimum(1.0, k / np.maximum(cnt_m, 1.0))
        alloc += (served * a_m[:, None]).sum(axis=0)
        pay += (served * (a_m * p)[:, None]).sum(axis=0)
    return alloc / total, pay / total


# ---------------------------------------------------------------------------
# backend dispatch
# ---------------------------------------------------------------------------

if BACKEND == "numba":
    from numba import njit

    _jit = njit(cache=True, nogil=True)
    _two_level_row = _jit(_two_level_row)
    _lottery_value_desc = _jit(_lottery_value_desc)
    _opt_price_desc = _jit(_opt_price_desc)
    _sort_desc_prefix = _jit(_sort_desc_prefix)

    _two_level_scalar = _jit(_two_level_values_loop)
    _two_level_pair = _jit(_two_level_values_pair_loop)

    def two_level_values(V, p, q, k, alpha, beta):
        # mirror the numpy kernel: p and q may be scalars or per-row vectors
        if np.ndim(p) or np.ndim(q):
            rows = V.shape[0]
            ps = np.ascontiguousarray(np.broadcast_to(
                np.asarray(p, dtype=np.float64), (rows,)))
            qs = np.ascontiguousarray(np.broadcast_to(
                np.asarray(q, dtype=np.float64), (rows,)))
            return _two_level_pair(V, ps, qs, k, alpha, beta)
        return _two_level_scalar(V, float(p), float(q), k, alpha, beta)

    benchmark_values = _jit(_benchmark_values_loop)
    vickrey_values = _jit(_vickrey_values_loop)
    ratio_auction_values = _jit(_ratio_auction_values_loop)
    count_balanced = _jit(_count_balanced_loop)
    rsol_exact_outcome = _jit(_rsol_exact_loop)
    rsol_partition_values = _jit(_rsol_partition_values_loop)
    opt_lottery_price_desc = _opt_price_desc
else:
    two_level_values = _two_level_values_np
    benchmark_values = _benchmark_values_np
    vickrey_values = _vickrey_values_np
    ratio_auction_values = _ratio_auction_values_np
    count_balanced = _count_balanced_np
    rsol_exact_outcome = _rsol_exact_np
    rsol_partition_values = _rsol_partition_values_np
    opt_lottery_price_desc = _opt_price_desc
