"""Numba kernels for the grid maximal operator.

All window averages go through ``_mean1`` (1D) and ``_mean2`` (2D) so the
naive enumeration and the fast kernels see the very same floating point
value for a given cube. The 1D fast kernel additionally needs to compare
slopes between points ``(e, S[e])`` of the prefix-sum graph; those
comparisons are done exactly (error-free transformations plus an exact
sign-of-sum), and ``_mean1`` rounds the exact slope correctly, which makes
the float maximum independent of which optimal window is found.

Edge coordinates: for a box of ``n`` cells and a margin of ``m`` cells on
each side, edges are numbered ``0 .. n + 2m`` and cell ``x`` of the box
spans edges ``m + x`` and ``m + x + 1``.
"""
import numpy as np
import numba

_SPLITTER = 134217729.0  # 2**27 + 1
_EPS = 2.0 ** -53


@numba.njit(cache=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@numba.njit(cache=True, inline="always")
def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


@numba.njit(cache=True, inline="always")
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@numba.njit(cache=True)
def _sign_of_sum(buf, m):
    """Exact sign of ``sum(buf[:m])``; ``buf`` is overwritten."""
    for _ in range(64):
        for i in range(1, m):
            s, e = _two_sum(buf[i], buf[i - 1])
            buf[i] = s
            buf[i - 1] = e
        top = buf[m - 1]
        rest = 0.0
        for i in range(m - 1):
            rest += abs(buf[i])
        if rest == 0.0 or abs(top) > 2.0 * rest:
            if top > 0.0:
                return 1
            if top < 0.0:
                return -1
            return 0
    top = buf[m - 1]
    return 1 if top > 0.0 else (-1 if top < 0.0 else 0)


@numba.njit(cache=True)
def _slope_cmp(S, a1, b1, a2, b2, buf):
    """Sign of slope(a1, b1) - slope(a2, b2) on the graph of S, exactly."""
    k1 = float(b1 - a1)
    k2 = float(b2 - a2)
    d1 = S[b1] - S[a1]
    d2 = S[b2] - S[a2]
    lhs = d1 * k2
    rhs = d2 * k1
    diff = lhs - rhs
    bound = 8.0 * _EPS * (abs(lhs) + abs(rhs))
    if diff > bound:
        return 1
    if diff < -bound:
        return -1
    d1h, d1l = _two_sum(S[b1], -S[a1])
    d2h, d2l = _two_sum(S[b2], -S[a2])
    buf[0], buf[1] = _two_prod(d1h, k2)
    buf[2], buf[3] = _two_prod(d1l, k2)
    buf[4], buf[5] = _two_prod(-d2h, k1)
    buf[6], buf[7] = _two_prod(-d2l, k1)
    return _sign_of_sum(buf, 8)


@numba.njit(cache=True)
def _mean1(S, a, b):
    """Correctly rounded (S[b] - S[a]) / (b - a) for edges a < b."""
    k = float(b - a)
    hi, lo = _two_sum(S[b], -S[a])
    q = hi / k
    if lo == 0.0:
        return q
    ph, pl = _two_prod(q, k)
    r = ((hi - ph) - pl) + lo
    return q + r / k


@numba.njit(cache=True)
def _mean2(S, a0, a1, k):
    """Average over the k-by-k block of cells whose lower edge is (a0, a1)."""
    b0 = a0 + k
    b1 = a1 + k
    s = (S[b0, b1] - S[a0, b1]) - (S[b0, a1] - S[a0, a1])
    return s / float(k * k)


@numba.njit(cache=True)
def maximal_1d_hull(S, n, margin):
    """Uncentered grid maximal function in 1D via hull bridges.

    For cell x the answer is the largest slope between an edge on the left
    (<= margin + x) and an edge on the right (>= margin + x + 1). The
    optimum pairs a vertex of the lower hull of the left points with a
    vertex of the upper hull of the right points; both hulls are stored as
    parent-pointer chains so every prefix/suffix hull is available.
    """
    m = S.shape[0]
    buf = np.empty(8)
    prev = np.empty(m, np.int64)
    nxt = np.empty(m, np.int64)
    stack = np.empty(m, np.int64)
    top = 0
    for e in range(m):
        while top >= 2 and _slope_cmp(S, stack[top - 2], stack[top - 1],
                                      stack[top - 1], e, buf) >= 0:
            top -= 1
        prev[e] = stack[top - 1] if top > 0 else -1
        stack[top] = e
        top += 1
    top = 0
    for e in range(m - 1, -1, -1):
        while top >= 2 and _slope_cmp(S, e, stack[top - 1],
                                      stack[top - 1], stack[top - 2], buf) <= 0:
            top -= 1
        nxt[e] = stack[top - 1] if top > 0 else -1
        stack[top] = e
        top += 1

    # walked prefixes of the two chains, so either endpoint can step back
    ppath = np.empty(m, np.int64)
    qpath = np.empty(m, np.int64)
    out = np.empty(n)
    for x in range(n):
        ppath[0] = margin + x
        qpath[0] = margin + x + 1
        pt = 0
        qt = 0
        moved = True
        while moved:
            moved = False
            p = ppath[pt]
            q = qpath[qt]
            # left endpoint: ascend along the lower hull in either direction
            while prev[p] >= 0 and _slope_cmp(S, prev[p], q, p, q, buf) > 0:
                pt += 1
                p = prev[p]
                ppath[pt] = p
                moved = True
            while pt > 0 and _slope_cmp(S, ppath[pt - 1], q, p, q, buf) > 0:
                pt -= 1
                p = ppath[pt]
                moved = True
            while nxt[q] >= 0 and _slope_cmp(S, p, nxt[q], p, q, buf) > 0:
                qt += 1
                q = nxt[q]
                qpath[qt] = q
                moved = True
            while qt > 0 and _slope_cmp(S, p, qpath[qt - 1], p, q, buf) > 0:
                qt -= 1
                q = qpath[qt]
                moved = True
        out[x] = _mean1(S, ppath[pt], qpath[qt])
    return out


@numba.njit(cache=True)
def maximal_1d_enumerate(S, n, margin):
    """Every cube side, every window: monotone-deque max per side."""
    m = S.shape[0] - 1  # enlarged cells
    out = np.zeros(n)
    means = np.empty(m)
    dq = np.empty(m, np.int64)
    for k in range(1, m + 1):
        last = m - k  # largest lower edge
        for a in range(last + 1):
            means[a] = _mean1(S, a, a + k)
        head = 0
        tail = 0
        nxt_a = 0
        for x in range(n):
            hi = min(margin + x, last)
            lo = max(0, margin + x - k + 1)
            while nxt_a <= hi:
                v = means[nxt_a]
                while tail > head and means[dq[tail - 1]] <= v:
                    tail -= 1
                dq[tail] = nxt_a
                tail += 1
                nxt_a += 1
            while dq[head] < lo:
                head += 1
            v = means[dq[head]]
            if v > out[x]:
                out[x] = v
    return out


@numba.njit(cache=True)
def maximal_2d_enumerate(S, n, margin):
    """Every cube, scattered into the box cells it covers."""
    m = S.shape[0] - 1
    out = np.zeros((n, n))
    for k in range(1, m + 1):
        for a0 in range(m - k + 1):
            x0lo = max(a0 - margin, 0)
            x0hi = min(a0 + k - margin, n)
            if x0lo >= x0hi:
                continue
            for a1 in range(m - k + 1):
                x1lo = max(a1 - margin, 0)
                x1hi = min(a1 + k - margin, n)
                if x1lo >= x1hi:
                    continue
                v = _mean2(S, a0, a1, k)
                for i in range(x0lo, x0hi):
                    for j in range(x1lo, x1hi):
                        if v > out[i, j]:
                            out[i, j] = v
    return out


@numba.njit(cache=True)
def _window_max_vhgw(src, k, start, count, g, h, dst):
    """dst[i] = max(src[start + i - k + 1 .. start + i]) with -inf padding.

    van Herk / Gil-Werman: block-wise prefix maxima g and suffix maxima h
    over the padded sequence, two lookups per output.
    """
    m = src.shape[0]
    total = m + 2 * (k - 1)
    # padded index j maps to src[j - (k - 1)]
    for j in range(total):
        s = j - (k - 1)
        v = src[s] if 0 <= s < m else -np.inf
        if j % k == 0 or v > g[j - 1]:
            g[j] = v
        else:
            g[j] = g[j - 1]
    for j in range(total - 1, -1, -1):
        s = j - (k - 1)
        v = src[s] if 0 <= s < m else -np.inf
        if j == total - 1 or (j + 1) % k == 0 or v > h[j + 1]:
            h[j] = v
        else:
            h[j] = h[j + 1]
    for i in range(count):
        e = start + i + (k - 1)  # window end in padded coordinates
        b = e - k + 1
        u = h[b]
        w = g[e]
        dst[i] = u if u > w else w


@numba.njit(cache=True)
def maximal_2d_sliding(S, n, margin):
    """Per side: all cube means, then a separable k-by-k sliding max."""
    m = S.shape[0] - 1
    out = np.zeros((n, n))
    total = m + 2 * m
    g = np.empty(total)
    h = np.empty(total)
    means = np.empty((m, m))
    rowmax = np.empty((n, m))
    col = np.empty(m)
    tmp = np.empty(n)
    for k in range(1, m + 1):
        c = m - k + 1
        for a0 in range(c):
            for a1 in range(c):
                means[a0, a1] = _mean2(S, a0, a1, k)
        # axis 0: for each a1, max over lower edges a0 whose cube covers row x0
        for a1 in range(c):
            for a0 in range(c):
                col[a0] = means[a0, a1]
            _window_max_vhgw(col[:c], k, margin, n, g, h, tmp)
            for x0 in range(n):
                rowmax[x0, a1] = tmp[x0]
        for x0 in range(n):
            _window_max_vhgw(rowmax[x0, :c], k, margin, n, g, h, tmp)
            for x1 in range(n):
                if tmp[x1] > out[x0, x1]:
                    out[x0, x1] = tmp[x1]
    return out
