"""Hot loops over determinant pairs.

Each kernel exists twice: a numba version (``*_nb``) compiled with ``njit``
and a vectorized numpy version (``*_np``).  The public names dispatch on
``papt._backend.USE_NUMBA``.  Determinants are int64 spin-orbital bitstrings
(bit ``2p`` = orbital ``p`` alpha, bit ``2p+1`` = orbital ``p`` beta).
"""
import numpy as np

from ._backend import USE_NUMBA, njit

MAX_SPIN_ORBITALS = 62


# ---------------------------------------------------------------- numba path

@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _lowest(x):
    """Index of the lowest set bit of a nonzero ``x``."""
    return _popcount((x & -x) - 1)


@njit(cache=True)
def _sign_below(state, k):
    return 1.0 - 2.0 * (_popcount(state & ((np.int64(1) << k) - 1)) & 1)


@njit(cache=True)
def slater_condon_nb(keys, h, eri, ecore):
    n = keys.shape[0]
    nso = h.shape[0]
    out = np.zeros((n, n))
    occ = np.empty(nso, dtype=np.int64)
    for jj in range(n):
        kj = keys[jj]
        nocc = 0
        for k in range(nso):
            if (kj >> k) & 1:
                occ[nocc] = k
                nocc += 1
        e = ecore
        for a in range(nocc):
            i = occ[a]
            e += h[i, i]
            for b in range(a + 1, nocc):
                e += eri[i, occ[b], i, occ[b]]
        out[jj, jj] = e
        for ii in range(jj):
            ki = keys[ii]
            x = ki ^ kj
            nd = _popcount(x)
            if nd == 2:
                q = _lowest(x & kj)
                p = _lowest(x & ki)
                ph = _sign_below(kj, q)
                s1 = kj ^ (np.int64(1) << q)
                ph *= _sign_below(s1, p)
                v = h[p, q]
                for a in range(nocc):
                    v += eri[p, occ[a], q, occ[a]]
                v *= ph
            elif nd == 4:
                xj = x & kj
                xi = x & ki
                q1 = _lowest(xj)
                q2 = _lowest(xj ^ (np.int64(1) << q1))
                p1 = _lowest(xi)
                p2 = _lowest(xi ^ (np.int64(1) << p1))
                ph = _sign_below(kj, q1)
                s1 = kj ^ (np.int64(1) << q1)
                ph *= _sign_below(s1, q2)
                s2 = s1 ^ (np.int64(1) << q2)
                ph *= _sign_below(s2, p2)
                s3 = s2 | (np.int64(1) << p2)
                ph *= _sign_below(s3, p1)
                v = ph * eri[p1, p2, q1, q2]
            else:
                continue
            out[ii, jj] = v
            out[jj, ii] = v
    return out


@njit(cache=True)
def single_table_nb(keys, sorted_keys, order, nso):
    n = keys.shape[0]
    cap = n * nso * nso // 4 + 1
    src = np.empty(cap, dtype=np.int64)
    dst = np.empty(cap, dtype=np.int64)
    pp = np.empty(cap, dtype=np.int64)
    qq = np.empty(cap, dtype=np.int64)
    ph = np.empty(cap)
    m = 0
    for jj in range(n):
        kj = keys[jj]
        for q in range(nso):
            if not (kj >> q) & 1:
                continue
            s1 = kj ^ (np.int64(1) << q)
            sq = _sign_below(kj, q)
            for p in range(q & 1, nso, 2):
                if p == q or (kj >> p) & 1:
                    continue
                new = s1 | (np.int64(1) << p)
                pos = np.searchsorted(sorted_keys, new)
                if pos >= n or sorted_keys[pos] != new:
                    continue
                if m == cap:
                    cap *= 2
                    src = np.concatenate((src, np.empty(cap - m, dtype=np.int64)))
                    dst = np.concatenate((dst, np.empty(cap - m, dtype=np.int64)))
                    pp = np.concatenate((pp, np.empty(cap - m, dtype=np.int64)))
                    qq = np.concatenate((qq, np.empty(cap - m, dtype=np.int64)))
                    ph = np.concatenate((ph, np.empty(cap - m)))
                src[m] = jj
                dst[m] = order[pos]
                pp[m] = p
                qq[m] = q
                ph[m] = sq * _sign_below(s1, p)
                m += 1
    return src[:m], dst[:m], pp[:m], qq[:m], ph[:m]


# ---------------------------------------------------------------- numpy path

def _bit(k):
    return np.left_shift(np.int64(1), np.asarray(k, dtype=np.int64))


def _idx(pow2):
    return np.bitwise_count(pow2 - 1).astype(np.int64)


def _sign_below_np(state, k):
    return 1.0 - 2.0 * (np.bitwise_count(state & (_bit(k) - 1)) & 1)


def occupations(keys, nso):
    return ((keys[:, None] >> np.arange(nso, dtype=np.int64)) & 1).astype(float)


def slater_condon_np(keys, h, eri, ecore, block=2_000_000):
    keys = np.asarray(keys, dtype=np.int64)
    n = keys.size
    nso = h.shape[0]
    occ = occupations(keys, nso)
    jmat = np.einsum("ijij->ij", eri)
    out = np.zeros((n, n))
    out[np.arange(n), np.arange(n)] = ecore + occ @ np.diag(h) + 0.5 * np.einsum("ni,ij,nj->n", occ, jmat, occ)
    gsum = np.einsum("pkqk->pqk", eri)
    rows = max(1, block // max(n, 1))
    for i0 in range(0, n, rows):
        ii = np.arange(i0, min(n, i0 + rows))
        x = keys[ii, None] ^ keys[None, :]
        nd = np.bitwise_count(x)
        upper = np.arange(n)[None, :] > ii[:, None]

        a, b = np.nonzero(upper & (nd == 2))
        if a.size:
            I, J = ii[a], b
            ki, kj = keys[I], keys[J]
            xx = ki ^ kj
            q = _idx(xx & kj)
            p = _idx(xx & ki)
            s1 = kj ^ _bit(q)
            ph = _sign_below_np(kj, q) * _sign_below_np(s1, p)
            v = h[p, q] + np.einsum("tk,tk->t", gsum[p, q], occ[J])
            out[I, J] = out[J, I] = ph * v

        a, b = np.nonzero(upper & (nd == 4))
        if a.size:
            I, J = ii[a], b
            ki, kj = keys[I], keys[J]
            xx = ki ^ kj
            xj, xi = xx & kj, xx & ki
            lq = xj & -xj
            lp = xi & -xi
            q1, q2 = _idx(lq), _idx(xj ^ lq)
            p1, p2 = _idx(lp), _idx(xi ^ lp)
            s1 = kj ^ lq
            s2 = s1 ^ _bit(q2)
            s3 = s2 | _bit(p2)
            ph = (_sign_below_np(kj, q1) * _sign_below_np(s1, q2)
                  * _sign_below_np(s2, p2) * _sign_below_np(s3, p1))
            out[I, J] = out[J, I] = ph * eri[p1, p2, q1, q2]
    return out


def single_table_np(keys, sorted_keys, order, nso):
    keys = np.asarray(keys, dtype=np.int64)
    n = keys.size
    parts = []
    for q in range(nso):
        has_q = ((keys >> q) & 1).astype(bool)
        if not has_q.any():
            continue
        for p in range(q & 1, nso, 2):
            if p == q:
                continue
            sel = np.flatnonzero(has_q & ~((keys >> p) & 1).astype(bool))
            if not sel.size:
                continue
            kj = keys[sel]
            s1 = kj ^ np.int64(1 << q)
            new = s1 | np.int64(1 << p)
            pos = np.minimum(np.searchsorted(sorted_keys, new), n - 1)
            ok = sorted_keys[pos] == new
            if not ok.any():
                continue
            sel, kj, s1, pos = sel[ok], kj[ok], s1[ok], pos[ok]
            ph = _sign_below_np(kj, q) * _sign_below_np(s1, p)
            parts.append((sel, order[pos], np.full(sel.size, p), np.full(sel.size, q), ph))
    if not parts:
        e = np.empty(0, dtype=np.int64)
        return e, e, e, e, np.empty(0)
    return tuple(np.concatenate(c) for c in zip(*parts))


# ---------------------------------------------------------------- dispatch

def slater_condon(keys, h, eri, ecore):
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    h = np.ascontiguousarray(h, dtype=float)
    eri = np.ascontiguousarray(eri, dtype=float)
    if USE_NUMBA:
        return slater_condon_nb(keys, h, eri, float(ecore))
    return slater_condon_np(keys, h, eri, float(ecore))


def single_table(keys, sorted_keys, order, nso):
    """Spin-conserving single excitations ``p^+ q |J> = phase |I>`` inside the space.

    Returns arrays ``(J, I, p, q, phase)``.
    """
    args = (np.ascontiguousarray(keys, dtype=np.int64), np.ascontiguousarray(sorted_keys, dtype=np.int64),
            np.ascontiguousarray(order, dtype=np.int64), int(nso))
    if USE_NUMBA:
        return single_table_nb(*args)
    return single_table_np(*args)
