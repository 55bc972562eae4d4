"""numba kernels for the random-surfer simulation.

Walkers are split into a fixed number of streams. Stream ``k`` draws from a
splitmix64 generator seeded with ``seed + k``, so results depend only on
``(seed, walkers, n_streams)`` and never on how streams are scheduled.
"""
import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

OK = 0
HOP_LIMIT = 1


@nb.njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(inline="always")
def _uniform(state):
    state = state + _GOLDEN
    return state, (_mix(state) >> _S11) * _INV53


@nb.njit(inline="always")
def _pick(cum, lo, hi, u):
    # first position in cum[lo:hi] whose value exceeds u
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


@nb.njit(cache=True)
def source_walks(indptr, indices, cum, src_idx, src_cum, n, walkers, n_streams, seed, max_hops):
    """Inject walkers at the source and count per-site visits.

    Returns ``(visits, visits_sq, hits, status, bad_walker, bad_node)`` where
    ``visits_sq`` sums squared per-walker visit counts and ``hits`` counts
    walkers that reached each site at least once.
    """
    visits = np.zeros(n, np.int64)
    visits_sq = np.zeros(n, np.float64)
    hits = np.zeros(n, np.int64)
    cnt = np.zeros(n, np.int64)
    touched = np.empty(n, np.int64)
    for s in range(n_streams):
        state = _mix(np.uint64(seed + s))
        lo_w = walkers * s // n_streams
        hi_w = walkers * (s + 1) // n_streams
        for w in range(lo_w, hi_w):
            state, u = _uniform(state)
            x = src_idx[_pick(src_cum, 0, src_cum.size - 1, u)]
            n_touched = 0
            hops = 0
            while True:
                if cnt[x] == 0:
                    touched[n_touched] = x
                    n_touched += 1
                cnt[x] += 1
                hops += 1
                if hops > max_hops:
                    return visits, visits_sq, hits, HOP_LIMIT, w, x
                state, u = _uniform(state)
                lo = indptr[x]
                hi = indptr[x + 1]
                if hi == lo or u >= cum[hi - 1]:
                    break
                x = indices[_pick(cum, lo, hi - 1, u)]
            for t in range(n_touched):
                y = touched[t]
                c = cnt[y]
                visits[y] += c
                visits_sq[y] += c * c
                hits[y] += 1
                cnt[y] = 0
    return visits, visits_sq, hits, OK, -1, -1


@nb.njit(cache=True)
def path_lengths(indptr, indices, cum, n, walkers, n_streams, seed, max_hops):
    """Start ``walkers`` walks at every site and record site visits until absorption.

    Returns per-site ``(sum, sum_of_squares)`` of path lengths, counting the
    starting site, plus the status triple used by :func:`source_walks`.
    """
    total = np.zeros(n, np.float64)
    total_sq = np.zeros(n, np.float64)
    for i in range(n):
        for s in range(n_streams):
            state = _mix(np.uint64(seed + (i + 1) * n_streams + s))
            lo_w = walkers * s // n_streams
            hi_w = walkers * (s + 1) // n_streams
            for w in range(lo_w, hi_w):
                x = i
                hops = 0
                while True:
                    hops += 1
                    if hops > max_hops:
                        return total, total_sq, HOP_LIMIT, w, x
                    state, u = _uniform(state)
                    lo = indptr[x]
                    hi = indptr[x + 1]
                    if hi == lo or u >= cum[hi - 1]:
                        break
                    x = indices[_pick(cum, lo, hi - 1, u)]
                total[i] += hops
                total_sq[i] += hops * hops
    return total, total_sq, OK, -1, -1
