"""Hot loops, each with a compiled and a vectorised numpy implementation.

The public names (``dense_maximal``, ``lorentz_batch``, ``dense_subset_ratios``,
``free_config_ratios``, ``xr_ball_max``) point at the compiled versions unless
``LORENTZMAX_NO_JIT`` is set; both variants stay importable as ``*_jit`` and
``*_np`` so tests and the benchmark can compare them.

Extended-range values travel as (mantissa float64, exponent int64) arrays
with the mantissa in [1, 2) or exactly 0.  Sums of positive terms are taken
in a fixed order against the largest exponent present, so the relative
error is at most n * 2**-53 and the result depends on the inputs alone.
"""
import math

import numpy as np

from ._jit import USE_JIT, njit

ZERO_EXP = -(1 << 60)


# ---------------------------------------------------------------------------
# dense brute force (float64)
# ---------------------------------------------------------------------------
def dense_maximal_loops(order, is_end, w, F):
    K, N = F.shape
    out = np.zeros((K, N))
    for k in range(K):
        for x in range(N):
            num = 0.0
            den = 0.0
            best = 0.0
            for j in range(N):
                y = order[x, j]
                num += w[y] * F[k, y]
                den += w[y]
                if is_end[x, j]:
                    a = num / den
                    if a > best:
                        best = a
            out[k, x] = best
    return out


def dense_maximal_np(order, is_end, w, F):
    G = (F * w)[:, order]
    num = np.cumsum(G, axis=2)
    den = np.cumsum(w[order], axis=1)
    avg = np.where(is_end[None], num / den[None], -np.inf)
    return np.maximum(avg.max(axis=2), 0.0)


# ---------------------------------------------------------------------------
# Lorentz quasi-norm of step functions (float64)
# ---------------------------------------------------------------------------
def lorentz_row_loops(v, wt, p, q):
    idx = np.argsort(-v, kind="mergesort")
    n = v.shape[0]
    W = 0.0
    if q == np.inf:
        best = 0.0
        for j in range(n):
            W += wt[idx[j]]
            t = v[idx[j]] * W ** (1.0 / p)
            if t > best:
                best = t
        return best
    s = 0.0
    for j in range(n):
        W += wt[idx[j]]
        vi = v[idx[j]]
        vn = v[idx[j + 1]] if j + 1 < n else 0.0
        if vi > vn:
            s += W ** (q / p) * (vi ** q - vn ** q)
    return (p / q) ** (1.0 / q) * s ** (1.0 / q)


def lorentz_batch_loops(V, Wt, p, q):
    K = V.shape[0]
    out = np.empty(K)
    for k in range(K):
        out[k] = _lorentz_row(V[k], Wt[k], p, q)
    return out


def lorentz_batch_np(V, Wt, p, q):
    V = np.asarray(V, dtype=np.float64)
    Wt = np.broadcast_to(np.asarray(Wt, dtype=np.float64), V.shape)
    idx = np.argsort(-V, axis=1, kind="stable")
    v = np.take_along_axis(V, idx, axis=1)
    W = np.cumsum(np.take_along_axis(Wt, idx, axis=1), axis=1)
    if q == np.inf:
        return (v * W ** (1.0 / p)).max(axis=1)
    vn = np.concatenate([v[:, 1:], np.zeros((v.shape[0], 1))], axis=1)
    s = (W ** (q / p) * (v ** q - vn ** q)).sum(axis=1)
    return (p / q) ** (1.0 / q) * s ** (1.0 / q)


# ---------------------------------------------------------------------------
# restricted-type enumeration over all subsets of a dense space
# ---------------------------------------------------------------------------
def dense_subset_ratios_loops(order, is_end, w, p, r, masks):
    N = w.shape[0]
    K = masks.shape[0]
    out = np.empty(K)
    f = np.zeros(N)
    mf = np.zeros(N)
    for k in range(K):
        mass = 0.0
        for y in range(N):
            if (masks[k] >> y) & 1:
                f[y] = 1.0
                mass += w[y]
            else:
                f[y] = 0.0
        for x in range(N):
            num = 0.0
            den = 0.0
            best = 0.0
            for j in range(N):
                y = order[x, j]
                num += w[y] * f[y]
                den += w[y]
                if is_end[x, j]:
                    a = num / den
                    if a > best:
                        best = a
            mf[x] = best
        out[k] = _lorentz_row(mf, w, p, r) / (p * mass ** (1.0 / p))
    return out


def dense_subset_ratios_np(order, is_end, w, p, r, masks, chunk=4096):
    N = w.shape[0]
    bits = np.arange(N, dtype=np.int64)
    out = np.empty(masks.shape[0])
    for s in range(0, masks.shape[0], chunk):
        mk = masks[s : s + chunk]
        F = ((mk[:, None] >> bits[None]) & 1).astype(np.float64)
        mf = dense_maximal_np(order, is_end, w, F)
        mass = F @ w
        out[s : s + chunk] = lorentz_batch_np(mf, w, p, r) / (p * mass ** (1.0 / p))
    return out


# ---------------------------------------------------------------------------
# restricted-type enumeration over count vectors on fully interchangeable cells
# ---------------------------------------------------------------------------
# Ball b of cell c contains other cell d fully when full[b, d] is set and
# otherwise none of it; it holds all of c when self_full[b], else only the
# center.  den[b] is its measure.  A configuration g puts g[c] points of
# each cell c into the set E.
def free_config_ratios_loops(G, n, w, cell_ptr, full, self_full, den, p, r):
    K, C = G.shape
    out = np.empty(K)
    vals = np.zeros(2 * C)
    mass = np.zeros(2 * C)
    for k in range(K):
        massE = 0.0
        for c in range(C):
            massE += G[k, c] * w[c]
        for c in range(C):
            gin = G[k, c]
            vin = 0.0
            vout = 0.0
            for b in range(cell_ptr[c], cell_ptr[c + 1]):
                other = 0.0
                for d in range(C):
                    if d != c and full[b, d]:
                        other += G[k, d] * w[d]
                if self_full[b]:
                    a_in = (other + gin * w[c]) / den[b]
                    a_out = a_in
                else:
                    a_in = (other + w[c]) / den[b]
                    a_out = other / den[b]
                if a_in > vin:
                    vin = a_in
                if a_out > vout:
                    vout = a_out
            mass[2 * c] = gin * w[c]
            mass[2 * c + 1] = (n[c] - gin) * w[c]
            vals[2 * c] = vin if gin > 0 else 0.0
            vals[2 * c + 1] = vout if gin < n[c] else 0.0
        out[k] = _lorentz_row(vals, mass, p, r) / (p * massE ** (1.0 / p))
    return out


def free_config_ratios_np(G, n, w, cell_ptr, full, self_full, den, p, r):
    G = np.asarray(G, dtype=np.float64)
    K, C = G.shape
    S = G * w
    other_all = S @ full.T.astype(np.float64)  # (K, B), excludes self since full[b, c] is False
    vals = np.zeros((K, 2 * C))
    mass = np.zeros((K, 2 * C))
    for c in range(C):
        sl = slice(cell_ptr[c], cell_ptr[c + 1])
        other = other_all[:, sl]
        sf = self_full[sl][None]
        a_in = np.where(sf, other + S[:, c : c + 1], other + w[c]) / den[sl][None]
        a_out = np.where(sf, other + S[:, c : c + 1], other) / den[sl][None]
        vin = np.maximum(a_in.max(axis=1), 0.0)
        vout = np.maximum(a_out.max(axis=1), 0.0)
        gin = G[:, c]
        mass[:, 2 * c] = gin * w[c]
        mass[:, 2 * c + 1] = (n[c] - gin) * w[c]
        vals[:, 2 * c] = np.where(gin > 0, vin, 0.0)
        vals[:, 2 * c + 1] = np.where(gin < n[c], vout, 0.0)
    massE = S.sum(axis=1)
    return lorentz_batch_np(vals, mass, p, r) / (p * massE ** (1.0 / p))


# ---------------------------------------------------------------------------
# extended-range cellular maximal function
# ---------------------------------------------------------------------------
def _xr_gt(am, ae, bm, be):
    if am == 0.0:
        return False
    if bm == 0.0:
        return True
    if ae != be:
        return ae > be
    return am > bm


def xr_ball_max_loops(f_m, f_e, glob_m, glob_e, cell_ptr, ball_full, ent_ptr, ent_cell, ent_m, ent_e, den_m, den_e):
    K, C = f_m.shape
    out_m = np.zeros((K, C))
    out_e = np.zeros((K, C), dtype=np.int64)
    out_b = np.zeros((K, C), dtype=np.int64)
    for k in range(K):
        # numerator of the whole-space ball
        top = ZERO_EXP
        for d in range(C):
            if f_m[k, d] > 0.0 and glob_e[d] + f_e[k, d] > top:
                top = glob_e[d] + f_e[k, d]
        acc = 0.0
        for d in range(C):
            if f_m[k, d] > 0.0:
                acc += math.ldexp(glob_m[d] * f_m[k, d], max(glob_e[d] + f_e[k, d] - top, -2000))
        gfr, gex = math.frexp(acc)
        g_m = 2.0 * gfr
        g_e = top + gex - 1 if acc > 0.0 else 0
        for c in range(C):
            bm = 0.0
            be = 0
            bb = 0
            for b in range(cell_ptr[c], cell_ptr[c + 1]):
                if ball_full[b]:
                    nm = g_m
                    ne = g_e
                else:
                    top = ZERO_EXP
                    for t in range(ent_ptr[b], ent_ptr[b + 1]):
                        d = ent_cell[t]
                        if f_m[k, d] > 0.0 and ent_e[t] + f_e[k, d] > top:
                            top = ent_e[t] + f_e[k, d]
                    acc = 0.0
                    for t in range(ent_ptr[b], ent_ptr[b + 1]):
                        d = ent_cell[t]
                        if f_m[k, d] > 0.0:
                            acc += math.ldexp(ent_m[t] * f_m[k, d], max(ent_e[t] + f_e[k, d] - top, -2000))
                    fr, ex = math.frexp(acc)
                    nm = 2.0 * fr
                    ne = top + ex - 1 if acc > 0.0 else 0
                if nm > 0.0:
                    q = nm / den_m[b]
                    qe = ne - den_e[b]
                    if q < 1.0:
                        q *= 2.0
                        qe -= 1
                    if _xr_gt(q, qe, bm, be):
                        bm = q
                        be = qe
                        bb = b - cell_ptr[c]
            out_m[k, c] = bm
            out_e[k, c] = be
            out_b[k, c] = bb
    return out_m, out_e, out_b


def _seg_reduce(ufunc, arr, ptr, empty):
    """Reduce ``arr`` (K, E) over segments [ptr[i], ptr[i+1]); empty segments get ``empty``."""
    K = arr.shape[0]
    nseg = ptr.shape[0] - 1
    out = np.full((K, nseg), empty, dtype=arr.dtype)
    nonempty = ptr[1:] > ptr[:-1]
    if arr.shape[1] and nonempty.any():
        red = ufunc.reduceat(arr, ptr[:-1][nonempty], axis=1)
        out[:, nonempty] = red
    return out


def _xr_dot(f_m, f_e, cells, m, e, ptr):
    """Segmented extended-range sums of m*2**e * f over entries."""
    pm = m[None] * f_m[:, cells]
    pe = e[None] + f_e[:, cells]
    pe = np.where(pm > 0.0, pe, ZERO_EXP)
    top = _seg_reduce(np.maximum, pe, ptr, ZERO_EXP)
    seg_of = np.repeat(np.arange(ptr.shape[0] - 1), np.diff(ptr))
    shift = np.clip(pe - top[:, seg_of], -2000, 0)
    acc = _seg_reduce(np.add, np.ldexp(pm, shift), ptr, 0.0)
    fr, ex = np.frexp(acc)
    nm = 2.0 * fr
    ne = np.where(acc > 0.0, top + ex - 1, 0)
    return nm, ne


def xr_ball_max_np(f_m, f_e, glob_m, glob_e, cell_ptr, ball_full, ent_ptr, ent_cell, ent_m, ent_e, den_m, den_e):
    K, C = f_m.shape
    B = ball_full.shape[0]
    gm, ge = _xr_dot(f_m, f_e, np.arange(C), glob_m, glob_e, np.array([0, C]))
    nm, ne = _xr_dot(f_m, f_e, ent_cell, ent_m, ent_e, ent_ptr)
    nm = np.where(ball_full[None], gm, nm)
    ne = np.where(ball_full[None], ge, ne)
    q = nm / den_m[None]
    qe = ne - den_e[None]
    low = (q < 1.0) & (q > 0.0)
    q = np.where(low, 2.0 * q, q)
    qe = np.where(low, qe - 1, qe)
    qe = np.where(q > 0.0, qe, ZERO_EXP)
    best_e = _seg_reduce(np.maximum, qe, cell_ptr, ZERO_EXP)
    ball_cell = np.repeat(np.arange(C), np.diff(cell_ptr))
    cand_m = np.where(qe == best_e[:, ball_cell], q, -1.0)
    best_m = _seg_reduce(np.maximum, cand_m, cell_ptr, -1.0)
    hit = (cand_m == best_m[:, ball_cell]) & (q > 0.0)
    pos = np.where(hit, np.arange(B)[None], B)
    first = _seg_reduce(np.minimum, pos, cell_ptr, B)
    out_m = np.maximum(best_m, 0.0)
    out_e = np.where(out_m > 0.0, best_e, 0).astype(np.int64)
    out_b = np.where(first < B, first - cell_ptr[:-1][None], 0).astype(np.int64)
    return out_m, out_e, out_b


# ---------------------------------------------------------------------------
# compiled variants and dispatch
# ---------------------------------------------------------------------------
_lorentz_row = njit()(lorentz_row_loops)
_xr_gt = njit()(_xr_gt)
dense_maximal_jit = njit()(dense_maximal_loops)
lorentz_batch_jit = njit()(lorentz_batch_loops)
dense_subset_ratios_jit = njit()(dense_subset_ratios_loops)
free_config_ratios_jit = njit()(free_config_ratios_loops)
xr_ball_max_jit = njit()(xr_ball_max_loops)

if USE_JIT:
    dense_maximal = dense_maximal_jit
    lorentz_batch = lorentz_batch_jit
    dense_subset_ratios = dense_subset_ratios_jit
    free_config_ratios = free_config_ratios_jit
    xr_ball_max = xr_ball_max_jit
else:
    dense_maximal = dense_maximal_np
    lorentz_batch = lorentz_batch_np
    dense_subset_ratios = dense_subset_ratios_np
    free_config_ratios = free_config_ratios_np
    xr_ball_max = xr_ball_max_np
