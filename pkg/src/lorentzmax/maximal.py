"""Centered maximal operator on finite spaces.

On a finite space the open balls B(x, s) only change when s crosses a
distance value, so the supremum over s is a maximum over the closed balls
at each listed radius (radius 0 being the singleton).  Cellular spaces are
evaluated from their ball profiles in extended-range arithmetic; dense
spaces also have a plain float64 brute force used as an oracle.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotCombined, UnknownKind
from .extreal import ExtReal, rel_diff, xsum
from .lorentz import CellFunction, distribution_profile, l1_norm
from .space import CellularSpace, DenseSpace, as_cellular, cell_weights_float

_TABLES = weakref.WeakKeyDictionary()


@dataclass(frozen=True)
class MaximalResult:
    Mf: CellFunction
    radius: dict  # cell id -> radius of the first ball attaining the max
    attained: dict  # cell id -> True when the singleton ball attains it


def to_arrays(values):
    m = np.array([v.m for v in values], dtype=np.float64)
    e = np.array([v.e for v in values], dtype=np.int64)
    return m, e


def from_arrays(m, e):
    return [ExtReal.raw(float(a), int(b)) if a > 0 else ExtReal(0.0) for a, b in zip(m, e)]


class BallTables:
    """Flattened ball profiles of a cellular space (CSR layout)."""

    def __init__(self, space: CellularSpace):
        cells = space.cells
        idx = space.index
        full = {c.id: c.count for c in cells}
        self.space = space
        self.C = len(cells)
        glob = [c.mass for c in cells]
        self.glob_m, self.glob_e = to_arrays(glob)
        cell_ptr, ball_full, ent_ptr, ent_cell, ent_vals, dens, radii = [0], [], [0], [], [], [], []
        for c in cells:
            prof = space.profiles[c.id]
            for rad, mem in zip(prof.radii, prof.members):
                radii.append(rad)
                is_full = len(mem) == len(full) and all(mem.get(d, 0) == n for d, n in full.items())
                ball_full.append(is_full)
                terms = []
                for d in sorted(mem, key=idx.__getitem__):
                    k = mem[d]
                    if k:
                        cw = space.cell(d).weight * k
                        terms.append(cw)
                        if not is_full:
                            ent_cell.append(idx[d])
                            ent_vals.append(cw)
                dens.append(xsum(terms))
                ent_ptr.append(len(ent_cell))
            cell_ptr.append(len(ball_full))
        self.cell_ptr = np.array(cell_ptr, dtype=np.int64)
        self.ball_full = np.array(ball_full, dtype=np.bool_)
        self.ent_ptr = np.array(ent_ptr, dtype=np.int64)
        self.ent_cell = np.array(ent_cell, dtype=np.int64)
        self.ent_m, self.ent_e = to_arrays(ent_vals)
        self.den_m, self.den_e = to_arrays(dens)
        self.radii = radii

    def evaluate(self, fm: np.ndarray, fe: np.ndarray):
        """Maximal function for a batch: fm, fe of shape (K, C)."""
        return kernels.xr_ball_max(
            np.ascontiguousarray(fm, dtype=np.float64),
            np.ascontiguousarray(fe, dtype=np.int64),
            self.glob_m,
            self.glob_e,
            self.cell_ptr,
            self.ball_full,
            self.ent_ptr,
            self.ent_cell,
            self.ent_m,
            self.ent_e,
            self.den_m,
            self.den_e,
        )


def tables_for(space) -> BallTables:
    cs = as_cellular(space)
    key = space
    tab = _TABLES.get(key)
    if tab is None:
        tab = BallTables(cs)
        _TABLES[key] = tab
    return tab


def maximal_batch(space, functions):
    """Maximal functions of several cell functions; returns (m, e, ball) arrays of shape (K, C)."""
    tab = tables_for(space)
    rows = [f.on(space) for f in functions]
    fm = np.array([[v.m for v in row] for row in rows], dtype=np.float64).reshape(len(rows), tab.C)
    fe = np.array([[v.e for v in row] for row in rows], dtype=np.int64).reshape(len(rows), tab.C)
    return tab.evaluate(fm, fe)


def maximal_function(space, f: CellFunction) -> MaximalResult:
    tab = tables_for(space)
    m, e, b = maximal_batch(space, [f])
    ids = space.cell_ids
    values = from_arrays(m[0], e[0])
    radius, attained = {}, {}
    for i, cid in enumerate(ids):
        ball = tab.cell_ptr[i] + int(b[0, i])
        radius[cid] = float(tab.radii[ball])
        attained[cid] = values[i] == f[cid]
    return MaximalResult(CellFunction(dict(zip(ids, values))), radius, attained)


# ---------------------------------------------------------------------------
# float64 brute force on dense spaces (oracle)
# ---------------------------------------------------------------------------
def dense_ball_order(space: DenseSpace):
    D = np.asarray(space.matrix, dtype=np.float64)
    order = np.argsort(D, axis=1, kind="stable")
    sd = np.take_along_axis(D, order, axis=1)
    is_end = np.ones_like(sd, dtype=np.bool_)
    is_end[:, :-1] = sd[:, 1:] != sd[:, :-1]
    return order.astype(np.int64), is_end


def maximal_bruteforce(space: DenseSpace, F: np.ndarray) -> np.ndarray:
    """Maximal functions of the rows of F (float64, one column per point)."""
    order, is_end = dense_ball_order(space)
    w = cell_weights_float(space)
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    return kernels.dense_maximal(order, is_end, w, F)


# ---------------------------------------------------------------------------
# decomposition on combined spaces
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Decomposition:
    local: CellFunction
    glob: ExtReal
    max_rel_err: float


def prop1_decompose(combined, F: CellFunction, check: bool = True) -> Decomposition:
    prov = getattr(combined, "provenance", None)
    if prov is None:
        raise NotCombined("space carries no combiner provenance")
    local = {}
    for n, comp in enumerate(prov.components):
        prefix = prov.prefix(n)
        Fn = CellFunction({cid: F[prefix + cid] for cid in comp.cell_ids})
        Mn = maximal_function(comp, Fn).Mf
        for cid in comp.cell_ids:
            local[prefix + cid] = Mn[cid]
    glob = l1_norm(distribution_profile(combined, F)) / combined.total_measure
    M = maximal_function(combined, F).Mf
    err = max(rel_diff(M[c], max(local[c], glob)) for c in combined.cell_ids)
    if check and err > 1e-12:
        raise AssertionError(f"maximal function differs from max(local, global) by {err:.3g}")
    return Decomposition(CellFunction(local), glob, err)


# ---------------------------------------------------------------------------
# majorants from the boundedness arguments
# ---------------------------------------------------------------------------
def _level_of(cell) -> int:
    for t in cell.tags:
        if t.startswith("level="):
            return int(t.split("=", 1)[1])
    return 0


def _near_ball(space: CellularSpace, cid: str) -> dict:
    prof = space.profiles[cid]
    return prof.members[1] if len(prof.members) > 1 else prof.members[0]


def _global_average(space, f: CellFunction) -> ExtReal:
    return xsum(f[c.id] * c.mass for c in space.cells) / space.total_measure


def certificate_majorant(space, f: CellFunction, kind: str = None) -> CellFunction:
    """A pointwise upper bound for the maximal function built from the structure of a test space.

    first type (p > 1):  max{2f, 2 f(x0)/|x|, average}
    first type (p = 1):  max{f, ||f||_1/|B(x, 3/2)| off the center, average}
    second type:         split f into its upper and lower parts; the upper part is bounded by
                         max{f_up, max(f_up) on lower points, average}, the lower part by
                         max{f_low, mean of f_low over B(x, 3/2) on upper points, average};
                         the majorant is the sum of the two.
    """
    kind = kind or getattr(space, "meta", {}).get("kind")
    if not isinstance(space, CellularSpace) or kind not in ("S", "S'", "T", "T'"):
        raise UnknownKind(f"no majorant for space kind {kind!r}")
    f.on(space)
    glob = _global_average(space, f)
    out = {}
    if kind == "S":
        center = next(c for c in space.cells if "center" in c.tags)
        f0 = f[center.id] * center.weight
        for c in space.cells:
            m0 = ExtReal(0.0) if c.id == center.id else f0 / c.weight
            out[c.id] = max(f[c.id] * 2, m0 * 2, glob)
        return CellFunction(out)
    if kind == "S'":
        total = xsum(f[c.id] * c.mass for c in space.cells)
        for c in space.cells:
            if "center" in c.tags:
                m0 = ExtReal(0.0)
            else:
                ball = _near_ball(space, c.id)
                m0 = total / xsum(space.cell(d).weight * k for d, k in ball.items())
            out[c.id] = max(f[c.id], m0, glob)
        return CellFunction(out)
    upper = {c.id for c in space.cells if "upper" in c.tags}
    f_up = {c.id: (f[c.id] if c.id in upper else ExtReal(0.0)) for c in space.cells}
    f_low = {c.id: (ExtReal(0.0) if c.id in upper else f[c.id]) for c in space.cells}
    top_up = max(f_up.values())
    g_up = _global_average(space, CellFunction(f_up))
    g_low = _global_average(space, CellFunction(f_low))
    for c in space.cells:
        maj_up = max(f_up[c.id], ExtReal(0.0) if c.id in upper else top_up, g_up)
        if c.id in upper:
            ball = _near_ball(space, c.id)
            num = xsum(f_low[d] * space.cell(d).weight * k for d, k in ball.items())
            den = xsum(space.cell(d).weight * k for d, k in ball.items())
            m0 = num / den
        else:
            m0 = ExtReal(0.0)
        maj_low = max(f_low[c.id], m0, g_low)
        out[c.id] = maj_up + maj_low
    return CellFunction(out)
