"""Finite metric measure spaces in dense and cellular form.

A cellular space groups interchangeable points into cells.  Each cell has a
ball profile: for every radius in its distance list, how many points of
each cell lie in the closed ball around any one of its points.  Radius 0 is
the singleton ball.  Maximal functions and norms of cell-constant functions
only need these counts, so spaces with astronomically many points stay
cheap.  ``realize_dense`` expands small cellular spaces into an explicit
distance matrix for brute-force cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Union

import numpy as np

from .errors import CapExceeded, IllegalSplit, Inconsistent
from .extreal import ExtReal, xsum


@dataclass(frozen=True)
class Cell:
    id: str
    count: int
    weight: ExtReal
    tags: tuple = ()

    @property
    def mass(self) -> ExtReal:
        return self.weight * self.count


@dataclass(frozen=True, eq=False)
class BallProfile:
    """Closed balls around one point of ``cell``: ``members[k]`` counts points per cell at ``radii[k]``."""

    cell: str
    radii: tuple
    members: tuple

    def count_at(self, radius: float, target: str) -> int:
        """Points of ``target`` within distance ``radius`` (largest listed radius <= radius)."""
        k = -1
        for i, rad in enumerate(self.radii):
            if rad <= radius:
                k = i
            else:
                break
        return 0 if k < 0 else self.members[k].get(target, 0)


@dataclass(frozen=True, eq=False)
class CellularSpace:
    cells: tuple
    profiles: dict
    splits: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    layout: Optional[object] = None

    @cached_property
    def index(self) -> dict:
        return {c.id: i for i, c in enumerate(self.cells)}

    @cached_property
    def by_id(self) -> dict:
        return {c.id: c for c in self.cells}

    @cached_property
    def total_measure(self) -> ExtReal:
        return xsum(c.mass for c in self.cells)

    @property
    def point_count(self) -> int:
        return sum(c.count for c in self.cells)

    @property
    def cell_ids(self) -> list:
        return [c.id for c in self.cells]

    @property
    def kind(self) -> str:
        return self.meta.get("kind", "cellular")

    def cell(self, cid: str) -> Cell:
        return self.by_id[cid]


@dataclass(frozen=True, eq=False)
class DenseSpace:
    ids: tuple
    weights: tuple
    matrix: np.ndarray
    tags: tuple = ()
    meta: dict = field(default_factory=dict)

    @cached_property
    def index(self) -> dict:
        return {c: i for i, c in enumerate(self.ids)}

    @cached_property
    def total_measure(self) -> ExtReal:
        return xsum(self.weights)

    @property
    def point_count(self) -> int:
        return len(self.ids)

    @property
    def cell_ids(self) -> list:
        return list(self.ids)

    @property
    def kind(self) -> str:
        return self.meta.get("kind", "dense")


FiniteSpace = Union[CellularSpace, DenseSpace]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------
@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> set:
        return {code for code, _ in self.violations}

    def add(self, code: str, detail: str) -> None:
        self.violations.append((code, detail))


def validate_space(space: FiniteSpace) -> ValidationReport:
    if isinstance(space, DenseSpace):
        return _validate_dense(space)
    return _validate_cellular(space)


def _validate_dense(space: DenseSpace) -> ValidationReport:
    rep = ValidationReport()
    D = np.asarray(space.matrix, dtype=np.float64)
    n = len(space.ids)
    if D.shape != (n, n):
        rep.add("shape", f"matrix shape {D.shape} for {n} points")
        return rep
    if len(space.weights) != n:
        rep.add("shape", f"{len(space.weights)} weights for {n} points")
    for i, w in enumerate(space.weights):
        if not w > 0:
            rep.add("weight", f"point {space.ids[i]} has weight {w!r}")
    if len(set(space.ids)) != n:
        rep.add("ids", "duplicate point ids")
    if not np.all(np.isfinite(D)):
        rep.add("finite", "non-finite distances")
        return rep
    if not np.array_equal(D, D.T):
        rep.add("symmetry", "distance matrix is not symmetric")
    if np.any(np.diag(D) != 0):
        rep.add("identity", "non-zero diagonal entry")
    off = ~np.eye(n, dtype=bool)
    if np.any(D[off] <= 0):
        rep.add("identity", "zero or negative distance between distinct points")
    if n >= 3 and not rep.violations:
        bad = _triangle_violation(D)
        if bad is not None:
            i, j, k = bad
            rep.add("triangle", f"d({space.ids[i]},{space.ids[j]}) > d(.,{space.ids[k]}) + d({space.ids[k]},.)")
    return rep


def _triangle_violation(D: np.ndarray):
    """Exhaustive triangle check; returns an offending (i, j, k) or None."""
    n = D.shape[0]
    off = D[~np.eye(n, dtype=bool)]
    if off.size and off.max() <= 2 * off.min():
        return None  # any two positive distances sum past the largest
    for k in range(n):
        via = D[:, k : k + 1] + D[k : k + 1, :]
        bad = np.argwhere(D > via * (1 + 1e-12))
        if bad.size:
            i, j = bad[0]
            return int(i), int(j), k
    return None


def _validate_cellular(space: CellularSpace) -> ValidationReport:
    rep = ValidationReport()
    ids = [c.id for c in space.cells]
    if len(set(ids)) != len(ids):
        rep.add("ids", "duplicate cell ids")
    counts = {}
    for c in space.cells:
        if not isinstance(c.count, int) or c.count < 1:
            rep.add("count", f"cell {c.id} has count {c.count!r}")
        if not c.weight > 0:
            rep.add("weight", f"cell {c.id} has weight {c.weight!r}")
        counts[c.id] = c.count
    for c in space.cells:
        prof = space.profiles.get(c.id)
        if prof is None:
            rep.add("profile", f"cell {c.id} has no ball profile")
            continue
        radii = prof.radii
        if len(radii) != len(prof.members) or not radii:
            rep.add("profile", f"cell {c.id}: radii and member lists differ in length")
            continue
        if radii[0] != 0:
            rep.add("radii", f"cell {c.id}: first radius is {radii[0]}, not 0")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            rep.add("radii", f"cell {c.id}: radii not strictly increasing")
        if dict(prof.members[0]) != {c.id: 1}:
            rep.add("singleton", f"cell {c.id}: radius-0 ball is not the center alone")
        prev = {}
        for rad, mem in zip(radii, prof.members):
            for d, k in mem.items():
                if d not in counts:
                    rep.add("profile", f"cell {c.id}: unknown member cell {d}")
                elif not 0 <= k <= counts[d]:
                    rep.add("bounds", f"cell {c.id} radius {rad}: {k} points of {d} (count {counts[d]})")
            for d, k in prev.items():
                if mem.get(d, 0) < k:
                    rep.add("monotone", f"cell {c.id}: count of {d} drops at radius {rad}")
            prev = mem
        if any(prof.members[-1].get(d, 0) != counts[d] for d in counts):
            rep.add("coverage", f"cell {c.id}: largest ball misses part of the space")
    if rep.violations:
        return rep
    # a pair of cells must agree on how many links run between them
    for c in space.cells:
        pc = space.profiles[c.id]
        for d in space.cells:
            if d.id <= c.id:
                continue
            pd = space.profiles[d.id]
            for rad in sorted(set(pc.radii) | set(pd.radii)):
                if c.count * pc.count_at(rad, d.id) != d.count * pd.count_at(rad, c.id):
                    rep.add("pair-symmetry", f"cells {c.id},{d.id} disagree at radius {rad}")
                    break
    return rep


# ---------------------------------------------------------------------------
# dense realization
# ---------------------------------------------------------------------------
def _layers(prof_c: BallProfile, d: str, radii):
    """(radius, cumulative count of d around a point of prof_c's cell) wherever the count grows."""
    out, last = [], 0
    for rad in radii:
        k = prof_c.count_at(rad, d)
        if k > last:
            out.append((rad, k))
            last = k
    return out


def realize_dense(space: FiniteSpace, point_cap: int = 10_000) -> DenseSpace:
    if isinstance(space, DenseSpace):
        return space
    total = space.point_count
    if total > point_cap:
        raise CapExceeded(f"{total} points exceed the cap {point_cap}")
    offsets, ids, weights, cell_of = {}, [], [], []
    for c in space.cells:
        offsets[c.id] = len(ids)
        for k in range(c.count):
            ids.append(f"{c.id}#{k}" if c.count > 1 else c.id)
            weights.append(c.weight)
            cell_of.append(c.id)
    D = np.full((total, total), np.inf)
    np.fill_diagonal(D, 0.0)
    cells = list(space.cells)
    for a, c in enumerate(cells):
        pc = space.profiles[c.id]
        _realize_self(D, offsets[c.id], c, pc)
        for d in cells[a + 1 :]:
            pd = space.profiles[d.id]
            radii = sorted(set(pc.radii) | set(pd.radii))
            lay_cd = _layers(pc, d.id, radii)
            lay_dc = _layers(pd, c.id, radii)
            if [r for r, _ in lay_cd] != [r for r, _ in lay_dc] or any(
                c.count * k1 != d.count * k2 for (_, k1), (_, k2) in zip(lay_cd, lay_dc)
            ):
                raise Inconsistent(f"cells {c.id} and {d.id} have mismatched link counts")
            if c.count <= d.count:
                _realize_pair(D, offsets[c.id], c.count, offsets[d.id], d.count, lay_cd)
            else:
                _realize_pair(D, offsets[d.id], d.count, offsets[c.id], c.count, lay_dc)
    if not np.all(np.isfinite(D)):
        raise Inconsistent("some pair of points is not covered by any ball")
    dense = DenseSpace(
        ids=tuple(ids),
        weights=tuple(weights),
        matrix=D,
        tags=tuple(tuple(space.cell(c).tags) for c in cell_of),
        meta={"kind": "dense", "source": space.kind, "cell_of": tuple(cell_of)},
    )
    rep = validate_space(dense)
    if not rep.ok:
        raise Inconsistent(f"ball profiles give no metric: {rep.violations[0]}")
    return dense


def _realize_self(D, off, cell: Cell, prof: BallProfile) -> None:
    n = cell.count
    used = set()
    degree = 0
    for rad, mem in zip(prof.radii[1:], prof.members[1:]):
        k = mem.get(cell.id, 1)
        if k - 1 <= degree:
            continue
        if k == n:
            block = D[off : off + n, off : off + n]
            block[np.isinf(block)] = rad
            degree = n - 1
            continue
        need = k - 1 - degree
        steps = []
        s = 1
        while need >= 2 and s < n / 2:
            if s not in used:
                steps.append(s)
                need -= 2
            s += 1
        if need == 1 and n % 2 == 0 and n // 2 not in used:
            steps.append(n // 2)
            need = 0
        if need:
            raise Inconsistent(f"cell {cell.id}: no circulant realizes {k} points at radius {rad}")
        for s in steps:
            used.add(s)
            for u in range(n):
                v = (u + s) % n
                D[off + u, off + v] = D[off + v, off + u] = rad
        degree = k - 1


def _realize_pair(D, oc, nc, od, nd, layers) -> None:
    """Bi-regular links: c-point u meets the d-points u*k .. u*k+k-1 (mod nd)."""
    last = 0
    for rad, k in layers:
        if k == nd:
            block = D[oc : oc + nc, od : od + nd]
            block[np.isinf(block)] = rad
            D[od : od + nd, oc : oc + nc] = block.T
            last = k
            continue
        if last:
            raise Inconsistent("more than one partial link layer between two cells")
        for e in range(nc * k):
            u, v = e // k, e % nd
            D[oc + u, od + v] = D[od + v, oc + u] = rad
        last = k


def as_cellular(space: FiniteSpace) -> CellularSpace:
    """View a dense space as a cellular one with one single-point cell per point."""
    if isinstance(space, CellularSpace):
        return space
    D = np.asarray(space.matrix, dtype=np.float64)
    ids = list(space.ids)
    tags = space.tags or tuple(() for _ in ids)
    cells = tuple(Cell(pid, 1, ExtReal(w), tuple(tags[i])) for i, (pid, w) in enumerate(zip(ids, space.weights)))
    profiles = {}
    for i, pid in enumerate(ids):
        row = D[i]
        radii, members = [], []
        for rad in np.unique(row):
            inside = np.flatnonzero(row <= rad)
            radii.append(float(rad))
            members.append({ids[j]: 1 for j in inside})
        profiles[pid] = BallProfile(pid, tuple(radii), tuple(members))
    return CellularSpace(cells, profiles, {}, {"kind": "dense-cells", "source": space.kind})


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------
def cells_tagged(space: CellularSpace, tag: str) -> list:
    return [c.id for c in space.cells if tag in c.tags]


def split_cell(space: CellularSpace, cell: str, gamma: int) -> CellularSpace:
    """Split ``gamma`` points off ``cell``; the new pieces carry tags ``in:<cell>`` / ``out:<cell>``."""
    if not isinstance(space, CellularSpace):
        raise IllegalSplit("only cellular spaces can be split")
    if cell not in space.by_id:
        raise IllegalSplit(f"unknown cell {cell}")
    rule = space.splits.get(cell)
    if rule is None:
        raise IllegalSplit(f"cell {cell} has no split rule")
    n = space.cell(cell).count
    if not isinstance(gamma, int) or not 1 <= gamma < n:
        raise IllegalSplit(f"gamma={gamma} outside [1, {n - 1}]")
    if rule == "free":
        return split_free(space, cell, gamma)
    if rule == "tree":
        from .layout import split_tree

        return split_tree(space, cell, gamma)
    raise IllegalSplit(f"unknown split rule {rule!r}")


def is_free(space: CellularSpace, cell: str) -> bool:
    """True when every ball meets ``cell`` in nothing, everything, or just its own center."""
    n = space.cell(cell).count
    for prof in space.profiles.values():
        for mem in prof.members:
            k = mem.get(cell, 0)
            if prof.cell == cell:
                if k not in (1, n):
                    return False
            elif k not in (0, n):
                return False
    return True


def split_free(space: CellularSpace, cell: str, gamma: int) -> CellularSpace:
    if not is_free(space, cell):
        raise IllegalSplit(f"cell {cell} is not interchangeable within its balls")
    old = space.cell(cell)
    a_id, b_id = f"{cell}.a", f"{cell}.b"
    n = old.count
    a = Cell(a_id, gamma, old.weight, old.tags + (f"in:{cell}",))
    b = Cell(b_id, n - gamma, old.weight, old.tags + (f"out:{cell}",))
    cells = []
    for c in space.cells:
        cells.extend([a, b] if c.id == cell else [c])

    def rewrite(mem, center):
        out = {}
        for d, k in mem.items():
            if d != cell:
                out[d] = k
            elif k == n:
                out[a_id], out[b_id] = gamma, n - gamma
            elif k == 1 and center is not None:
                out[center] = 1
        return out

    profiles = {}
    for cid, prof in space.profiles.items():
        if cid == cell:
            for new in (a_id, b_id):
                profiles[new] = BallProfile(new, prof.radii, tuple(rewrite(m, new) for m in prof.members))
        else:
            profiles[cid] = BallProfile(cid, prof.radii, tuple(rewrite(m, None) for m in prof.members))
    splits = {k: v for k, v in space.splits.items() if k != cell}
    splits[a_id] = splits[b_id] = "free"
    return CellularSpace(tuple(cells), profiles, splits, dict(space.meta), space.layout)


# ---------------------------------------------------------------------------
# scaling (metric and measure)
# ---------------------------------------------------------------------------
def scale_space(space: FiniteSpace, metric: float = 1.0, measure=1.0) -> FiniteSpace:
    """Multiply all distances by ``metric`` and all point masses by ``measure``."""
    if metric <= 0 or not ExtReal(measure) > 0:
        raise ValueError("scale factors must be positive")
    if isinstance(space, DenseSpace):
        return replace(
            space,
            matrix=np.asarray(space.matrix) * metric,
            weights=tuple(w * measure for w in space.weights),
        )
    cells = tuple(replace(c, weight=c.weight * measure) for c in space.cells)
    profiles = {
        cid: BallProfile(cid, tuple(r * metric for r in p.radii), p.members) for cid, p in space.profiles.items()
    }
    layout = space.layout.scaled(metric) if space.layout is not None else None
    return CellularSpace(cells, profiles, dict(space.splits), dict(space.meta), layout)


def diameter(space: FiniteSpace) -> float:
    if isinstance(space, DenseSpace):
        return float(np.max(space.matrix)) if len(space.ids) else 0.0
    return max(space.profiles[c.id].radii[-1] for c in space.cells)


def min_point_mass(space: FiniteSpace) -> ExtReal:
    ws = space.weights if isinstance(space, DenseSpace) else [c.weight for c in space.cells]
    return min(ws)


def cell_weights_float(space: FiniteSpace):
    """Point weights scaled by the largest one, as float64 (for float oracles)."""
    ws = list(space.weights) if isinstance(space, DenseSpace) else [c.weight for c in space.cells]
    top = max(ws)
    out = np.array([float(w / top) for w in ws])
    if np.any(out == 0.0):
        raise OverflowError("weight range exceeds float64")
    return out

