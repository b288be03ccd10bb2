"""Interval model of block-linked spaces and their exact splits.

Each base cell with ``N`` points is laid out on [0, 1): point ``k`` owns
[k/N, (k+1)/N).  A link (lower, upper) puts every upper point inside a
lower point's interval at the near distance from it; every other pair of
distinct points sits at the far distance.  Linked resolutions must divide,
so each upper point lies inside exactly one point of each linked lower cell
and each lower point holds a contiguous block of upper points.

Splitting a cell cuts [0, 1) at a breakpoint.  The breakpoint set is closed
under adding both ends of any point that straddles a breakpoint; the
resulting pieces (maximal runs between breakpoints, plus the straddlers)
form an equitable partition.  Pieces are then merged by colour refinement
into the coarsest equitable partition that still separates the split parts,
and the classes of that partition become the new cells.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import CapExceeded, IllegalSplit, Inconsistent
from .extreal import ExtReal

MAX_BREAKPOINTS = 20_000


@dataclass(frozen=True)
class Base:
    id: str
    count: int
    weight: ExtReal
    tags: tuple = ()
    splittable: bool = False


@dataclass(frozen=True)
class Mark:
    label: str
    base: str
    ranges: tuple  # ((lo, hi), ...) point index ranges


@dataclass(frozen=True, eq=False)
class IntervalLayout:
    bases: tuple
    links: frozenset
    near: float = 1.0
    far: float = 2.0
    marks: tuple = ()
    classes: dict = field(default_factory=dict)  # cell id -> (base id, ((lo, hi), ...))

    def base(self, bid: str) -> Base:
        for b in self.bases:
            if b.id == bid:
                return b
        raise KeyError(bid)

    def scaled(self, metric: float) -> "IntervalLayout":
        return replace(self, near=self.near * metric, far=self.far * metric)


def _closure(bases, cuts):
    P = {Fraction(0), Fraction(1)}
    work = [Fraction(c) for c in cuts]
    while work:
        p = work.pop()
        if p in P:
            continue
        P.add(p)
        if len(P) > MAX_BREAKPOINTS:
            raise CapExceeded("breakpoint closure grew past the cap")
        for b in bases:
            x = p * b.count
            if x.denominator != 1:
                k = x.numerator // x.denominator
                for end in (Fraction(k, b.count), Fraction(k + 1, b.count)):
                    if end not in P:
                        work.append(end)
    return sorted(P)


def _pieces(base: Base, P):
    """Index ranges partitioning [0, N): runs between breakpoints and straddling points."""
    N = base.count
    out = set()
    for a, b in zip(P, P[1:]):
        lo = -((-a.numerator * N) // a.denominator)
        hi = (b.numerator * N) // b.denominator
        if hi > lo:
            out.add((lo, hi))
    for p in P[1:-1]:
        x = p * N
        if x.denominator != 1:
            k = x.numerator // x.denominator
            out.add((k, k + 1))
    pieces = sorted(out)
    pos = 0
    for lo, hi in pieces:
        if lo != pos:
            raise Inconsistent(f"pieces of {base.id} do not tile its points")
        pos = hi
    if pos != N:
        raise Inconsistent(f"pieces of {base.id} do not tile its points")
    return pieces


def build(layout: IntervalLayout, meta: dict, extra_cuts=()):
    """Cells and profiles of the coarsest equitable partition refining the marks."""
    from .space import BallProfile, Cell, CellularSpace

    bases = layout.bases
    cuts = set(extra_cuts)
    for mk in layout.marks:
        N = layout.base(mk.base).count
        for lo, hi in mk.ranges:
            cuts.add(Fraction(lo, N))
            cuts.add(Fraction(hi, N))
    cuts.discard(Fraction(0))
    cuts.discard(Fraction(1))
    P = _closure(bases, cuts)

    bidx = {b.id: i for i, b in enumerate(bases)}
    atoms = []  # (base index, lo, hi)
    starts = {}
    first = {}
    for bi, b in enumerate(bases):
        first[b.id] = len(atoms)
        pcs = _pieces(b, P)
        starts[b.id] = [lo for lo, _ in pcs]
        atoms.extend((bi, lo, hi) for lo, hi in pcs)

    nbr_of = {b.id: [] for b in bases}
    for lo_id, up_id in sorted(layout.links):
        nl, nu = layout.base(lo_id).count, layout.base(up_id).count
        if nu % nl:
            raise Inconsistent(f"link {lo_id}-{up_id}: resolutions {nl}, {nu} do not divide")
        nbr_of[lo_id].append((up_id, "down"))
        nbr_of[up_id].append((lo_id, "up"))

    def atom_at(bid, k):
        j = bisect.bisect_right(starts[bid], k) - 1
        return first[bid] + j

    def neighbours(ai, k):
        bi, _, _ = atoms[ai]
        b = bases[bi]
        out = {}
        for other, direction in nbr_of[b.id]:
            No = layout.base(other).count
            if direction == "down":
                ratio = No // b.count
                lo, hi = k * ratio, (k + 1) * ratio
                j = atom_at(other, lo)
                while j < len(atoms) and atoms[j][0] == bidx[other] and atoms[j][1] < hi:
                    _, alo, ahi = atoms[j]
                    out[j] = out.get(j, 0) + min(hi, ahi) - max(lo, alo)
                    j += 1
            else:
                j = atom_at(other, k // (b.count // No))
                out[j] = out.get(j, 0) + 1
        return out

    adj = []
    for ai, (bi, lo, hi) in enumerate(atoms):
        nb = neighbours(ai, lo)
        if hi - lo > 1 and neighbours(ai, hi - 1) != nb:
            raise Inconsistent("piece is not homogeneous")
        adj.append(nb)

    def mark_flags(bi, lo, hi):
        flags = []
        for mk in layout.marks:
            if mk.base != bases[bi].id:
                continue
            inside = any(mlo <= lo and hi <= mhi for mlo, mhi in mk.ranges)
            flags.append((mk.label, inside))
        return tuple(flags)

    colour = _relabel([(bi, mark_flags(bi, lo, hi)) for bi, lo, hi in atoms])
    while True:
        sig = []
        for ai in range(len(atoms)):
            agg = {}
            for j, k in adj[ai].items():
                agg[colour[j]] = agg.get(colour[j], 0) + k
            sig.append((colour[ai], tuple(sorted(agg.items()))))
        new = _relabel(sig)
        if len(set(new)) == len(set(colour)):
            break
        colour = new

    # classes ordered by base, then by first point
    groups = {}
    for ai, (bi, lo, hi) in enumerate(atoms):
        groups.setdefault(colour[ai], []).append(ai)
    order = sorted(groups, key=lambda c: (atoms[groups[c][0]][0], atoms[groups[c][0]][1]))
    per_base = {}
    for c in order:
        per_base.setdefault(atoms[groups[c][0]][0], []).append(c)
    cid_of = {}
    for bi, cols in per_base.items():
        for j, c in enumerate(cols):
            cid_of[c] = bases[bi].id if len(cols) == 1 else f"{bases[bi].id}/{j}"

    cells, classes, splits = [], {}, {}
    for c in order:
        ais = groups[c]
        bi = atoms[ais[0]][0]
        b = bases[bi]
        ranges = tuple((atoms[a][1], atoms[a][2]) for a in ais)
        count = sum(hi - lo for lo, hi in ranges)
        tags = list(b.tags)
        for label, inside in mark_flags(bi, *ranges[0]):
            tags.append(("in:" if inside else "out:") + label)
        cid = cid_of[c]
        cells.append(Cell(cid, count, b.weight, tuple(tags)))
        classes[cid] = (b.id, ranges)
        if b.splittable:
            splits[cid] = "tree"

    full = {cell.id: cell.count for cell in cells}
    profiles = {}
    for c in order:
        cid = cid_of[c]
        near = {cid: 1}
        for j, k in adj[groups[c][0]].items():
            t = cid_of[colour[j]]
            near[t] = near.get(t, 0) + k
        profiles[cid] = BallProfile(cid, (0.0, layout.near, layout.far), ({cid: 1}, near, dict(full)))
    lay = replace(layout, classes=classes)
    return CellularSpace(tuple(cells), profiles, splits, dict(meta), lay)


def _relabel(keys):
    table = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [table[k] for k in keys]


def layout_space(layout: IntervalLayout, meta: dict):
    return build(layout, meta)


def split_tree(space, cell: str, gamma: int):
    layout = space.layout
    if layout is None or cell not in layout.classes:
        raise IllegalSplit(f"cell {cell} carries no layout")
    base_id, ranges = layout.classes[cell]
    taken, left = [], gamma
    for lo, hi in ranges:
        if left == 0:
            break
        t = min(left, hi - lo)
        taken.append((lo, lo + t))
        left -= t
    mark = Mark(cell, base_id, _merge(taken))
    return build(replace(layout, marks=layout.marks + (mark,)), space.meta)


def mark_prefix(space, base_id: str, k: int, label: str):
    """Rebuild ``space`` with the first ``k`` points of base ``base_id`` marked as ``label``."""
    layout = space.layout
    if layout is None:
        raise IllegalSplit("space carries no layout")
    N = layout.base(base_id).count
    if not 1 <= k <= N:
        raise IllegalSplit(f"cannot mark {k} of {N} points")
    return build(replace(layout, marks=layout.marks + (Mark(label, base_id, ((0, k),)),)), space.meta)


def _merge(ranges):
    out = []
    for lo, hi in ranges:
        if out and out[-1][1] == lo:
            out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)
