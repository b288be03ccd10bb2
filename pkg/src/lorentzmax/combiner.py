"""Glue finitely many spaces into one.

Component n is rescaled so its diameter is at most 1 and its measure
decays geometrically: each component weighs at most half of the lightest
point before it.  Points of different components sit at distance 2 and the
total measure is normalised to 1.  With these choices the maximal function
of the glued space is the larger of the component-local maximal function
and the global mean.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateComponent, EmptyList, Inconsistent
from .extreal import ExtReal, rel_diff, xsum
from .space import (
    BallProfile,
    Cell,
    CellularSpace,
    as_cellular,
    diameter,
    min_point_mass,
    validate_space,
)

GLUE_DISTANCE = 2.0


@dataclass(frozen=True, eq=False)
class Provenance:
    components: tuple  # component spaces in cellular form, unscaled
    metric_scales: tuple  # floats
    measure_scales: tuple  # ExtReal, after normalisation

    def prefix(self, n: int) -> str:
        return f"c{n}:"


@dataclass(frozen=True, eq=False)
class CombinedSpace(CellularSpace):
    provenance: Provenance = None

    def component_of(self, cid: str) -> int:
        return int(cid.split(":", 1)[0][1:])


def measure_scales(components) -> list:
    """s_1 = 1, s_{n+1} = s_n * minmass(X_n) / (2 mu(X_{n+1})), before normalisation."""
    s = [ExtReal(1)]
    for prev, nxt in zip(components, components[1:]):
        s.append(s[-1] * min_point_mass(prev) / (nxt.total_measure * 2))
    return s


def combine(components) -> CombinedSpace:
    comps = [as_cellular(c) for c in components]
    if not comps:
        raise EmptyList("nothing to combine")
    for n, c in enumerate(comps):
        if c.total_measure.is_zero():
            raise DegenerateComponent(f"component {n} has zero measure")
        rep = validate_space(c)
        if not rep.ok:
            raise Inconsistent(f"component {n} is not a valid space: {rep.violations[0]}")
    scales = measure_scales(comps)
    total = xsum(s * c.total_measure for s, c in zip(scales, comps))
    scales = [s / total for s in scales]
    metric = []
    for c in comps:
        d = diameter(c)
        metric.append(1.0 / d if d > 0 else 1.0)

    cells, profiles, splits = [], {}, {}
    for n, (c, s) in enumerate(zip(comps, scales)):
        pre = f"c{n}:"
        for cell in c.cells:
            cells.append(Cell(pre + cell.id, cell.count, cell.weight * s, cell.tags + (f"component={n}",)))
        for cid, rule in c.splits.items():
            if rule == "free":
                splits[pre + cid] = rule
    full = {cell.id: cell.count for cell in cells}
    for n, c in enumerate(comps):
        pre = f"c{n}:"
        for cid, prof in c.profiles.items():
            radii = tuple(r * metric[n] for r in prof.radii)
            members = tuple({pre + d: k for d, k in mem.items()} for mem in prof.members)
            if len(comps) > 1:
                radii += (GLUE_DISTANCE,)
                members += (dict(full),)
            profiles[pre + cid] = BallProfile(pre + cid, radii, members)
    prov = Provenance(tuple(comps), tuple(metric), tuple(scales))
    meta = {"kind": "combined", "components": [c.kind for c in comps]}
    return CombinedSpace(tuple(cells), profiles, splits, meta, None, prov)


@dataclass(frozen=True)
class ChainLink:
    index: int
    lightest_point: float  # min point mass of component n
    next_double: float  # 2 * measure of component n + 1
    holds: bool


def ordering_note(components) -> list:
    """The measure-decay chain min mass(X'_n) >= 2 mu(X'_{n+1}) along the given order."""
    if not components:
        return []
    space = components if isinstance(components, CombinedSpace) else combine(components)
    prov = space.provenance
    out = []
    for n in range(len(prov.components) - 1):
        light = min_point_mass(prov.components[n]) * prov.measure_scales[n]
        nxt = prov.components[n + 1].total_measure * prov.measure_scales[n + 1] * 2
        out.append(ChainLink(n, float(light), float(nxt), light >= nxt or _close(light, nxt)))
    return out


def _close(a: ExtReal, b: ExtReal) -> bool:
    return rel_diff(a, b) < 1e-12
