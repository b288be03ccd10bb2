"""Lower bounds for the operator constant c(p, q, r, X) and the closed-form comparison values.

``witness_ratio`` is the quotient ||Mf||_{p,r} / ||f||_{p,q} for one function,
hence a lower bound for the constant.  For q = 1 the constant is comparable
to its restriction to indicator functions, which ``restricted_constant_exact``
enumerates; for q > 1 ``search_constant`` runs a seeded coordinate ascent.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BadParams, BudgetExceeded, DegenerateSweep, ZeroFunction
from .extreal import ExtReal, xmax, xsum
from .layout import mark_prefix
from .lorentz import INF, AdmissibleTriple, CellFunction, distribution_profile, lorentz_norm, profile_from_levels
from .maximal import dense_ball_order, maximal_batch, maximal_function, from_arrays
from .space import CellularSpace, DenseSpace, cell_weights_float, is_free, split_free

TIE_TOL = 1e-12
DEFAULT_BUDGET = 1 << 21
GRID_FULL = 64


def as_triple(triple) -> AdmissibleTriple:
    return triple if isinstance(triple, AdmissibleTriple) else AdmissibleTriple(*triple)


@dataclass(frozen=True, eq=False)
class ConstantEstimate:
    lower: ExtReal
    witness: CellFunction
    space: object  # the space the witness lives on (a refinement of the input for split sets)
    method: str
    exact: bool
    triple: AdmissibleTriple
    detail: str = ""

    def recheck(self) -> ExtReal:
        return witness_ratio(self.space, self.witness, self.triple)


def witness_ratio(space, f: CellFunction, triple) -> ExtReal:
    t = as_triple(triple)
    if f.is_zero():
        raise ZeroFunction("the zero function gives no ratio")
    Mf = maximal_function(space, f).Mf
    num = lorentz_norm(distribution_profile(space, Mf), t.p, t.r)
    den = lorentz_norm(distribution_profile(space, f), t.p, t.q)
    return num / den


def _ratios_of(space, functions, triple: AdmissibleTriple) -> list:
    """Exact ratios of several functions on one space (one batched maximal evaluation)."""
    m, e, _ = maximal_batch(space, functions)
    ids = space.cell_ids
    masses = [c.mass for c in space.cells] if isinstance(space, CellularSpace) else list(space.weights)
    out = []
    for k, f in enumerate(functions):
        Mf = from_arrays(m[k], e[k])
        num = lorentz_norm(profile_from_levels(zip(Mf, masses)), triple.p, triple.r)
        den = lorentz_norm(profile_from_levels(zip((f[c] for c in ids), masses)), triple.p, triple.q)
        out.append(num / den)
    return out


# ---------------------------------------------------------------------------
# indicator enumeration (q = 1)
# ---------------------------------------------------------------------------
def _pick(ratios: np.ndarray) -> int:
    """First index whose ratio is within the tie tolerance of the maximum."""
    top = ratios.max()
    return int(np.flatnonzero(ratios >= top * (1 - TIE_TOL))[0])


def restricted_constant_exact(space, p: float, r: float, subset_budget: int = DEFAULT_BUDGET) -> ConstantEstimate:
    """Best ratio ||M chi_E||_{p,r} / ||chi_E||_{p,1} over the enumerable sets E.

    dense spaces:                 every non-empty subset (exact)
    cells all interchangeable:    every vector of per-cell counts (exact up to symmetry)
    block-linked layouts:         single-level sets, lower or block-aligned upper (not exhaustive)
    anything else:                unions of whole cells (not exhaustive)
    """
    triple = AdmissibleTriple(p, 1.0, r) if p > 1 else AdmissibleTriple(1.0, 1.0, r)
    if isinstance(space, DenseSpace):
        return _dense_restricted(space, triple, subset_budget)
    if all(is_free(space, c.id) for c in space.cells):
        return _free_restricted(space, triple, subset_budget)
    if space.layout is not None:
        return _layout_restricted(space, triple, subset_budget)
    return _union_restricted(space, triple, subset_budget)


def _dense_restricted(space: DenseSpace, triple, budget) -> ConstantEstimate:
    N = len(space.ids)
    total = (1 << N) - 1
    if total > budget:
        raise BudgetExceeded(f"{total} subsets exceed the budget {budget}")
    order, is_end = dense_ball_order(space)
    w = cell_weights_float(space)
    masks = np.arange(1, total + 1, dtype=np.int64)
    ratios = kernels.dense_subset_ratios(order, is_end, w, triple.p, triple.r, masks)
    best = int(masks[_pick(ratios)])
    chosen = [space.ids[i] for i in range(N) if best >> i & 1]
    f = CellFunction.indicator(space, chosen)
    return ConstantEstimate(witness_ratio(space, f, triple), f, space, "restricted", True, triple, f"{total} subsets")


def _free_tables(space: CellularSpace):
    cells = space.cells
    idx = space.index
    w = cell_weights_float(space)
    n = np.array([c.count for c in cells], dtype=np.float64)
    cell_ptr, full, self_full, den = [0], [], [], []
    for c in cells:
        prof = space.profiles[c.id]
        for mem in prof.members:
            row = np.zeros(len(cells), dtype=np.bool_)
            for d, k in mem.items():
                if d != c.id and k == space.cell(d).count:
                    row[idx[d]] = True
            full.append(row)
            self_full.append(mem.get(c.id, 0) == c.count)
            den.append(sum(w[idx[d]] * k for d, k in mem.items()))
        cell_ptr.append(len(full))
    return (
        n,
        w,
        np.array(cell_ptr, dtype=np.int64),
        np.array(full, dtype=np.bool_).reshape(len(full), len(cells)),
        np.array(self_full, dtype=np.bool_),
        np.array(den, dtype=np.float64),
    )


def _config_space(space: CellularSpace, g) -> tuple:
    """Split every partially chosen cell; returns the refined space and the chosen cell ids."""
    chosen = []
    out = space
    for c, k in zip(space.cells, g):
        if k == 0:
            continue
        if k == c.count:
            chosen.append(c.id)
        else:
            out = split_free(out, c.id, int(k))
            chosen.append(f"{c.id}.a")
    return out, chosen


def _free_restricted(space: CellularSpace, triple, budget) -> ConstantEstimate:
    counts = [c.count for c in space.cells]
    total = math.prod(k + 1 for k in counts) - 1
    if total > budget:
        raise BudgetExceeded(f"about 2^{total.bit_length() - 1} count vectors exceed the budget {budget}")
    n, w, cell_ptr, full, self_full, den = _free_tables(space)
    best_val, best_g = -1.0, None
    it = itertools.product(*(range(k + 1) for k in counts))
    next(it)  # the empty set
    chunk = 1 << 16
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        G = np.array(block, dtype=np.float64)
        ratios = kernels.free_config_ratios(G, n, w, cell_ptr, full, self_full, den, triple.p, triple.r)
        j = _pick(ratios)
        if ratios[j] > best_val * (1 + TIE_TOL):
            best_val, best_g = float(ratios[j]), block[j]
    wspace, chosen = _config_space(space, best_g)
    f = CellFunction.indicator(wspace, chosen)
    lower = witness_ratio(wspace, f, triple)
    return ConstantEstimate(lower, f, wspace, "restricted", True, triple, f"counts={list(best_g)}")


def gamma_grid(h: int) -> list:
    """All of 1..h when small, otherwise powers of two and h itself."""
    if h <= GRID_FULL:
        return list(range(1, h + 1))
    out = {h}
    k = 1
    while k < h:
        out.add(k)
        k <<= 1
    return sorted(out)


def single_level_family(space: CellularSpace) -> list:
    """(base id, number of marked points) for every single-level set of a block-linked space."""
    layout = space.layout
    lower = {b.id: b for b in layout.bases if b.splittable}
    fam = []
    for b in layout.bases:
        if b.splittable:
            fam.extend((b.id, g) for g in gamma_grid(b.count))
    for b in layout.bases:
        if b.splittable:
            continue
        # upper base: block-aligned prefixes, one block per point of the finest linked lower base
        linked = [lower[lo].count for lo, up in layout.links if up == b.id and lo in lower]
        h = max(linked) if linked else b.count
        step = b.count // h
        fam.extend((b.id, g * step) for g in gamma_grid(h))
    return fam


def _layout_restricted(space: CellularSpace, triple, budget) -> ConstantEstimate:
    fam = single_level_family(space)
    if len(fam) > budget:
        raise BudgetExceeded(f"{len(fam)} single-level sets exceed the budget {budget}")
    best = None
    for base, k in fam:
        wspace = mark_prefix(space, base, k, "E")
        chosen = [c.id for c in wspace.cells if "in:E" in c.tags]
        f = CellFunction.indicator(wspace, chosen)
        val = witness_ratio(wspace, f, triple)
        if best is None or val > best[0] * (1 + TIE_TOL):
            best = (val, f, wspace, f"{base}:{k}")
    val, f, wspace, label = best
    return ConstantEstimate(val, f, wspace, "restricted-single-level", False, triple, label)


def _union_restricted(space: CellularSpace, triple, budget) -> ConstantEstimate:
    C = len(space.cells)
    total = (1 << C) - 1
    if total > budget:
        raise BudgetExceeded(f"{total} cell unions exceed the budget {budget}")
    ids = space.cell_ids
    best = None
    for mask in range(1, total + 1):
        f = CellFunction.indicator(space, [ids[i] for i in range(C) if mask >> i & 1])
        val = witness_ratio(space, f, triple)
        if best is None or val > best[0] * (1 + TIE_TOL):
            best = (val, f)
    return ConstantEstimate(best[0], best[1], space, "restricted-cell-unions", False, triple, f"{total} unions")


# ---------------------------------------------------------------------------
# search over cell-constant functions
# ---------------------------------------------------------------------------
def builtin_witnesses(space) -> list:
    """(name, function) pairs: center indicator, the level-weighted lower function, constant, single cells."""
    ids = space.cell_ids
    out = []
    cells = space.cells if isinstance(space, CellularSpace) else ()
    centers = [c.id for c in cells if "center" in c.tags]
    if centers:
        out.append(("center", CellFunction.indicator(space, centers[:1])))
    lower = [c for c in cells if "lower" in c.tags]
    if lower:
        vals = {cid: ExtReal(0.0) for cid in ids}
        for c in lower:
            vals[c.id] = ExtReal(1) / c.weight
        out.append(("g", CellFunction(vals)))
    out.append(("constant", CellFunction.constant(space)))
    for cid in ids[:GRID_FULL]:
        out.append((f"cell:{cid}", CellFunction.indicator(space, [cid])))
    return out


def _from_logs(ids, logs) -> CellFunction:
    return CellFunction({c: ExtReal.from_log2(x) for c, x in zip(ids, logs)})


def search_constant(space, triple, budget: int = 2000, seed: int = 0) -> ConstantEstimate:
    """Coordinate ascent on log2 values, restarted from the built-ins and random points.

    ``budget`` counts ratio evaluations beyond the built-ins; 0 returns the best built-in.
    """
    t = as_triple(triple)
    ids = space.cell_ids
    named = builtin_witnesses(space)
    vals = _ratios_of(space, [f for _, f in named], t)
    j = max(range(len(vals)), key=lambda k: (vals[k], -k))
    best_val, best_f, best_name = vals[j], named[j][1], named[j][0]
    if budget <= 0:
        return ConstantEstimate(best_val, best_f, space, f"builtin:{best_name}", False, t)
    rng = np.random.default_rng(seed)
    steps = (8.0, 2.0, 0.5, 0.125)
    used = 0
    starts = [[v.log2() for v in best_f.on(space)]]
    while used < budget:
        x = starts.pop() if starts else list(rng.uniform(-8.0, 0.0, len(ids)))
        cur = _ratios_of(space, [_from_logs(ids, x)], t)[0] if any(v > -math.inf for v in x) else ExtReal(0.0)
        used += 1
        improved = True
        while improved and used < budget:
            improved = False
            cands = []
            for i in range(len(ids)):
                for s in steps:
                    for sign in (1.0, -1.0):
                        y = list(x)
                        y[i] = (y[i] if y[i] > -math.inf else -16.0) + sign * s
                        cands.append(y)
                if x[i] > -math.inf:
                    y = list(x)
                    y[i] = -math.inf
                    if any(v > -math.inf for v in y):
                        cands.append(y)
            cands = cands[: max(0, budget - used)]
            if not cands:
                break
            rs = _ratios_of(space, [_from_logs(ids, y) for y in cands], t)
            used += len(cands)
            k = max(range(len(rs)), key=lambda a: (rs[a], -a))
            if rs[k] > cur * (1 + TIE_TOL):
                x, cur, improved = cands[k], rs[k], True
        if cur > best_val * (1 + TIE_TOL):
            best_val, best_f, best_name = cur, _from_logs(ids, x), "search"
    return ConstantEstimate(best_val, best_f, space, best_name, False, t, f"{used} evaluations")


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------
def lemma_formula(kind: str, params, p: float, r: float) -> ExtReal:
    """Comparison value for the first-type families.

    L1 (sequence m, p > 1):   (sum_j 2^{j r (1/p - 1)} m_j^{r/p})^{1/r}, or the sup over j when r = inf
    L2 (sequence m', p = 1):  (sum_{j < l} m'_j^{-r})^{1/r}, or 1 when r = inf (0 when l = 1)
    """
    seq = [int(x) for x in params]
    if not seq or any(x < 1 for x in seq):
        raise BadParams("the sequence must hold positive integers")
    if not r >= 1:
        raise BadParams(f"r must be at least 1, got {r}")
    if kind == "L1":
        if not 1 < p < INF:
            raise BadParams(f"L1 needs p in (1, inf), got {p}")
        if r == INF:
            return xmax(ExtReal.from_log2(j * (1 / p - 1)) * ExtReal(mj) ** (1 / p) for j, mj in enumerate(seq, 1))
        terms = [ExtReal.from_log2(j * r * (1 / p - 1)) * ExtReal(mj) ** (r / p) for j, mj in enumerate(seq, 1)]
        return xsum(terms) ** (1 / r)
    if kind == "L2":
        if len(seq) == 1:
            return ExtReal(0.0)
        if r == INF:
            return ExtReal(1.0)
        return xsum(ExtReal(mj) ** (-r) for mj in seq[:-1]) ** (1 / r)
    raise BadParams(f"unknown formula {kind!r}")


@dataclass
class TrendReport:
    name: str
    rows: list = field(default_factory=list)  # list of dicts, one per sweep point
    slope: float = math.nan
    band: float = math.nan
    checks: dict = field(default_factory=dict)  # check name -> bool
    meta: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def loglog_slope(xs, ys) -> float:
    lx = np.log(np.asarray(xs, dtype=np.float64))
    ly = np.log(np.asarray(ys, dtype=np.float64))
    if np.ptp(lx) <= 1e-12 * max(1.0, np.abs(lx).max()):
        raise DegenerateSweep("the regressor does not vary")
    return float(np.polyfit(lx, ly, 1)[0])


def trend_fit(points, name: str = "trend") -> TrendReport:
    """Slope of log(estimate) against log(formula) and the band max/min of estimate/formula."""
    pts = list(points)
    if len(pts) < 3:
        raise DegenerateSweep("need at least three sweep points")
    est = [float(ExtReal(e).log2()) for _, e, _ in pts]
    frm = [float(ExtReal(f).log2()) for _, _, f in pts]
    if any(math.isinf(x) for x in est + frm):
        raise DegenerateSweep("estimates and formula values must be positive")
    if max(frm) - min(frm) <= 1e-12 * max(1.0, max(abs(x) for x in frm)):
        raise DegenerateSweep("the formula does not vary over the sweep")
    slope = float(np.polyfit(frm, est, 1)[0])
    ratios = [2.0 ** (e - f) for e, f in zip(est, frm)]
    rows = [
        {"param": prm, "estimate": 2.0 ** e, "formula": 2.0 ** f, "ratio": q}
        for (prm, _, _), e, f, q in zip(pts, est, frm, ratios)
    ]
    return TrendReport(name, rows, slope, max(ratios) / min(ratios))
