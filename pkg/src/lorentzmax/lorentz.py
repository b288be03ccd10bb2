"""Distribution profiles and Lorentz quasi-norms of cell-constant functions.

For a step function with distinct values v_1 > ... > v_m > 0 on masses
w_1, ..., w_m and cumulative masses W_i, and 1 <= q < inf,

    ||f||_{p,q} = (p/q)^{1/q} (sum_i W_i^{q/p} (v_i^q - v_{i+1}^q))^{1/q}
                = (p/q)^{1/q} (sum_i v_i^q (W_i^{q/p} - W_{i-1}^{q/p}))^{1/q},

with v_{m+1} = 0 and W_0 = 0; for q = inf the norm is max_i v_i W_i^{1/p}.
Differences such as v_i^q - v_{i+1}^q are formed as v_i^q (1 - rho^q) with
rho = v_{i+1}/v_i and ``expm1``, so no cancellation occurs.
"""
from __future__ import annotations

import bisect
import math
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .errors import BadExponent, InadmissibleTriple, MissingCell
from .extreal import ExtReal, rel_diff, xsum

INF = math.inf
DUAL_TOL = 2.0 ** -40


@dataclass(frozen=True)
class AdmissibleTriple:
    p: float
    q: float
    r: float

    def __post_init__(self):
        p, q, r = self.p, self.q, self.r
        if p == 1 and q == 1 and r >= 1:
            return
        if 1 < p < INF and 1 <= q <= r <= INF:
            return
        raise InadmissibleTriple(f"({p}, {q}, {r}) is not an admissible triple")

    def __str__(self) -> str:
        return f"({_fmt(self.p)},{_fmt(self.q)},{_fmt(self.r)})"


def _fmt(x: float) -> str:
    return "inf" if x == INF else f"{x:g}"


@dataclass(frozen=True, eq=False)
class CellFunction:
    """Non-negative function constant on cells (or points of a dense space)."""

    values: dict = field(default_factory=dict)

    @classmethod
    def from_floats(cls, values: dict) -> "CellFunction":
        return cls({k: v if isinstance(v, ExtReal) else ExtReal(v) for k, v in values.items()})

    @classmethod
    def indicator(cls, space, cells) -> "CellFunction":
        chosen = set(cells)
        missing = chosen - set(space.cell_ids)
        if missing:
            raise MissingCell(f"unknown cells {sorted(missing)}")
        return cls({c: ExtReal(1.0 if c in chosen else 0.0) for c in space.cell_ids})

    @classmethod
    def constant(cls, space, value=1.0) -> "CellFunction":
        v = ExtReal(value)
        return cls({c: v for c in space.cell_ids})

    def __getitem__(self, cid: str) -> ExtReal:
        return self.values[cid]

    def on(self, space) -> list:
        """Values in the space's cell order; raises MissingCell on any mismatch."""
        ids = space.cell_ids
        extra = set(self.values) - set(ids)
        if extra:
            raise MissingCell(f"function names cells not in the space: {sorted(extra)[:5]}")
        try:
            return [self.values[c] for c in ids]
        except KeyError as exc:
            raise MissingCell(f"function omits cell {exc.args[0]}") from None

    def scaled(self, c) -> "CellFunction":
        return CellFunction({k: v * c for k, v in self.values.items()})

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())


@dataclass(frozen=True, eq=False)
class DistributionProfile:
    values: tuple = ()  # strictly decreasing, positive
    masses: tuple = ()

    @cached_property
    def cumulative(self) -> tuple:
        out, acc = [], []
        for m in self.masses:
            acc.append(m)
            out.append(xsum(acc))
        return tuple(out)

    def distribution(self, t) -> ExtReal:
        """d_f(t): mass where f > t."""
        t = ExtReal(t)
        W = ExtReal(0.0)
        for v, Wi in zip(self.values, self.cumulative):
            if v > t:
                W = Wi
            else:
                break
        return W

    def rearrangement(self, t) -> ExtReal:
        """f*(t) = v_i on [W_{i-1}, W_i), zero beyond the support."""
        t = ExtReal(t)
        keys = [W._key() for W in self.cumulative]
        i = bisect.bisect_right(keys, t._key())
        return self.values[i] if i < len(self.values) else ExtReal(0.0)

    @property
    def total_mass(self) -> ExtReal:
        return self.cumulative[-1] if self.values else ExtReal(0.0)


def _cells_and_masses(space):
    from .space import DenseSpace

    if isinstance(space, DenseSpace):
        return list(space.ids), list(space.weights)
    return [c.id for c in space.cells], [c.mass for c in space.cells]


def distribution_profile(space, f: CellFunction) -> DistributionProfile:
    vals = f.on(space)
    _, masses = _cells_and_masses(space)
    return profile_from_levels(zip(vals, masses))


def profile_from_levels(pairs) -> DistributionProfile:
    """Aggregate (value, mass) pairs into a profile; zero values and masses drop out."""
    groups = {}
    for v, m in pairs:
        v, m = ExtReal(v), ExtReal(m)
        if v.is_zero() or m.is_zero():
            continue
        groups.setdefault(v._key(), (v, []))[1].append(m)
    levels = sorted(groups.values(), key=lambda g: g[0]._key(), reverse=True)
    return DistributionProfile(tuple(v for v, _ in levels), tuple(xsum(ms) for _, ms in levels))


@lru_cache(maxsize=256)
def _recip(x: float) -> Fraction:
    """1/x as an exact rational, so powers of huge masses keep their exponents."""
    return 1 / Fraction(x)


@lru_cache(maxsize=256)
def _ratio(a: float, b: float) -> Fraction:
    return Fraction(a) / Fraction(b)


@lru_cache(maxsize=256)
def _pq_factor(p: float, q: float) -> ExtReal:
    return ExtReal(Fraction(p) / Fraction(q)) ** _recip(q)


def _one_minus_pow(ratio: ExtReal, y: float) -> float:
    """1 - ratio**y for 0 <= ratio < 1, y > 0, without cancellation."""
    if ratio.is_zero():
        return 1.0
    t = y * ratio.log2() * math.log(2.0)
    return -math.expm1(t)


def _check_exponents(p: float, q: float) -> None:
    if not (1 <= p < INF) or not (q >= 1) or math.isnan(q):
        raise BadExponent(f"need 1 <= p < inf and q >= 1, got p={p}, q={q}")


def lorentz_norm(profile: DistributionProfile, p: float, q: float, check: bool = True) -> ExtReal:
    _check_exponents(p, q)
    vs, Ws = profile.values, profile.cumulative
    if not vs:
        return ExtReal(0.0)
    if q == INF:
        return max(v * W ** _recip(p) for v, W in zip(vs, Ws))
    qp = _ratio(q, p)
    vq = [v ** q for v in vs]
    Wq = [W ** qp for W in Ws]
    m = len(vs)
    df_terms = []
    for i in range(m):
        tail = 1.0 if i + 1 == m else _one_minus_pow(vs[i + 1] / vs[i], q)
        df_terms.append(Wq[i] * vq[i] * tail)
    s = xsum(df_terms)
    if check:
        fs_terms = []
        for i in range(m):
            head = 1.0 if i == 0 else _one_minus_pow(Ws[i - 1] / Ws[i], qp)
            fs_terms.append(vq[i] * Wq[i] * head)
        s2 = xsum(fs_terms)
        if rel_diff(s, s2) > DUAL_TOL:
            raise ArithmeticError(f"Lorentz closed forms disagree: {s!r} vs {s2!r}")
    return _pq_factor(p, q) * s ** _recip(q)


def lorentz_norm_fs(profile: DistributionProfile, p: float, q: float) -> ExtReal:
    """The rearrangement-based closed form alone (used to test the main path)."""
    _check_exponents(p, q)
    vs, Ws = profile.values, profile.cumulative
    if not vs:
        return ExtReal(0.0)
    if q == INF:
        return max(v * W ** _recip(p) for v, W in zip(vs, Ws))
    qp = _ratio(q, p)
    terms = []
    for i, (v, W) in enumerate(zip(vs, Ws)):
        head = 1.0 if i == 0 else _one_minus_pow(Ws[i - 1] / W, qp)
        terms.append(v ** q * W ** qp * head)
    return _pq_factor(p, q) * xsum(terms) ** _recip(q)


def l1_norm(profile: DistributionProfile) -> ExtReal:
    return xsum(v * m for v, m in zip(profile.values, profile.masses))


def norm_of(space, f: CellFunction, p: float, q: float, check: bool = True) -> ExtReal:
    return lorentz_norm(distribution_profile(space, f), p, q, check)


def indicator_norm(mass, p: float, q: float) -> ExtReal:
    """(p/q)^{1/q} |A|^{1/p}, and |A|^{1/p} when q is infinite."""
    _check_exponents(p, q)
    base = ExtReal(mass) ** _recip(p)
    return base if q == INF else _pq_factor(p, q) * base
