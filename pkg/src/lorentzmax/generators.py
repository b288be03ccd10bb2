"""Test-space families and the integer sequences that parametrise them.

* first type, p > 1:  a center x0 of mass 1 and levels of m_j points of mass 2**j;
  every point sits at distance 1 from x0 and 2 from everything else.
* first type, p = 1:  counting measure on x0 and blocks of 2**h_j points; a block
  is close to its own level, the tail of the level below, and x0.
* second type:        lower cells T_i (h_i points of mass m_i) linked block-wise to
  upper cells (h_i beta_i points of heavy mass); see ``layout``.

Sequences are chosen greedily (always the smallest admissible integer) and
every constraint is then re-checked from the emitted numbers alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

from .errors import BadCase, BadParams, BadSequence, Infeasible, UncertifiedPlan
from .exactpow import as_fraction, compare, int_estimate, log2_of, smallest_int
from .extreal import ExtReal
from .layout import Base, IntervalLayout, build
from .space import BallProfile, Cell, CellularSpace

SCAN_BUDGET = 100_000


@dataclass(frozen=True)
class CertEntry:
    id: str
    holds: bool
    witness: str


@dataclass(frozen=True, eq=False)
class SequencePlan:
    kind: str
    l: int
    m: tuple = ()
    h: tuple = ()
    alpha: tuple = ()
    beta: tuple = ()
    alpha_scalar: int = 0
    params: tuple = ()
    certificate: tuple = field(default_factory=tuple)

    @property
    def certified(self) -> bool:
        return bool(self.certificate) and all(c.holds for c in self.certificate)

    def failed(self) -> list:
        return [c for c in self.certificate if not c.holds]


def _show(n: int) -> str:
    return str(n) if n.bit_length() <= 200 else f"~2^{n.bit_length() - 1}"


def _ge(lhs, rhs) -> bool:
    c = compare(lhs, rhs)
    return c is not None and c >= 0


def _gt(lhs, rhs) -> bool:
    c = compare(lhs, rhs)
    return c is not None and c > 0


def _le(lhs, rhs) -> bool:
    c = compare(lhs, rhs)
    return c is not None and c <= 0


def _lt(lhs, rhs) -> bool:
    c = compare(lhs, rhs)
    return c is not None and c < 0


def _check_sequence(m, name: str) -> tuple:
    m = tuple(m)
    if not m:
        raise BadSequence(f"{name} is empty")
    for x in m:
        if not isinstance(x, int) or isinstance(x, bool) or x < 1:
            raise BadSequence(f"{name} must hold positive integers, got {x!r}")
    if any(b < a for a, b in zip(m, m[1:])):
        raise BadSequence(f"{name} must be non-decreasing")
    return m


def _compact(radii, members):
    """Drop radii whose ball repeats the previous one (radius 0 always stays)."""
    out_r, out_m = [radii[0]], [members[0]]
    for rad, mem in zip(radii[1:], members[1:]):
        if mem != out_m[-1]:
            out_r.append(rad)
            out_m.append(mem)
    return tuple(out_r), tuple(out_m)


def _profile(cid, radii, members) -> BallProfile:
    r, m = _compact(radii, [{k: v for k, v in mem.items() if v} for mem in members])
    return BallProfile(cid, r, m)


# ---------------------------------------------------------------------------
# first type
# ---------------------------------------------------------------------------
def gen_first_type(m) -> CellularSpace:
    m = _check_sequence(m, "m")
    cells = [Cell("x0", 1, ExtReal(1), ("center",))]
    for j, mj in enumerate(m, start=1):
        cells.append(Cell(f"S{j}", mj, ExtReal.pow2(j), (f"level={j}",)))
    full = {c.id: c.count for c in cells}
    profiles = {"x0": _profile("x0", (0.0, 1.0), ({"x0": 1}, full))}
    for c in cells[1:]:
        profiles[c.id] = _profile(c.id, (0.0, 1.0, 2.0), ({c.id: 1}, {"x0": 1, c.id: 1}, full))
    splits = {c.id: "free" for c in cells if c.count > 1}
    return CellularSpace(tuple(cells), profiles, splits, {"kind": "S", "m": m})


def first_prime_heights(m) -> tuple:
    """h_1 = 1 and h_{j+1} the least h > h_j with floor(2**h / m_{j+1}) > 2**h_j."""
    h = [1]
    for mj in m[1:]:
        x = h[-1] + 1
        while (1 << x) // mj <= (1 << h[-1]):
            x += 1
        h.append(x)
    return tuple(h)


def verify_first_prime(m, h) -> tuple:
    out = [CertEntry("m'1=1", m[0] == 1, f"m'1={m[0]}")]
    out.append(CertEntry("non-decreasing", all(a <= b for a, b in zip(m, m[1:])), ""))
    out.append(CertEntry("h increasing", all(a < b for a, b in zip(h, h[1:])), ""))
    for j in range(len(m) - 1):
        lhs = (1 << h[j + 1]) // m[j + 1]
        out.append(CertEntry(f"(3) j={j + 1}", lhs > (1 << h[j]), f"{_show(lhs)} > 2^{h[j]}"))
    return tuple(out)


def gen_first_type_prime(m):
    m = _check_sequence(m, "m'")
    if m[0] != 1:
        raise BadSequence("m'_1 must be 1")
    h = first_prime_heights(m)
    l = len(m)
    a = [(1 << h[j]) // m[j] for j in range(l)]
    b = [(1 << h[j]) - a[j] for j in range(l)]
    cells = [Cell("x0", 1, ExtReal(1), ("center",))]
    for j in range(l):
        cells.append(Cell(f"A{j + 1}", a[j], ExtReal(1), (f"level={j + 1}", "head")))
        if b[j]:
            cells.append(Cell(f"B{j + 1}", b[j], ExtReal(1), (f"level={j + 1}", "tail")))
    full = {c.id: c.count for c in cells}

    def level(j):  # all of S_j, 1-based; empty outside 1..l
        if not 1 <= j <= l:
            return {}
        out = {f"A{j}": a[j - 1]}
        if b[j - 1]:
            out[f"B{j}"] = b[j - 1]
        return out

    def tail(j):
        return {f"B{j}": b[j - 1]} if 1 <= j <= l and b[j - 1] else {}

    profiles = {"x0": _profile("x0", (0.0, 1.0), ({"x0": 1}, full))}
    for j in range(1, l + 1):
        near_a = {"x0": 1, **tail(j - 1), **level(j)}
        profiles[f"A{j}"] = _profile(f"A{j}", (0.0, 1.0, 2.0), ({f"A{j}": 1}, near_a, full))
        if b[j - 1]:
            near_b = {"x0": 1, **tail(j - 1), **level(j), **level(j + 1)}
            profiles[f"B{j}"] = _profile(f"B{j}", (0.0, 1.0, 2.0), ({f"B{j}": 1}, near_b, full))
    splits = {c.id: "free" for c in cells if c.count > 1}
    plan = SequencePlan("S'", l, m=m, h=h, certificate=verify_first_prime(m, h))
    space = CellularSpace(tuple(cells), profiles, splits, {"kind": "S'", "m": m, "h": h})
    return space, plan


# ---------------------------------------------------------------------------
# second type: sequences
# ---------------------------------------------------------------------------
def _check_p(p) -> Fraction:
    if not (1 < p < math.inf):
        raise BadParams(f"second-type spaces need p in (1, inf), got {p}")
    return as_fraction(p)


def _synth_mh(P: Fraction, l: int):
    """h_1 = m_1 = 1; m_{i+1} least >= 2 m_i h_i whose window [m^{p-1}, 2m^{p-1}) holds a multiple of h_i."""
    a = P - 1
    m, h = [1], [1]
    for _ in range(1, l):
        hi = h[-1]

        def window(mm):
            est = int_estimate(log2_of([(mm, a)]) - math.log2(hi))
            k = smallest_int(lambda k: _ge([(k * hi, 1)], [(mm, a)]), 1, est)
            hh = k * hi
            return hh if _lt([(hh, 1)], [(2, 1), (mm, a)]) else None

        mm = 2 * m[-1] * hi
        for _ in range(SCAN_BUDGET):
            hh = window(mm)
            if hh is not None:
                break
            mm += 1
        else:
            raise Infeasible("(iii)", f"no m within {SCAN_BUDGET} steps of {2 * m[-1] * hi}")
        m.append(mm)
        h.append(hh)
    return m, h


def _smallest_beta(alpha, hh, a, scale=()):
    """Least beta with scale * alpha^a <= beta * hh."""
    rhs = list(scale) + [(alpha, a)]
    est = int_estimate(log2_of(rhs) - math.log2(hh))
    beta = smallest_int(lambda b: _ge([(b * hh, 1)], rhs), 1, est)
    return beta


def synth_second_type(p, q, r, l: int) -> SequencePlan:
    P = _check_p(p)
    if not (1 < q <= r < math.inf):
        raise BadParams(f"second-type spaces need 1 < q <= r < inf, got q={q}, r={r}")
    if not isinstance(l, int) or l < 1:
        raise BadParams(f"l must be a positive integer, got {l!r}")
    a = P - 1
    e = P / (a * as_fraction(r))
    m, h = _synth_mh(P, l)
    target = 2 * m[-1] * h[-1]
    est = int_estimate(math.log2(target) - log2_of([(l, e)]))
    alpha = smallest_int(
        lambda x: _ge([(l, e), (x, 1)], [(target, 1)]) and _lt([(h[0], 1)], [(2, 1), (x, a)]), 1, est
    )
    alphas, betas = [], []
    for i in range(l):
        if i:
            lo = 2 * alphas[-1] * betas[-1]
            hh = h[i]
            alpha = smallest_int(lambda x: _lt([(hh, 1)], [(2, 1), (x, a)]), lo, lo)
        for _ in range(SCAN_BUDGET):
            beta = _smallest_beta(alpha, h[i], a)
            if _lt([(beta * h[i], 1)], [(2, 1), (alpha, a)]):
                break
            alpha += 1
        else:
            raise Infeasible("(vi)", f"no beta for level {i + 1}")
        alphas.append(alpha)
        betas.append(beta)
    plan = SequencePlan("T", l, tuple(m), tuple(h), tuple(alphas), tuple(betas), 0, (p, q, r))
    return _with_certificate(plan)


def verify_second_type(plan: SequencePlan) -> tuple:
    p, _, r = plan.params
    P = as_fraction(p)
    a = P - 1
    e = P / (a * as_fraction(r))
    m, h, al, be, l = plan.m, plan.h, plan.alpha, plan.beta, plan.l
    out = []
    ok = len(m) == len(h) == len(al) == len(be) == l
    out.append(CertEntry("lengths", ok, f"l={l}"))
    if not ok:
        return tuple(out)
    for i in range(l - 1):
        out.append(CertEntry(f"(i) i={i + 1}", h[i + 1] % h[i] == 0, f"h={_show(h[i])},{_show(h[i + 1])}"))
        out.append(CertEntry(f"(ii) i={i + 1}", m[i + 1] >= 2 * m[i] * h[i], f"m={_show(m[i + 1])} vs {_show(2 * m[i] * h[i])}"))
        out.append(CertEntry(f"(v) i={i + 1}", al[i + 1] >= 2 * al[i] * be[i], "alpha growth"))
    for i in range(l):
        lo = _le([(m[i], a)], [(h[i], 1)])
        hi = _lt([(h[i], 1)], [(2, 1), (m[i], a)])
        out.append(CertEntry(f"(iii) i={i + 1}", lo and hi, f"m={_show(m[i])}, h={_show(h[i])}"))
        lo = _le([(al[i], a)], [(be[i] * h[i], 1)])
        hi = _lt([(be[i] * h[i], 1)], [(2, 1), (al[i], a)])
        out.append(CertEntry(f"(vi) i={i + 1}", lo and hi, f"beta*h={_show(be[i] * h[i])}"))
    out.append(
        CertEntry("(iv)", _ge([(l, e), (al[0], 1)], [(2 * m[-1] * h[-1], 1)]), f"alpha1={_show(al[0])}, 2 m_l h_l={_show(2 * m[-1] * h[-1])}")
    )
    return tuple(out)


def synth_second_type_prime(p, q, l: int) -> SequencePlan:
    P = _check_p(p)
    if not (1 < q < math.inf):
        raise BadParams(f"the r = inf family needs q in (1, inf), got {q}")
    if not isinstance(l, int) or l < 1:
        raise BadParams(f"l must be a positive integer, got {l!r}")
    a = P - 1
    m, h = _synth_mh(P, l)
    lo = 2 * m[-1] * h[-1]

    def feasible(x):
        return all(_ge([(x, a)], [(h[j - 1], 1), (j, 2 - P)]) for j in range(1, l + 1))

    est = max(lo, max(int_estimate((log2_of([(h[j - 1], 1), (j, 2 - P)])) / float(a)) for j in range(1, l + 1)))
    alpha = smallest_int(feasible, lo, est)
    betas = []
    for j in range(1, l + 1):
        beta = _smallest_beta(alpha, h[j - 1], a, scale=[(j, P - 2)])
        betas.append(beta)
    plan = SequencePlan("T'", l, tuple(m), tuple(h), (), tuple(betas), alpha, (p, q, math.inf))
    return _with_certificate(plan)


def verify_second_type_prime(plan: SequencePlan) -> tuple:
    p = plan.params[0]
    P = as_fraction(p)
    a = P - 1
    m, h, be, l, al = plan.m, plan.h, plan.beta, plan.l, plan.alpha_scalar
    out = []
    ok = len(m) == len(h) == len(be) == l and al >= 1
    out.append(CertEntry("lengths", ok, f"l={l}"))
    if not ok:
        return tuple(out)
    for i in range(l - 1):
        out.append(CertEntry(f"(i') i={i + 1}", h[i + 1] % h[i] == 0, f"h={_show(h[i])},{_show(h[i + 1])}"))
        out.append(CertEntry(f"(ii') i={i + 1}", m[i + 1] >= 2 * m[i] * h[i], f"m={_show(m[i + 1])}"))
    for i in range(l):
        lo = _le([(m[i], a)], [(h[i], 1)])
        hi = _lt([(h[i], 1)], [(2, 1), (m[i], a)])
        out.append(CertEntry(f"(iii') i={i + 1}", lo and hi, f"m={_show(m[i])}, h={_show(h[i])}"))
        out.append(CertEntry(f"(iv') i={i + 1}", al >= 2 * m[i] * h[i], f"alpha={_show(al)}"))
        j = i + 1
        lo = _le([(j, P - 2), (al, a)], [(be[i] * h[i], 1)])
        hi = _le([(be[i] * h[i], 1)], [(2, 1), (j, P - 2), (al, a)])
        out.append(CertEntry(f"(v') j={j}", lo and hi, f"beta*h={_show(be[i] * h[i])}"))
    return tuple(out)


def _with_certificate(plan: SequencePlan) -> SequencePlan:
    cert = verify_second_type(plan) if plan.kind == "T" else verify_second_type_prime(plan)
    return SequencePlan(plan.kind, plan.l, plan.m, plan.h, plan.alpha, plan.beta, plan.alpha_scalar, plan.params, cert)


# ---------------------------------------------------------------------------
# second type: spaces
# ---------------------------------------------------------------------------
def _second_type_space(plan: SequencePlan, upper_weights, kind: str) -> CellularSpace:
    l = plan.l
    bases = []
    for i in range(l):
        bases.append(Base(f"T{i + 1}", plan.h[i], ExtReal(plan.m[i]), ("lower", f"level={i + 1}"), True))
    for i in range(l):
        bases.append(Base(f"U{i + 1}", plan.h[i] * plan.beta[i], upper_weights[i], ("upper", f"level={i + 1}")))
    links = frozenset((f"T{i}", f"U{k}") for i in range(1, l + 1) for k in range(i, l + 1))
    layout = IntervalLayout(tuple(bases), links)
    meta = {"kind": kind, "params": plan.params, "l": l, "plan": plan}
    return build(layout, meta)


def gen_second_type(plan: SequencePlan) -> CellularSpace:
    if plan.kind != "T":
        raise UncertifiedPlan(f"expected a T plan, got {plan.kind}")
    cert = verify_second_type(plan)
    if not all(c.holds for c in cert):
        bad = [c.id for c in cert if not c.holds]
        raise UncertifiedPlan(f"constraints fail: {bad}")
    p, _, r = plan.params
    P = as_fraction(p)
    e = P / ((P - 1) * as_fraction(r))
    scale = ExtReal(plan.l) ** e
    weights = [scale * ExtReal(a) for a in plan.alpha]
    return _second_type_space(plan, weights, "T")


def gen_second_type_prime(plan: SequencePlan) -> CellularSpace:
    if plan.kind != "T'":
        raise UncertifiedPlan(f"expected a T' plan, got {plan.kind}")
    cert = verify_second_type_prime(plan)
    if not all(c.holds for c in cert):
        bad = [c.id for c in cert if not c.holds]
        raise UncertifiedPlan(f"constraints fail: {bad}")
    weights = [ExtReal(i * plan.alpha_scalar) for i in range(1, plan.l + 1)]
    return _second_type_space(plan, weights, "T'")


def synth_and_gen_second_type_prime(p, q, l: int):
    plan = synth_second_type_prime(p, q, l)
    return gen_second_type_prime(plan), plan


# ---------------------------------------------------------------------------
# sequences for the combined counterexamples
# ---------------------------------------------------------------------------
CASES = ("U1", "V1", "U2", "V2", "U3", "V3", "U4", "V4")


@dataclass(frozen=True)
class ComponentRecipe:
    case: str
    n: int
    family: str  # "first" (p > 1 type) or "first-prime"
    m: tuple
    r_param: float = math.nan  # diagonal exponent r^(n) for V2/V4


def _case_of(p0, r0) -> int:
    if 1 < p0 < math.inf:
        return 1 if r0 < math.inf else 2
    if p0 == 1:
        return 3 if r0 < math.inf else 4
    raise BadCase(f"p0={p0} outside [1, inf)")


def _ceil_dec(x: Decimal) -> int:
    n = int(x.to_integral_value(rounding="ROUND_CEILING"))
    return n


def _log_a(i: int, p0, r0, damp_n=None) -> Decimal:
    """Natural log of a_i = 2^{i(p0-1)} i^{-p0/r0} (times log(n+3)^{-p0/r0} when damped)."""
    p0d, r0d = Decimal(repr(float(p0))), Decimal(repr(float(r0)))
    val = Decimal(i) * (p0d - 1) * Decimal(2).ln() - p0d / r0d * Decimal(i).ln()
    if damp_n is not None:
        val -= p0d / r0d * Decimal(damp_n + 3).ln().ln()
    return val


def _ceil_a(i: int, p0, r0, damp_n=None) -> int:
    with localcontext() as ctx:
        ctx.prec = 60 + int(i * max(float(p0) - 1, 0) * 0.302) + 10
        x = _log_a(i, p0, r0, damp_n).exp()
        k = _ceil_dec(x)
    if damp_n is None:
        # settle near-integer values exactly: k-1 < a_i <= k
        P0, R0 = as_fraction(p0), as_fraction(r0)
        rhs = [(2, i * (P0 - 1)), (i, -P0 / R0)]
        c_hi = compare([(k, 1)], rhs)
        c_lo = compare([(max(k - 1, 1), 1)], rhs) if k > 1 else -1
        if c_hi is not None and c_hi < 0:
            k += 1
        elif c_lo is not None and c_lo >= 0 and k > 1:
            k -= 1
    return k


def _a_float_log(i: int, p0, r0, damp_n=None) -> float:
    with localcontext() as ctx:
        ctx.prec = 40
        return float(_log_a(i, p0, r0, damp_n))


def critical_index(p0, r0, damp_n=None) -> int:
    """Least i0 >= 0 with a_{i0+1} >= 1 and (a_i)_{i > i0} non-decreasing."""
    growth = (float(p0) - 1) * float(r0) / float(p0)
    tail_from = 1 + math.ceil(1.0 / (2.0 ** growth - 1.0)) if growth > 0 else None
    if tail_from is None:
        raise BadCase("a_i does not grow for p0 = 1")
    horizon = tail_from + 2
    logs = [_a_float_log(i, p0, r0, damp_n) for i in range(1, horizon + 2)]
    for i0 in range(0, horizon + 1):
        if logs[i0] < -1e-12:
            continue
        if all(logs[k] <= logs[k + 1] + 1e-15 for k in range(i0, horizon)):
            return i0
    return horizon


def _case1_sequence(p0, r0, n: int, damp_n=None) -> tuple:
    i0 = critical_index(p0, r0, damp_n)
    return tuple(1 if i <= i0 else _ceil_a(i, p0, r0, damp_n) for i in range(1, n + 1))


def _floor_root_log(i: int, r0, damp_n=None) -> int:
    """floor(i^{1/r0}) (times log(n+3)^{1/r0} when damped), exact when undamped and r0 is integral."""
    if damp_n is None and float(r0).is_integer():
        k = int(r0)
        x = int(round(i ** (1.0 / k)))
        while x ** k > i:
            x -= 1
        while (x + 1) ** k <= i:
            x += 1
        return x
    with localcontext() as ctx:
        ctx.prec = 50
        r0d = Decimal(repr(float(r0)))
        val = Decimal(i).ln()
        if damp_n is not None:
            val += Decimal(damp_n + 3).ln().ln()
        return int((val / r0d).exp().to_integral_value(rounding="ROUND_FLOOR"))


def thm1_sequences(case: str, p0, q0, r0, n: int, r_family=None) -> ComponentRecipe:
    """Sequence for the n-th component of the combined space of the given case.

    U1/V1: first type, m = ceil-regularised a_i (damped by log(n+3) for V1).
    U2:    first type, b_i = ceil(i^{p0} 2^{i(p0-1)}).
    V2:    diagonal family: the U1 recipe with r0 replaced by r^(n) (default r^(n) = n).
    U3/V3: first type for p = 1, c_i = floor(i^{1/r0}) (damped for V3, first entry pinned to 1).
    U4:    first type, d_i = i.
    V4:    diagonal family over the U3 recipe with r^(n) (default n).
    """
    if case not in CASES:
        raise BadCase(f"unknown case {case!r}")
    if not isinstance(n, int) or n < 1:
        raise BadCase(f"n must be a positive integer, got {n!r}")
    from .lorentz import AdmissibleTriple

    try:
        AdmissibleTriple(p0, q0, r0)
    except Exception as exc:
        raise BadCase(str(exc)) from None
    want = int(case[1])
    if _case_of(p0, r0) != want:
        raise BadCase(f"case {case} does not match (p0, r0) = ({p0}, {r0})")
    variant = case[0]
    r_n = float(r_family(n)) if r_family else float(max(n, 1))
    if want == 1:
        m = _case1_sequence(p0, r0, n, damp_n=n if variant == "V" else None)
        return ComponentRecipe(case, n, "first", m)
    if want == 2:
        if variant == "U":
            P0 = as_fraction(p0)
            m = []
            for i in range(1, n + 1):
                rhs = [(i, P0), (2, i * (P0 - 1))]
                est = int_estimate(log2_of(rhs))
                m.append(smallest_int(lambda k: _ge([(k, 1)], rhs), 1, est))
            return ComponentRecipe(case, n, "first", tuple(m))
        m = _case1_sequence(p0, r_n, n)
        return ComponentRecipe(case, n, "first", m, r_n)
    if want == 3:
        if variant == "U":
            m = tuple(_floor_root_log(i, r0) for i in range(1, n + 1))
        else:
            m = tuple(_floor_root_log(i, r0, damp_n=n) for i in range(1, n + 1))
            m = (1,) + tuple(max(1, x) for x in m[1:])
        return ComponentRecipe(case, n, "first-prime", m)
    if variant == "U":
        return ComponentRecipe(case, n, "first", tuple(range(1, n + 1)))
    m = tuple(_floor_root_log(i, r_n) for i in range(1, n + 1))
    return ComponentRecipe(case, n, "first-prime", m, r_n)


def build_component(recipe: ComponentRecipe) -> CellularSpace:
    if recipe.family == "first":
        return gen_first_type(list(recipe.m))
    return gen_first_type_prime(list(recipe.m))[0]
