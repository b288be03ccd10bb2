import dataclasses
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorentzmax.errors import BadCase, BadParams, BadSequence, UncertifiedPlan
from lorentzmax.generators import (
    build_component,
    critical_index,
    first_prime_heights,
    gen_first_type,
    gen_first_type_prime,
    gen_second_type,
    gen_second_type_prime,
    synth_and_gen_second_type_prime,
    synth_second_type,
    synth_second_type_prime,
    thm1_sequences,
    verify_first_prime,
    verify_second_type,
    verify_second_type_prime,
)
from lorentzmax.space import realize_dense, validate_space


def counts(space):
    return {c.id: c.count for c in space.cells}


# ---------------------------------------------------------------------------
# first type
# ---------------------------------------------------------------------------
def test_first_type_small():
    sp = gen_first_type([1, 1])
    assert sp.point_count == 3
    assert [float(c.weight) for c in sp.cells] == [1, 2, 4]
    assert float(sp.total_measure) == 7
    one = gen_first_type([1])
    assert one.point_count == 2 and [float(c.weight) for c in one.cells] == [1, 2]


@pytest.mark.parametrize("m", [[2, 1], [], [0], [1, 1.5]])
def test_first_type_rejects_bad_sequences(m):
    with pytest.raises(BadSequence):
        gen_first_type(m)


def test_first_prime_by_hand():
    sp, plan = gen_first_type_prime([1, 2])
    assert plan.h == (1, 3)
    assert counts(sp) == {"x0": 1, "A1": 2, "A2": 4, "B2": 4}
    assert sp.point_count == 11
    sp1, plan1 = gen_first_type_prime([1])
    assert plan1.h == (1,) and counts(sp1) == {"x0": 1, "A1": 2}


@pytest.mark.parametrize("m", [[2, 2], [1, 0], [1, 3, 2]])
def test_first_prime_rejects_bad_sequences(m):
    with pytest.raises(BadSequence):
        gen_first_type_prime(m)


@given(st.lists(st.integers(1, 6), min_size=1, max_size=6).map(lambda xs: [1] + sorted(xs)))
def test_first_prime_counts_and_condition(m):
    sp, plan = gen_first_type_prime(m)
    h = plan.h
    assert h == first_prime_heights(m)
    assert all(e.holds for e in verify_first_prime(m, h))
    for j, (mj, hj) in enumerate(zip(m, h), start=1):
        assert counts(sp)[f"A{j}"] == (1 << hj) // mj
        if j < len(m):
            assert (1 << h[j]) // m[j] > (1 << hj)
            # minimality of the next height
            assert (1 << (h[j] - 1)) // m[j] <= (1 << hj) or h[j] - 1 == hj


def test_first_prime_heights_fail_check_when_tampered():
    assert not all(e.holds for e in verify_first_prime((1, 2), (1, 2)))


# ---------------------------------------------------------------------------
# second type, r < inf
# ---------------------------------------------------------------------------
def test_second_type_plan_l2():
    plan = synth_second_type(2, 2, 2, 2)
    assert (plan.m, plan.h, plan.alpha, plan.beta) == ((1, 2), (1, 2), (4, 32), (4, 16))
    assert plan.certified


def test_second_type_plan_l1():
    plan = synth_second_type(2, 2, 2, 1)
    assert plan.m == (1,) and plan.h == (1,)
    assert plan.alpha[0] >= 2 and plan.beta == plan.alpha


def test_second_type_space_l2():
    sp = gen_second_type(synth_second_type(2, 2, 2, 2))
    assert counts(sp) == {"T1": 1, "T2": 2, "U1": 4, "U2": 32}
    assert sp.point_count == 39
    lower_mass = sum(float(c.mass) for c in sp.cells if "lower" in c.tags)
    assert all(float(c.weight) > lower_mass for c in sp.cells if "upper" in c.tags)
    assert validate_space(realize_dense(sp)).ok


def test_second_type_ball_counts():
    plan = synth_second_type(2, 2, 2, 2)
    sp = gen_second_type(plan)
    for i in range(2):
        ball = sp.profiles[f"T{i + 1}"].members[1]
        for k in range(i, 2):
            assert ball[f"U{k + 1}"] == plan.h[k] * plan.beta[k] // plan.h[i]
    for k in range(2):
        ball = sp.profiles[f"U{k + 1}"].members[1]
        assert all(ball[f"T{i + 1}"] == 1 for i in range(k + 1))


def test_second_type_l1_shape():
    plan = synth_second_type(2, 2, 2, 1)
    assert counts(gen_second_type(plan)) == {"T1": 1, "U1": plan.beta[0]}


@pytest.mark.parametrize("pqr", [(1, 1, 1), (2, 1, 2), (2, 3, 2), (2, 2, math.inf), (math.inf, 2, 2)])
def test_second_type_rejects_params(pqr):
    with pytest.raises(BadParams):
        synth_second_type(*pqr, 2)


def test_second_type_rejects_bad_length():
    with pytest.raises(BadParams):
        synth_second_type(2, 2, 2, 0)


@pytest.mark.parametrize("pqr", [(2, 2, 2), (1.5, 2, 3), (3, 2, 2), (2, 1.5, 4)])
@pytest.mark.parametrize("l", [1, 2, 3])
def test_second_type_certificates_and_growth(pqr, l):
    plan = synth_second_type(*pqr, l)
    assert plan.certified
    assert all(e.holds for e in verify_second_type(plan))
    for i in range(l - 1):
        assert plan.m[i + 1] >= 2 * plan.m[i] * plan.h[i]
        assert plan.alpha[i + 1] >= 2 * plan.alpha[i] * plan.beta[i]


def test_second_type_certificate_catches_tampering():
    plan = synth_second_type(2, 2, 2, 2)
    bad = dataclasses.replace(plan, beta=(4, 40), certificate=())
    assert not all(e.holds for e in verify_second_type(bad))
    with pytest.raises(UncertifiedPlan):
        gen_second_type(bad)


def test_second_type_generator_rejects_other_kind():
    with pytest.raises(UncertifiedPlan):
        gen_second_type(synth_second_type_prime(2, 2, 2))


# ---------------------------------------------------------------------------
# second type, r = inf
# ---------------------------------------------------------------------------
def test_second_type_prime_plan():
    plan = synth_second_type_prime(2, 2, 2)
    assert (plan.m, plan.h, plan.alpha_scalar, plan.beta) == ((1, 2), (1, 2), 8, (8, 4))
    assert plan.certified
    for j, (b, h) in enumerate(zip(plan.beta, plan.h), start=1):
        assert 1 <= b * h / plan.alpha_scalar <= 2


def test_second_type_prime_space():
    sp, plan = synth_and_gen_second_type_prime(2, 2, 2)
    assert counts(sp) == {"T1": 1, "T2": 2, "U1": 8, "U2": 8}
    assert [float(sp.cell(f"U{i}").weight) for i in (1, 2)] == [8.0, 16.0]
    assert validate_space(realize_dense(sp)).ok
    assert gen_second_type_prime(plan).point_count == sp.point_count


@pytest.mark.parametrize("pq", [(2, 1), (2, math.inf), (1, 2)])
def test_second_type_prime_rejects_params(pq):
    with pytest.raises(BadParams):
        synth_second_type_prime(*pq, 2)


@pytest.mark.parametrize("p", [1.5, 2, 3])
@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_second_type_prime_certificates(p, l):
    plan = synth_second_type_prime(p, 2, l)
    assert plan.certified and all(e.holds for e in verify_second_type_prime(plan))


def test_second_type_prime_catches_tampering():
    plan = synth_second_type_prime(2, 2, 2)
    bad = dataclasses.replace(plan, alpha_scalar=3, certificate=())
    assert not all(e.holds for e in verify_second_type_prime(bad))


# ---------------------------------------------------------------------------
# component sequences for the divergence cases
# ---------------------------------------------------------------------------
def test_case1_sequence():
    assert thm1_sequences("U1", 2, 1, 2, 5).m == (2, 2, 3, 4, 7)
    assert critical_index(2, 2) == 0


def test_case3_sequence():
    rec = thm1_sequences("U3", 1, 1, 2, 9)
    assert rec.m == (1, 1, 1, 2, 2, 2, 2, 2, 3)
    assert rec.family == "first-prime"


@pytest.mark.parametrize("n", [1, 4, 9, 30])
def test_case3_matches_integer_root(n):
    assert thm1_sequences("U3", 1, 1, 2, n).m == tuple(math.isqrt(i) for i in range(1, n + 1))


def test_damped_case3_starts_at_one():
    rec = thm1_sequences("V3", 1, 1, 2, 9)
    assert rec.m[0] == 1 and list(rec.m) == sorted(rec.m)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_case2_sequence(n):
    rec = thm1_sequences("U2", 2, 1, math.inf, n)
    assert rec.m == tuple(i * i * 2**i for i in range(1, n + 1))


def test_case4_sequence():
    assert thm1_sequences("U4", 1, 1, math.inf, 5).m == (1, 2, 3, 4, 5)


@pytest.mark.parametrize("case", ["U1", "V1", "U2", "V2", "U3", "V3", "U4", "V4"])
def test_every_case_builds_a_valid_component(case):
    p0 = 2 if case[1] in "12" else 1
    r0 = math.inf if case[1] in "24" else 2
    rec = thm1_sequences(case, p0, 1, r0, 4)
    sp = build_component(rec)
    assert validate_space(sp).ok
    assert list(rec.m) == sorted(rec.m)


@pytest.mark.parametrize(
    "args",
    [
        ("U1", 1, 1, 2, 5),  # case 1 needs p0 > 1
        ("U3", 2, 1, 2, 5),
        ("X9", 2, 1, 2, 5),
        ("U1", 2, 1, 2, 0),
        ("U1", 2, 3, 2, 5),  # q0 > r0
    ],
)
def test_bad_cases(args):
    with pytest.raises(BadCase):
        thm1_sequences(*args)


@given(st.sampled_from([1.5, 2, 3]), st.sampled_from([1.5, 2, 4, 8]), st.integers(1, 12))
def test_case1_sequence_is_non_decreasing(p0, r0, n):
    m = thm1_sequences("U1", p0, 1, r0, n).m
    assert all(x >= 1 for x in m) and list(m) == sorted(m)
