import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lorentzmax.combiner import combine
from lorentzmax.generators import (
    gen_first_type,
    gen_first_type_prime,
    gen_second_type,
    gen_second_type_prime,
    synth_second_type,
    synth_second_type_prime,
)
from lorentzmax.lorentz import CellFunction

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# small spaces of every family
# ---------------------------------------------------------------------------
def first_sequences(max_len=4, max_entry=4):
    for l in range(1, max_len + 1):
        yield from itertools.combinations_with_replacement(range(1, max_entry + 1), l)


def family_spaces():
    """(name, space) pairs: the small generator outputs used by the oracle checks."""
    out = [(f"S{m}", gen_first_type(list(m))) for m in first_sequences()]
    for k in (1, 2, 3):
        m = (1, 1, 2)[:k]
        out.append((f"S'{m}", gen_first_type_prime(list(m))[0]))
    for l in (1, 2):
        out.append((f"T l={l}", gen_second_type(synth_second_type(2, 2, 2, l))))
        out.append((f"T' l={l}", gen_second_type_prime(synth_second_type_prime(2, 2, l))))
    return out


def combined_spaces():
    parts = [
        gen_first_type([1]),
        gen_first_type_prime([1, 1])[0],
        gen_second_type(synth_second_type(2, 2, 2, 1)),
    ]
    out = [(f"combined {k}", combine(parts[:k])) for k in (1, 2, 3)]
    out.append(("combined S(1),S(1,1)", combine([gen_first_type([1]), gen_first_type([1, 1])])))
    return out


# ---------------------------------------------------------------------------
# independent float oracles on dense spaces
# ---------------------------------------------------------------------------
def oracle_maximal(D, w, F):
    """Largest ball average for each point, straight from the distance matrix."""
    F = np.atleast_2d(F)
    out = np.zeros_like(F, dtype=float)
    for x in range(D.shape[0]):
        for rad in np.unique(D[x]):
            inside = D[x] <= rad
            avg = (F[:, inside] * w[inside]).sum(axis=1) / w[inside].sum()
            out[:, x] = np.maximum(out[:, x], avg)
    return out


def oracle_lorentz(values, masses, p, q):
    """||f||_{p,q} from the rearrangement integral, one term per point."""
    v = np.asarray(values, dtype=float)
    m = np.asarray(masses, dtype=float)
    keep = v > 0
    v, m = v[keep], m[keep]
    if v.size == 0:
        return 0.0
    order = np.argsort(-v, kind="stable")
    v, m = v[order], m[order]
    W = np.cumsum(m)
    if math.isinf(q):
        return float(np.max(v * W ** (1 / p)))
    a = q / p
    prev = np.concatenate(([0.0], W[:-1]))
    frac = np.where(prev > 0, -np.expm1(a * np.log(np.where(prev > 0, prev, 1.0) / W)), 1.0)
    total = np.sum(v**q * W**a * frac)
    return float((p / q * total) ** (1 / q))


def random_cell_functions(space, n, rng, zeros=0.2, spread=20):
    ids = space.cell_ids
    out = []
    for _ in range(n):
        vals = rng.uniform(1.0, 2.0, len(ids)) * 2.0 ** rng.integers(-spread, spread + 1, len(ids))
        vals[rng.uniform(size=len(ids)) < zeros] = 0.0
        if not vals.any():
            vals[0] = 1.0
        out.append(CellFunction.from_floats(dict(zip(ids, vals))))
    return out


def lift(dense, f):
    """Point values of a cell function on the dense realization."""
    return np.array([float(f[c]) for c in dense.meta["cell_of"]])


def rel(a, b):
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
