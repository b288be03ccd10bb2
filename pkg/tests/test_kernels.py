"""The compiled loops and the numpy fallback must agree on every hot kernel."""
import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import oracle_lorentz, oracle_maximal
from lorentzmax import kernels
from lorentzmax.generators import gen_first_type, gen_first_type_prime, gen_second_type, synth_second_type
from lorentzmax.maximal import dense_ball_order, tables_for
from lorentzmax.opnorm import _free_tables
from lorentzmax.space import cell_weights_float, realize_dense


@pytest.mark.parametrize("m", [[1], [1, 2], [2, 2, 3]])
def test_dense_maximal_variants_agree(m, rng):
    dense = realize_dense(gen_first_type(m))
    order, is_end = dense_ball_order(dense)
    w = cell_weights_float(dense)
    F = rng.uniform(0.0, 1.0, (12, len(w)))
    a = kernels.dense_maximal_jit(order, is_end, w, F)
    b = kernels.dense_maximal_np(order, is_end, w, F)
    np.testing.assert_allclose(a, b, rtol=1e-14)
    np.testing.assert_allclose(a, oracle_maximal(np.asarray(dense.matrix), w, F), rtol=1e-13)


@given(st.integers(1, 20), st.sampled_from([(1.0, 1.0), (2.0, 1.0), (2.0, 3.0), (1.5, np.inf)]), st.integers(0, 2**32 - 1))
def test_lorentz_batch_variants_agree(n, pq, seed):
    r = np.random.default_rng(seed)
    V = r.uniform(0.0, 4.0, (5, n))
    V[r.uniform(size=V.shape) < 0.2] = 0.0
    Wt = r.uniform(0.1, 2.0, (5, n))
    p, q = pq
    a = kernels.lorentz_batch_jit(V, Wt, p, q)
    b = kernels.lorentz_batch_np(V, Wt, p, q)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    for k in range(5):
        assert a[k] == pytest.approx(oracle_lorentz(V[k], Wt[k], p, q), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("pr", [(2.0, 2.0), (1.5, 3.0), (2.0, np.inf)])
def test_dense_subset_ratio_variants_agree(pr):
    dense = realize_dense(gen_first_type([1, 2]))
    order, is_end = dense_ball_order(dense)
    w = cell_weights_float(dense)
    masks = np.arange(1, 1 << len(w), dtype=np.int64)
    a = kernels.dense_subset_ratios_jit(order, is_end, w, *pr, masks)
    b = kernels.dense_subset_ratios_np(order, is_end, w, *pr, masks)
    np.testing.assert_allclose(a, b, rtol=1e-13)


@pytest.mark.parametrize("space", [gen_first_type([1, 2, 2]), gen_first_type_prime([1, 1, 2])[0]])
def test_free_config_ratio_variants_agree(space):
    n, w, cell_ptr, full, self_full, den = _free_tables(space)
    G = np.array(list(itertools.product(*(range(c.count + 1) for c in space.cells)))[1:], dtype=np.float64)
    a = kernels.free_config_ratios_jit(G, n, w, cell_ptr, full, self_full, den, 2.0, 2.0)
    b = kernels.free_config_ratios_np(G, n, w, cell_ptr, full, self_full, den, 2.0, 2.0)
    np.testing.assert_allclose(a, b, rtol=1e-13)


@pytest.mark.parametrize("spread", [2, 200, 2000])
def test_xr_ball_max_variants_agree(spread, rng):
    tab = tables_for(gen_second_type(synth_second_type(2, 2, 2, 2)))
    fm = rng.uniform(1.0, 2.0, (16, tab.C))
    fm[rng.uniform(size=fm.shape) < 0.2] = 0.0
    fe = rng.integers(-spread, spread + 1, (16, tab.C)).astype(np.int64)
    args = (fm, fe, tab.glob_m, tab.glob_e, tab.cell_ptr, tab.ball_full, tab.ent_ptr, tab.ent_cell,
            tab.ent_m, tab.ent_e, tab.den_m, tab.den_e)
    am, ae, ab = kernels.xr_ball_max_jit(*args)
    bm, be, bb = kernels.xr_ball_max_np(*args)
    np.testing.assert_array_equal(ae[am > 0], be[bm > 0])
    np.testing.assert_allclose(am, bm, rtol=1e-14)
    np.testing.assert_array_equal(ab, bb)
