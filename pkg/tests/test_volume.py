import math

import numpy as np
import pytest

from qflab.forms import build_form
from qflab.volume import (check_lemma82, delta_error, ellipsoid_volume,
                          euclidean_functional, indefinite_limit_formula,
                          indefinite_volume_mc, m0_functional,
                          mc_ellipsoid_volume, sup_norm_functional,
                          weighted_sup_functional)

Q3 = build_form([[1, 0, 0], [0, -1, 0], [0, 0, -1]], normalize=False)
HAND_LIMIT = 2 * math.pi * 0.2  # hand evaluation for Q3, I0=[0,1], I=[-0.1,0.1]


def test_ellipsoid_volume_examples(identity2):
    assert ellipsoid_volume(identity2, 1.0) == pytest.approx(math.pi)
    D = build_form([[4, 0], [0, 9]], normalize=False)
    assert ellipsoid_volume(D, 1.0) == pytest.approx(math.pi / 6)
    # scaling s^{d/2}
    for s in (0.5, 2.0, 9.0):
        assert (ellipsoid_volume(identity2, s) / ellipsoid_volume(identity2, 1.0)
                == pytest.approx(s))


def test_ellipsoid_volume_rejects_indefinite(hyperbolic2):
    with pytest.raises(ValueError, match="not elliptic"):
        ellipsoid_volume(hyperbolic2, 1.0)


def test_delta_error_examples(identity2):
    assert delta_error(identity2, [0, 0], 25.0) == pytest.approx(
        abs(81 - 25 * math.pi) / (25 * math.pi))
    one = build_form([[1]])
    assert delta_error(one, [0.0], 1.0) == pytest.approx(0.5)
    # invariance under integer shifts
    assert delta_error(identity2, [0.3, -1.7], 30.0) == pytest.approx(
        delta_error(identity2, [0.3, 0.3], 30.0))


def test_volume_mc_cross_check():
    rng = np.random.default_rng(2)
    for i in range(10):
        d = int(rng.integers(2, 6))
        A = rng.normal(size=(d, d))
        form = build_form(A @ A.T + np.eye(d), normalize=True)
        s = float(rng.uniform(4, 30))
        est = mc_ellipsoid_volume(form, s, samples=200000, seed=100 + i)
        assert est.within(ellipsoid_volume(form, s), n_sigma=3.5)


def test_limit_formula_hand_value():
    M = sup_norm_functional()
    lim = indefinite_limit_formula(Q3, M, (0.0, 1.0), (-0.1, 0.1),
                                   samples=20000, seed=1)
    assert abs(lim.mean - HAND_LIMIT) <= max(3 * lim.stderr, 1e-3)


def test_limit_formula_linear_in_interval():
    M = sup_norm_functional()
    a = indefinite_limit_formula(Q3, M, (0.0, 1.0), (-0.1, 0.1),
                                 samples=5000, seed=3)
    b = indefinite_limit_formula(Q3, M, (0.0, 1.0), (-0.2, 0.2),
                                 samples=5000, seed=3)
    assert b.mean == pytest.approx(2 * a.mean, rel=1e-9)


def test_limit_formula_det_scaling():
    M = sup_norm_functional()
    base = indefinite_limit_formula(Q3, M, (0.0, 1.0), (-0.1, 0.1),
                                    samples=20000, seed=4)
    scaled_form = build_form(4.0 * Q3.matrix, normalize=False)
    # I scales with the form so the indicator geometry is unchanged
    scaled = indefinite_limit_formula(scaled_form, M, (0.0, 1.0),
                                      (-0.4, 0.4), samples=20000, seed=4)
    # det factor 2^{-d} = 1/8, interval factor 4, M0 rescales u by 2:
    # overall u-substitution gives ratio (beta-alpha)*|det|^{-1/2}*2^{d-2}
    assert scaled.mean == pytest.approx(base.mean, rel=0.05)


def test_limit_formula_rejects_definite(identity2):
    with pytest.raises(ValueError, match="not indefinite"):
        indefinite_limit_formula(identity2, sup_norm_functional(),
                                 (0.0, 1.0), (-0.1, 0.1), samples=2000)


def test_mc_volume_null_interval():
    M = sup_norm_functional()
    est = indefinite_volume_mc(Q3, [0, 0, 0], M, 8.0, (0.0, 1.0), (0.1, 0.1),
                               samples=2000, seed=0)
    assert est.mean == 0.0 and est.stderr == 0.0


def test_mc_stderr_scaling():
    M = sup_norm_functional()
    e1 = indefinite_volume_mc(Q3, [0, 0, 0], M, 16.0, (0.0, 1.0), (-0.5, 0.5),
                              samples=10 ** 5, seed=5)
    e2 = indefinite_volume_mc(Q3, [0, 0, 0], M, 16.0, (0.0, 1.0), (-0.5, 0.5),
                              samples=2 * 10 ** 5, seed=6)
    assert e2.stderr == pytest.approx(e1.stderr / math.sqrt(2), rel=0.2)


def test_r_convergence_to_limit():
    M = sup_norm_functional()
    lim = indefinite_limit_formula(Q3, M, (0.0, 1.0), (-0.1, 0.1),
                                   samples=50000, seed=7)
    for R in (8.0, 16.0, 32.0, 64.0):
        mc = indefinite_volume_mc(Q3, [0, 0, 0], M, R, (0.0, 1.0),
                                  (-0.1, 0.1), samples=4 * 10 ** 6, seed=8)
        if R == 64.0:
            scaled = mc.mean / R
            sig = math.hypot(mc.stderr / R, lim.stderr)
            assert abs(scaled - lim.mean) <= 3 * sig


def test_lemma82_envelopes():
    rep = check_lemma82(Q3, [0, 0, 0], 32.0, 1.0, (-0.1, 0.1),
                        samples=200000, seed=9)
    assert rep["ratio_upper"] > 0 and math.isfinite(rep["ratio_upper"])
    assert rep["ratio_lower"] is not None and rep["ratio_lower"] > 0
    assert rep["sigma"] == pytest.approx(1.0)  # a = 0: sigma = lambda/m
    # lambda = 0 degenerates everything to zero
    rep0 = check_lemma82(Q3, [0, 0, 0], 32.0, 0.0, (-0.1, 0.1),
                         samples=2000, seed=10)
    assert rep0["volume"].mean == 0.0 and rep0["upper_envelope"] == 0.0


def test_minkowski_sandwich_all_builtins():
    rng = np.random.default_rng(11)
    d = 4
    A = rng.normal(size=(d, d))
    form = build_form(A @ A.T - 3 * np.eye(d), normalize=True)
    if not form.is_indefinite:
        form = build_form(np.diag([1.0, 2.0, -1.0, -2.0]), normalize=True)
    q = form.q
    for M in (sup_norm_functional(), euclidean_functional(d),
              weighted_sup_functional([1.0, 1.5, 2.0, 1.2])):
        m0, _, _ = m0_functional(form, M)
        X = rng.normal(size=(10 ** 4, d))
        vals = m0(X)
        norms = np.linalg.norm(X, axis=1)
        assert np.all(vals >= norms / math.sqrt(d * q) * (1 - 1e-9))
        assert np.all(vals <= M.sandwich_m * norms * (1 + 1e-9))
        # homogeneity of the raw functional
        t = 3.7
        assert np.allclose(M(t * X), t * M(X), rtol=1e-9)
