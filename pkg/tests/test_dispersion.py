import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlfkpp.dispersion import (StableEquilibriumError, TongueClosedError, atlas_lookup,
                               build_atlas, candidate_tongue, delta_extrema, delta_of, k_zero,
                               most_unstable_k, omega_membership, periodic_tw_bifurcation_check,
                               periodic_tw_residual, threshold, tongue_boundaries, turning_point,
                               w0, w1, w1_prime)
from oracles import frozen


def test_delta_examples():
    assert abs(delta_of(2 * math.pi)) < 1e-16
    assert delta_of(math.pi) == pytest.approx(-2 / math.pi**3, rel=1e-14)
    assert delta_of(frozen.DELTA_1_ARGMAX) == pytest.approx(frozen.DELTA_1, rel=1e-12)
    with pytest.raises(ValueError):
        delta_of(0.0)


def test_delta_zeros():
    X = 2 * math.pi * np.arange(1, 21)
    assert np.max(np.abs(delta_of(X))) < 1e-12


def test_extrema_against_oracle():
    ext = delta_extrema(5)
    assert ext[0][0] == pytest.approx(frozen.DELTA_1_ARGMAX, rel=1e-13)
    assert ext[0][1] == pytest.approx(frozen.DELTA_1, rel=1e-12)
    assert ext[8][1] == pytest.approx(frozen.DELTA_5, rel=1e-11)
    assert 2 * math.pi < ext[0][0] < 4 * math.pi


def test_threshold_three_figure_value():
    assert abs(threshold(1) - 0.00297) < 2e-5


def test_large_n_turning_points():
    for n in range(10, 30):
        d = turning_point(n)
        assert 2 * n * math.pi < d < 2 * (n + 1) * math.pi
        assert abs(d / ((2 * n + 1) * math.pi) - 1) < 0.01


def test_delta_r_asymptote():
    assert threshold(5) == pytest.approx(2 / (math.pi**3 * 19**3), rel=0.05)


def test_thresholds_strictly_decrease():
    d = [threshold(i) for i in range(1, 11)]
    assert all(a > b for a, b in zip(d, d[1:]))


def test_growth_relations():
    assert w0(0.0, 0.1) == -1.0
    assert w1(1e-9, 0.01) == pytest.approx(1.0, rel=1e-12)
    assert w1(0.0, 0.01) == 1.0
    assert abs(w1(frozen.DELTA_1_ARGMAX, frozen.DELTA_1)) < 1e-14


@given(st.floats(1e-6, 50), st.floats(1e-6, 1))
def test_relations_even(k, D):
    assert w0(k, D) == w0(-k, D)
    assert w1(k, D) == pytest.approx(w1(-k, D), rel=1e-15, abs=1e-15)


@given(st.floats(1e-8, 1e-4))
def test_w1_series_matches_direct(k):
    D = 0.01
    direct = D * k * k + 2 * math.sin(k / 2) / k
    assert w1(k, D) == pytest.approx(direct, rel=1e-14)


def test_k_zero():
    k0 = k_zero()
    assert k0 == pytest.approx(frozen.K_ZERO, rel=1e-14)
    assert 2 * math.pi < k0 < 3 * math.pi
    assert abs(math.tan(k0 / 2) - k0 / 2) < 1e-10


def test_most_unstable_k():
    km, w = most_unstable_k(0.002)
    assert km == pytest.approx(frozen.K_M_D0002, rel=1e-12)
    assert w == pytest.approx(frozen.W1_K_M_D0002, rel=1e-11)
    assert most_unstable_k(1e-12)[0] == pytest.approx(k_zero(), rel=1e-6)
    assert most_unstable_k(threshold(1) * (1 - 1e-10))[0] == pytest.approx(turning_point(1), rel=1e-4)
    with pytest.raises(StableEquilibriumError):
        most_unstable_k(0.004)


@given(st.floats(1e-7, 0.999))
def test_most_unstable_is_stationary_and_negative(frac):
    D = frac * threshold(1)
    km, w = most_unstable_k(D)
    assert w < 0
    assert abs(w1_prime(km, D)) < 1e-9


@given(st.floats(1.001, 100))
def test_stable_above_threshold(ratio):
    D = ratio * threshold(1)
    k = np.linspace(1e-3, 60, 20000)
    assert np.min(w1(k, D)) > 0


def test_tongue_boundaries():
    assert tongue_boundaries(1, 0.0) == (0.5, 1.0)
    assert tongue_boundaries(3, 0.0) == (1 / 6, 1 / 5)
    lm, lp = tongue_boundaries(1, 0.001)
    assert (lm, lp) == pytest.approx(frozen.TONGUE1_D0001, rel=1e-12)
    assert 0.5 < lm < 2 * math.pi / turning_point(1) < lp < 1
    lm, lp = tongue_boundaries(1, threshold(1) * (1 - 1e-10))
    mid = 2 * math.pi / turning_point(1)
    assert abs(lm - mid) < 1e-3 and abs(lp - mid) < 1e-3
    with pytest.raises(TongueClosedError):
        tongue_boundaries(1, 0.003)


def test_membership():
    assert omega_membership(0.75, 1e-4).tongue_index == 1
    assert omega_membership(0.75, 0.01).tongue_index is None
    lm, lp = frozen.TONGUE2_D1EM4
    expect = 2 if lm < 0.35 < lp else None
    assert omega_membership(0.35, 1e-4).tongue_index == expect
    assert candidate_tongue(1.5) is None


def test_atlas_invariants():
    atlas = build_atlas(3, n_D=50)
    for i in (1, 2, 3):
        c = atlas.curves[i]
        assert np.all(np.diff(c[:, 0]) > 0)
        assert np.all(c[:, 0] < atlas.thresholds[i])
        mid = 2 * math.pi / atlas.argmax[i]
        assert np.all(1 / (2 * i) <= c[:, 1]) and np.all(c[:, 1] < mid)
        assert np.all(mid < c[:, 2]) and np.all(c[:, 2] <= 1 / (2 * i - 1))
        assert np.all(np.diff(c[:, 1]) > 0)
        assert np.all(np.diff(c[:, 2]) < 0)
    assert atlas.thresholds[2] < atlas.thresholds[1]
    lm, lp = atlas_lookup(atlas, 1, 0.001)
    assert (lm, lp) == pytest.approx(tongue_boundaries(1, 0.001), rel=1e-4)


def test_periodic_tw_has_no_moving_bifurcation():
    lam = np.linspace(0.1, 2, 120)
    v = np.concatenate([np.linspace(-1, -1e-3, 40), np.linspace(1e-3, 1, 40)])
    assert periodic_tw_bifurcation_check(0.001, lam, v) == []
    assert abs(periodic_tw_residual(0.001, 0.8, 0.1).imag) == pytest.approx(2 * math.pi * 0.1 * 0.8)
    lm, _ = tongue_boundaries(1, 0.001)
    assert abs(periodic_tw_residual(0.001, lm, 0.0)) < 1e-12
