"""The family D(p): defining function f, k-quantities, variation formulas."""

import numpy as np
import pytest

from robinlab.domains import Ball, boundary_samples
from robinlab.engines import CollocationSettings
from robinlab.errors import BallNotContained, DegenerateGradient, PoleOnBoundary
from robinlab.quadrature import sphere_area
from robinlab.scaled import (
    ScaledDomain,
    mean_value_check,
    scaled_engine,
    scaled_robin_jet,
    unscale_jet,
    variation_first,
    variation_second,
)


def wirtinger_fd(f, p, gamma, h=1e-6):
    e = np.zeros(len(p), complex)
    e[gamma] = 1.0
    dx = (f(p + h * e) - f(p - h * e)) / (2 * h)
    dy = (f(p + 1j * h * e) - f(p - 1j * h * e)) / (2 * h)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def test_f_at_origin_is_minus_one(ellipsoid):
    sd = ScaledDomain(ellipsoid, np.array([0.1, 0.2 - 0.1j]))
    assert sd.f(np.zeros((1, 2), complex))[0] == pytest.approx(-1.0, abs=1e-14)


def test_f_vanishes_on_scaled_boundary(ellipsoid, rng):
    p = np.array([0.1, 0.3], complex)
    sd = ScaledDomain(ellipsoid, p)
    zs = boundary_samples(ellipsoid, 50, rng)
    w = (zs - p) / sd.s
    assert np.max(np.abs(sd.f(w))) < 1e-8


def test_f_matches_closed_identity(ellipsoid, perturbed_ball, rng):
    for domain in (ellipsoid, perturbed_ball):
        p = np.array([0.05, 0.25 - 0.1j])
        sd = ScaledDomain(domain, p)
        w = rng.standard_normal((12, 2)) + 1j * rng.standard_normal((12, 2))
        assert np.max(np.abs(sd.f(w) - sd.f_closed(w))) < 1e-10


def test_f_half_space_limit(ellipsoid):
    p0 = np.array([0, 0.5], complex)
    sd = ScaledDomain(ellipsoid, p0)
    assert sd.boundary_mode
    w = np.array([[0.3 - 0.1j, 0.2], [0.0, -1.0]], dtype=complex)
    expected = 2.0 * np.real(w @ ellipsoid.gradient(p0)) - 1.0
    assert np.max(np.abs(sd.f(w) - expected)) < 1e-13


def test_df_dp_against_fd(ellipsoid):
    p = np.array([0.1, 0.3 - 0.05j])
    sd = ScaledDomain(ellipsoid, p)
    w = np.array([[0.4 - 0.2j, 0.8 + 0.1j]])
    for gamma in (0, 1):
        val = sd.df_dp(w, gamma)[0]
        fd_holo, _ = wirtinger_fd(lambda q: sd.f(w, p=q)[0], p, gamma)
        assert val == pytest.approx(fd_holo, rel=1e-6, abs=1e-8)


def test_d2f_dwdpbar_against_fd(ellipsoid, perturbed_ball):
    for domain in (ellipsoid, perturbed_ball):
        p = np.array([0.1, 0.25], complex)
        sd = ScaledDomain(domain, p)
        w = np.array([[0.5 - 0.3j, 0.6 + 0.2j]])
        for gamma in (0, 1):
            val = sd.d2f_dwdpbar(w, gamma)[0]
            for alpha in (0, 1):
                _, fd_anti = wirtinger_fd(
                    lambda q: ScaledDomain(domain, q).grad_w(w)[0, alpha] if False else ScaledDomain(domain, q).grad_w(w)[0][alpha],
                    p,
                    gamma,
                    h=1e-5,
                )
                assert val[alpha] == pytest.approx(fd_anti, rel=1e-5, abs=1e-7)


def test_d2f_dpdpbar_against_fd_of_f(ellipsoid):
    p = np.array([0.15, 0.2 + 0.1j])
    sd = ScaledDomain(ellipsoid, p)
    w = np.array([[0.4, 0.5 - 0.2j]])
    for gamma in (0, 1):
        val = sd.d2f_dpdpbar(w, gamma)[0]
        # oracle: second mixed Wirtinger difference of f itself
        h = 1e-4
        e = np.zeros(2, complex)
        e[gamma] = 1.0

        def f_at(q):
            return sd.f(w, p=q)[0]

        lap = (
            f_at(p + h * e) + f_at(p - h * e) + f_at(p + 1j * h * e) + f_at(p - 1j * h * e) - 4 * f_at(p)
        ) / h**2
        assert val == pytest.approx(lap / 4.0, rel=5e-4, abs=1e-6)


def test_k1_degenerate_gradient_rejected(ball2):
    # Ball centered at the origin with p = 0: grad_w f(0) = conj(s*w) vanishes at w = 0.
    sd = ScaledDomain(ball2, np.zeros(2, complex))
    with pytest.raises(DegenerateGradient):
        sd.k1(np.zeros((1, 2), complex), 0)


def test_k_bounds_slopes(ellipsoid):
    # Prop 2.6 exponents: log-log slopes of max |k1|, |k2| over |w| shells.
    p = np.array([0, 0.5 - 0.01], complex)
    sd = ScaledDomain(ellipsoid, p)
    rule = sd.boundary_rule(radial_order=20, phase_order=10)
    k1 = np.abs(sd.k1(rule.nodes, 1))
    k2 = np.abs(sd.k2(rule.nodes, 1))
    r = rule.radii
    bins = np.geomspace(2.0, r.max() * 0.9, 8)
    rmid, m1, m2 = [], [], []
    for lo, hi in zip(bins[:-1], bins[1:]):
        sel = (r >= lo) & (r < hi)
        if np.sum(sel) < 3:
            continue
        rmid.append(np.sqrt(lo * hi))
        m1.append(k1[sel].max())
        m2.append(k2[sel].max())
    s1 = np.polyfit(np.log(rmid), np.log(m1), 1)[0]
    s2 = np.polyfit(np.log(rmid), np.log(m2), 1)[0]
    assert s1 <= 2.1
    assert s2 <= 3.1


def test_boundary_rule_integrates_sphere_area(ball2):
    # D(p) for the centered ball at p = 0 is the ball itself: area = sigma_4 R^3.
    sd = ScaledDomain(ball2, np.zeros(2, complex))
    rule = sd.boundary_rule(radial_order=16, phase_order=12)
    assert np.sum(rule.areas) == pytest.approx(sphere_area(4), rel=1e-8)


def test_mean_value_exact_engine(ball2):
    p = np.array([0.1, 0.4], complex)
    _, engine = scaled_engine(ball2, p)
    residuals = [abs(mean_value_check(engine, r)) for r in (0.1, 0.2, 0.3)]
    assert max(residuals) < 1e-8
    # shrink stability
    assert abs(mean_value_check(engine, 0.05)) < 1e-8
    with pytest.raises(BallNotContained):
        mean_value_check(engine, 10.0)


def test_scaled_jet_matches_unscaled_ball_jet(ball2):
    # Bookkeeping identity: D^{AB} of the D(p) Robin function at 0 equals
    # s^{2n-2+k+l} D^{AB} Lambda(p).
    from robinlab.engines import make_engine

    p = np.array([0.1, 0.5 - 0.2j])
    jet_scaled = scaled_robin_jet(ball2, p, order=3)
    jet_plain = make_engine(ball2, p).robin_jet(order=3)
    s = -float(ball2.value(p))
    back = unscale_jet(jet_scaled, s, 2)
    for kl in jet_plain.tensors:
        scale = max(1.0, np.max(np.abs(jet_plain.tensor(*kl))))
        assert np.max(np.abs(back.tensor(*kl) - jet_plain.tensor(*kl))) / scale < 1e-12, kl


def test_variation_first_ball_zero_by_symmetry(ball2):
    val = variation_first(ball2, np.zeros(2, complex), 1)
    assert abs(val) < 1e-10


def test_variation_first_ball_lambda_constant(ball2):
    # lambda is identically -1 on the unit ball, so every derivative vanishes.
    val = variation_first(ball2, np.array([0, 0.3], complex), 1)
    assert abs(val) < 1e-4


def test_variation_second_ball_lambda_constant(ball2):
    val, parts = variation_second(ball2, np.array([0, 0.3], complex), 1)
    # The two integrals are individually O(1) and cancel.
    assert abs(parts["k2_integral"]) > 0.1
    assert abs(val) < 2e-3


def test_variation_second_rejects_boundary_point(ball2):
    with pytest.raises(PoleOnBoundary):
        variation_second(ball2, np.array([0, 1.0], complex), 1)


@pytest.mark.slow
def test_variation_vs_fd_on_ellipsoid(ellipsoid):
    from robinlab.asymptotics import lambda_derivatives_fd

    p = np.array([0, 0.42], complex)
    settings = CollocationSettings(resolution=0.7)
    fd1, fd2 = lambda_derivatives_fd(ellipsoid, p, 1, settings=settings)
    var1 = variation_first(ellipsoid, p, 1)
    var2, _ = variation_second(ellipsoid, p, 1)
    assert np.real(fd1) == pytest.approx(var1, rel=2e-3)
    assert fd2 == pytest.approx(var2, rel=2e-3)
