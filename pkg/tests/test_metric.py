"""Metric assembly, curvature, eta-form: against symbolic and closed oracles."""

import numpy as np
import pytest

from robinlab.domains import Ball, HalfSpaceDomain, TransformedDomain
from robinlab.engines import half_space_robin_jet, make_engine
from robinlab.errors import DegenerateMetric, SingularMetric, ZeroVector
from robinlab.jets import PotentialJet, all_orders_up_to
from robinlab.metric import (
    MetricTensor,
    curvature_decomposition,
    curvature_tensor,
    eta_form,
    metric_from_jet,
    psh_check,
    sectional_curvature,
)


def sympy_ball_metric(n, point):
    """Symbolic oracle: derivatives of -(2n-2) log(1 - |z|^2) via sympy."""
    sympy = pytest.importorskip("sympy")
    zs = sympy.symbols(f"z0:{n}")
    zbs = sympy.symbols(f"w0:{n}")  # placeholders for conjugates
    u = 1 - sum(z * w for z, w in zip(zs, zbs))
    pot = -(2 * n - 2) * sympy.log(u)
    subs = {}
    for z, w, val in zip(zs, zbs, point):
        subs[z] = val
        subs[w] = np.conj(val)
    g = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            expr = sympy.diff(pot, zs[a], zbs[b])
            g[a, b] = complex(expr.subs(subs))
    return g


@pytest.mark.parametrize("n", [2, 3])
def test_ball_metric_at_center(n):
    ball = Ball(n)
    jet = make_engine(ball, np.zeros(n, complex)).robin_jet(order=2)
    metric = metric_from_jet(jet)
    assert np.allclose(metric.g, (2 * n - 2) * np.eye(n), atol=1e-12)


def test_ball_metric_matches_symbolic_oracle(ball2):
    p = np.array([0.2 - 0.1j, 0.3 + 0.25j])
    metric = metric_from_jet(make_engine(ball2, p).robin_jet(order=2))
    oracle = sympy_ball_metric(2, p)
    assert np.max(np.abs(metric.g - oracle)) < 1e-10


def test_ball_metric_axis_closed_form(ball2):
    t = 0.55
    metric = metric_from_jet(make_engine(ball2, np.array([0, t], complex)).robin_jet(order=2))
    u = 1 - t * t
    assert metric.g[0, 0] == pytest.approx(2 / u, rel=1e-12)
    assert metric.g[1, 1] == pytest.approx(2 / u**2, rel=1e-12)
    assert abs(metric.g[0, 1]) < 1e-13


def test_half_space_metric_degenerate():
    jet = half_space_robin_jet(np.array([0, 1.0], complex), order=2)
    metric = metric_from_jet(jet)
    assert metric.g[1, 1] == pytest.approx(2.0)
    assert np.max(np.abs(metric.g - np.diag([0, 2.0]))) < 1e-13
    # positive semidefinite only; inverse-requiring operations reject it
    assert metric.min_eigenvalue() == pytest.approx(0.0, abs=1e-13)
    with pytest.raises((SingularMetric, DegenerateMetric)):
        sectional_curvature(
            MetricTensor(base_point=None, g=metric.g, dg=np.zeros((2, 2, 2), complex), ddg=np.zeros((2, 2, 2, 2), complex)),
            np.array([1, 0], complex),
        )


def test_metric_invariants(ball2, rng):
    p = np.array([0.3, -0.2 + 0.4j])
    metric = metric_from_jet(make_engine(ball2, p).robin_jet(order=4))
    assert metric.hermitian_defect() < 1e-12
    assert metric.min_eigenvalue() > 0
    assert np.max(np.abs(metric.g @ metric.g_inv - np.eye(2))) < 1e-10
    # Kahler symmetry of the first derivatives: d g_{a bbar}/dz_c = d g_{c bbar}/dz_a
    dg = metric.dg
    assert np.max(np.abs(dg - np.einsum("cab->acb", dg))) < 1e-9


def test_kahler_symmetries_of_curvature(ball2):
    p = np.array([0.25 - 0.15j, 0.1 + 0.3j])
    metric = metric_from_jet(make_engine(ball2, p).robin_jet(order=4))
    R = curvature_tensor(metric)
    # R_{a bbar c dbar} = R_{c bbar a dbar} and = conj(R_{b abar d cbar})
    assert np.max(np.abs(R - np.einsum("cbad->abcd", R))) < 1e-9
    assert np.max(np.abs(R - np.conj(np.einsum("badc->abcd", R)))) < 1e-9


@pytest.mark.parametrize("n,target", [(2, -1.0), (3, -0.5)])
def test_ball_constant_curvature(n, target, rng):
    ball = Ball(n)
    for _ in range(100):
        x = rng.standard_normal(2 * n)
        x *= rng.uniform(0.05, 0.9) / np.linalg.norm(x)
        p = x[0::2] + 1j * x[1::2]
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        metric = metric_from_jet(make_engine(ball, p).robin_jet(order=4))
        assert abs(sectional_curvature(metric, v) - target) < 1e-6


def test_sectional_curvature_homogeneous(ball2, rng):
    p = np.array([0.1, 0.4 - 0.2j])
    metric = metric_from_jet(make_engine(ball2, p).robin_jet(order=4))
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    r1 = sectional_curvature(metric, v)
    r2 = sectional_curvature(metric, 10.0 * v)
    assert r1 == pytest.approx(r2, abs=1e-12)
    with pytest.raises(ZeroVector):
        sectional_curvature(metric, np.zeros(2, complex))


def test_curvature_decomposition_matches_normal_direction(ball2):
    t = 0.8
    metric = metric_from_jet(make_engine(ball2, np.array([0, t], complex)).robin_jet(order=4))
    dec = curvature_decomposition(metric)
    u = 1 - t * t
    assert dec.first_term == pytest.approx(-3 + 2 * u, rel=1e-10)
    assert dec.second_term == pytest.approx(2 - 2 * u, rel=1e-10)
    assert dec.total == pytest.approx(sectional_curvature(metric, np.array([0, 1], complex)), rel=1e-10)


def test_translation_rotation_invariance(ball2, rng):
    # Metric of the transformed ball at the transformed point is the
    # U-conjugated metric.
    X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    U, _ = np.linalg.qr(X)
    shift = np.array([0.1, -0.2 + 0.1j])
    moved = TransformedDomain(ball2, U, shift)  # w = U(z - shift)
    p = np.array([0.3, 0.1 + 0.2j])
    w = moved.pushforward(p)
    g_orig = metric_from_jet(make_engine(ball2, p).robin_jet(order=2)).g
    g_moved = metric_from_jet(make_engine(moved, w).robin_jet(order=2)).g
    # dz = U^H dw: g_moved[a,b] = sum conj(U^H)... = (Uc g U^T)conj pattern
    expected = np.conj(U) @ g_orig @ U.T
    assert np.max(np.abs(g_moved - expected)) < 1e-10


def test_eta_ratio_ball_normal_and_tangential(ball2):
    # Boundary target 2(n-1) along the complex normal, 0 tangentially.
    z = np.array([0, 1 - 1e-3], complex)
    jet = make_engine(ball2, z).robin_jet(order=2)
    Q, _ = ball2.hessian(z)
    lam_data = (-1.0, np.zeros(2, complex), np.zeros((2, 2), complex))  # lambda = -1 on the unit ball
    rep_n = eta_form(jet, float(ball2.value(z)), ball2.gradient(z), Q, np.array([0, 1], complex), lam_data=lam_data)
    rep_t = eta_form(jet, float(ball2.value(z)), ball2.gradient(z), Q, np.array([1, 0], complex), lam_data=lam_data)
    assert abs(rep_n.ratio_direct - 2.0) < 5e-3
    assert rep_t.ratio_direct < 5e-3
    # the two routes agree
    assert rep_n.route_gap < 1e-8
    assert abs(rep_n.ratio_direct - rep_n.ratio_decomposed) < 1e-8
    # degree-0 homogeneity
    rep_scaled = eta_form(jet, float(ball2.value(z)), ball2.gradient(z), Q, 10 * np.array([0, 1], complex), lam_data=lam_data)
    assert rep_scaled.ratio_direct == pytest.approx(rep_n.ratio_direct, abs=1e-12)


def test_eta_ratio_n3_normal_limit():
    ball = Ball(3)
    z = np.array([0, 0, 1 - 1e-3], complex)
    jet = make_engine(ball, z).robin_jet(order=2)
    Q, _ = ball.hessian(z)
    lam_data = (-1.0, np.zeros(3, complex), np.zeros((3, 3), complex))
    rep = eta_form(jet, float(ball.value(z)), ball.gradient(z), Q, np.array([0, 0, 1], complex), lam_data=lam_data)
    assert abs(rep.ratio_direct - 4.0) < 2e-2  # 2(n-1) = 4


def test_route_consistency_metric_norm(ball2):
    # ds^2 via the lambda/psi expansion inside eta_form equals v^H g v.
    z = np.array([0.2, 0.5 - 0.1j])
    jet = make_engine(ball2, z).robin_jet(order=2)
    Q, _ = ball2.hessian(z)
    v = np.array([0.7 - 0.2j, -0.4 + 1.1j])
    metric = metric_from_jet(jet)
    rep = eta_form(jet, float(ball2.value(z)), ball2.gradient(z), Q, v, lam_data=(-1.0, np.zeros(2, complex), np.zeros((2, 2), complex)))
    ds2_direct = metric.norm_sq(v)
    ds2_dec = abs(rep.eta_decomposed) ** 2 / rep.ratio_decomposed
    assert ds2_dec == pytest.approx(ds2_direct, rel=1e-8)


def test_psh_check_reports(ball2, rng):
    metrics = []
    for _ in range(20):
        x = rng.standard_normal(4)
        x *= rng.uniform(0.05, 0.9) / np.linalg.norm(x)
        p = x[0::2] + 1j * x[1::2]
        metrics.append(metric_from_jet(make_engine(ball2, p).robin_jet(order=2)))
    rep = psh_check(metrics)
    assert rep.positive and rep.min_eigenvalue >= 2.0 - 1e-9  # min at the center is 2(1-r^2) scale

    half_jet = half_space_robin_jet(np.array([0, 1.0], complex), order=2)
    rep2 = psh_check([metric_from_jet(half_jet)])
    assert not rep2.positive or rep2.min_eigenvalue == pytest.approx(0.0, abs=1e-12)
