"""Green engines: closed forms, Kelvin-limit oracles, collocation fits."""

import time

import numpy as np
import pytest

from robinlab.domains import Ball, Ellipsoid
from robinlab.engines import (
    BallEngine,
    CollocationEngine,
    CollocationSettings,
    HalfSpaceEngine,
    ball_green,
    ball_robin,
    collocation_fit,
    half_space_robin,
    kernel,
    make_engine,
    robin_derivative_jet,
)
from robinlab.errors import OutsideDomain, PoleOnBoundary, ResidualTooLarge
from robinlab.quadrature import sphere_rule
from robinlab.scaled import mean_value_check


def kelvin_limit_oracle(engine, p, radii=(1e-2, 1e-3, 1e-4)):
    """Lambda(p) as the shrinking-radius average of G - |z-p|^{2-2n}."""
    vals = []
    rule = sphere_rule(engine.n, 6, 6)
    for r in radii:
        pts = p + r * rule.points
        vals.append(float(np.mean(engine.green(pts) - kernel(pts - p))))
    return vals[-1]


def test_half_space_robin_values():
    coeffs = np.array([0, 1.0], complex)
    assert half_space_robin(coeffs, np.zeros(2)) == pytest.approx(-1.0)
    assert half_space_robin(coeffs, np.array([0, -0.5], complex)) == pytest.approx(-0.25)
    with pytest.raises(OutsideDomain):
        half_space_robin(coeffs, np.array([0, 1.0], complex))


def test_half_space_engine_reflection():
    eng = HalfSpaceEngine(None, np.array([0, -0.3], complex), np.array([0, 1.0], complex), -1.0)
    # G vanishes on the boundary plane 2 Re z2 = 1.
    zs = np.array([[0.3 - 0.2j, 0.5 + 0.7j], [1.1, 0.5 - 2.2j]], dtype=complex)
    assert np.max(np.abs(eng.green(zs))) < 1e-14
    assert eng.robin() == pytest.approx(-(1.0 / 1.6) ** 2)


def test_ball_green_vanishes_on_boundary(ball2, rng):
    p = np.array([0.1, 0.35 - 0.2j])
    x = rng.standard_normal((100, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    zs = x[:, 0::2] + 1j * x[:, 1::2]
    assert np.max(np.abs(ball_green(np.zeros(2), 1.0, p, zs))) < 1e-12


def test_ball_robin_against_kelvin_limit(ball2):
    eng0 = make_engine(ball2, np.zeros(2, complex))
    assert eng0.robin() == pytest.approx(-1.0)
    assert kelvin_limit_oracle(eng0, np.zeros(2, complex)) == pytest.approx(-1.0, abs=1e-7)
    p = np.array([0, 0.5], complex)
    eng = make_engine(ball2, p)
    assert eng.robin() == pytest.approx(-16.0 / 9.0, rel=1e-14)
    assert kelvin_limit_oracle(eng, p) == pytest.approx(-16.0 / 9.0, abs=1e-6)
    assert ball_robin(np.zeros(2), 1.0, p) == pytest.approx(-16.0 / 9.0)
    # Mean-value identity cross-check on the scaled family at the same pole.
    from robinlab.scaled import scaled_engine

    _, seng = scaled_engine(ball2, p)
    assert abs(mean_value_check(seng, 0.2)) < 1e-8


def test_pole_on_boundary_raises(ball2):
    with pytest.raises(PoleOnBoundary):
        make_engine(ball2, np.array([0, 1.0], complex))
    eng = make_engine(ball2, np.array([0, 0.2], complex))
    with pytest.raises(PoleOnBoundary):
        eng.robin_at(np.array([0, 1.01], complex))


def test_collocation_unit_ball_center_small_budget(ball2):
    # <= 400 collocation points and <= 200 sources reach 1e-6 in under 10 s.
    settings = CollocationSettings(node_cap=(8, 4, 6), source_cap=(5, 4, 5))
    t0 = time.time()
    eng = collocation_fit(ball2, np.zeros(2, complex), settings=settings)
    elapsed = time.time() - t0
    assert eng.report.n_nodes <= 400 and eng.report.n_sources <= 200
    assert abs(eng.robin() - (-1.0)) < 1e-6
    assert elapsed < 10.0


def test_collocation_unit_ball_offset_pole(ball2):
    eng = collocation_fit(ball2, np.array([0, 0.5], complex), settings=CollocationSettings(resolution=0.6))
    assert abs(eng.robin() - (-16.0 / 9.0)) < 1e-5
    assert eng.report.boundary_residual < 1e-4


def test_collocation_ellipsoid_negative_with_mean_value(ellipsoid):
    eng = collocation_fit(ellipsoid, np.zeros(2, complex), settings=CollocationSettings(resolution=0.7))
    lam0 = eng.robin()
    assert lam0 < 0
    # D(0) is the ellipsoid itself (psi(0) = -1), so the identity applies directly.
    assert abs(mean_value_check(eng, 0.2)) < 1e-5
    assert abs(mean_value_check(eng, 0.1)) < 1e-5  # shrink stability


def test_collocation_green_symmetry(ellipsoid):
    settings = CollocationSettings(resolution=0.7)
    p = np.array([0.1, 0.15], complex)
    q = np.array([-0.2, 0.05 + 0.1j])
    ep = collocation_fit(ellipsoid, p, settings=settings)
    eq = collocation_fit(ellipsoid, q, settings=settings)
    gap = abs(float(ep.green(q)) - float(eq.green(p)))
    assert gap < 5.0 * max(ep.report.boundary_residual, eq.report.boundary_residual)


def test_collocation_residual_tolerance_raises(ball2):
    settings = CollocationSettings(
        node_cap=(3, 2, 3),
        node_level=(2, 2, 2),
        node_far=(2, 2, 2),
        source_cap=(2, 2, 2),
        source_level=(2, 2, 2),
        source_far=(2, 2, 2),
        residual_tolerance=1e-14,
    )
    with pytest.raises((ResidualTooLarge,)):
        collocation_fit(ball2, np.array([0, 0.4], complex), settings=settings)


def test_collocation_report_serializes(ball2):
    eng = collocation_fit(ball2, np.array([0, 0.3], complex), settings=CollocationSettings(resolution=0.5))
    blob = eng.to_dict()
    assert blob["kind"] == "collocation"
    assert len(blob["weights"]) == blob["report"]["n_sources"]
    assert blob["report"]["boundary_residual"] > 0


def test_robin_derivative_jet_fd_vs_closed(ball2):
    p = np.array([0, 0.5], complex)
    closed = robin_derivative_jet(ball2, p, order=2)
    # Force the finite-difference path through a collocation engine.
    eng = collocation_fit(ball2, p, settings=CollocationSettings(resolution=0.8))
    fd = robin_derivative_jet(ball2, p, order=1, engine=eng, step_factor=0.006, refit_per_node=True)
    for kl in ((0, 0), (1, 0)):
        scale = max(1.0, float(np.max(np.abs(closed.tensor(*kl)))))
        assert np.max(np.abs(fd.tensor(*kl) - closed.tensor(*kl))) / scale < 1e-6, kl


def test_order0_jet_is_robin(ball2):
    p = np.array([0.1, 0.2 - 0.3j])
    eng = make_engine(ball2, p)
    jet = robin_derivative_jet(ball2, p, order=0, engine=eng)
    assert jet.value == pytest.approx(eng.robin(), rel=1e-14)


def test_green_positive_inside(ellipsoid, rng):
    eng = collocation_fit(ellipsoid, np.zeros(2, complex), settings=CollocationSettings(resolution=0.6))
    for _ in range(20):
        x = rng.standard_normal(4)
        x = 0.8 * x / np.linalg.norm(x) * rng.uniform(0.1, 1.0)
        z = np.array([x[0] + 1j * x[1], (x[2] + 1j * x[3]) / 2.0])
        if ellipsoid.value(z) < -0.05 and np.linalg.norm(z) > 1e-2:
            assert float(eng.green(z)) > 0
