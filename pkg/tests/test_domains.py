"""Domain geometry: projections, frames, splitting, Levi forms."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robinlab.domains import (
    Ball,
    Ellipsoid,
    HalfSpaceDomain,
    PerturbedBall,
    TransformedDomain,
    boundary_samples,
    domain_from_config,
    levi_form,
    nearest_boundary_point,
    ray_level_crossing,
    split_normal_tangential,
    strong_psc_check,
)
from robinlab.errors import NotStronglyPseudoconvex, OutsideCollar
from robinlab.wirtinger import to_complex, to_real


def fd_gradient(domain, z, h=1e-6):
    """Central differences of psi in the real coordinates, as a Wirtinger gradient."""
    x = to_real(z)
    out = np.zeros(2 * domain.n)
    for k in range(2 * domain.n):
        e = np.zeros_like(x)
        e[k] = h
        out[k] = (domain.value(to_complex(x + e)) - domain.value(to_complex(x - e))) / (2 * h)
    return (out[0::2] - 1j * out[1::2]) / 2.0


def fd_levi(domain, z, v, h=1e-5):
    """Levi form via second differences: L = (D^2_v psi + D^2_{iv} psi)/4."""

    def second(w):
        return (domain.value(z + h * w) - 2 * domain.value(z) + domain.value(z - h * w)) / h**2

    return (second(v) + second(1j * v)) / 4.0


def test_ball_projection_radial_axis(ball2):
    frame = nearest_boundary_point(ball2, np.array([0, 0.5], complex))
    assert np.allclose(frame.base, [0, 1.0], atol=1e-12)
    assert frame.delta == pytest.approx(0.5, abs=1e-12)


def test_ball_projection_radial_generic(ball2):
    frame = nearest_boundary_point(ball2, np.array([0.3, 0.4], complex))
    assert np.allclose(frame.base, [0.6, 0.8], atol=1e-10)
    assert frame.delta == pytest.approx(0.5, abs=1e-10)


def test_ellipsoid_projection_against_dense_sampling(ellipsoid, rng):
    z = np.array([0, 0.49], complex)
    frame = nearest_boundary_point(ellipsoid, z)
    assert abs(ellipsoid.value(frame.base)) < 1e-10
    # (z - pi) parallel to the real gradient at pi.
    d = to_real(z) - to_real(frame.base)
    g = ellipsoid.real_grad(frame.base)
    cross = d / np.linalg.norm(d) + g / np.linalg.norm(g)  # inward vs outward
    assert np.linalg.norm(cross) < 1e-8
    brute = boundary_samples(ellipsoid, 4000, rng)
    assert frame.delta <= np.min(np.linalg.norm(brute - z, axis=1)) + 1e-4


def test_projection_idempotent_on_boundary(ball2):
    frame = nearest_boundary_point(ball2, np.array([0.6, 0.8], complex))
    again = nearest_boundary_point(ball2, frame.base)
    assert again.delta == 0.0
    assert np.allclose(again.base, frame.base)


def test_projection_outside_collar_raises():
    narrow = Ball(2, collar=0.2)
    with pytest.raises(OutsideCollar):
        nearest_boundary_point(narrow, np.array([0, 0.1], complex))
    frame = nearest_boundary_point(narrow, np.array([0, 0.1], complex), best_effort=True)
    assert frame.delta == pytest.approx(0.9, abs=1e-9)


def test_frame_invariants(ellipsoid):
    z = np.array([0.05, 0.45], complex)
    frame = nearest_boundary_point(ellipsoid, z)
    assert abs(ellipsoid.value(frame.base)) < 1e-10
    assert np.allclose(frame.reconstruct_point(), z, atol=1e-8)
    U = frame.rotation
    assert np.max(np.abs(U @ U.conj().T - np.eye(2))) < 1e-12
    assert np.allclose(U @ frame.unit_complex_normal, [0, 1], atol=1e-12)


def test_collar_distance_property(ellipsoid, rng):
    z = np.array([0.05, 0.46], complex)
    frame = nearest_boundary_point(ellipsoid, z)
    samples = boundary_samples(ellipsoid, 200, rng)
    assert np.all(frame.delta <= np.linalg.norm(samples - z, axis=1) + 1e-12)


def test_split_ball_axis(ball2):
    frame = nearest_boundary_point(ball2, np.array([0, 0.5], complex))
    v_H, v_N = split_normal_tangential(frame, np.array([1.0, 1.0], complex))
    assert np.allclose(v_H, [1, 0]) and np.allclose(v_N, [0, 1])


def test_split_normal_is_identity(ellipsoid):
    frame = nearest_boundary_point(ellipsoid, np.array([0.1, 0.45], complex))
    v_H, v_N = split_normal_tangential(frame, frame.unit_complex_normal)
    assert np.linalg.norm(v_H) < 1e-14
    assert np.allclose(v_N, frame.unit_complex_normal)


def test_split_recombines_and_orthogonal(ellipsoid):
    frame = nearest_boundary_point(ellipsoid, np.array([0.1, 0.45], complex))
    v = np.array([1.0, 0.0], complex)
    v_H, v_N = split_normal_tangential(frame, v)
    assert np.allclose(v_H + v_N, v, atol=1e-14)
    pairing = np.sum(v_H * ellipsoid.gradient(frame.base))
    assert abs(pairing) < 1e-12


@settings(max_examples=25, deadline=None)
@given(
    re1=st.floats(-2, 2),
    im1=st.floats(-2, 2),
    re2=st.floats(-2, 2),
    im2=st.floats(-2, 2),
    scale_re=st.floats(-3, 3),
    scale_im=st.floats(-3, 3),
)
def test_split_is_complex_linear_projection(re1, im1, re2, im2, scale_re, scale_im):
    ball = Ball(2)
    frame = nearest_boundary_point(ball, np.array([0.3, 0.4], complex))
    v = np.array([re1 + 1j * im1, re2 + 1j * im2])
    c = scale_re + 1j * scale_im
    v_H, v_N = split_normal_tangential(frame, v)
    # idempotent
    again_H, again_N = split_normal_tangential(frame, v_H)
    assert np.allclose(again_H, v_H, atol=1e-12) and np.linalg.norm(again_N) < 1e-12
    # complex-linear
    w_H, w_N = split_normal_tangential(frame, c * v)
    assert np.allclose(w_H, c * v_H, atol=1e-10) and np.allclose(w_N, c * v_N, atol=1e-10)


def test_levi_form_values(ball2, ellipsoid, rng):
    assert levi_form(ball2, np.array([0.2, 0.1], complex), np.array([1, 0], complex)) == pytest.approx(1.0)
    assert levi_form(ellipsoid, np.array([0.1, 0.2], complex), np.array([0, 1], complex)) == pytest.approx(4.0)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    z = np.array([0.1, 0.3], complex)
    assert levi_form(ball2, z, v) == pytest.approx(float(np.sum(np.abs(v) ** 2)), rel=1e-10)
    assert levi_form(ball2, z, v) == pytest.approx(fd_levi(ball2, z, v), rel=1e-6)


def test_strong_psc_reports(ball2, ellipsoid):
    rep = strong_psc_check(ball2, samples=50)
    assert rep.ok and rep.min_levi == pytest.approx(1.0, rel=1e-8)
    rep = strong_psc_check(ellipsoid, samples=80)
    assert rep.ok and rep.min_levi >= 1.0 - 1e-8
    half = HalfSpaceDomain([0, 1.0])
    rep = strong_psc_check(half)
    assert not rep.ok and rep.min_levi == 0.0
    with pytest.raises(NotStronglyPseudoconvex):
        strong_psc_check(half, strict=True)


def test_frame_rotation_preserves_norms(ellipsoid, rng):
    frame = nearest_boundary_point(ellipsoid, np.array([0.1, 0.45], complex))
    for _ in range(5):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert np.linalg.norm(frame.rotation @ v) == pytest.approx(np.linalg.norm(v), rel=1e-12)


@pytest.mark.parametrize("name", ["ball", "ellipsoid", "perturbed"])
def test_gradient_hessian_match_fd(name, ball2, ellipsoid, perturbed_ball, rng):
    domain = {"ball": ball2, "ellipsoid": ellipsoid, "perturbed": perturbed_ball}[name]
    z = np.array([0.21 + 0.08j, 0.33 - 0.12j])
    g = domain.gradient(z)
    g_fd = fd_gradient(domain, z)
    assert np.max(np.abs(g - g_fd)) < 1e-8 * max(1.0, np.max(np.abs(g)))
    # Hessian blocks against FD of the analytic gradient.
    h = 1e-6
    Q, P = domain.hessian(z)
    for b in range(2):
        e = np.zeros(2, complex)
        e[b] = h
        col_holo = (domain.gradient(z + e) - domain.gradient(z - e)) / (2 * h)
        col_anti = (domain.gradient(z + 1j * e) - domain.gradient(z - 1j * e)) / (2 * h)
        dzb = 0.5 * (col_holo - 1j * col_anti)  # d/dz_b of psi_a
        dzbarb = 0.5 * (col_holo + 1j * col_anti)
        assert np.max(np.abs(P[:, b] - dzb)) < 1e-7
        assert np.max(np.abs(Q[:, b] - dzbarb)) < 1e-7


def test_transformed_domain_consistency(ellipsoid, rng):
    frame = nearest_boundary_point(ellipsoid, np.array([0.1, 0.45], complex))
    from robinlab.domains import normalized_frame_domain

    fdom = normalized_frame_domain(ellipsoid, frame)
    # boundary point at the origin with unit gradient along e_n
    assert abs(fdom.value(np.zeros(2, complex))) < 1e-12
    g0 = fdom.gradient(np.zeros(2, complex))
    assert np.allclose(g0, [0, 1], atol=1e-10)
    w = np.array([0.05 - 0.02j, -0.03j])
    assert fdom.value(w) == pytest.approx(
        ellipsoid.value(fdom.pullback(w)) / np.linalg.norm(ellipsoid.gradient(frame.base)), rel=1e-12
    )
    assert np.max(np.abs(fdom.gradient(w) - fd_gradient(fdom, w))) < 1e-7


def test_transformed_ball_stays_exact_ball(ball2):
    frame = nearest_boundary_point(ball2, np.array([0, 0.9], complex))
    from robinlab.domains import normalized_frame_domain

    fdom = normalized_frame_domain(ball2, frame)
    kind = fdom.exact_kind()
    assert kind["kind"] == "ball"
    assert kind["radius"] == pytest.approx(1.0)
    assert np.linalg.norm(kind["center"]) == pytest.approx(1.0, abs=1e-12)


def test_ray_level_crossing(ellipsoid, rng):
    dirs = rng.standard_normal((20, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rho = ray_level_crossing(ellipsoid, np.zeros(2, complex), to_complex(dirs))
    pts = rho[:, None] * to_complex(dirs)
    assert np.max(np.abs(ellipsoid.value(pts))) < 1e-12


def test_domain_from_config_round_trip():
    ball = domain_from_config({"kind": "ball", "n": 3, "radius": 2.0})
    assert isinstance(ball, Ball) and ball.n == 3
    ell = domain_from_config({"kind": "ellipsoid", "weights": [1, 4]})
    assert isinstance(ell, Ellipsoid)
    pb = domain_from_config({"kind": "perturbed_ball", "n": 2, "terms": [{"coef": [0.05, 0.0], "exponent": [1, 1]}]})
    assert isinstance(pb, PerturbedBall)
    hs = domain_from_config({"kind": "half_space", "coeffs": [[0.0, 0.0], [1.0, 0.0]]})
    assert isinstance(hs, HalfSpaceDomain)
    with pytest.raises(ValueError):
        domain_from_config({"kind": "torus"})
