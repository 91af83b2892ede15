"""Wirtinger jets: finite differences, closed compositions, transforms."""

import numpy as np
import pytest

from robinlab.domains import Ball
from robinlab.engines import BallEngine, half_space_robin_jet, make_engine
from robinlab.jets import (
    all_orders_up_to,
    jet_from_radial_composition,
    power_law_derivs,
    wirtinger_fd_jet,
)


def test_power_law_derivs_against_sympy():
    sympy = pytest.importorskip("sympy")
    u = sympy.Symbol("u")
    expr = -2.5 * u ** sympy.Integer(-3)
    vals = power_law_derivs(-2.5, 0.7, -3, 4)
    for j in range(5):
        expected = float(sympy.diff(expr, u, j).subs(u, 0.7))
        assert vals[j] == pytest.approx(expected, rel=1e-12)


def test_fd_jet_on_polynomial():
    # F(z) = |z1|^2 + 2 Re(z1 z2) + |z1|^2 |z2|^2 has hand-checkable derivatives.
    def F(z):
        return float(
            abs(z[0]) ** 2 + 2 * np.real(z[0] * z[1]) + abs(z[0]) ** 2 * abs(z[1]) ** 2
        )

    z0 = np.array([0.4 - 0.3j, 0.2 + 0.5j])
    jet = wirtinger_fd_jet(F, z0, 2, all_orders_up_to(2), h=1e-2)
    a, b = z0
    assert jet.entry((0,), ()) == pytest.approx(np.conj(a) + b + np.conj(a) * abs(b) ** 2, abs=1e-9)
    assert jet.entry((1,), ()) == pytest.approx(a + abs(a) ** 2 * np.conj(b), abs=1e-9)
    assert jet.entry((0,), (0,)) == pytest.approx(1 + abs(b) ** 2, abs=1e-8)
    assert jet.entry((0,), (1,)) == pytest.approx(np.conj(a) * b, abs=1e-8)
    assert jet.entry((0, 1), ()) == pytest.approx(1.0 + np.conj(a * b), abs=1e-8)


def test_fd_jet_matches_ball_closed_form(ball2):
    engine = make_engine(ball2, np.array([0.1 + 0.2j, 0.4 - 0.1j]))
    exact = engine.robin_jet(order=4)
    fd = wirtinger_fd_jet(engine.robin_at, engine.pole, 2, all_orders_up_to(4), h=0.02)
    for kl, T in fd.tensors.items():
        scale = max(1.0, float(np.max(np.abs(exact.tensor(*kl)))))
        assert np.max(np.abs(T - exact.tensor(*kl))) / scale < 5e-4, kl
    # conjugation symmetry of the mixed Hessian
    assert fd.conjugation_defect() < 1e-7


def test_fd_jet_error_estimates_bound_truth(ball2):
    engine = make_engine(ball2, np.array([0.0, 0.3], complex))
    exact = engine.robin_jet(order=2)
    fd = wirtinger_fd_jet(engine.robin_at, engine.pole, 2, [(0, 0), (1, 0), (1, 1)], h=0.05)
    for kl in fd.tensors:
        err = float(np.max(np.abs(fd.tensors[kl] - exact.tensor(*kl))))
        assert err <= max(fd.errors[kl], 1e-12) * 50  # estimate is an (upper) h^2 proxy


def test_ball_jet_symmetries(ball2):
    jet = make_engine(ball2, np.array([0.2, 0.1 - 0.3j])).robin_jet(order=4)
    H = jet.tensor(1, 1)
    assert np.max(np.abs(H - H.conj().T)) < 1e-13
    T20 = jet.tensor(2, 0)
    assert np.max(np.abs(T20 - T20.T)) < 1e-13
    T21 = jet.tensor(2, 1)
    assert np.max(np.abs(T21 - np.swapaxes(T21, 0, 1))) < 1e-13
    # derived conjugate tensor
    T12 = jet.tensor(1, 2)
    assert T12[0, 1, 0] == pytest.approx(np.conj(T21[1, 0, 0]), rel=1e-12)


def test_half_space_jet_paper_values():
    # Normalized gradient: leading derivative factors (2n-2)(2n-1)(2n)(2n+1).
    n = 2
    coeffs = np.array([0, 1.0], complex)
    jet = half_space_robin_jet(coeffs, order=4)
    assert jet.value == pytest.approx(-1.0)
    assert jet.entry((1,), ()) == pytest.approx(-(2 * n - 2) * 1.0)
    assert jet.entry((1, 1), ()) == pytest.approx(-(2 * n - 2) * (2 * n - 1))
    assert jet.entry((1,), (1,)) == pytest.approx(-(2 * n - 2) * (2 * n - 1))
    assert jet.entry((1, 1, 1), ()) == pytest.approx(-(2 * n - 2) * (2 * n - 1) * (2 * n))
    assert jet.entry((1, 1), (1, 1)) == pytest.approx(-(2 * n - 2) * (2 * n - 1) * (2 * n) * (2 * n + 1))
    # Off-normal components vanish with the gradient factor.
    assert jet.entry((0,), ()) == 0.0


def test_half_space_jet_general_coefficients():
    coeffs = np.array([0.3 - 0.2j, 1.1 + 0.4j])
    jet = half_space_robin_jet(coeffs, order=3)
    n = 2
    cnorm = np.linalg.norm(coeffs)
    assert jet.value == pytest.approx(-(cnorm ** (2 * n - 2)))
    expected = -(cnorm ** (2 * n - 2)) * (2 * n - 2) * coeffs[0]
    assert jet.entry((0,), ()) == pytest.approx(expected, rel=1e-12)
    expected_mixed = -(cnorm ** (2 * n - 2)) * (2 * n - 2) * (2 * n - 1) * coeffs[0] * np.conj(coeffs[1])
    assert jet.entry((0,), (1,)) == pytest.approx(expected_mixed, rel=1e-12)


def test_ball_first_derivative_vs_closed_form(ball2):
    # d/dz2 of -(1 - |z|^2)^{-2} at p = (0, 0.5): 2(1-|p|^2)^{-3} * conj(p2) * ... chain rule.
    p = np.array([0, 0.5], complex)
    jet = make_engine(ball2, p).robin_jet(order=1)
    u = 1 - 0.25
    closed = -2.0 * u**-3 * 0.5  # d/dz2 [-(u)^{-2}] with du/dz2 = -conj(z2)
    closed = -(-2.0) * u**-3 * (-np.conj(p[1]))
    fd_engine = make_engine(ball2, p)
    fd = wirtinger_fd_jet(fd_engine.robin_at, p, 2, [(1, 0)], h=0.01)
    assert jet.entry((1,), ()) == pytest.approx(closed, rel=1e-12)
    assert fd.entry((1,), ()) == pytest.approx(closed, rel=1e-6)


def test_jet_transform_matches_fd(ball2, rng):
    engine = make_engine(ball2, np.array([0.1, 0.35 - 0.1j]))
    jet = engine.robin_jet(order=2)
    # Random unitary M; G(w) = Lambda(M w + c) with z0 = M w0 + c.
    X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    M, _ = np.linalg.qr(X)
    w0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    c = engine.pole - M @ w0
    transformed = jet.transform(M, new_base=w0)
    fd = wirtinger_fd_jet(lambda w: engine.robin_at(M @ w + c), w0, 2, all_orders_up_to(2), h=0.01)
    for kl in fd.tensors:
        scale = max(1.0, float(np.max(np.abs(transformed.tensor(*kl)))))
        assert np.max(np.abs(fd.tensors[kl] - transformed.tensor(*kl))) / scale < 1e-5, kl


def test_radial_composition_general_entries():
    # F(u) = u^{-2} with a nontrivial quadratic u; validated against FD.
    rng = np.random.default_rng(5)
    c = rng.standard_normal(2) + 1j * rng.standard_normal(2)

    def u(z):
        return 3.0 + 2 * np.real(np.sum(np.conj(c) * z)) - float(np.sum(np.abs(z) ** 2))

    def F(z):
        return u(z) ** -2.0

    z0 = np.array([0.2, -0.1 + 0.05j])
    grad_u = np.conj(c) - np.conj(z0)
    jet = jet_from_radial_composition(
        u(z0), grad_u, -np.eye(2, dtype=complex), power_law_derivs(1.0, u(z0), -2, 4), all_orders_up_to(4), base_point=z0
    )
    fd = wirtinger_fd_jet(F, z0, 2, all_orders_up_to(4), h=0.02)
    for kl in fd.tensors:
        scale = max(1.0, float(np.max(np.abs(jet.tensor(*kl)))))
        assert np.max(np.abs(fd.tensors[kl] - jet.tensor(*kl))) / scale < 2e-5, kl


def test_rescale_bookkeeping(ball2):
    jet = make_engine(ball2, np.array([0.0, 0.4], complex)).robin_jet(order=2)
    scaled = jet.rescale(lambda k, l: 2.0 ** (k + l))
    assert scaled.entry((1,), (1,)) == pytest.approx(4 * jet.entry((1,), (1,)))
    assert scaled.value == pytest.approx(jet.value)
