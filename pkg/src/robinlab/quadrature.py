"""Quadrature rules: Gauss-Legendre on intervals and product rules on S^{2n-1}.

Sphere rules use torus-type coordinates z_j = r_j e^{i phi_j} with r on the
positive orthant of S^{n-1}: Gauss-Legendre in the radial angles, uniform
(trapezoidal, spectrally accurate for periodic integrands) in the phases.
Implemented for n = 2 (S^3) and n = 3 (S^5), the dimensions exercised by the
experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SIGMA_TABLE = {4: 2.0 * math.pi**2, 6: math.pi**3}


def sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^{m-1} in R^m (sigma_{2n} for m = 2n)."""
    if m in _SIGMA_TABLE:
        return _SIGMA_TABLE[m]
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def gauss_legendre(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass(frozen=True)
class SphereRule:
    """Quadrature on the unit sphere of C^n: complex nodes and weights.

    Weights sum to sigma_{2n} = area of S^{2n-1}; integrates smooth functions
    spectrally in the rule sizes.
    """

    points: np.ndarray  # (m, n) complex unit vectors
    weights: np.ndarray  # (m,) positive

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def integrate(self, values: np.ndarray) -> float | complex:
        return np.sum(self.weights * values, axis=-1)


def sphere_rule(n: int, radial_order: int, phase_order: int, phase_offset: float = 0.0) -> SphereRule:
    """Product quadrature on S^{2n-1} subset C^n.

    Parameters
    ----------
    n : complex dimension (2 or 3).
    radial_order : Gauss-Legendre order per radial angle.
    phase_order : uniform points per torus phase.
    phase_offset : rotates the phase grids; staggered grids give independent
        node sets on the same sphere (used for residual certification).
    """
    phis = 2.0 * math.pi * (np.arange(phase_order) + phase_offset) / phase_order
    wphi = 2.0 * math.pi / phase_order
    if n == 2:
        xi, wxi = gauss_legendre(0.0, 0.5 * math.pi, radial_order)
        r = np.stack([np.cos(xi), np.sin(xi)], axis=1)  # (k, 2)
        base_w = wxi * np.cos(xi) * np.sin(xi)
        ph1, ph2 = np.meshgrid(phis, phis, indexing="ij")
        pts = (
            r[:, None, None, :]
            * np.stack([np.exp(1j * ph1), np.exp(1j * ph2)], axis=-1)[None, :, :, :]
        ).reshape(-1, 2)
        w = (base_w[:, None, None] * wphi**2 * np.ones_like(ph1)[None]).reshape(-1)
        return SphereRule(pts, w)
    if n == 3:
        th1, w1 = gauss_legendre(0.0, 0.5 * math.pi, radial_order)
        th2, w2 = gauss_legendre(0.0, 0.5 * math.pi, radial_order)
        T1, T2 = np.meshgrid(th1, th2, indexing="ij")
        W12 = np.outer(w1, w2)
        r1, r2, r3 = np.cos(T1), np.sin(T1) * np.cos(T2), np.sin(T1) * np.sin(T2)
        base_w = W12 * r1 * r2 * r3 * np.sin(T1)
        e1, e2, e3 = (np.exp(1j * phis),) * 3
        P1, P2, P3 = np.meshgrid(e1, e2, e3, indexing="ij")
        shape = T1.shape + P1.shape
        pts = np.empty(shape + (3,), dtype=complex)
        pts[..., 0] = r1[:, :, None, None, None] * P1[None, None]
        pts[..., 1] = r2[:, :, None, None, None] * P2[None, None]
        pts[..., 2] = r3[:, :, None, None, None] * P3[None, None]
        w = (base_w[:, :, None, None, None] * wphi**3 * np.ones_like(P1.real)[None, None]).reshape(-1)
        return SphereRule(pts.reshape(-1, 3), w)
    raise NotImplementedError(f"sphere rule implemented for n = 2, 3 only, got n = {n}")


def halfline_rule(order: int, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on (0, inf) via the map r = scale * t / (1 - t).

    Suited to integrands decaying at least like r^{-3} at infinity.
    """
    t, wt = gauss_legendre(0.0, 1.0, order)
    r = scale * t / (1.0 - t)
    w = wt * scale / (1.0 - t) ** 2
    return r, w


def sphere_polar_rule(dim: int, order: int, phase: int) -> tuple[np.ndarray, np.ndarray]:
    """Recursive polar rule on S^dim in R^{dim+1}: GL polar angles, uniform base circle.

    Returns real unit vectors (m, dim+1) and weights summing to the sphere area.
    """
    if dim == 1:
        t = 2.0 * math.pi * np.arange(phase) / phase
        return np.stack([np.cos(t), np.sin(t)], axis=1), np.full(phase, 2.0 * math.pi / phase)
    a, wa = gauss_legendre(0.0, math.pi, order)
    sub_pts, sub_w = sphere_polar_rule(dim - 1, order, phase)
    pts = np.concatenate(
        [np.repeat(np.cos(a)[:, None, None], len(sub_pts), axis=1), np.sin(a)[:, None, None] * sub_pts[None, :, :]],
        axis=2,
    ).reshape(-1, dim + 1)
    w = ((wa * np.sin(a) ** (dim - 1))[:, None] * sub_w[None, :]).reshape(-1)
    return pts, w


def fibonacci_sphere(m: int, twist: float = 0.0) -> np.ndarray:
    """m well-spread unit vectors on S^2 (golden-angle spiral), twistable."""
    k = np.arange(m)
    phi = k * (math.pi * (3.0 - math.sqrt(5.0))) + twist
    y = 1.0 - 2.0 * (k + 0.5) / m
    r = np.sqrt(np.maximum(1.0 - y * y, 0.0))
    return np.stack([r * np.cos(phi), y, r * np.sin(phi)], axis=1)


@dataclass(frozen=True)
class PanelRule:
    """Polar-panel rule on S^dim: points, weights, and local spacing data.

    ``alpha_spacing`` is the panel's polar step; ``ring_gap`` the azimuthal arc
    gap at each point (both in radians, used to scale fundamental-solution
    offsets off a surface).
    """

    points: np.ndarray
    weights: np.ndarray
    alpha_spacing: np.ndarray
    ring_gap: np.ndarray


def panel_sphere_rule(dim: int, panels: list[tuple[float, float, int, int, int]]) -> PanelRule:
    """Polar rule on S^dim with per-panel (a0, a1, order, sub_order, phase).

    The polar angle alpha runs over [a0, a1] per panel with Gauss-Legendre
    nodes; the orthogonal S^{dim-1} factor uses :func:`sphere_polar_rule` with
    the panel's sub_order/phase.
    """
    P, W, DA, RG = [], [], [], []
    for a0, a1, order, sub, ph in panels:
        sub_pts, sub_w = sphere_polar_rule(dim - 1, sub, ph)
        a, wa = gauss_legendre(a0, a1, order)
        block = np.concatenate(
            [np.repeat(np.cos(a)[:, None, None], len(sub_pts), axis=1), np.sin(a)[:, None, None] * sub_pts[None, :, :]],
            axis=2,
        )
        P.append(block.reshape(-1, dim + 1))
        W.append(((wa * np.sin(a) ** (dim - 1))[:, None] * sub_w[None, :]).reshape(-1))
        DA.append(np.full(order * len(sub_pts), (a1 - a0) / order))
        gap = np.maximum(2.0 * math.pi / ph, math.pi / max(sub, 1))
        RG.append((np.sin(a)[:, None] * np.full(len(sub_pts), gap)[None, :]).reshape(-1))
    return PanelRule(np.vstack(P), np.concatenate(W), np.concatenate(DA), np.concatenate(RG))


def cap_graded_panels(
    cap_edge: float,
    horizon_halfwidth: float,
    far_edge: float,
    cap: tuple[int, int, int],
    level: tuple[int, int, int],
    far: tuple[int, int, int],
) -> list[tuple[float, float, int, int, int]]:
    """Polar panels graded geometrically toward the horizon at alpha = pi/2.

    A cap panel [0, pi/2 - cap_edge], halving panels down to the horizon band
    of the given half-width, the band itself, a matching panel past it, and a
    far panel to pi.  Each entry carries (order, sub_order, phase).
    """
    horizon_halfwidth = min(horizon_halfwidth, cap_edge)
    panels = [(0.0, math.pi / 2 - cap_edge, *cap)]
    w = cap_edge
    while w > horizon_halfwidth * 1.0001:
        w2 = max(w / 2.0, horizon_halfwidth)
        panels.append((math.pi / 2 - w, math.pi / 2 - w2, *level))
        w = w2
    panels.append((math.pi / 2 - w, math.pi / 2 + w, *level))
    if far_edge > w * 1.0001:
        panels.append((math.pi / 2 + w, math.pi / 2 + far_edge, *level))
    panels.append((math.pi / 2 + max(far_edge, w), math.pi, *far))
    return panels
