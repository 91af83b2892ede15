"""The scaling family D(p) = (D - p)/(-psi(p)) and its variation machinery.

For p in the domain, T(p, z) = (z - p)/(-psi(p)) maps D onto a domain D(p)
containing the origin, and the Robin constant of D(p) at 0 is the normalized
Robin function lambda(p) = Lambda(p) psi(p)^{2n-2}.  The jointly smooth
defining function of the family,

    f(p, w) = 2 Re { sum_a int_0^1 w_a psi_a(p - psi(p) t w) dt } - 1,

is evaluated by a fixed Gauss-Legendre rule in t; its w-gradient collapses to
the exact closed form psi_a(p - psi(p) w).  The boundary quantities

    k1 = (df/dp_g) |d_w f|^{-1},    k2 = (L^g f) |d_w f|^{-3}

feed the first/second variation formulas for lambda's derivatives, evaluated
as boundary integrals over d D(p) against the scaled Green function (pole 0).

For p on the boundary all formulas degenerate gracefully to the half-space
D(p) = {2 Re sum psi_a(p) w_a - 1 < 0} (the t-integrand becomes constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from robinlab.domains import DefiningFunction, HalfSpaceDomain, nearest_boundary_point, ray_level_crossing
from robinlab.engines import CollocationSettings, GreenEngine, make_engine
from robinlab.errors import BallNotContained, DegenerateGradient, PoleOnBoundary
from robinlab.jets import PotentialJet, all_orders_up_to, wirtinger_fd_jet
from robinlab.quadrature import SphereRule, sphere_area, sphere_rule
from robinlab.wirtinger import to_complex, to_real

_GL_ORDER = 16


def _gl_nodes():
    t, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    return 0.5 * (t + 1.0), 0.5 * w


class ScaledDefiningFunction(DefiningFunction):
    """Geometric view of D(p): value(w) = psi(p + s w)/s with s = -psi(p) > 0."""

    def __init__(self, base: DefiningFunction, p: np.ndarray):
        self.base = base
        self.p = np.asarray(p, dtype=complex)
        s = -float(base.value(self.p))
        if s <= 0:
            raise PoleOnBoundary("scaling parameter point must be strictly interior")
        self.s = s
        self.n = base.n
        self.scale = base.scale / s
        self.collar = base.collar / s

    def pullback(self, w):
        return self.p + self.s * np.asarray(w, dtype=complex)

    def value(self, w):
        return self.base.value(self.pullback(w)) / self.s

    def gradient(self, w):
        return self.base.gradient(self.pullback(w))

    def hessian(self, w):
        Q, P = self.base.hessian(self.pullback(w))
        return self.s * Q, self.s * P

    def exact_kind(self):
        kind = self.base.exact_kind()
        if kind is None:
            return None
        if kind["kind"] == "ball":
            return {"kind": "ball", "center": (kind["center"] - self.p) / self.s, "radius": kind["radius"] / self.s}
        if kind["kind"] == "half_space":
            z0 = np.zeros(self.n, dtype=complex)
            return {"kind": "half_space", "coeffs": self.gradient(z0), "offset": float(self.value(z0))}
        return None

    def interior_anchor(self):
        return np.zeros(self.n, dtype=complex)


@dataclass(frozen=True)
class BoundaryRule:
    """Quadrature on the boundary of a scaled domain: nodes, areas, normals."""

    nodes: np.ndarray  # (m, n) complex points on the boundary
    areas: np.ndarray  # (m,) surface measure weights
    normals: np.ndarray  # (m, 2n) outward unit real normals
    radii: np.ndarray  # (m,) |node - anchor|


class ScaledDomain:
    """D(p) for a parameter point p in the closed domain."""

    def __init__(self, domain: DefiningFunction, p: np.ndarray):
        self.domain = domain
        self.p = np.asarray(p, dtype=complex)
        self.n = domain.n
        psi_p = float(domain.value(self.p))
        if psi_p > 1e-12 * max(domain.scale, 1.0):
            raise PoleOnBoundary("parameter point lies outside the closed domain")
        self.boundary_mode = psi_p >= -1e-14 * max(domain.scale, 1.0)
        self.s = -psi_p
        self._t, self._wt = _gl_nodes()

    def view(self) -> DefiningFunction:
        """The scaled domain as a DefiningFunction (half-space for boundary p)."""
        if self.boundary_mode:
            return HalfSpaceDomain(self.domain.gradient(self.p), offset=-1.0)
        return ScaledDefiningFunction(self.domain, self.p)

    # -- the family's defining function and its derivatives ------------------

    def _xi(self, w, p=None):
        """Integration points xi_t = p - psi(p) t w, stacked over the t-rule."""
        p = self.p if p is None else np.asarray(p, dtype=complex)
        s = -float(self.domain.value(p))
        w = np.asarray(w, dtype=complex)
        return p + s * self._t[:, None, None] * w[None, ...], s

    def f(self, w: np.ndarray, p: np.ndarray | None = None) -> np.ndarray:
        """f(p, w) by the fixed Gauss-Legendre rule in t (vectorized over w)."""
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        xi, _ = self._xi(w, p)
        grad = self.domain.gradient(xi)  # (T, m, n)
        integrand = 2.0 * np.real(np.einsum("ma,tma->tm", w, grad))
        return np.einsum("t,tm->m", self._wt, integrand) - 1.0

    def f_closed(self, w: np.ndarray) -> np.ndarray:
        """Closed identity psi(p - psi(p) w)/(-psi(p)); the test oracle for f."""
        if self.boundary_mode:
            return 2.0 * np.real(np.asarray(w, dtype=complex) @ self.domain.gradient(self.p)) - 1.0
        return self.domain.value(self.p + self.s * np.asarray(w, dtype=complex)) / self.s

    def grad_w(self, w: np.ndarray, p: np.ndarray | None = None) -> np.ndarray:
        """d f / d w_a = psi_a(p - psi(p) w), exactly."""
        p = self.p if p is None else np.asarray(p, dtype=complex)
        s = -float(self.domain.value(p))
        return self.domain.gradient(p + s * np.asarray(w, dtype=complex))

    def df_dp(self, w: np.ndarray, gamma: int, p: np.ndarray | None = None) -> np.ndarray:
        """d f / d p_gamma by differentiating under the t-integral."""
        p = self.p if p is None else np.asarray(p, dtype=complex)
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        xi, _ = self._xi(w, p)
        Q, P = self.domain.hessian(xi)  # psi_{a bbar}, psi_{a b} at (T, m, n, n)
        psi_g_p = self.domain.gradient(p)[gamma]
        # First integral: sum_a w_a psi_{gamma a} + conj(w_a) psi_{gamma abar}.
        first = np.einsum("ma,tma->tm", w, P[..., gamma, :]) + np.einsum(
            "ma,tma->tm", np.conj(w), Q[..., gamma, :]
        )
        # Second: -2 psi_gamma(p) Re sum_{i,a} (w_i w_a psi_{ia} + w_i conj(w_a) psi_{i abar}) t.
        second = np.real(
            np.einsum("mi,ma,tmia->tm", w, w, P) + np.einsum("mi,ma,tmia->tm", w, np.conj(w), Q)
        )
        val = np.einsum("t,tm->m", self._wt, first) - 2.0 * psi_g_p * np.einsum(
            "t,t,tm->m", self._wt, self._t, second
        )
        return val

    def d2f_dwdpbar(self, w: np.ndarray, gamma: int) -> np.ndarray:
        """d^2 f / d w_a d pbar_gamma, closed form from psi's Hessian.

        Differentiates the exact w-gradient psi_a(z(p, w)), z = p - psi(p) w:
        psi_{a gammabar}(z) - psi_gammabar(p) sum_i (w_i psi_{a i}(z) + conj(w_i) psi_{a ibar}(z)).
        """
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        z = self.p + self.s * w
        Q, P = self.domain.hessian(z)  # (m, n, n)
        psi_gbar_p = np.conj(self.domain.gradient(self.p)[gamma])
        chain = np.einsum("mi,mai->ma", w, P) + np.einsum("mi,mai->ma", np.conj(w), Q)
        return Q[..., :, gamma] - psi_gbar_p * chain

    def d2f_dpdpbar(self, w: np.ndarray, gamma: int, h: float = 1e-5) -> np.ndarray:
        """d^2 f / d p_gamma d pbar_gamma by central differences of df_dp in p."""
        e = np.zeros(self.n, dtype=complex)
        e[gamma] = 1.0
        scale = h * max(1.0, float(np.linalg.norm(self.p)))
        dx = (self.df_dp(w, gamma, self.p + scale * e) - self.df_dp(w, gamma, self.p - scale * e)) / (2 * scale)
        dy = (self.df_dp(w, gamma, self.p + 1j * scale * e) - self.df_dp(w, gamma, self.p - 1j * scale * e)) / (
            2 * scale
        )
        return 0.5 * (dx + 1j * dy)

    def laplacian_w(self, w: np.ndarray) -> np.ndarray:
        """Complex Laplacian sum_a d^2 f / dw_a dwbar_a = -psi(p) tr psi_{a bbar}(z).

        This (unnormalized) Laplacian is the one that makes the k2 Levi
        combination independent of the defining function; the 4x-normalized
        operator breaks that invariance (checked against the Green-function
        route on exact balls).
        """
        if self.boundary_mode:
            return np.zeros(np.atleast_2d(w).shape[0])
        z = self.p + self.s * np.atleast_2d(np.asarray(w, dtype=complex))
        Q, _ = self.domain.hessian(z)
        return self.s * np.real(np.trace(Q, axis1=-2, axis2=-1))

    def hess_ww_mixed(self, w: np.ndarray) -> np.ndarray:
        """d^2 f / d w_a d wbar_b = -psi(p) psi_{a bbar}(z)."""
        z = self.p + self.s * np.atleast_2d(np.asarray(w, dtype=complex))
        Q, _ = self.domain.hessian(z)
        return self.s * Q

    # -- k quantities --------------------------------------------------------

    def k1(self, w: np.ndarray, gamma: int, min_grad: float = 1e-10) -> np.ndarray:
        grad = self.grad_w(np.atleast_2d(w))
        gnorm = np.linalg.norm(grad, axis=-1)
        if np.any(gnorm < min_grad):
            raise DegenerateGradient(f"|d_w f| below {min_grad}")
        return self.df_dp(w, gamma) / gnorm

    def k2(self, w: np.ndarray, gamma: int, min_grad: float = 1e-10, h: float = 1e-5) -> np.ndarray:
        w2 = np.atleast_2d(np.asarray(w, dtype=complex))
        grad = self.grad_w(w2)
        gnorm = np.linalg.norm(grad, axis=-1)
        if np.any(gnorm < min_grad):
            raise DegenerateGradient(f"|d_w f| below {min_grad}")
        fp = self.df_dp(w2, gamma)
        fppbar = self.d2f_dpdpbar(w2, gamma, h=h)
        mixed = self.d2f_dwdpbar(w2, gamma)  # (m, n) over a
        lap = self.laplacian_w(w2)
        levi = (
            fppbar * gnorm**2
            - 2.0 * np.real(fp * np.einsum("ma,ma->m", np.conj(grad), mixed))
            + np.abs(fp) ** 2 * lap
        )
        return np.real(levi) / gnorm**3

    # -- boundary quadrature ---------------------------------------------------

    def boundary_rule(self, radial_order: int = 24, phase_order: int = 16, phase_offset: float = 0.0, axis_adapted: bool = True) -> BoundaryRule:
        """Surface quadrature on d D(p) via the radial graph about the origin.

        With ``axis_adapted`` the polar angle is measured from the direction
        of the nearest boundary point and graded geometrically into the
        radial-graph horizon (where rho steepens); integrands built from the
        Green function concentrate exactly there.  Otherwise a plain torus
        product rule is used.
        """
        view = self.view()
        origin = np.zeros(self.n, dtype=complex)
        if axis_adapted and not self.boundary_mode:
            try:
                frame = nearest_boundary_point(view, origin, best_effort=True, tol=1e-13)
            except Exception:
                frame = None
        else:
            frame = None
        if frame is None or frame.delta <= 0:
            rule = sphere_rule(self.n, radial_order, phase_order, phase_offset=phase_offset)
            points, weights = rule.points, rule.weights
        else:
            from robinlab.quadrature import cap_graded_panels, panel_sphere_rule
            from robinlab.wirtinger import real_orthonormal_frame

            d0 = frame.delta
            diameter = 2.0 * max(view.scale, 1e-12)
            horizon = min(max(0.7 * math.sqrt(min(d0 / diameter, 1.0)), 1e-3), 0.5)
            sub = max(4, phase_order // 2)
            panels = cap_graded_panels(
                0.5,
                horizon,
                0.5,
                (radial_order, sub + 2, phase_order),
                (max(4, radial_order // 4), sub, phase_order - 2),
                (max(6, radial_order // 2), sub, phase_order - 2),
            )
            prule = panel_sphere_rule(2 * self.n - 1, panels)
            frame_mat = real_orthonormal_frame(to_real(frame.unit_complex_normal))
            points = to_complex(prule.points @ frame_mat.T)
            weights = prule.weights
        rho = ray_level_crossing(view, origin, points)
        nodes = rho[:, None] * points
        grad = view.real_grad(nodes)
        gnorm = np.linalg.norm(grad, axis=1)
        theta = to_real(points)
        denom = np.sum(theta * grad, axis=1)
        areas = weights * rho ** (2 * self.n - 1) * gnorm / denom
        return BoundaryRule(nodes=nodes, areas=areas, normals=grad / gnorm[:, None], radii=rho)


def scaled_engine(
    domain: DefiningFunction,
    p: np.ndarray,
    settings: CollocationSettings | None = None,
) -> tuple[ScaledDomain, GreenEngine]:
    """Scaled domain plus a Green engine for it with the pole at the origin."""
    scaled = ScaledDomain(domain, p)
    engine = make_engine(scaled.view(), np.zeros(domain.n, dtype=complex), settings=settings)
    return scaled, engine


def scaled_robin_jet(
    domain: DefiningFunction,
    p: np.ndarray,
    order: int = 4,
    orders=None,
    settings: CollocationSettings | None = None,
    engine: GreenEngine | None = None,
    step_factor: float = 0.03,
    richardson: bool = True,
) -> PotentialJet:
    """Jet at 0 of the Robin function of D(p).

    By the dilation rule Lambda_{D(p)}(w) = s^{2n-2} Lambda(p + s w), the
    entries are exactly the boundary-normalized quantities
    (-1)^{|A|+|B|} D^{A Bbar} Lambda(p) psi(p)^{2n-2+|A|+|B|}; they stay O(1)
    as p approaches the boundary, which keeps the finite differences
    well-conditioned uniformly in delta.
    """
    if engine is None:
        _, engine = scaled_engine(domain, p, settings=settings)
    orders = list(orders) if orders is not None else all_orders_up_to(order)
    if engine.kind != "collocation":
        return engine.robin_jet(order=order, orders=orders)
    depth = nearest_boundary_point(engine.domain, engine.pole, best_effort=True).delta
    return wirtinger_fd_jet(engine.robin_at, engine.pole, domain.n, orders, h=step_factor * depth, richardson=richardson)


def unscale_jet(jet: PotentialJet, s: float, n: int) -> PotentialJet:
    """Convert a D(p)-jet at 0 into the jet of Lambda at p (divide by s-powers)."""
    return jet.rescale(lambda k, l: s ** (-(2 * n - 2 + k + l)))


# -- mean value identity and variation formulas ------------------------------


def mean_value_check(
    engine: GreenEngine,
    r: float,
    radial_order: int = 20,
    phase_order: int = 14,
) -> float:
    """Residual of the mean-value identity for the scaled Green function.

    lambda(p) + r^{-(2n-2)} - (1/(r^{2n-1} sigma_{2n})) * integral over dB(0,r) of g dS
    should vanish to quadrature accuracy whenever the closed ball of radius r
    around the origin sits inside D(p).
    """
    n = engine.n
    rule = sphere_rule(n, radial_order, phase_order)
    # Containment: the nearest boundary crossing along the rule directions.
    rho = ray_level_crossing(engine.domain, np.zeros(n, dtype=complex), rule.points)
    if r >= float(np.min(rho)):
        raise BallNotContained(f"radius {r} >= boundary distance {float(np.min(rho)):.3g}")
    g_vals = engine.green(r * rule.points)
    lam = engine.robin()
    return float(lam + r ** (2 - 2 * n) - np.sum(rule.weights * g_vals) / sphere_area(2 * n))


def _boundary_green_data(engine: GreenEngine, rule: BoundaryRule):
    grad = engine.green_grad(rule.nodes)
    gnorm = np.linalg.norm(grad, axis=1)
    real_grad = np.empty((len(rule.nodes), 2 * engine.n))
    real_grad[:, 0::2] = 2.0 * grad.real
    real_grad[:, 1::2] = -2.0 * grad.imag
    dgdn = np.sum(real_grad * rule.normals, axis=1)
    return grad, gnorm, dgdn


def variation_first(
    domain: DefiningFunction,
    p: np.ndarray,
    gamma: int,
    engine: GreenEngine | None = None,
    settings: CollocationSettings | None = None,
    radial_order: int = 24,
    phase_order: int = 16,
) -> float:
    """d lambda / d p_gamma as the k1 boundary integral over d D(p):

    (1/(2(n-1) sigma_{2n})) * integral of k1 |d_w g| (dg/dn) dS.
    """
    scaled = ScaledDomain(domain, p)
    if engine is None:
        engine = make_engine(scaled.view(), np.zeros(domain.n, dtype=complex), settings=settings)
    rule = scaled.boundary_rule(radial_order, phase_order)
    k1 = scaled.k1(rule.nodes, gamma)
    _, gnorm, dgdn = _boundary_green_data(engine, rule)
    n = domain.n
    integral = np.sum(rule.areas * k1 * gnorm * dgdn)
    return float(integral / (2.0 * (n - 1) * sphere_area(2 * n)))


def variation_second(
    domain: DefiningFunction,
    p: np.ndarray,
    gamma: int,
    engine: GreenEngine | None = None,
    settings: CollocationSettings | None = None,
    radial_order: int = 24,
    phase_order: int = 16,
    h_rel: float = 1e-3,
) -> tuple[float, dict]:
    """d^2 lambda / d p_gamma d pbar_gamma as the two-integral boundary sum.

    The k2 integral matches the general-pole variation formula specialized to
    the origin; the mixed integral needs d^2 g / d w d pbar_gamma, obtained by
    complex central differences of engines refitted at p +- h e_gamma with
    h = h_rel * delta(p).
    """
    scaled = ScaledDomain(domain, p)
    if scaled.boundary_mode:
        raise PoleOnBoundary("variation_second needs an interior parameter point (one-sided FD undefined on the boundary)")
    if engine is None:
        engine = make_engine(scaled.view(), np.zeros(domain.n, dtype=complex), settings=settings)
    rule = scaled.boundary_rule(radial_order, phase_order)
    n = domain.n
    sigma = sphere_area(2 * n)
    k1 = scaled.k1(rule.nodes, gamma)
    k2 = scaled.k2(rule.nodes, gamma)
    grad, gnorm, dgdn = _boundary_green_data(engine, rule)

    term_k2 = float(np.sum(rule.areas * k2 * gnorm * dgdn) / (2.0 * (n - 1) * sigma))

    frame = nearest_boundary_point(domain, p, best_effort=True)
    h = h_rel * frame.delta
    e = np.zeros(n, dtype=complex)
    e[gamma] = 1.0

    from robinlab.engines import CollocationEngine

    def grad_at(p_shift):
        sd_shift = ScaledDomain(domain, p_shift)
        if isinstance(engine, CollocationEngine):
            eng = CollocationEngine(sd_shift.view(), np.zeros(n, dtype=complex), template=engine)
        else:
            eng = make_engine(sd_shift.view(), np.zeros(n, dtype=complex), settings=settings)
        return eng.green_grad(rule.nodes)

    gx = (grad_at(p + h * e) - grad_at(p - h * e)) / (2 * h)
    gy = (grad_at(p + 1j * h * e) - grad_at(p - 1j * h * e)) / (2 * h)
    mixed = 0.5 * (gx + 1j * gy)  # (m, n): d^2 g / d w_a d pbar_gamma

    inner = np.einsum("ma,ma->m", np.conj(grad), mixed)  # sum_a (dg/dwbar_a) d2g/dw_a dpbar_g
    term_mixed = float(np.sum(rule.areas * np.real(k1 * inner / gnorm) * dgdn) / ((n - 1) * sigma))

    parts = {"k2_integral": term_k2, "mixed_integral": term_mixed, "fd_step": h}
    return term_k2 + term_mixed, parts
