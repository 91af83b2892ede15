"""Smoothly bounded domains via global defining functions, and boundary geometry.

A domain D = {psi < 0} in C^n is described by a :class:`DefiningFunction`
providing psi, its holomorphic gradient psi_a, and its complex Hessian blocks
psi_{a bbar} (Hermitian) and psi_{a b} (symmetric), all vectorized over
points.  On top of that sit the boundary operations: nearest boundary point
pi(z) with distance delta(z), the unitary frame rotating the complex normal
to the last axis, the complex normal/tangential splitting, the Levi form and
strong-pseudoconvexity sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from robinlab.errors import NoConvergence, NotStronglyPseudoconvex, OutsideCollar
from robinlab.wirtinger import (
    hermitian_pairing,
    real_gradient,
    real_hessian,
    to_complex,
    to_real,
    unitary_from_normal,
)


class DefiningFunction:
    """Base class: psi < 0 inside, = 0 on the boundary, > 0 outside.

    Subclasses implement :meth:`value`, :meth:`gradient` and :meth:`hessian`,
    each accepting arrays of points of shape (..., n).  ``collar`` is the
    declared width near the boundary on which the nearest-point projection is
    guaranteed unique; ``scale`` is a characteristic domain size.
    """

    n: int
    collar: float
    scale: float

    def value(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, z: np.ndarray) -> np.ndarray:
        """Holomorphic gradient psi_a = d psi / d z_a, shape (..., n)."""
        raise NotImplementedError

    def hessian(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(psi_{a bbar}, psi_{a b}) with shapes (..., n, n)."""
        raise NotImplementedError

    def exact_kind(self) -> dict | None:
        """Geometry parameters when the underlying set is a ball or half-space."""
        return None

    def interior_anchor(self) -> np.ndarray:
        """A point well inside the domain (star-shape center for sampling)."""
        raise NotImplementedError

    # -- derived quantities ------------------------------------------------

    def real_grad(self, z: np.ndarray) -> np.ndarray:
        return real_gradient(self.gradient(z))

    def real_hess(self, z: np.ndarray) -> np.ndarray:
        Q, P = self.hessian(z)
        return real_hessian(Q, P)

    def laplacian(self, z: np.ndarray) -> np.ndarray:
        """Standard Laplacian 4 sum_a psi_{a abar}."""
        Q, _ = self.hessian(z)
        return 4.0 * np.real(np.trace(Q, axis1=-2, axis2=-1))

    def contains(self, z: np.ndarray) -> np.ndarray:
        return self.value(z) < 0.0


class Ball(DefiningFunction):
    """psi(z) = |z - center|^2 - radius^2."""

    def __init__(self, n: int, center: Sequence[complex] | None = None, radius: float = 1.0, collar: float | None = None):
        self.n = n
        self.center = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        self.radius = float(radius)
        self.scale = self.radius
        # Projection is unique everywhere except the center, so the collar is
        # the whole punctured ball rather than the generic curvature estimate.
        self.collar = self.radius if collar is None else collar

    def value(self, z):
        d = np.asarray(z, dtype=complex) - self.center
        return np.sum(np.abs(d) ** 2, axis=-1) - self.radius**2

    def gradient(self, z):
        return np.conj(np.asarray(z, dtype=complex) - self.center)

    def hessian(self, z):
        z = np.asarray(z, dtype=complex)
        eye = np.eye(self.n, dtype=complex)
        Q = np.broadcast_to(eye, z.shape[:-1] + (self.n, self.n)).copy()
        P = np.zeros_like(Q)
        return Q, P

    def exact_kind(self):
        return {"kind": "ball", "center": self.center, "radius": self.radius}

    def interior_anchor(self):
        return self.center.copy()


class Ellipsoid(DefiningFunction):
    """psi(z) = sum_a weights_a |z_a|^2 - 1 (semi-axes weights_a^{-1/2})."""

    def __init__(self, weights: Sequence[float], collar: float | None = None):
        self.weights = np.asarray(weights, dtype=float)
        if np.any(self.weights <= 0):
            raise ValueError("ellipsoid weights must be positive")
        self.n = len(self.weights)
        axes = self.weights**-0.5
        self.scale = float(np.max(axes))
        # Smallest curvature radius of the real ellipsoid: min_axis^2 / max_axis.
        self.collar = 0.2 * float(np.min(axes)) ** 2 / float(np.max(axes)) if collar is None else collar

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return np.sum(self.weights * np.abs(z) ** 2, axis=-1) - 1.0

    def gradient(self, z):
        return self.weights * np.conj(np.asarray(z, dtype=complex))

    def hessian(self, z):
        z = np.asarray(z, dtype=complex)
        Q = np.broadcast_to(np.diag(self.weights).astype(complex), z.shape[:-1] + (self.n, self.n)).copy()
        return Q, np.zeros_like(Q)

    def interior_anchor(self):
        return np.zeros(self.n, dtype=complex)


class HalfSpaceDomain(DefiningFunction):
    """psi(z) = 2 Re sum_a coeffs_a z_a + offset (interior where psi < 0)."""

    def __init__(self, coeffs: Sequence[complex], offset: float = -1.0):
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.offset = float(offset)
        self.n = len(self.coeffs)
        self.scale = 1.0
        self.collar = math.inf

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return 2.0 * np.real(np.sum(self.coeffs * z, axis=-1)) + self.offset

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(self.coeffs, z.shape).copy()

    def hessian(self, z):
        z = np.asarray(z, dtype=complex)
        Z = np.zeros(z.shape[:-1] + (self.n, self.n), dtype=complex)
        return Z, Z.copy()

    def exact_kind(self):
        return {"kind": "half_space", "coeffs": self.coeffs, "offset": self.offset}

    def interior_anchor(self):
        # Nearest boundary point to the origin, then one unit inward.
        c2 = float(np.sum(np.abs(self.coeffs) ** 2))
        foot = -self.offset * np.conj(self.coeffs) / (2.0 * c2)
        return foot - np.conj(self.coeffs) / math.sqrt(c2)


class PerturbedBall(DefiningFunction):
    """Ball with pluriharmonic polynomial bumps:

        psi(z) = |z|^2 - radius^2 + sum_k 2 Re(c_k z^{A_k})

    The bumps are harmonic, so the Levi form stays the identity and the domain
    remains strongly pseudoconvex for small coefficients, while psi_{a b} and
    mixed third derivatives become nontrivial.
    """

    def __init__(self, n: int, radius: float = 1.0, terms: Sequence[tuple[complex, Sequence[int]]] = (), collar: float | None = None):
        self.n = n
        self.radius = float(radius)
        self.terms = [(complex(c), tuple(int(a) for a in exp)) for c, exp in terms]
        for _, exp in self.terms:
            if len(exp) != n or any(a < 0 for a in exp):
                raise ValueError(f"bad monomial exponent {exp}")
        self.scale = self.radius
        self.collar = (0.15 * self.radius) if collar is None else collar

    def _monomials(self, z):
        return [c * np.prod(z ** np.asarray(exp), axis=-1) for c, exp in self.terms]

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        v = np.sum(np.abs(z) ** 2, axis=-1) - self.radius**2
        for m in self._monomials(z):
            v = v + 2.0 * np.real(m)
        return v

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        g = np.conj(z).astype(complex)
        for c, exp in self.terms:
            for a, e_a in enumerate(exp):
                if e_a == 0:
                    continue
                dexp = list(exp)
                dexp[a] -= 1
                g[..., a] = g[..., a] + c * e_a * np.prod(z ** np.asarray(dexp), axis=-1)
        return g

    def hessian(self, z):
        z = np.asarray(z, dtype=complex)
        eye = np.eye(self.n, dtype=complex)
        Q = np.broadcast_to(eye, z.shape[:-1] + (self.n, self.n)).copy()
        P = np.zeros_like(Q)
        for c, exp in self.terms:
            for a, e_a in enumerate(exp):
                if e_a == 0:
                    continue
                for b, e_b in enumerate(exp):
                    dexp = list(exp)
                    dexp[a] -= 1
                    if a == b:
                        if e_a < 2:
                            continue
                        coef = e_a * (e_a - 1)
                        dexp[a] -= 1
                    else:
                        if e_b == 0:
                            continue
                        coef = e_a * e_b
                        dexp[b] -= 1
                    P[..., a, b] = P[..., a, b] + c * coef * np.prod(z ** np.asarray(dexp), axis=-1)
        return Q, P

    def interior_anchor(self):
        return np.zeros(self.n, dtype=complex)


class TransformedDomain(DefiningFunction):
    """Image of a domain under w = U (z - shift), with psi rescaled by 1/scale_factor.

    Used to place a boundary point at the origin with the complex normal along
    the last axis and (optionally) |d psi| = 1 there.  The underlying point set
    is the rigid image; only psi's values are rescaled.
    """

    def __init__(self, base: DefiningFunction, unitary: np.ndarray, shift: np.ndarray, scale_factor: float = 1.0):
        self.base = base
        self.U = np.asarray(unitary, dtype=complex)
        self.shift = np.asarray(shift, dtype=complex)
        self.c = float(scale_factor)
        self.n = base.n
        self.scale = base.scale
        self.collar = base.collar

    def pullback(self, w: np.ndarray) -> np.ndarray:
        """Map frame coordinates back to base coordinates: z = U^H w + shift."""
        return np.asarray(w, dtype=complex) @ np.conj(self.U) + self.shift

    def pushforward(self, z: np.ndarray) -> np.ndarray:
        return (np.asarray(z, dtype=complex) - self.shift) @ self.U.T

    def value(self, w):
        return self.base.value(self.pullback(w)) / self.c

    def gradient(self, w):
        return self.base.gradient(self.pullback(w)) @ np.conj(self.U).T / self.c

    def hessian(self, w):
        Q, P = self.base.hessian(self.pullback(w))
        Uc = np.conj(self.U)
        Qt = np.einsum("ai,...ij,bj->...ab", Uc, Q, self.U) / self.c
        Pt = np.einsum("ai,...ij,bj->...ab", Uc, P, Uc) / self.c
        return Qt, Pt

    def exact_kind(self):
        base_kind = self.base.exact_kind()
        if base_kind is None:
            return None
        if base_kind["kind"] == "ball":
            return {
                "kind": "ball",
                "center": self.pushforward(base_kind["center"]),
                "radius": base_kind["radius"],
            }
        if base_kind["kind"] == "half_space":
            z0 = np.zeros(self.n, dtype=complex)
            return {"kind": "half_space", "coeffs": self.gradient(z0), "offset": float(self.value(z0))}
        return None

    def interior_anchor(self):
        return self.pushforward(self.base.interior_anchor())


# -- boundary geometry -------------------------------------------------------


def ray_level_crossing(
    domain: DefiningFunction,
    anchor: np.ndarray,
    directions: np.ndarray,
    level: float = 0.0,
    bisections: int = 60,
) -> np.ndarray:
    """Radii rho with psi(anchor + rho * dir) = level along star-shaped rays.

    ``directions`` has shape (m, n), complex unit vectors.  Vectorized
    bracketing + bisection; assumes psi(anchor) < level and that each ray
    crosses the level set exactly once (star-shaped about the anchor).
    """
    anchor = np.asarray(anchor, dtype=complex)
    dirs = np.asarray(directions, dtype=complex)
    m = dirs.shape[0]
    lo = np.zeros(m)
    hi = np.full(m, max(domain.scale, 1e-3))
    for _ in range(80):
        vals = domain.value(anchor + hi[:, None] * dirs)
        todo = vals <= level
        if not np.any(todo):
            break
        hi[todo] *= 2.0
    else:
        raise NoConvergence("ray bracketing failed; domain may be unbounded along a ray")
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        inside = domain.value(anchor + mid[:, None] * dirs) < level
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def boundary_samples(domain: DefiningFunction, count: int, rng: np.random.Generator, anchor=None) -> np.ndarray:
    """Random boundary points by ray shooting from an interior anchor."""
    anchor = domain.interior_anchor() if anchor is None else np.asarray(anchor, dtype=complex)
    x = rng.standard_normal((count, 2 * domain.n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    dirs = to_complex(x)
    rho = ray_level_crossing(domain, anchor, dirs)
    return anchor + rho[:, None] * dirs


@dataclass(frozen=True)
class BoundaryFrame:
    """Nearest-point data at pi(z): distance, complex normal, frame rotation.

    ``rotation`` is unitary with rotation @ unit_complex_normal = e_n, so in
    frame coordinates w = rotation @ (z - base) the outward complex normal at
    the origin is the last coordinate axis.
    """

    base: np.ndarray
    delta: float
    unit_complex_normal: np.ndarray
    rotation: np.ndarray

    @property
    def inward_real_normal(self) -> np.ndarray:
        """Unit inward normal as a real 2n-vector."""
        return -to_real(self.unit_complex_normal)

    def reconstruct_point(self) -> np.ndarray:
        """base + delta * (inward normal), the interior point this frame came from."""
        return self.base - self.delta * self.unit_complex_normal


def _frame_at_boundary(domain: DefiningFunction, w: np.ndarray, delta: float) -> BoundaryFrame:
    g = domain.gradient(w)
    norm = np.linalg.norm(g)
    nu = np.conj(g) / norm
    return BoundaryFrame(base=np.asarray(w, dtype=complex), delta=float(delta), unit_complex_normal=nu, rotation=unitary_from_normal(nu))


def nearest_boundary_point(
    domain: DefiningFunction,
    z: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 50,
    best_effort: bool = False,
) -> BoundaryFrame:
    """Project z onto the boundary: damped Newton on {psi(w)=0, z-w || grad psi(w)}.

    Seeded by one gradient-flow step from z.  Raises :class:`OutsideCollar`
    when delta exceeds the declared collar width (pass ``best_effort`` to get
    the projection anyway) and :class:`NoConvergence` on iteration failure.
    """
    z = np.asarray(z, dtype=complex)
    n2 = 2 * domain.n
    x = to_real(z)
    psi_z = float(domain.value(z))

    if abs(psi_z) < tol * max(domain.scale, 1.0):
        return _frame_at_boundary(domain, z, 0.0)

    g = domain.real_grad(z)
    g2 = float(np.dot(g, g))
    w = x - psi_z / g2 * g
    t = -psi_z / g2

    best = (math.inf, w, t)
    stall = 0
    for _ in range(max_iter):
        wc = to_complex(w)
        psi = float(domain.value(wc))
        grad = domain.real_grad(wc)
        F = np.concatenate([w + t * grad - x, [psi]])
        res = float(np.linalg.norm(F))
        if res < best[0]:
            best = (res, w.copy(), t)
            stall = 0
        else:
            stall += 1
        if res < tol:
            break
        # At roundoff level further Newton steps just dither; accept the best.
        if stall >= 3 and best[0] < math.sqrt(tol) * max(1.0, np.linalg.norm(x)):
            break
        H = domain.real_hess(wc)
        J = np.zeros((n2 + 1, n2 + 1))
        J[:n2, :n2] = np.eye(n2) + t * H
        J[:n2, n2] = grad
        J[n2, :n2] = grad
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Jacobian in boundary projection") from exc
        damp = 1.0
        while damp > 1e-4:
            w_new, t_new = w + damp * step[:n2], t + damp * step[n2]
            wc_new = to_complex(w_new)
            F_new = np.concatenate([w_new + t_new * domain.real_grad(wc_new) - x, [float(domain.value(wc_new))]])
            if np.linalg.norm(F_new) < res:
                break
            damp *= 0.5
        w, t = w + damp * step[:n2], t + damp * step[n2]
    else:
        if best[0] > math.sqrt(tol) * max(1.0, np.linalg.norm(x)):
            raise NoConvergence(f"boundary projection did not converge (residual {best[0]:.3e})")
    _, w, t = best

    wc = to_complex(w)
    delta = float(np.linalg.norm(w - x))
    if delta > domain.collar and not best_effort:
        raise OutsideCollar(f"delta = {delta:.3g} exceeds collar width {domain.collar:.3g}")
    return _frame_at_boundary(domain, wc, delta)


def split_normal_tangential(frame: BoundaryFrame, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decompose v = v_H + v_N against the complex normal line at pi(z)."""
    v = np.asarray(v, dtype=complex)
    nu = frame.unit_complex_normal
    v_N = hermitian_pairing(v, nu) * nu
    return v - v_N, v_N


def levi_form(domain: DefiningFunction, z: np.ndarray, v: np.ndarray) -> float:
    """L_psi(z, v) = sum_{a,b} psi_{a bbar}(z) v^a conj(v^b), a real number."""
    Q, _ = domain.hessian(z)
    v = np.asarray(v, dtype=complex)
    return float(np.real(np.einsum("ab,a,b->", Q, v, np.conj(v))))


@dataclass(frozen=True)
class PSCReport:
    ok: bool
    min_levi: float
    samples: int
    witness_point: np.ndarray | None = None
    witness_vector: np.ndarray | None = None


def strong_psc_check(domain: DefiningFunction, samples: int = 200, seed: int = 0, strict: bool = False) -> PSCReport:
    """Sample boundary points and report min of the tangential Levi form.

    With ``strict`` raises :class:`NotStronglyPseudoconvex` (with a witness)
    instead of returning a failing report.
    """
    rng = np.random.default_rng(seed)
    kind = domain.exact_kind()
    if kind is not None and kind["kind"] == "half_space":
        # Linear psi: Levi form vanishes identically.
        nu = np.conj(kind["coeffs"])
        nu = nu / np.linalg.norm(nu)
        U = unitary_from_normal(nu)
        witness = np.conj(U[0, :])
        report = PSCReport(ok=False, min_levi=0.0, samples=0, witness_point=None, witness_vector=witness)
        if strict:
            raise NotStronglyPseudoconvex("half-space has vanishing tangential Levi form", witness_vector=witness)
        return report

    pts = boundary_samples(domain, samples, rng)
    best = math.inf
    witness_pt = witness_vec = None
    for w in pts:
        g = domain.gradient(w)
        nu = np.conj(g) / np.linalg.norm(g)
        U = unitary_from_normal(nu)
        tangents = np.conj(U[: domain.n - 1, :])  # rows mapping to e_1..e_{n-1}
        Q, _ = domain.hessian(w)
        B = np.einsum("ab,ja,kb->jk", Q, tangents, np.conj(tangents))
        eigvals, eigvecs = np.linalg.eigh(0.5 * (B + B.conj().T))
        if eigvals[0] < best:
            best = float(eigvals[0])
            witness_pt = w
            witness_vec = eigvecs[:, 0] @ tangents
    ok = best > 0.0
    report = PSCReport(ok=ok, min_levi=best, samples=samples, witness_point=witness_pt, witness_vector=witness_vec)
    if strict and not ok:
        raise NotStronglyPseudoconvex(
            f"min tangential Levi eigenvalue {best:.3e} <= 0", witness_point=witness_pt, witness_vector=witness_vec
        )
    return report


def boundary_frame_for_target(domain: DefiningFunction, z0: np.ndarray) -> BoundaryFrame:
    """Frame at a boundary point given directly (psi(z0) must vanish)."""
    z0 = np.asarray(z0, dtype=complex)
    if abs(float(domain.value(z0))) > 1e-8 * max(domain.scale, 1.0):
        raise ValueError(f"psi(z0) = {float(domain.value(z0)):.3e} != 0; not a boundary point")
    return _frame_at_boundary(domain, z0, 0.0)


def normalized_frame_domain(domain: DefiningFunction, frame: BoundaryFrame, normalize: bool = True) -> TransformedDomain:
    """Domain in frame coordinates: boundary point at 0, complex normal along e_n.

    With ``normalize`` the defining function is rescaled so |d psi(0)| = 1,
    matching the normalization in which the half-space limit constants are
    stated.
    """
    g = domain.gradient(frame.base)
    c = float(np.linalg.norm(g)) if normalize else 1.0
    return TransformedDomain(domain, frame.rotation, frame.base, c)


def domain_from_config(cfg: dict) -> DefiningFunction:
    """Build a domain from a JSON-style dict: kind, n, parameters, collar."""
    kind = cfg.get("kind")
    collar = cfg.get("collar")
    if kind == "ball":
        return Ball(int(cfg["n"]), center=cfg.get("center"), radius=cfg.get("radius", 1.0), collar=collar)
    if kind == "ellipsoid":
        return Ellipsoid(cfg["weights"], collar=collar)
    if kind == "half_space":
        return HalfSpaceDomain([complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c) for c in cfg["coeffs"]], offset=cfg.get("offset", -1.0))
    if kind == "perturbed_ball":
        terms = [
            (complex(t["coef"][0], t["coef"][1]) if isinstance(t["coef"], (list, tuple)) else complex(t["coef"]), t["exponent"])
            for t in cfg.get("terms", [])
        ]
        return PerturbedBall(int(cfg["n"]), radius=cfg.get("radius", 1.0), terms=terms, collar=collar)
    raise ValueError(f"unknown domain kind {kind!r}")
