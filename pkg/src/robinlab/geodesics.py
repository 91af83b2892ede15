"""Geodesic flow for Kahler metrics, completeness probes, loop shortening.

The holomorphic-type geodesic equation closes on (z, zdot):

    zddot^nu + Gamma^nu_{a c} zdot^a zdot^c = 0,
    Gamma^nu_{a c} = g^{nu mubar} d g_{a mubar} / d z_c,

integrated with a classical fixed-step fourth-order scheme; the conserved
g-energy of the velocity is the monitored error proxy.  Closed geodesics are
approached by discrete curve shortening: gradient descent with backtracking on
the discrete loop energy, re-equidistributing the vertices every few accepted
steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from robinlab.domains import DefiningFunction, nearest_boundary_point
from robinlab.errors import CollapsedLoop, HitBoundaryFloor, LeftDomain, StepTooLarge
from robinlab.metric import MetricTensor, metric_from_jet
from robinlab.scaled import scaled_robin_jet


def christoffel(metric: MetricTensor) -> np.ndarray:
    """Gamma[nu, a, c] = g^{nu mubar} d g_{a mubar}/d z_c (symmetric in a, c)."""
    if metric.dg is None:
        raise ValueError("christoffel needs dg on the metric")
    ginv = metric.g_inv  # ginv[mu, nu] = g^{nu mubar}
    return np.einsum("mn,cam->nac", ginv, metric.dg)


class MetricField:
    """Interface: metric (with dg) and boundary distance at a point."""

    n: int

    def metric_at(self, z: np.ndarray) -> MetricTensor:
        raise NotImplementedError

    def boundary_distance(self, z: np.ndarray) -> float:
        raise NotImplementedError


class RobinMetricField(MetricField):
    """Lambda-metric of a domain, evaluated through scaled-domain jets.

    Exact and fast for balls and half-spaces; for general domains each
    evaluation refits a collocation engine, so trajectory work is practical
    only with exact engines or coarse settings.
    """

    def __init__(self, domain: DefiningFunction, settings=None, step_factor: float = 0.03):
        self.domain = domain
        self.n = domain.n
        self.settings = settings
        self.step_factor = step_factor

    def metric_at(self, z: np.ndarray) -> MetricTensor:
        jet_scaled = scaled_robin_jet(
            self.domain, z, orders=[(0, 0), (1, 0), (2, 0), (1, 1), (2, 1)], settings=self.settings, step_factor=self.step_factor
        )
        s = -float(self.domain.value(z))
        m = 2 * self.n - 2
        jet = jet_scaled.rescale(lambda k, l: s ** (-(m + k + l)))
        jet.base_point = np.asarray(z, dtype=complex)
        return metric_from_jet(jet)

    def boundary_distance(self, z: np.ndarray) -> float:
        return nearest_boundary_point(self.domain, z, best_effort=True).delta


class SurrogateMetricField(MetricField):
    """The boundary comparability surrogate as a metric field:

    |v|^2 = delta^{-2} |v_N|^2 + delta^{-1} L_psi(pi(z), v_H).

    Comparable to the Robin metric near the boundary; used for cheap
    completeness probes on domains without exact engines.
    """

    def __init__(self, domain: DefiningFunction):
        self.domain = domain
        self.n = domain.n

    def metric_at(self, z: np.ndarray) -> MetricTensor:
        frame = nearest_boundary_point(self.domain, z, best_effort=True)
        nu = frame.unit_complex_normal
        Q, _ = self.domain.hessian(frame.base)
        P_H = np.eye(self.n, dtype=complex) - np.outer(nu, np.conj(nu))
        g_N = np.outer(np.conj(nu), nu)
        g_H = np.einsum("ij,ia,jb->ab", Q, P_H, np.conj(P_H))
        g = frame.delta**-2 * g_N + frame.delta**-1 * g_H
        return MetricTensor(base_point=np.asarray(z, dtype=complex), g=g, dg=None, ddg=None)

    def boundary_distance(self, z: np.ndarray) -> float:
        return nearest_boundary_point(self.domain, z, best_effort=True).delta


class SyntheticAnnulusMetric(MetricField):
    """Product test metric on {r1 < |z1| < r2} x {|z2| < disc_radius}.

    g_{1 1bar} = (1 + (log|z1| - s0)^2)/|z1|^2 (a waisted flat cylinder with an
    isolated closed geodesic at |z1| = e^{s0} of length 2 pi), g_{2 2bar}
    constant.  Kahler, with analytic first derivatives.
    """

    def __init__(self, r1: float = 0.5, r2: float = 2.0, disc_radius: float = 1.0, g22: float = 1.0):
        self.r1, self.r2, self.disc_radius = r1, r2, disc_radius
        self.s0 = 0.5 * (math.log(r1) + math.log(r2))
        self.g22 = g22
        self.n = 2

    @property
    def core_radius(self) -> float:
        return math.exp(self.s0)

    @property
    def core_length(self) -> float:
        return 2.0 * math.pi

    def metric_at(self, z: np.ndarray) -> MetricTensor:
        z = np.asarray(z, dtype=complex)
        z1 = z[0]
        r2 = abs(z1) ** 2
        L = 0.5 * math.log(r2)
        u = L - self.s0
        g = np.array([[(1.0 + u * u) / r2, 0.0], [0.0, self.g22]], dtype=complex)
        dg = np.zeros((2, 2, 2), dtype=complex)
        # d g_{1 1bar} / d z_1 = (u - (1 + u^2)) / (z1^2 conj(z1))
        dg[0, 0, 0] = (u - (1.0 + u * u)) / (z1 * z1 * np.conj(z1))
        return MetricTensor(base_point=z, g=g, dg=dg, ddg=None)

    def boundary_distance(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=complex)
        return float(min(abs(z[0]) - self.r1, self.r2 - abs(z[0]), self.disc_radius - abs(z[1])))


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray  # (steps+1, n) complex
    velocities: np.ndarray
    energies: np.ndarray

    @property
    def energy_drift(self) -> float:
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / abs(e0))


def geodesic_shoot(
    field: MetricField,
    position: np.ndarray,
    velocity: np.ndarray,
    total_time: float,
    dt: float = 1e-3,
    delta_floor: float = 1e-6,
    drift_bound: float | None = None,
) -> Trajectory:
    """Integrate the geodesic ODE with fixed-step RK4, monitoring g-energy."""
    z = np.asarray(position, dtype=complex).copy()
    v = np.asarray(velocity, dtype=complex).copy()

    def accel(zz, vv):
        gamma = christoffel(field.metric_at(zz))
        return -np.einsum("nac,a,c->n", gamma, vv, vv)

    steps = int(round(total_time / dt))
    times = np.zeros(steps + 1)
    pos = np.zeros((steps + 1, len(z)), dtype=complex)
    vel = np.zeros_like(pos)
    ener = np.zeros(steps + 1)
    pos[0], vel[0] = z, v
    ener[0] = field.metric_at(z).norm_sq(v)
    for k in range(steps):
        if field.boundary_distance(z) < delta_floor:
            raise LeftDomain(f"trajectory reached the boundary floor at t = {k * dt:.4g}")
        k1z, k1v = v, accel(z, v)
        k2z, k2v = v + 0.5 * dt * k1v, accel(z + 0.5 * dt * k1z, v + 0.5 * dt * k1v)
        k3z, k3v = v + 0.5 * dt * k2v, accel(z + 0.5 * dt * k2z, v + 0.5 * dt * k2v)
        k4z, k4v = v + dt * k3v, accel(z + dt * k3z, v + dt * k3v)
        z = z + dt / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        times[k + 1] = (k + 1) * dt
        pos[k + 1], vel[k + 1] = z, v
        ener[k + 1] = field.metric_at(z).norm_sq(v)
        if drift_bound is not None and abs(ener[k + 1] - ener[0]) / abs(ener[0]) > drift_bound:
            raise StepTooLarge(f"energy drift exceeded {drift_bound:.2e} at t = {(k + 1) * dt:.4g}")
    return Trajectory(times, pos, vel, ener)


def segment_g_length(field: MetricField, start: np.ndarray, end: np.ndarray, panels: int = 64) -> float:
    """g-length of the straight segment, composite 4-point Gauss-Legendre."""
    start = np.asarray(start, dtype=complex)
    end = np.asarray(end, dtype=complex)
    x, w = np.polynomial.legendre.leggauss(4)
    total = 0.0
    for k in range(panels):
        a, b = k / panels, (k + 1) / panels
        t = 0.5 * (b - a) * x + 0.5 * (a + b)
        wt = 0.5 * (b - a) * w
        for ti, wi in zip(t, wt):
            z = start + ti * (end - start)
            total += wi * math.sqrt(max(field.metric_at(z).norm_sq(end - start), 0.0))
    return total


@dataclass
class CompletenessProbe:
    deltas: np.ndarray
    lengths: np.ndarray
    slope: float  # d length / d log(1/delta)


def completeness_probe(
    field: MetricField,
    anchor: np.ndarray,
    boundary_point: np.ndarray,
    delta_floor: float = 1e-3,
    levels: int = 6,
    panels_per_level: int = 24,
) -> CompletenessProbe:
    """g-length of a straight ray toward the boundary, truncated at delta levels.

    The length should grow at least like c log(1/delta); the report carries the
    regression slope against log(1/delta).
    """
    anchor = np.asarray(anchor, dtype=complex)
    bp = np.asarray(boundary_point, dtype=complex)
    direction = bp - anchor
    d_anchor = field.boundary_distance(anchor)
    deltas = d_anchor * (delta_floor / d_anchor) ** (np.arange(1, levels + 1) / levels)
    lengths = []
    total = 0.0
    prev = anchor
    for d in deltas:
        # Endpoint at boundary distance d along the ray, located by bisection.
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if field.boundary_distance(anchor + mid * direction) > d:
                lo = mid
            else:
                hi = mid
        endpoint = anchor + lo * direction
        total += segment_g_length(field, prev, endpoint, panels=panels_per_level)
        lengths.append(total)
        prev = endpoint
    lengths = np.array(lengths)
    slope = float(np.polyfit(np.log(1.0 / deltas), lengths, 1)[0])
    return CompletenessProbe(deltas=deltas, lengths=lengths, slope=slope)


@dataclass
class LoopDiscretization:
    """Closed polygon of m >= 16 interior points with its discrete g-energy."""

    points: np.ndarray  # (m, n) complex
    homotopy_tag: str = ""

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def diameter(self) -> float:
        pts = self.points
        return float(np.max(np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)))


def loop_energy_and_gradient(field: MetricField, pts: np.ndarray) -> tuple[float, np.ndarray]:
    """Discrete energy m * sum_i |d_i|^2_{g(mid_i)} and its Wirtinger gradient.

    Descent steps use z <- z - step * conj(dE/dz); the gradient accounts for
    both endpoint motion and the metric variation dg at segment midpoints.
    """
    m = pts.shape[0]
    nxt = np.roll(pts, -1, axis=0)
    mids = 0.5 * (pts + nxt)
    diffs = nxt - pts
    energy = 0.0
    grad = np.zeros_like(pts)
    for i in range(m):
        met = field.metric_at(mids[i])
        g, dg = met.g, met.dg
        d = diffs[i]
        energy += float(np.real(np.einsum("ab,a,b->", g, d, np.conj(d))))
        # dE_i/dz at the two endpoints (holomorphic Wirtinger derivative).
        gd = g @ np.conj(d)  # sum_b g_{a b} conj(d_b), index a
        dg_term = 0.5 * np.einsum("cab,a,b->c", dg, d, np.conj(d)) if dg is not None else 0.0
        grad[i] += -gd + dg_term
        grad[(i + 1) % m] += gd + dg_term
    return m * energy, m * grad


def _resample_loop(field: MetricField, pts: np.ndarray) -> np.ndarray:
    """Redistribute vertices to equal g-arclength along the polygon."""
    m = pts.shape[0]
    nxt = np.roll(pts, -1, axis=0)
    mids = 0.5 * (pts + nxt)
    seglen = np.array(
        [math.sqrt(max(field.metric_at(mids[i]).norm_sq(nxt[i] - pts[i]), 1e-300)) for i in range(m)]
    )
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    total = cum[-1]
    targets = np.arange(m) * total / m
    out = np.empty_like(pts)
    for j, t in enumerate(targets):
        i = int(np.searchsorted(cum, t, side="right") - 1)
        i = min(i, m - 1)
        frac = (t - cum[i]) / max(seglen[i], 1e-300)
        out[j] = pts[i] + frac * (nxt[i] - pts[i])
    return out


@dataclass
class ShorteningResult:
    loop: LoopDiscretization
    energies: list[float]
    status: str  # converged | collapsed | hit_floor | budget
    stationarity: float
    g_length: float


def shorten_loop(
    field: MetricField,
    loop: LoopDiscretization,
    max_steps: int = 2000,
    step0: float = 0.05,
    delta_floor: float = 1e-4,
    collapse_diameter: float = 1e-3,
    resample_every: int = 10,
    grad_tol: float = 1e-8,
    strict: bool = True,
) -> ShorteningResult:
    """Gradient descent with backtracking on the discrete loop energy.

    Energy never increases on accepted steps; vertices are re-equidistributed
    every ``resample_every`` accepted steps.  Contractible loops collapse
    (raised as :class:`CollapsedLoop` when ``strict``); loops pressed into the
    boundary floor raise :class:`HitBoundaryFloor`.
    """
    pts = loop.points.astype(complex).copy()
    energies = []
    status = "budget"
    E, grad = loop_energy_and_gradient(field, pts)
    energies.append(E)
    step = step0
    accepted = 0
    for _ in range(max_steps):
        if LoopDiscretization(pts).diameter() < collapse_diameter:
            status = "collapsed"
            break
        if min(field.boundary_distance(p) for p in pts) < delta_floor:
            status = "hit_floor"
            break
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < grad_tol:
            status = "converged"
            break
        trial_step = step
        for _ in range(40):
            trial = pts - trial_step * np.conj(grad)
            E_new, grad_new = loop_energy_and_gradient(field, trial)
            if E_new < E:
                break
            trial_step *= 0.5
        else:
            status = "converged"  # no descent direction at floating-point resolution
            break
        pts, E, grad = trial, E_new, grad_new
        energies.append(E)
        step = min(trial_step * 2.0, step0)
        accepted += 1
        if accepted % resample_every == 0:
            pts = _resample_loop(field, pts)
            E, grad = loop_energy_and_gradient(field, pts)
    m = pts.shape[0]
    nxt = np.roll(pts, -1, axis=0)
    mids = 0.5 * (pts + nxt)
    length = float(
        sum(math.sqrt(max(field.metric_at(mids[i]).norm_sq(nxt[i] - pts[i]), 0.0)) for i in range(m))
    )
    result = ShorteningResult(
        loop=LoopDiscretization(pts, loop.homotopy_tag),
        energies=energies,
        status=status,
        stationarity=float(np.max(np.abs(grad))),
        g_length=length,
    )
    if strict and status == "collapsed":
        raise CollapsedLoop(f"loop collapsed (diameter < {collapse_diameter}); energy fell to {E:.3e}")
    if strict and status == "hit_floor":
        raise HitBoundaryFloor(f"loop point reached the boundary floor {delta_floor}")
    return result
