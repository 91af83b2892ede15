"""Boundary-approach experiments: scaled derivative limits, curvature limits,
metric-component asymptotics, and comparability scans.

All scaled quantities are evaluated through the family D(p): the jet of the
Robin function of D(p_nu) at the origin equals
(-1)^{|A|+|B|} D^{A Bbar} Lambda(p_nu) psi(p_nu)^{2n-2+|A|+|B|}, and the
holomorphic sectional curvature at p_nu along the complex normal equals the
curvature of the D(p_nu)-metric at 0 along e_n (in the rotated frame), since
the metric's potential shifts by a constant under the affine scaling map.
Limits are estimated by iterated Aitken extrapolation over the geometric
approach sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from robinlab.domains import (
    BoundaryFrame,
    DefiningFunction,
    boundary_frame_for_target,
    levi_form,
    nearest_boundary_point,
    normalized_frame_domain,
    split_normal_tangential,
)
from robinlab.engines import CollocationSettings, half_space_robin_jet, make_engine
from robinlab.errors import PoleOnBoundary
from robinlab.jets import PotentialJet, wirtinger_fd_jet
from robinlab.metric import (
    curvature_decomposition,
    eta_form,
    metric_from_jet,
    sectional_curvature,
)
from robinlab.quadrature import gauss_legendre, sphere_area, sphere_polar_rule
from robinlab.scaled import ScaledDomain, scaled_engine, scaled_robin_jet, variation_first, variation_second
from robinlab.wirtinger import to_complex, to_real


def scaling_map(p: np.ndarray, z: np.ndarray, psi_p: float) -> np.ndarray:
    """T(p, z) = (z - p)/(-psi(p)); requires psi(p) < 0."""
    if psi_p >= 0:
        raise PoleOnBoundary(f"psi(p) = {psi_p:.3g} >= 0")
    return (np.asarray(z, dtype=complex) - np.asarray(p, dtype=complex)) / (-psi_p)


def aitken_limit(values: np.ndarray) -> float:
    """Iterated Aitken delta-squared extrapolation of a scalar sequence."""
    x = np.asarray(values, dtype=float)
    while len(x) >= 3:
        d1 = x[1:] - x[:-1]
        d2 = x[2:] - 2.0 * x[1:-1] + x[:-2]
        if np.any(np.abs(d2) < 1e-300):
            return float(x[-1])
        y = x[:-2] - d1[:-1] ** 2 / d2
        if not np.all(np.isfinite(y)):
            return float(x[-1])
        x = y
    return float(x[-1])


def convergence_order(deltas: np.ndarray, values: np.ndarray, limit: float) -> float:
    """Empirical order: slope of log|value - limit| against log delta."""
    err = np.abs(np.asarray(values, dtype=float) - limit)
    mask = err > 1e-14 * max(1.0, abs(limit))
    if np.sum(mask) < 2:
        return math.inf  # converged to machine precision immediately
    return float(np.polyfit(np.log(np.asarray(deltas)[mask]), np.log(err[mask]), 1)[0])


@dataclass
class ApproachSequence:
    """Points p_nu -> z0 on a fixed path, with their boundary frames."""

    domain: DefiningFunction
    target: np.ndarray
    points: list[np.ndarray]
    frames: list[BoundaryFrame]
    path: str
    theta_deg: float

    @property
    def deltas(self) -> np.ndarray:
        return np.array([f.delta for f in self.frames])

    @staticmethod
    def build(
        domain: DefiningFunction,
        z0: np.ndarray,
        path: str = "normal",
        theta_deg: float = 0.0,
        delta0: float = 0.05,
        ratio: float = 0.5,
        count: int = 8,
        tangent_index: int = 0,
    ) -> "ApproachSequence":
        """Geometric approach sequence along the inner normal or an oblique ray.

        Oblique rays tilt by theta_deg toward a real tangent direction at z0
        (taken from the rotated frame's tangent basis).
        """
        z0 = np.asarray(z0, dtype=complex)
        frame0 = boundary_frame_for_target(domain, z0)
        inward = -to_real(frame0.unit_complex_normal)
        theta = math.radians(theta_deg if path == "oblique" else 0.0)
        tangent_c = np.conj(frame0.rotation[tangent_index, :])  # maps to e_{tangent_index}
        choices = [to_real(tangent_c), to_real(1j * tangent_c)]
        tangent = choices[0]
        direction = to_complex(math.cos(theta) * inward + math.sin(theta) * tangent)
        points, frames = [], []
        for nu in range(count):
            d = delta0 * ratio**nu
            p = z0 + d * direction
            fr = nearest_boundary_point(domain, p, best_effort=True)
            points.append(p)
            frames.append(fr)
        deltas = [f.delta for f in frames]
        if not all(deltas[i + 1] < deltas[i] for i in range(len(deltas) - 1)):
            raise ValueError("approach sequence deltas are not strictly decreasing")
        return ApproachSequence(domain, z0, points, frames, path, theta_deg)


@dataclass
class AsymptoticsReport:
    """Per-nu rows, the predicted limit, and the extrapolated estimate."""

    name: str
    target: float
    rows: list[dict] = field(default_factory=list)
    estimated_limit: float = math.nan
    order: float = math.nan
    tolerance: float = math.nan
    passed: bool = False

    def finalize(self, value_key: str, tolerance: float) -> "AsymptoticsReport":
        deltas = np.array([r["delta"] for r in self.rows])
        vals = np.array([r[value_key] for r in self.rows])
        self.estimated_limit = aitken_limit(vals)
        self.order = convergence_order(deltas, vals, self.estimated_limit)
        self.tolerance = tolerance
        self.passed = bool(abs(self.estimated_limit - self.target) <= tolerance)
        return self

    def summary(self) -> dict:
        return {
            "name": self.name,
            "target": self.target,
            "estimated_limit": self.estimated_limit,
            "order": self.order,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _frame_domain_and_point(seq: ApproachSequence, nu: int, normalize: bool = True):
    fdom = normalized_frame_domain(seq.domain, seq.frames[nu], normalize=normalize)
    return fdom, fdom.pushforward(seq.points[nu])


def thm12_check(
    domain: DefiningFunction,
    seq: ApproachSequence,
    holo: tuple[int, ...],
    anti: tuple[int, ...],
    settings: CollocationSettings | None = None,
    tolerance: float = 0.05,
    step_factor: float = 0.03,
) -> AsymptoticsReport:
    """Scaled derivative limit: D^{A Bbar} of the D(p_nu) Robin function at 0
    against the half-space target built from psi's gradient at the target point.

    Works in the original coordinates (the theorem is frame-free); the target
    is the corresponding derivative of the Robin function of
    {2 Re sum psi_a(z0) w_a - 1 < 0} at the origin.
    """
    k, l = len(holo), len(anti)
    target_jet = half_space_robin_jet(domain.gradient(seq.target), order=k + l)
    target = target_jet.entry(holo, anti)
    name = f"thm12_A{''.join(map(str, holo))}_B{''.join(map(str, anti))}"
    report = AsymptoticsReport(name=name, target=float(np.real(target)))
    orders = sorted({(k, l), (max(k, l), min(k, l)), (0, 0)})
    for nu, p in enumerate(seq.points):
        jet = scaled_robin_jet(domain, p, orders=orders, settings=settings, step_factor=step_factor)
        val = jet.entry(holo, anti)
        report.rows.append(
            {
                "nu": nu,
                "delta": seq.frames[nu].delta,
                "D_AB_Lambda_scaled_re": float(np.real(val)),
                "D_AB_Lambda_scaled_im": float(np.imag(val)),
                "target_re": float(np.real(target)),
                "error": float(abs(val - target)),
            }
        )
    return report.finalize("D_AB_Lambda_scaled_re", tolerance)


def thm12_suite(
    domain: DefiningFunction,
    seq: ApproachSequence,
    patterns: list[tuple[tuple[int, ...], tuple[int, ...]]],
    settings: CollocationSettings | None = None,
    tolerance: float = 0.05,
    step_factor: float = 0.03,
) -> list[AsymptoticsReport]:
    """Several scaled-derivative limits sharing one engine/jet per sequence point."""
    target_jet = half_space_robin_jet(domain.gradient(seq.target), order=4)
    orders = sorted({(max(len(a), len(b)), min(len(a), len(b))) for a, b in patterns} | {(0, 0)})
    reports = []
    for holo, anti in patterns:
        target = target_jet.entry(holo, anti)
        name = f"thm12_A{''.join(map(str, holo))}_B{''.join(map(str, anti))}"
        reports.append(AsymptoticsReport(name=name, target=float(np.real(target))))
    for nu, p in enumerate(seq.points):
        _, engine = scaled_engine(domain, p, settings=settings)
        jet = scaled_robin_jet(domain, p, orders=orders, settings=settings, engine=engine, step_factor=step_factor)
        for (holo, anti), report in zip(patterns, reports):
            val = jet.entry(holo, anti)
            target = target_jet.entry(holo, anti)
            report.rows.append(
                {
                    "nu": nu,
                    "delta": seq.frames[nu].delta,
                    "D_AB_Lambda_scaled_re": float(np.real(val)),
                    "D_AB_Lambda_scaled_im": float(np.imag(val)),
                    "target_re": float(np.real(target)),
                    "error": float(abs(val - target)),
                }
            )
    for (holo, anti), report in zip(patterns, reports):
        report.finalize("D_AB_Lambda_scaled_re", tolerance * max(abs(report.target), 1.0))
    return reports


def lambda_value(domain: DefiningFunction, p: np.ndarray, settings: CollocationSettings | None = None) -> float:
    """lambda(p) as the Robin constant of D(p) at the origin."""
    _, engine = scaled_engine(domain, p, settings=settings)
    return engine.robin()


def lambda_derivatives_fd(
    domain: DefiningFunction,
    p: np.ndarray,
    gamma: int,
    settings: CollocationSettings | None = None,
    step: float | None = None,
) -> tuple[complex, float]:
    """(d lambda/dp_gamma, d^2 lambda/dp_gamma dpbar_gamma) by central FD of lambda.

    The step keeps the stencil strictly inside the domain.
    """
    frame = nearest_boundary_point(domain, p, best_effort=True)
    h = step if step is not None else min(0.25 * frame.delta, 0.02 * max(domain.scale, 1.0))
    jet = wirtinger_fd_jet(lambda q: lambda_value(domain, q, settings), p, domain.n, [(0, 0), (1, 0), (1, 1)], h=h, richardson=False)
    first = jet.tensor(1, 0)[gamma]
    second = float(np.real(jet.tensor(1, 1)[gamma, gamma]))
    return complex(first), second


def half_space_variation_first(
    domain: DefiningFunction,
    p0: np.ndarray,
    gamma: int,
    radial_order: int = 40,
    sphere_order: int = 12,
) -> float:
    """d lambda/dp_gamma at a boundary point via the half-space variation integral.

    D(p0) is the half-space {2 Re sum psi_a(p0) w_a - 1 < 0}; its Green
    function (pole 0) is the mirror difference, and k1 is evaluated from the
    jointly smooth family defining function at p = p0, where the t-integrands
    collapse to closed forms.  The hyperplane is integrated in polar
    coordinates with an algebraic map to infinity (integrand decays like
    |w|^{2-4n} * |w|^2).
    """
    n = domain.n
    if n != 2:
        raise NotImplementedError("half-space variation integral implemented for n = 2")
    scaled = ScaledDomain(domain, p0)
    engine = make_engine(scaled.view(), np.zeros(n, dtype=complex))
    coeffs = domain.gradient(p0)
    cnorm2 = float(np.sum(np.abs(coeffs) ** 2))
    foot = np.conj(coeffs) / (2.0 * cnorm2)
    normal_dir = to_real(np.conj(coeffs)) / math.sqrt(cnorm2)
    basis = []
    for k in range(2 * n):
        e = np.zeros(2 * n)
        e[k] = 1.0
        e -= np.dot(e, normal_dir) * normal_dir
        for b in basis:
            e -= np.dot(e, b) * b
        nrm = np.linalg.norm(e)
        if nrm > 1e-10:
            basis.append(e / nrm)
    basis = np.stack(basis[: 2 * n - 1])  # (2n-1, 2n) tangent frame of the plane
    d0 = 1.0 / (2.0 * math.sqrt(cnorm2))
    t, wt = gauss_legendre(0.0, 1.0, radial_order)
    r = d0 * t / (1.0 - t)
    wr = wt * d0 / (1.0 - t) ** 2
    sph, wsph = sphere_polar_rule(2 * n - 2, sphere_order, 2 * sphere_order)
    disp = np.einsum("r,sk,km->rsm", r, sph, basis)  # (R, S, 2n) real displacements in the plane
    pts = foot[None, None, :] + to_complex(disp)
    w_flat = pts.reshape(-1, n)
    k1 = scaled.k1(w_flat, gamma)
    grad = engine.green_grad(w_flat)
    gnorm = np.linalg.norm(grad, axis=1)
    dgdn = np.sum((2.0 * grad.real) * normal_dir[None, 0::2], axis=1) + np.sum(
        (-2.0 * grad.imag) * normal_dir[None, 1::2], axis=1
    )
    meas = (wr[:, None] * (r ** (2 * n - 2))[:, None] * wsph[None, :]).reshape(-1)
    integral = float(np.sum(meas * k1 * gnorm * dgdn))
    return integral / (2.0 * (n - 1) * sphere_area(2 * n))


def thm13_check(
    domain: DefiningFunction,
    seq: ApproachSequence,
    gamma: int,
    settings: CollocationSettings | None = None,
    variation_settings: CollocationSettings | None = None,
    tolerance_rel: float = 1e-3,
) -> AsymptoticsReport:
    """Convergence of lambda's first/second derivatives along the sequence.

    Two independent routes at every point: central finite differences of
    lambda(p), and the boundary-integral variation formulas on D(p_nu).  The
    boundary target for the first derivative is the half-space variation
    integral at the target point.
    """
    target = half_space_variation_first(domain, seq.target, gamma) if domain.n == 2 else math.nan
    report = AsymptoticsReport(name=f"thm13_gamma{gamma}", target=float(np.real(target)))
    for nu, p in enumerate(seq.points):
        fd1, fd2 = lambda_derivatives_fd(domain, p, gamma, settings=settings)
        var1 = variation_first(domain, p, gamma, settings=variation_settings)
        var2, _ = variation_second(domain, p, gamma, settings=variation_settings)
        scale1 = max(abs(fd1), abs(var1), 1e-12)
        scale2 = max(abs(fd2), abs(var2), 1e-12)
        report.rows.append(
            {
                "nu": nu,
                "delta": seq.frames[nu].delta,
                "dlambda_dp_fd_re": float(np.real(fd1)),
                "dlambda_dp_fd_im": float(np.imag(fd1)),
                "dlambda_dp_var": float(var1),
                "d2lambda_dpdpbar_fd": fd2,
                "d2lambda_dpdpbar_var": var2,
                "first_gap_rel": float(abs(np.real(fd1) - var1) / scale1),
                "second_gap_rel": float(abs(fd2 - var2) / scale2),
            }
        )
    report.finalize("dlambda_dp_var", math.inf)
    report.tolerance = tolerance_rel
    gaps = [max(r["first_gap_rel"], r["second_gap_rel"]) for r in report.rows]
    report.passed = bool(max(gaps) <= tolerance_rel)
    return report


def metric_asymptotics_check(
    domain: DefiningFunction,
    seq: ApproachSequence,
    settings: CollocationSettings | None = None,
    tolerance: float = 0.05,
    step_factor: float = 0.03,
) -> list[AsymptoticsReport]:
    """Scaled metric-component limits in the normalized frame.

    Checks, with psi normalized so |d psi| = 1 at pi(p_nu):
      g_{a bbar} psi^2      -> (2n-2) psi_a psi_bbar          [entry (n, n)]
      dg_{n nbar}/dz_n psi^3 -> -2(2n-2)                      [via scaled -dg]
      d2g_{n nbar} psi^4    -> 6(2n-2)                        [via scaled ddg]
      g_{a bbar} psi        -> (2n-2)(C_a psi_bbar - psi_{a bbar}),  a < n
    where C_a = (psi_{a n} + psi_{a nbar})/2 at the boundary point.
    """
    n = domain.n
    m = 2 * n - 2
    nidx = n - 1
    rep_g2 = AsymptoticsReport(name="lemma_g_psi2_nn", target=float(m))
    rep_dg3 = AsymptoticsReport(name="lemma_dg_psi3_nnn", target=float(-2 * m))
    rep_ddg4 = AsymptoticsReport(name="lemma_ddg_psi4_nnnn", target=float(6 * m))
    rep_g1 = AsymptoticsReport(name="lemma_finer_g_psi_1n", target=math.nan)
    for nu, _ in enumerate(seq.points):
        fdom, p_f = _frame_domain_and_point(seq, nu)
        jet = scaled_robin_jet(fdom, p_f, settings=settings, step_factor=step_factor)
        metric = metric_from_jet(jet)
        s = -float(fdom.value(p_f))
        z0f = np.zeros(n, dtype=complex)
        g0 = fdom.gradient(z0f)
        Q0, P0 = fdom.hessian(z0f)
        # Scaled tensors are the lemma quantities up to the sign of psi powers.
        g_psi2 = metric.g  # = g psi^2 entrywise
        dg_psi3 = -metric.dg  # odd power of psi flips sign
        ddg_psi4 = metric.ddg
        g_psi = -metric.g / s
        delta = seq.frames[nu].delta
        rep_g2.rows.append(
            {
                "nu": nu,
                "delta": delta,
                "g_nn*psi^2": float(np.real(g_psi2[nidx, nidx])),
                "target": float(np.real(m * g0[nidx] * np.conj(g0[nidx]))),
                "max_err_full": float(np.max(np.abs(g_psi2 - m * np.einsum("a,b->ab", g0, np.conj(g0))))),
            }
        )
        rep_dg3.rows.append(
            {
                "nu": nu,
                "delta": delta,
                "dg_nnn*psi^3": float(np.real(dg_psi3[nidx, nidx, nidx])),
                "target": float(np.real(-2 * m * g0[nidx] * np.conj(g0[nidx]) * g0[nidx])),
            }
        )
        rep_ddg4.rows.append(
            {
                "nu": nu,
                "delta": delta,
                "ddg_nnnn*psi^4": float(np.real(ddg_psi4[nidx, nidx, nidx, nidx])),
                "target": float(6 * m * abs(g0[nidx]) ** 4),
            }
        )
        if n >= 2:
            a = 0
            C_a = 0.5 * (P0[a, nidx] + Q0[a, nidx])
            rep_g1.rows.append(
                {
                    "nu": nu,
                    "delta": delta,
                    "g_11*psi": float(np.real(g_psi[a, a])),
                    "target_11": float(np.real(m * (C_a * np.conj(g0[a]) - Q0[a, a]))),
                    "g_1n*psi_re": float(np.real(g_psi[a, nidx])),
                    "target_1n": float(np.real(m * (C_a * np.conj(g0[nidx]) - Q0[a, nidx]))),
                }
            )
    rep_g2.finalize("g_nn*psi^2", tolerance * abs(rep_g2.target))
    rep_dg3.finalize("dg_nnn*psi^3", tolerance * abs(rep_dg3.target))
    rep_ddg4.finalize("ddg_nnnn*psi^4", tolerance * abs(rep_ddg4.target))
    if rep_g1.rows:
        rep_g1.target = rep_g1.rows[-1]["target_11"]
        rep_g1.finalize("g_11*psi", tolerance * max(abs(rep_g1.target), 1.0))
    return [rep_g2, rep_dg3, rep_ddg4, rep_g1]


def curvature_limit_scan(
    domain: DefiningFunction,
    seq: ApproachSequence,
    settings: CollocationSettings | None = None,
    tolerance: float = 0.05,
    step_factor: float = 0.03,
) -> AsymptoticsReport:
    """R(p_nu, v_N(p_nu)) along the sequence, with the two-term decomposition.

    Evaluated as the curvature of the D(p_nu)-metric at the origin along e_n
    in the rotated frame (scale invariance of the normalized curvature), so
    the conditioning is uniform in delta.
    """
    n = domain.n
    target = -1.0 / (n - 1)
    report = AsymptoticsReport(name=f"thm11_{seq.path}{int(seq.theta_deg)}", target=target)
    e_n = np.zeros(n, dtype=complex)
    e_n[n - 1] = 1.0
    for nu, _ in enumerate(seq.points):
        fdom, p_f = _frame_domain_and_point(seq, nu)
        jet = scaled_robin_jet(fdom, p_f, settings=settings, step_factor=step_factor)
        metric = metric_from_jet(jet)
        R = sectional_curvature(metric, e_n)
        dec = curvature_decomposition(metric)
        report.rows.append(
            {
                "nu": nu,
                "delta": seq.frames[nu].delta,
                "R(z.v_N)": R,
                "first_term": dec.first_term,
                "second_term": dec.second_term,
                "target": target,
            }
        )
    return report.finalize("R(z.v_N)", tolerance)


def psi_ratio_check(
    domain: DefiningFunction,
    seq: ApproachSequence,
    alpha: int = 0,
    tolerance: float = 0.05,
) -> AsymptoticsReport:
    """psi_alpha(p_nu)/psi(p_nu) -> (psi_{alpha n}(0) + psi_{alpha nbar}(0))/2.

    Runs in the frame of the target point (normal approach), where the limit
    is read off psi's complex Hessian.  Engine-free.
    """
    frame0 = boundary_frame_for_target(domain, seq.target)
    fdom = normalized_frame_domain(domain, frame0)
    nidx = domain.n - 1
    z0f = np.zeros(domain.n, dtype=complex)
    Q0, P0 = fdom.hessian(z0f)
    target = 0.5 * (P0[alpha, nidx] + Q0[alpha, nidx])
    report = AsymptoticsReport(name=f"psi_ratio_alpha{alpha}", target=float(np.real(target)))
    for nu, p in enumerate(seq.points):
        p_f = fdom.pushforward(p)
        val = fdom.gradient(p_f)[alpha] / fdom.value(p_f)
        report.rows.append(
            {
                "nu": nu,
                "delta": seq.frames[nu].delta,
                "psi_a/psi_re": float(np.real(val)),
                "psi_a/psi_im": float(np.imag(val)),
                "target_re": float(np.real(target)),
            }
        )
    tol = tolerance * max(1.0, abs(report.target))
    return report.finalize("psi_a/psi_re", tol)


def det_ratio_check(
    domain: DefiningFunction,
    seq: ApproachSequence,
    settings: CollocationSettings | None = None,
    tolerance: float = 1e-6,
    step_factor: float = 0.03,
) -> AsymptoticsReport:
    """Robust determinant-ratio limits: g^{n nbar} g_{n nbar} -> 1 and
    g^{n nbar} psi^{-2} -> 1/(2n-2) in the normalized frame.

    The raw scaled determinant and cofactor are recorded (not asserted); their
    printed limit constants are inconsistent on the ball, while the ratios
    below are exact there.
    """
    n = domain.n
    nidx = n - 1
    report = AsymptoticsReport(name="det_ratio", target=1.0)
    for nu, _ in enumerate(seq.points):
        fdom, p_f = _frame_domain_and_point(seq, nu)
        jet = scaled_robin_jet(fdom, p_f, orders=[(0, 0), (1, 0), (1, 1)], settings=settings, step_factor=step_factor)
        metric = metric_from_jet(jet)
        s = -float(fdom.value(p_f))
        ginv = metric.g_inv
        det_scaled = float(np.real(np.linalg.det(metric.g)))
        minor = np.delete(np.delete(metric.g, nidx, axis=0), nidx, axis=1)
        det_minor = float(np.real(np.linalg.det(minor))) if n > 1 else 1.0
        report.rows.append(
            {
                "nu": nu,
                "delta": seq.frames[nu].delta,
                "ginv_nn*g_nn": float(np.real(ginv[nidx, nidx] * metric.g[nidx, nidx])),
                "ginv_nn/psi^2": float(np.real(ginv[nidx, nidx])),
                "det_psi_power_raw": float(det_scaled * (-1.0 if (n + 1) % 2 else 1.0) / s ** (n - 1)),
                "cofactor_psi_power_raw": float(det_minor * (-1.0 if (n - 1) % 2 else 1.0) / s ** (n - 1)),
            }
        )
    return report.finalize("ginv_nn*g_nn", tolerance)


def eta_ratio_check(
    domain: DefiningFunction,
    z: np.ndarray,
    v: np.ndarray,
    settings: CollocationSettings | None = None,
    lam_data=None,
):
    """|eta_z(v)|^2 / ds_z^2(v, v) through the scaled jet at z."""
    n = domain.n
    jet_scaled = scaled_robin_jet(domain, z, orders=[(0, 0), (1, 0), (1, 1)], settings=settings)
    s = -float(domain.value(z))
    jet = jet_scaled.rescale(lambda k, l: s ** (-(2 * n - 2 + k + l)))
    Q, _ = domain.hessian(z)
    return eta_form(jet, float(domain.value(z)), domain.gradient(z), Q, v, lam_data=lam_data)


@dataclass
class ComparabilityReport:
    ratios: np.ndarray
    min_ratio: float
    max_ratio: float
    rows: list[dict]

    def within(self, lo: float, hi: float) -> bool:
        return bool(self.min_ratio >= lo and self.max_ratio <= hi)


def comparability_check(
    domain: DefiningFunction,
    samples: int,
    seed: int = 0,
    delta_range: tuple[float, float] = (1e-3, 1e-1),
    settings: CollocationSettings | None = None,
) -> ComparabilityReport:
    """ds^2(v, v) against delta^{-2}|v_N|^2 + delta^{-1} L_psi(pi(z), v_H).

    Random collar points (log-uniform in delta along random inward normals)
    and random directions; reports the min/max ratio.
    """
    n = domain.n
    rng = np.random.default_rng(seed)
    from robinlab.domains import boundary_samples

    bpts = boundary_samples(domain, samples, rng)
    log_lo, log_hi = math.log(delta_range[0]), math.log(delta_range[1])
    rows = []
    ratios = []
    for w0 in bpts:
        d = math.exp(rng.uniform(log_lo, log_hi))
        g = domain.gradient(w0)
        nu_c = np.conj(g) / np.linalg.norm(g)
        z = w0 - d * nu_c
        frame = nearest_boundary_point(domain, z, best_effort=True)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        jet_scaled = scaled_robin_jet(domain, z, orders=[(0, 0), (1, 0), (1, 1)], settings=settings)
        metric_scaled = metric_from_jet(jet_scaled)
        s = -float(domain.value(z))
        ds2 = metric_scaled.norm_sq(v) / s**2
        v_H, v_N = split_normal_tangential(frame, v)
        surrogate = frame.delta**-2 * float(np.sum(np.abs(v_N) ** 2)) + frame.delta**-1 * levi_form(
            domain, frame.base, v_H
        )
        ratio = ds2 / surrogate
        ratios.append(ratio)
        rows.append({"delta": frame.delta, "ds2": ds2, "surrogate": surrogate, "ratio": ratio})
    ratios = np.array(ratios)
    return ComparabilityReport(ratios=ratios, min_ratio=float(ratios.min()), max_ratio=float(ratios.max()), rows=rows)
