"""The Kahler metric with potential log(-Lambda): tensor, curvature, eta-form.

Everything is assembled from a :class:`~robinlab.jets.PotentialJet` of the
Robin function by the rational expressions in Lambda-derivatives, printed
verbatim rather than re-derived:

    g_{a bbar}        = L_{a bbar}/L - L_a L_bbar / L^2
    d g_{a bbar}/dz_c = L_{a bbar c}/L - (L_{a bbar} L_c + L_{a c} L_bbar
                        + L_{bbar c} L_a)/L^2 + 2 L_a L_bbar L_c / L^3

and the order-four expansion for d^2 g_{a bbar}/dz_c dzbar_d.  The curvature
tensor is

    R_{a bbar c dbar} = -d^2 g_{a bbar}/dz_c dzbar_d
                        + g^{nu mubar} (d g_{a mubar}/dz_c)(d g_{nu bbar}/dzbar_d),

and the holomorphic sectional curvature is evaluated on unit-g-norm vectors,
which makes it a degree-zero function of the direction (the normalization the
boundary limits are stated in).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from robinlab.errors import DegenerateMetric, SingularMetric, SingularPotential, ZeroVector
from robinlab.jets import PotentialJet


@dataclass
class MetricTensor:
    """Metric data at a point: g, first and (optionally) second derivatives.

    Index conventions: ``g[a, b] = g_{a bbar}``; ``dg[c, a, b] = d g_{a bbar} / d z_c``;
    ``ddg[c, d, a, b] = d^2 g_{a bbar} / d z_c d zbar_d``.
    """

    base_point: np.ndarray | None
    g: np.ndarray
    dg: np.ndarray | None = None
    ddg: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def g_inv(self) -> np.ndarray:
        try:
            return np.linalg.inv(self.g)
        except np.linalg.LinAlgError as exc:
            raise SingularMetric("metric tensor is not invertible") from exc

    def norm_sq(self, v: np.ndarray) -> float:
        """|v|_g^2 = sum g_{a bbar} v^a conj(v^b) (no extra factor 2)."""
        v = np.asarray(v, dtype=complex)
        return float(np.real(np.einsum("ab,a,b->", self.g, v, np.conj(v))))

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.g - self.g.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.g + self.g.conj().T))[0])


def metric_from_jet(jet: PotentialJet) -> MetricTensor:
    """Assemble g, dg, ddg from a Robin-function jet (orders as available)."""
    L = jet.tensor(0, 0)
    lam = complex(L)
    if abs(lam) < 1e-300:
        raise SingularPotential("|Lambda| too small")
    La = jet.tensor(1, 0)
    Lab = jet.tensor(1, 1)  # [a, b] = L_{a bbar}
    Lc = np.conj(La)
    g = Lab / lam - np.einsum("a,b->ab", La, Lc) / lam**2

    dg = None
    ddg = None
    if jet.available(2, 1) and jet.available(2, 0):
        T21 = jet.tensor(2, 1)  # [a, c, b] = L_{a c bbar} (symmetric in a, c)
        T20 = jet.tensor(2, 0)
        dg = (
            np.einsum("acb->cab", T21) / lam
            - (
                np.einsum("ab,c->cab", Lab, La)
                + np.einsum("ac,b->cab", T20, Lc)
                + np.einsum("cb,a->cab", Lab, La)
            )
            / lam**2
            + 2.0 * np.einsum("a,b,c->cab", La, Lc, La) / lam**3
        )
        if jet.available(2, 2):
            T22 = jet.tensor(2, 2)  # [a, c, b, d] = L_{a c bbar dbar}
            T12 = np.conj(np.einsum("bda->abd", T21))  # [a, b, d] = L_{a bbar dbar}
            ddg = (
                np.einsum("acbd->cdab", T22) / lam
                - (
                    np.einsum("acb,d->cdab", T21, Lc)
                    + np.einsum("abd,c->cdab", T12, La)
                    + np.einsum("acd,b->cdab", T21, Lc)
                    + np.einsum("cbd,a->cdab", T12, La)
                )
                / lam**2
                - (
                    np.einsum("ab,cd->cdab", Lab, Lab)
                    + np.einsum("ac,bd->cdab", T20, np.conj(T20))
                    + np.einsum("ad,cb->cdab", Lab, Lab)
                )
                / lam**2
                + 2.0
                * (
                    np.einsum("ab,c,d->cdab", Lab, La, Lc)
                    + np.einsum("ac,b,d->cdab", T20, Lc, Lc)
                    + np.einsum("cb,a,d->cdab", Lab, La, Lc)
                    + np.einsum("ad,b,c->cdab", Lab, Lc, La)
                    + np.einsum("bd,a,c->cdab", np.conj(T20), La, La)
                    + np.einsum("cd,a,b->cdab", Lab, La, Lc)
                )
                / lam**3
                - 6.0 * np.einsum("a,b,c,d->cdab", La, Lc, La, Lc) / lam**4
            )
    return MetricTensor(base_point=jet.base_point, g=g, dg=dg, ddg=ddg)


def curvature_tensor(metric: MetricTensor) -> np.ndarray:
    """R_{a bbar c dbar}, indexed [a, b, c, d]."""
    if metric.dg is None or metric.ddg is None:
        raise ValueError("curvature needs dg and ddg on the metric")
    ginv = metric.g_inv  # ginv[mu, nu] = g^{nu mubar}
    quad = np.einsum("mn,cam,dbn->abcd", ginv, metric.dg, np.conj(metric.dg))
    return -np.einsum("cdab->abcd", metric.ddg) + quad


def sectional_curvature(metric: MetricTensor, v: np.ndarray) -> float:
    """Holomorphic sectional curvature along v, evaluated on v/|v|_g.

    Degree-zero homogeneous by construction; on the unit vector the printed
    quotient has denominator one.
    """
    v = np.asarray(v, dtype=complex)
    if np.linalg.norm(v) == 0.0:
        raise ZeroVector("direction must be nonzero")
    nrm = metric.norm_sq(v)
    if nrm <= 0.0:
        raise DegenerateMetric(f"|v|_g^2 = {nrm:.3e} <= 0")
    u = v / np.sqrt(nrm)
    R = curvature_tensor(metric)
    val = np.einsum("abcd,a,b,c,d->", R, u, np.conj(u), u, np.conj(u))
    return float(np.real(val))


@dataclass(frozen=True)
class CurvatureDecomposition:
    """The two terms of the scaled-frame curvature expression along e_n."""

    first_term: float  # -(d^2 g_{n nbar}/dz_n dzbar_n) / g_{n nbar}^2
    second_term: float  # g^{b abar} dg_{n abar}/dz_n dg_{b nbar}/dzbar_n / g_{n nbar}^2

    @property
    def total(self) -> float:
        return self.first_term + self.second_term


def curvature_decomposition(metric: MetricTensor) -> CurvatureDecomposition:
    """Split R(z, e_n) into its second-derivative and inverse-metric terms.

    Matches the sectional curvature along e_n once e_n is g-normalized (the
    frame normal direction after the boundary rotation).
    """
    if metric.dg is None or metric.ddg is None:
        raise ValueError("decomposition needs dg and ddg on the metric")
    nidx = metric.n - 1
    gnn = float(np.real(metric.g[nidx, nidx]))
    first = -float(np.real(metric.ddg[nidx, nidx, nidx, nidx])) / gnn**2
    ginv = metric.g_inv
    A = metric.dg[nidx, nidx, :]  # dg_{n abar}/dz_n over a
    second = float(np.real(np.einsum("ab,a,b->", ginv, A, np.conj(A)))) / gnn**2
    return CurvatureDecomposition(first_term=first, second_term=second)


@dataclass(frozen=True)
class EtaReport:
    """Primitive 1-form eta evaluated two ways, with the ratio |eta|^2/ds^2."""

    eta_direct: complex
    eta_decomposed: complex
    ratio_direct: float
    ratio_decomposed: float
    metric_norm: float

    @property
    def route_gap(self) -> float:
        return abs(self.eta_direct - self.eta_decomposed)


def lambda_jet_data(jet: PotentialJet, psi: float, psi_grad: np.ndarray, psi_hess_mixed: np.ndarray):
    """(lambda, lambda_a, lambda_{a bbar}) from the Lambda-jet and psi data.

    Product rule on lambda = Lambda psi^{2n-2}; used when no independent
    closed form for lambda's derivatives is available.
    """
    n = jet.n
    m = 2 * n - 2
    L = jet.value
    La = jet.tensor(1, 0)
    Lab = jet.tensor(1, 1)
    pg = np.asarray(psi_grad, dtype=complex)
    lam = L * psi**m
    lam_a = La * psi**m + m * L * psi ** (m - 1) * pg
    lam_ab = (
        Lab * psi**m
        + m * psi ** (m - 1) * (np.einsum("a,b->ab", La, np.conj(pg)) + np.einsum("a,b->ab", pg, np.conj(La)))
        + m * (m - 1) * L * psi ** (m - 2) * np.einsum("a,b->ab", pg, np.conj(pg))
        + m * L * psi ** (m - 1) * np.asarray(psi_hess_mixed, dtype=complex)
    )
    return lam, lam_a, lam_ab


def eta_form(
    jet: PotentialJet,
    psi: float,
    psi_grad: np.ndarray,
    psi_hess_mixed: np.ndarray,
    v: np.ndarray,
    lam_data: tuple[float, np.ndarray, np.ndarray] | None = None,
) -> EtaReport:
    """eta(v) = -i sum_a dlog(-Lambda)/dz_a v^a and the ratio |eta|^2 / ds^2(v, v).

    Two routes: directly from the Lambda-jet, and through the decomposition
    dlog(-Lambda)/dz_a = lambda^{-1} lambda_a - 2(n-1) psi^{-1} psi_a with the
    matching metric expansion.  ``lam_data`` supplies closed-form lambda
    derivatives when available (e.g. constants on the ball); otherwise they
    are derived from the jet by the product rule.
    """
    v = np.asarray(v, dtype=complex)
    if np.linalg.norm(v) == 0.0:
        raise ZeroVector("direction must be nonzero")
    n = jet.n
    L = jet.value
    La = jet.tensor(1, 0)
    # Direct route.
    eta_direct = -1j * complex(np.sum(La / L * v))
    metric = metric_from_jet(jet)
    ds2 = metric.norm_sq(v)
    if ds2 <= 0.0:
        raise DegenerateMetric(f"ds^2(v, v) = {ds2:.3e} <= 0")
    # Decomposition route.
    lam, lam_a, lam_ab = lam_data if lam_data is not None else lambda_jet_data(jet, psi, psi_grad, psi_hess_mixed)
    pg = np.asarray(psi_grad, dtype=complex)
    v_dl = complex(np.sum(v * lam_a))  # <v, dbar lambda>
    v_dp = complex(np.sum(v * pg))
    eta_dec = -1j * (v_dl / lam - 2.0 * (n - 1) * v_dp / psi)
    levi_lam = float(np.real(np.einsum("ab,a,b->", lam_ab, v, np.conj(v))))
    levi_psi = float(np.real(np.einsum("ab,a,b->", np.asarray(psi_hess_mixed, dtype=complex), v, np.conj(v))))
    ds2_dec = (
        levi_lam / lam
        - abs(v_dl) ** 2 / lam**2
        + 2.0 * (n - 1) * abs(v_dp) ** 2 / psi**2
        - 2.0 * (n - 1) * levi_psi / psi
    )
    return EtaReport(
        eta_direct=eta_direct,
        eta_decomposed=eta_dec,
        ratio_direct=abs(eta_direct) ** 2 / ds2,
        ratio_decomposed=abs(eta_dec) ** 2 / ds2_dec if ds2_dec > 0 else float("inf"),
        metric_norm=ds2,
    )


@dataclass(frozen=True)
class PshReport:
    min_eigenvalue: float
    argmin_point: np.ndarray | None
    count: int
    positive: bool


def psh_check(metrics: list[MetricTensor]) -> PshReport:
    """Minimum metric eigenvalue over sample points (strict psh iff positive)."""
    best = float("inf")
    argmin = None
    for m in metrics:
        e = m.min_eigenvalue()
        if e < best:
            best = e
            argmin = m.base_point
    return PshReport(min_eigenvalue=best, argmin_point=argmin, count=len(metrics), positive=best > 0.0)
