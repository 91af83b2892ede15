"""Complex/real coordinate views and Wirtinger-derivative conventions.

The fixed index convention everywhere in this package is

    z_a = x_{2a} + i * x_{2a+1}        (0-based; spec convention z_a = x_{2a-1} + i x_{2a} in 1-based indexing)

so a point of C^n has a real view in R^{2n}.  For a real-valued function psi
with holomorphic gradient psi_a = d psi / d z_a and complex Hessians
psi_{a b} (symmetric) and psi_{a bbar} (Hermitian), the real gradient and real
Hessian follow from

    d/dx_{2a}   = d/dz_a + d/dzbar_a,
    d/dx_{2a+1} = i (d/dz_a - d/dzbar_a).
"""

from __future__ import annotations

import numpy as np


def to_real(z: np.ndarray) -> np.ndarray:
    """Real view of complex points; last axis doubles. z_a = x_{2a} + i x_{2a+1}."""
    z = np.asarray(z)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],), dtype=float)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_real`."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def real_gradient(holo_grad: np.ndarray) -> np.ndarray:
    """Real gradient of a real-valued function from its holomorphic gradient.

    For real psi, psi_abar = conj(psi_a), hence
    d psi/dx_{2a} = 2 Re psi_a and d psi/dx_{2a+1} = -2 Im psi_a.
    """
    g = np.asarray(holo_grad)
    out = np.empty(g.shape[:-1] + (2 * g.shape[-1],), dtype=float)
    out[..., 0::2] = 2.0 * g.real
    out[..., 1::2] = -2.0 * g.imag
    return out


def real_hessian(hess_mixed: np.ndarray, hess_holo: np.ndarray) -> np.ndarray:
    """Real 2n x 2n Hessian of a real function from psi_{a bbar} and psi_{a b}.

    Expanding d/dx, d/dy in Wirtinger operators gives, with P = psi_{ab} and
    Q = psi_{a bbar},

        H[2a, 2b]     = 2 Re(P_ab + Q_ab)
        H[2a, 2b+1]   = -2 Im(P_ab - Q_ab)
        H[2a+1, 2b]   = -2 Im(P_ab + Q_ab)
        H[2a+1, 2b+1] = -2 Re(P_ab - Q_ab)
    """
    P = np.asarray(hess_holo)
    Q = np.asarray(hess_mixed)
    n = P.shape[-1]
    H = np.empty(P.shape[:-2] + (2 * n, 2 * n), dtype=float)
    H[..., 0::2, 0::2] = 2.0 * (P + Q).real
    H[..., 0::2, 1::2] = -2.0 * (P - Q).imag
    H[..., 1::2, 0::2] = -2.0 * (P + Q).imag
    H[..., 1::2, 1::2] = -2.0 * (P - Q).real
    return H


def hermitian_pairing(v: np.ndarray, w: np.ndarray) -> complex:
    """<v, w> = sum_a v_a conj(w_a)."""
    return complex(np.sum(np.asarray(v) * np.conj(w)))


def real_orthonormal_frame(axis: np.ndarray) -> np.ndarray:
    """Orthonormal basis of R^m with first column the given unit vector.

    Pivoted Gram-Schmidt completion; deterministic for a given input.
    """
    axis = np.asarray(axis, dtype=float)
    m = axis.shape[0]
    basis = [axis / np.linalg.norm(axis)]
    for k in np.argsort(np.abs(axis)):
        if len(basis) == m:
            break
        e = np.zeros(m)
        e[k] = 1.0
        for b in basis:
            e = e - np.dot(b, e) * b
        nrm = np.linalg.norm(e)
        if nrm > 1e-12:
            basis.append(e / nrm)
    return np.stack(basis, axis=1)


def unitary_from_normal(normal: np.ndarray) -> np.ndarray:
    """Unitary U with U @ normal = e_n (last coordinate axis), for a unit vector.

    Built by completing ``normal`` to an orthonormal basis with pivoted
    Gram-Schmidt; deterministic for a given input.
    """
    nu = np.asarray(normal, dtype=complex)
    n = nu.shape[0]
    norm = np.linalg.norm(nu)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"normal must be a unit vector, got |v| = {norm}")
    nu = nu / norm
    # Columns: orthonormal complement of nu, then nu itself.
    cols = [nu]
    # Seed with the identity columns least aligned with nu for stability.
    order = np.argsort(np.abs(nu))
    for k in order:
        if len(cols) == n:
            break
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        for c in cols:
            e = e - np.vdot(c, e) * c
        nrm = np.linalg.norm(e)
        if nrm > 1e-12:
            cols.append(e / nrm)
    if len(cols) < n:  # pragma: no cover - cannot happen for unit input
        raise RuntimeError("failed to complete unitary frame")
    V = np.stack(cols[1:] + [nu], axis=1)
    return V.conj().T
