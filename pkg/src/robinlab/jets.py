"""Mixed Wirtinger-derivative jets of real potentials, to total order 4.

A jet at a point stores the tensors

    T^{(k,l)}[a_1..a_k, b_1..b_l] = d^{k+l} F / dz_{a_1}..dz_{a_k} dzbar_{b_1}..dzbar_{b_l}

for a real-valued F (e.g. the Robin function).  Conjugation symmetry
T^{(l,k)}[B, A] = conj(T^{(k,l)}[A, B]) lets us store only k >= l.  Three
builders are provided:

* :func:`wirtinger_fd_jet` - central finite differences on the real lattice
  with optional Richardson extrapolation and error estimates;
* :func:`jet_from_radial_composition` - exact jets of F(u(z)) when u has only
  value, first derivatives, and a mixed complex Hessian (balls, half-spaces);
* :meth:`PotentialJet.transform` - pushforward under a complex-affine change
  of coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

# Central stencils of O(h^2) accuracy; keys are lattice offsets.
_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}

DEFAULT_ORDERS = ((0, 0), (1, 0), (2, 0), (1, 1), (2, 1), (2, 2))


@dataclass
class PotentialJet:
    """Wirtinger derivative tensors of a real potential at a base point."""

    n: int
    tensors: dict[tuple[int, int], np.ndarray]
    base_point: np.ndarray | None = None
    errors: dict[tuple[int, int], float] = field(default_factory=dict)

    def available(self, k: int, l: int) -> bool:
        return (k, l) in self.tensors or (l, k) in self.tensors

    def tensor(self, k: int, l: int) -> np.ndarray:
        """Full symmetric tensor of type (k holomorphic, l antiholomorphic)."""
        if (k, l) in self.tensors:
            return self.tensors[(k, l)]
        if (l, k) in self.tensors:
            T = self.tensors[(l, k)]
            perm = tuple(range(l, l + k)) + tuple(range(l))
            return np.conj(np.transpose(T, perm))
        raise KeyError(f"jet does not hold order ({k}, {l})")

    def entry(self, holo: Sequence[int], anti: Sequence[int]) -> complex:
        """D^{A Bbar} F for multi-indices given as index sequences."""
        T = self.tensor(len(holo), len(anti))
        idx = tuple(holo) + tuple(anti)
        return complex(T[idx]) if idx else complex(T)

    @property
    def value(self) -> float:
        return float(np.real(self.tensor(0, 0)))

    @property
    def grad(self) -> np.ndarray:
        return self.tensor(1, 0)

    @property
    def hess_mixed(self) -> np.ndarray:
        """Lambda_{a bbar} as an (n, n) array indexed [a, b]."""
        return self.tensor(1, 1)

    def transform(self, matrix: np.ndarray, new_base: np.ndarray | None = None) -> "PotentialJet":
        """Jet of F(M w + c) at w0, given this jet of F at z0 = M w0 + c.

        Each holomorphic slot contracts with M (since d/dw_a = M_{ia} d/dz_i),
        each antiholomorphic slot with conj(M).
        """
        M = np.asarray(matrix, dtype=complex)
        out: dict[tuple[int, int], np.ndarray] = {}
        for (k, l), T in self.tensors.items():
            Tp = np.asarray(T, dtype=complex)
            for _ in range(k):
                Tp = np.tensordot(Tp, M, axes=([0], [0]))
            for _ in range(l):
                Tp = np.tensordot(Tp, np.conj(M), axes=([0], [0]))
            out[(k, l)] = Tp
        return PotentialJet(self.n, out, base_point=new_base, errors=dict(self.errors))

    def rescale(self, factor: Callable[[int, int], float]) -> "PotentialJet":
        """Multiply each stored tensor by factor(k, l) (dilation bookkeeping)."""
        out = {kl: factor(*kl) * T for kl, T in self.tensors.items()}
        errs = {kl: abs(factor(*kl)) * e for kl, e in self.errors.items()}
        return PotentialJet(self.n, out, base_point=self.base_point, errors=errs)

    def conjugation_defect(self) -> float:
        """Max mismatch of the Hermitian symmetry among stored tensors."""
        worst = 0.0
        for (k, l), T in self.tensors.items():
            if (l, k) not in self.tensors:
                continue
            S = self.tensors[(l, k)]
            perm = tuple(range(l, l + k)) + tuple(range(l))
            worst = max(worst, float(np.max(np.abs(np.conj(np.transpose(S, perm)) - T))))
        if (1, 1) in self.tensors:
            H = self.tensors[(1, 1)]
            worst = max(worst, float(np.max(np.abs(H - H.conj().T))))
        return worst


def _wirtinger_real_expansion(holo: Sequence[int], anti: Sequence[int], n: int) -> dict[tuple, complex]:
    """Expand prod of Wirtinger operators into real partials: multiorder -> coeff.

    d/dz_a = (d/dx_{2a} - i d/dx_{2a+1})/2, d/dzbar_a = (d/dx_{2a} + i d/dx_{2a+1})/2.
    """
    slots = [(a, -1j) for a in holo] + [(b, +1j) for b in anti]
    out: dict[tuple, complex] = {}
    for choices in itertools.product((0, 1), repeat=len(slots)):
        coeff = 0.5 ** len(slots) + 0j
        order = [0] * (2 * n)
        for (axis_c, sign), pick in zip(slots, choices):
            if pick == 0:
                order[2 * axis_c] += 1
            else:
                order[2 * axis_c + 1] += 1
                coeff *= sign
        key = tuple(order)
        out[key] = out.get(key, 0.0) + coeff
    return out


class _LatticeCache:
    """Caches evaluations of f on the lattice center + step * offsets."""

    def __init__(self, f: Callable[[np.ndarray], float], center: np.ndarray, step: float):
        self.f = f
        self.center = np.asarray(center, dtype=complex)
        self.step = step
        self.cache: dict[tuple, float] = {}

    def __call__(self, offsets: tuple) -> float:
        if offsets not in self.cache:
            x = np.zeros(2 * self.center.shape[0])
            for axis, off in enumerate(offsets):
                x[axis] = off * self.step
            dz = x[0::2] + 1j * x[1::2]
            self.cache[offsets] = float(self.f(self.center + dz))
        return self.cache[offsets]


def _real_partial(lattice: _LatticeCache, multiorder: tuple, h_units: int) -> float:
    """Mixed real partial by a tensor-product central stencil on the lattice.

    ``h_units`` is the stencil spacing in lattice units (2 for the coarse pass
    of Richardson on a half-step lattice).
    """
    axes = [a for a, m in enumerate(multiorder) if m > 0]
    stencil_axes = [(_STENCILS[multiorder[a]], a) for a in axes]
    total = 0.0
    h = lattice.step * h_units
    denom = h ** sum(multiorder)
    for picks in itertools.product(*[s.items() for s, _ in stencil_axes]):
        offsets = [0] * len(multiorder)
        weight = 1.0
        for (off, wgt), (_, axis) in zip(picks, stencil_axes):
            offsets[axis] = off * h_units
            weight *= wgt
        total += weight * lattice(tuple(offsets))
    return total / denom


def wirtinger_fd_jet(
    f: Callable[[np.ndarray], float],
    center: np.ndarray,
    n: int,
    orders: Iterable[tuple[int, int]] = DEFAULT_ORDERS,
    h: float = 1e-2,
    richardson: bool = True,
) -> PotentialJet:
    """Finite-difference jet of a real scalar f at a complex point.

    Central O(h^2) stencils on the real 2n-lattice; with ``richardson`` a
    second pass at h/2 upgrades to O(h^4) and yields error estimates (stored
    per order in ``jet.errors``).  Evaluations are cached across all requested
    derivative entries, so full tensors cost little more than single entries.
    """
    center = np.asarray(center, dtype=complex)
    fine = _LatticeCache(f, center, h / 2.0 if richardson else h)

    def one_pass(h_units: int) -> dict[tuple[int, int], np.ndarray]:
        tensors: dict[tuple[int, int], np.ndarray] = {}
        for k, l in orders:
            if k < l and (l, k) in dict.fromkeys(orders):
                continue
            T = np.zeros((n,) * (k + l), dtype=complex)
            for A in itertools.combinations_with_replacement(range(n), k):
                for B in itertools.combinations_with_replacement(range(n), l):
                    val = 0.0 + 0j
                    for morder, coeff in _wirtinger_real_expansion(A, B, n).items():
                        val += coeff * _real_partial(fine, morder, h_units)
                    for PA in set(itertools.permutations(A)):
                        for PB in set(itertools.permutations(B)):
                            T[PA + PB] = val
            tensors[(k, l)] = T
        return tensors

    if not richardson:
        return PotentialJet(n, one_pass(1), base_point=center)
    coarse = one_pass(2)
    fine_t = one_pass(1)
    tensors: dict[tuple[int, int], np.ndarray] = {}
    errors: dict[tuple[int, int], float] = {}
    for kl in fine_t:
        tensors[kl] = (4.0 * fine_t[kl] - coarse[kl]) / 3.0
        errors[kl] = float(np.max(np.abs(fine_t[kl] - coarse[kl]))) / 3.0
    return PotentialJet(n, tensors, base_point=center, errors=errors)


def _partial_matchings(k: int, l: int):
    for size in range(min(k, l) + 1):
        for holo_sub in itertools.combinations(range(k), size):
            for anti_sub in itertools.permutations(range(l), size):
                yield list(zip(holo_sub, anti_sub))


def jet_from_radial_composition(
    u0: float,
    grad_u: np.ndarray,
    hess_mixed_u: np.ndarray,
    f_derivs: Sequence[float],
    orders: Iterable[tuple[int, int]] = DEFAULT_ORDERS,
    base_point: np.ndarray | None = None,
) -> PotentialJet:
    """Exact jet of F(u(z)) when u has no pure-holomorphic second derivatives.

    Covers u(z) = R^2 - |z - c|^2 (balls) and linear u (half-spaces).  Each
    derivative entry is a sum over partial matchings of holomorphic with
    antiholomorphic slots: matched pairs pull down u_{a bbar}, unmatched slots
    pull down u_a or u_{bbar}, and F differentiates once per block.
    """
    grad_u = np.asarray(grad_u, dtype=complex)
    hess = np.asarray(hess_mixed_u, dtype=complex)
    n = grad_u.shape[0]
    grad_conj = np.conj(grad_u)  # u real: u_{abar} = conj(u_a)
    tensors: dict[tuple[int, int], np.ndarray] = {}
    for k, l in orders:
        T = np.zeros((n,) * (k + l), dtype=complex)
        for idx in itertools.product(range(n), repeat=k + l):
            A, B = idx[:k], idx[k:]
            val = 0.0 + 0j
            for matching in _partial_matchings(k, l):
                blocks = k + l - len(matching)
                term = f_derivs[blocks]
                matched_h = {i for i, _ in matching}
                matched_a = {j for _, j in matching}
                for i, j in matching:
                    term *= hess[A[i], B[j]]
                for i in range(k):
                    if i not in matched_h:
                        term *= grad_u[A[i]]
                for j in range(l):
                    if j not in matched_a:
                        term *= grad_conj[B[j]]
                val += term
            T[idx] = val
        tensors[(k, l)] = T
    return PotentialJet(n, tensors, base_point=base_point)


def power_law_derivs(prefactor: float, u0: float, exponent: float, max_order: int) -> list[float]:
    """Derivatives of F(u) = prefactor * u^exponent at u0, orders 0..max_order."""
    out = []
    coef = prefactor
    for j in range(max_order + 1):
        out.append(coef * u0 ** (exponent - j))
        coef *= exponent - j
    return out


def all_orders_up_to(total: int) -> list[tuple[int, int]]:
    """All (k, l) with k + l <= total and k >= l (conjugates are implied)."""
    return [(k, l) for k in range(total + 1) for l in range(total + 1 - k) if k >= l]
