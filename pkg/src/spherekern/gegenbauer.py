"""Gegenbauer (ultraspherical) polynomials, norms, and weighted quadrature.

Everything here lives on [-1, 1] with the weight (1 - t^2)^(alpha - 1/2).
Coefficient extraction for kernel expansions reduces to integrals against
this weight, so the quadrature rule is the workhorse of the whole package.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .exceptions import DomainError

__all__ = [
    "eval_gegenbauer",
    "gegenbauer_table",
    "gegenbauer_norm",
    "expand_univariate",
    "weight_mass",
    "gauss_gegenbauer_rule",
    "QuadratureRule",
    "GegenbauerBasis",
    "basis_for",
]

#: Smallest weight order supported by quadrature-backed operations.
#: (alpha = 0 degenerates the recurrence: P_1^0 is identically zero.)
ALPHA_MIN = 0.25

_T_SLACK = 1e-12


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if alpha < ALPHA_MIN:
        raise DomainError(f"weight order alpha={alpha} below supported minimum {ALPHA_MIN}")
    return alpha


def eval_gegenbauer(alpha: float, d: int, t):
    """Evaluate P_d^alpha(t) by forward recurrence.

    P_0 = 1, P_1 = 2*alpha*t, and
    d*P_d(t) = 2t(d+alpha-1)*P_{d-1}(t) - (d+2*alpha-2)*P_{d-2}(t).

    `t` may be a scalar or an array in [-1, 1]; shape is preserved.
    """
    if d < 0:
        raise DomainError(f"degree must be nonnegative, got {d}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1.0 + _T_SLACK):
        raise DomainError("argument outside [-1, 1]")
    t_arr = np.clip(t_arr, -1.0, 1.0)
    scalar = t_arr.ndim == 0

    p_prev = np.ones_like(t_arr)
    if d == 0:
        return float(p_prev) if scalar else p_prev
    p = 2.0 * alpha * t_arr
    for k in range(2, d + 1):
        p, p_prev = (2.0 * t_arr * (k + alpha - 1.0) * p - (k + 2.0 * alpha - 2.0) * p_prev) / k, p
    return float(p) if scalar else p


def gegenbauer_table(alpha: float, d_max: int, t) -> np.ndarray:
    """All degrees at once: row k of the result is P_k^alpha evaluated at t.

    Returns an array of shape (d_max + 1, *shape(t)). One recurrence pass,
    so this is the preferred way to evaluate a truncated expansion.
    """
    if d_max < 0:
        raise DomainError(f"degree must be nonnegative, got {d_max}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1.0 + _T_SLACK):
        raise DomainError("argument outside [-1, 1]")
    t_arr = np.clip(t_arr, -1.0, 1.0)

    out = np.empty((d_max + 1,) + t_arr.shape)
    out[0] = 1.0
    if d_max >= 1:
        out[1] = 2.0 * alpha * t_arr
    for k in range(2, d_max + 1):
        out[k] = (2.0 * t_arr * (k + alpha - 1.0) * out[k - 1]
                  - (k + 2.0 * alpha - 2.0) * out[k - 2]) / k
    return out


def weight_mass(alpha: float) -> float:
    """Total mass of the weight: integral of (1-t^2)^(alpha-1/2) over [-1, 1]."""
    alpha = float(alpha)
    return float(np.exp(0.5 * np.log(np.pi) + gammaln(alpha + 0.5) - gammaln(alpha + 1.0)))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for the weight (1-t^2)^(alpha-1/2) on [-1, 1].

    An m-node rule integrates polynomials of degree <= 2m-1 exactly
    against the weight.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> float:
        """Weighted sum of integrand values sampled at the nodes."""
        values = np.asarray(values, dtype=float)
        return float(self.weights @ values)

    def integrate_fn(self, f) -> float:
        return self.integrate(_sample_at(f, self.nodes))


def _sample_at(f, nodes: np.ndarray) -> np.ndarray:
    """Evaluate f at the nodes, accepting vectorized or scalar-only callables."""
    try:
        vals = np.asarray(f(nodes), dtype=float)
        if vals.shape == nodes.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.asarray([float(f(t)) for t in nodes])


def gauss_gegenbauer_rule(alpha: float, m: int) -> QuadratureRule:
    """Golub-Welsch construction of the m-node Gauss rule for the weight.

    The symmetric Jacobi matrix is built from the three-term recurrence of
    the (monic) orthogonal polynomials for (1-t^2)^(alpha-1/2): zero
    diagonal, off-diagonal sqrt(beta_k) with

        beta_k = k (k + 2*alpha - 1) / (4 (k + alpha) (k + alpha - 1)).

    Nodes are its eigenvalues; weights are mass * (first eigenvector row)^2.
    """
    alpha = _check_alpha(alpha)
    if m < 1:
        raise DomainError(f"node count must be positive, got {m}")
    if m == 1:
        return QuadratureRule(np.zeros(1), np.array([weight_mass(alpha)]), alpha)
    k = np.arange(1, m, dtype=float)
    beta = k * (k + 2.0 * alpha - 1.0) / (4.0 * (k + alpha) * (k + alpha - 1.0))
    nodes, vecs = eigh_tridiagonal(np.zeros(m), np.sqrt(beta))
    weights = weight_mass(alpha) * vecs[0] ** 2
    return QuadratureRule(nodes, weights, alpha)


class GegenbauerBasis:
    """Gegenbauer family up to a fixed degree with precomputed norms.

    Carries a quadrature rule exact for every integral the expansion
    formulas need (degree 2*d_max integrands against the weight).
    """

    def __init__(self, alpha: float, d_max: int, n_nodes: int | None = None):
        self.alpha = _check_alpha(alpha)
        if d_max < 0:
            raise DomainError(f"d_max must be nonnegative, got {d_max}")
        self.d_max = int(d_max)
        if n_nodes is None:
            n_nodes = self.d_max + 8
        if n_nodes <= self.d_max:
            raise DomainError("quadrature order insufficient for requested degree")
        self.quad = gauss_gegenbauer_rule(self.alpha, n_nodes)
        self._node_table = gegenbauer_table(self.alpha, self.d_max, self.quad.nodes)
        self.norms = (self._node_table ** 2) @ self.quad.weights
        if np.any(self.norms <= 0.0):
            raise DomainError("nonpositive norm; quadrature order insufficient")

    def eval(self, d: int, t):
        if d > self.d_max:
            raise DomainError(f"degree {d} exceeds basis d_max {self.d_max}")
        return eval_gegenbauer(self.alpha, d, t)

    def table(self, t) -> np.ndarray:
        return gegenbauer_table(self.alpha, self.d_max, t)

    def norm(self, k: int) -> float:
        if k > self.d_max:
            raise DomainError(f"degree {k} exceeds basis d_max {self.d_max}")
        return float(self.norms[k])

    def expand(self, f, d_max: int | None = None) -> np.ndarray:
        """Coefficients c_k = <f, P_k> / ||P_k||^2 for k = 0..d_max, by quadrature.

        Exact whenever f is a polynomial with deg f + d_max < 2 * order.
        """
        if d_max is None:
            d_max = self.d_max
        if d_max > self.d_max:
            raise DomainError(f"degree {d_max} exceeds basis d_max {self.d_max}")
        vals = _sample_at(f, self.quad.nodes)
        weighted = vals * self.quad.weights
        return (self._node_table[: d_max + 1] @ weighted) / self.norms[: d_max + 1]

    def synth(self, coefficients: np.ndarray, t):
        """Evaluate sum_k c_k P_k^alpha(t)."""
        c = np.asarray(coefficients, dtype=float)
        if len(c) > self.d_max + 1:
            raise DomainError("more coefficients than basis degrees")
        tab = gegenbauer_table(self.alpha, len(c) - 1, t)
        out = np.tensordot(c, tab, axes=1)
        return float(out) if np.ndim(t) == 0 else out


@lru_cache(maxsize=128)
def basis_for(alpha: float, d_max: int) -> GegenbauerBasis:
    """Cached basis lookup; safe because GegenbauerBasis is immutable in use."""
    return GegenbauerBasis(alpha, d_max)


def gegenbauer_norm(alpha: float, k: int, quad: QuadratureRule | None = None) -> float:
    """Squared L2 norm of P_k^alpha against the weight, by quadrature."""
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    if quad is None:
        quad = gauss_gegenbauer_rule(alpha, k + 8)
    if quad.order <= k:
        raise DomainError("quadrature order insufficient for norm of this degree")
    vals = eval_gegenbauer(alpha, k, quad.nodes)
    return float(quad.integrate(vals ** 2))


def expand_univariate(f, alpha: float, d_max: int, quad: QuadratureRule | None = None) -> np.ndarray:
    """Expand f on [-1, 1] in the Gegenbauer basis of order alpha.

    Returns coefficients (c_0, ..., c_{d_max}) such that for polynomial f of
    degree <= d_max the synthesis sum_k c_k P_k^alpha reproduces f exactly.
    """
    if quad is None:
        basis = basis_for(float(alpha), int(d_max))
    else:
        basis = GegenbauerBasis(alpha, d_max, n_nodes=quad.order)
    return basis.expand(f)
