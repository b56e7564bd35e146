"""Linear programming upper bound for spherical codes with pairwise angle >= theta.

If f(t) = sum_k c_k P_k^{n/2-1}(t) has c_k >= 0, c_0 > 0, and f(t) <= 0
for all t in [-1, cos theta], then no code with minimum angle theta can
have more than f(1)/c_0 points: summing f over all pairs of a code is
nonnegative term by term in the expansion yet the off-diagonal kernel
values are all <= 0. The optimization over such f is a linear program.

The sign constraint is discretized on a grid, which makes the raw LP
answer slightly optimistic; every certificate is therefore re-verified
on a much finer grid, and on failure the solve repeats on a denser grid
with the constraint tightened by the observed violation. The returned
certificate is checked, not merely optimal-on-grid.

The solver works on the dual covering form: maximize the number of
touched grid points subject to one covering row per expansion degree.
Its right-hand side P_k(1) is positive, so the origin is feasible and
the small dense simplex in _simplex applies directly; the expansion
coefficients come back as the dual multipliers.
"""

from dataclasses import dataclass, field

import numpy as np

from ._simplex import simplex_max
from .exceptions import CertificateError, DomainError, InfeasibleError, UnboundedError
from .gegenbauer import eval_gegenbauer, gegenbauer_table

__all__ = [
    "LPBoundProblem",
    "LPCertificate",
    "CertifyReport",
    "chebyshev_grid",
    "delsarte_lp",
    "certify",
]

DEFAULT_GRID = 400
MARGIN_TOL = 1e-9
D_MAX_LIMIT = 60


def chebyshev_grid(a: float, b: float, count: int) -> np.ndarray:
    """count Chebyshev-Lobatto points on [a, b], increasing, endpoints exact."""
    if count < 2:
        raise DomainError("grid needs at least 2 points")
    j = np.arange(count)
    pts = a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * j / (count - 1)))
    pts[0], pts[-1] = a, b
    return pts


@dataclass
class LPBoundProblem:
    """Bound computation input: dimension, minimum angle, degree, constraint grid."""

    n: int
    theta: float
    d_max: int
    grid: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"dimension must be at least 3, got {self.n}")
        if not 0.0 < self.theta <= np.pi:
            raise DomainError(f"theta must lie in (0, pi], got {self.theta}")
        if not 1 <= self.d_max <= D_MAX_LIMIT:
            raise DomainError(f"d_max must be in 1..{D_MAX_LIMIT}, got {self.d_max}")
        top = float(np.cos(self.theta))
        if self.grid is None:
            self.grid = chebyshev_grid(-1.0, top, DEFAULT_GRID)
        else:
            g = np.asarray(self.grid, dtype=float).reshape(-1)
            if len(g) < 2 or np.any(np.diff(g) <= 0):
                raise DomainError("grid must be strictly increasing with at least 2 points")
            if abs(g[0] + 1.0) > 1e-12 or abs(g[-1] - top) > 1e-12:
                raise DomainError("grid must span [-1, cos theta] including both endpoints")
            if g[-1] > top + 1e-12:
                raise DomainError("grid extends beyond cos theta")
            self.grid = g

    @property
    def alpha(self) -> float:
        return self.n / 2.0 - 1.0

    @property
    def cos_theta(self) -> float:
        return float(np.cos(self.theta))


@dataclass
class LPCertificate:
    """Feasible expansion coefficients plus the bound they certify.

    max_violation is measured on the refined verification grid, not the
    solve grid; bound = f(1)/c_0.
    """

    n: int
    theta: float
    d_max: int
    coefficients: np.ndarray
    bound: float
    max_violation: float
    refined_points: int = 0

    def profile(self, t):
        """f(t) for this certificate's coefficients."""
        tab = gegenbauer_table(self.n / 2.0 - 1.0, self.d_max, np.asarray(t, dtype=float))
        out = np.tensordot(self.coefficients, tab, axes=1)
        return float(out) if np.ndim(t) == 0 else out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "theta": self.theta,
            "d_max": self.d_max,
            "coefficients": self.coefficients.tolist(),
            "bound": self.bound,
            "max_violation": self.max_violation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LPCertificate":
        return cls(n=int(d["n"]), theta=float(d["theta"]), d_max=int(d["d_max"]),
                   coefficients=np.asarray(d["coefficients"], dtype=float),
                   bound=float(d["bound"]), max_violation=float(d["max_violation"]))


def _solve_on_grid(p: LPBoundProblem, grid: np.ndarray, slack: float) -> np.ndarray:
    """Grid LP via the dual covering form; returns coefficients with c_0 = 1.

    Primal: min sum_k c_k P_k(1) over c_k >= 0 with
    sum_{k>=1} c_k P_k(t_j) <= -(1 + slack) for every grid point. The dual
    maximizes (1 + slack) sum_j z_j under sum_j z_j P_k(t_j) >= -P_k(1),
    which after sign flip is origin-feasible covering form.
    """
    tab = gegenbauer_table(p.alpha, p.d_max, grid)
    pk1 = np.array([eval_gegenbauer(p.alpha, k, 1.0) for k in range(p.d_max + 1)])
    G = -tab[1:]
    c_obj = np.full(len(grid), 1.0 + slack)
    try:
        res = simplex_max(c_obj, G, pk1[1:])
    except UnboundedError as exc:
        raise InfeasibleError("no feasible expansion at this degree and angle") from exc
    coeffs = np.concatenate([[1.0], np.maximum(res.duals, 0.0)])
    return coeffs


def _violation(coeffs: np.ndarray, n: int, d_max: int, ts: np.ndarray) -> float:
    tab = gegenbauer_table(n / 2.0 - 1.0, d_max, ts)
    return float(np.max(coeffs @ tab))


def delsarte_lp(p: LPBoundProblem, refine: int = 10, max_rounds: int = 3,
                margin_tol: float = MARGIN_TOL) -> LPCertificate:
    """Best discretized bound at the requested degree, certified on a finer grid.

    Solves the grid LP, then re-checks the sign constraint on a refine
    times denser grid. If the refined check finds a violation above
    margin_tol, the solve repeats with a doubled grid and the constraint
    tightened past the observed violation, up to max_rounds times.
    """
    grid = p.grid
    slack = 0.0
    top = p.cos_theta
    for _ in range(max_rounds):
        coeffs = _solve_on_grid(p, grid, slack)
        fine = chebyshev_grid(-1.0, top, refine * len(grid))
        worst = _violation(coeffs, p.n, p.d_max, fine)
        if worst <= margin_tol:
            pk1 = np.array([eval_gegenbauer(p.alpha, k, 1.0) for k in range(p.d_max + 1)])
            bound = float(coeffs @ pk1)
            return LPCertificate(n=p.n, theta=p.theta, d_max=p.d_max, coefficients=coeffs,
                                 bound=bound, max_violation=worst, refined_points=len(fine))
        grid = chebyshev_grid(-1.0, top, 2 * len(grid))
        slack = 2.0 * worst + slack + 1e-12
    raise CertificateError(
        f"certificate refinement failed after {max_rounds} rounds; last violation {worst:.3e}")


@dataclass
class CertifyReport:
    max_violation: float
    bound: float
    tol: float
    grid_points: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "bound": self.bound,
            "tol": self.tol,
            "grid_points": self.grid_points,
            "passed": self.passed,
        }


def certify(cert: LPCertificate, p: LPBoundProblem, refine: int = 10,
            tol: float = MARGIN_TOL) -> CertifyReport:
    """Re-verify a certificate on a refine times denser grid.

    Reports the worst violation of f <= 0 on [-1, cos theta] and the
    recomputed bound f(1)/c_0. Pass means the certificate proves its
    bound up to tol; an optimal-but-infeasible coefficient vector fails
    here regardless of how it was produced.
    """
    coeffs = np.asarray(cert.coefficients, dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise DomainError("certificate coefficients must be finite")
    if coeffs[0] <= 0:
        raise DomainError("certificate needs c_0 > 0")
    fine = chebyshev_grid(-1.0, p.cos_theta, refine * len(p.grid))
    worst = _violation(coeffs, cert.n, cert.d_max, fine)
    pk1 = np.array([eval_gegenbauer(cert.n / 2.0 - 1.0, k, 1.0) for k in range(cert.d_max + 1)])
    bound = float(coeffs @ pk1) / float(coeffs[0])
    sign_ok = bool(np.min(coeffs) >= -tol)
    return CertifyReport(max_violation=worst, bound=bound, tol=tol,
                         grid_points=len(fine), passed=worst <= tol and sign_ok)
