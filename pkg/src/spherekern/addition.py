"""Addition formula for Gegenbauer polynomials, fitted constants and identity checks.

The classical identity splits P_k^alpha of a composite angle,

    P_k^a(cos t cos s + sin t sin s cos g)
        = sum_i c_{k,i} (sin t sin s)^i P_i^{a-1/2}(cos g)
                 P_{k-i}^{a+i}(cos t) P_{k-i}^{a+i}(cos s),

with positive constants c_{k,i} depending on (alpha, k, i) only. The
constants are obtained here by linear least squares on a well-conditioned
angle grid, then validated by the residual of the fit; the geometric form
of the identity (projected inner products with respect to configurations
Z and [Z q]) is checked at random sphere points by verify_addition.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, IllConditionedError, SingularityError
from .gegenbauer import eval_gegenbauer, gegenbauer_table
from .sphere import SphereConfig, inner_z, random_config, sample_sphere

__all__ = [
    "AdditionConstants",
    "addition_constants",
    "addition_residual",
    "AdditionReport",
    "verify_addition",
]

ALPHA_MIN_ADDITION = 0.75
K_MAX = 30
FIT_TOL = 1e-9


@dataclass
class AdditionConstants:
    """Fitted constants c_{k,i}, i = 0..k, for one (alpha, k)."""

    alpha: float
    k: int
    c: np.ndarray
    residual: float

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "k": self.k, "c": self.c.tolist(), "residual": self.residual}


def _cheb_points(a: float, b: float, g: int) -> np.ndarray:
    j = np.arange(g)
    return a + (b - a) * 0.5 * (np.cos((2 * j + 1) * np.pi / (2 * g)) + 1.0)


def _design_matrix(alpha: float, k: int, theta, tau, gamma):
    """Columns: the i-th addition term at each angle triple; target: the composite side."""
    ct, st = np.cos(theta), np.sin(theta)
    cs, ss = np.cos(tau), np.sin(tau)
    cg = np.cos(gamma)
    target = eval_gegenbauer(alpha, k, np.clip(ct * cs + st * ss * cg, -1.0, 1.0))
    inner = gegenbauer_table(alpha - 0.5, k, cg)
    cols = np.empty((len(theta), k + 1))
    for i in range(k + 1):
        cols[:, i] = ((st * ss) ** i * inner[i]
                      * eval_gegenbauer(alpha + i, k - i, ct)
                      * eval_gegenbauer(alpha + i, k - i, cs))
    return cols, target


def addition_constants(alpha: float, k: int, grid_points: int = 8) -> AdditionConstants:
    """Fit the addition constants c_{k,i} for Gegenbauer order alpha.

    Samples both sides of the identity on a tensor grid of Chebyshev
    points in (0.2, pi - 0.2)^3, away from degenerate sines, and solves
    the overdetermined linear system in the k + 1 unknowns with column
    scaling. The fit must close to 1e-9; if it does not, the system is
    ill conditioned and a larger grid may help.
    """
    if alpha < ALPHA_MIN_ADDITION:
        raise DomainError(f"alpha must be at least {ALPHA_MIN_ADDITION} (inner order alpha - 1/2), got {alpha}")
    if not 0 <= k <= K_MAX:
        raise DomainError(f"degree must be in 0..{K_MAX}, got {k}")
    if k == 0:
        return AdditionConstants(alpha=float(alpha), k=0, c=np.array([1.0]), residual=0.0)
    pts = _cheb_points(0.2, np.pi - 0.2, grid_points)
    theta, tau, gamma = (a.ravel() for a in np.meshgrid(pts, pts, pts, indexing="ij"))
    A, b = _design_matrix(alpha, k, theta, tau, gamma)
    scale = np.max(np.abs(A), axis=0)
    if np.any(scale == 0.0):
        raise IllConditionedError("degenerate column in the addition fit; use a larger sample set")
    c, *_ = np.linalg.lstsq(A / scale, b, rcond=None)
    c = c / scale
    resid = float(np.max(np.abs(A @ c - b)))
    if resid > FIT_TOL * max(1.0, float(np.max(np.abs(b)))):
        raise IllConditionedError(
            f"addition fit residual {resid:.3e} exceeds {FIT_TOL:.1e}; use a larger sample set")
    return AdditionConstants(alpha=float(alpha), k=int(k), c=c, residual=resid)


def _ratio(num: float, den: float) -> float:
    return np.sqrt(max(num, 0.0) / den)


def addition_residual(cfg: SphereConfig, x, y, q, k: int,
                      consts: AdditionConstants | None = None) -> float:
    """|LHS - RHS| of the projected addition identity at one point set.

    LHS is P_k of the Z-projected angle between x and y; RHS splits it
    through the extended configuration [Z q]. Terms with vanishing
    [Z q]-norm prefactor are dropped: they carry a factor that decays
    like the prefactor itself while their angle becomes undefined.
    """
    n, r = cfg.n, cfg.r
    alpha = (n - r) / 2.0 - 1.0
    if consts is None:
        consts = addition_constants(alpha, k)
    ext = cfg.extend(q)
    xx_z, yy_z, qq_z = inner_z(cfg, x, x), inner_z(cfg, y, y), inner_z(cfg, q, q)
    if min(xx_z, yy_z, qq_z) <= 0.0:
        raise SingularityError("a point lies in range(Z)")
    lhs = eval_gegenbauer(alpha, k, np.clip(inner_z(cfg, x, y) / np.sqrt(xx_z * yy_z), -1.0, 1.0))

    xx_e, yy_e = inner_z(ext, x, x), inner_z(ext, y, y)
    sx, sy = _ratio(xx_e, xx_z), _ratio(yy_e, yy_z)
    ct = np.clip(inner_z(cfg, x, q) / np.sqrt(xx_z * qq_z), -1.0, 1.0)
    cs = np.clip(inner_z(cfg, y, q) / np.sqrt(yy_z * qq_z), -1.0, 1.0)
    degenerate = min(xx_e, yy_e) < 1e-24
    if not degenerate:
        cg = np.clip(inner_z(ext, x, y) / np.sqrt(xx_e * yy_e), -1.0, 1.0)
        inner = gegenbauer_table(alpha - 0.5, k, cg)
    rhs = 0.0
    for i in range(k + 1):
        if i > 0 and degenerate:
            break
        gfac = 1.0 if i == 0 else inner[i]
        rhs += (consts.c[i] * (sx * sy) ** i * gfac
                * eval_gegenbauer(alpha + i, k - i, ct)
                * eval_gegenbauer(alpha + i, k - i, cs))
    return float(abs(lhs - rhs))


@dataclass
class AdditionReport:
    n: int
    r: int
    k: int
    samples: int
    max_residual: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "k": self.k,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_addition(n: int, r: int, k: int, samples: int = 200, seed=0,
                    tol: float = 1e-8, tol_perp: float = 1e-4) -> AdditionReport:
    """Check the projected addition identity at random (x, y, q, Z).

    Requires n - r >= 4 so both polynomial orders in the identity stay in
    the supported range. Draws are rejected when any projected norm falls
    below tol_perp, keeping every angle well defined.
    """
    if r < 0:
        raise DomainError("r must be nonnegative")
    if n - r < 4:
        raise DomainError(
            f"need n - r >= 4 (inner order (n-r)/2 - 3/2 at least {ALPHA_MIN_ADDITION - 0.5}), got n={n}, r={r}")
    alpha = (n - r) / 2.0 - 1.0
    consts = addition_constants(alpha, k)
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    attempts = 0
    while done < samples:
        attempts += 1
        if attempts > 50 * samples:
            raise SingularityError("could not draw enough nondegenerate samples")
        cfg = random_config(n, r, rng)
        x, y, q = sample_sphere(n, 3, rng)
        ext_ok = np.linalg.svd(np.column_stack([cfg.Z, q]), compute_uv=False)[-1] > 1e-3
        if not ext_ok:
            continue
        ext = cfg.extend(q)
        norms = [inner_z(cfg, p, p) for p in (x, y, q)] + [inner_z(ext, p, p) for p in (x, y)]
        if min(norms) <= tol_perp ** 2:
            continue
        worst = max(worst, addition_residual(cfg, x, y, q, k, consts))
        done += 1
    return AdditionReport(n=n, r=r, k=k, samples=samples, max_residual=float(worst),
                          tol=tol, passed=bool(worst < tol))
