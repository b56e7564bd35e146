"""Coefficient extraction and truncated synthesis for invariant kernel expansions.

Three levels, one mechanism. A rotation-invariant kernel on the sphere is a
function of x^T y and expands in Gegenbauer polynomials of order n/2 - 1
(analysis = weighted 1-D projection, synthesis = finite sum). A cylinder
kernel, invariant under rotations of the sphere factor only, expands the
same way per pair of fiber points, giving coefficient functions instead of
scalars. A kernel on the bundle of sphere points over r-point
configurations expands in Gegenbauer polynomials of order (n-r)/2 - 1 of
the normalized perpendicular inner product, with coefficient kernels in
the base coordinates (Z^T x, Z^T y, Z^T Z).

Normalization convention: analysis is inverse to synthesis on truncated
families, so the sphere-area constants of the double integral never
appear. The Monte-Carlo cross-check in cylinder_coeffs estimates the same
ratio directly from uniform sphere pairs, giving an independent route to
the identical normalization.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CertificateError, DomainError, InvarianceError, SingularityError
from .gegenbauer import ALPHA_MIN, GegenbauerBasis, basis_for, gegenbauer_table
from .kernel_core import Kernel, check_invariance
from .sphere import (
    TOL_PERP,
    SphereConfig,
    inner_z,
    map_t1,
    random_config,
    sample_orthogonal,
    sample_sphere,
    stabilizer_element,
)

__all__ = [
    "ScalarExpansion",
    "schoenberg_coeffs",
    "synth_schoenberg",
    "cylinder_coeffs",
    "FeatureMapCoefficient",
    "poly_feature_map",
    "BundleExpansion",
    "random_feature_expansion",
    "synth_bundle_kernel",
    "TransportedCoefficients",
    "musin_coeffs",
    "expansion_from_dict",
]

DEFAULT_D_MAX = 16


def _sphere_alpha(n: int) -> float:
    """Gegenbauer order attached to S^{n-1}."""
    alpha = n / 2.0 - 1.0
    if alpha < ALPHA_MIN:
        raise DomainError(f"sphere dimension n={n} needs order {alpha}, below the supported minimum {ALPHA_MIN}")
    return alpha


def _as_sphere_kernel(K, n: int) -> Kernel:
    if isinstance(K, Kernel):
        if K.r != 0:
            raise DomainError("expected a plain sphere kernel, got a bundle kernel")
        if K.n != n:
            raise DomainError(f"kernel lives on S^{K.n - 1}, expected S^{n - 1}")
        return K
    return Kernel(n, K)


@dataclass
class ScalarExpansion:
    """Truncated Gegenbauer expansion of an invariant sphere kernel.

    Stores coefficients c_0..c_d_max of sum_k c_k P_k^{n/2-1}(x^T y).
    Nonnegative coefficients give a positive-definite kernel; negative
    entries are representable (analysis of arbitrary kernels) but the
    synthesized kernel then carries no p.d. guarantee.
    """

    n: int
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1)
        _sphere_alpha(self.n)

    @property
    def alpha(self) -> float:
        return _sphere_alpha(self.n)

    @property
    def d_max(self) -> int:
        return len(self.coefficients) - 1

    def kappa(self, t):
        """Profile function: the synthesized kernel as a function of t = x^T y."""
        return basis_for(self.alpha, self.d_max).synth(self.coefficients, t)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r": 0,
            "alpha": self.alpha,
            "d_max": self.d_max,
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalarExpansion":
        return cls(n=int(d["n"]), coefficients=np.asarray(d["coefficients"], dtype=float))


def schoenberg_coeffs(K, n: int, d_max: int = DEFAULT_D_MAX, check: bool = True,
                      check_tol: float = 1e-8, seed=0) -> ScalarExpansion:
    """Expansion coefficients of an invariant kernel on S^{n-1}.

    Reduces the double sphere integral to one dimension: by invariance
    K(x, y) = kappa(x^T y), and kappa is sampled along the geodesic
    x = e1, y = t e1 + sqrt(1-t^2) e2. Coefficients are the weighted
    Gegenbauer projections of kappa, normalized so that analysis inverts
    synthesis on degree <= d_max kernels.

    With check=True the invariance assumption is verified by sampling
    first; a kernel that is not a function of x^T y is rejected rather
    than silently projected.
    """
    K = _as_sphere_kernel(K, n)
    if check:
        rep = check_invariance(K, trials=200, seed=seed, tol=check_tol)
        if not rep.passed:
            raise InvarianceError(
                f"kernel is not rotation invariant: max residual {rep.max_residual:.3e} exceeds {check_tol:.1e}")
    alpha = _sphere_alpha(n)
    e1 = np.zeros(n)
    e1[0] = 1.0
    e2 = np.zeros(n)
    e2[1] = 1.0

    def kappa(t):
        return K(e1, t * e1 + np.sqrt(max(1.0 - t * t, 0.0)) * e2)

    c = basis_for(alpha, d_max).expand(kappa)
    return ScalarExpansion(n=n, coefficients=c)


def synth_schoenberg(e: ScalarExpansion) -> Kernel:
    """Kernel K(x, y) = sum_k c_k P_k^{n/2-1}(x^T y) from stored coefficients."""
    basis = basis_for(e.alpha, e.d_max)
    coeffs = e.coefficients.copy()

    def fn(x, y):
        t = float(np.clip(np.dot(x, y), -1.0, 1.0))
        return basis.synth(coeffs, t)

    return Kernel(e.n, fn, r=0, name="schoenberg-synth")


def _horizontal_invariance_residual(K, b, a1, a2, n, trials, seed) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        u1, u2 = sample_sphere(n, 2, rng)
        M = sample_orthogonal(n, rng)
        worst = max(worst, abs(K(a1, M @ u1, a2, M @ u2, b) - K(a1, u1, a2, u2, b)))
    return worst


def cylinder_coeffs(K, b, a1, a2, n: int, d_max: int = DEFAULT_D_MAX, check: bool = True,
                    check_tol: float = 1e-8, mc_check: bool = False, mc_samples: int = 200000,
                    mc_tol: float = 1e-2, seed=0) -> np.ndarray:
    """Expansion coefficients (c_k)_b(a1, a2), k = 0..d_max, of a cylinder kernel.

    K is a callable K(a1, u1, a2, u2, b) with u1, u2 on S^{n-1} and a1, a2
    fiber points over base point b. Horizontal invariance (in the sphere
    arguments only) makes the double sphere integral collapse to the same
    1-D projection as the plain sphere case, at fixed (a1, a2).

    mc_check=True re-estimates every coefficient as the sample ratio
    E[K P_k] / E[P_k^2] over uniform independent sphere pairs and demands
    agreement within mc_tol relative to the coefficient scale. This is the
    full double integral, no reduction, so it validates the 1-D route.
    """
    if check:
        worst = _horizontal_invariance_residual(K, b, a1, a2, n, trials=50, seed=seed)
        if worst > check_tol:
            raise InvarianceError(
                f"kernel is not horizontally invariant: max residual {worst:.3e} exceeds {check_tol:.1e}")
    alpha = _sphere_alpha(n)
    e1 = np.zeros(n)
    e1[0] = 1.0
    e2 = np.zeros(n)
    e2[1] = 1.0

    def profile(t):
        u2 = t * e1 + np.sqrt(max(1.0 - t * t, 0.0)) * e2
        return K(a1, e1, a2, u2, b)

    c = basis_for(alpha, d_max).expand(profile)

    if mc_check:
        rng = np.random.default_rng(seed)
        u = sample_sphere(n, mc_samples, rng)
        w = sample_sphere(n, mc_samples, rng)
        t = np.sum(u * w, axis=1)
        kv = np.array([K(a1, u[i], a2, w[i], b) for i in range(mc_samples)])
        tab = gegenbauer_table(alpha, d_max, t)
        mc = (tab @ kv) / np.sum(tab * tab, axis=1)
        scale = max(1.0, float(np.max(np.abs(c))))
        err = float(np.max(np.abs(mc - c)))
        if err > mc_tol * scale:
            raise CertificateError(
                f"Monte-Carlo cross-check disagrees with quadrature: error {err:.3e} at scale {scale:.3e}")
    return c


def _monomial_exponents(n_vars: int, degree: int):
    combos = []
    for deg in range(degree + 1):
        combos.extend(itertools.combinations_with_replacement(range(n_vars), deg))
    return combos


@dataclass
class FeatureMapCoefficient:
    """Coefficient kernel c(y1, y2, Y) = g(y1, Y)^T g(y2, Y) for a feature map g.

    Positive definite by construction: every Gram matrix is G^T G. `spec`
    carries a serializable description when one exists.
    """

    fn: object
    spec: dict | None = None

    def __call__(self, y1, y2, Y) -> float:
        g1 = np.asarray(self.fn(y1, Y), dtype=float).reshape(-1)
        g2 = np.asarray(self.fn(y2, Y), dtype=float).reshape(-1)
        return float(g1 @ g2)


def poly_feature_map(r: int, degree: int = 2, s: int = 3, seed=0,
                     weights=None) -> FeatureMapCoefficient:
    """Random polynomial feature map in (y, upper triangle of Y).

    Features are monomials of total degree <= degree in the r entries of y
    and the r(r+1)/2 distinct entries of Y, combined by an s x n_monomials
    weight matrix. Pass `weights` to reconstruct a specific map; otherwise
    weights are drawn from the seeded generator and recorded in `spec`.
    """
    if r < 0:
        raise DomainError("r must be nonnegative")
    iu = np.triu_indices(r)
    n_vars = r + len(iu[0])
    combos = _monomial_exponents(n_vars, degree)
    if weights is None:
        rng = np.random.default_rng(seed)
        W = rng.standard_normal((s, len(combos))) / max(1, len(combos)) ** 0.5
    else:
        W = np.asarray(weights, dtype=float)
        if W.ndim != 2 or W.shape[1] != len(combos):
            raise DomainError(f"weights must have {len(combos)} columns for r={r}, degree={degree}")

    def fn(y, Y):
        y = np.asarray(y, dtype=float).reshape(-1)
        Y = np.asarray(Y, dtype=float)
        v = np.concatenate([y, Y[iu]]) if r else np.zeros(0)
        feats = np.array([np.prod(v[list(c)]) if c else 1.0 for c in combos])
        return W @ feats

    spec = {"kind": "poly", "r": r, "degree": degree, "weights": W.tolist()}
    return FeatureMapCoefficient(fn=fn, spec=spec)


def _coefficient_from_spec(spec: dict) -> FeatureMapCoefficient:
    if spec.get("kind") != "poly":
        raise DomainError(f"unknown feature map kind {spec.get('kind')!r}")
    return poly_feature_map(int(spec["r"]), degree=int(spec["degree"]), weights=spec["weights"])


@dataclass
class BundleExpansion:
    """Truncated expansion of an invariant bundle kernel.

    coefficients[i] is the coefficient kernel (c_i)(y1, y2, Y); for r = 0
    plain floats are accepted and the whole object degenerates to a
    ScalarExpansion. Coefficient kernels must be positive definite on
    sampled fibers for the synthesized kernel to be; feature maps satisfy
    that unconditionally.
    """

    n: int
    r: int
    coefficients: list = field(default_factory=list)

    def __post_init__(self):
        if self.r < 0:
            raise DomainError("r must be nonnegative")
        if self.n - self.r < 2:
            raise DomainError(f"need n >= r + 2, got n={self.n}, r={self.r}")

    @property
    def d_max(self) -> int:
        return len(self.coefficients) - 1

    @property
    def alpha(self) -> float:
        """Order of the perpendicular-angle Gegenbauer factor."""
        return _sphere_alpha(self.n - self.r)

    def to_dict(self) -> dict:
        if self.r == 0:
            return ScalarExpansion(self.n, np.asarray(self.coefficients, dtype=float)).to_dict()
        specs = []
        for c in self.coefficients:
            if not isinstance(c, FeatureMapCoefficient) or c.spec is None:
                raise DomainError("only feature-map coefficient kernels are serializable")
            specs.append(c.spec)
        return {
            "n": self.n,
            "r": self.r,
            "alpha": self.alpha,
            "d_max": self.d_max,
            "feature_map_spec": specs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BundleExpansion":
        coeffs = [_coefficient_from_spec(s) for s in d["feature_map_spec"]]
        return cls(n=int(d["n"]), r=int(d["r"]), coefficients=coeffs)


def expansion_from_dict(d: dict):
    """Rebuild a serialized expansion; dispatches on the stored fields."""
    if "coefficients" in d:
        return ScalarExpansion.from_dict(d)
    if "feature_map_spec" in d:
        return BundleExpansion.from_dict(d)
    raise DomainError("not a serialized expansion: need coefficients or feature_map_spec")


def random_feature_expansion(n: int, r: int, d_max: int = 4, s: int = 3,
                             degree: int = 2, seed=0) -> BundleExpansion:
    """BundleExpansion with d_max + 1 independent random feature-map coefficients."""
    root = np.random.default_rng(seed)
    coeffs = [poly_feature_map(r, degree=degree, s=s, seed=root) for _ in range(d_max + 1)]
    return BundleExpansion(n=n, r=r, coefficients=coeffs)


def _precheck_coefficient(ci, i, n, r, rng, trials=2, m=25, tol=1e-7):
    for _ in range(trials):
        cfg = random_config(n, r, rng)
        pts = sample_sphere(n, m, rng)
        ys = pts @ cfg.Z
        Y = cfg.gram
        G = np.empty((m, m))
        for a in range(m):
            for b in range(a, m):
                G[a, b] = ci(ys[a], ys[b], Y)
                G[b, a] = G[a, b]
        eigs = np.linalg.eigvalsh(0.5 * (G + G.T))
        if eigs[0] < -tol * max(1.0, eigs[-1]):
            raise CertificateError(
                f"coefficient kernel {i} failed the sampled p.d. check: min eigenvalue {eigs[0]:.3e}")


def synth_bundle_kernel(e: BundleExpansion, tol_perp: float = TOL_PERP,
                        precheck: bool = True, seed=0) -> Kernel:
    """Invariant kernel on the configuration bundle from coefficient kernels.

    K(x, y, Z) = sum_i c_i(Z^T x, Z^T y, Z^T Z) P_i^{(n-r)/2-1}(t) with
    t the normalized inner product of the components of x and y
    perpendicular to range(Z). Undefined when x or y lies in range(Z)
    (the angle is 0/0 there); such calls raise a singularity error
    instead of extending by continuity.

    Coefficient kernels that are not feature maps are screened by a
    sampled p.d. check on random fibers before synthesis; the expansion
    only produces a p.d. kernel when every coefficient kernel is.
    """
    if e.r == 0:
        vals = [c if np.isscalar(c) else float(c(np.zeros(0), np.zeros(0), np.zeros((0, 0))))
                for c in e.coefficients]
        return synth_schoenberg(ScalarExpansion(e.n, np.asarray(vals, dtype=float)))
    alpha = e.alpha
    d_max = e.d_max
    if precheck:
        rng = np.random.default_rng(seed)
        for i, ci in enumerate(e.coefficients):
            if isinstance(ci, FeatureMapCoefficient):
                continue
            _precheck_coefficient(ci, i, e.n, e.r, rng)
    coefficients = list(e.coefficients)

    def fn(x, y, cfg: SphereConfig):
        if cfg.r != e.r:
            raise DomainError(f"expansion is over {e.r}-point configurations, got r={cfg.r}")
        cfg._require_full_rank()
        nx2 = inner_z(cfg, x, x)
        ny2 = inner_z(cfg, y, y)
        if min(nx2, ny2) <= tol_perp ** 2:
            raise SingularityError("argument lies in range(Z); the expansion angle is undefined there")
        t = float(np.clip(inner_z(cfg, x, y) / np.sqrt(nx2 * ny2), -1.0, 1.0))
        tab = gegenbauer_table(alpha, d_max, t)
        u1 = cfg.Z.T @ np.asarray(x, dtype=float)
        u2 = cfg.Z.T @ np.asarray(y, dtype=float)
        Y = cfg.gram
        return sum(float(ci(u1, u2, Y)) * tab[i] for i, ci in enumerate(coefficients))

    return Kernel(e.n, fn, r=e.r, name="bundle-synth")


class TransportedCoefficients:
    """Per-configuration coefficient kernels of a stabilizer-invariant sphere kernel.

    For fixed full-rank Z, a kernel K on S^{n-1} invariant under the
    stabilizer of Z pulls back through the fiber coordinates to a cylinder
    kernel L((u1, v1), (u2, v2)) = K(x1, x2) with x_j reassembled from the
    base coordinate u_j and perpendicular direction v_j. L is horizontally
    invariant in v, so per (u1, u2) it expands over the fiber sphere
    S^{n-r-1}; values() returns those coefficients and reconstruct() sums
    the expansion back at sphere points off range(Z).
    """

    def __init__(self, K: Kernel, cfg: SphereConfig, d_max: int):
        cfg._require_full_rank()
        self.K = K
        self.cfg = cfg
        self.d_max = int(d_max)
        self.alpha = _sphere_alpha(cfg.n - cfg.r)
        self._basis = basis_for(self.alpha, self.d_max)

    def _fiber_point(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float)).reshape(-1)
        if u.shape != (self.cfg.r,):
            raise DomainError(f"fiber coordinate must have length {self.cfg.r}")
        g2 = float(u @ self.cfg.gram_inv @ u)
        if g2 > 1.0 + 1e-12:
            raise DomainError("coordinate has no preimage on the sphere: ||gamma(u)|| > 1")
        if g2 >= 1.0 - 1e-12:
            raise SingularityError("coordinate lies on the fiber boundary ||gamma(u)|| = 1")
        return u

    def values(self, u1, u2) -> np.ndarray:
        """Coefficients (d_k)(u1, u2), k = 0..d_max."""
        u1 = self._fiber_point(u1)
        u2 = self._fiber_point(u2)
        m = self.cfg.n - self.cfg.r
        e1 = np.zeros(m)
        e1[0] = 1.0
        e2 = np.zeros(m)
        e2[1] = 1.0
        x1 = map_t1(self.cfg, e1, u1)

        def profile(t):
            v2 = t * e1 + np.sqrt(max(1.0 - t * t, 0.0)) * e2
            return self.K(x1, map_t1(self.cfg, v2, u2))

        return self._basis.expand(profile)

    def __call__(self, u1, u2) -> np.ndarray:
        return self.values(u1, u2)

    def reconstruct(self, x, y, tol_perp: float = TOL_PERP) -> float:
        """Evaluate sum_k d_k(Z^T x, Z^T y) P_k((n-r)/2-1 order angle term).

        Matches K(x, y) on sphere points off range(Z) up to truncation.
        """
        cfg = self.cfg
        nx2 = inner_z(cfg, x, x)
        ny2 = inner_z(cfg, y, y)
        if min(nx2, ny2) <= tol_perp ** 2:
            raise SingularityError("argument lies in range(Z)")
        t = float(np.clip(inner_z(cfg, x, y) / np.sqrt(nx2 * ny2), -1.0, 1.0))
        d = self.values(cfg.Z.T @ np.asarray(x, dtype=float), cfg.Z.T @ np.asarray(y, dtype=float))
        return self._basis.synth(d, t)


def musin_coeffs(K, cfg: SphereConfig, d_max: int = DEFAULT_D_MAX, check: bool = True,
                 check_tol: float = 1e-8, seed=0) -> TransportedCoefficients:
    """Coefficient kernels of a fixed-configuration invariant expansion.

    K must be a kernel on S^{n-1} invariant under the stabilizer of cfg
    (orthogonal maps fixing every column of Z); with check=True that is
    verified on sampled stabilizer elements before any transport happens.
    """
    K = _as_sphere_kernel(K, cfg.n)
    cfg._require_full_rank()
    if cfg.n - cfg.r < 3:
        raise DomainError(f"fiber sphere needs n - r >= 3, got n={cfg.n}, r={cfg.r}")
    if check:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(100):
            x, y = sample_sphere(cfg.n, 2, rng)
            M = stabilizer_element(cfg, sample_orthogonal(cfg.n - cfg.r, rng))
            worst = max(worst, abs(K(M @ x, M @ y) - K(x, y)))
        if worst > check_tol:
            raise InvarianceError(
                f"kernel is not stabilizer invariant: max residual {worst:.3e} exceeds {check_tol:.1e}")
    return TransportedCoefficients(K, cfg, d_max)
