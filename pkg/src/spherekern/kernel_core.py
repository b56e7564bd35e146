"""Kernel abstractions with sampling-based positive-definiteness and invariance checks.

A kernel is a symmetric bivariate function on the sphere; a bundle kernel
additionally takes a configuration Z and is a kernel on the fiber over each
Z. All verification here is randomized sampling, never a proof: a pass is
evidence, a fail is a certified counterexample (the witness point set).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .sphere import SphereConfig, random_config, sample_orthogonal, sample_sphere

__all__ = [
    "Kernel",
    "kernel_sum",
    "kernel_product",
    "gram",
    "GramReport",
    "check_pd",
    "all_passed",
    "InvarianceReport",
    "check_invariance",
    "BochnerReport",
    "bochner_check",
]


class Kernel:
    """Evaluator plus domain descriptor.

    r = 0: plain sphere kernel, fn(x, y) -> float.
    r > 0: bundle kernel over r-point configurations, fn(x, y, Z) -> float
    with Z a SphereConfig. Evaluators must be pure (no hidden mutable
    state); that contract is what makes concurrent use safe.
    """

    def __init__(self, n: int, fn, r: int = 0, name: str = ""):
        self.n = int(n)
        self.r = int(r)
        self.fn = fn
        self.name = name

    def __call__(self, x, y, Z: SphereConfig | None = None) -> float:
        if self.r == 0:
            return float(self.fn(x, y))
        if Z is None:
            raise DomainError("bundle kernel requires a configuration Z")
        return float(self.fn(x, y, Z))

    def __repr__(self):
        tag = self.name or "kernel"
        return f"Kernel({tag}, n={self.n}, r={self.r})"


def _same_domain(kernels):
    first = kernels[0]
    for k in kernels[1:]:
        if (k.n, k.r) != (first.n, first.r):
            raise DomainError(f"kernel domain mismatch: {k!r} vs {first!r}")
    return first


def kernel_sum(*kernels: Kernel) -> Kernel:
    """Pointwise sum; p.d. whenever every summand is."""
    first = _same_domain(kernels)
    if first.r == 0:
        fn = lambda x, y: sum(k.fn(x, y) for k in kernels)
    else:
        fn = lambda x, y, Z: sum(k.fn(x, y, Z) for k in kernels)
    return Kernel(first.n, fn, r=first.r, name="+".join(k.name or "k" for k in kernels))


def kernel_product(*kernels: Kernel) -> Kernel:
    """Pointwise (Schur) product; p.d. whenever every factor is."""
    first = _same_domain(kernels)
    if first.r == 0:
        fn = lambda x, y: np.prod([k.fn(x, y) for k in kernels])
    else:
        fn = lambda x, y, Z: np.prod([k.fn(x, y, Z) for k in kernels])
    return Kernel(first.n, fn, r=first.r, name="*".join(k.name or "k" for k in kernels))


def gram(K: Kernel, points, Z: SphereConfig | None = None) -> np.ndarray:
    """Gram matrix of K at the given points (rows), exactly symmetric.

    Only the upper triangle is evaluated; the lower is mirrored.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != K.n:
        raise DomainError(f"points live in R^{pts.shape[1]}, kernel domain is R^{K.n}")
    m = pts.shape[0]
    G = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            G[i, j] = K(pts[i], pts[j], Z) if K.r else K(pts[i], pts[j])
            G[j, i] = G[i, j]
    return G


@dataclass
class GramReport:
    """Eigenvalue summary of one sampled Gram matrix.

    Pass means min_eig >= -tol * max(1, max_eig). On failure the sample
    (and configuration, for bundle kernels) is kept as the witness.
    """

    m: int
    min_eig: float
    max_eig: float
    tol: float
    passed: bool
    witness_points: np.ndarray | None = field(default=None, repr=False)
    witness_Z: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "m": self.m,
            "min_eig": self.min_eig,
            "max_eig": self.max_eig,
            "tol": self.tol,
            "passed": self.passed,
        }
        if self.witness_points is not None:
            out["witness_points"] = self.witness_points.tolist()
            if self.witness_Z is not None:
                out["witness_Z"] = self.witness_Z.tolist()
        return out


def _grade(G: np.ndarray, tol: float) -> tuple[float, float, bool]:
    eigs = np.linalg.eigvalsh(0.5 * (G + G.T))
    lo, hi = float(eigs[0]), float(eigs[-1])
    return lo, hi, lo >= -tol * max(1.0, hi)


def grade_gram(G: np.ndarray, tol: float = 1e-8) -> GramReport:
    """GramReport for an explicitly assembled matrix."""
    lo, hi, ok = _grade(G, tol)
    return GramReport(m=G.shape[0], min_eig=lo, max_eig=hi, tol=tol, passed=ok)


def check_pd(K: Kernel, n: int | None = None, trials: int = 20, m: int = 40,
             seed=0, tol: float = 1e-8, threads: int = 1) -> list[GramReport]:
    """Randomized positive-definiteness check; one GramReport per trial.

    Each trial samples m sphere points (and a fresh full-rank configuration
    for bundle kernels) and grades the Gram matrix. Overall pass iff every
    trial passes; failing trials carry their point set as a witness.
    """
    if m < 2:
        raise DomainError("need at least 2 points per trial")
    n = K.n if n is None else int(n)
    if n != K.n:
        raise DomainError(f"kernel lives on S^{K.n - 1}, asked to sample S^{n - 1}")
    root = np.random.default_rng(seed)
    trial_seeds = root.integers(0, 2 ** 63 - 1, size=trials)

    def one_trial(s) -> GramReport:
        rng = np.random.default_rng(int(s))
        pts = sample_sphere(n, m, rng)
        Z = random_config(n, K.r, rng) if K.r else None
        lo, hi, ok = _grade(gram(K, pts, Z), tol)
        rep = GramReport(m=m, min_eig=lo, max_eig=hi, tol=tol, passed=ok)
        if not ok:
            rep.witness_points = pts
            rep.witness_Z = Z.Z if Z is not None else None
        return rep

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one_trial, trial_seeds))
    return [one_trial(s) for s in trial_seeds]


def all_passed(reports: list[GramReport]) -> bool:
    return all(r.passed for r in reports)


@dataclass
class InvarianceReport:
    max_residual: float
    tol: float
    trials: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "tol": self.tol,
            "trials": self.trials,
            "passed": self.passed,
        }


def check_invariance(K: Kernel, n: int | None = None, r: int | None = None,
                     trials: int = 500, seed=0, tol: float = 1e-9) -> InvarianceReport:
    """Residuals of K under simultaneous rotation of all arguments.

    Draws random (x, y, Z, M) and compares K(Mx, My, MZ) with K(x, y, Z)
    (Z omitted for plain sphere kernels). Pass iff the max residual is
    below tol.
    """
    n = K.n if n is None else int(n)
    r = K.r if r is None else int(r)
    if (n, r) != (K.n, K.r):
        raise DomainError("domain mismatch between kernel and requested check")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x, y = sample_sphere(n, 2, rng)
        M = sample_orthogonal(n, rng)
        if r == 0:
            resid = abs(K(x, y) - K(M @ x, M @ y))
        else:
            cfg = random_config(n, r, rng)
            moved = SphereConfig(M @ cfg.Z)
            resid = abs(K(x, y, cfg) - K(M @ x, M @ y, moved))
        worst = max(worst, resid)
    return InvarianceReport(max_residual=worst, tol=tol, trials=trials, passed=worst < tol)


@dataclass
class BochnerReport:
    estimate: float
    scale: float
    rel_tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "scale": self.scale,
            "rel_tol": self.rel_tol,
            "passed": self.passed,
        }


def bochner_check(K: Kernel, g=None, samples: int = 400, seed=0,
                  rel_tol: float = 1e-2, Z: SphereConfig | None = None) -> BochnerReport:
    """Monte-Carlo double integral of K(x,y) g(x) g(y) over the uniform measure.

    Low-precision cross-check of the integral p.d. criterion; the Gram
    sampling in check_pd subsumes it in practice. Uses the uniform surface
    measure, which is strictly positive on open subsets of the sphere.
    """
    rng = np.random.default_rng(seed)
    if g is None:
        w = sample_sphere(K.n, 1, rng)[0]
        g = lambda x: 1.0 + float(x @ w)
    pts = sample_sphere(K.n, samples, rng)
    if K.r and Z is None:
        Z = random_config(K.n, K.r, rng)
    gv = np.array([g(p) for p in pts])
    G = gram(K, pts, Z)
    quad_form = float(gv @ G @ gv) / samples ** 2
    scale = float(np.mean(np.abs(G)) * np.mean(gv ** 2)) + 1e-300
    return BochnerReport(estimate=quad_form, scale=scale, rel_tol=rel_tol,
                         passed=quad_form >= -rel_tol * scale)
