"""Geometry of the unit sphere and of point configurations Z.

A configuration is an n x r matrix with unit columns. Operations here
provide the projections onto its range and complement, the bundle
coordinate maps between the sphere and (fiber sphere) x (base disk)
coordinates, stabilizer elements, and seeded samplers.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, RankError, SingularityError

__all__ = [
    "SphereConfig",
    "ProjectorPair",
    "projectors",
    "map_t1",
    "map_t2",
    "inner_z",
    "stabilizer_element",
    "sample_sphere",
    "sample_orthogonal",
    "random_config",
]

UNIT_TOL = 1e-12
TOL_PERP = 1e-8


@dataclass(frozen=True)
class ProjectorPair:
    """Orthogonal projectors onto range(Z) and its complement.

    `ort` holds an orthonormal basis of range(Z)^perp as columns;
    `gamma` is the factor Z (Z^T Z)^{-1}, so gamma @ u is the range
    point with coordinate vector u.
    """

    Pi: np.ndarray
    PiPerp: np.ndarray
    ort: np.ndarray
    gamma: np.ndarray


class SphereConfig:
    """An n x r configuration of unit vectors with cached rank data.

    Columns must be unit vectors (checked to 1e-12). `full_rank` is defined
    by the smallest singular value exceeding `tol_rank`, which defaults to
    1e-8 times the largest singular value. r = 0 is the empty configuration.
    """

    def __init__(self, Z: np.ndarray, tol_rank: float | None = None):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.ndim != 2:
            raise DomainError("Z must be a 2-d array")
        self.Z = Z
        self.n, self.r = Z.shape
        if self.r > 0:
            norms = np.linalg.norm(Z, axis=0)
            if np.any(np.abs(norms - 1.0) > UNIT_TOL):
                raise DomainError("configuration columns must be unit vectors")
            svals = np.linalg.svd(Z, compute_uv=False)
            self.tol_rank = 1e-8 * svals[0] if tol_rank is None else float(tol_rank)
            self.full_rank = bool(svals[-1] > self.tol_rank)
        else:
            self.tol_rank = 0.0 if tol_rank is None else float(tol_rank)
            self.full_rank = True
        self._proj: ProjectorPair | None = None
        self._gram_inv: np.ndarray | None = None

    @classmethod
    def from_columns(cls, *cols, tol_rank: float | None = None) -> "SphereConfig":
        return cls(np.column_stack(cols), tol_rank=tol_rank)

    @property
    def gram(self) -> np.ndarray:
        return self.Z.T @ self.Z

    @property
    def gram_inv(self) -> np.ndarray:
        if self._gram_inv is None:
            self._require_full_rank()
            if self.r == 0:
                self._gram_inv = np.zeros((0, 0))
            else:
                self._gram_inv = np.linalg.inv(self.gram)
        return self._gram_inv

    def _require_full_rank(self):
        if not self.full_rank:
            raise RankError("configuration is rank deficient")

    @property
    def proj(self) -> ProjectorPair:
        if self._proj is None:
            self._proj = projectors(self)
        return self._proj

    def extend(self, q: np.ndarray) -> "SphereConfig":
        """Configuration [Z q] with one extra column."""
        q = np.asarray(q, dtype=float).reshape(-1)
        return SphereConfig(np.column_stack([self.Z, q]))

    def __repr__(self):
        return f"SphereConfig(n={self.n}, r={self.r}, full_rank={self.full_rank})"


def _fix_column_signs(Q: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: first nonzero entry of each column positive."""
    Q = Q.copy()
    for j in range(Q.shape[1]):
        col = Q[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if len(nz) and col[nz[0]] < 0.0:
            Q[:, j] = -col
    return Q


def projectors(cfg: SphereConfig) -> ProjectorPair:
    """Projector pair for a full-rank configuration.

    Pi = Z (Z^T Z)^{-1} Z^T, PiPerp = I - Pi. The complement basis comes
    from a Householder QR of Z (trailing n-r columns of the full factor),
    sign-fixed so the construction is deterministic.
    """
    cfg._require_full_rank()
    n, r = cfg.n, cfg.r
    if r == 0:
        eye = np.eye(n)
        return ProjectorPair(Pi=np.zeros((n, n)), PiPerp=eye, ort=eye.copy(),
                             gamma=np.zeros((n, 0)))
    gamma = cfg.Z @ cfg.gram_inv
    Pi = gamma @ cfg.Z.T
    Pi = 0.5 * (Pi + Pi.T)
    PiPerp = np.eye(n) - Pi
    Q, _ = np.linalg.qr(cfg.Z, mode="complete")
    ort = _fix_column_signs(Q[:, r:])
    return ProjectorPair(Pi=Pi, PiPerp=PiPerp, ort=ort, gamma=gamma)


def inner_z(cfg: SphereConfig, x: np.ndarray, y: np.ndarray) -> float:
    """Inner product of the components of x and y orthogonal to range(Z).

    Computed in Schur form: x^T y - (Z^T x)^T (Z^T Z)^{-1} (Z^T y). Equals
    (PiPerp x)^T (PiPerp y).
    """
    cfg._require_full_rank()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if cfg.r == 0:
        return float(x @ y)
    zx = cfg.Z.T @ x
    zy = cfg.Z.T @ y
    return float(x @ y - zx @ cfg.gram_inv @ zy)


def map_t1(cfg: SphereConfig, v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Assemble the sphere point with perpendicular direction v and base coordinate u.

    x = ort(Z) v * sqrt(1 - ||gamma(u)||^2) + Z (Z^T Z)^{-1} u. Requires
    ||v|| = 1 and ||gamma(u)|| <= 1; the result is a unit vector.
    """
    cfg._require_full_rank()
    v = np.asarray(v, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if v.shape != (cfg.n - cfg.r,):
        raise DomainError(f"v must have length {cfg.n - cfg.r}")
    if u.shape != (cfg.r,):
        raise DomainError(f"u must have length {cfg.r}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise DomainError("v must be a unit vector")
    proj = cfg.proj
    g = proj.gamma @ u
    g2 = float(g @ g)
    if g2 > 1.0 + 1e-12:
        raise DomainError("base coordinate outside the fiber disk: ||gamma(u)|| > 1")
    scale = np.sqrt(max(1.0 - g2, 0.0))
    return proj.ort @ v * scale + g


def map_t2(cfg: SphereConfig, x: np.ndarray, tol_perp: float = TOL_PERP):
    """Split a sphere point into perpendicular direction and base coordinate.

    Returns (v, u) with v = ort^T x normalized and u = Z^T x. Only defined
    off range(Z): raises SingularityError when ||PiPerp x|| <= tol_perp.
    """
    cfg._require_full_rank()
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (cfg.n,):
        raise DomainError(f"x must have length {cfg.n}")
    proj = cfg.proj
    w = proj.ort.T @ x
    wn = float(np.linalg.norm(w))
    if wn <= tol_perp:
        raise SingularityError("point lies in range(Z); perpendicular part vanishes")
    return w / wn, cfg.Z.T @ x


def stabilizer_element(cfg: SphereConfig, Q: np.ndarray) -> np.ndarray:
    """Orthogonal matrix fixing every column of Z, acting as Q on range(Z)^perp.

    M = Pi + ort Q ort^T for orthogonal (n-r) x (n-r) Q.
    """
    cfg._require_full_rank()
    Q = np.asarray(Q, dtype=float)
    m = cfg.n - cfg.r
    if Q.shape != (m, m):
        raise DomainError(f"Q must be {m} x {m}")
    if np.max(np.abs(Q.T @ Q - np.eye(m))) > 1e-10:
        raise DomainError("Q is not orthogonal")
    proj = cfg.proj
    return proj.Pi + proj.ort @ Q @ proj.ort.T


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_sphere(n: int, count: int, seed=0) -> np.ndarray:
    """Uniform points on the unit sphere, one per row. Deterministic per seed."""
    if n < 1:
        raise DomainError("dimension must be at least 1")
    rng = _rng(seed)
    pts = rng.standard_normal((count, n))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts


def sample_orthogonal(n: int, seed=0) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR of a Gaussian with sign-fixed R diagonal."""
    if n < 1:
        raise DomainError("dimension must be at least 1")
    rng = _rng(seed)
    G = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    return Q * signs


def random_config(n: int, r: int, seed=0, min_sval: float = 1e-3) -> SphereConfig:
    """Random full-rank configuration of r unit vectors in R^n.

    Resamples until the smallest singular value clears `min_sval`, so the
    returned configuration is comfortably inside the full-rank set.
    """
    if r > n:
        raise DomainError("cannot have more than n independent unit columns")
    rng = _rng(seed)
    if r == 0:
        return SphereConfig(np.zeros((n, 0)))
    for _ in range(100):
        cfg = SphereConfig(sample_sphere(n, r, rng).T)
        if cfg.full_rank and np.linalg.svd(cfg.Z, compute_uv=False)[-1] > min_sval:
            return cfg
    raise RankError("failed to sample a well-conditioned configuration")
