"""Dimension-generic spheres and flat balls, with the numeric kernel ops.

Points are plain 1-d float64 arrays.  An :class:`EmbeddedSphere` is the set
``{center + sum_j radii[j] * u[j] * frame[j] : |u| = 1}`` for an orthonormal
frame of ``k+1`` vectors in R^n; a :class:`FlatBall` is the same with
``|u| <= 1``.  Everything here is a pure function of its inputs (plus an
explicit seed where randomness is involved).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FRAME_TOL = 1e-12


class DomainError(ValueError):
    """Raised when an input lies outside an operation's documented domain."""


class SingularInputError(ValueError):
    """Raised when an operation is undefined at the given input."""


def as_point(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise DomainError(f"point must be a 1-d vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("point has non-finite entries")
    return a


def _check_frame(frame: np.ndarray, radii: np.ndarray, n: int) -> None:
    k1, amb = frame.shape
    if amb != n:
        raise DomainError("frame vectors must live in the ambient dimension")
    if k1 > n:
        raise DomainError("frame has more vectors than the ambient dimension")
    gram = frame @ frame.T
    if np.max(np.abs(gram - np.eye(k1))) > 1e-10:
        raise DomainError("frame vectors are not orthonormal")
    if radii.shape != (k1,):
        raise DomainError("radii must match the number of frame vectors")
    if np.any(radii <= 0):
        raise DomainError("radii must be positive")


@dataclass(frozen=True, eq=False)
class EmbeddedSphere:
    """A round or ellipsoidal k-sphere affinely embedded in R^n."""

    center: np.ndarray
    frame: np.ndarray   # (k+1, n) orthonormal rows
    radii: np.ndarray   # (k+1,) positive semi-axes

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "frame", np.array(self.frame, dtype=float))
        object.__setattr__(self, "radii", np.array(self.radii, dtype=float))
        _check_frame(self.frame, self.radii, self.center.shape[0])

    @property
    def ambient_dim(self) -> int:
        return self.center.shape[0]

    @property
    def sphere_dim(self) -> int:
        return self.frame.shape[0] - 1

    def points(self, U: np.ndarray) -> np.ndarray:
        """Embed unit parameter vectors U (..., k+1) into R^n."""
        U = np.asarray(U, dtype=float)
        return self.center + (U * self.radii) @ self.frame

    def implicit_residual(self, X: np.ndarray) -> np.ndarray:
        """Max of quadric residual and off-plane distance, batched."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rel = X - self.center
        Y = rel @ self.frame.T
        quad = np.abs(np.einsum("ij,ij->i", Y / self.radii, Y / self.radii) - 1.0)
        off = np.linalg.norm(rel - Y @ self.frame, axis=1)
        return np.maximum(quad, off)

    def reversed(self) -> "EmbeddedSphere":
        """Same point set with the opposite orientation."""
        frame = self.frame.copy()
        radii = self.radii.copy()
        if frame.shape[0] >= 2:
            frame[[0, 1]] = frame[[1, 0]]
            radii[[0, 1]] = radii[[1, 0]]
        else:
            frame[0] = -frame[0]
        return EmbeddedSphere(self.center, frame, radii)

    def boundary_of(self) -> "FlatBall":
        """The flat ball sharing this sphere's center/frame/radii."""
        return FlatBall(self.center, self.frame, self.radii)


@dataclass(frozen=True, eq=False)
class FlatBall:
    """A flat (k+1)-ball in an affine subspace of R^n."""

    center: np.ndarray
    frame: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "frame", np.array(self.frame, dtype=float))
        object.__setattr__(self, "radii", np.array(self.radii, dtype=float))
        _check_frame(self.frame, self.radii, self.center.shape[0])

    @property
    def ambient_dim(self) -> int:
        return self.center.shape[0]

    @property
    def ball_dim(self) -> int:
        return self.frame.shape[0]

    def boundary_sphere(self) -> EmbeddedSphere:
        return EmbeddedSphere(self.center, self.frame, self.radii)

    def points(self, V: np.ndarray) -> np.ndarray:
        """Embed parameter vectors V (..., k+1) with |V| <= 1."""
        V = np.asarray(V, dtype=float)
        return self.center + (V * self.radii) @ self.frame

    def contains(self, X: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rel = X - self.center
        Y = rel @ self.frame.T
        off = np.linalg.norm(rel - Y @ self.frame, axis=1)
        inside = np.einsum("ij,ij->i", Y / self.radii, Y / self.radii) <= 1.0 + tol
        return inside & (off <= tol)


@dataclass(frozen=True, eq=False)
class HalfBall:
    """The portion of a flat ball where the last frame coordinate is >= 0."""

    ball: FlatBall

    @property
    def ambient_dim(self) -> int:
        return self.ball.ambient_dim

    @property
    def ball_dim(self) -> int:
        return self.ball.ball_dim

    def points(self, V: np.ndarray) -> np.ndarray:
        return self.ball.points(V)


@dataclass(frozen=True)
class ParamPoint:
    """A location in a set's parameter domain: chart index plus coordinates."""

    chart_id: int
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))


def embed(sphere: EmbeddedSphere, u) -> np.ndarray:
    """Map a unit parameter vector to its point on the embedded sphere."""
    u = as_point(u)
    if u.shape[0] != sphere.sphere_dim + 1:
        raise DomainError(
            f"parameter dimension {u.shape[0]} != sphere_dim+1 = {sphere.sphere_dim + 1}"
        )
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise DomainError("parameter vector is not on the unit sphere")
    return sphere.points(u)


def oriented_tangent_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space of S^k at u, as columns.

    The basis is oriented so that det([u | t_1 | ... | t_k]) = +1.  For k = 0
    an empty (1, 0) array is returned; the orientation weight of a 0-sphere
    point is the sign of its single coordinate.
    """
    u = np.asarray(u, dtype=float)
    k1 = u.shape[0]
    if k1 == 1:
        return np.zeros((1, 0))
    s = math.copysign(1.0, u[0])
    v = u.copy()
    v[0] += s
    T = (-2.0 / (v @ v)) * np.outer(v, v[1:])
    T[1:, :] += np.eye(k1 - 1)
    T[:, -1] *= s
    return T


def oriented_tangent_frames(U: np.ndarray) -> np.ndarray:
    """Batched :func:`oriented_tangent_basis`: (m, k+1) -> (m, k+1, k)."""
    U = np.asarray(U, dtype=float)
    m, k1 = U.shape
    if k1 == 1:
        return np.zeros((m, 1, 0))
    s = np.where(U[:, 0] >= 0.0, 1.0, -1.0)
    V = U.copy()
    V[:, 0] += s
    nrm = np.einsum("ij,ij->i", V, V)
    T = (-2.0 / nrm)[:, None, None] * V[:, :, None] * V[:, None, 1:]
    T[:, 1:, :] += np.eye(k1 - 1)
    T[:, :, -1] *= s[:, None]
    return T


def embed_jacobian(sphere: EmbeddedSphere, u) -> np.ndarray:
    """Tangent vectors of the embedded sphere at embed(u), as columns.

    Columns are the images of the oriented orthonormal tangent basis of the
    parameter sphere under the scaled frame map; shape (n, k).
    """
    u = as_point(u)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise DomainError("parameter vector is not on the unit sphere")
    T = oriented_tangent_basis(u)
    return sphere.frame.T @ (sphere.radii[:, None] * T)


def sample_param(seed: int, k: int, m: int) -> np.ndarray:
    """m points distributed uniformly on the round parameter sphere S^k.

    Normalized standard normal vectors; bit-for-bit reproducible per seed.
    """
    if k < 0 or m < 1:
        raise DomainError("need k >= 0 and m >= 1")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, k + 1))
    nrm = np.linalg.norm(X, axis=1)
    bad = nrm < 1e-12
    if np.any(bad):
        X[bad] = 0.0
        X[bad, 0] = 1.0
        nrm[bad] = 1.0
    return X / nrm[:, None]


def stereographic_lift(x, radius: float) -> np.ndarray:
    """Lift points of R^n onto the n-sphere of the given radius in R^{n+1}.

    Projection is from the pole (0, ..., 0, radius); points with |x| = radius
    are fixed.  Accepts a single point or a batch (m, n).
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    r2 = np.einsum("ij,ij->i", X, X)
    R2 = radius * radius
    t = 2.0 * R2 / (r2 + R2)
    top = X * t[:, None]
    last = radius * (r2 - R2) / (r2 + R2)
    out = np.concatenate([top, last[:, None]], axis=1)
    return out[0] if single else out


def stereographic_project(y, radius: float) -> np.ndarray:
    """Inverse of :func:`stereographic_lift`; undefined at the pole."""
    Y = np.asarray(y, dtype=float)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    h = Y[:, -1]
    denom = radius - h
    if np.any(np.abs(denom) < 1e-12 * radius):
        raise SingularInputError("point at (or too close to) the projection pole")
    out = Y[:, :-1] * (radius / denom)[:, None]
    return out[0] if single else out


def reflect_abs(x) -> np.ndarray:
    """Replace the last coordinate by its absolute value."""
    X = np.asarray(x, dtype=float)
    out = X.copy()
    out[..., -1] = np.abs(out[..., -1])
    return out


def retract_complement(x, subspace_basis) -> np.ndarray:
    """Push a sphere point away from a linear subspace onto its complement.

    For x on the origin-centered round sphere of radius R = |x| and V the
    span of ``subspace_basis``, returns R * normalize(proj_{V^perp}(x)), a
    point of V^perp intersected with the sphere.  Points of that set are
    fixed; inputs within 1e-9 of V are rejected as singular.
    """
    x = as_point(x)
    B = np.atleast_2d(np.asarray(subspace_basis, dtype=float))
    if B.shape[1] != x.shape[0]:
        raise DomainError("subspace basis dimension mismatch")
    q, _ = np.linalg.qr(B.T)
    proj = x - q @ (q.T @ x)
    nrm = np.linalg.norm(proj)
    if nrm <= 1e-9:
        raise SingularInputError("point lies on (or too near) the deleted great sphere")
    return (np.linalg.norm(x) / nrm) * proj


def sphere_volume(k: int) -> float:
    """Surface measure of the unit k-sphere."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


def ball_volume(k: int) -> float:
    """Lebesgue measure of the unit k-ball."""
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)
