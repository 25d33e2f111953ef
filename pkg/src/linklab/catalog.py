"""Constructors for the three-component link families and their helpers.

The family builder places, in R^n with coefficients ``(c1, c2, c3, c4)``
satisfying ``0 < c3 < c1 < c2 < c4``:

* component 1 - a round sphere of radius c1 spanning the leading coordinates,
* component 2 - a round sphere of radius c2 spanning the trailing coordinates,
* component 3 - an ellipsoid with short semi-axes c3 and long semi-axes c4
  bridging the two blocks.

Also here: flat bounding balls, the capped sphere closing the upper half of
the ellipsoid, great spheres for the lifted picture, the two generator
loops through the origin, and curved membranes for crossing words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distance import BallChart, MembraneChart, SphereChart
from .geometry import (
    DomainError,
    EmbeddedSphere,
    FlatBall,
    HalfBall,
    as_point,
)

DEFAULT_COEFFS = (2.0, 3.0, 1.0, 4.0)


class UnsupportedFamilyError(DomainError):
    """Raised for operations defined only on part of the family grid."""


def _axes(n: int, idx) -> np.ndarray:
    F = np.zeros((len(idx), n))
    for row, col in enumerate(idx):
        F[row, col] = 1.0
    return F


@dataclass(frozen=True, eq=False)
class Link:
    """A three-component link of the family grid."""

    i: int
    j: int
    ambient_dim: int
    coeffs: tuple
    components: tuple  # (round sphere 1, round sphere 2, ellipsoid)

    def component(self, m: int) -> EmbeddedSphere:
        if m not in (1, 2, 3):
            raise DomainError("component index must be 1, 2 or 3")
        return self.components[m - 1]

    @property
    def equator(self) -> EmbeddedSphere:
        """Round sphere in the hyperplane where the trailing block vanishes."""
        return self.components[0]

    @property
    def axis_sphere(self) -> EmbeddedSphere:
        """Round sphere in the subspace where the leading block vanishes."""
        return self.components[1]

    @property
    def ellipsoid(self) -> EmbeddedSphere:
        return self.components[2]

    def to_json_dict(self) -> dict:
        return {
            "family": "L",
            "i": self.i,
            "j": self.j,
            "n": self.ambient_dim,
            "coeffs": list(self.coeffs),
            "components": [
                {
                    "center": comp.center.tolist(),
                    "frame": comp.frame.tolist(),
                    "radii": comp.radii.tolist(),
                }
                for comp in self.components
            ],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "Link":
        comps = tuple(
            EmbeddedSphere(
                np.array(c["center"], dtype=float),
                np.array(c["frame"], dtype=float),
                np.array(c["radii"], dtype=float),
            )
            for c in doc["components"]
        )
        return Link(
            i=int(doc["i"]),
            j=int(doc["j"]),
            ambient_dim=int(doc["n"]),
            coeffs=tuple(float(c) for c in doc["coeffs"]),
            components=comps,
        )


def near_round_coeffs(eps: float) -> tuple:
    """Coefficient set whose components are arbitrarily close to round."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    return (1.0 + eps, 1.0 + 2.0 * eps, 1.0, 1.0 + 3.0 * eps)


def build_family(i: int, j: int, n: int, coeffs=DEFAULT_COEFFS) -> Link:
    """Build the link with indices (i, j) in R^n.

    Component dimensions are n-j-2, n-i-1 and i+j.  Requires n >= 3, j >= 0,
    1 <= i <= n-2-j and coefficient ordering 0 < c3 < c1 < c2 < c4 (which
    certifies that the components are pairwise disjoint).
    """
    if n < 3:
        raise DomainError("ambient dimension must be at least 3")
    if j < 0:
        raise DomainError("j must be nonnegative")
    if not 1 <= i <= n - 2 - j:
        raise DomainError(f"need 1 <= i <= n-2-j, got i={i}, j={j}, n={n}")
    c1, c2, c3, c4 = (float(c) for c in coeffs)
    if not 0 < c3 < c1 < c2 < c4:
        raise DomainError("coefficients must satisfy 0 < c3 < c1 < c2 < c4")

    sphere1 = EmbeddedSphere(
        np.zeros(n), _axes(n, range(n - j - 1)), np.full(n - j - 1, c1)
    )
    sphere2 = EmbeddedSphere(
        np.zeros(n), _axes(n, range(i, n)), np.full(n - i, c2)
    )
    ell_frame = _axes(n, list(range(i)) + list(range(n - j - 1, n)))
    ell_radii = np.concatenate([np.full(i, c3), np.full(j + 1, c4)])
    ellipsoid = EmbeddedSphere(np.zeros(n), ell_frame, ell_radii)
    return Link(
        i=i,
        j=j,
        ambient_dim=n,
        coeffs=(c1, c2, c3, c4),
        components=(sphere1, sphere2, ellipsoid),
    )


def bounding_balls(link: Link) -> tuple:
    """The flat balls bounded by the three components, in component order."""
    return tuple(comp.boundary_of() for comp in link.components)


def _cap_orientation_sign(p: int) -> int:
    """Orientation of the cap patch making hemisphere + cap a closed cycle.

    Compares the boundary orientations the two patches induce on their
    shared rim; the cap sign is chosen so they cancel.
    """
    hemi = np.zeros((p + 1, p + 1))
    hemi[0, 0] = 1.0          # rim parameter point
    hemi[p, 1] = -1.0         # outward direction, out of the upper half
    for col in range(2, p + 1):
        hemi[col - 1, col] = 1.0
    s_h = 1.0 if np.linalg.det(hemi) > 0 else -1.0
    return int(-s_h)


@dataclass(frozen=True, eq=False)
class CappedSphere:
    """Piecewise sphere: a hemisphere patch closed by a flat disk patch.

    The hemisphere is the part of ``hemisphere`` with nonnegative last frame
    coordinate; ``cap_orientation`` orients the cap so that the two patches
    form a closed cycle.
    """

    hemisphere: EmbeddedSphere
    cap: FlatBall
    cap_orientation: int = 0

    def __post_init__(self):
        hemi, cap = self.hemisphere, self.cap
        if cap.ball_dim != hemi.sphere_dim:
            raise DomainError("cap dimension must match the hemisphere dimension")
        gap = max(
            float(np.max(np.abs(hemi.center - cap.center))),
            float(np.max(np.abs(hemi.frame[:-1] - cap.frame))),
            float(np.max(np.abs(hemi.radii[:-1] - cap.radii))),
        )
        if gap > 1e-10:
            raise DomainError("cap boundary does not match the hemisphere rim")
        if self.cap_orientation == 0:
            object.__setattr__(
                self, "cap_orientation", _cap_orientation_sign(hemi.sphere_dim)
            )

    @property
    def ambient_dim(self) -> int:
        return self.hemisphere.ambient_dim

    @property
    def sphere_dim(self) -> int:
        return self.hemisphere.sphere_dim

    def rim_points(self, U_rim: np.ndarray) -> tuple:
        """Embed rim parameters through both patches (they must agree)."""
        U_rim = np.atleast_2d(np.asarray(U_rim, dtype=float))
        hemi_param = np.concatenate(
            [U_rim, np.zeros((U_rim.shape[0], 1))], axis=1
        )
        return self.hemisphere.points(hemi_param), self.cap.points(U_rim)

    def charts(self):
        return [SphereChart(self.hemisphere, half=True), BallChart(self.cap)]


def cap_upper_half(link: Link) -> tuple:
    """Close the upper half of the ellipsoid with its equatorial disk.

    Returns the capped sphere together with the upper half of the
    ellipsoidal ball it bounds.  Defined only for j = 0 families.
    """
    if link.j != 0:
        raise UnsupportedFamilyError("capping is defined only for j = 0 families")
    ell = link.ellipsoid
    cap = FlatBall(ell.center, ell.frame[:-1], ell.radii[:-1])
    capped = CappedSphere(hemisphere=ell, cap=cap)
    half_ball = HalfBall(FlatBall(ell.center, ell.frame, ell.radii))
    return capped, half_ball


@dataclass(frozen=True, eq=False)
class GreatSpheres:
    """Origin-centered great spheres used by the lifted separation picture."""

    axis: EmbeddedSphere          # lift of component 2 (fixed by the lift)
    complement: EmbeddedSphere    # complementary great sphere
    separation: EmbeddedSphere    # great sphere containing the lifted cap
    poles: tuple                  # the two points where axis meets separation


def great_spheres(i: int, n: int, radius: float = 3.0) -> GreatSpheres:
    """Great spheres of the radius-R n-sphere in R^{n+1} for indices (i, n)."""
    if not 1 <= i <= n - 2:
        raise DomainError("need 1 <= i <= n-2")
    amb = n + 1
    axis = EmbeddedSphere(
        np.zeros(amb), _axes(amb, range(i, n)), np.full(n - i, radius)
    )
    complement = EmbeddedSphere(
        np.zeros(amb), _axes(amb, list(range(i)) + [n]), np.full(i + 1, radius)
    )
    separation = EmbeddedSphere(
        np.zeros(amb),
        _axes(amb, list(range(i)) + [n - 1, n]),
        np.full(i + 2, radius),
    )
    pole = np.zeros(amb)
    pole[n - 1] = radius
    return GreatSpheres(
        axis=axis, complement=complement, separation=separation,
        poles=(pole, -pole),
    )


@dataclass(frozen=True, eq=False)
class LoopCurve:
    """Closed parametrized curve t in [0, 1) -> R^n with known velocity."""

    point_fn: object = field(repr=False)
    velocity_fn: object = field(repr=False)
    ambient_dim: int = 0
    label: str = ""

    def points(self, T) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        return self.point_fn(np.atleast_1d(T))

    def velocities(self, T) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        return self.velocity_fn(np.atleast_1d(T))

    def shifted(self, dt: float) -> "LoopCurve":
        return LoopCurve(
            point_fn=lambda T: self.point_fn(T + dt),
            velocity_fn=lambda T: self.velocity_fn(T + dt),
            ambient_dim=self.ambient_dim,
            label=f"{self.label}@+{dt:g}",
        )

    def translated(self, vec) -> "LoopCurve":
        vec = as_point(vec)
        return LoopCurve(
            point_fn=lambda T: self.point_fn(T) + vec,
            velocity_fn=self.velocity_fn,
            ambient_dim=self.ambient_dim,
            label=f"{self.label}+shift",
        )

    def reversed(self) -> "LoopCurve":
        return LoopCurve(
            point_fn=lambda T: self.point_fn(-T),
            velocity_fn=lambda T: -self.velocity_fn(-T),
            ambient_dim=self.ambient_dim,
            label=f"{self.label}~rev",
        )

    def charts(self):
        from .distance import LoopChart

        return [LoopChart(self)]


def circle_loop(center, axis_a, axis_b, radius_a, radius_b, label="loop") -> LoopCurve:
    """Ellipse t -> center + ra*cos(2 pi t)*axis_a + rb*sin(2 pi t)*axis_b."""
    center = as_point(center)
    axis_a = as_point(axis_a)
    axis_b = as_point(axis_b)

    def point_fn(T):
        ang = 2.0 * math.pi * T
        return (
            center
            + np.outer(radius_a * np.cos(ang), axis_a)
            + np.outer(radius_b * np.sin(ang), axis_b)
        )

    def velocity_fn(T):
        ang = 2.0 * math.pi * T
        return 2.0 * math.pi * (
            np.outer(-radius_a * np.sin(ang), axis_a)
            + np.outer(radius_b * np.cos(ang), axis_b)
        )

    return LoopCurve(point_fn, velocity_fn, center.shape[0], label)


def ellipsoid_loop(link: Link) -> LoopCurve:
    """The ellipse component as an oriented loop (i = 1 families only).

    Starts at (c3, 0, ..., 0) and initially moves in the positive last
    coordinate.
    """
    if link.i != 1 or link.j != 0:
        raise UnsupportedFamilyError("the ellipsoid is a loop only when i=1, j=0")
    n = link.ambient_dim
    c1, c2, c3, c4 = link.coeffs
    e1 = np.eye(n)[0]
    en = np.eye(n)[-1]
    return circle_loop(np.zeros(n), e1, en, c3, c4, label="ellipse")


@dataclass(frozen=True, eq=False)
class GeneratorLoops:
    """The two generator loops through the origin plus the base segment."""

    axis_meridian: LoopCurve      # encircles component 2
    equator_meridian: LoopCurve   # encircles component 1
    segment: tuple                # straight path (start, end) on the first axis


def generator_loops(n: int, c1: float = 2.0, c2: float = 3.0) -> GeneratorLoops:
    """Loops based at the origin generating the two-component complement."""
    if n < 3:
        raise DomainError("ambient dimension must be at least 3")
    e1 = np.eye(n)[0]
    en = np.eye(n)[-1]
    center_a = c2 * en
    center_b = c1 * e1
    axis_meridian = circle_loop(center_a, -en, e1, c2, c2, label="axis-meridian")
    equator_meridian = circle_loop(center_b, -e1, en, c1, c1, label="equator-meridian")
    return GeneratorLoops(
        axis_meridian=axis_meridian,
        equator_meridian=equator_meridian,
        segment=(np.zeros(n), e1.copy()),
    )


@dataclass(frozen=True, eq=False)
class Membrane:
    """Oriented codimension-1 ball bounded by a link component.

    The membrane is the graph, over its round base ball, of a radial bump of
    the given height pushed along ``direction``: full height inside
    ``rho_in``, smoothstep taper to zero at ``rho_out``, flat beyond.  The
    conormal is ``conormal_sign * direction`` with the sign fixed so the
    conormal completes the base frame to a positive basis of R^n.
    """

    base: FlatBall
    height: float
    rho_in: float
    rho_out: float
    direction: np.ndarray
    conormal_sign: int = 0

    def __post_init__(self):
        object.__setattr__(self, "direction", as_point(self.direction))
        base = self.base
        rfp = float(base.radii[0])
        if not np.allclose(base.radii, rfp):
            raise DomainError("membrane base must be a round ball")
        if base.ball_dim != base.ambient_dim - 1:
            raise DomainError("membrane must have codimension 1")
        if self.height < 0:
            raise DomainError("bump height must be nonnegative")
        if not 0.0 < self.rho_in < self.rho_out <= rfp:
            raise DomainError("need 0 < rho_in < rho_out <= footprint radius")
        d = self.direction
        if abs(np.linalg.norm(d) - 1.0) > 1e-10:
            raise DomainError("push direction must be a unit vector")
        if np.max(np.abs(base.frame @ d)) > 1e-10:
            raise DomainError("push direction must be orthogonal to the base")
        if self.conormal_sign == 0:
            M = np.vstack([base.frame, d])
            object.__setattr__(
                self, "conormal_sign", 1 if np.linalg.det(M) > 0 else -1
            )

    @property
    def ambient_dim(self) -> int:
        return self.base.ambient_dim

    @property
    def footprint_radius(self) -> float:
        return float(self.base.radii[0])

    def profile(self, rho) -> np.ndarray:
        """Bump height at physical footprint radius rho (C^1 smoothstep)."""
        rho = np.asarray(rho, dtype=float)
        tau = np.clip((self.rho_out - rho) / (self.rho_out - self.rho_in), 0.0, 1.0)
        return self.height * tau * tau * (3.0 - 2.0 * tau)

    def profile_deriv(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        tau = (self.rho_out - rho) / (self.rho_out - self.rho_in)
        inside = (tau > 0.0) & (tau < 1.0)
        out = np.zeros_like(rho)
        t = tau[inside]
        out[inside] = self.height * (6.0 * t - 6.0 * t * t) * (
            -1.0 / (self.rho_out - self.rho_in)
        )
        return out

    def points(self, V: np.ndarray) -> np.ndarray:
        """Embed unit-ball parameters (graph over the scaled footprint)."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        rho = self.footprint_radius * np.linalg.norm(V, axis=1)
        flat = self.base.points(V)
        return flat + np.outer(self.profile(rho), self.direction)

    def side_values(self, X: np.ndarray) -> tuple:
        """Signed height above the membrane and footprint radius, batched.

        The sign is taken along the +direction axis; multiply its crossing
        rate by ``conormal_sign`` to read letters.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rel = X - self.base.center
        height = rel @ self.direction
        Y = rel @ self.base.frame.T
        rho = np.linalg.norm(Y, axis=1)
        return height - self.profile(rho), rho

    def boundary_sphere(self) -> EmbeddedSphere:
        return self.base.boundary_sphere()

    def charts(self):
        return [MembraneChart(self)]

    def interior_chart(self, vmax: float) -> MembraneChart:
        """Chart over the inner vmax fraction of the footprint (rim audits)."""
        return MembraneChart(self, vmax=vmax)


def flat_membrane(ball: FlatBall, direction=None) -> Membrane:
    """A flat ball viewed as a zero-height membrane with canonical conormal."""
    n = ball.ambient_dim
    if ball.ball_dim != n - 1:
        raise DomainError("flat membranes must have codimension 1")
    if direction is None:
        q, _ = np.linalg.qr(ball.frame.T, mode="complete")
        direction = q[:, -1]
        if np.linalg.det(np.vstack([ball.frame, direction])) < 0:
            direction = -direction
    rfp = float(ball.radii[0])
    return Membrane(
        base=ball,
        height=0.0,
        rho_in=rfp / 3.0,
        rho_out=2.0 * rfp / 3.0,
        direction=direction,
    )


def bump_membrane(link: Link, height: float = 2.2, radii=(2.2, 2.8),
                  direction=None) -> Membrane:
    """Graph membrane over the second component's ball, pushed aside.

    The bump makes room so the membrane can avoid the first component and
    its flat ball; validity is checked separately by the word machinery.
    Defined for i = 1, j = 0 families, where the second component has
    codimension 2 and bounds a codimension-1 ball.
    """
    if link.i != 1 or link.j != 0:
        raise UnsupportedFamilyError("bump membranes require an i=1, j=0 family")
    n = link.ambient_dim
    rho_in, rho_out = (float(r) for r in radii)
    if direction is None:
        direction = np.eye(n)[0]
    base = link.axis_sphere.boundary_of()
    return Membrane(
        base=base,
        height=float(height),
        rho_in=rho_in,
        rho_out=rho_out,
        direction=as_point(direction),
    )
