"""Numerical linking invariants and certificates.

The linking number of two disjoint closed pieces of complementary dimension
(p + q = n - 1) is the degree of the normalized difference map
G(x, y) = (x - y)/|x - y| from the product of the pieces to the unit
(n-1)-sphere.  It is computed two independent ways:

* :func:`linking_number_mc` - Monte Carlo integration of the pullback of the
  volume form, with a defensive importance mixture concentrated where the
  two pieces almost touch;
* :func:`linking_number_preimage` - signed counting of the preimages of a
  regular value by damped multistart Newton.

Orientations come from frame order (plus the cap-closure sign of capped
spheres); only the magnitude of a linking number is geometry, its sign
documents the convention.  Also here: transversal intersection reports,
split certificates, and the crossing-parity separation test on a great
sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc, betaincinv
from scipy.special import beta as beta_fn

from .catalog import CappedSphere, LoopCurve
from .distance import min_distance
from .geometry import (
    DomainError,
    EmbeddedSphere,
    FlatBall,
    HalfBall,
    ParamPoint,
    ball_volume,
    oriented_tangent_basis,
    oriented_tangent_frames,
    sample_param,
    sphere_volume,
    stereographic_lift,
    stereographic_project,
)

_CHUNK = 131072


class RegularValueError(RuntimeError):
    """No perturbation of the target value yielded clean regular preimages."""


class InconclusiveError(RuntimeError):
    """Persistent tangency defeated a crossing-parity computation."""


# ---------------------------------------------------------------------------
# parameter-domain patches


class _SpherePatch:
    """Full or half unit sphere S^k mapped through an embedded sphere."""

    def __init__(self, sphere: EmbeddedSphere, half: bool = False):
        self.sphere = sphere
        self.half = half
        self.dim = sphere.sphere_dim
        self.volume = sphere_volume(self.dim) * (0.5 if half else 1.0)

    def sample(self, rng, m):
        U = rng.standard_normal((m, self.dim + 1))
        nrm = np.linalg.norm(U, axis=1)
        bad = nrm < 1e-300
        if np.any(bad):
            U[bad], nrm[bad] = 0.0, 1.0
            U[bad, 0] = 1.0
        U /= nrm[:, None]
        if self.half:
            U[:, -1] = np.abs(U[:, -1])
        return U

    def eval(self, U):
        X = self.sphere.points(U)
        if self.dim == 0:
            return X, np.zeros((U.shape[0], X.shape[1], 0)), U[:, 0].copy()
        T = oriented_tangent_frames(U)
        scaled = self.sphere.radii[None, :, None] * T
        C = np.einsum("mkj,kn->mnj", scaled, self.sphere.frame)
        return X, C, np.ones(U.shape[0])

    # geodesic caps (importance-sampling support)
    def max_cap_radius(self, mu):
        if self.dim < 1:
            return 0.0
        limit = math.pi / 2.0 - 1e-3
        if self.half:
            lat = math.asin(min(max(float(mu[-1]), 0.0), 1.0))
            limit = min(limit, max(lat - 0.02, 0.0))
        return limit

    def cap_area(self, rho):
        k = self.dim
        s2 = math.sin(rho) ** 2
        return (
            sphere_volume(k - 1)
            * 0.5
            * beta_fn(k / 2.0, 0.5)
            * betainc(k / 2.0, 0.5, s2)
        )

    def sample_cap(self, rng, m, mu, rho):
        k = self.dim
        frac = betainc(k / 2.0, 0.5, math.sin(rho) ** 2)
        Y = betaincinv(k / 2.0, 0.5, rng.random(m) * frac)
        t = np.arcsin(np.sqrt(np.clip(Y, 0.0, 1.0)))
        Xi = rng.standard_normal((m, k))
        nrm = np.linalg.norm(Xi, axis=1)
        nrm[nrm < 1e-300] = 1.0
        Xi /= nrm[:, None]
        B = oriented_tangent_basis(np.asarray(mu, dtype=float))
        return np.cos(t)[:, None] * mu + np.sin(t)[:, None] * (Xi @ B.T)

    def cap_density(self, U, mu, rho):
        inside = U @ mu >= math.cos(rho)
        return inside / self.cap_area(rho)


class _BallPatch:
    """Flat unit-ball patch: the cap of a capped sphere, or a target ball."""

    def __init__(self, ball: FlatBall, sigma: int = 1, half: bool = False):
        self.ball = ball
        self.sigma = sigma
        self.half = half
        self.dim = ball.ball_dim
        self.volume = ball_volume(self.dim) * (0.5 if half else 1.0)

    def sample(self, rng, m):
        X = rng.standard_normal((m, self.dim))
        nrm = np.linalg.norm(X, axis=1)
        nrm[nrm < 1e-300] = 1.0
        r = rng.random(m) ** (1.0 / self.dim)
        V = X / nrm[:, None] * r[:, None]
        if self.half:
            V[:, -1] = np.abs(V[:, -1])
        return V

    def eval(self, V):
        X = self.ball.points(V)
        cols = (self.ball.frame.T * self.ball.radii).astype(float)
        C = np.broadcast_to(cols, (V.shape[0],) + cols.shape).copy()
        return X, C, np.full(V.shape[0], float(self.sigma))

    def max_cap_radius(self, mu):
        return 0.0  # no importance caps on flat patches


class _LoopPatch:
    """A closed parametrized curve; parameter t runs over [0, 1)."""

    def __init__(self, loop: LoopCurve):
        self.loop = loop
        self.dim = 1
        self.volume = 1.0

    def sample(self, rng, m):
        return rng.random((m, 1))

    def eval(self, T):
        t = T[:, 0]
        X = self.loop.points(t)
        C = self.loop.velocities(t)[:, :, None]
        return X, C, np.ones(T.shape[0])

    def max_cap_radius(self, mu):
        return 0.25

    def cap_area(self, rho):
        return 2.0 * rho

    def sample_cap(self, rng, m, mu, rho):
        return (mu[0] + rho * (2.0 * rng.random((m, 1)) - 1.0)) % 1.0

    def cap_density(self, T, mu, rho):
        d = np.abs((T[:, 0] - mu[0] + 0.5) % 1.0 - 0.5)
        return (d <= rho) / (2.0 * rho)


def patches_of(obj) -> list:
    if isinstance(obj, CappedSphere):
        return [
            _SpherePatch(obj.hemisphere, half=True),
            _BallPatch(obj.cap, sigma=obj.cap_orientation),
        ]
    if isinstance(obj, EmbeddedSphere):
        return [_SpherePatch(obj)]
    if isinstance(obj, LoopCurve):
        return [_LoopPatch(obj)]
    if isinstance(obj, HalfBall):
        return [_BallPatch(obj.ball, half=True)]
    if isinstance(obj, FlatBall):
        return [_BallPatch(obj)]
    raise DomainError(f"no parameter patches for {type(obj).__name__}")


def manifold_dim(obj) -> int:
    if isinstance(obj, (CappedSphere, EmbeddedSphere)):
        return obj.sphere_dim
    if isinstance(obj, LoopCurve):
        return 1
    if isinstance(obj, HalfBall):
        return obj.ball_dim
    if isinstance(obj, FlatBall):
        return obj.ball_dim
    raise DomainError(f"not a supported piece: {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Monte Carlo degree


@dataclass(frozen=True)
class LinkingEstimate:
    """Monte Carlo linking estimate with an honest standard error."""

    value: float
    std_error: float
    rounded: int
    samples: int
    seed: int

    @property
    def consistent(self) -> bool:
        return abs(self.value - self.rounded) < 0.5


def _integrand(pa, pb, U, W, n):
    """Pullback integrand of the degree of G(x, y) = (y - x)/|y - x|.

    Columns are ordered [-dA | +dB | G]; in R^3 this reproduces the
    classical Gauss linking integral, and in every dimension the value
    matches signed membrane-crossing counts.
    """
    Xa, Ca, wa = pa.eval(U)
    Xb, Cb, wb = pb.eval(W)
    D = Xb - Xa
    nd2 = np.einsum("ij,ij->i", D, D)
    m = U.shape[0]
    M = np.empty((m, n, n))
    ka = Ca.shape[2]
    if ka:
        M[:, :, :ka] = -Ca
    if Cb.shape[2]:
        M[:, :, ka : n - 1] = Cb
    M[:, :, n - 1] = D
    det = np.linalg.det(M)
    return det / nd2 ** (n / 2.0) * wa * wb


def _mixture_scales(pa, pb, mu_a, mu_b, delta):
    """Dyadic product-cap scales around the closest-approach witness."""
    rho_max = min(pa.max_cap_radius(mu_a), pb.max_cap_radius(mu_b))
    scales = []
    rho = max(min(delta, 0.5), 1e-3)
    while len(scales) < 12 and rho < rho_max:
        scales.append(rho)
        rho *= 2.0
    return scales


def _pair_estimate(pa, pb, n, m, rng, witness=None):
    """Degree-integral contribution of one patch pair, and its std error."""
    scales = []
    mu_a = mu_b = None
    if witness is not None:
        mu_a, mu_b, delta = witness
        if delta < 0.6:
            scales = _mixture_scales(pa, pb, mu_a, mu_b, delta)
    if scales:
        comps = [("uniform", 0.5)] + [(rho, 0.5 / len(scales)) for rho in scales]
    else:
        comps = [("uniform", 1.0)]

    def density(U, W):
        q = np.full(U.shape[0], comps[0][1] / (pa.volume * pb.volume))
        for rho, w in comps[1:]:
            q += w * pa.cap_density(U, mu_a, rho) * pb.cap_density(W, mu_b, rho)
        return q

    total = 0.0
    var = 0.0
    left = m
    for idx, (kind, w) in enumerate(comps):
        mc = left if idx == len(comps) - 1 else min(int(round(m * w)), left)
        left -= mc
        if mc <= 0:
            continue
        s1 = s2 = 0.0
        done = 0
        while done < mc:
            b = min(_CHUNK, mc - done)
            if kind == "uniform":
                U = pa.sample(rng, b)
                W = pb.sample(rng, b)
            else:
                U = pa.sample_cap(rng, b, mu_a, kind)
                W = pb.sample_cap(rng, b, mu_b, kind)
            vals = _integrand(pa, pb, U, W, n) / density(U, W)
            s1 += float(np.sum(vals))
            s2 += float(np.sum(vals * vals))
            done += b
        mean = s1 / mc
        total += w * mean
        var += w * w * max(s2 / mc - mean * mean, 0.0) / mc
    return total, math.sqrt(var)


def _check_linking_pair(A, B):
    n = A.ambient_dim
    if B.ambient_dim != n:
        raise DomainError("pieces live in different ambient dimensions")
    p = manifold_dim(A)
    q = manifold_dim(B)
    if p + q != n - 1:
        raise DomainError(
            f"linking needs complementary dimensions p+q = n-1, got {p}+{q} != {n - 1}"
        )
    return n, p, q


def linking_number_mc(A, B, samples: int = 2_000_000, seed: int = 0) -> LinkingEstimate:
    """Monte Carlo generalized linking number of two disjoint closed pieces.

    Deterministic for a fixed seed.  For capped spheres the integral is
    taken per patch and summed (the rim is measure zero).  Raises
    ``DomainError`` if dimensions are not complementary or the pieces are
    not numerically disjoint.
    """
    n, p, q = _check_linking_pair(A, B)
    sep = min_distance(A, B, budget=32, seed=seed)
    if sep.distance <= 1e-6:
        raise DomainError("pieces are not numerically disjoint")
    rng = np.random.default_rng(np.random.SeedSequence([29, seed]))
    patches_a = patches_of(A)
    patches_b = patches_of(B)
    wa_param, wb_param = sep.witness_params

    shares = []
    for ia, pa in enumerate(patches_a):
        for ib, pb in enumerate(patches_b):
            shares.append((ia, ib, pa.volume * pb.volume))
    total_vol = sum(s[2] for s in shares)

    value = 0.0
    var = 0.0
    remaining = samples
    for idx, (ia, ib, vol) in enumerate(shares):
        if idx == len(shares) - 1:
            mpair = remaining
        else:
            mpair = min(max(int(round(samples * vol / total_vol)), 1024), remaining)
        remaining -= mpair
        if mpair <= 0:
            continue
        witness = None
        if ia == wa_param.chart_id and ib == wb_param.chart_id:
            witness = (wa_param.u, wb_param.u, sep.distance)
        est, se = _pair_estimate(patches_a[ia], patches_b[ib], n, mpair, rng, witness)
        value += est
        var += se * se
    norm = sphere_volume(n - 1)
    value /= norm
    return LinkingEstimate(
        value=value,
        std_error=math.sqrt(var) / norm,
        rounded=int(round(value)),
        samples=samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# multistart Newton on patch products


class _RootSide:
    """Newton-system view of one patch: map, Jacobian, gauge, feasibility."""

    def __init__(self, patch):
        self.patch = patch
        if isinstance(patch, _SpherePatch):
            self.nvars = patch.dim + 1
            self.gauged = True
        elif isinstance(patch, _BallPatch):
            self.nvars = patch.dim
            self.gauged = False
        else:
            self.nvars = 1
            self.gauged = False

    def value(self, z):
        if isinstance(self.patch, _SpherePatch):
            return self.patch.sphere.points(z[None, :])[0]
        if isinstance(self.patch, _BallPatch):
            return self.patch.ball.points(z[None, :])[0]
        return self.patch.loop.points(np.atleast_1d(z[0]))[0]

    def jacobian(self, z):
        if isinstance(self.patch, _SpherePatch):
            s = self.patch.sphere
            return s.frame.T * s.radii
        if isinstance(self.patch, _BallPatch):
            b = self.patch.ball
            return b.frame.T * b.radii
        return self.patch.loop.velocities(np.atleast_1d(z[0]))[0][:, None]

    def canonical(self, z):
        if isinstance(self.patch, _SpherePatch):
            nrm = np.linalg.norm(z)
            return z / nrm if nrm > 1e-300 else np.eye(self.nvars)[0]
        if isinstance(self.patch, _LoopPatch):
            return z % 1.0
        return z

    def feasibility(self, z, interior_margin=1e-6):
        """(within tolerance of the domain, strictly interior)."""
        if isinstance(self.patch, _SpherePatch):
            if not self.patch.half:
                return True, True
            return z[-1] >= -1e-9, z[-1] > interior_margin
        if isinstance(self.patch, _BallPatch):
            r = float(np.linalg.norm(z))
            ok = r <= 1.0 + 1e-9
            interior = r < 1.0 - interior_margin
            if self.patch.half:
                ok = ok and z[-1] >= -1e-9
                interior = interior and z[-1] > interior_margin
            return ok, interior
        return True, True

    def oriented_columns(self, z):
        """Pushforward of the oriented tangent basis at the root parameter."""
        _, C, w = self.patch.eval(z[None, :])
        return C[0], float(w[0])


def _newton_product(sa, sb, z0, target_dir=None, max_iter=60, tol=1e-12):
    """Damped Newton on P_a(za) - P_b(zb) [- t*v] = 0 plus gauge rows.

    With ``target_dir`` the unknown vector gains a trailing ray coordinate t
    and the system solves for preimages of v; without it the plain
    intersection system is solved.  Returns (z, residual_norm).
    """
    na, nb = sa.nvars, sb.nvars
    with_t = target_dir is not None
    z = z0.copy()

    def residual(z):
        za, zb = z[:na], z[na : na + nb]
        rows = [sa.value(za) - sb.value(zb)]
        if with_t:
            rows[0] = rows[0] - z[-1] * target_dir
        if sa.gauged:
            rows.append([(za @ za - 1.0) / 2.0])
        if sb.gauged:
            rows.append([(zb @ zb - 1.0) / 2.0])
        return np.concatenate([np.atleast_1d(r) for r in rows])

    def jacobian(z):
        za, zb = z[:na], z[na : na + nb]
        Ja, Jb = sa.jacobian(za), sb.jacobian(zb)
        n_amb = Ja.shape[0]
        ncols = z.shape[0]
        nrows = n_amb + int(sa.gauged) + int(sb.gauged)
        J = np.zeros((nrows, ncols))
        J[:n_amb, :na] = Ja
        J[:n_amb, na : na + nb] = -Jb
        if with_t:
            J[:n_amb, -1] = -target_dir
        row = n_amb
        if sa.gauged:
            J[row, :na] = za
            row += 1
        if sb.gauged:
            J[row, na : na + nb] = zb
        return J

    H = residual(z)
    hn = float(np.linalg.norm(H))
    for _ in range(max_iter):
        if hn < tol:
            break
        J = jacobian(z)
        try:
            step = np.linalg.solve(J, -H)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -H, rcond=None)[0]
        lam = 1.0
        improved = False
        for _ in range(25):
            z2 = z + lam * step
            H2 = residual(z2)
            hn2 = float(np.linalg.norm(H2))
            if hn2 < hn:
                z, H, hn = z2, H2, hn2
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
    return z, hn


def _dedupe(roots, radius=1e-6):
    kept = []
    for root in roots:
        if all(np.linalg.norm(root[0] - other[0]) > radius for other in kept):
            kept.append(root)
    return kept


def _screened_starts(sa, sb, rng, n_starts, score_fn, n_screen=4096):
    Ua = sa.patch.sample(rng, n_screen)
    Wb = sb.patch.sample(rng, n_screen)
    scores = score_fn(Ua, Wb)
    order = np.argsort(scores)
    picks = order[: max(n_starts // 2, 8)]
    starts = [np.concatenate([Ua[k], Wb[k]]) for k in picks]
    n_random = n_starts - len(starts)
    if n_random > 0:
        Ur = sa.patch.sample(rng, n_random)
        Wr = sb.patch.sample(rng, n_random)
        starts += [np.concatenate([Ur[k], Wr[k]]) for k in range(n_random)]
    return starts


# ---------------------------------------------------------------------------
# preimage-counting degree


def linking_number_preimage(A, B, v=None, starts: int = 256, seed: int = 0) -> int:
    """Linking number as the signed count of Gauss-map preimages of v.

    ``v`` must act as a regular value: every root's Jacobian determinant
    must stay above 1e-8 and away from patch boundaries, otherwise v is
    perturbed (up to 8 retries) before :class:`RegularValueError` is raised.
    Agrees with :func:`linking_number_mc` on every valid pair.
    """
    n, p, q = _check_linking_pair(A, B)
    sep = min_distance(A, B, budget=32, seed=seed)
    if sep.distance <= 1e-6:
        raise DomainError("pieces are not numerically disjoint")
    rng = np.random.default_rng(np.random.SeedSequence([31, seed]))
    sides_a = [_RootSide(pa) for pa in patches_of(A)]
    sides_b = [_RootSide(pb) for pb in patches_of(B)]
    scale = 1.0 + max(float(np.max(s.patch.sphere.radii)) if isinstance(s.patch, _SpherePatch) else 1.0 for s in sides_a + sides_b)
    v0 = np.full(n, 1.0) if v is None else np.asarray(v, dtype=float)
    v0 = v0 / np.linalg.norm(v0)

    for attempt in range(8):
        if attempt == 0:
            v_cur = v0
        else:
            v_cur = v0 + 0.08 * attempt * rng.standard_normal(n)
            v_cur /= np.linalg.norm(v_cur)
        roots = []
        clean = True
        for sa in sides_a:
            for sb in sides_b:
                def score(Ua, Wb, sa=sa, sb=sb):
                    Xa = sa.patch.eval(Ua)[0]
                    Xb = sb.patch.eval(Wb)[0]
                    D = Xb - Xa
                    G = D / np.linalg.norm(D, axis=1)[:, None]
                    return np.linalg.norm(G - v_cur, axis=1)

                for z0 in _screened_starts(sa, sb, rng, starts, score):
                    xa = sa.value(z0[: sa.nvars])
                    xb = sb.value(z0[sa.nvars :])
                    t0 = max(float(np.linalg.norm(xa - xb)), 1e-3)
                    z_init = np.concatenate([z0, [t0]])
                    # G = v means x_A - x_B = -t v; reuse the product solver
                    z, hn = _newton_product(sa, sb, z_init, target_dir=-v_cur,
                                            tol=1e-12 * scale)
                    if hn > 1e-11 * scale:
                        continue
                    t_root = float(z[-1])
                    if t_root <= 1e-8:
                        continue
                    za = sa.canonical(z[: sa.nvars])
                    zb = sb.canonical(z[sa.nvars : sa.nvars + sb.nvars])
                    ok_a, int_a = sa.feasibility(za)
                    ok_b, int_b = sb.feasibility(zb)
                    if not (ok_a and ok_b):
                        continue
                    if not (int_a and int_b):
                        clean = False  # boundary-grazing root: retry with new v
                        continue
                    key = np.concatenate([sa.value(za), sb.value(zb)])
                    roots.append((key, sa, sb, za, zb, t_root))
        if not clean:
            continue
        roots = _dedupe(roots)
        degree = 0
        for _, sa, sb, za, zb, t_root in roots:
            Ca, wa = sa.oriented_columns(za)
            Cb, wb = sb.oriented_columns(zb)
            cols = [c for c in (-Ca, Cb) if c.shape[1]]
            M = np.column_stack(cols + [v_cur])
            det = float(np.linalg.det(M))
            margin = abs(det) / t_root ** (p + q)
            if margin < 1e-8:
                clean = False
                break
            degree += int(math.copysign(1.0, det)) * int(wa) * int(wb)
        if clean:
            return degree
    raise RegularValueError("no clean regular value found after 8 perturbations")


# ---------------------------------------------------------------------------
# transversal intersections


@dataclass(frozen=True)
class IntersectionReport:
    """Intersection points with transversality margins and residuals."""

    points: tuple
    margins: tuple
    residuals: tuple
    params: tuple
    transversal: bool
    tol: float

    @property
    def count(self) -> int:
        return len(self.points)


def transversal_intersections(A, B, tol: float = 1e-6, starts: int = 256,
                              seed: int = 0) -> IntersectionReport:
    """All intersection points of two pieces whose dimensions sum to n.

    Multistart Newton on the joint parameter system; each point carries the
    smallest singular value of the stacked orthonormalized tangents as its
    transversality margin.  A margin below ``tol`` withholds the
    transversality certificate.
    """
    n = A.ambient_dim
    if B.ambient_dim != n:
        raise DomainError("pieces live in different ambient dimensions")
    if manifold_dim(A) + manifold_dim(B) != n:
        raise DomainError("intersection counting needs dim A + dim B = n")
    rng = np.random.default_rng(np.random.SeedSequence([37, seed]))
    sides_a = [_RootSide(pa) for pa in patches_of(A)]
    sides_b = [_RootSide(pb) for pb in patches_of(B)]

    raw = []
    for ia, sa in enumerate(sides_a):
        for ib, sb in enumerate(sides_b):
            def score(Ua, Wb, sa=sa, sb=sb):
                Xa = sa.patch.eval(Ua)[0]
                Xb = sb.patch.eval(Wb)[0]
                return np.linalg.norm(Xa - Xb, axis=1)

            for z0 in _screened_starts(sa, sb, rng, starts, score):
                z, hn = _newton_product(sa, sb, z0, target_dir=None)
                if hn > 1e-10:
                    continue
                za = sa.canonical(z[: sa.nvars])
                zb = sb.canonical(z[sa.nvars : sa.nvars + sb.nvars])
                ok_a, _ = sa.feasibility(za)
                ok_b, _ = sb.feasibility(zb)
                if not (ok_a and ok_b):
                    continue
                x = sa.value(za)
                res = float(np.linalg.norm(x - sb.value(zb)))
                raw.append((x, za, zb, ia, ib, res))

    kept = _dedupe([(r[0], r) for r in raw], radius=1e-6)
    points, margins, residuals, params = [], [], [], []
    for x, (x_, za, zb, ia, ib, res) in kept:
        Ca, _ = sides_a[ia].oriented_columns(za)
        Cb, _ = sides_b[ib].oriented_columns(zb)
        Qa = np.linalg.qr(Ca)[0] if Ca.shape[1] else Ca
        Qb = np.linalg.qr(Cb)[0] if Cb.shape[1] else Cb
        stacked = np.column_stack([Qa, Qb])
        margin = float(np.linalg.svd(stacked, compute_uv=False)[-1])
        points.append(x)
        margins.append(margin)
        residuals.append(res)
        params.append((ParamPoint(ia, za), ParamPoint(ib, zb)))
    transversal = all(mg > tol for mg in margins)
    return IntersectionReport(
        points=tuple(points),
        margins=tuple(margins),
        residuals=tuple(residuals),
        params=tuple(params),
        transversal=transversal,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# split certificates


@dataclass(frozen=True)
class SplitCertificate:
    """Positive-distance certificate that a two-component sublink splits."""

    pair: tuple
    ball_index: int
    sphere_index: int
    distance: float
    witness: tuple
    granted: bool
    threshold: float
    converged: bool


_SPLIT_PATTERN = {
    frozenset({1, 2}): (1, 2),
    frozenset({2, 3}): (2, 3),
    frozenset({1, 3}): (3, 1),
}


def split_certificate(link, pair, budget: int = 64, seed: int = 0,
                      threshold: float = 1e-6) -> SplitCertificate:
    """Certify a proper sublink split: one component's flat ball avoids the other.

    The ball is chosen by the cyclic pattern (ball 1 vs component 2, ball 2
    vs component 3, ball 3 vs component 1); the certificate is granted iff
    the optimized distance exceeds the threshold.
    """
    m, mp = pair
    if m == mp or not {m, mp} <= {1, 2, 3}:
        raise DomainError("pair must be two distinct component indices in 1..3")
    ball_idx, sphere_idx = _SPLIT_PATTERN[frozenset({m, mp})]
    ball = link.component(ball_idx).boundary_of()
    other = link.component(sphere_idx)
    res = min_distance(ball, other, budget=budget, seed=seed)
    return SplitCertificate(
        pair=(m, mp),
        ball_index=ball_idx,
        sphere_index=sphere_idx,
        distance=res.distance,
        witness=res.witness,
        granted=bool(res.distance > threshold),
        threshold=threshold,
        converged=res.converged,
    )


# ---------------------------------------------------------------------------
# lifted capped sphere and separation parity


@dataclass(frozen=True, eq=False)
class LiftedCappedSphere:
    """Image of a capped sphere under the stereographic lift of radius R."""

    capped: CappedSphere
    radius: float

    @property
    def ambient_dim(self) -> int:
        return self.capped.ambient_dim + 1

    def sample_points(self, seed: int, m: int) -> np.ndarray:
        hemi = self.capped.hemisphere
        k = hemi.sphere_dim
        U = sample_param(seed, k, m)
        U[:, -1] = np.abs(U[:, -1])
        top = hemi.points(U)
        rng = np.random.default_rng(np.random.SeedSequence([41, seed]))
        V = _BallPatch(self.capped.cap).sample(rng, m)
        bottom = self.capped.cap.points(V)
        return stereographic_lift(np.vstack([top, bottom]), self.radius)

    def region_side(self, Xhat: np.ndarray) -> np.ndarray:
        """Signed side of the bounded region: negative inside, zero on it.

        Membership is evaluated downstairs through the inverse lift; points
        at (or numerically near) the projection pole are far outside.
        """
        Xhat = np.atleast_2d(np.asarray(Xhat, dtype=float))
        R = self.radius
        out = np.full(Xhat.shape[0], 1e6)
        near_pole = R - Xhat[:, -1] < 1e-9 * R
        good = ~near_pole
        if np.any(good):
            X = stereographic_project(Xhat[good], R)
            hemi = self.capped.hemisphere
            rel = X - hemi.center
            Y = (rel @ hemi.frame.T) / hemi.radii
            quad = np.einsum("ij,ij->i", Y, Y) - 1.0
            height = rel @ hemi.frame[-1]
            out[good] = np.maximum(quad, -height)
        return out


def lift_capped(capped: CappedSphere, radius: float) -> LiftedCappedSphere:
    return LiftedCappedSphere(capped=capped, radius=radius)


def _surface_side_function(surface, sigma: EmbeddedSphere):
    """Signed side function on the great sphere ``sigma`` vanishing on the surface."""
    if isinstance(surface, LiftedCappedSphere):
        return lambda Xhat: surface.region_side(Xhat)
    if isinstance(surface, EmbeddedSphere):
        coords = surface.frame @ sigma.frame.T  # rows of surface frame in sigma basis
        q = np.linalg.qr(coords.T, mode="complete")[0]
        nu_local = q[:, -1]
        lead = nu_local[np.argmax(np.abs(nu_local))]
        nu_local = nu_local * math.copysign(1.0, lead)
        nu = sigma.frame.T @ nu_local
        center = surface.center

        def side(Xhat):
            Xhat = np.atleast_2d(np.asarray(Xhat, dtype=float))
            return (Xhat - center) @ nu

        return side
    raise DomainError(f"unsupported surface type {type(surface).__name__}")


def separation_parity(surface, q_plus, q_minus, sigma: EmbeddedSphere,
                      seed: int = 0, nsamples: int = 4096,
                      max_retries: int = 16) -> int:
    """Crossing parity of a great-circle arc from q_plus to q_minus in sigma.

    Parity 1 means the surface separates the two points inside the great
    sphere ``sigma``.  The surface must lie in sigma (residual < 1e-8) and
    both endpoints must be on sigma but off the surface.  The arc is rotated
    by seeded random angles until every crossing is transversal (margin
    > 1e-6); persistent tangency raises :class:`InconclusiveError`.
    """
    q_plus = np.asarray(q_plus, dtype=float)
    q_minus = np.asarray(q_minus, dtype=float)
    R = float(sigma.radii[0])
    for pt in (q_plus, q_minus):
        if float(sigma.implicit_residual(pt[None, :])[0]) > 1e-8:
            raise DomainError("endpoint does not lie on the great sphere")
    if isinstance(surface, LiftedCappedSphere):
        probe = surface.sample_points(seed=5, m=200)
    else:
        probe = surface.points(sample_param(5, surface.sphere_dim, 200))
    if float(np.max(sigma.implicit_residual(probe))) > 1e-8:
        raise DomainError("surface does not lie in the great sphere")
    side = _surface_side_function(surface, sigma)
    if min(abs(float(side(q_plus[None, :])[0])), abs(float(side(q_minus[None, :])[0]))) < 1e-9:
        raise DomainError("an endpoint lies on the surface")

    antipodal = np.linalg.norm(q_plus + q_minus) < 1e-9
    theta = math.acos(max(min(float(q_plus @ q_minus) / R**2, 1.0), -1.0))
    rng = np.random.default_rng(np.random.SeedSequence([43, seed]))

    for attempt in range(max_retries):
        if antipodal:
            raw = sigma.frame.T @ rng.standard_normal(sigma.frame.shape[0])
            raw -= (raw @ q_plus) / (R * R) * q_plus
            nrm = np.linalg.norm(raw)
            if nrm < 1e-12:
                continue
            e_dir = raw / nrm
        else:
            if attempt > 0:
                raise InconclusiveError(
                    "tangential crossings on the unique connecting arc"
                )
            raw = q_minus - (float(q_plus @ q_minus) / (R * R)) * q_plus
            e_dir = raw / np.linalg.norm(raw)
        ts = np.linspace(0.0, 1.0, nsamples + 1)
        ang = theta * ts
        arc = np.outer(np.cos(ang), q_plus) + np.outer(np.sin(ang), R * e_dir)
        vals = np.asarray(side(arc), dtype=float)

        def side_at(t):
            a = theta * t
            pt = math.cos(a) * q_plus + math.sin(a) * R * e_dir
            return float(side(pt[None, :])[0])

        ok = True
        crossings = []
        sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        if np.any(vals == 0.0):
            ok = False
        if ok:
            for idx in sign_change:
                root = brentq(side_at, ts[idx], ts[idx + 1], xtol=1e-14)
                h = 1e-6
                deriv = (side_at(min(root + h, 1.0)) - side_at(max(root - h, 0.0))) / (2 * h)
                if abs(deriv) < 1e-6:
                    ok = False
                    break
                crossings.append(root)
        if ok:
            return len(crossings) % 2
    raise InconclusiveError("persistent tangency after arc perturbations")
