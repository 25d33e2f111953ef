"""Free-group words read from membrane crossings.

A validated membrane system assigns letters to a loop's transversal
crossings: crossing the membrane bounded by component 1 reads ``a``,
component 2 reads ``b``, with the exponent given by the crossing direction
against the membrane conormal.  Words live in the free group on {a, b};
serialization uses capitals for inverses (``aB`` = a b^-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .catalog import (
    Link,
    LoopCurve,
    Membrane,
    bounding_balls,
    bump_membrane,
    flat_membrane,
)
from .distance import min_distance
from .geometry import DomainError


class TransversalityError(RuntimeError):
    """A tangential crossing survived every perturbation attempt."""


class InvalidMembraneSystemError(ValueError):
    """The membrane system failed validation, so words are not defined."""


GENERATORS = ("a", "b")


@dataclass(frozen=True)
class Word:
    """A word in the free group on two letters, as (generator, +-1) pairs."""

    letters: tuple = ()

    def __post_init__(self):
        for gen, exp in self.letters:
            if gen not in GENERATORS or exp not in (-1, 1):
                raise DomainError(f"bad letter ({gen!r}, {exp})")

    def __str__(self) -> str:
        return "".join(g.upper() if e < 0 else g for g, e in self.letters) or "1"

    def __len__(self) -> int:
        return len(self.letters)

    @staticmethod
    def from_string(s: str) -> "Word":
        if s == "1":
            return Word()
        return Word(tuple((ch.lower(), -1 if ch.isupper() else 1) for ch in s))

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def cycled(self, k: int) -> "Word":
        if not self.letters:
            return self
        k %= len(self.letters)
        return Word(self.letters[k:] + self.letters[:k])

    def relabeled(self) -> "Word":
        swap = {"a": "b", "b": "a"}
        return Word(tuple((swap[g], e) for g, e in self.letters))

    def exponent_sum(self, gen: str) -> int:
        return sum(e for g, e in self.letters if g == gen)


def reduce_word(w: Word) -> Word:
    """Freely reduce: cancel adjacent inverse pairs until none remain."""
    stack = []
    for letter in w.letters:
        if stack and stack[-1][0] == letter[0] and stack[-1][1] == -letter[1]:
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack))


@dataclass(frozen=True)
class CommutatorCheck:
    """Outcome of testing a word against the two-generator commutator."""

    is_commutator: bool
    normal_form: str
    symmetry: dict


def commutator_class_check(w: Word) -> CommutatorCheck:
    """True iff w equals a b a^-1 b^-1 up to cycling, inversion and relabeling."""
    target = Word.from_string("abAB")
    if len(w.letters) == 4:
        for inverted in (False, True):
            cand0 = w.inverse() if inverted else w
            for swapped in (False, True):
                cand1 = cand0.relabeled() if swapped else cand0
                for shift in range(4):
                    if cand1.cycled(shift).letters == target.letters:
                        return CommutatorCheck(
                            True,
                            str(target),
                            {"cyclic_shift": shift, "inverted": inverted,
                             "relabeled": swapped},
                        )
    return CommutatorCheck(False, str(reduce_word(w)), {})


# ---------------------------------------------------------------------------
# membrane systems


@dataclass(frozen=True, eq=False)
class MembraneSystem:
    """Membranes dual to the two generators: boundaries on components 1 and 2."""

    membrane_a: Membrane
    membrane_b: Membrane
    link: Link


@dataclass(frozen=True)
class MembraneValidity:
    """Itemized validity report for a membrane system."""

    membranes_disjoint: float
    a_avoids_component2: float
    b_avoids_component1: float
    a_rim_only: float
    b_rim_only: float
    a_rim_on_component: float
    b_rim_on_component: float
    threshold: float

    @property
    def valid(self) -> bool:
        return (
            min(
                self.membranes_disjoint,
                self.a_avoids_component2,
                self.b_avoids_component1,
                self.a_rim_only,
                self.b_rim_only,
            )
            > self.threshold
            and max(self.a_rim_on_component, self.b_rim_on_component) < 1e-9
        )


def default_membrane_system(link: Link, height: float = 2.2,
                            radii=(2.2, 2.8)) -> MembraneSystem:
    """Flat ball on component 1 plus a bump membrane on component 2."""
    balls = bounding_balls(link)
    return MembraneSystem(
        membrane_a=flat_membrane(balls[0]),
        membrane_b=bump_membrane(link, height=height, radii=radii),
        link=link,
    )


def _interior_clearance(membrane: Membrane, seed: int, vmax: float = 0.98,
                        budget: int = 64):
    """Distance from the inner part of a membrane to its own rim sphere."""
    chart = membrane.interior_chart(vmax)
    rim = membrane.boundary_sphere()

    class _Wrapper:
        ambient_dim = membrane.ambient_dim

        @staticmethod
        def charts():
            return [chart]

    return min_distance(_Wrapper(), rim, budget=budget, seed=seed).distance


def _rim_residual(membrane: Membrane, component) -> float:
    """How far the membrane boundary sits from the component it should bound."""
    rim = membrane.boundary_sphere()
    k = rim.sphere_dim
    rng = np.random.default_rng(97)
    U = rng.standard_normal((200, k + 1))
    U /= np.linalg.norm(U, axis=1)[:, None]
    pts = rim.points(U)
    return float(np.max(component.implicit_residual(pts)))


def validate_membrane_system(sys: MembraneSystem, link: Link | None = None,
                             budget: int = 64, seed: int = 0,
                             threshold: float = 1e-3) -> MembraneValidity:
    """Check the four disjointness conditions plus rim placement.

    All distances are computed with the multistart optimizer; every margin
    must exceed the threshold (1e-3) and each membrane rim must lie on its
    own link component for the system to be usable for words.
    """
    link = link or sys.link
    if link.i != 1 or link.j != 0:
        raise DomainError("membrane systems are defined for i=1, j=0 families")
    ma, mb = sys.membrane_a, sys.membrane_b
    comp1, comp2 = link.component(1), link.component(2)
    return MembraneValidity(
        membranes_disjoint=min_distance(ma, mb, budget=budget, seed=seed).distance,
        a_avoids_component2=min_distance(ma, comp2, budget=budget, seed=seed + 1).distance,
        b_avoids_component1=min_distance(mb, comp1, budget=budget, seed=seed + 2).distance,
        a_rim_only=_interior_clearance(ma, seed=seed + 3, budget=budget),
        b_rim_only=_interior_clearance(mb, seed=seed + 4, budget=budget),
        a_rim_on_component=_rim_residual(ma, comp1),
        b_rim_on_component=_rim_residual(mb, comp2),
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# crossing detection


@dataclass(frozen=True)
class Crossing:
    """One transversal membrane crossing along a loop."""

    t: float
    generator: str
    exponent: int
    footprint_radius: float
    normal_velocity: float


def find_membrane_crossings(loop: LoopCurve, membrane: Membrane, generator: str,
                            nsamples: int = 4096, start: float = 0.0):
    """All transversal crossings of the loop with one membrane.

    Returns (crossings, clean): ``clean`` is False when a root grazes the
    footprint rim or has normal velocity below 1e-6, in which case the
    caller should perturb and retry.
    """
    ts = start + np.arange(nsamples + 1) / nsamples
    X = loop.points(ts % 1.0)
    side, rho = membrane.side_values(X)
    rfp = membrane.footprint_radius

    def side_at(t):
        s, _ = membrane.side_values(loop.points(np.array([t % 1.0])))
        return float(s[0])

    crossings = []
    clean = True
    if np.any(side == 0.0):
        return [], False
    flips = np.nonzero(np.sign(side[:-1]) * np.sign(side[1:]) < 0)[0]
    for idx in flips:
        root = brentq(side_at, ts[idx], ts[idx + 1], xtol=1e-14)
        _, rho_root = membrane.side_values(loop.points(np.array([root % 1.0])))
        rr = float(rho_root[0])
        if abs(rr - rfp) < 1e-7:
            clean = False
            continue
        if rr > rfp:
            continue  # off the footprint: the graph is not membrane there
        h = 1e-6
        dsdt = (side_at(root + h) - side_at(root - h)) / (2.0 * h)
        if abs(dsdt) < 1e-6:
            clean = False
            continue
        exponent = membrane.conormal_sign * (1 if dsdt > 0 else -1)
        crossings.append(
            Crossing(
                t=root - start if root >= start else root - start + 1.0,
                generator=generator,
                exponent=exponent,
                footprint_radius=rr,
                normal_velocity=float(dsdt),
            )
        )
    return crossings, clean


def _clearance_start(loop: LoopCurve, membranes, nsamples: int = 2048,
                     tol: float = 1e-3) -> float:
    """Smallest forward shift of the loop's start that clears every membrane.

    Keeps the reading anchored at the loop's own base point (shifted just
    off any membrane it starts on); falls back to the best-clearance
    parameter if no nearby shift clears the tolerance.
    """
    ts = np.arange(nsamples) / nsamples
    X = loop.points(ts)
    worst = np.full(nsamples, np.inf)
    for mem in membranes:
        side, rho = mem.side_values(X)
        clearance = np.abs(side) + np.maximum(rho - mem.footprint_radius, 0.0)
        worst = np.minimum(worst, clearance)
    clear = np.nonzero(worst > tol)[0]
    if clear.size:
        return float(ts[clear[0]])
    return float(ts[int(np.argmax(worst))])


def crossing_word(loop: LoopCurve, sys: MembraneSystem,
                  validity: MembraneValidity | None = None,
                  nsamples: int = 4096, seed: int = 0,
                  max_retries: int = 16) -> Word:
    """Read the loop's free-group word from its membrane crossings.

    The start parameter is rotated to a point well off both membranes, the
    loop is perturbed by tiny translations if a tangency shows up, and the
    letters are emitted sorted by loop parameter.  The raw word is returned;
    reduce it with :func:`reduce_word`.
    """
    if validity is None:
        validity = validate_membrane_system(sys)
    if not validity.valid:
        raise InvalidMembraneSystemError(
            "membrane system failed validation; no word is defined"
        )
    rng = np.random.default_rng(np.random.SeedSequence([47, seed]))
    membranes = [(sys.membrane_a, "a"), (sys.membrane_b, "b")]
    scale = max(float(np.max(sys.link.component(m).radii)) for m in (1, 2, 3))
    cur = loop
    for attempt in range(max_retries):
        start = _clearance_start(cur, [m for m, _ in membranes])
        all_crossings = []
        ok = True
        for mem, gen in membranes:
            crossings, clean = find_membrane_crossings(
                cur, mem, gen, nsamples=nsamples, start=start
            )
            if not clean:
                ok = False
                break
            all_crossings.extend(crossings)
        if ok:
            all_crossings.sort(key=lambda c: c.t)
            return Word(tuple((c.generator, c.exponent) for c in all_crossings))
        shift = 1e-4 * scale * rng.standard_normal(cur.ambient_dim)
        cur = loop.translated(shift)
    raise TransversalityError("tangential crossing persisted after perturbations")
