import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linklab.catalog import (
    bounding_balls,
    build_family,
    bump_membrane,
    circle_loop,
    ellipsoid_loop,
    flat_membrane,
    generator_loops,
)
from linklab.invariants import linking_number_preimage
from linklab.words import (
    CommutatorCheck,
    InvalidMembraneSystemError,
    MembraneSystem,
    Word,
    commutator_class_check,
    crossing_word,
    default_membrane_system,
    find_membrane_crossings,
    reduce_word,
    validate_membrane_system,
)

letters_strategy = st.lists(
    st.tuples(st.sampled_from(["a", "b"]), st.sampled_from([-1, 1])),
    max_size=24,
)


class TestWordAlgebra:
    def test_serialization_round_trip(self):
        w = Word((("a", 1), ("b", -1), ("a", -1), ("b", 1)))
        assert str(w) == "aBAb"
        assert Word.from_string("aBAb") == w
        assert str(Word()) == "1"

    def test_reduce_examples(self):
        assert str(reduce_word(Word.from_string("aAb"))) == "b"
        assert str(reduce_word(Word.from_string("abBA"))) == "1"
        assert str(reduce_word(Word.from_string("aBAb"))) == "aBAb"

    @given(letters_strategy)
    @settings(max_examples=300, deadline=None)
    def test_reduce_is_idempotent_and_reduced(self, letters):
        w = Word(tuple(letters))
        r = reduce_word(w)
        assert reduce_word(r) == r
        for (g1, e1), (g2, e2) in zip(r.letters, r.letters[1:]):
            assert not (g1 == g2 and e1 == -e2)

    @given(letters_strategy)
    @settings(max_examples=200, deadline=None)
    def test_reduction_never_grows(self, letters):
        w = Word(tuple(letters))
        assert len(reduce_word(w)) <= len(w)

    def test_inverse_and_exponent_sum(self):
        w = Word.from_string("aBa")
        assert str(w.inverse()) == "AbA"
        assert w.exponent_sum("a") == 2
        assert w.exponent_sum("b") == -1


class TestCommutatorCheck:
    @pytest.mark.parametrize("s", ["abAB", "aBAb", "baBA", "BabA", "AbaB",
                                   "bABa", "ABab", "BAba"])
    def test_commutator_orbit_accepted(self, s):
        result = commutator_class_check(Word.from_string(s))
        assert result.is_commutator
        assert result.normal_form == "abAB"

    @pytest.mark.parametrize("s", ["abaB", "aabb", "ab", "abABab", "1",
                                   "aaAB"])
    def test_non_commutators_rejected(self, s):
        w = Word.from_string(s) if s != "1" else Word()
        assert not commutator_class_check(w).is_commutator

    @given(letters_strategy)
    @settings(max_examples=200, deadline=None)
    def test_orbit_closure(self, letters):
        w = reduce_word(Word(tuple(letters)))
        base = commutator_class_check(w).is_commutator
        assert commutator_class_check(w.inverse()).is_commutator == base
        assert commutator_class_check(w.relabeled()).is_commutator == base
        if len(w):
            assert commutator_class_check(w.cycled(1)).is_commutator == base


class TestMembraneValidation:
    def test_default_system_valid(self, link13):
        sys = default_membrane_system(link13)
        val = validate_membrane_system(sys)
        assert val.valid
        assert abs(val.membranes_disjoint - 0.2) < 1e-6
        assert abs(val.b_avoids_component1 - 0.2) < 1e-6
        assert val.a_avoids_component2 > 0.99

    def test_flat_flat_system_invalid(self, link13):
        balls = bounding_balls(link13)
        sys = MembraneSystem(
            membrane_a=flat_membrane(balls[0]),
            membrane_b=flat_membrane(balls[1]),
            link=link13,
        )
        val = validate_membrane_system(sys)
        assert not val.valid
        # the flat second ball runs through the first component
        assert val.b_avoids_component1 < 1e-6

    def test_translated_membrane_invalid(self, link13):
        shifted_ball = bounding_balls(link13)[0]
        off_center = type(shifted_ball)(
            shifted_ball.center + np.array([0.0, 0.0, 7.0]),
            shifted_ball.frame,
            shifted_ball.radii,
        )
        sys = MembraneSystem(
            membrane_a=flat_membrane(off_center),
            membrane_b=bump_membrane(link13),
            link=link13,
        )
        val = validate_membrane_system(sys)
        assert not val.valid
        assert val.a_rim_on_component > 1e-6

    def test_invalid_system_refuses_words(self, link13):
        balls = bounding_balls(link13)
        sys = MembraneSystem(
            membrane_a=flat_membrane(balls[0]),
            membrane_b=flat_membrane(balls[1]),
            link=link13,
        )
        with pytest.raises(InvalidMembraneSystemError):
            crossing_word(ellipsoid_loop(link13), sys)


@pytest.fixture(scope="module")
def sys13(link13):
    sys = default_membrane_system(link13)
    return sys, validate_membrane_system(sys)


class TestCrossingWords:

    def test_ellipse_commutator(self, link13, sys13):
        sys, val = sys13
        w = reduce_word(crossing_word(ellipsoid_loop(link13), sys, validity=val))
        assert len(w) == 4
        assert commutator_class_check(w).is_commutator

    def test_generator_loops_single_letters(self, link13, sys13):
        sys, val = sys13
        loops = generator_loops(3)
        w_alpha = reduce_word(crossing_word(loops.axis_meridian, sys, validity=val))
        w_beta = reduce_word(crossing_word(loops.equator_meridian, sys, validity=val))
        assert len(w_alpha) == 1 and w_alpha.letters[0][0] == "b"
        assert len(w_beta) == 1 and w_beta.letters[0][0] == "a"

    def test_far_circle_empty_word(self, link13, sys13):
        sys, val = sys13
        far = circle_loop(np.array([50.0, 0.0, 0.0]), np.eye(3)[0],
                          np.eye(3)[1], 1.0, 1.0)
        w = crossing_word(far, sys, validity=val)
        assert len(w) == 0
        assert str(reduce_word(w)) == "1"

    def test_base_point_independence(self, link13, sys13):
        sys, val = sys13
        loop = ellipsoid_loop(link13)
        w0 = reduce_word(crossing_word(loop, sys, validity=val))
        words = {str(w0.cycled(k)) for k in range(len(w0))}
        for dt in (0.17, 0.31, 0.62):
            w = reduce_word(crossing_word(loop.shifted(dt), sys, validity=val))
            assert str(w) in words

    def test_orientation_reversal_inverts(self, link13, sys13):
        sys, val = sys13
        loop = ellipsoid_loop(link13)
        w = reduce_word(crossing_word(loop, sys, validity=val))
        w_rev = reduce_word(crossing_word(loop.reversed(), sys, validity=val))
        inv = w.inverse()
        cyclic = {str(inv.cycled(k)) for k in range(max(len(inv), 1))}
        assert str(w_rev) in cyclic

    @pytest.mark.parametrize("height", [2.1, 2.2, 2.5])
    def test_stability_across_bump_heights(self, link13, height):
        sys = default_membrane_system(link13, height=height)
        val = validate_membrane_system(sys)
        assert val.valid
        w = reduce_word(crossing_word(ellipsoid_loop(link13), sys, validity=val))
        assert commutator_class_check(w).is_commutator

    def test_exponent_sums_match_linking(self, link13, sys13):
        sys, val = sys13
        rng = np.random.default_rng(3)
        loops = generator_loops(3)
        cases = [ellipsoid_loop(link13), loops.axis_meridian,
                 loops.equator_meridian]
        # random meridian-like perturbed circles near the catalog loops
        for _ in range(20):
            base = loops.axis_meridian if rng.random() < 0.5 else loops.equator_meridian
            shift = rng.normal(scale=0.15, size=3)
            scale_r = 1.0 + 0.1 * (rng.random() - 0.5)
            cand = circle_loop(
                base.points(np.array([0.0]))[0] * 0.0 + _loop_center(base) + shift,
                _loop_axis(base, 0), _loop_axis(base, 1),
                _loop_radius(base) * scale_r, _loop_radius(base) * scale_r,
            )
            cases.append(cand)
        checked = 0
        for loop in cases:
            try:
                w = reduce_word(crossing_word(loop, sys, validity=val, seed=5))
            except Exception:
                continue
            lk1 = linking_number_preimage(loop, link13.component(1), seed=5)
            lk2 = linking_number_preimage(loop, link13.component(2), seed=5)
            assert (w.exponent_sum("a"), w.exponent_sum("b")) == (lk1, lk2)
            checked += 1
        assert checked >= 20

    def test_crossing_oracle_beta_parameters(self, link13, sys13):
        # beta's height over the second membrane is 2 - 2 cos(2 pi t); the
        # bump plateau is 2.2, so crossings sit at cos(2 pi t) = -0.1
        sys, val = sys13
        loops = generator_loops(3)
        crossings, clean = find_membrane_crossings(
            loops.equator_meridian, sys.membrane_b, "b", start=0.01
        )
        assert clean and len(crossings) == 2
        expected = np.arccos(-0.1) / (2 * np.pi)
        ts = sorted(0.01 + c.t for c in crossings)
        assert abs(ts[0] - expected) < 1e-9
        assert abs(ts[1] - (1.0 - expected)) < 1e-9
        assert crossings[0].exponent == -crossings[1].exponent


def _loop_center(loop):
    ts = np.linspace(0, 1, 64, endpoint=False)
    return loop.points(ts).mean(axis=0)


def _loop_axis(loop, which):
    p0 = loop.points(np.array([0.0]))[0] - _loop_center(loop)
    p4 = loop.points(np.array([0.25]))[0] - _loop_center(loop)
    v = (p0, p4)[which]
    return v / np.linalg.norm(v)


def _loop_radius(loop):
    return float(np.linalg.norm(loop.points(np.array([0.0]))[0] - _loop_center(loop)))
