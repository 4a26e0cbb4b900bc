import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SIGN_TABLE, best_cos_in_octant, octant_of, sphere_octant_samples
from pose_ik.geom import (
    OCTANTS,
    DegenerateDirection,
    OctantSet,
    angle_between,
    in_octant_closure,
    normalize,
    octant_contains,
    octant_diagonal,
    octant_from_signs,
    octant_index,
    octant_signs,
    project_into_octant,
)

R2, R3 = 1 / math.sqrt(2), 1 / math.sqrt(3)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = st.tuples(finite, finite, finite).filter(lambda v: np.linalg.norm(v) > 1e-6)
octants = st.integers(1, 8)


@pytest.mark.parametrize(
    "v, signs, index",
    [((1, 2, 3), (1, 1, 1), 1), ((-1, 2, -3), (-1, 1, -1), 6), ((0, 1, 1), (1, 1, 1), 1)],
)
def test_octant_index_examples(v, signs, index):
    assert octant_index(v) == index
    assert octant_signs(index) == signs
    assert octant_from_signs(signs) == index


def test_octant_index_matches_enumeration_order():
    for i, signs in enumerate(SIGN_TABLE, start=1):
        assert octant_signs(i) == signs


@pytest.mark.parametrize("fn", [octant_index, normalize, lambda v: project_into_octant(v, 1)])
def test_zero_vector_is_degenerate(fn):
    with pytest.raises(DegenerateDirection, match="degenerate direction"):
        fn((0, 0, 0))


def test_bad_octant_index():
    with pytest.raises(ValueError):
        octant_signs(0)
    with pytest.raises(ValueError):
        project_into_octant((1, 1, 1), 9)


@pytest.mark.parametrize(
    "o, v, expected",
    [((1, 1, 1), (1, 1, 1), True), ((1, 1, 1), (-1, 1, 1), False), ((-1, 1, -1), (-2, 5, -0.1), True)],
)
def test_octant_contains_examples(o, v, expected):
    assert octant_contains(octant_from_signs(o), v) is expected


@pytest.mark.parametrize(
    "v, o, expected",
    [
        ((1, 1, -1), 1, (R2, R2, 0)),
        ((1, 1, 1), 1, (R3, R3, R3)),
        ((-1, -1, -1), 1, (R3, R3, R3)),
    ],
)
def test_project_examples(v, o, expected):
    assert np.allclose(project_into_octant(v, o), expected, atol=1e-12)


def test_project_example_against_dense_samples():
    v = normalize((1, 1, -1))
    samples = sphere_octant_samples(1, 400)
    best = samples[np.argmax(samples @ v)]
    assert angle_between(best, project_into_octant(v, 1)) < 1e-2


@pytest.mark.parametrize("u, v, expected", [((1, 0, 0), (0, 1, 0), math.pi / 2), ((1, 1, 0), (1, 1, 0), 0.0), ((1, 0, 0), (-1, 0, 0), math.pi)])
def test_angle_examples(u, v, expected):
    assert angle_between(u, v) == pytest.approx(expected, abs=1e-12)


def test_face_diagonal_when_only_zero_components_survive():
    # (0, 0, -1) into (+,+,+): every direction on the z = 0 face is 90 deg away
    p = project_into_octant((0, 0, -1), 1)
    assert np.allclose(p, (R2, R2, 0))
    assert angle_between((0, 0, -1), p) == pytest.approx(math.pi / 2)


def test_negative_face_stays_inside_octant():
    # clamping onto x = 0 for an x-negative octant must still classify inside
    p = project_into_octant((1, 1, 1), octant_from_signs((-1, 1, 1)))
    assert octant_contains(octant_from_signs((-1, 1, 1)), p)
    assert np.allclose(p, (0, R2, R2))


@settings(max_examples=300)
@given(vectors)
def test_index_agrees_with_oracle(v):
    assert octant_index(v) == octant_of(v)


@settings(max_examples=300)
@given(vectors, octants)
def test_projection_properties(v, o):
    p = project_into_octant(v, o)
    assert abs(np.linalg.norm(p) - 1) < 1e-12
    assert octant_contains(o, p)
    assert in_octant_closure(o, p)
    # idempotent
    assert np.allclose(project_into_octant(p, o), p, atol=1e-12)
    if octant_contains(o, v):
        assert np.allclose(p, normalize(v))


@settings(max_examples=300)
@given(vectors, octants)
def test_projection_is_angularly_optimal(v, o):
    d = normalize(v)
    s = octant_signs(o)
    if all(si * di < 0 for si, di in zip(s, d)):
        # convention: every component on the wrong side gives the diagonal
        assert np.allclose(project_into_octant(v, o), octant_diagonal(o))
        return
    best = best_cos_in_octant(d, o)
    got = angle_between(d, project_into_octant(v, o))
    assert got == pytest.approx(math.acos(min(1.0, best)), abs=1e-6)


def test_octant_set_algebra():
    a = OctantSet([1, 2])
    b = OctantSet([2, 3])
    assert a | b == OctantSet([1, 2, 3])
    assert a & b == OctantSet([2])
    assert OctantSet([2]) < a and a <= a and not a < a
    assert len(OctantSet.full()) == 8 and OctantSet.full().is_full
    assert list(OctantSet([5, 1, 3])) == [1, 3, 5]
    assert OctantSet.from_mask(a.mask) == a
    assert 1 in a and 4 not in a
    assert a.contains_direction((1, 1, -1)) and not a.contains_direction((-1, 1, 1))
    assert hash(OctantSet([1, 2])) == hash(a)
    assert not OctantSet()
    with pytest.raises(ValueError):
        OctantSet([0])


def test_octants_constant():
    assert tuple(OCTANTS) == tuple(range(1, 9))
