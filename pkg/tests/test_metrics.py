import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_rotation, trapezoid_clamped_area
from pose_ik.chain import WorkspaceTransform
from pose_ik.metrics import (
    ROI,
    NoGatedFrames,
    PoseAngleSeries,
    chain_links,
    clamped_area,
    evaluate,
    gate_frames,
    occlusion_percentage,
    pose_accuracy,
    pose_angle,
    project_link,
    task_po,
)

W, H = 20.0, 15.0


def roi():
    # plane y = 0, x to the right, height along +z
    return ROI((0, 0, 0), (1, 0, 0), (0, -1, 0), W, H)


def test_roi_axes():
    r = roi()
    assert np.allclose(r.v, (0, 0, 1))
    assert r.area == W * H
    with pytest.raises(ValueError):
        ROI((0, 0, 0), (1, 0, 0), (1, 0, 0), 1, 1)
    with pytest.raises(ValueError):
        ROI((0, 0, 0), (1, 0, 0), (0, 1, 0), 0, 1)
    assert ROI.from_dict(r.to_dict()) == r


@pytest.mark.parametrize(
    "s, e, w, expected",
    [((0, 0, 0), (1, 0, 0), (2, 0, 0), 0.0), ((0, 0, 0), (1, 0, 0), (1, 1, 0), math.pi / 2), ((0, 0, 0), (1, 0, 0), (0, 0, 0), math.pi)],
)
def test_pose_angle_examples(s, e, w, expected):
    assert pose_angle(s, e, w) == pytest.approx(expected, abs=1e-12)


def test_pose_accuracy_examples():
    d = 0.0305
    a = np.array([0.1, 0.5, 1.0, 2.0])
    assert pose_accuracy(a, a, d) == 1.0
    assert pose_accuracy(a, a + 2 * math.sqrt(d), d) == 0.0
    human = np.zeros(4)
    robot = np.sqrt([0.001, 0.5, 0.02, 0.2])
    assert pose_accuracy(human, robot, 0.05) == 0.5


def test_pose_accuracy_errors():
    with pytest.raises(ValueError):
        pose_accuracy([0.1], [0.1, 0.2])
    with pytest.raises(ValueError):
        pose_accuracy([], [])
    with pytest.raises(ValueError):
        PoseAngleSeries([4.0])


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(0, math.pi), st.floats(0, math.pi)), min_size=1, max_size=50), st.floats(1e-4, 1.0))
def test_pose_accuracy_is_a_fraction(pairs, delta):
    h, r = np.array(pairs).T
    v = pose_accuracy(PoseAngleSeries(h), PoseAngleSeries(r, "robot"), delta)
    assert 0.0 <= v <= 1.0
    assert v * len(pairs) == pytest.approx(round(v * len(pairs)))


def test_project_link_examples():
    r = roi()
    assert project_link((0, 3, H / 2), (W, -2, H / 2), r) == ((0.0, H / 2), (W, H / 2))
    a, b = project_link((4, 0, 5), (4, 10, 5), r)
    assert a == b
    p, q = np.array([1.0, 2.0, 3.0]), np.array([-4.0, 5.0, 7.5])
    a, b = project_link(p, q, r)
    assert a == (p @ r.u, p @ r.v) and b == (q @ r.u, q @ r.v)


def test_occlusion_examples():
    r = roi()
    assert occlusion_percentage([((0, 0, H / 2), (W, 0, H / 2))], r) == pytest.approx(0.5)
    assert occlusion_percentage([((0, 0, -5), (W, 0, -1))], r) == 0.0
    assert occlusion_percentage([], r) == 0.0
    seg = ((0.0, -H), (W, 2 * H))
    assert clamped_area(seg, W, H) / (W * H) == pytest.approx(trapezoid_clamped_area(seg, W, H) / (W * H), abs=1e-6)


def test_clamped_area_cases():
    assert clamped_area(((5, 0), (5, 10)), W, H) == 0.0  # vertical
    assert clamped_area(((-10, 5), (-1, 5)), W, H) == 0.0  # left of ROI
    assert clamped_area(((0, 30), (W, 30)), W, H) == W * H  # above: clamped to h
    assert clamped_area(((W, 0), (0, H)), W, H) == pytest.approx(W * H / 2)


@settings(max_examples=300)
@given(*[st.floats(-50, 50)] * 4, st.floats(0.5, 40), st.floats(0.5, 40))
def test_clamped_area_matches_numeric(x1, y1, x2, y2, w, h):
    seg = ((x1, y1), (x2, y2))
    got = clamped_area(seg, w, h)
    assert 0.0 <= got <= w * h + 1e-9
    assert got / (w * h) == pytest.approx(trapezoid_clamped_area(seg, w, h) / (w * h), abs=1e-6)
    assert clamped_area(((x2, y2), (x1, y1)), w, h) == pytest.approx(got, abs=1e-12)


def test_gate_examples():
    r = roi()
    g = gate_frames([(W / 2, 0, H / 2), (-1, 0, H / 2), (0, 5, 0)], r)
    assert g.tolist() == [True, False, True]


def test_task_po():
    r = roi()
    below = [((0, 0, -5), (W, 0, -5)), ((W, 0, -5), (W, 0, -9))]
    wrists = np.array([[5, 0, 5], [5, 0, 5], [-3, 0, 5]])
    assert task_po([below] * 3, wrists, r) == 0.0
    up = [((0, 0, H / 2), (W, 0, H / 2))]
    assert task_po([below, up, up], wrists[[2, 1, 2]], r) == pytest.approx(occlusion_percentage(up, r))
    with pytest.raises(NoGatedFrames, match="no frames over ROI"):
        task_po([up], [(-1, 0, 0)], r)


def test_task_po_matches_per_frame_oracle():
    rng = np.random.default_rng(2)
    r = roi()
    frames = [rng.uniform(-5, 25, (5, 3)) for _ in range(20)]
    wrists = np.array([f[-1] for f in frames])
    mask = gate_frames(wrists, r)
    expected = []
    for f, m in zip(frames, mask):
        if m:
            area = sum(trapezoid_clamped_area(((a @ r.u, a @ r.v), (b @ r.u, b @ r.v)), W, H) for a, b in chain_links(f))
            expected.append(area / (W * H))
    assert task_po([chain_links(f) for f in frames], wrists, r) == pytest.approx(np.mean(expected), abs=1e-6)


def test_po_rigid_motion_invariance():
    rng = np.random.default_rng(0)
    r = roi()
    links = [tuple(rng.uniform(-5, 25, (2, 3))) for _ in range(6)]
    base = occlusion_percentage(links, r)
    for _ in range(100):
        R = random_rotation(rng)
        t = rng.uniform(-100, 100, 3)
        moved = [(R @ a + t, R @ b + t) for a, b in links]
        r2 = ROI(R @ r.origin + t, R @ r.u, R @ r.normal, W, H)
        assert occlusion_percentage(moved, r2) == pytest.approx(base, abs=1e-9)


def test_roi_transform_keeps_height_axis():
    r = roi()
    tf = WorkspaceTransform((-1, 1, 1), (1, 2, 3), 2.0)
    r2 = r.transformed(tf)
    assert np.allclose(r2.v, (0, 0, 1))
    assert np.allclose(r2.u, (-1, 0, 0))
    assert (r2.width, r2.height) == (2 * W, 2 * H)
    p = np.array([[4.0, 0.0, 3.0]])
    # heights scale with the transform, x flips with the axis
    assert np.allclose(r2.plane_coords(tf.apply(p)), [[8.0, 6.0]])


def test_evaluate():
    r = roi()
    human = np.array([[(0, 0, 0), (1, 0, 0), (2, 0, 0)], [(0, 0, 0), (1, 0, 0), (1, 1, 0)]], float)
    human[:, :, 0] += 5
    human[:, :, 2] += 3
    robot = [np.array([(9, 9, 9), *h]) for h in human]
    rep = evaluate(human, robot, (2, 3, 4), r)
    assert rep.pacc == 1.0
    assert rep.frames_gated == 2 and rep.frames_evaluated == 2
    assert rep.po == pytest.approx(np.mean([occlusion_percentage(chain_links(j), r) for j in robot]))
    assert set(rep.to_dict()) == {"pacc", "po", "frames_evaluated", "frames_gated", "per_frame"}
    assert math.isnan(evaluate(human, robot, (2, 3, 4)).po)
