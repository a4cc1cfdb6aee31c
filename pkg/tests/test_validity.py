import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import clearance
from plankit.errors import ConfigurationError, ContractError
from plankit.spaces import compound, dubins, real_vector, se2, so2
from plankit.validity import (
    ConfigBatch,
    PointCloudIndex,
    RobotModel,
    Scene,
    ValidityChecker,
    available_backends,
    build_point_cloud_index,
    check_batch,
    check_motion,
    fk_planar_arm,
    is_state_valid,
    load_point_cloud,
    query_point_cloud,
)

BACKENDS = available_backends()
UNIT_CIRCLE = Scene(circles2d=[((0.0, 0.0), 1.0)])
PLANE = real_vector([(-5, 5), (-5, 5)])


# ---- scalar examples ----

def test_point_inside_circle_is_invalid():
    assert not is_state_valid(UNIT_CIRCLE, RobotModel.point2d(), PLANE, [0.5, 0.0])


def test_point_outside_circle_is_valid():
    assert is_state_valid(UNIT_CIRCLE, RobotModel.point2d(), PLANE, [2.0, 0.0])


def test_disc_uses_radius_sum():
    assert not is_state_valid(UNIT_CIRCLE, RobotModel.disc(0.5), PLANE, [1.4, 0.0])
    assert is_state_valid(UNIT_CIRCLE, RobotModel.disc(0.5), PLANE, [1.6, 0.0])


def test_out_of_bounds_is_invalid_not_error():
    assert not is_state_valid(Scene(), RobotModel.point2d(), PLANE, [6.0, 0.0])


def test_car_spaces_use_position():
    sp = dubins([(-5, 5), (-5, 5)], 0.5)
    assert not is_state_valid(UNIT_CIRCLE, RobotModel.disc(0.1), sp, [1.05, 0.0, 1.0])
    assert is_state_valid(UNIT_CIRCLE, RobotModel.disc(0.1), sp, [1.2, 0.0, 1.0])


# ---- random scenes: batched kernels vs scalar vs geometric oracle ----

def _random_case(rng, kind):
    if kind == "point3d":
        space = real_vector([(0, 1)] * 3)
        spheres = [(tuple(rng.uniform(0, 1, 3)), rng.uniform(0.05, 0.2)) for _ in range(rng.integers(0, 5))]
        boxes = []
        for _ in range(rng.integers(0, 4)):
            lo = rng.uniform(0, 0.8, 3)
            boxes.append((tuple(lo), tuple(lo + rng.uniform(0.05, 0.3, 3))))
        cloud = rng.uniform(0, 1, (int(rng.integers(5, 60)), 3)) if rng.random() < 0.5 else None
        return space, RobotModel.point3d(), spheres, [], boxes, cloud
    circles = [(tuple(rng.uniform(0, 1, 2)), rng.uniform(0.03, 0.15)) for _ in range(rng.integers(0, 6))]
    boxes = []
    for _ in range(rng.integers(0, 4)):
        lo = rng.uniform(0, 0.8, 2)
        boxes.append((tuple(lo), tuple(lo + rng.uniform(0.05, 0.3, 2))))
    cloud = rng.uniform(0, 1, (int(rng.integers(5, 60)), 2)) if rng.random() < 0.5 else None
    if kind == "point2d":
        return real_vector([(0, 1), (0, 1)]), RobotModel.point2d(), [], circles, boxes, cloud
    if kind == "disc":
        return se2([(0, 1), (0, 1)]), RobotModel.disc(rng.uniform(0.01, 0.08)), [], circles, boxes, cloud
    if kind == "dubins":
        return dubins([(0, 1), (0, 1)], 0.2), RobotModel.disc(0.03), [], circles, boxes, cloud
    n = int(rng.integers(1, 5))
    robot = RobotModel.planar_arm(rng.uniform(0.05, 0.2, n), rng.uniform(0, 0.05), base=(0.5, 0.5))
    space = real_vector([(-math.pi, math.pi)] * n)
    return space, robot, [], circles, boxes, cloud


KINDS = ["point2d", "disc", "dubins", "planar_arm", "point3d"]


def _sample_states(rng, space, n):
    lo = np.array([b[0] for b in space.bounds] if space.bounds else [0.0, 0.0])
    hi = np.array([b[1] for b in space.bounds] if space.bounds else [1.0, 1.0])
    X = rng.uniform(lo, hi, (n, len(lo)))
    if space.dim > len(lo):
        X = np.hstack([X, rng.uniform(-math.pi, math.pi, (n, space.dim - len(lo)))])
    return X


@pytest.mark.parametrize("kind", KINDS)
def test_batched_equals_scalar_and_geometry(kind):
    rng = np.random.default_rng(KINDS.index(kind))
    total = 0
    cloud_r = 0.02
    for _ in range(40):
        space, robot, spheres, circles, boxes, cloud = _random_case(rng, kind)
        index = PointCloudIndex(cloud, leaf_size=4) if cloud is not None else None
        scene = Scene(circles2d=circles, spheres3d=spheres, boxes=boxes, point_cloud=index,
                      point_cloud_radius=cloud_r if index is not None else 0.0)
        X = _sample_states(rng, space, 500)
        scalar = np.array([is_state_valid(scene, robot, space, q) for q in X])
        for backend in BACKENDS:
            got = ValidityChecker(scene, robot, space, backend=backend).valid_many(X)
            assert np.array_equal(got, scalar), backend
            batch = ConfigBatch.from_states(space, X[:8])
            assert np.array_equal(check_batch(scene, robot, batch, backend=backend), scalar[:8])
        circ = [(c[0][0], c[0][1], c[1]) for c in circles]
        sph = [(*s[0], s[1]) for s in spheres]
        for q, ok in zip(X, scalar):
            g = clearance(robot.kind.value, robot.footprint_radius, robot.link_lengths, robot.base, q,
                          circ, sph, boxes, cloud, cloud_r if cloud is not None else 0.0)
            if abs(g) > 1e-9:
                assert ok == (g > 0), (q, g)
        total += len(X)
    assert total == 20000


def test_empty_scene_all_lanes_true():
    space = real_vector([(0, 1), (0, 1)])
    X = np.random.default_rng(0).uniform(0, 1, (8, 2))
    for backend in BACKENDS:
        mask = check_batch(Scene(), RobotModel.point2d(), ConfigBatch.from_states(space, X), backend=backend)
        assert mask.tolist() == [True] * 8


def test_padding_lanes_are_excluded():
    space = real_vector([(0, 1), (0, 1)])
    batch = ConfigBatch.from_states(space, [[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]], width=8)
    assert batch.used == 3
    assert batch.valid_mask.tolist() == [True] * 3 + [False] * 5
    for backend in BACKENDS:
        mask = check_batch(Scene(), RobotModel.point2d(), batch, backend=backend)
        assert len(mask) == 3


def test_batch_rejects_overflow_and_bad_width():
    space = real_vector([(0, 1)])
    batch = ConfigBatch(space, width=2)
    batch.push([0.1])
    batch.push([0.2])
    with pytest.raises(ContractError):
        batch.push([0.3])
    batch.clear()
    assert batch.used == 0
    with pytest.raises(ConfigurationError):
        ConfigBatch(space, width=6)


def test_backends_bitwise_equal_on_dense_grid():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    scene = Scene(circles2d=[((0.5, 0.5), 0.2)], boxes=[((0.1, 0.1), (0.3, 0.9))])
    robot = RobotModel.planar_arm([0.3, 0.3, 0.2], 0.02, base=(0.5, 0.0))
    space = real_vector([(-math.pi, math.pi)] * 3)
    X = _sample_states(np.random.default_rng(3), space, 20000)
    a = ValidityChecker(scene, robot, space, backend="cython").valid_many(X)
    b = ValidityChecker(scene, robot, space, backend="python").valid_many(X)
    assert np.array_equal(a, b)


# ---- motions ----

def test_motion_through_circle_fails_early():
    for backend in BACKENDS:
        ok, t = check_motion(UNIT_CIRCLE, RobotModel.point2d(), PLANE, [-2, 0], [2, 0], 0.05, backend=backend)
        assert not ok and 0.0 <= t < 0.25


def test_motion_identity():
    ok, t = check_motion(UNIT_CIRCLE, RobotModel.point2d(), PLANE, [2, 0], [2, 0], 0.05)
    assert ok and t == 1.0


def test_motion_invalid_endpoint():
    ok, t = check_motion(UNIT_CIRCLE, RobotModel.point2d(), PLANE, [2, 0], [0, 0], 0.05)
    assert not ok and t == 0.0


def test_motion_clear_path():
    ok, t = check_motion(UNIT_CIRCLE, RobotModel.point2d(), PLANE, [-2, 2], [2, 2], 0.01)
    assert ok and t == 1.0


def test_motion_rejects_bad_resolution():
    with pytest.raises(ContractError):
        check_motion(UNIT_CIRCLE, RobotModel.point2d(), PLANE, [-2, 2], [2, 2], 0.0)


def test_motion_counters():
    chk = ValidityChecker(UNIT_CIRCLE, RobotModel.point2d(), PLANE)
    chk.check_motion(np.array([-2.0, 2.0]), np.array([2.0, 2.0]), 0.5)
    assert chk.motion_checks == 1
    assert chk.validity_checks == 8  # endpoint plus 7 interior midpoints at depth 3


def test_check_motions_matches_single():
    rng = np.random.default_rng(5)
    scene = Scene(circles2d=[((0.0, 0.0), 1.0), ((2.5, 2.5), 0.7)])
    pairs = []
    while len(pairs) < 300:
        a = rng.uniform(-5, 5, 2)
        if is_state_valid(scene, RobotModel.point2d(), PLANE, a):
            pairs.append((a, rng.uniform(-5, 5, 2)))
    for backend in BACKENDS:
        chk = ValidityChecker(scene, RobotModel.point2d(), PLANE, backend=backend)
        batch = chk.check_motions(pairs, 0.05)
        single = [chk.check_motion(a, b, 0.05)[0] for a, b in pairs]
        assert batch.tolist() == single
    space = se2([(-5, 5), (-5, 5)])
    chk = ValidityChecker(scene, RobotModel.disc(0.1), space)
    se_pairs = [(np.r_[a, 0.3], np.r_[b, -2.0]) for a, b in pairs[:100]]
    assert chk.check_motions(se_pairs, 0.05).tolist() == [chk.check_motion(a, b, 0.05)[0] for a, b in se_pairs]


_coord = st.floats(-4.5, 4.5, allow_nan=False)


@given(_coord, _coord, _coord, _coord, st.floats(0.02, 1.0))
def test_motion_refinement_is_monotone(ax, ay, bx, by, res):
    scene = Scene(circles2d=[((0.0, 0.0), 1.0), ((2.0, -2.0), 0.5)])
    robot = RobotModel.point2d()
    a = [ax, ay]
    if not is_state_valid(scene, robot, PLANE, a):
        return
    coarse, t = check_motion(scene, robot, PLANE, a, [bx, by], res)
    fine, _ = check_motion(scene, robot, PLANE, a, [bx, by], res / 2)
    if not coarse:
        assert not fine
        q = np.array(a) + t * (np.array([bx, by]) - np.array(a))
        assert is_state_valid(scene, robot, PLANE, q)


# ---- forward kinematics ----

@pytest.mark.parametrize("q, expected", [
    ((0.0, 0.0), [(1, 0), (2, 0)]),
    ((math.pi / 2, 0.0), [(0, 1), (0, 2)]),
    ((math.pi / 2, -math.pi / 2), [(0, 1), (1, 1)]),
])
def test_fk_examples(q, expected):
    joints = fk_planar_arm(RobotModel.planar_arm([1.0, 1.0]), q)
    np.testing.assert_allclose(joints, expected, atol=1e-12)


@given(st.lists(st.floats(0.1, 2.0), min_size=1, max_size=6))
def test_fk_reach_and_length(links):
    robot = RobotModel.planar_arm(links)
    straight = fk_planar_arm(robot, [0.0] * len(links))
    assert len(straight) == len(links)
    assert math.isclose(straight[-1][0], sum(links), rel_tol=1e-12)
    q = np.random.default_rng(len(links)).uniform(-math.pi, math.pi, len(links))
    end = fk_planar_arm(robot, q)[-1]
    assert math.hypot(*end) <= sum(links) + 1e-12


def test_fk_errors():
    with pytest.raises(ConfigurationError):
        fk_planar_arm(RobotModel.point2d(), [0.0])
    with pytest.raises(ContractError):
        fk_planar_arm(RobotModel.planar_arm([1.0, 1.0]), [0.0])


def test_robot_model_errors():
    with pytest.raises(ConfigurationError):
        RobotModel.disc(0.0)
    with pytest.raises(ConfigurationError):
        RobotModel.planar_arm([])
    with pytest.raises(ConfigurationError):
        RobotModel.planar_arm([1.0, -1.0])


# ---- point clouds ----

def test_point_cloud_examples():
    idx = build_point_cloud_index([(0.0, 0.0, 0.0)], leaf_size=1)
    assert query_point_cloud(idx, (0.5, 0.0, 0.0), 1.0)
    assert not query_point_cloud(idx, (0.5, 0.0, 0.0), 0.4)
    assert query_point_cloud(idx, (0.0, 0.0, 0.0), 0.0)
    assert not query_point_cloud(idx, (1e-9, 0.0, 0.0), 0.0)


@pytest.mark.parametrize("dim, leaf", [(2, 1), (3, 16), (3, 5)])
def test_point_cloud_matches_linear_scan(dim, leaf):
    rng = np.random.default_rng(dim * 10 + leaf)
    pts = rng.uniform(0, 1, (10_000, dim))
    idx = build_point_cloud_index(pts, leaf_size=leaf)
    centers = rng.uniform(-0.1, 1.1, (1000, dim))
    radii = rng.uniform(0, 0.02, 1000)
    for c, r in zip(centers, radii):
        d = np.sqrt(((pts - c) ** 2).sum(axis=1)).min()
        if abs(d - r) > 1e-12:
            assert query_point_cloud(idx, c, r) == (d <= r)


def test_point_cloud_capsule_matches_scan():
    rng = np.random.default_rng(11)
    pts = rng.uniform(0, 1, (2000, 2))
    idx = PointCloudIndex(pts, leaf_size=8)
    for _ in range(300):
        p0, p1 = rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)
        r = rng.uniform(0, 0.01)
        ab = p1 - p0
        t = np.clip(((pts - p0) @ ab) / (ab @ ab), 0, 1)
        d = np.linalg.norm(pts - (p0 + t[:, None] * ab), axis=1).min()
        if abs(d - r) > 1e-12:
            assert idx.query_capsule(p0, p1, r) == (d <= r)


def test_point_cloud_errors():
    with pytest.raises(ConfigurationError):
        build_point_cloud_index([])
    with pytest.raises(ConfigurationError):
        build_point_cloud_index([(0.0, 0.0, 0.0, 0.0)])
    with pytest.raises(ConfigurationError):
        build_point_cloud_index([(0.0, 0.0)], leaf_size=0)
    with pytest.raises(ConfigurationError):
        Scene(point_cloud_radius=-1.0)


def test_point_cloud_file(tmp_path):
    f = tmp_path / "cloud.txt"
    f.write_text("# header\n0 0 0\n\n1.5 2 3  # trailing\n")
    pts = load_point_cloud(f)
    np.testing.assert_array_equal(pts, [[0, 0, 0], [1.5, 2, 3]])
    assert len(PointCloudIndex.from_file(f)) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0 0 0\n1 2\n")
    with pytest.raises(ConfigurationError, match=":2:"):
        load_point_cloud(bad)
    (tmp_path / "empty.txt").write_text("# nothing\n")
    with pytest.raises(ConfigurationError):
        load_point_cloud(tmp_path / "empty.txt")
    (tmp_path / "nan.txt").write_text("0 x\n")
    with pytest.raises(ConfigurationError):
        load_point_cloud(tmp_path / "nan.txt")


def test_point_cloud_scene_validity():
    idx = PointCloudIndex([(0.5, 0.5)])
    scene = Scene(point_cloud=idx, point_cloud_radius=0.1)
    sp = real_vector([(0, 1), (0, 1)])
    assert not is_state_valid(scene, RobotModel.point2d(), sp, [0.55, 0.5])
    assert is_state_valid(scene, RobotModel.point2d(), sp, [0.65, 0.5])
    assert not is_state_valid(scene, RobotModel.disc(0.1), sp, [0.65, 0.5])


# ---- configuration errors ----

def test_dimension_mismatch_errors():
    with pytest.raises(ConfigurationError):
        is_state_valid(UNIT_CIRCLE, RobotModel.point3d(), real_vector([(0, 1)] * 3), [0, 0, 0])
    with pytest.raises(ConfigurationError):
        is_state_valid(Scene(spheres3d=[((0, 0, 0), 1.0)]), RobotModel.point2d(), PLANE, [2, 2])
    with pytest.raises(ConfigurationError):
        ValidityChecker(Scene(), RobotModel.planar_arm([1, 1, 1]), PLANE)
    with pytest.raises(ConfigurationError):
        ValidityChecker(Scene(), RobotModel.point2d(), so2())
    with pytest.raises(ConfigurationError):
        ValidityChecker(Scene(), RobotModel.point3d(), se2([(0, 1), (0, 1)]))
    with pytest.raises(ConfigurationError):
        ValidityChecker(Scene(), RobotModel.point2d(), PLANE, backend="gpu")
    ValidityChecker(Scene(), RobotModel.disc(0.1), compound([se2([(0, 1), (0, 1)]), so2()]))


def test_scene_validation_errors():
    with pytest.raises(ConfigurationError):
        Scene(circles2d=[((0, 0), 0.0)])
    with pytest.raises(ConfigurationError):
        Scene(boxes=[((1, 0), (0, 1))])
    with pytest.raises(ConfigurationError):
        Scene(boxes=[((0, 0), (1, 1, 1))])
