import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plankit.constrained import (
    ConstrainedSpace,
    ConstraintFn,
    DidNotConverge,
    GeodesicFailed,
    SamplingExhausted,
    SingularJacobian,
    constrained_interpolate,
    constrained_sample,
    jacobian_fd,
    plane_constraint,
    project,
    sphere_constraint,
    torus_constraint,
)
from plankit.errors import ConfigurationError, ContractError
from plankit.planners import PlannerSpec, TerminationCondition, planner_from_spec
from plankit.problem import ExactState, ProblemDefinition
from plankit.rng import RngStream
from plankit.spaces import real_vector, so2
from plankit.validity import RobotModel, Scene

CUBE = real_vector([(-2, 2)] * 3)


def _sphere_space(**kw):
    return ConstrainedSpace(CUBE, sphere_constraint(3, 1.0, **kw))


# ---- projection ----

def test_radial_projection():
    q = project(sphere_constraint(), [2.0, 0.0, 0.0])
    np.testing.assert_allclose(q, [1.0, 0.0, 0.0], atol=1e-6)


def test_on_manifold_is_unchanged():
    q0 = np.array([0.0, 0.6, 0.8])
    np.testing.assert_array_equal(project(sphere_constraint(), q0), q0)


def test_origin_is_singular():
    with pytest.raises(SingularJacobian):
        project(sphere_constraint(), [0.0, 0.0, 0.0])


def test_iteration_cap():
    slow = ConstraintFn(2, 1, lambda q: np.array([q[0] ** 3]), lambda q: np.array([[3 * q[0] ** 2, 0.0]]),
                        max_iters=2)
    with pytest.raises(DidNotConverge):
        project(slow, [1.0, 0.0])


def test_projection_dimension_contract():
    with pytest.raises(ContractError):
        project(sphere_constraint(), [1.0, 0.0])


def test_projection_respects_bounds():
    cs = ConstrainedSpace(real_vector([(0, 2)] * 3), sphere_constraint())
    with pytest.raises(DidNotConverge):
        cs.project([-2.0, 0.1, 0.1])


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.floats(0.5, 2.0))
def test_projection_matches_radial_scaling(direction, norm):
    d = np.array(direction)
    if np.linalg.norm(d) < 1e-3:
        return
    d /= np.linalg.norm(d)
    q = project(sphere_constraint(), norm * d)
    assert np.linalg.norm(q - d) <= 1e-6
    assert abs(np.linalg.norm(q) - 1.0) <= 1e-6


@pytest.mark.parametrize("make", [sphere_constraint, lambda **kw: plane_constraint([1.0, 2.0, -1.0], 0.5, **kw),
                                  torus_constraint])
def test_projection_residual_after_sampling(make):
    cs = ConstrainedSpace(CUBE, make())
    rng = RngStream(4)
    for _ in range(300):
        q = constrained_sample(cs, rng)
        assert cs.constraint.residual_norm(q) <= cs.constraint.tol
        assert cs.on_manifold(q)


# ---- jacobians ----

def test_fd_exact_for_linear():
    a = np.array([1.5, -2.0, 0.25])
    c = ConstraintFn(3, 1, lambda q: np.array([a @ q - 3.0]))
    np.testing.assert_allclose(jacobian_fd(c, np.array([0.3, 0.2, -0.1])), a[None, :], atol=1e-6)


def test_fd_sphere_at_axis():
    J = jacobian_fd(sphere_constraint(analytic=False), np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(J, [[1.0, 0.0, 0.0]], atol=1e-6)


@pytest.mark.parametrize("name, make", [
    ("sphere", lambda analytic: sphere_constraint(3, 1.3, center=[0.1, -0.2, 0.3], analytic=analytic)),
    ("plane", lambda analytic: plane_constraint([0.3, -1.0, 2.0], 0.7, analytic=analytic)),
    ("torus", lambda analytic: torus_constraint(1.0, 0.3, analytic=analytic)),
])
def test_fd_matches_analytic(name, make):
    ana, fd = make(True), make(False)
    assert ana.analytic and not fd.analytic
    rng = np.random.default_rng(len(name))
    for q in rng.uniform(-2, 2, (100, 3)):
        np.testing.assert_allclose(fd.jac(q), ana.jac(q), atol=1e-5, err_msg=name)


def test_fd_rejects_bad_step():
    with pytest.raises(ContractError):
        jacobian_fd(sphere_constraint(), np.ones(3), h=0.0)
    with pytest.raises(ContractError):
        jacobian_fd(sphere_constraint(), np.ones(3), h=-1e-3)


def test_fd_projection_agrees_with_analytic():
    rng = np.random.default_rng(8)
    for q in rng.uniform(-2, 2, (50, 3)):
        if np.linalg.norm(q) < 0.2:
            continue
        a = project(sphere_constraint(analytic=True), q)
        b = project(sphere_constraint(analytic=False), q)
        np.testing.assert_allclose(a, b, atol=1e-6)


# ---- sampling ----

def test_sphere_samples_on_manifold():
    cs = _sphere_space()
    rng = RngStream(0)
    for _ in range(1000):
        q = constrained_sample(cs, rng)
        assert abs(np.linalg.norm(q) - 1.0) <= 1e-6
        assert np.all(np.abs(q) <= 2.0)


def test_infeasible_constraint_exhausts():
    cs = ConstrainedSpace(CUBE, ConstraintFn(3, 1, lambda q: np.array([np.linalg.norm(q) + 1.0])))
    with pytest.raises(SamplingExhausted):
        constrained_sample(cs, RngStream(1))


def test_sampling_is_deterministic():
    cs = _sphere_space()
    a = [constrained_sample(cs, RngStream(9)) for _ in range(1)]
    b = [constrained_sample(cs, RngStream(9)) for _ in range(1)]
    np.testing.assert_array_equal(a, b)


# ---- geodesics ----

def test_geodesic_identity():
    cs = _sphere_space()
    out = constrained_interpolate(cs, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    assert len(out) == 1


def test_geodesic_quarter_circle():
    cs = _sphere_space()
    out = constrained_interpolate(cs, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    np.testing.assert_array_equal(out[0], [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(out[-1], [0.0, 1.0, 0.0])
    assert len(out) > 2
    for q in out:
        assert abs(np.linalg.norm(q) - 1.0) <= 1e-6
    gaps = np.linalg.norm(np.diff(np.array(out), axis=0), axis=1)
    assert gaps.max() <= cs.geodesic_step
    # discrete geodesic length approaches the great-circle arc from below
    assert math.pi / 2 - 0.01 < gaps.sum() <= math.pi / 2


def test_geodesic_antipodal_fails():
    cs = _sphere_space()
    with pytest.raises(GeodesicFailed) as info:
        constrained_interpolate(cs, [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0])
    np.testing.assert_array_equal(info.value.prefix[0], [1.0, 0.0, 0.0])


def test_geodesic_requires_manifold_endpoints():
    with pytest.raises(ContractError):
        constrained_interpolate(_sphere_space(), [2.0, 0.0, 0.0], [0.0, 1.0, 0.0])


# ---- configuration ----

def test_configuration_errors():
    with pytest.raises(ConfigurationError):
        ConstraintFn(3, 3, lambda q: q)
    with pytest.raises(ConfigurationError):
        ConstraintFn(3, 1, lambda q: q[:1], tol=0.0)
    with pytest.raises(ConfigurationError):
        ConstraintFn(3, 1, lambda q: q[:1], max_iters=0)
    with pytest.raises(ConfigurationError):
        ConstrainedSpace(so2(), sphere_constraint(2))
    with pytest.raises(ConfigurationError):
        ConstrainedSpace(real_vector([(0, 1)] * 2), sphere_constraint(3))
    with pytest.raises(ConfigurationError):
        ConstrainedSpace(CUBE, sphere_constraint(), geodesic_step=-1.0)
    with pytest.raises(ConfigurationError):
        torus_constraint(0.3, 1.0)
    with pytest.raises(ConfigurationError):
        sphere_constraint(radius=0.0)
    with pytest.raises(ConfigurationError):
        plane_constraint([0.0, 0.0, 0.0])


def test_residual_length_contract():
    c = ConstraintFn(3, 1, lambda q: q[:2])
    with pytest.raises(ContractError):
        c.residual(np.zeros(3))


def test_default_geodesic_step():
    assert math.isclose(_sphere_space().geodesic_step, 0.05 * CUBE.diameter())


# ---- planner integration ----

def test_rrt_on_sphere_stays_on_manifold():
    cs = _sphere_space()
    s = 1 / math.sqrt(2)
    problem = ProblemDefinition(cs, Scene(spheres3d=[((s, s, 0.0), 0.3)]), RobotModel.point3d(),
                                (1.0, 0.0, 0.0), ExactState((0.0, 1.0, 0.0), 0.01))
    tc = TerminationCondition.any_of(TerminationCondition.max_iterations(20000),
                                     TerminationCondition.solved_exactly())
    res = planner_from_spec(PlannerSpec("rrt", {"goal_bias": 0.1})).solve(problem, tc, RngStream(3))
    assert res.solved
    for q in res.path.states:
        assert cs.constraint.residual_norm(q) <= cs.constraint.tol
        assert np.linalg.norm(q - np.array([s, s, 0.0])) > 0.3
