"""Planning on implicit constraint manifolds F(q) = 0.

States are kept on the manifold by Newton projection: ambient samples and
ambient midpoints are pulled back onto F = 0, so any planner written against
sample / interpolate can run unchanged on a :class:`ConstrainedSpace`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ContractError, PlankitError
from .rng import RngStream
from .spaces import Kind, SpaceDescriptor, enforce_bounds, sample_uniform, satisfies_bounds

# JJ^T with a condition estimate above this is treated as singular
SINGULAR_CONDITION = 1e12
# line search gives up after this many halvings of the Newton step
_MAX_HALVINGS = 30
# recursion cap for geodesic subdivision (2**40 segments is never reached
# by a sane geodesic_step, so hitting it means the midpoints do not settle)
_MAX_GEODESIC_DEPTH = 40


class ProjectionError(PlankitError):
    """Newton projection onto the constraint manifold failed."""


class SingularJacobian(ProjectionError):
    pass


class DidNotConverge(ProjectionError):
    pass


class SamplingExhausted(PlankitError):
    """No projected sample was found within the attempt budget."""


class GeodesicFailed(PlankitError):
    """Subdivision hit a failing projection; ``prefix`` holds the waypoints
    produced before the failure (always starting at the first endpoint)."""

    def __init__(self, message: str, prefix: list[np.ndarray]):
        super().__init__(message)
        self.prefix = prefix


@dataclass(frozen=True)
class ConstraintFn:
    """Constraint F: R^n -> R^k with tolerance and Newton iteration cap.

    When ``jacobian`` is None the Jacobian is taken by central differences
    with step ``fd_step`` (or the default ``1e-7 * (1 + |q|)``).
    """

    arity: int
    codim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float | None = None
    tol: float = 1e-6
    max_iters: int = 50
    name: str = "custom"

    def __post_init__(self):
        if self.arity < 2 or not 1 <= self.codim < self.arity:
            raise ConfigurationError(f"need 1 <= codim < arity, got codim={self.codim}, arity={self.arity}")
        if not self.tol > 0:
            raise ConfigurationError("tol must be > 0")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be >= 1")
        if self.fd_step is not None and not self.fd_step > 0:
            raise ConfigurationError("fd_step must be > 0")

    @property
    def analytic(self) -> bool:
        return self.jacobian is not None

    def residual(self, q) -> np.ndarray:
        r = np.atleast_1d(np.asarray(self.evaluate(np.asarray(q, dtype=float)), dtype=float))
        if r.shape != (self.codim,):
            raise ContractError(f"constraint {self.name} returned {r.shape[0]} residuals, expected {self.codim}")
        return r

    def residual_norm(self, q) -> float:
        return float(np.linalg.norm(self.residual(q)))

    def jac(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self.jacobian is None:
            return jacobian_fd(self, q, self.fd_step)
        J = np.asarray(self.jacobian(q), dtype=float).reshape(self.codim, self.arity)
        return J


def jacobian_fd(c: ConstraintFn, q, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of ``c`` at ``q``."""
    q = np.asarray(q, dtype=float)
    if h is None:
        h = 1e-7 * (1.0 + float(np.linalg.norm(q)))
    if not h > 0:
        raise ContractError(f"finite-difference step must be > 0, got {h}")
    J = np.empty((c.codim, c.arity))
    for j in range(c.arity):
        qp = q.copy()
        qm = q.copy()
        qp[j] += h
        qm[j] -= h
        J[:, j] = (c.residual(qp) - c.residual(qm)) / (2.0 * h)
    return J


# -- built-in constraints -------------------------------------------------

def sphere_constraint(dim: int = 3, radius: float = 1.0, center=None, analytic: bool = True,
                      tol: float = 1e-6, max_iters: int = 50) -> ConstraintFn:
    """|q - center| = radius."""
    if not radius > 0:
        raise ConfigurationError("sphere radius must be > 0")
    c0 = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def f(q):
        return np.array([np.linalg.norm(q - c0) - radius])

    def jac(q):
        v = q - c0
        n = np.linalg.norm(v)
        if n == 0.0:
            return np.zeros((1, dim))
        return (v / n)[None, :]

    return ConstraintFn(dim, 1, f, jac if analytic else None, tol=tol, max_iters=max_iters, name="sphere")


def plane_constraint(normal, offset: float = 0.0, analytic: bool = True,
                     tol: float = 1e-6, max_iters: int = 50) -> ConstraintFn:
    """normal . q = offset."""
    a = np.asarray(normal, dtype=float)
    if not np.linalg.norm(a) > 0:
        raise ConfigurationError("plane normal must be non-zero")
    b = float(offset)

    def f(q):
        return np.array([a @ q - b])

    def jac(q):
        return a[None, :].copy()

    return ConstraintFn(len(a), 1, f, jac if analytic else None, tol=tol, max_iters=max_iters, name="plane")


def torus_constraint(major: float = 1.0, minor: float = 0.3, analytic: bool = True,
                     tol: float = 1e-6, max_iters: int = 50) -> ConstraintFn:
    """Torus around the z axis; the residual is the signed distance to the surface."""
    if not 0 < minor < major:
        raise ConfigurationError("torus needs 0 < minor < major")

    def f(q):
        rho = math.hypot(q[0], q[1])
        return np.array([math.hypot(rho - major, q[2]) - minor])

    def jac(q):
        rho = math.hypot(q[0], q[1])
        s = math.hypot(rho - major, q[2])
        if rho == 0.0 or s == 0.0:
            return np.zeros((1, 3))
        k = (rho - major) / (rho * s)
        return np.array([[k * q[0], k * q[1], q[2] / s]])

    return ConstraintFn(3, 1, f, jac if analytic else None, tol=tol, max_iters=max_iters, name="torus")


BUILTIN_CONSTRAINTS = {
    "sphere": sphere_constraint,
    "plane": plane_constraint,
    "torus": torus_constraint,
}


# -- projection -----------------------------------------------------------

def _newton(c: ConstraintFn, q: np.ndarray) -> np.ndarray:
    f = c.residual(q)
    fn = float(np.linalg.norm(f))
    for _ in range(c.max_iters):
        if fn <= c.tol:
            return q
        J = c.jac(q)
        JJt = J @ J.T
        if not np.all(np.isfinite(JJt)) or np.linalg.cond(JJt) > SINGULAR_CONDITION:
            raise SingularJacobian(f"singular constraint Jacobian at {q.tolist()}")
        step = J.T @ np.linalg.solve(JJt, f)
        alpha = 1.0
        for _ in range(_MAX_HALVINGS):
            cand = q - alpha * step
            fc = c.residual(cand)
            fcn = float(np.linalg.norm(fc))
            if fcn < fn:
                break
            alpha *= 0.5
        else:
            raise DidNotConverge(f"line search stalled at residual {fn:.3e}")
        q, f, fn = cand, fc, fcn
    if fn <= c.tol:
        return q
    raise DidNotConverge(f"residual {fn:.3e} above tol {c.tol:g} after {c.max_iters} iterations")


def project(c: ConstraintFn, q, space: SpaceDescriptor | None = None) -> np.ndarray:
    """Project ``q`` onto F = 0 by damped Newton steps.

    With ``space`` the result is clamped into its bounds and the residual
    verified again after clamping.
    """
    q = np.array(q, dtype=float)
    if q.shape != (c.arity,):
        raise ContractError(f"state of shape {q.shape} does not match constraint arity {c.arity}")
    out = _newton(c, q)
    if space is not None:
        out = enforce_bounds(space, out)
        r = c.residual_norm(out)
        if r > c.tol:
            raise DidNotConverge(f"residual {r:.3e} after bounds enforcement")
    return out


# -- constrained space ----------------------------------------------------

@dataclass(frozen=True)
class ConstrainedSpace:
    ambient: SpaceDescriptor
    constraint: ConstraintFn
    geodesic_step: float = field(default=0.0)

    def __post_init__(self):
        if self.ambient.kind != Kind.REAL_VECTOR:
            raise ConfigurationError("constrained planning needs a RealVector ambient space")
        if self.constraint.arity != self.ambient.dim:
            raise ConfigurationError(
                f"constraint arity {self.constraint.arity} != ambient dimension {self.ambient.dim}")
        if self.geodesic_step == 0.0:
            object.__setattr__(self, "geodesic_step", 0.05 * self.ambient.diameter())
        if not self.geodesic_step > 0:
            raise ConfigurationError("geodesic_step must be > 0")

    @property
    def dim(self) -> int:
        return self.ambient.dim

    @property
    def manifold_dim(self) -> int:
        return self.constraint.arity - self.constraint.codim

    def diameter(self) -> float:
        return self.ambient.diameter()

    @property
    def signature(self) -> str:
        return f"Constrained({self.ambient.signature},{self.constraint.name})"

    def on_manifold(self, q) -> bool:
        return self.constraint.residual_norm(q) <= self.constraint.tol and satisfies_bounds(self.ambient, q)

    def project(self, q) -> np.ndarray:
        return project(self.constraint, q, self.ambient)


def constrained_sample(cs: ConstrainedSpace, rng: RngStream, attempts: int = 100) -> np.ndarray:
    """Uniform ambient sample projected onto the manifold, retried on failure."""
    for _ in range(attempts):
        q = sample_uniform(cs.ambient, rng)
        try:
            return cs.project(q)
        except ProjectionError:
            continue
    raise SamplingExhausted(f"no projectable sample in {attempts} attempts on {cs.signature}")


def constrained_interpolate(cs: ConstrainedSpace, a, b) -> list[np.ndarray]:
    """Discrete geodesic from ``a`` to ``b``: projected midpoints are inserted
    until neighbouring waypoints are within ``geodesic_step``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tol = cs.constraint.tol
    for name, q in (("a", a), ("b", b)):
        if cs.constraint.residual_norm(q) > tol:
            raise ContractError(f"endpoint {name} is off the constraint manifold")
    out = [a]
    if np.array_equal(a, b):
        return out
    step = cs.geodesic_step

    def fill(p, r, depth):
        if np.linalg.norm(r - p) <= step:
            return
        if depth >= _MAX_GEODESIC_DEPTH:
            raise GeodesicFailed("geodesic subdivision did not settle", list(out))
        try:
            m = cs.project(0.5 * (p + r))
        except ProjectionError as exc:
            raise GeodesicFailed(f"midpoint projection failed: {exc}", list(out)) from exc
        fill(p, m, depth + 1)
        out.append(m)
        fill(m, r, depth + 1)

    fill(a, b, 0)
    out.append(b)
    return out
