"""Scenario and benchmark-suite files.

Files are YAML (JSON is accepted too, being a subset) and are checked
against the schemas shipped in ``plankit/schema``. Every error names the
key path that caused it, e.g. ``planner.params.goal_bias``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import Any

import jsonschema
import numpy as np
import yaml

from .constrained import ConstrainedSpace, plane_constraint, sphere_constraint, torus_constraint
from .errors import ConfigurationError, PlankitError
from .planners import PlannerSpec, TerminationCondition
from .problem import ExactState, ProblemDefinition, Region
from .rng import RngStream
from .spaces import (SpaceDescriptor, compound, discrete, dubins, real_vector, reeds_shepp, se2, so2,
                     time_augmented)
from .validity import PointCloudIndex, RobotModel, Scene


class ScenarioError(ConfigurationError):
    """A scenario or suite file failed validation; ``key_path`` locates it."""

    def __init__(self, key_path: str, message: str, source: str | None = None):
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{key_path or '<root>'}: {message}")
        self.key_path = key_path
        self.source = source


def _schema(name: str) -> dict:
    text = resources.files("plankit").joinpath("schema", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _dotted(path) -> str:
    return ".".join(str(p) for p in path)


def _validate(doc: Any, schema_name: str, source: str | None) -> None:
    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if not errors:
        return
    err = errors[0]
    # report the deepest, most specific failure inside oneOf/anyOf branches
    while err.context:
        err = min(err.context, key=lambda e: (-len(e.absolute_path), e.message))
    path = list(err.absolute_path)
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        if extra:
            raise ScenarioError(_dotted(path + [extra[0]]), "unknown key", source)
    raise ScenarioError(_dotted(path), err.message, source)


def _read_document(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: not valid YAML: {exc}") from None


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``a.b.c=value`` overrides (values parsed as YAML scalars)."""
    for item in overrides or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ScenarioError(item, "override must look like key.path=value")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        parts = key.split(".")
        node = doc
        for depth, part in enumerate(parts[:-1]):
            if isinstance(node, list) and part.isdigit() and int(part) < len(node):
                node = node[int(part)]
                continue
            if not isinstance(node, dict):
                raise ScenarioError(".".join(parts[: depth + 1]), "cannot descend into a non-mapping value")
            node = node.setdefault(part, {})
        last = parts[-1]
        if isinstance(node, list) and last.isdigit() and int(last) < len(node):
            node[int(last)] = value
        elif isinstance(node, dict):
            node[last] = value
        else:
            raise ScenarioError(key, "cannot set a key on a non-mapping value")
    return doc


# -- builders -------------------------------------------------------------

def _wrap(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (PlankitError, ValueError, TypeError) as exc:
        raise ScenarioError(path, str(exc)) from None


def build_space(spec: dict, path: str = "space") -> SpaceDescriptor | ConstrainedSpace:
    kind = spec["kind"]

    def need(key):
        if key not in spec:
            raise ScenarioError(f"{path}.{key}", f"required for space kind {kind}")
        return spec[key]

    if kind == "real_vector":
        sp = _wrap(path, real_vector, need("bounds"))
    elif kind == "so2":
        sp = so2()
    elif kind == "se2":
        args = (need("bounds"),) + ((spec["weights"],) if "weights" in spec else ())
        sp = _wrap(path, se2, *args)
    elif kind == "dubins":
        sp = _wrap(path, dubins, need("bounds"), need("rho"))
    elif kind == "reeds_shepp":
        sp = _wrap(path, reeds_shepp, need("bounds"), need("rho"))
    elif kind == "discrete":
        sp = _wrap(path, discrete, need("cardinality"))
    elif kind == "time_augmented":
        inner = build_space(need("inner"), f"{path}.inner")
        if isinstance(inner, ConstrainedSpace):
            raise ScenarioError(f"{path}.inner.constraint", "constraints are only allowed on the outer space")
        sp = _wrap(path, time_augmented, inner, need("time_bounds"), spec.get("time_weight", 1.0))
    else:
        subs = []
        for i, s in enumerate(need("subspaces")):
            sub = build_space(s, f"{path}.subspaces.{i}")
            if isinstance(sub, ConstrainedSpace):
                raise ScenarioError(f"{path}.subspaces.{i}.constraint", "constraints are only allowed on the outer space")
            subs.append(sub)
        sp = _wrap(path, compound, subs, spec.get("weights"))
    if "constraint" in spec:
        c = _build_constraint(spec["constraint"], sp.dim, f"{path}.constraint")
        kwargs = {"geodesic_step": spec["geodesic_step"]} if "geodesic_step" in spec else {}
        return _wrap(path, ConstrainedSpace, sp, c, **kwargs)
    if "geodesic_step" in spec:
        raise ScenarioError(f"{path}.geodesic_step", "only meaningful together with a constraint")
    return sp


def _build_constraint(spec: dict, dim: int, path: str):
    common = dict(analytic=spec.get("jacobian", "analytic") == "analytic",
                  tol=spec.get("tol", 1e-6), max_iters=spec.get("max_iters", 50))
    name = spec["name"]
    if name == "sphere":
        center = spec.get("center")
        if center is not None and len(center) != dim:
            raise ScenarioError(f"{path}.center", f"expected {dim} coordinates")
        return _wrap(path, sphere_constraint, dim, spec.get("radius", 1.0), center, **common)
    if name == "plane":
        if "normal" not in spec:
            raise ScenarioError(f"{path}.normal", "required for a plane constraint")
        if len(spec["normal"]) != dim:
            raise ScenarioError(f"{path}.normal", f"expected {dim} coordinates")
        return _wrap(path, plane_constraint, spec["normal"], spec.get("offset", 0.0), **common)
    if dim != 3:
        raise ScenarioError(path, "the torus constraint needs a 3-dimensional space")
    return _wrap(path, torus_constraint, spec.get("major", 1.0), spec.get("minor", 0.3), **common)


def build_robot(spec: dict, path: str = "robot") -> RobotModel:
    kind = spec["kind"]
    if kind == "point2d":
        return RobotModel.point2d()
    if kind == "point3d":
        return RobotModel.point3d()
    if kind == "disc":
        if "radius" not in spec:
            raise ScenarioError(f"{path}.radius", "required for a disc robot")
        return _wrap(path, RobotModel.disc, spec["radius"])
    if "link_lengths" not in spec:
        raise ScenarioError(f"{path}.link_lengths", "required for a planar arm")
    return _wrap(path, RobotModel.planar_arm, spec["link_lengths"], spec.get("link_thickness", 0.0),
                 spec.get("base", (0.0, 0.0)))


def build_scene(spec: dict | None, base_dir: str, path: str = "scene") -> Scene:
    spec = spec or {}
    circles = [(tuple(c["center"]), c["radius"]) for c in spec.get("circles", [])]
    spheres = [(tuple(s["center"]), s["radius"]) for s in spec.get("spheres", [])]
    boxes = [(tuple(b["min"]), tuple(b["max"])) for b in spec.get("boxes", [])]
    for i, (c, _) in enumerate(circles):
        if len(c) != 2:
            raise ScenarioError(f"{path}.circles.{i}.center", "circle centers need 2 coordinates")
    for i, (c, _) in enumerate(spheres):
        if len(c) != 3:
            raise ScenarioError(f"{path}.spheres.{i}.center", "sphere centers need 3 coordinates")
    cloud = None
    if "point_cloud" in spec:
        cp = os.path.join(base_dir, spec["point_cloud"])
        if not os.path.exists(cp):
            raise ScenarioError(f"{path}.point_cloud", f"file not found: {cp}")
        cloud = _wrap(f"{path}.point_cloud", PointCloudIndex.from_file, cp)
    return _wrap(path, Scene, circles2d=circles, spheres3d=spheres, boxes=boxes, point_cloud=cloud,
                 point_cloud_radius=spec.get("point_cloud_radius", 0.0))


class BoxRegion:
    """Goal region ``lo <= q <= hi`` with a uniform sampler."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise ConfigurationError("goal region needs min <= max with matching lengths")

    def contains(self, q) -> bool:
        return bool(np.all(self.lo <= q) and np.all(q <= self.hi))

    def sample(self, rng: RngStream) -> np.ndarray:
        return np.asarray(rng.uniform(self.lo, self.hi), dtype=float)

    def distance(self, q) -> float:
        d = np.maximum(self.lo - q, 0.0) + np.maximum(q - self.hi, 0.0)
        return float(math.sqrt(float(d @ d)))

    def as_goal(self) -> Region:
        return Region(self.contains, self.sample, self.distance,
                      description=f"box {self.lo.tolist()}..{self.hi.tolist()}")


def build_goal(spec: dict, dim: int, path: str = "goal"):
    if "state" in spec:
        if len(spec["state"]) != dim:
            raise ScenarioError(f"{path}.state", f"expected {dim} coordinates, got {len(spec['state'])}")
        return _wrap(path, ExactState, spec["state"], spec.get("threshold"))
    reg = spec["region"]
    for key in ("min", "max"):
        if len(reg[key]) != dim:
            raise ScenarioError(f"{path}.region.{key}", f"expected {dim} coordinates")
    return _wrap(f"{path}.region", BoxRegion, reg["min"], reg["max"]).as_goal()


def build_termination(spec: dict | None) -> TerminationCondition:
    spec = spec or {"iterations": 10000}
    parts = []
    if "iterations" in spec:
        parts.append(TerminationCondition.max_iterations(spec["iterations"]))
    if "time" in spec:
        parts.append(TerminationCondition.max_time(spec["time"]))
    if "cost" in spec:
        parts.append(TerminationCondition.cost_below(spec["cost"]))
    if spec.get("exact_solution"):
        parts.append(TerminationCondition.solved_exactly())
    if not parts:
        raise ScenarioError("termination", "needs at least one of iterations, time, cost, exact_solution=true")
    return parts[0] if len(parts) == 1 else TerminationCondition.any_of(*parts)


def build_planner(spec: dict, path: str = "planner") -> PlannerSpec:
    name = spec["name"]
    params = spec.get("params", {})
    _wrap(f"{path}.name", PlannerSpec, name)
    # validate one key at a time so the error names the offending parameter
    for key, value in params.items():
        _wrap(f"{path}.params.{key}", PlannerSpec, name, {key: value})
    return _wrap(f"{path}.params", PlannerSpec, name, params)


# -- documents ------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    name: str
    problem: ProblemDefinition
    planner: PlannerSpec
    tc: TerminationCondition
    seed: int
    document: dict
    source: str | None = None


def scenario_from_document(doc: Any, base_dir: str = ".", name: str = "scenario",
                           source: str | None = None) -> Scenario:
    _validate(doc, "scenario", source)
    try:
        space = build_space(doc["space"])
        robot = build_robot(doc["robot"])
        scene = build_scene(doc.get("scene"), base_dir)
        dim = space.dim
        if len(doc["start"]) != dim:
            raise ScenarioError("start", f"expected {dim} coordinates, got {len(doc['start'])}")
        goal = build_goal(doc["goal"], dim)
        planner = build_planner(doc["planner"])
        tc = build_termination(doc.get("termination"))
        problem = _wrap("", ProblemDefinition, space, scene, robot, tuple(doc["start"]), goal,
                        doc.get("motion_resolution"))
        # geometry/space compatibility is checked by the validity layer
        _wrap("robot", problem.make_checker)
    except ScenarioError as exc:
        if source and exc.source is None:
            raise ScenarioError(exc.key_path, str(exc).split(": ", 1)[1], source) from None
        raise
    return Scenario(doc.get("name", name), problem, planner, tc, int(doc.get("seed", 0)), doc, source)


def load_scenario(path: str, overrides=()) -> Scenario:
    doc = _read_document(path)
    if not isinstance(doc, dict):
        raise ScenarioError("", "a scenario file must contain a mapping", path)
    apply_overrides(doc, overrides)
    stem = os.path.splitext(os.path.basename(path))[0]
    return scenario_from_document(doc, os.path.dirname(os.path.abspath(path)), stem, path)


@dataclass(frozen=True)
class SuiteFile:
    scenarios: dict[str, Scenario]
    planners: tuple[PlannerSpec, ...]
    labels: tuple[str, ...]
    runs: int
    tc: TerminationCondition
    master_seed: int
    document: dict


def load_suite(path: str, overrides=()) -> SuiteFile:
    from .bench.harness import planner_label

    doc = _read_document(path)
    if not isinstance(doc, dict):
        raise ScenarioError("", "a suite file must contain a mapping", path)
    apply_overrides(doc, overrides)
    _validate(doc, "suite", path)
    base = os.path.dirname(os.path.abspath(path))
    entries = doc["scenarios"]
    if isinstance(entries, list):
        names = [os.path.splitext(os.path.basename(p))[0] for p in entries]
        entries = dict(zip(names, entries)) if len(set(names)) == len(names) else None
        if entries is None:
            raise ScenarioError("scenarios", "scenario file stems collide; use a name: path mapping", path)
    scenarios = {}
    for name, rel in entries.items():
        sp = os.path.join(base, rel)
        if not os.path.exists(sp):
            raise ScenarioError(f"scenarios.{name}", f"scenario file not found: {sp}", path)
        scenarios[name] = load_scenario(sp)
    planners, labels = [], []
    for i, p in enumerate(doc["planners"]):
        try:
            spec = build_planner(p, f"planners.{i}")
        except ScenarioError as exc:
            raise ScenarioError(exc.key_path, str(exc).split(": ", 1)[1], path) from None
        planners.append(spec)
        labels.append(p.get("label", planner_label(spec)))
    if len(set(labels)) != len(labels):
        raise ScenarioError("planners", f"planner labels must be unique, got {labels}", path)
    return SuiteFile(scenarios, tuple(planners), tuple(labels), doc["runs"],
                     build_termination(doc["termination"]), doc["master_seed"], doc)
