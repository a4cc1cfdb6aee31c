"""Roadmap planners: PRM, PRM* and LazyPRM."""

from __future__ import annotations

import math

import numpy as np

from ..errors import PreconditionError
from .base import Planner, PlanningContext, RoadmapGraph, Status, TerminationMonitor, join_waypoints, register


class _Roadmap(RoadmapGraph):
    """Roadmap plus a neighbour index and per-edge waypoints."""

    def __init__(self, ctx: PlanningContext):
        super().__init__()
        self.index = ctx.new_index()
        self.ways: list = []

    def add_state(self, q) -> int:
        v = self.add_vertex(q)
        self.index.insert(q, v)
        return v

    def link(self, u: int, v: int, length: float, checked: bool, way) -> int:
        self.ways.append(way)
        return self.add_edge(u, v, length, checked)

    def oriented(self, e: int, frm: int) -> list:
        """Waypoints of edge ``e`` walked starting at vertex ``frm``."""
        way = self.ways[e]
        return way if self.edges[e][0] == frm else way[::-1]


class _RoadmapPlanner(Planner):
    lazy = False

    def _k(self, params: dict, n: int, dim: int) -> int:
        return params["prm_k"]

    def _check_space(self, ctx: PlanningContext):
        if not ctx.space.symmetric:
            raise PreconditionError("roadmap planners need a symmetric metric")

    def _connect(self, ctx, rm: _Roadmap, v: int, k: int) -> None:
        q = rm.vertices[v]
        nbrs = [(u, d) for u, d in rm.index.k_nearest(q, k + 1) if u != v][:k]
        if not nbrs:
            return
        if self.lazy:
            for u, _ in nbrs:
                try:
                    way = ctx.edge(rm.vertices[u], q)
                except Exception:
                    continue
                rm.link(u, v, ctx.waypoint_cost(way), False, way)
            return
        ways = ctx.motions([(rm.vertices[u], q) for u, _ in nbrs])
        for (u, _), way in zip(nbrs, ways):
            if way is not None:
                e = rm.link(u, v, ctx.waypoint_cost(way), True, way)
                self._dir_ok[e] = 1

    def _walk(self, ctx, rm: _Roadmap, verts, eids) -> list | None:
        """Waypoints along a roadmap path, each edge validated in the
        direction it is walked; invalid edges are removed (returns None)."""
        segs = []
        for frm, e in zip(verts[:-1], eids):
            way = rm.oriented(e, frm)
            entry = rm.edges[e]
            fwd = entry[0] == frm
            tag = 1 if fwd else 2
            if not entry[3] or not (self._dir_ok.get(e, 0) & tag):
                if not ctx.check_waypoints(way):
                    rm.remove_edge(e)
                    return None
                entry[3] = True
                self._dir_ok[e] = self._dir_ok.get(e, 0) | tag
            segs.append(way)
        return join_waypoints(segs)

    def _query(self, ctx, rm: _Roadmap, s: int, g: int) -> list | None:
        while True:
            found = rm.shortest_path(s, g)
            if found is None:
                return None
            path = self._walk(ctx, rm, *found)
            if path is not None:
                return path

    def _solve(self, ctx: PlanningContext, params: dict, monitor: TerminationMonitor):
        self._check_space(ctx)
        self._dir_ok: dict[int, int] = {}
        rm = _Roadmap(ctx)
        start = ctx.problem.start_state()
        s = rm.add_state(start)
        if ctx.goal_satisfied(start):
            return ctx.finish(Status.SOLVED, [start], 0, 0, [(0, 0.0)], self.name, params, rm)
        g = rm.add_state(ctx.goal_roots()[0])
        dim = ctx.dim
        self._connect(ctx, rm, g, self._k(params, 2, dim))
        it = created = 0
        trace: list[tuple[int, float]] = []
        best_path, best_cost = None, math.inf
        next_query = 0
        last_edges = -1
        while not monitor(it, best_path is not None, best_cost if best_path is not None else None):
            it += 1
            q = ctx.sample_valid()
            if q is None:
                continue
            v = rm.add_state(q)
            created += 1
            self._connect(ctx, rm, v, self._k(params, len(rm), dim))
            if not rm.connected(s, g):
                continue
            # query on first connection, then at geometrically spaced sizes
            if len(rm) < next_query or len(rm.edges) == last_edges:
                continue
            next_query = max(len(rm) + 1, int(len(rm) * (1.1 if self.lazy else 1.25)))
            last_edges = len(rm.edges)
            path = self._query(ctx, rm, s, g)
            if path is not None:
                c = ctx.waypoint_cost(path)
                if c < best_cost:
                    best_path, best_cost = path, c
                    trace.append((it, c))
                if self.lazy:
                    break
        if best_path is None or not self.lazy:
            path = self._query(ctx, rm, s, g) if rm.connected(s, g) else None
            if path is not None:
                c = ctx.waypoint_cost(path)
                if c < best_cost:
                    best_path, best_cost = path, c
                    trace.append((it, c))
        if best_path is None:
            return ctx.finish(Status.FAILED, None, it, created, trace, self.name, params, rm)
        return ctx.finish(Status.SOLVED, best_path, it, created, trace, self.name, params, rm)


@register
class PRM(_RoadmapPlanner):
    name = "prm"


@register
class PRMStar(_RoadmapPlanner):
    name = "prm_star"

    def _k(self, params: dict, n: int, dim: int) -> int:
        k = math.ceil(params["prm_k_star"] * math.e * (1.0 + 1.0 / dim) * math.log(max(n, 1)))
        return max(k, 1)


@register
class LazyPRM(_RoadmapPlanner):
    name = "lazy_prm"
    lazy = True
