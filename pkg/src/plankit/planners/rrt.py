"""Tree planners: RRT, RRT-Connect and RRT*."""

from __future__ import annotations

import math

import numpy as np

from .base import Planner, PlanningContext, Status, TerminationMonitor, join_waypoints, register


class _Tree:
    """Vertices with parent links; ``edges[i]`` holds the waypoints of the
    motion between vertex ``i`` and its parent (in path order)."""

    def __init__(self, ctx: PlanningContext, root, reverse: bool = False):
        self.reverse = reverse
        self.index = ctx.new_index(reverse=reverse)
        self.states = [root]
        self.parent = [-1]
        self.edges: list = [None]
        self.index.insert(root, 0)

    def __len__(self):
        return len(self.states)

    def add(self, q, parent: int, way) -> int:
        i = len(self.states)
        self.states.append(q)
        self.parent.append(parent)
        self.edges.append(way)
        self.index.insert(q, i)
        return i

    def nearest(self, q) -> int:
        return self.index.nearest(q)[0]

    def branch(self, i: int) -> list:
        """Waypoints from the root to vertex ``i`` (or from ``i`` to the root
        for a reverse tree)."""
        segs = []
        while self.parent[i] >= 0:
            segs.append(self.edges[i])
            i = self.parent[i]
        if not segs:
            return [self.states[i]]
        if self.reverse:
            return join_waypoints(segs)
        return join_waypoints(segs[::-1])


def _approximate(ctx: PlanningContext, tree: _Tree, best: int | None, params, it, created, trace, name):
    if params.get("return_approximate") and best is not None:
        return ctx.finish(Status.APPROXIMATE, tree.branch(best), it, created, trace, name, params)
    return ctx.finish(Status.FAILED, None, it, created, trace, name, params)


@register
class RRT(Planner):
    name = "rrt"

    def _solve(self, ctx: PlanningContext, params: dict, monitor: TerminationMonitor):
        start = ctx.problem.start_state()
        tree = _Tree(ctx, start)
        max_len = params["max_edge_length"]
        bias = params["goal_bias"]
        best, best_d = None, math.inf
        d0 = ctx.goal_distance(start)
        if d0 is not None:
            best, best_d = 0, d0
        if ctx.goal_satisfied(start):
            return ctx.finish(Status.SOLVED, [start], 0, 0, [(0, 0.0)], self.name, params)
        it = created = 0
        while not monitor(it):
            it += 1
            target = ctx.sample_goal() if bias > 0 and ctx.bias_rng.random() < bias else None
            if target is None:
                target = ctx.sample()
                if target is None:
                    continue
            near = tree.nearest(target)
            q = ctx.steer(tree.states[near], target, max_len)
            if q is None or ctx.dist(tree.states[near], q) == 0.0:
                continue
            way = ctx.motion(tree.states[near], q)
            if way is None:
                continue
            v = tree.add(q, near, way)
            created += 1
            if ctx.goal_satisfied(q):
                path = tree.branch(v)
                cost = ctx.waypoint_cost(path)
                return ctx.finish(Status.SOLVED, path, it, created, [(it, cost)], self.name, params)
            d = ctx.goal_distance(q)
            if d is not None and d < best_d:
                best, best_d = v, d
        return _approximate(ctx, tree, best, params, it, created, [], self.name)


@register
class RRTConnect(Planner):
    name = "rrt_connect"

    def _extend(self, ctx, tree: _Tree, target, max_len):
        """One step of ``tree`` towards ``target``; returns the new vertex or None."""
        near = tree.nearest(target)
        nq = tree.states[near]
        if tree.reverse:
            q = ctx.steer_back(target, nq, max_len)
            if q is None or ctx.dist(q, nq) == 0.0:
                return None
            way = ctx.motion(q, nq, check_start=True)
        else:
            q = ctx.steer(nq, target, max_len)
            if q is None or ctx.dist(nq, q) == 0.0:
                return None
            way = ctx.motion(nq, q)
        if way is None:
            return None
        return tree.add(q, near, way)

    def _solve(self, ctx: PlanningContext, params: dict, monitor: TerminationMonitor):
        start = ctx.problem.start_state()
        if ctx.goal_satisfied(start):
            return ctx.finish(Status.SOLVED, [start], 0, 0, [(0, 0.0)], self.name, params)
        fwd = _Tree(ctx, start)
        back = _Tree(ctx, ctx.goal_roots()[0], reverse=True)
        max_len = params["max_edge_length"]
        best, best_d = 0, ctx.goal_distance(start)
        if best_d is None:
            best = None
        it = created = 0
        grow, other = fwd, back
        steps_cap = int(4 * ctx.diameter / max_len) + 10
        while not monitor(it):
            it += 1
            target = ctx.sample()
            if target is not None:
                v = self._extend(ctx, grow, target, max_len)
                if v is not None:
                    created += 1
                    if grow is fwd and best is not None:
                        d = ctx.goal_distance(grow.states[v])
                        if d < best_d:
                            best, best_d = v, d
                    meet = grow.states[v]
                    # connect: keep stepping the other tree until it reaches
                    # the new vertex or gets blocked
                    for _ in range(steps_cap):
                        w = self._extend(ctx, other, meet, max_len)
                        if w is None:
                            break
                        created += 1
                        if np.array_equal(other.states[w], meet):
                            fi, bi = (v, w) if grow is fwd else (w, v)
                            path = join_waypoints([fwd.branch(fi), back.branch(bi)])
                            cost = ctx.waypoint_cost(path)
                            return ctx.finish(Status.SOLVED, path, it, created, [(it, cost)], self.name, params)
            grow, other = other, grow
        return _approximate(ctx, fwd, best, params, it, created, [], self.name)


class _Costs:
    """Growable float array of vertex costs."""

    def __init__(self):
        self.a = np.zeros(64)
        self.n = 0

    def append(self, v: float) -> None:
        if self.n == len(self.a):
            self.a = np.concatenate([self.a, np.zeros(len(self.a))])
        self.a[self.n] = v
        self.n += 1

    def __getitem__(self, i):
        return self.a[i]

    def __setitem__(self, i, v):
        self.a[i] = v


@register
class RRTStar(Planner):
    name = "rrt_star"

    def _solve(self, ctx: PlanningContext, params: dict, monitor: TerminationMonitor):
        start = ctx.problem.start_state()
        tree = _Tree(ctx, start)
        symmetric = ctx.space.symmetric
        plain = ctx.cs is None
        rindex = None if symmetric else ctx.new_index(reverse=True)
        if rindex is not None:
            rindex.insert(start, 0)
        cost = _Costs()
        cost.append(0.0)
        ecost = [0.0]
        children: list[list[int]] = [[]]
        max_len = params["max_edge_length"]
        bias = params["goal_bias"]
        gamma = params["rewire_gamma"]
        dim = ctx.dim
        goal_set: list[int] = []
        trace: list[tuple[int, float]] = []
        best_cost = math.inf
        best_vertex = None
        approx, approx_d = None, math.inf
        d0 = ctx.goal_distance(start)
        if d0 is not None:
            approx, approx_d = 0, d0
        if ctx.goal_satisfied(start):
            goal_set.append(0)
            best_cost, best_vertex = 0.0, 0
            trace.append((0, 0.0))

        def edge_costs(ids, ds, frm_new, useful):
            """Edge costs between q and vertices ``ids``.

            The metric distance ``ds`` is a lower bound on any edge cost, so edges
            are only built where ``useful`` says that bound could still win.
            """
            if plain:
                return ds
            cs = np.full(len(ids), math.inf)
            for j in np.nonzero(useful)[0]:
                x = ids[j]
                try:
                    w = ctx.edge(q, tree.states[x]) if frm_new else ctx.edge(tree.states[x], q)
                except Exception:
                    continue
                cs[j] = ctx.waypoint_cost(w)
            return cs

        it = created = 0
        while not monitor(it, best_vertex is not None, best_cost if best_vertex is not None else None):
            it += 1
            target = ctx.sample_goal() if bias > 0 and ctx.bias_rng.random() < bias else None
            if target is None:
                target = ctx.sample()
                if target is None:
                    continue
            near = tree.nearest(target)
            nq = tree.states[near]
            q = ctx.steer(nq, target, max_len)
            if q is None or ctx.dist(nq, q) == 0.0:
                continue
            way = ctx.motion(nq, q)
            if way is None:
                continue

            n = len(tree) + 1
            r = min(gamma * (math.log(n) / n) ** (1.0 / dim), max_len)
            incoming = tree.index.within_radius(q, r)  # d(x, q)
            in_ids = np.array([x for x, _ in incoming], dtype=np.int64)
            in_d = np.array([d for _, d in incoming])

            # cheapest valid parent; the steering parent is known to be good
            best_parent, best_way = near, way
            best_ec = ctx.waypoint_cost(way)
            best_c = cost[near] + best_ec
            if len(in_ids):
                ecs = edge_costs(in_ids, in_d, False, (cost[in_ids] + in_d < best_c) & (in_ids != near))
                totals = cost[in_ids] + ecs
                sel = np.nonzero((totals < best_c) & (in_ids != near))[0]
                if len(sel):
                    sel = sel[np.lexsort((in_ids[sel], totals[sel]))]
                    # the cheapest candidate usually wins, so try it alone before batching the rest
                    pairs = [(tree.states[in_ids[j]], q) for j in sel]
                    checked = [ctx.motion(*pairs[0])]
                    if checked[0] is None and len(pairs) > 1:
                        rest = pairs[1:]
                        checked += ctx.motions(rest) if plain else [ctx.motion(a, b) for a, b in rest]
                    for j, ok in zip(sel, checked):
                        if ok is not None:
                            best_parent, best_way = int(in_ids[j]), ok
                            best_ec, best_c = float(ecs[j]), float(totals[j])
                            break

            v = tree.add(q, best_parent, best_way)
            if rindex is not None:
                rindex.insert(q, v)
            created += 1
            cost.append(best_c)
            ecost.append(best_ec)
            children.append([])
            children[best_parent].append(v)

            # rewire neighbours through the new vertex
            if symmetric:
                out_ids, out_d = in_ids, in_d
            else:
                outgoing = rindex.within_radius(q, r)  # d(q, x)
                out_ids = np.array([x for x, _ in outgoing], dtype=np.int64)
                out_d = np.array([d for _, d in outgoing])
            if len(out_ids):
                ecs = edge_costs(out_ids, out_d, True, (best_c + out_d < cost[out_ids]) & (out_ids != best_parent))
                sel = np.nonzero((best_c + ecs < cost[out_ids]) & (out_ids != best_parent))[0]
                if len(sel):
                    pairs = [(q, tree.states[out_ids[j]]) for j in sel]
                    checked = ctx.motions(pairs) if plain else [ctx.motion(a, b) for a, b in pairs]
                    for j, ok in zip(sel, checked):
                        x = int(out_ids[j])
                        ec = float(ecs[j])
                        if ok is None or not best_c + ec < cost[x]:
                            continue
                        children[tree.parent[x]].remove(x)
                        tree.parent[x] = v
                        tree.edges[x] = ok
                        children[v].append(x)
                        ecost[x] = ec
                        cost[x] = best_c + ec
                        stack = list(children[x])
                        while stack:
                            y = stack.pop()
                            cost[y] = cost[tree.parent[y]] + ecost[y]
                            stack.extend(children[y])

            if ctx.goal_satisfied(q):
                goal_set.append(v)
            elif approx is not None:
                d = ctx.goal_distance(q)
                if d < approx_d:
                    approx, approx_d = v, d
            for g in goal_set:
                if cost[g] < best_cost:
                    best_cost, best_vertex = float(cost[g]), g
            if best_vertex is not None and (not trace or best_cost < trace[-1][1]):
                trace.append((it, best_cost))

        if best_vertex is not None:
            return ctx.finish(Status.SOLVED, tree.branch(best_vertex), it, created, trace, self.name, params)
        return _approximate(ctx, tree, approx, params, it, created, trace, self.name)
