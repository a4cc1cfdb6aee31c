"""Metric-aware nearest-neighbor indexes for planner trees and roadmaps.

Two strategies share one interface:

* ``LinearScan`` evaluates the space metric against every stored state in
  one vectorized call.
* ``VantageTree`` is a vantage-point tree over the states present at the last
  rebuild plus an overflow list scanned linearly. The tree is rebuilt
  whenever the index has doubled since the last build.

Both return identical ``(id, distance)`` answers for symmetric metrics,
with ties broken by the lower id. Asymmetric metrics (Dubins) always use
the linear scan because vantage pruning relies on symmetry.

Reeds-Shepp distances are costly to evaluate, so candidates are first
screened with a cheap lower bound on the car path length. Only rows that could make the answer get an
exact distance. Screening never changes a result.
"""

from __future__ import annotations

import heapq
import math
from enum import Enum

import numpy as np

from .errors import ConfigurationError, ContractError, EmptyStructureError
from .spaces import Kind, SpaceDescriptor, distance_many
from .spaces.core import wrap_angles

# relative slack on triangle-inequality pruning; keeps ties that rounding
# would otherwise push just past the bound
_SLACK = 1e-9


class Strategy(str, Enum):
    LINEAR_SCAN = "LinearScan"
    VANTAGE_TREE = "VantageTree"


class _Node:
    __slots__ = ("vantage", "inner", "outer", "in_lo", "in_hi", "out_lo", "out_hi", "bucket")

    def __init__(self):
        self.vantage = -1
        self.inner = None
        self.outer = None
        self.in_lo = self.in_hi = self.out_lo = self.out_hi = 0.0
        self.bucket = None


class MetricIndex:
    """Nearest-neighbor storage keyed by integer payload ids.

    Distances are measured from stored items to the query, ``d(item, q)``;
    pass ``reverse=True`` to measure ``d(q, item)`` instead (only differs
    for Dubins).
    """

    def __init__(self, space: SpaceDescriptor, strategy: str | Strategy = "auto",
                 leaf_size: int = 32, reverse: bool = False):
        if strategy == "auto":
            # a screened scan beats vantage pruning when the metric is costly
            cheap = space.symmetric and space.kind != Kind.REEDS_SHEPP
            strategy = Strategy.VANTAGE_TREE if cheap else Strategy.LINEAR_SCAN
        strategy = Strategy(strategy)
        if strategy == Strategy.VANTAGE_TREE and not space.symmetric:
            strategy = Strategy.LINEAR_SCAN
        if leaf_size < 1:
            raise ConfigurationError("leaf_size must be >= 1")
        self.space = space
        self.strategy = strategy
        self.leaf_size = leaf_size
        self.reverse = reverse
        self._states = np.empty((16, space.dim))
        self._ids = np.empty(16, dtype=np.int64)
        self._n = 0
        self._root = None
        self._built = 0
        self._frozen = False

    def __len__(self) -> int:
        return self._n

    @property
    def size(self) -> int:
        return self._n

    @property
    def states(self) -> np.ndarray:
        return self._states[: self._n]

    @property
    def ids(self) -> np.ndarray:
        return self._ids[: self._n]

    def freeze(self) -> "MetricIndex":
        """Bring the tree up to date and forbid further inserts, making the
        index safe to read from several threads."""
        if self.strategy == Strategy.VANTAGE_TREE and self._n:
            self._rebuild()
        self._frozen = True
        return self

    def insert(self, q, item_id: int) -> None:
        if self._frozen:
            raise ContractError("cannot insert into a frozen index")
        q = np.asarray(q, dtype=float)
        if q.shape != (self.space.dim,):
            raise ContractError(f"state of shape {q.shape} does not match index dimension {self.space.dim}")
        if self._n == len(self._states):
            self._states = np.concatenate([self._states, np.empty_like(self._states)])
            self._ids = np.concatenate([self._ids, np.empty_like(self._ids)])
        self._states[self._n] = q
        self._ids[self._n] = item_id
        self._n += 1
        if self.strategy == Strategy.VANTAGE_TREE and self._n >= max(2 * self._built, 2 * self.leaf_size):
            self._rebuild()

    # -- queries ----------------------------------------------------------

    def _dists(self, rows, q, bound: float = math.inf) -> np.ndarray:
        """Distances to ``q``; rows provably farther than ``bound`` get inf."""
        Q = self._states[rows]
        if bound == math.inf or self.space.kind != Kind.REEDS_SHEPP:
            return distance_many(self.space, Q, q, reverse=self.reverse)
        out = np.full(len(Q), math.inf)
        keep = np.nonzero(_car_lower_bound(self.space, Q, q) <= bound + _SLACK * (1.0 + bound))[0]
        if len(keep):
            out[keep] = distance_many(self.space, Q[keep], q, reverse=self.reverse)
        return out

    def _scan_k(self, q, k: int) -> np.ndarray:
        """Exact distances for every row that could be among the k nearest."""
        if self.space.kind != Kind.REEDS_SHEPP or k >= self._n:
            return self._dists(slice(0, self._n), q)
        Q = self._states[: self._n]
        gap = _car_lower_bound(self.space, Q, q)
        # the k rows with the smallest lower bound give an upper bound on the kth distance
        first = np.argpartition(gap, k - 1)[:k]
        tau = float(distance_many(self.space, Q[first], q, reverse=self.reverse).max())
        return self._dists(slice(0, self._n), q, tau)

    def nearest(self, q) -> tuple[int, float]:
        if self._n == 0:
            raise EmptyStructureError("nearest() on an empty index")
        return self.k_nearest(q, 1)[0]

    def k_nearest(self, q, k: int) -> list[tuple[int, float]]:
        if k < 1:
            raise ContractError("k must be >= 1")
        q = np.asarray(q, dtype=float)
        if self._n == 0:
            return []
        if self.strategy == Strategy.LINEAR_SCAN or self._root is None:
            d = self._scan_k(q, k)
            return _top_k(d, self._ids[: self._n], k)
        heap: list = []  # max-heap of (-dist, -id)
        self._knn(self._root, q, k, heap)
        if self._built < self._n:
            d = self._dists(slice(self._built, self._n), q, -heap[0][0] if len(heap) == k else math.inf)
            for dist, pid in zip(d.tolist(), self._ids[self._built: self._n].tolist()):
                _push(heap, k, dist, pid)
        return sorted(((-nid, -nd) for nd, nid in heap), key=lambda x: (x[1], x[0]))

    def within_radius(self, q, r: float) -> list[tuple[int, float]]:
        if r < 0:
            raise ContractError("radius must be >= 0")
        r = float(r)
        q = np.asarray(q, dtype=float)
        if self._n == 0:
            return []
        if self.strategy == Strategy.LINEAR_SCAN or self._root is None:
            d = self._dists(slice(0, self._n), q, r)
            sel = np.nonzero(d <= r)[0]
            return _sorted_pairs(d[sel], self._ids[sel])
        found_d: list[float] = []
        found_id: list[int] = []
        self._radius(self._root, q, r, found_d, found_id)
        if self._built < self._n:
            d = self._dists(slice(self._built, self._n), q, r)
            sel = np.nonzero(d <= r)[0]
            found_d.extend(d[sel].tolist())
            found_id.extend(self._ids[self._built + sel].tolist())
        return _sorted_pairs(np.array(found_d), np.array(found_id, dtype=np.int64))

    # -- vantage tree -----------------------------------------------------

    def _rebuild(self) -> None:
        self._built = self._n
        self._root = self._build(np.arange(self._n))

    def _build(self, rows: np.ndarray) -> _Node:
        node = _Node()
        if len(rows) <= self.leaf_size:
            node.bucket = rows
            return node
        v = rows[0]
        rest = rows[1:]
        d = distance_many(self.space, self._states[rest], self._states[v])
        mu = float(np.median(d))
        inside = d <= mu
        # all-equal distances would never split; send half each way
        if inside.all():
            inside = np.zeros(len(rest), dtype=bool)
            inside[: len(rest) // 2] = True
        node.vantage = v
        if inside.any():
            node.in_lo, node.in_hi = float(d[inside].min()), float(d[inside].max())
            node.inner = self._build(rest[inside])
        if (~inside).any():
            node.out_lo, node.out_hi = float(d[~inside].min()), float(d[~inside].max())
            node.outer = self._build(rest[~inside])
        return node

    def _knn(self, node: _Node, q, k: int, heap: list) -> None:
        if node.bucket is not None:
            d = self._dists(node.bucket, q, -heap[0][0] if len(heap) == k else math.inf)
            for dist, pid in zip(d.tolist(), self._ids[node.bucket].tolist()):
                _push(heap, k, dist, pid)
            return
        dv = float(self._dists([node.vantage], q)[0])
        _push(heap, k, dv, int(self._ids[node.vantage]))
        children = []
        if node.inner is not None:
            children.append((max(dv - node.in_hi, node.in_lo - dv, 0.0), node.inner))
        if node.outer is not None:
            children.append((max(dv - node.out_hi, node.out_lo - dv, 0.0), node.outer))
        children.sort(key=lambda c: c[0])
        for lower, child in children:
            tau = -heap[0][0] if len(heap) == k else math.inf
            if lower > tau + _SLACK * (1.0 + tau):
                continue
            self._knn(child, q, k, heap)

    def _radius(self, node: _Node, q, r: float, out_d: list, out_id: list) -> None:
        if node.bucket is not None:
            d = self._dists(node.bucket, q, r)
            sel = np.nonzero(d <= r)[0]
            out_d.extend(d[sel].tolist())
            out_id.extend(self._ids[node.bucket[sel]].tolist())
            return
        dv = float(self._dists([node.vantage], q)[0])
        if dv <= r:
            out_d.append(dv)
            out_id.append(int(self._ids[node.vantage]))
        tol = r + _SLACK * (1.0 + r)
        if node.inner is not None and max(dv - node.in_hi, node.in_lo - dv) <= tol:
            self._radius(node.inner, q, r, out_d, out_id)
        if node.outer is not None and max(dv - node.out_hi, node.out_lo - dv) <= tol:
            self._radius(node.outer, q, r, out_d, out_id)


def _car_lower_bound(space, Q: np.ndarray, q) -> np.ndarray:
    """Lower bound on car path length: the path covers the straight-line gap
    and turns through at least the heading change at radius rho."""
    dx = Q[:, 0] - q[0]
    dy = Q[:, 1] - q[1]
    return np.maximum(np.sqrt(dx * dx + dy * dy), space.rho * np.abs(wrap_angles(q[2] - Q[:, 2])))


def _push(heap: list, k: int, dist: float, pid: int) -> None:
    item = (-dist, -pid)
    if len(heap) < k:
        heapq.heappush(heap, item)
    elif item > heap[0]:
        heapq.heapreplace(heap, item)


def _top_k(d: np.ndarray, ids: np.ndarray, k: int) -> list[tuple[int, float]]:
    if k < len(d):
        # partition on distance, then keep ties at the cut for id ordering
        kth = np.partition(d, k - 1)[k - 1]
        sel = np.nonzero(d <= kth)[0]
        d, ids = d[sel], ids[sel]
    return _sorted_pairs(d, ids)[:k]


def _sorted_pairs(d: np.ndarray, ids: np.ndarray) -> list[tuple[int, float]]:
    order = np.lexsort((ids, d))
    return list(zip(ids[order].tolist(), d[order].tolist()))


def nn_insert(index: MetricIndex, q, item_id: int) -> None:
    index.insert(q, item_id)


def nn_nearest(index: MetricIndex, q) -> tuple[int, float]:
    return index.nearest(q)


def nn_k_nearest(index: MetricIndex, q, k: int) -> list[tuple[int, float]]:
    return index.k_nearest(q, k)


def nn_within_radius(index: MetricIndex, q, r: float) -> list[tuple[int, float]]:
    return index.within_radius(q, r)
