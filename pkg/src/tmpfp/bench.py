"""Synthetic dynamic graphs and a timing harness for the shared-grid pipeline.

The harness contrasts two ways of filling the fast-Betti tensor grid:
the naive arm rebuilds filter values, induced subgraph, clique complex,
and boundary-matrix ranks from scratch for every (slice, time) cell; the
shared arm computes filter values once per snapshot and sweeps the slice
axis incrementally with a union-find for components and an incremental
GF(2) echelon for triangle-boundary rank. Both arms must produce identical
tensors; only the wall time differs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, ContractViolation, ValidationError
from .filtration import (
    NODE_VALUED_KINDS,
    FilterKind,
    ThresholdGrid,
    clique_complex,
    collect_filter_values,
    node_filter_values,
    quantile_thresholds,
)
from .graph_model import Snapshot, TemporalGraph, edge_key, induced_subgraph
from .zigzag import homology_dimension_oracle


def generate_synthetic(
    n_nodes: int,
    T: int,
    churn: float = 0.3,
    seed: int = 0,
    density: float = 0.05,
) -> TemporalGraph:
    """Seeded evolving graph: ER-style base, churn fraction resampled per step.

    Each step every vertex pair is independently revisited with probability
    churn and resampled at the base density, so churn 0 freezes the graph
    and churn 1 draws a fresh independent graph each step. The node set is
    constant; weights are uniform in [0.5, 1.5).
    """
    if n_nodes < 1 or T < 1:
        raise ValidationError(f"need n_nodes, T >= 1, got {n_nodes}, {T}")
    if not 0 <= churn <= 1:
        raise ValidationError(f"churn must lie in [0, 1], got {churn}")
    if not 0 < density <= 1:
        raise ValidationError(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    width = max(1, len(str(n_nodes - 1)))
    names = [f"n{i:0{width}d}" for i in range(n_nodes)]
    index_pairs = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)]
    n_pairs = len(index_pairs)

    present: dict[tuple[str, str], float] = {}
    snapshots = []
    for t in range(1, T + 1):
        coin = rng.random(n_pairs)
        member = rng.random(n_pairs) < density
        weights = rng.uniform(0.5, 1.5, n_pairs)
        for idx, (i, j) in enumerate(index_pairs):
            resampled = coin[idx] < churn if t > 1 else True
            if not resampled:
                continue
            key = edge_key(names[i], names[j])
            if member[idx]:
                present[key] = float(weights[idx])
            else:
                present.pop(key, None)
        edges = [(u, v, w) for (u, v), w in sorted(present.items())]
        snapshots.append(Snapshot.build(t, edges, extra_nodes=names))
    return TemporalGraph(tuple(snapshots))


@dataclass(frozen=True)
class BenchConfig:
    n_nodes: int = 100
    T: int = 50
    resolution: int = 20
    churn: float = 0.3
    seed: int = 7
    density: float = 0.05
    filter_kind: FilterKind = FilterKind.DEGREE
    homology_dims: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "filter_kind", FilterKind(self.filter_kind))
        if self.filter_kind not in NODE_VALUED_KINDS:
            raise ContractViolation("bench supports node-valued sublevel filtrations only")
        if not self.homology_dims or any(k not in (0, 1) for k in self.homology_dims):
            raise ContractViolation("bench computes dims 0 and 1 of depth-2 clique complexes")


@dataclass(frozen=True)
class BenchResult:
    config: BenchConfig
    time_naive: float
    time_tmp: float
    outputs_equal: bool

    @property
    def speedup(self) -> float:
        return self.time_naive / self.time_tmp


def _naive_tensors(
    tg: TemporalGraph, grid: ThresholdGrid, kind: FilterKind, dims: tuple[int, ...]
) -> dict[int, np.ndarray]:
    out = {k: np.zeros((grid.m, tg.T)) for k in dims}
    for j, cut in enumerate(grid.values):
        for t in range(1, tg.T + 1):
            g = tg.snapshot(t)
            values = node_filter_values(g, kind)
            keep = {v for v, val in values.items() if val <= cut}
            complex_ = clique_complex(induced_subgraph(g, keep), maxdim=2)
            for k in dims:
                out[k][j, t - 1] = homology_dimension_oracle(complex_, k)
    return out


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}
        self.components = 0

    def add(self, x) -> None:
        self.parent[x] = x
        self.components += 1

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry
            self.components -= 1


def _shared_tensors(
    tg: TemporalGraph, grid: ThresholdGrid, kind: FilterKind, dims: tuple[int, ...]
) -> dict[int, np.ndarray]:
    cuts = grid.values
    m = grid.m
    out = {k: np.zeros((m, tg.T)) for k in dims}
    for t in range(1, tg.T + 1):
        g = tg.snapshot(t)
        values = node_filter_values(g, kind)
        # bucket[j] lists vertices entering exactly at slice j
        buckets: list[list] = [[] for _ in range(m)]
        for v, val in values.items():
            j = int(np.searchsorted(cuts, val, side="left"))
            if j < m:
                buckets[j].append(v)
        adjacency = g.adjacency()
        uf = _UnionFind()
        present: set = set()
        n_edges = 0
        rank2 = 0
        echelon: dict[tuple, set] = {}  # pivot edge -> reduced triangle boundary
        for j in range(m):
            for v in sorted(buckets[j]):
                uf.add(v)
                present.add(v)
                neighbors = [u for u in adjacency.get(v, ()) if u in present and u != v]
                for u in neighbors:
                    n_edges += 1
                    uf.union(u, v)
                # each triangle enters with its last vertex; new edges all touch v
                for a_i in range(len(neighbors)):
                    for b_i in range(a_i + 1, len(neighbors)):
                        u, w = neighbors[a_i], neighbors[b_i]
                        if g.weight(u, w) == 0.0:
                            continue
                        vec = {edge_key(u, v), edge_key(w, v), edge_key(u, w)}
                        while vec:
                            pivot = max(vec)
                            if pivot not in echelon:
                                echelon[pivot] = vec
                                rank2 += 1
                                break
                            vec = vec ^ echelon[pivot]
            beta0 = uf.components
            beta1 = n_edges - len(present) + beta0 - rank2
            if 0 in out:
                out[0][j, t - 1] = beta0
            if 1 in out:
                out[1][j, t - 1] = beta1
    return out


def run_bench(config: BenchConfig = BenchConfig()) -> BenchResult:
    """Time both arms on one synthetic dataset; tensors must match exactly."""
    tg = generate_synthetic(
        config.n_nodes, config.T, churn=config.churn, seed=config.seed, density=config.density
    )
    pooled = collect_filter_values(tg, config.filter_kind)
    grid = quantile_thresholds(pooled, config.resolution)

    start = time.perf_counter()
    shared = _shared_tensors(tg, grid, config.filter_kind, config.homology_dims)
    time_tmp = time.perf_counter() - start

    start = time.perf_counter()
    naive = _naive_tensors(tg, grid, config.filter_kind, config.homology_dims)
    time_naive = time.perf_counter() - start

    equal = all(np.array_equal(shared[k], naive[k]) for k in config.homology_dims)
    if not equal:
        raise ComputationError("shared and naive fast-Betti tensors disagree")
    return BenchResult(config=config, time_naive=time_naive, time_tmp=time_tmp, outputs_equal=True)


def shared_fast_betti(
    tg: TemporalGraph, grid: ThresholdGrid, kind: FilterKind, dims: tuple[int, ...]
) -> dict[int, np.ndarray]:
    """Incremental fast-Betti tensors, exposed for equivalence testing."""
    if kind not in NODE_VALUED_KINDS:
        raise ContractViolation("shared sweep supports node-valued sublevel filtrations only")
    if any(k not in (0, 1) for k in dims):
        raise ContractViolation("shared sweep computes dims 0 and 1 only")
    return _shared_tensors(tg, grid, kind, dims)
