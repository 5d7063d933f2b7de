"""Filtrations of temporal graphs: filter values, threshold grids, complexes.

A bifiltration scans one filter axis (m thresholds) against time (T
snapshots). Cells are clique complexes of thresholded subgraphs, monotone
along the threshold axis for a fixed t.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import ContractViolation, ValidationError
from .graph_model import NodeId, Snapshot, TemporalGraph, induced_subgraph


class FilterKind(str, Enum):
    DEGREE = "degree"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"
    EDGE_WEIGHT = "edge-weight"
    POWER_GEODESIC = "power-geodesic"


NODE_VALUED_KINDS = (FilterKind.DEGREE, FilterKind.CLOSENESS, FilterKind.BETWEENNESS)


class Orientation(str, Enum):
    SUBLEVEL = "sublevel"
    SUPERLEVEL = "superlevel"


@dataclass(frozen=True)
class ThresholdGrid:
    """Strictly increasing threshold values with a provenance note."""

    values: tuple[float, ...]
    provenance: str = ""

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValidationError("threshold grid must be nonempty")
        for a, b in zip(self.values, self.values[1:]):
            if not b > a:
                raise ValidationError("threshold grid must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class SimplicialComplex:
    """Abstract simplicial complex over string vertex labels.

    Simplices are canonical sorted vertex tuples of size 1..maxdim+1.
    Construction trusts face closure for speed; `validate()` checks it.
    """

    simplices: frozenset[tuple[NodeId, ...]]
    maxdim: int

    def __post_init__(self):
        if self.maxdim < 0:
            raise ContractViolation(f"maxdim must be >= 0, got {self.maxdim}")

    @staticmethod
    def from_simplices(
        simplices: Iterable[Sequence[NodeId]], maxdim: int, close: bool = False
    ) -> "SimplicialComplex":
        canon = {tuple(sorted(set(s))) for s in simplices}
        if any(len(s) == 0 for s in canon):
            raise ValidationError("empty simplex")
        if any(len(s) - 1 > maxdim for s in canon):
            raise ValidationError(f"simplex above declared maxdim {maxdim}")
        if close:
            closed: set[tuple[NodeId, ...]] = set()
            stack = list(canon)
            while stack:
                s = stack.pop()
                if s in closed:
                    continue
                closed.add(s)
                if len(s) > 1:
                    for i in range(len(s)):
                        stack.append(s[:i] + s[i + 1 :])
            canon = closed
        return SimplicialComplex(frozenset(canon), maxdim)

    def validate(self) -> None:
        """Raise ValidationError unless every facet of every simplex is present."""
        for s in self.simplices:
            if len(s) > 1:
                for i in range(len(s)):
                    if s[:i] + s[i + 1 :] not in self.simplices:
                        raise ValidationError(f"missing face {s[:i] + s[i + 1:]!r} of {s!r}")

    def dim_simplices(self, k: int) -> list[tuple[NodeId, ...]]:
        """Sorted k-simplices; the ordering is the canonical one used everywhere."""
        return sorted(s for s in self.simplices if len(s) == k + 1)

    def counts_by_dim(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.simplices:
            out[len(s) - 1] = out.get(len(s) - 1, 0) + 1
        return out

    @property
    def n_simplices(self) -> int:
        return len(self.simplices)

    def vertices(self) -> frozenset[NodeId]:
        return frozenset(s[0] for s in self.simplices if len(s) == 1)

    def one_skeleton(self) -> tuple[frozenset[NodeId], frozenset[tuple[NodeId, NodeId]]]:
        verts = self.vertices()
        edges = frozenset((s[0], s[1]) for s in self.simplices if len(s) == 2)
        return verts, edges

    def euler_characteristic(self) -> int:
        return sum((-1) ** (len(s) - 1) for s in self.simplices)

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        return self.simplices <= other.simplices

    @staticmethod
    def union(c1: "SimplicialComplex", c2: "SimplicialComplex") -> "SimplicialComplex":
        return SimplicialComplex(c1.simplices | c2.simplices, max(c1.maxdim, c2.maxdim))


def clique_complex(g: Snapshot, maxdim: int) -> SimplicialComplex:
    """Clique complex of g: one simplex per clique of at most maxdim+1 vertices."""
    if maxdim < 0:
        raise ContractViolation(f"maxdim must be >= 0, got {maxdim}")
    simplices: set[tuple[NodeId, ...]] = {(v,) for v in g.nodes}
    if maxdim == 0:
        return SimplicialComplex(frozenset(simplices), maxdim)
    adj = g.adjacency()
    level: list[tuple[NodeId, ...]] = [e for e in g.sorted_edges()]
    simplices.update(level)
    dim = 1
    while dim < maxdim and level:
        nxt: list[tuple[NodeId, ...]] = []
        for s in level:
            common = set(adj[s[0]])
            for v in s[1:]:
                common &= adj[v]
            last = s[-1]
            for w in sorted(common):
                if w > last:
                    nxt.append(s + (w,))
        simplices.update(nxt)
        level = nxt
        dim += 1
    return SimplicialComplex(frozenset(simplices), maxdim)


def node_filter_values(g: Snapshot, kind: FilterKind) -> dict[NodeId, float]:
    """Filter value per node for a node-valued kind.

    Degree is the weighted degree. Closeness and betweenness use unit edge
    lengths: closeness(v) = (|comp(v)| - 1) / sum of hop distances within
    v's component (0 for isolated nodes); betweenness is unnormalized
    shortest-path betweenness counting each unordered pair once.
    """
    if kind not in NODE_VALUED_KINDS:
        raise ContractViolation(f"{kind.value} is not a node-valued filter kind")
    if kind is FilterKind.DEGREE:
        out = {v: 0.0 for v in g.nodes}
        for (u, v), w in g.weights.items():
            out[u] += w
            out[v] += w
        return out
    adj = g.adjacency()
    if kind is FilterKind.CLOSENESS:
        return {v: _closeness(v, adj) for v in g.nodes}
    return _betweenness(adj)


def _closeness(source: NodeId, adj: Mapping[NodeId, set[NodeId]]) -> float:
    dist = {source: 0}
    queue = deque([source])
    total = 0
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                total += dist[w]
                queue.append(w)
    if len(dist) == 1:
        return 0.0
    return (len(dist) - 1) / total


def _betweenness(adj: Mapping[NodeId, set[NodeId]]) -> dict[NodeId, float]:
    # Brandes accumulation; undirected, so pair contributions are halved.
    nodes = sorted(adj.keys())
    bc = {v: 0.0 for v in nodes}
    for s in nodes:
        stack: list[NodeId] = []
        pred: dict[NodeId, list[NodeId]] = {v: [] for v in nodes}
        sigma = {v: 0 for v in nodes}
        sigma[s] = 1
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    pred[w].append(v)
        delta = {v: 0.0 for v in nodes}
        while stack:
            w = stack.pop()
            for v in pred[w]:
                delta[v] += sigma[v] / sigma[w] * (1 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return {v: bc[v] / 2.0 for v in nodes}


def quantile_thresholds(values: Iterable[float], m: int) -> ThresholdGrid:
    """Equally spaced quantile grid: levels j/m for j = 1..m.

    Uses linear interpolation between order statistics. Duplicate quantiles
    collapse, so the grid may come back shorter than m; the last entry is
    always the maximum value.
    """
    if m < 1:
        raise ContractViolation(f"m must be >= 1, got {m}")
    vals = np.asarray(sorted(values), dtype=float)
    if vals.size == 0:
        raise ValidationError("empty value multiset")
    levels = [j / m for j in range(1, m + 1)]
    raw = np.quantile(vals, levels, method="linear")
    out: list[float] = []
    for q in raw:
        q = float(q)
        if not out or q > out[-1]:
            out.append(q)
    return ThresholdGrid(tuple(out), provenance=f"quantile(m={m}, n={vals.size})")


@dataclass(frozen=True)
class Bifiltration:
    """Grid of complexes indexed by (threshold j, time t), monotone in j.

    cell(j, t) uses 1-based indices matching the threshold and snapshot
    numbering.
    """

    grid: ThresholdGrid
    cells: tuple[tuple[SimplicialComplex, ...], ...]
    kind: FilterKind
    orientation: Orientation
    maxdim: int

    def __post_init__(self):
        if len(self.cells) != self.grid.m:
            raise ValidationError("one row of cells per threshold required")
        T = len(self.cells[0])
        for row in self.cells:
            if len(row) != T:
                raise ValidationError("ragged bifiltration rows")
        for j in range(len(self.cells) - 1):
            for t in range(T):
                if not self.cells[j][t].is_subcomplex_of(self.cells[j + 1][t]):
                    raise ValidationError(f"bifiltration not monotone at (j={j + 1}, t={t + 1})")

    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def T(self) -> int:
        return len(self.cells[0])

    def cell(self, j: int, t: int) -> SimplicialComplex:
        if not (1 <= j <= self.m and 1 <= t <= self.T):
            raise ContractViolation(f"cell index ({j}, {t}) outside grid {self.m}x{self.T}")
        return self.cells[j - 1][t - 1]

    def slice_row(self, j: int) -> tuple[SimplicialComplex, ...]:
        """All complexes at threshold j, ordered by time."""
        if not 1 <= j <= self.m:
            raise ContractViolation(f"slice {j} outside 1..{self.m}")
        return self.cells[j - 1]


def _oriented(values: Mapping[NodeId, float], grid: ThresholdGrid, orientation: Orientation):
    """Rewrite (values, grid) so superlevel becomes sublevel of negated data."""
    if orientation is Orientation.SUBLEVEL:
        return dict(values), grid.values
    neg = {v: -x for v, x in values.items()}
    return neg, tuple(sorted(-a for a in grid.values))


def sublevel_bifiltration(
    tg: TemporalGraph,
    kind: FilterKind,
    grid: ThresholdGrid,
    maxdim: int = 2,
    orientation: Orientation = Orientation.SUBLEVEL,
) -> Bifiltration:
    """Bifiltration of clique complexes from a node- or edge-valued filter.

    Node-valued kinds induce on nodes with value under the threshold;
    EDGE_WEIGHT keeps the full node set and thresholds edges by weight.
    Superlevel orientation runs sublevel on negated values against the
    negated, reversed grid.
    """
    if kind is FilterKind.POWER_GEODESIC:
        raise ContractViolation("power-geodesic uses power_filtration_sequence, not sublevel")
    if kind in NODE_VALUED_KINDS:
        oriented = [
            _oriented(node_filter_values(g, kind), grid, orientation) for g in tg.snapshots
        ]
        cuts = oriented[0][1] if oriented else grid.values
    else:
        sign = 1.0 if orientation is Orientation.SUBLEVEL else -1.0
        cuts = grid.values if sign > 0 else tuple(sorted(-a for a in grid.values))
    rows: list[tuple[SimplicialComplex, ...]] = []
    for j in range(grid.m):
        row: list[SimplicialComplex] = []
        for idx, g in enumerate(tg.snapshots):
            if kind in NODE_VALUED_KINDS:
                vals = oriented[idx][0]
                keep = {v for v, x in vals.items() if x <= cuts[j]}
                row.append(clique_complex(induced_subgraph(g, keep), maxdim))
            else:
                edges = [e for e in g.sorted_edges() if sign * g.weights[e] <= cuts[j]]
                sub = Snapshot(
                    timestamp=g.timestamp,
                    nodes=g.nodes,
                    edges=frozenset(edges),
                    weights={e: g.weights[e] for e in edges},
                )
                row.append(clique_complex(sub, maxdim))
        rows.append(tuple(row))
    return Bifiltration(grid=grid, cells=tuple(rows), kind=kind, orientation=orientation, maxdim=maxdim)


def geodesic_distances(g: Snapshot) -> tuple[list[NodeId], np.ndarray]:
    """Weighted shortest-path distance matrix; unreachable pairs are inf.

    Edge weights act as lengths. Node order is sorted labels.
    """
    nodes = g.sorted_nodes()
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    if n == 0:
        return nodes, np.zeros((0, 0))
    rows, cols, data = [], [], []
    for (u, v), w in g.weights.items():
        rows += [index[u], index[v]]
        cols += [index[v], index[u]]
        data += [w, w]
    mat = csr_matrix((data, (rows, cols)), shape=(n, n))
    dist = shortest_path(mat, method="D", directed=False)
    return nodes, dist


def power_filtration_sequence(
    g: Snapshot, grid: ThresholdGrid, maxdim: int = 2
) -> list[SimplicialComplex]:
    """Geodesic power filtration of one snapshot.

    Complex j joins (u, v) by an edge when their weighted geodesic distance
    is at most grid value j; all nodes stay present throughout. Once the
    threshold passes the largest finite distance, each connected component
    is a complete subgraph.
    """
    nodes, dist = geodesic_distances(g)
    out: list[SimplicialComplex] = []
    for delta in grid.values:
        edges: list[tuple[NodeId, NodeId, float]] = []
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                d = dist[i, j]
                if np.isfinite(d) and d <= delta:
                    edges.append((nodes[i], nodes[j], 1.0))
        sub = Snapshot.build(g.timestamp, edges, extra_nodes=nodes)
        out.append(clique_complex(sub, maxdim))
    return out


def power_bifiltration(
    tg: TemporalGraph, grid: ThresholdGrid, maxdim: int = 2
) -> Bifiltration:
    """Bifiltration whose rows scan the geodesic threshold per snapshot."""
    cols = [power_filtration_sequence(g, grid, maxdim) for g in tg.snapshots]
    rows = tuple(tuple(cols[t][j] for t in range(tg.T)) for j in range(grid.m))
    return Bifiltration(
        grid=grid,
        cells=rows,
        kind=FilterKind.POWER_GEODESIC,
        orientation=Orientation.SUBLEVEL,
        maxdim=maxdim,
    )


def collect_filter_values(tg: TemporalGraph, kind: FilterKind) -> list[float]:
    """Pooled value multiset across all snapshots, for quantile grids.

    Node kinds pool node values, EDGE_WEIGHT pools edge weights, and
    POWER_GEODESIC pools finite pairwise geodesic distances.
    """
    out: list[float] = []
    for g in tg.snapshots:
        if kind in NODE_VALUED_KINDS:
            out.extend(node_filter_values(g, kind).values())
        elif kind is FilterKind.EDGE_WEIGHT:
            out.extend(g.weights.values())
        else:
            _, dist = geodesic_distances(g)
            n = dist.shape[0]
            for i in range(n):
                for j in range(i + 1, n):
                    if np.isfinite(dist[i, j]):
                        out.append(float(dist[i, j]))
    return out


def build_bifiltration(
    tg: TemporalGraph,
    kind: FilterKind,
    maxdim: int = 2,
    orientation: Orientation = Orientation.SUBLEVEL,
    resolution: int | None = None,
    grid: ThresholdGrid | None = None,
) -> Bifiltration:
    """Grid-then-cells pipeline entry: derive thresholds, build the grid.

    Exactly one of resolution or grid must drive the thresholds: passing a
    grid uses it as-is, otherwise quantile_thresholds on the pooled filter
    values at the given resolution.
    """
    if grid is None:
        if resolution is None:
            raise ContractViolation("either resolution or grid is required")
        pooled = collect_filter_values(tg, kind)
        if kind in NODE_VALUED_KINDS and orientation is Orientation.SUPERLEVEL:
            base = quantile_thresholds([-x for x in pooled], resolution)
            grid = ThresholdGrid(
                tuple(sorted(-a for a in base.values)),
                provenance=base.provenance + ", superlevel",
            )
        else:
            grid = quantile_thresholds(pooled, resolution)
    if kind is FilterKind.POWER_GEODESIC:
        if orientation is not Orientation.SUBLEVEL:
            raise ContractViolation("power-geodesic supports only sublevel orientation")
        return power_bifiltration(tg, grid, maxdim)
    return sublevel_bifiltration(tg, kind, grid, maxdim, orientation)
