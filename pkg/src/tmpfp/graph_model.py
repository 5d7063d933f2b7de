"""Temporal graph model: snapshots, unions, windows, edge-list parsing.

A temporal graph is a sequence of undirected weighted snapshots indexed
1..T. Nodes are opaque string labels. Edges are canonical sorted pairs with
strictly positive weights; absent edges behave as weight 0.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import IngestionError, ValidationError

NodeId = str


def edge_key(u: NodeId, v: NodeId) -> tuple[NodeId, NodeId]:
    """Canonical undirected edge key. Self-loops are rejected."""
    if u == v:
        raise ValidationError(f"self-loop on node {u!r}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Snapshot:
    """One time-slice: node set, edge set, positive edge weights.

    Immutable after construction. `weights` maps canonical edge keys to
    floats and covers exactly the edge set.
    """

    timestamp: int
    nodes: frozenset[NodeId]
    edges: frozenset[tuple[NodeId, NodeId]]
    weights: Mapping[tuple[NodeId, NodeId], float] = field(compare=False)

    def __post_init__(self):
        for (u, v) in self.edges:
            if u == v:
                raise ValidationError(f"self-loop on node {u!r}")
            if u > v:
                raise ValidationError(f"edge ({u!r}, {v!r}) is not in canonical order")
            if u not in self.nodes or v not in self.nodes:
                raise ValidationError(f"edge ({u!r}, {v!r}) has an endpoint outside the node set")
        if set(self.weights.keys()) != set(self.edges):
            raise ValidationError("weights must be keyed by exactly the edge set")
        for e, w in self.weights.items():
            if not (w > 0):
                raise ValidationError(f"edge {e!r} has non-positive weight {w!r}")

    @staticmethod
    def build(
        timestamp: int,
        edges: Iterable[tuple[NodeId, NodeId, float]] = (),
        extra_nodes: Iterable[NodeId] = (),
    ) -> "Snapshot":
        """Convenience constructor from (u, v, weight) triples."""
        weights: dict[tuple[NodeId, NodeId], float] = {}
        nodes = set(extra_nodes)
        for u, v, w in edges:
            k = edge_key(u, v)
            weights[k] = weights.get(k, 0.0) + float(w)
            nodes.add(u)
            nodes.add(v)
        return Snapshot(
            timestamp=timestamp,
            nodes=frozenset(nodes),
            edges=frozenset(weights.keys()),
            weights=weights,
        )

    def weight(self, u: NodeId, v: NodeId) -> float:
        """Weight of edge (u, v); 0.0 when absent."""
        return self.weights.get(edge_key(u, v), 0.0)

    def adjacency(self) -> dict[NodeId, set[NodeId]]:
        adj: dict[NodeId, set[NodeId]] = {v: set() for v in self.nodes}
        for (u, v) in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def sorted_nodes(self) -> list[NodeId]:
        return sorted(self.nodes)

    def sorted_edges(self) -> list[tuple[NodeId, NodeId]]:
        return sorted(self.edges)


@dataclass(frozen=True)
class TemporalGraph:
    """Snapshots with contiguous timestamps 1..T, T >= 1."""

    snapshots: tuple[Snapshot, ...]

    def __post_init__(self):
        if len(self.snapshots) == 0:
            raise ValidationError("a temporal graph needs at least one snapshot")
        for i, g in enumerate(self.snapshots, start=1):
            if g.timestamp != i:
                raise ValidationError(
                    f"snapshot timestamps must be contiguous 1..T, got {g.timestamp} at position {i}"
                )

    @property
    def T(self) -> int:
        return len(self.snapshots)

    def snapshot(self, t: int) -> Snapshot:
        if not 1 <= t <= self.T:
            raise ValidationError(f"t={t} outside 1..{self.T}")
        return self.snapshots[t - 1]

    def all_nodes(self) -> frozenset[NodeId]:
        out: set[NodeId] = set()
        for g in self.snapshots:
            out |= g.nodes
        return frozenset(out)


def union_graph(g1: Snapshot, g2: Snapshot) -> Snapshot:
    """Union of node and edge sets; shared edges take the max weight.

    The result keeps g1's timestamp; union snapshots sit between slices and
    have no timestamp of their own.
    """
    weights: dict[tuple[NodeId, NodeId], float] = dict(g1.weights)
    for e, w in g2.weights.items():
        weights[e] = max(weights.get(e, 0.0), w)
    return Snapshot(
        timestamp=g1.timestamp,
        nodes=g1.nodes | g2.nodes,
        edges=g1.edges | g2.edges,
        weights=weights,
    )


def induced_subgraph(g: Snapshot, keep: Iterable[NodeId]) -> Snapshot:
    """Subgraph induced on `keep` intersected with g's nodes."""
    kept = g.nodes & frozenset(keep)
    edges = frozenset(e for e in g.edges if e[0] in kept and e[1] in kept)
    weights = {e: g.weights[e] for e in edges}
    return Snapshot(timestamp=g.timestamp, nodes=kept, edges=edges, weights=weights)


def window(tg: TemporalGraph, width: int, stride: int) -> list[TemporalGraph]:
    """Sliding windows of `width` snapshots advancing by `stride`.

    Each window is re-indexed to timestamps 1..width. Trailing snapshots
    that do not fill a window are dropped.
    """
    if width < 1 or width > tg.T:
        raise ValidationError(f"window width must be in 1..{tg.T}, got {width}")
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    out: list[TemporalGraph] = []
    start = 0
    while start + width <= tg.T:
        chunk = tg.snapshots[start : start + width]
        rebased = tuple(
            Snapshot(timestamp=i, nodes=g.nodes, edges=g.edges, weights=dict(g.weights))
            for i, g in enumerate(chunk, start=1)
        )
        out.append(TemporalGraph(rebased))
        start += stride
    return out


@dataclass(frozen=True)
class EdgeListSchema:
    """Column names for temporal edge-list CSV files.

    `weight` may be None for unweighted data; a named weight column that is
    missing from the header is an error, while the default name is treated
    as optional.
    """

    time: str = "time"
    source: str = "source"
    target: str = "target"
    weight: str | None = "weight"
    weight_required: bool = False


def parse_temporal_edge_list(stream, schema: EdgeListSchema | None = None) -> TemporalGraph:
    """Parse a CSV edge-list stream into a TemporalGraph.

    Expects a header row; lines starting with '#' are comments. Distinct raw
    times are re-indexed to 1..T in ascending numeric order. Duplicate
    (time, edge) records aggregate weight by summation; a missing weight
    column defaults each record to 1.0. Errors carry 1-based physical line
    numbers.
    """
    if schema is None:
        schema = EdgeListSchema()
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream.decode() if isinstance(stream, bytes) else stream)

    cols: dict[str, int | None] | None = None
    records: list[tuple[float, NodeId, NodeId, float]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        row = [c.strip() for c in next(csv.reader([line]))]
        if cols is None:
            cols = _column_indices(row, schema)
            continue
        records.append(_parse_record(row, cols, lineno))

    if cols is None or not records:
        raise ValidationError("empty input")

    agg: dict[float, dict[tuple[NodeId, NodeId], float]] = {}
    for t_raw, u, v, w in records:
        per_t = agg.setdefault(t_raw, {})
        k = edge_key(u, v)
        per_t[k] = per_t.get(k, 0.0) + w

    snapshots = []
    for idx, t_raw in enumerate(sorted(agg.keys()), start=1):
        weights = agg[t_raw]
        nodes: set[NodeId] = set()
        for (u, v) in weights:
            nodes.add(u)
            nodes.add(v)
        snapshots.append(
            Snapshot(
                timestamp=idx,
                nodes=frozenset(nodes),
                edges=frozenset(weights.keys()),
                weights=weights,
            )
        )
    return TemporalGraph(tuple(snapshots))


def _column_indices(header: Sequence[str], schema: EdgeListSchema) -> dict[str, int | None]:
    pos = {name: i for i, name in enumerate(header)}
    out: dict[str, int | None] = {}
    for role, name in (("time", schema.time), ("source", schema.source), ("target", schema.target)):
        if name not in pos:
            raise ValidationError(f"missing required column {name!r} in header")
        out[role] = pos[name]
    if schema.weight is None:
        out["weight"] = None
    elif schema.weight in pos:
        out["weight"] = pos[schema.weight]
    elif schema.weight_required:
        raise ValidationError(f"missing weight column {schema.weight!r} in header")
    else:
        out["weight"] = None
    return out


def _parse_record(
    row: Sequence[str],
    cols: dict[str, int | None],
    lineno: int,
) -> tuple[float, NodeId, NodeId, float]:
    needed = max(i for i in cols.values() if i is not None)
    if len(row) <= needed:
        raise IngestionError(f"expected at least {needed + 1} fields, got {len(row)}", lineno)
    try:
        t_raw = float(row[cols["time"]])
    except ValueError:
        raise IngestionError(f"non-numeric time {row[cols['time']]!r}", lineno) from None
    u = row[cols["source"]]
    v = row[cols["target"]]
    if not u or not v:
        raise IngestionError("empty node label", lineno)
    if u == v:
        raise IngestionError(f"self-loop on node {u!r}", lineno)
    if cols["weight"] is None:
        w = 1.0
    else:
        try:
            w = float(row[cols["weight"]])
        except ValueError:
            raise IngestionError(f"non-numeric weight {row[cols['weight']]!r}", lineno) from None
    if w < 0:
        raise ValidationError(f"line {lineno}: negative weight {w}")
    if w == 0:
        raise ValidationError(f"line {lineno}: zero weight (present edges need positive weight)")
    return (t_raw, u, v, w)


def top_active_nodes(tg: TemporalGraph, n: int) -> list[NodeId]:
    """The n nodes with largest total incident weight across snapshots.

    Ties break by label so the selection is deterministic.
    """
    if n < 1:
        raise ValidationError(f"top-node count must be >= 1, got {n}")
    totals: dict[NodeId, float] = {v: 0.0 for v in tg.all_nodes()}
    for g in tg.snapshots:
        for (u, v), w in g.weights.items():
            totals[u] += w
            totals[v] += w
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return [v for v, _ in ranked[:n]]


def restrict_to_nodes(tg: TemporalGraph, keep: Iterable[NodeId]) -> TemporalGraph:
    """Induce every snapshot on `keep`. Timestamps are preserved."""
    kept = frozenset(keep)
    return TemporalGraph(tuple(induced_subgraph(g, kept) for g in tg.snapshots))
