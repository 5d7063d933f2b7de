"""Shared builders for deterministic randomized test instances."""

import numpy as np

from tmpfp import Snapshot, TemporalGraph, clique_complex
from tmpfp.zigzag import ZigzagDiagram, ZigzagPoint

LABELS = "abcdefghij"


def snap(t, edges=(), nodes=()):
    """Snapshot from (u, v, weight) triples plus extra isolated nodes."""
    return Snapshot.build(t, edges, extra_nodes=nodes)


def tgraph(*edge_lists, nodes=()):
    """TemporalGraph from per-step lists of (u, v, weight) triples."""
    return TemporalGraph(
        tuple(snap(t, edges, nodes) for t, edges in enumerate(edge_lists, start=1))
    )


def random_temporal_graph(rng, max_nodes=8, max_T=5):
    """Node-churning random temporal graph; snapshots may be empty."""
    n = int(rng.integers(2, max_nodes + 1))
    T = int(rng.integers(1, max_T + 1))
    labels = list(LABELS[:n])
    snaps = []
    for t in range(1, T + 1):
        keep = [v for v in labels if rng.random() < 0.8]
        p = float(rng.random()) * 0.9
        edges = []
        for i in range(len(keep)):
            for j in range(i + 1, len(keep)):
                if rng.random() < p:
                    edges.append((keep[i], keep[j], float(rng.uniform(0.5, 2.0))))
        snaps.append(snap(t, edges, nodes=keep))
    return TemporalGraph(tuple(snaps))


def complexes_of(tg, maxdim=2):
    return [clique_complex(g, maxdim) for g in tg.snapshots]


class PairDiagram:
    """Minimal diagram stand-in: a fixed bag of real (birth, death) pairs."""

    def __init__(self, pairs):
        arr = np.asarray(pairs, dtype=float)
        self._pairs = arr.reshape(-1, 2) if arr.size else np.zeros((0, 2))

    def real_pairs(self, k=None):
        return self._pairs


def random_zigzag_diagram(rng, T=4, max_points=6, dim=0, maxdim=2):
    """Random diagram over encoded positions 1..2T-1 in one dimension."""
    length = 2 * T - 1
    pts = []
    for _ in range(int(rng.integers(0, max_points + 1))):
        b = int(rng.integers(1, length + 1))
        d = int(rng.integers(b, length + 1))
        pts.append(ZigzagPoint(b, d, dim, d == length and bool(rng.integers(0, 2))))
    return ZigzagDiagram(points=tuple(pts), length=length, maxdim=maxdim)


def random_pairs(rng, max_points=5, span=5.0):
    """(n, 2) array of random real diagram points with birth <= death."""
    n = int(rng.integers(0, max_points + 1))
    if n == 0:
        return np.zeros((0, 2))
    b = rng.uniform(0.0, span, size=n)
    d = b + rng.uniform(0.0, span, size=n)
    return np.column_stack([b, d])


def perturb_weights(tg, rng, scale=0.25):
    """Scale every edge weight by an independent factor near 1."""
    snaps = []
    for g in tg.snapshots:
        edges = [
            (u, v, g.weights[(u, v)] * float(1.0 + rng.uniform(-scale, scale)))
            for (u, v) in g.sorted_edges()
        ]
        snaps.append(Snapshot.build(g.timestamp, edges, extra_nodes=g.nodes))
    return TemporalGraph(tuple(snaps))


def perturb_one_edge(tg, rng):
    """Insert or delete a single edge in one snapshot; node set unchanged."""
    t = int(rng.integers(1, tg.T + 1))
    g = tg.snapshot(t)
    nodes = sorted(g.nodes)
    present = sorted(g.edges)
    absent = [
        (u, v)
        for i, u in enumerate(nodes)
        for v in nodes[i + 1 :]
        if (u, v) not in g.edges
    ]
    edges = [(u, v, w) for (u, v), w in g.weights.items()]
    if absent and (not present or rng.random() < 0.5):
        u, v = absent[int(rng.integers(0, len(absent)))]
        edges.append((u, v, float(rng.uniform(0.5, 1.5))))
    elif present:
        drop = present[int(rng.integers(0, len(present)))]
        edges = [e for e in edges if (e[0], e[1]) != drop]
    snaps = list(tg.snapshots)
    snaps[t - 1] = Snapshot.build(t, edges, extra_nodes=g.nodes)
    return TemporalGraph(tuple(snaps))
