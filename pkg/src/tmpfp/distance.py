"""Distances between diagrams and TMP tensors, plus an empirical stability check.

Diagram distances follow the optimal-matching convention: both diagrams are
augmented with diagonal projections, the ground cost between points is the
sup norm in the (birth, death) plane, and the cost of parking a point on the
diagonal is half its persistence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import ContractViolation
from .graph_model import TemporalGraph
from .pipeline import PipelineConfig, fingerprint
from .vectorization import TMPTensor, VectorKind
from .zigzag import ZigzagDiagram


def _as_pairs(pd: ZigzagDiagram | np.ndarray | Sequence) -> np.ndarray:
    if isinstance(pd, ZigzagDiagram):
        return pd.real_pairs()
    pairs = np.asarray(pd, dtype=float)
    if pairs.size == 0:
        return np.zeros((0, 2))
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ContractViolation(f"diagram must be an (n, 2) array, got shape {pairs.shape}")
    if np.any(pairs[:, 0] > pairs[:, 1]):
        raise ContractViolation("diagram has a point with birth > death")
    return pairs


def _cross_costs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    return np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)


def _diag_costs(a: np.ndarray) -> np.ndarray:
    return (a[:, 1] - a[:, 0]) / 2


def _matching_feasible(cross: np.ndarray, da: np.ndarray, db: np.ndarray, c: float) -> bool:
    n, m = cross.shape
    size = n + m
    adj = np.zeros((size, size), dtype=bool)
    adj[:n, :m] = cross <= c
    if n:
        adj[:n, m:] = (da <= c)[:, None]
    if m:
        adj[n:, :m] = (db <= c)[None, :]
    adj[n:, m:] = True
    match = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool(np.all(match >= 0))


def _bottleneck(cross: np.ndarray, da: np.ndarray, db: np.ndarray) -> float:
    candidates = np.unique(np.concatenate([cross.ravel(), da, db, [0.0]]))
    lo, hi = 0, len(candidates) - 1
    # the largest candidate always admits a full matching (everything fits)
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_feasible(cross, da, db, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def wasserstein(pd1, pd2, p: float = math.inf) -> float:
    """Optimal-matching distance with diagonal augmentation; p = inf is bottleneck.

    Finite p is solved exactly as a linear assignment on the augmented cost
    matrix with per-pair costs raised to p; p = inf by a feasibility binary
    search over the sorted candidate costs, since assignment solvers
    minimize sums rather than maxima.
    """
    if p < 1:
        raise ContractViolation(f"order p must be >= 1, got {p}")
    a = _as_pairs(pd1)
    b = _as_pairs(pd2)
    n, m = a.shape[0], b.shape[0]
    if n == 0 and m == 0:
        return 0.0
    cross = _cross_costs(a, b)
    da = _diag_costs(a)
    db = _diag_costs(b)
    if math.isinf(p):
        return _bottleneck(cross, da, db)
    size = n + m
    cost = np.zeros((size, size))
    cost[:n, :m] = cross**p
    if n:
        cost[:n, m:] = np.broadcast_to((da**p)[:, None], (n, n))
    if m:
        cost[n:, :m] = np.broadcast_to((db**p)[None, :], (m, m))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() ** (1 / p))


def wasserstein_bruteforce(pd1, pd2, p: float = math.inf) -> float:
    """Exhaustive minimum over every augmented matching; tiny diagrams only."""
    if p < 1:
        raise ContractViolation(f"order p must be >= 1, got {p}")
    a = _as_pairs(pd1)
    b = _as_pairs(pd2)
    n, m = a.shape[0], b.shape[0]
    if n > 6 or m > 6:
        raise ContractViolation("brute force is limited to diagrams with <= 6 points")
    cross = _cross_costs(a, b)
    da = _diag_costs(a)
    db = _diag_costs(b)
    best = math.inf
    for k in range(min(n, m) + 1):
        for chosen_a in itertools.combinations(range(n), k):
            rest_a = [da[i] for i in range(n) if i not in chosen_a]
            for chosen_b in itertools.permutations(range(m), k):
                costs = [cross[i, j] for i, j in zip(chosen_a, chosen_b)]
                costs += rest_a
                costs += [db[j] for j in range(m) if j not in chosen_b]
                if math.isinf(p):
                    total = max(costs, default=0.0)
                else:
                    total = sum(c**p for c in costs) ** (1 / p)
                best = min(best, total)
    return float(best)


def zpd_matching_distance(
    grid1: Sequence[ZigzagDiagram], grid2: Sequence[ZigzagDiagram], p: float = math.inf
) -> float:
    """Max over corresponding grid cells of the diagram distance."""
    if len(grid1) != len(grid2):
        raise ContractViolation(f"grid sizes differ: {len(grid1)} vs {len(grid2)}")
    return max((wasserstein(d1, d2, p) for d1, d2 in zip(grid1, grid2)), default=0.0)


def tmp_distance(t1: TMPTensor, t2: TMPTensor, slice_metric: str | None = None) -> float:
    """Max over filtration slices of a per-slice metric between tensors.

    Default metric is the sup norm for curve-like kinds and L2 for images.
    """
    if t1.kind is not t2.kind:
        raise ContractViolation(f"kind mismatch: {t1.kind.value} vs {t2.kind.value}")
    if t1.shape != t2.shape:
        raise ContractViolation(f"shape mismatch: {t1.shape} vs {t2.shape}")
    if slice_metric is None:
        slice_metric = "l2" if t1.kind is VectorKind.IMAGE else "sup"
    if slice_metric not in ("sup", "l2"):
        raise ContractViolation(f"slice metric must be 'sup' or 'l2', got {slice_metric!r}")
    best = 0.0
    for j in range(t1.shape[0]):
        diff = t1.data[j] - t2.data[j]
        value = float(np.abs(diff).max()) if slice_metric == "sup" else float(
            np.linalg.norm(diff.ravel())
        )
        best = max(best, value)
    return best


class StabilityPair(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


@dataclass(frozen=True)
class StabilityReport:
    """Empirical record of lhs <= C * rhs over base/perturbation pairs."""

    kind: VectorKind
    C: float
    p: float
    slice_metric: str
    pairs: tuple[StabilityPair, ...]
    violations: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def max_ratio(self) -> float:
        finite = [q.ratio for q in self.pairs if math.isfinite(q.ratio)]
        return max(finite, default=0.0)


def stability_check(
    base: TemporalGraph,
    perturbations: Sequence[TemporalGraph],
    config: PipelineConfig,
    C: float = 1.0,
    p: float = math.inf,
    slice_metric: str | None = None,
    tolerance: float = 1e-9,
) -> StabilityReport:
    """Fingerprint base and perturbations, compare tensor vs diagram distances.

    lhs is the tensor distance, rhs the per-cell diagram matching distance;
    a pair violates when lhs > C * rhs + tolerance (rhs = 0 demands lhs
    within tolerance).
    """
    if config.vector_kind is VectorKind.BETTI_FAST:
        raise ContractViolation("stability check needs a diagram-based vectorization")
    if slice_metric is None:
        slice_metric = "l2" if config.vector_kind is VectorKind.IMAGE else "sup"
    base_res = fingerprint(base, config)
    pairs: list[StabilityPair] = []
    violations: list[int] = []
    for idx, pert in enumerate(perturbations):
        pert_res = fingerprint(pert, config)
        lhs = max(
            tmp_distance(base_res.tensors[k], pert_res.tensors[k], slice_metric)
            for k in config.homology_dims
        )
        rhs = max(
            zpd_matching_distance(base_res.diagrams[k], pert_res.diagrams[k], p)
            for k in config.homology_dims
        )
        if rhs > 0:
            ratio = lhs / rhs
        else:
            ratio = 0.0 if lhs <= tolerance else math.inf
        pairs.append(StabilityPair(lhs, rhs, ratio))
        if lhs > C * rhs + tolerance:
            violations.append(idx)
    return StabilityReport(
        kind=config.vector_kind,
        C=C,
        p=p,
        slice_metric=slice_metric,
        pairs=tuple(pairs),
        violations=tuple(violations),
    )
