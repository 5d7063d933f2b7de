"""Fixed-size vector summaries of zigzag diagrams and TMP tensor assembly.

Every vectorization reads intervals as real (birth, death) times on the
half-integer time axis; right-open intervals already close at the final
time. A diagram passed here is expected to hold a single homology
dimension (the pipeline restricts before vectorizing).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import ContractViolation, ValidationError
from .filtration import SimplicialComplex
from .zigzag import ZigzagDiagram, homology_dimension_oracle


class VectorKind(str, Enum):
    LANDSCAPE = "landscape"
    SILHOUETTE = "silhouette"
    BETTI = "betti"
    BETTI_FAST = "betti-fast"
    ENTROPY = "entropy"
    IMAGE = "image"


_AXES: dict[VectorKind, tuple[str, ...]] = {
    VectorKind.LANDSCAPE: ("filtration", "grid"),
    VectorKind.SILHOUETTE: ("filtration", "grid"),
    VectorKind.BETTI: ("filtration", "zigzag-index"),
    VectorKind.BETTI_FAST: ("filtration", "snapshot"),
    VectorKind.ENTROPY: ("filtration", "grid"),
    VectorKind.IMAGE: ("filtration", "persistence", "birth"),
}


@dataclass(frozen=True)
class EvaluationGrid:
    """Strictly increasing evaluation points for curve vectorizations."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValidationError("grid must be a nonempty 1-d array")
        if not np.all(np.diff(pts) > 0):
            raise ValidationError("grid points must be strictly increasing")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return int(self.points.size)

    @classmethod
    def with_midpoints(cls, values: Sequence[float]) -> "EvaluationGrid":
        """Interleave q threshold values with their midpoints: size 2q-1."""
        vals = np.asarray(values, dtype=float)
        if vals.size < 1:
            raise ValidationError("need at least one threshold")
        mids = (vals[:-1] + vals[1:]) / 2
        out = np.empty(2 * vals.size - 1)
        out[0::2] = vals
        out[1::2] = mids
        return cls(out)

    @classmethod
    def time_axis(cls, T: int) -> "EvaluationGrid":
        """Default grid for T snapshots: {1, 1.25, ..., T}, size 4T-3."""
        if T < 1:
            raise ContractViolation(f"T must be >= 1, got {T}")
        if T == 1:
            return cls(np.array([1.0]))
        return cls.with_midpoints(np.linspace(1.0, float(T), 2 * T - 1))


@dataclass(frozen=True)
class TMPTensor:
    """Stack of per-filtration-slice vectorizations: axis 0 is the slice."""

    data: np.ndarray
    kind: VectorKind
    axes: tuple[str, ...]
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != len(self.axes):
            raise ValidationError(f"rank {data.ndim} does not match axes {self.axes}")
        if not np.all(np.isfinite(data)):
            raise ValidationError("tensor entries must be finite")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def m(self) -> int:
        return int(self.data.shape[0])


def _tents(pairs: np.ndarray, grid: EvaluationGrid) -> np.ndarray:
    """(n, g) matrix of tent functions: rise from (b,0) to apex, fall to (d,0)."""
    if pairs.shape[0] == 0:
        return np.zeros((0, grid.size))
    t = grid.points[None, :]
    b = pairs[:, 0:1]
    d = pairs[:, 1:2]
    return np.clip(np.minimum(t - b, d - t), 0.0, None)


def landscape_vector(pd: ZigzagDiagram, grid: EvaluationGrid, level: int = 1) -> np.ndarray:
    """Level-th largest tent value at each grid point; level 1 is the max."""
    if level < 1:
        raise ContractViolation(f"level must be >= 1, got {level}")
    tents = _tents(pd.real_pairs(), grid)
    if tents.shape[0] < level:
        return np.zeros(grid.size)
    return np.sort(tents, axis=0)[-level]


def silhouette_vector(pd: ZigzagDiagram, grid: EvaluationGrid, p: float = 1.0) -> np.ndarray:
    """Weighted average of tents with weights (d - b)^p; zero weights -> zeros."""
    if p < 0:
        raise ContractViolation(f"power must be >= 0, got {p}")
    pairs = pd.real_pairs()
    tents = _tents(pairs, grid)
    if pairs.shape[0] == 0:
        return np.zeros(grid.size)
    weights = (pairs[:, 1] - pairs[:, 0]) ** p
    total = weights.sum()
    if total == 0:
        return np.zeros(grid.size)
    return weights @ tents / total


def betti_vector_zigzag(pd: ZigzagDiagram, T: int) -> np.ndarray:
    """Interval counts at every encoded position 1..2T-1."""
    if pd.length != 2 * T - 1:
        raise ContractViolation(f"diagram indexed over 1..{pd.length}, expected 1..{2 * T - 1}")
    out = np.zeros(2 * T - 1)
    for point in pd.points:
        out[point.birth - 1 : point.death] += 1
    return out


def betti_vector_fast(complexes_at_t: Sequence[SimplicialComplex], k: int) -> np.ndarray:
    """Per-snapshot dim H_k, skipping unions and the zigzag run entirely."""
    return np.array([homology_dimension_oracle(c, k) for c in complexes_at_t], dtype=float)


def entropy_vector(pd: ZigzagDiagram, grid: EvaluationGrid) -> np.ndarray:
    """Life entropy of the bars alive at each grid point, natural log."""
    pairs = pd.real_pairs()
    out = np.zeros(grid.size)
    if pairs.shape[0] == 0:
        return out
    lengths = pairs[:, 1] - pairs[:, 0]
    for i, t in enumerate(grid.points):
        alive = (pairs[:, 0] <= t) & (t <= pairs[:, 1])
        if alive.sum() <= 1:
            continue
        live_lengths = lengths[alive]
        total = live_lengths.sum()
        if total == 0:
            continue
        ratios = live_lengths[live_lengths > 0] / total
        out[i] = -np.sum(ratios * np.log(ratios))
    return out


def persistence_image(
    pd: ZigzagDiagram,
    rows: int = 50,
    cols: int = 50,
    sigma: float | None = None,
    weight_fn: Callable[[float, float], float] | None = None,
    bounds: tuple[float, float, float, float] | None = None,
) -> np.ndarray:
    """Gaussian-smoothed (birth, persistence) density on a rows x cols raster.

    Row index follows the persistence axis, column index the birth axis,
    both increasing. Each point spreads an isotropic Gaussian whose mass
    inside every pixel rectangle is integrated exactly via the Gaussian
    cumulative function. bounds = (birth_min, birth_max, pers_min, pers_max)
    should be shared across slices so pixels align; default derives them
    from this diagram alone. Default sigma is one birth-axis pixel width;
    default weight is persistence clamped at zero.
    """
    if rows < 1 or cols < 1:
        raise ContractViolation(f"image needs rows, cols >= 1, got {rows}x{cols}")
    if sigma is not None and sigma <= 0:
        raise ContractViolation(f"sigma must be > 0, got {sigma}")
    pairs = pd.real_pairs()
    births = pairs[:, 0]
    pers = pairs[:, 1] - pairs[:, 0]
    if bounds is None:
        if pairs.shape[0] == 0:
            bounds = (0.0, 1.0, 0.0, 1.0)
        else:
            bounds = (births.min(), births.max(), pers.min(), pers.max())
    b_lo, b_hi, p_lo, p_hi = (float(x) for x in bounds)
    if b_hi <= b_lo:
        b_lo, b_hi = b_lo - 0.5, b_lo + 0.5
    if p_hi <= p_lo:
        p_lo, p_hi = p_lo - 0.5, p_lo + 0.5
    if sigma is None:
        sigma = (b_hi - b_lo) / cols

    image = np.zeros((rows, cols))
    if pairs.shape[0] == 0:
        return image
    b_edges = np.linspace(b_lo, b_hi, cols + 1)
    p_edges = np.linspace(p_lo, p_hi, rows + 1)
    for b, q in zip(births, pers):
        w = max(q, 0.0) if weight_fn is None else weight_fn(b, b + q)
        if w == 0:
            continue
        col_mass = np.diff(ndtr((b_edges - b) / sigma))
        row_mass = np.diff(ndtr((p_edges - q) / sigma))
        image += w * np.outer(row_mass, col_mass)
    return image


def assemble_tmp(
    per_slice_vectors: Sequence[np.ndarray],
    kind: VectorKind | str,
    provenance: Mapping[str, object] | None = None,
) -> TMPTensor:
    """Stack per-slice vectors along a new leading filtration axis."""
    kind = VectorKind(kind)
    if len(per_slice_vectors) == 0:
        raise ContractViolation("need at least one slice to assemble")
    arrays = [np.asarray(v, dtype=float) for v in per_slice_vectors]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ContractViolation(f"slice shapes differ: {sorted(shapes)}")
    expected_rank = len(_AXES[kind]) - 1
    if arrays[0].ndim != expected_rank:
        raise ContractViolation(
            f"{kind.value} slices must have rank {expected_rank}, got {arrays[0].ndim}"
        )
    return TMPTensor(
        data=np.stack(arrays, axis=0),
        kind=kind,
        axes=_AXES[kind],
        provenance=dict(provenance or {}),
    )
