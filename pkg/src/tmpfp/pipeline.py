"""End-to-end fingerprint computation shared by the CLI, stability harness, and bench.

A run goes temporal graph -> bifiltration grid -> per-slice zigzag diagrams
-> per-dimension TMP tensors. The fast Betti route skips diagrams entirely.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .filtration import (
    FilterKind,
    Orientation,
    SimplicialComplex,
    ThresholdGrid,
    build_bifiltration,
)
from .graph_model import TemporalGraph, window
from .vectorization import (
    EvaluationGrid,
    TMPTensor,
    VectorKind,
    assemble_tmp,
    betti_vector_fast,
    betti_vector_zigzag,
    entropy_vector,
    landscape_vector,
    persistence_image,
    silhouette_vector,
)
from .zigzag import ZigzagDiagram, build_zigzag_sequence, zigzag_diagrams

_UNION_MODES = ("union-graph", "simplex-union")


@dataclass(frozen=True)
class PipelineConfig:
    """Complete description of one fingerprint run; JSON round-trippable."""

    filter_kind: FilterKind = FilterKind.DEGREE
    orientation: Orientation = Orientation.SUBLEVEL
    resolution: int = 50
    maxdim: int = 2
    homology_dims: tuple[int, ...] = (0, 1)
    vector_kind: VectorKind = VectorKind.LANDSCAPE
    level: int = 1
    power: float = 1.0
    image_rows: int = 50
    image_cols: int = 50
    sigma: float | None = None
    window_width: int | None = None
    window_stride: int = 1
    union_mode: str = "union-graph"

    def __post_init__(self):
        object.__setattr__(self, "filter_kind", FilterKind(self.filter_kind))
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        object.__setattr__(self, "vector_kind", VectorKind(self.vector_kind))
        object.__setattr__(self, "homology_dims", tuple(int(k) for k in self.homology_dims))
        if self.resolution < 1:
            raise ValidationError(f"resolution must be >= 1, got {self.resolution}")
        if not 1 <= self.maxdim <= 3:
            raise ValidationError(f"maxdim must be in 1..3, got {self.maxdim}")
        if not self.homology_dims:
            raise ValidationError("at least one homology dimension required")
        for k in self.homology_dims:
            if not 0 <= k <= self.maxdim - 1:
                raise ValidationError(f"homology dim {k} outside 0..{self.maxdim - 1}")
        if len(set(self.homology_dims)) != len(self.homology_dims):
            raise ValidationError("homology dims must be distinct")
        if self.level < 1:
            raise ValidationError(f"landscape level must be >= 1, got {self.level}")
        if self.power < 0:
            raise ValidationError(f"silhouette power must be >= 0, got {self.power}")
        if self.image_rows < 1 or self.image_cols < 1:
            raise ValidationError("image resolution must be >= 1 in both axes")
        if self.sigma is not None and self.sigma <= 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if self.window_width is not None and self.window_width < 1:
            raise ValidationError(f"window width must be >= 1, got {self.window_width}")
        if self.window_stride < 1:
            raise ValidationError(f"window stride must be >= 1, got {self.window_stride}")
        if self.union_mode not in _UNION_MODES:
            raise ValidationError(f"union mode must be one of {_UNION_MODES}")
        if self.filter_kind is FilterKind.POWER_GEODESIC and self.orientation is not Orientation.SUBLEVEL:
            raise ValidationError("geodesic filtration supports sublevel orientation only")

    def to_dict(self) -> dict:
        out: dict = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (FilterKind, Orientation, VectorKind)):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, raw: Mapping) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "homology_dims" in kwargs:
            kwargs["homology_dims"] = tuple(kwargs["homology_dims"])
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad config value: {exc}") from exc


@dataclass(frozen=True)
class FingerprintResult:
    """Tensors and (for zigzag routes) per-slice diagrams of one window."""

    config: PipelineConfig
    window_index: int
    T: int
    thresholds: ThresholdGrid
    tensors: Mapping[int, TMPTensor]
    diagrams: Mapping[int, tuple[ZigzagDiagram, ...]]


def worker_count() -> int:
    raw = os.environ.get("TMPFP_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"TMPFP_WORKERS must be an integer, got {raw!r}")
    if n < 1:
        raise ValidationError(f"TMPFP_WORKERS must be >= 1, got {n}")
    return n


def _row_diagram(args: tuple[tuple[SimplicialComplex, ...], str]) -> ZigzagDiagram:
    row, union_mode = args
    return zigzag_diagrams(build_zigzag_sequence(row, union_mode=union_mode))


def _slice_diagrams(
    rows: Sequence[tuple[SimplicialComplex, ...]], union_mode: str
) -> list[ZigzagDiagram]:
    jobs = [(row, union_mode) for row in rows]
    workers = worker_count()
    if workers == 1 or len(jobs) < 2:
        return [_row_diagram(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_row_diagram, jobs))


def _image_bounds(
    diagrams: Sequence[ZigzagDiagram],
) -> tuple[float, float, float, float]:
    pairs = [d.real_pairs() for d in diagrams if d.points]
    if not pairs:
        return (0.0, 1.0, 0.0, 1.0)
    stacked = np.concatenate(pairs, axis=0)
    births = stacked[:, 0]
    pers = stacked[:, 1] - stacked[:, 0]
    return (float(births.min()), float(births.max()), float(pers.min()), float(pers.max()))


def _provenance(config: PipelineConfig, thresholds: ThresholdGrid, T: int, k: int) -> dict:
    out = {
        "filter": config.filter_kind.value,
        "orientation": config.orientation.value,
        "thresholds": [float(v) for v in thresholds.values],
        "dim": k,
        "vector": config.vector_kind.value,
        "union_mode": config.union_mode,
        "T": T,
    }
    if config.vector_kind is VectorKind.LANDSCAPE:
        out["level"] = config.level
    elif config.vector_kind is VectorKind.SILHOUETTE:
        out["power"] = config.power
    elif config.vector_kind is VectorKind.IMAGE:
        out["image_rows"] = config.image_rows
        out["image_cols"] = config.image_cols
    return out


def fingerprint(tg: TemporalGraph, config: PipelineConfig, window_index: int = 0) -> FingerprintResult:
    """Run the full pipeline on one (already windowed) temporal graph."""
    bifilt = build_bifiltration(
        tg,
        config.filter_kind,
        maxdim=config.maxdim,
        orientation=config.orientation,
        resolution=config.resolution,
    )
    T = tg.T
    rows = [bifilt.slice_row(j) for j in range(1, bifilt.grid.m + 1)]

    if config.vector_kind is VectorKind.BETTI_FAST:
        tensors = {
            k: assemble_tmp(
                [betti_vector_fast(row, k) for row in rows],
                VectorKind.BETTI_FAST,
                _provenance(config, bifilt.grid, T, k),
            )
            for k in config.homology_dims
        }
        return FingerprintResult(config, window_index, T, bifilt.grid, tensors, {})

    full = _slice_diagrams(rows, config.union_mode)
    diagrams = {k: tuple(d.restrict(k) for d in full) for k in config.homology_dims}
    grid = EvaluationGrid.time_axis(T)
    tensors: dict[int, TMPTensor] = {}
    for k in config.homology_dims:
        per_dim = diagrams[k]
        if config.vector_kind is VectorKind.LANDSCAPE:
            vecs = [landscape_vector(d, grid, config.level) for d in per_dim]
        elif config.vector_kind is VectorKind.SILHOUETTE:
            vecs = [silhouette_vector(d, grid, config.power) for d in per_dim]
        elif config.vector_kind is VectorKind.BETTI:
            vecs = [betti_vector_zigzag(d, T) for d in per_dim]
        elif config.vector_kind is VectorKind.ENTROPY:
            vecs = [entropy_vector(d, grid) for d in per_dim]
        else:
            bounds = _image_bounds(per_dim)
            vecs = [
                persistence_image(
                    d,
                    rows=config.image_rows,
                    cols=config.image_cols,
                    sigma=config.sigma,
                    bounds=bounds,
                )
                for d in per_dim
            ]
        tensors[k] = assemble_tmp(vecs, config.vector_kind, _provenance(config, bifilt.grid, T, k))
    return FingerprintResult(config, window_index, T, bifilt.grid, tensors, diagrams)


def fingerprint_windows(tg: TemporalGraph, config: PipelineConfig) -> tuple[FingerprintResult, ...]:
    """Split into sliding windows when configured, then fingerprint each."""
    if config.window_width is None:
        return (fingerprint(tg, config),)
    pieces = window(tg, config.window_width, config.window_stride)
    inner = replace(config, window_width=None, window_stride=1)
    return tuple(fingerprint(piece, inner, window_index=i) for i, piece in enumerate(pieces))
