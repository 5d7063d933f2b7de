"""Command-line entry points, bit-exact file formats, and plot emission.

Tensor files are a fixed binary layout: magic "TMPT", little-endian u32
format version, u8 rank, rank u32 extents, row-major f64 payload, then a
u32-length-prefixed canonical JSON metadata block. Everything written here
is deterministic for a fixed input and config: no timestamps, sorted JSON
keys, shortest-round-trip float text.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import struct
import sys
from dataclasses import replace
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import click
import numpy as np

from .bench import BenchConfig, run_bench
from .distance import tmp_distance
from .errors import ComputationError, ContractViolation, ValidationError
from .filtration import FilterKind
from .graph_model import (
    EdgeListSchema,
    TemporalGraph,
    parse_temporal_edge_list,
    restrict_to_nodes,
    top_active_nodes,
)
from .pipeline import FingerprintResult, PipelineConfig, fingerprint_windows
from .vectorization import TMPTensor, VectorKind

MAGIC = b"TMPT"
FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# canonical JSON and the tensor binary format


def _jsonify(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    raise ValidationError(f"metadata value not serializable: {value!r}")


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, no timestamps."""
    return json.dumps(_jsonify(obj), sort_keys=True, separators=(",", ":"))


def write_tensor(path, tensor: TMPTensor) -> None:
    meta = {
        "kind": tensor.kind.value,
        "axes": list(tensor.axes),
        "provenance": tensor.provenance,
    }
    blob = canonical_json(meta).encode("utf-8")
    payload = np.ascontiguousarray(tensor.data, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<B", tensor.data.ndim))
        for extent in tensor.data.shape:
            fh.write(struct.pack("<I", extent))
        fh.write(payload)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)


def read_tensor(path) -> TMPTensor:
    raw = Path(path).read_bytes()
    cursor = 0

    def take(n: int) -> bytes:
        nonlocal cursor
        if cursor + n > len(raw):
            raise ValidationError(f"{path}: truncated tensor file")
        chunk = raw[cursor : cursor + n]
        cursor += n
        return chunk

    if take(4) != MAGIC:
        raise ValidationError(f"{path}: not a tensor file (bad magic)")
    version = struct.unpack("<I", take(4))[0]
    if version != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported format version {version}")
    rank = struct.unpack("<B", take(1))[0]
    extents = tuple(struct.unpack("<I", take(4))[0] for _ in range(rank))
    count = 1
    for e in extents:
        count *= e
    data = np.frombuffer(take(8 * count), dtype="<f8").reshape(extents)
    meta_len = struct.unpack("<I", take(4))[0]
    try:
        meta = json.loads(take(meta_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"{path}: bad metadata block: {exc}") from exc
    if cursor != len(raw):
        raise ValidationError(f"{path}: {len(raw) - cursor} trailing bytes")
    try:
        kind = VectorKind(meta["kind"])
        axes = tuple(str(a) for a in meta["axes"])
        provenance = meta.get("provenance", {})
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"{path}: bad metadata content: {exc}") from exc
    return TMPTensor(data=data, kind=kind, axes=axes, provenance=provenance)


# ---------------------------------------------------------------------------
# edge-list serialization (inverse of parse_temporal_edge_list)


def render_temporal_edge_list(tg: TemporalGraph) -> str:
    """Serialize a temporal graph back to edge-list CSV text.

    Parsing the output reproduces the graph exactly. Edge lists can only
    express nodes through incident edges, so snapshots with isolated nodes
    (or no edges at all) are rejected rather than silently altered.
    """
    for g in tg.snapshots:
        if not g.edges:
            raise ValidationError(
                f"t={g.timestamp}: snapshot without edges cannot be written as an edge list"
            )
        covered = {v for e in g.edges for v in e}
        isolated = sorted(g.nodes - covered)
        if isolated:
            raise ValidationError(
                f"t={g.timestamp}: isolated nodes {isolated} cannot be written as an edge list"
            )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time", "source", "target", "weight"])
    for t in range(1, tg.T + 1):
        g = tg.snapshot(t)
        for u, v in g.sorted_edges():
            writer.writerow([t, u, v, repr(g.weights[(u, v)])])
    return buf.getvalue()


def write_temporal_edge_list(path, tg: TemporalGraph) -> None:
    Path(path).write_text(render_temporal_edge_list(tg), encoding="utf-8")


# ---------------------------------------------------------------------------
# diagram dump (CSV of intervals in real time, 0.25 multiples as x.xx)


def diagram_rows(results: Sequence[FingerprintResult]) -> list[tuple[int, int, int, float, float, int]]:
    rows = []
    for res in results:
        if not res.diagrams:
            raise ValidationError("the fast Betti route produces no diagrams to dump")
        for k in sorted(res.diagrams):
            for j, diagram in enumerate(res.diagrams[k], start=1):
                for point in diagram.points:
                    rows.append(
                        (
                            res.window_index,
                            j,
                            k,
                            (point.birth + 1) / 2,
                            (point.death + 1) / 2,
                            int(point.right_open),
                        )
                    )
    rows.sort()
    return rows


def render_diagram_dump(results: Sequence[FingerprintResult]) -> str:
    lines = ["window,slice,dim,birth,death,right_open"]
    for window, j, k, birth, death, open_flag in diagram_rows(results):
        lines.append(f"{window},{j},{k},{birth:.2f},{death:.2f},{open_flag}")
    return "\n".join(lines) + "\n"


def read_diagram_dump(path) -> list[dict]:
    """Parse a diagram dump independently of the tensor format."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "window,slice,dim,birth,death,right_open":
        raise ValidationError(f"{path}: not a diagram dump (bad header)")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise ValidationError(f"{path}: line {lineno}: expected 6 fields")
        try:
            out.append(
                {
                    "window": int(parts[0]),
                    "slice": int(parts[1]),
                    "dim": int(parts[2]),
                    "birth": float(parts[3]),
                    "death": float(parts[4]),
                    "right_open": bool(int(parts[5])),
                }
            )
        except ValueError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# plot emission: CSV mirrors entries exactly, SVG is a self-contained drawing


def tensor_to_csv(tensor: TMPTensor) -> str:
    header = f"# kind={tensor.kind.value}; shape={tensor.shape}; axes={','.join(tensor.axes)}"
    flat = tensor.data.reshape(tensor.shape[0], -1)
    lines = [header]
    for row in flat:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _svg_open(width: float, height: float, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _step_plot(matrix: np.ndarray, title: str) -> str:
    width, height, margin = 640.0, 360.0, 40.0
    rows, cols = matrix.shape
    vmin, vmax = float(matrix.min()), float(matrix.max())
    span = vmax - vmin

    def x_at(i: int) -> float:
        if cols == 1:
            return width / 2
        return margin + i * (width - 2 * margin) / (cols - 1)

    def y_at(v: float) -> float:
        norm = 0.5 if span == 0 else (v - vmin) / span
        return height - margin - norm * (height - 2 * margin)

    body = _svg_open(width, height, title)
    body.append(
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="#cccccc"/>'
    )
    for r in range(rows):
        color = _PALETTE[r % len(_PALETTE)]
        d = [f"M {x_at(0):.2f} {y_at(matrix[r, 0]):.2f}"]
        for i in range(1, cols):
            d.append(f"H {x_at(i):.2f}")
            d.append(f"V {y_at(matrix[r, i]):.2f}")
        body.append(f'<path d="{" ".join(d)}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    body.append("</svg>")
    return "".join(body) + "\n"


def _heatmap_cells(matrix: np.ndarray, x0: float, y0: float, w: float, h: float,
                   vmin: float, vmax: float) -> list[str]:
    rows, cols = matrix.shape
    cw, ch = w / cols, h / rows
    span = vmax - vmin
    out = []
    for r in range(rows):
        for c in range(cols):
            norm = 0.5 if span == 0 else (float(matrix[r, c]) - vmin) / span
            gray = int(round(255 - 255 * norm))
            out.append(
                f'<rect x="{x0 + c * cw:.2f}" y="{y0 + r * ch:.2f}" width="{cw:.2f}" '
                f'height="{ch:.2f}" fill="rgb({gray},{gray},{gray})"/>'
            )
    return out


def _heatmap_plot(matrix: np.ndarray, title: str) -> str:
    width, height, margin = 640.0, 360.0, 40.0
    body = _svg_open(width, height, title)
    body.extend(
        _heatmap_cells(
            matrix,
            margin,
            margin,
            width - 2 * margin,
            height - 2 * margin,
            float(matrix.min()),
            float(matrix.max()),
        )
    )
    body.append("</svg>")
    return "".join(body) + "\n"


def _image_stack_plot(data: np.ndarray, title: str) -> str:
    slices, rows, cols = data.shape
    panel_h, margin, gap = 160.0, 40.0, 12.0
    width = 640.0
    height = margin * 2 + slices * panel_h + (slices - 1) * gap
    vmin, vmax = float(data.min()), float(data.max())
    body = _svg_open(width, height, title)
    for s in range(slices):
        y0 = margin + s * (panel_h + gap)
        body.extend(_heatmap_cells(data[s], margin, y0, width - 2 * margin, panel_h, vmin, vmax))
    body.append("</svg>")
    return "".join(body) + "\n"


def tensor_to_svg(tensor: TMPTensor) -> str:
    title = f"{tensor.kind.value} tensor, shape {tensor.shape}"
    if tensor.data.ndim == 3:
        return _image_stack_plot(tensor.data, title)
    if tensor.kind in (VectorKind.BETTI, VectorKind.BETTI_FAST):
        return _step_plot(tensor.data, title)
    return _heatmap_plot(tensor.data, title)


def diagram_dump_to_svg(records: Sequence[Mapping]) -> str:
    """Barcode rendering: one horizontal segment per interval, colored by dim."""
    width, height_per_bar, margin = 640.0, 6.0, 40.0
    n = len(records)
    height = 2 * margin + max(n, 1) * height_per_bar
    lo = min((r["birth"] for r in records), default=0.0)
    hi = max((r["death"] for r in records), default=1.0)
    span = hi - lo or 1.0

    def x_at(t: float) -> float:
        return margin + (t - lo) / span * (width - 2 * margin)

    body = _svg_open(width, height, f"{n} intervals")
    ordered = sorted(records, key=lambda r: (r["dim"], r["birth"], r["death"]))
    for i, rec in enumerate(ordered):
        y = margin + (i + 0.5) * height_per_bar
        color = _PALETTE[rec["dim"] % len(_PALETTE)]
        body.append(
            f'<line x1="{x_at(rec["birth"]):.2f}" y1="{y:.2f}" x2="{x_at(rec["death"]):.2f}" '
            f'y2="{y:.2f}" stroke="{color}" stroke-width="3"/>'
        )
    body.append("</svg>")
    return "".join(body) + "\n"


# ---------------------------------------------------------------------------
# CLI


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationError, ContractViolation) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except ComputationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _schema_options(fn):
    fn = click.option("--time-col", default="time", show_default=True, help="time column name")(fn)
    fn = click.option("--source-col", default="source", show_default=True)(fn)
    fn = click.option("--target-col", default="target", show_default=True)(fn)
    fn = click.option("--weight-col", default="weight", show_default=True)(fn)
    fn = click.option("--require-weights", is_flag=True, help="fail when weights are absent")(fn)
    fn = click.option("--top-nodes", type=int, default=None,
                      help="keep only the N nodes with largest total incident weight")(fn)
    return fn


def _load_graph(path, time_col, source_col, target_col, weight_col, require_weights,
                top_nodes=None) -> TemporalGraph:
    schema = EdgeListSchema(
        time=time_col,
        source=source_col,
        target=target_col,
        weight=weight_col or None,
        weight_required=require_weights,
    )
    with open(path, "r", encoding="utf-8") as fh:
        tg = parse_temporal_edge_list(fh, schema)
    if top_nodes is not None:
        tg = restrict_to_nodes(tg, top_active_nodes(tg, top_nodes))
    return tg


_CONFIG_FLAGS = (
    "filter_kind",
    "orientation",
    "resolution",
    "maxdim",
    "homology_dims",
    "vector_kind",
    "level",
    "power",
    "image_rows",
    "image_cols",
    "sigma",
    "window_width",
    "window_stride",
    "union_mode",
)


def _build_config(config_path, **overrides) -> PipelineConfig:
    base: dict = {}
    if config_path is not None:
        try:
            base = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{config_path}: bad JSON: {exc}") from exc
        if not isinstance(base, dict):
            raise ValidationError(f"{config_path}: config must be a JSON object")
    for key in _CONFIG_FLAGS:
        value = overrides.get(key)
        if value is not None:
            base[key] = value
    if isinstance(base.get("homology_dims"), str):
        try:
            base["homology_dims"] = [int(x) for x in base["homology_dims"].split(",") if x.strip()]
        except ValueError as exc:
            raise ValidationError(f"bad homology dims: {exc}") from exc
    return PipelineConfig.from_dict(base)


def _config_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      help="JSON config file; flags override its values")(fn)
    fn = click.option("--filter", "filter_kind",
                      type=click.Choice([k.value for k in FilterKind]))(fn)
    fn = click.option("--orientation", type=click.Choice(["sublevel", "superlevel"]))(fn)
    fn = click.option("--resolution", type=int, help="number of filtration thresholds m")(fn)
    fn = click.option("--maxdim", type=int, help="clique complex depth D")(fn)
    fn = click.option("--dims", "homology_dims", type=str, help="comma-separated homology dims")(fn)
    fn = click.option("--vector", "vector_kind",
                      type=click.Choice([k.value for k in VectorKind]))(fn)
    fn = click.option("--level", type=int, help="landscape level")(fn)
    fn = click.option("--power", type=float, help="silhouette weight power")(fn)
    fn = click.option("--image-rows", type=int)(fn)
    fn = click.option("--image-cols", type=int)(fn)
    fn = click.option("--sigma", type=float, help="persistence image bandwidth")(fn)
    fn = click.option("--window-width", type=int)(fn)
    fn = click.option("--window-stride", type=int)(fn)
    fn = click.option("--union-mode", type=click.Choice(["union-graph", "simplex-union"]))(fn)
    return fn


@click.group()
def main():
    """Temporal multipersistence fingerprints for time-dependent graphs."""


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_schema_options
@_guard
def ingest(path, time_col, source_col, target_col, weight_col, require_weights, top_nodes):
    """Parse a temporal edge list and print a dataset summary."""
    tg = _load_graph(path, time_col, source_col, target_col, weight_col, require_weights,
                     top_nodes)
    names = ",".join(sorted(tg.all_nodes()))
    click.echo(f"T={tg.T}, nodes={{{names}}}")
    for t in range(1, tg.T + 1):
        g = tg.snapshot(t)
        line = f"t={t}: nodes={len(g.nodes)}, edges={len(g.edges)}"
        if g.edges:
            weights = sorted(g.weights.values())
            mean = sum(weights) / len(weights)
            line += f", weight min/mean/max={weights[0]:g}/{mean:g}/{weights[-1]:g}"
        click.echo(line)


@main.command(name="fingerprint")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@_schema_options
@_config_options
@click.option("--out", "out_prefix", required=True, type=click.Path(),
              help="output path prefix; files get _w<window>_dim<k>.tmpt suffixes")
@_guard
def cmd_fingerprint(input_path, time_col, source_col, target_col, weight_col, require_weights,
                    top_nodes, config_path, out_prefix, **flags):
    """Compute TMP tensors and write one file per window and dimension."""
    config = _build_config(config_path, **flags)
    tg = _load_graph(input_path, time_col, source_col, target_col, weight_col, require_weights,
                     top_nodes)
    results = fingerprint_windows(tg, config)
    for res in results:
        for k in sorted(res.tensors):
            tensor = res.tensors[k]
            path = f"{out_prefix}_w{res.window_index}_dim{k}.tmpt"
            write_tensor(path, tensor)
            sidecar = {
                "shape": list(tensor.shape),
                "kind": tensor.kind.value,
                "axes": list(tensor.axes),
                "provenance": tensor.provenance,
                "window": res.window_index,
                "config": config.to_dict(),
            }
            Path(path + ".meta.json").write_text(canonical_json(sidecar) + "\n", encoding="utf-8")
            click.echo(f"wrote {path} shape={tensor.shape}")


@main.command(name="pd")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@_schema_options
@_config_options
@click.option("--out", "out_path", type=click.Path(), help="write the dump here (default stdout)")
@_guard
def cmd_pd(input_path, time_col, source_col, target_col, weight_col, require_weights,
           top_nodes, config_path, out_path, **flags):
    """Dump zigzag persistence intervals as CSV records."""
    config = _build_config(config_path, **flags)
    if config.vector_kind is VectorKind.BETTI_FAST:
        # diagrams do not depend on the vectorization; pick any diagram route
        config = replace(config, vector_kind=VectorKind.LANDSCAPE)
    tg = _load_graph(input_path, time_col, source_col, target_col, weight_col, require_weights,
                     top_nodes)
    text = render_diagram_dump(fingerprint_windows(tg, config))
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")


@main.command(name="distance")
@click.argument("file_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("file_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", type=click.Choice(["auto", "sup", "l2"]), default="auto",
              show_default=True)
@_guard
def cmd_distance(file_a, file_b, metric):
    """Distance between two tensor files, printed at full precision."""
    t1 = read_tensor(file_a)
    t2 = read_tensor(file_b)
    value = tmp_distance(t1, t2, None if metric == "auto" else metric)
    click.echo(repr(value))


@main.command(name="plot")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_prefix", required=True, type=click.Path(),
              help="output prefix; writes <prefix>.csv and <prefix>.svg")
@_guard
def cmd_plot(file, out_prefix):
    """Render a tensor or diagram file to CSV and SVG."""
    with open(file, "rb") as fh:
        is_tensor = fh.read(4) == MAGIC
    if is_tensor:
        tensor = read_tensor(file)
        csv_text = tensor_to_csv(tensor)
        svg_text = tensor_to_svg(tensor)
    else:
        records = read_diagram_dump(file)
        csv_text = Path(file).read_text(encoding="utf-8")
        svg_text = diagram_dump_to_svg(records)
    Path(out_prefix + ".csv").write_text(csv_text, encoding="utf-8")
    Path(out_prefix + ".svg").write_text(svg_text, encoding="utf-8")
    click.echo(f"wrote {out_prefix}.csv and {out_prefix}.svg")


@main.command(name="bench")
@click.option("--nodes", "n_nodes", type=int, default=100, show_default=True)
@click.option("--snapshots", "T", type=int, default=50, show_default=True)
@click.option("--resolution", type=int, default=20, show_default=True)
@click.option("--churn", type=float, default=0.3, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--density", type=float, default=0.05, show_default=True)
@click.option("--out", "out_path", type=click.Path(), help="write the CSV here (default stdout)")
@_guard
def cmd_bench(n_nodes, T, resolution, churn, seed, density, out_path):
    """Time the shared-grid pipeline against naive per-cell recomputation."""
    result = run_bench(
        BenchConfig(
            n_nodes=n_nodes,
            T=T,
            resolution=resolution,
            churn=churn,
            seed=seed,
            density=density,
        )
    )
    header = "n_nodes,T,resolution,churn,seed,density,filter,time_naive_s,time_tmp_s,speedup,outputs_equal"
    cfg = result.config
    row = (
        f"{cfg.n_nodes},{cfg.T},{cfg.resolution},{cfg.churn},{cfg.seed},{cfg.density},"
        f"{cfg.filter_kind.value},{result.time_naive!r},{result.time_tmp!r},"
        f"{result.speedup!r},{result.outputs_equal}"
    )
    text = header + "\n" + row + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
