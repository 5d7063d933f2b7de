"""File formats, plot emission, and the command-line surface."""

import json
import struct
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from click.testing import CliRunner

from tmpfp import (
    PipelineConfig,
    TMPTensor,
    ValidationError,
    VectorKind,
    assemble_tmp,
    canonical_json,
    fingerprint,
    read_diagram_dump,
    read_tensor,
    render_diagram_dump,
    tmp_distance,
    write_tensor,
)
from tmpfp.cli_io import (
    diagram_dump_to_svg,
    diagram_rows,
    main,
    tensor_to_csv,
    tensor_to_svg,
)
from tmpfp.pipeline import worker_count

from helpers import tgraph

T5_CSV = """time,source,target,weight
1,a,b,1.1
1,b,c,2.3
1,c,d,3.7
2,a,b,1.4
2,b,d,2.9
3,a,c,0.6
3,c,d,2.2
4,a,d,3.1
4,b,c,1.8
5,a,b,2.6
5,b,d,0.9
5,c,d,1.3
"""
T4_CSV = "\n".join(T5_CSV.splitlines()[:10]) + "\n"
SPEC_CSV = "time,source,target,weight\n10,a,b,2.0\n10,a,b,3.0\n20,b,c,1.0\n"
CONST_CSV = "time,source,target,weight\n1,a,b,1.0\n1,b,c,2.0\n2,a,b,1.0\n2,b,c,2.0\n"


def sample_tensor():
    return assemble_tmp(
        [np.array([0.0, 0.5, 1.0]), np.array([2.0, 0.25, -1.5])],
        VectorKind.LANDSCAPE,
        provenance={"filter": "degree", "T": 2, "thresholds": [1.0, 2.0]},
    )


# ---------------------------------------------------------------------------
# canonical JSON and the tensor binary format


def test_canonical_json_is_sorted_and_compact():
    text = canonical_json({"b": 1, "a": [1, 2], "c": {"y": None, "x": True}})
    assert text == '{"a":[1,2],"b":1,"c":{"x":true,"y":null}}'


def test_canonical_json_accepts_numpy_scalars_and_tuples():
    text = canonical_json({"f": np.float64(1.5), "i": np.int32(3), "t": (1, 2)})
    assert text == '{"f":1.5,"i":3,"t":[1,2]}'


def test_canonical_json_rejects_opaque_values():
    with pytest.raises(ValidationError):
        canonical_json({"x": object()})
    with pytest.raises(ValidationError):
        canonical_json({"x": np.arange(3)})


def test_tensor_round_trip_is_bit_exact(tmp_path):
    tensor = sample_tensor()
    first = tmp_path / "a.tmpt"
    write_tensor(first, tensor)
    loaded = read_tensor(first)
    assert np.array_equal(loaded.data, tensor.data)
    assert loaded.kind is tensor.kind
    assert loaded.axes == tensor.axes
    assert loaded.provenance == tensor.provenance
    second = tmp_path / "b.tmpt"
    write_tensor(second, loaded)
    assert first.read_bytes() == second.read_bytes()


def test_tensor_round_trip_keeps_rank_three(tmp_path):
    tensor = assemble_tmp([np.arange(6.0).reshape(2, 3)], VectorKind.IMAGE)
    path = tmp_path / "img.tmpt"
    write_tensor(path, tensor)
    loaded = read_tensor(path)
    assert loaded.shape == (1, 2, 3)
    assert np.array_equal(loaded.data, tensor.data)


def test_read_tensor_rejects_corrupt_files(tmp_path):
    good = tmp_path / "good.tmpt"
    write_tensor(good, sample_tensor())
    raw = good.read_bytes()

    cases = {
        "magic.tmpt": (b"XXXX" + raw[4:], "bad magic"),
        "version.tmpt": (raw[:4] + struct.pack("<I", 9) + raw[8:], "format version 9"),
        "short.tmpt": (raw[:-1], "truncated"),
        "long.tmpt": (raw + b"\x00", "trailing bytes"),
    }
    for name, (data, needle) in cases.items():
        bad = tmp_path / name
        bad.write_bytes(data)
        with pytest.raises(ValidationError, match=needle):
            read_tensor(bad)


def _raw_tensor_bytes(blob: bytes) -> bytes:
    head = b"TMPT" + struct.pack("<I", 1) + struct.pack("<B", 1) + struct.pack("<I", 2)
    payload = np.zeros(2, dtype="<f8").tobytes()
    return head + payload + struct.pack("<I", len(blob)) + blob


def test_read_tensor_rejects_bad_metadata(tmp_path):
    broken = tmp_path / "brokenmeta.tmpt"
    broken.write_bytes(_raw_tensor_bytes(b"{not json"))
    with pytest.raises(ValidationError, match="bad metadata block"):
        read_tensor(broken)
    unknown = tmp_path / "unknownkind.tmpt"
    unknown.write_bytes(_raw_tensor_bytes(b'{"kind":"nope","axes":[]}'))
    with pytest.raises(ValidationError, match="bad metadata content"):
        read_tensor(unknown)


# ---------------------------------------------------------------------------
# config serialization


def test_config_round_trips_through_json():
    cfg = PipelineConfig(
        resolution=3,
        vector_kind=VectorKind.SILHOUETTE,
        power=2.0,
        homology_dims=(0,),
        window_width=2,
    )
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg
    assert PipelineConfig.from_dict(json.loads(canonical_json(cfg.to_dict()))) == cfg
    assert PipelineConfig.from_dict({}) == PipelineConfig()


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ValidationError, match="unknown config keys"):
        PipelineConfig.from_dict({"nope": 1})
    with pytest.raises(ValidationError):
        PipelineConfig.from_dict({"level": 0})
    with pytest.raises(ValidationError, match="bad config value"):
        PipelineConfig.from_dict({"resolution": "three"})


# ---------------------------------------------------------------------------
# diagram dumps


def two_slice_result():
    tg = tgraph(
        [("a", "b", 1.0), ("b", "c", 2.0), ("a", "c", 3.0)],
        [("a", "b", 1.0), ("b", "c", 2.0)],
    )
    return fingerprint(tg, PipelineConfig(resolution=2))


def test_diagram_dump_round_trip(tmp_path):
    res = two_slice_result()
    text = render_diagram_dump([res])
    lines = text.splitlines()
    assert lines[0] == "window,slice,dim,birth,death,right_open"
    path = tmp_path / "dump.csv"
    path.write_text(text, encoding="utf-8")
    records = read_diagram_dump(path)
    assert len(records) == len(lines) - 1
    rows = diagram_rows([res])
    got = [(r["window"], r["slice"], r["dim"], r["birth"], r["death"], int(r["right_open"]))
           for r in records]
    assert got == rows


def test_diagram_dump_times_are_quarter_multiples():
    for line in render_diagram_dump([two_slice_result()]).splitlines()[1:]:
        birth, death = line.split(",")[3:5]
        for text in (birth, death):
            assert len(text.split(".")[1]) == 2
            assert float(text) * 4 == int(float(text) * 4)


def test_diagram_reader_rejects_malformed_files(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("nope\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="bad header"):
        read_diagram_dump(bad_header)
    short_row = tmp_path / "s.csv"
    short_row.write_text("window,slice,dim,birth,death,right_open\n0,1,0,1.0\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="line 2"):
        read_diagram_dump(short_row)
    bad_field = tmp_path / "f.csv"
    bad_field.write_text(
        "window,slice,dim,birth,death,right_open\n0,1,0,x,2.0,1\n", encoding="utf-8"
    )
    with pytest.raises(ValidationError, match="line 2"):
        read_diagram_dump(bad_field)


def test_fast_betti_results_have_no_diagrams_to_dump():
    tg = tgraph([("a", "b", 1.0), ("b", "c", 2.0)])
    res = fingerprint(tg, PipelineConfig(resolution=2, vector_kind=VectorKind.BETTI_FAST))
    with pytest.raises(ValidationError):
        diagram_rows([res])


# ---------------------------------------------------------------------------
# plot emission


def test_tensor_csv_mirrors_entries_exactly():
    tensor = sample_tensor()
    lines = tensor_to_csv(tensor).splitlines()
    assert lines[0].startswith("# kind=landscape; shape=(2, 3)")
    parsed = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    assert np.array_equal(parsed, tensor.data)


def test_svg_outputs_are_well_formed_xml():
    flat = assemble_tmp([np.zeros(4)], VectorKind.LANDSCAPE)
    steps = assemble_tmp([np.array([1.0, 2.0, 1.0])], VectorKind.BETTI)
    imgs = assemble_tmp([np.zeros((3, 3)), np.ones((3, 3))], VectorKind.IMAGE)
    for tensor in (flat, steps, imgs):
        root = ET.fromstring(tensor_to_svg(tensor))
        assert root.tag.endswith("svg")
    records = [
        {"window": 0, "slice": 1, "dim": 0, "birth": 1.0, "death": 2.0, "right_open": True},
        {"window": 0, "slice": 1, "dim": 1, "birth": 1.5, "death": 2.0, "right_open": False},
    ]
    root = ET.fromstring(diagram_dump_to_svg(records))
    assert sum(1 for el in root.iter() if el.tag.endswith("line")) == 2
    assert ET.fromstring(diagram_dump_to_svg([])).tag.endswith("svg")


# ---------------------------------------------------------------------------
# worker count plumbing


def test_worker_count_reads_environment(monkeypatch):
    monkeypatch.delenv("TMPFP_WORKERS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("TMPFP_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("TMPFP_WORKERS", "zero")
    with pytest.raises(ValidationError):
        worker_count()
    monkeypatch.setenv("TMPFP_WORKERS", "0")
    with pytest.raises(ValidationError):
        worker_count()


def test_parallel_workers_match_serial_output(monkeypatch):
    tg = tgraph(
        [("a", "b", 1.0), ("b", "c", 2.0)],
        [("a", "b", 1.5), ("a", "c", 0.5)],
    )
    cfg = PipelineConfig(resolution=2, homology_dims=(0,))
    monkeypatch.delenv("TMPFP_WORKERS", raising=False)
    serial = fingerprint(tg, cfg)
    monkeypatch.setenv("TMPFP_WORKERS", "2")
    parallel = fingerprint(tg, cfg)
    assert np.array_equal(serial.tensors[0].data, parallel.tensors[0].data)


# ---------------------------------------------------------------------------
# CLI subcommands


@pytest.fixture()
def runner():
    return CliRunner()


def write_input(tmp_path, text, name="edges.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_cli_ingest_summary(runner, tmp_path):
    path = write_input(tmp_path, SPEC_CSV)
    result = runner.invoke(main, ["ingest", path])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "T=2, nodes={a,b,c}"
    assert lines[1] == "t=1: nodes=2, edges=1, weight min/mean/max=5/5/5"
    assert lines[2] == "t=2: nodes=2, edges=1, weight min/mean/max=1/1/1"


def test_cli_ingest_top_nodes(runner, tmp_path):
    path = write_input(tmp_path, SPEC_CSV)
    result = runner.invoke(main, ["ingest", path, "--top-nodes", "2"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "T=2, nodes={a,b}"
    assert lines[2] == "t=2: nodes=1, edges=0"


def test_cli_ingest_error_paths(runner, tmp_path):
    empty = write_input(tmp_path, "", name="empty.csv")
    result = runner.invoke(main, ["ingest", empty])
    assert result.exit_code == 2
    assert "empty input" in result.stderr
    bad = write_input(tmp_path, "time,source,target\n1,a\n", name="bad.csv")
    result = runner.invoke(main, ["ingest", bad])
    assert result.exit_code == 2
    assert "line 2" in result.stderr


def test_cli_fingerprint_landscape_shape(runner, tmp_path):
    path = write_input(tmp_path, T5_CSV)
    prefix = str(tmp_path / "fp")
    result = runner.invoke(
        main, ["fingerprint", "--input", path, "--resolution", "3", "--out", prefix]
    )
    assert result.exit_code == 0, result.output
    assert "shape=(3, 17)" in result.output
    for k in (0, 1):
        tensor = read_tensor(f"{prefix}_w0_dim{k}.tmpt")
        assert tensor.shape == (3, 17)
        assert tensor.kind is VectorKind.LANDSCAPE
        sidecar = json.loads((tmp_path / f"fp_w0_dim{k}.tmpt.meta.json").read_text())
        assert sidecar["shape"] == [3, 17]
        assert sidecar["config"]["resolution"] == 3
        assert sidecar["window"] == 0


def test_cli_fingerprint_fast_betti_shape(runner, tmp_path):
    path = write_input(tmp_path, T4_CSV)
    prefix = str(tmp_path / "fb")
    result = runner.invoke(
        main,
        ["fingerprint", "--input", path, "--resolution", "2",
         "--vector", "betti-fast", "--dims", "0", "--out", prefix],
    )
    assert result.exit_code == 0, result.output
    assert "shape=(2, 4)" in result.output
    tensor = read_tensor(f"{prefix}_w0_dim0.tmpt")
    assert tensor.shape == (2, 4)
    assert tensor.kind is VectorKind.BETTI_FAST
    assert not (tmp_path / "fb_w0_dim1.tmpt").exists()


def test_cli_fingerprint_is_deterministic(runner, tmp_path):
    path = write_input(tmp_path, T5_CSV)
    blobs = []
    for name in ("one", "two"):
        prefix = str(tmp_path / name)
        result = runner.invoke(
            main, ["fingerprint", "--input", path, "--resolution", "3", "--out", prefix]
        )
        assert result.exit_code == 0
        blobs.append(
            (
                (tmp_path / f"{name}_w0_dim0.tmpt").read_bytes(),
                (tmp_path / f"{name}_w0_dim1.tmpt").read_bytes(),
                (tmp_path / f"{name}_w0_dim0.tmpt.meta.json").read_bytes(),
            )
        )
    assert blobs[0] == blobs[1]


def test_cli_fingerprint_windows(runner, tmp_path):
    path = write_input(tmp_path, T5_CSV)
    prefix = str(tmp_path / "win")
    result = runner.invoke(
        main,
        ["fingerprint", "--input", path, "--resolution", "2",
         "--window-width", "3", "--window-stride", "2", "--dims", "0", "--out", prefix],
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "win_w0_dim0.tmpt").exists()
    assert (tmp_path / "win_w1_dim0.tmpt").exists()
    assert not (tmp_path / "win_w2_dim0.tmpt").exists()


def test_cli_config_file_with_flag_overrides(runner, tmp_path):
    path = write_input(tmp_path, T4_CSV)
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps({"resolution": 2, "vector_kind": "silhouette", "power": 2.0}),
        encoding="utf-8",
    )
    prefix = str(tmp_path / "cfg")
    result = runner.invoke(
        main,
        ["fingerprint", "--input", path, "--config", str(config),
         "--dims", "0", "--out", prefix],
    )
    assert result.exit_code == 0, result.output
    tensor = read_tensor(f"{prefix}_w0_dim0.tmpt")
    assert tensor.kind is VectorKind.SILHOUETTE
    sidecar = json.loads((tmp_path / "cfg_w0_dim0.tmpt.meta.json").read_text())
    assert sidecar["config"]["power"] == 2.0
    assert sidecar["config"]["homology_dims"] == [0]


def test_cli_config_file_errors(runner, tmp_path):
    path = write_input(tmp_path, T4_CSV)
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"nope": 1}', encoding="utf-8")
    result = runner.invoke(
        main, ["fingerprint", "--input", path, "--config", str(unknown), "--out", "x"]
    )
    assert result.exit_code == 2
    assert "unknown config keys" in result.stderr
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    result = runner.invoke(
        main, ["fingerprint", "--input", path, "--config", str(broken), "--out", "x"]
    )
    assert result.exit_code == 2
    assert "bad JSON" in result.stderr


def test_cli_pd_constant_sequence(runner, tmp_path):
    path = write_input(tmp_path, CONST_CSV)
    result = runner.invoke(main, ["pd", "--input", path, "--resolution", "2"])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "window,slice,dim,birth,death,right_open"
    assert len(lines) == 4
    for line in lines[1:]:
        _, _, dim, birth, death, open_flag = line.split(",")
        assert dim == "0"
        assert (birth, death, open_flag) == ("1.00", "2.00", "1")


def test_cli_pd_file_round_trips(runner, tmp_path):
    path = write_input(tmp_path, T5_CSV)
    out = tmp_path / "dump.csv"
    result = runner.invoke(
        main, ["pd", "--input", path, "--resolution", "3", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    records = read_diagram_dump(out)
    assert records
    stdout = runner.invoke(main, ["pd", "--input", path, "--resolution", "3"])
    assert stdout.output == out.read_text(encoding="utf-8")


def test_cli_pd_accepts_fast_betti_config(runner, tmp_path):
    path = write_input(tmp_path, CONST_CSV)
    result = runner.invoke(
        main, ["pd", "--input", path, "--resolution", "2", "--vector", "betti-fast"]
    )
    assert result.exit_code == 0, result.output
    assert len(result.output.splitlines()) == 4


def test_cli_distance(runner, tmp_path):
    path = write_input(tmp_path, T5_CSV)
    for name, level in (("lo", "1"), ("hi", "2")):
        result = runner.invoke(
            main,
            ["fingerprint", "--input", path, "--resolution", "3",
             "--level", level, "--dims", "0", "--out", str(tmp_path / name)],
        )
        assert result.exit_code == 0
    file_a = str(tmp_path / "lo_w0_dim0.tmpt")
    file_b = str(tmp_path / "hi_w0_dim0.tmpt")
    same = runner.invoke(main, ["distance", file_a, file_a])
    assert same.exit_code == 0 and same.output.strip() == "0.0"
    cross = runner.invoke(main, ["distance", file_a, file_b])
    assert cross.exit_code == 0
    expected = tmp_distance(read_tensor(file_a), read_tensor(file_b))
    assert float(cross.output.strip()) == expected


def test_cli_distance_shape_mismatch(runner, tmp_path):
    t5 = write_input(tmp_path, T5_CSV, name="t5.csv")
    t4 = write_input(tmp_path, T4_CSV, name="t4.csv")
    for src, name in ((t5, "a"), (t4, "b")):
        result = runner.invoke(
            main,
            ["fingerprint", "--input", src, "--resolution", "2",
             "--dims", "0", "--out", str(tmp_path / name)],
        )
        assert result.exit_code == 0
    result = runner.invoke(
        main,
        ["distance", str(tmp_path / "a_w0_dim0.tmpt"), str(tmp_path / "b_w0_dim0.tmpt")],
    )
    assert result.exit_code == 2
    assert "shape mismatch" in result.stderr


def test_cli_plot_tensor_and_dump(runner, tmp_path):
    zero = assemble_tmp([np.zeros(5)], VectorKind.LANDSCAPE)
    tensor_file = tmp_path / "zero.tmpt"
    write_tensor(tensor_file, zero)
    result = runner.invoke(main, ["plot", str(tensor_file), "--out", str(tmp_path / "z")])
    assert result.exit_code == 0, result.output
    csv_text = (tmp_path / "z.csv").read_text(encoding="utf-8")
    assert csv_text.splitlines()[1] == ",".join(["0.0"] * 5)
    ET.fromstring((tmp_path / "z.svg").read_text(encoding="utf-8"))

    edges = write_input(tmp_path, T5_CSV)
    dump = tmp_path / "dump.csv"
    assert runner.invoke(
        main, ["pd", "--input", edges, "--resolution", "2", "--out", str(dump)]
    ).exit_code == 0
    result = runner.invoke(main, ["plot", str(dump), "--out", str(tmp_path / "bars")])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "bars.csv").read_text(encoding="utf-8") == dump.read_text(encoding="utf-8")
    ET.fromstring((tmp_path / "bars.svg").read_text(encoding="utf-8"))


def test_cli_bench_csv(runner, tmp_path):
    args = ["bench", "--nodes", "5", "--snapshots", "2", "--resolution", "2", "--seed", "3"]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    header, row = result.output.splitlines()
    assert header == (
        "n_nodes,T,resolution,churn,seed,density,filter,"
        "time_naive_s,time_tmp_s,speedup,outputs_equal"
    )
    assert row.startswith("5,2,2,0.3,3,0.05,degree,")
    assert row.endswith(",True")
    out = tmp_path / "bench.csv"
    result = runner.invoke(main, args + ["--out", str(out)])
    assert result.exit_code == 0
    assert out.read_text(encoding="utf-8").splitlines()[0] == header
