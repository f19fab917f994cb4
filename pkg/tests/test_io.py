import json
import math

import numpy as np
import pytest

from dnls_lab import io as lab_io
from dnls_lab.grid import ComplexField, GridSpec
from dnls_lab.initial import gaussian, halfline_profile


def test_format_float_round_trips():
    rng = np.random.default_rng(0)
    for v in np.concatenate([rng.normal(size=200) * 10.0 ** rng.integers(-300, 300, 200), [0.1, 1 / 3, 5e-324]]):
        assert float(lab_io.format_float(v)) == v
    assert lab_io.format_float(float("nan")) == "nan"
    assert lab_io.format_float(float("-inf")) == "-inf"


def test_csv_round_trip(tmp_path):
    rows = [(0.0, 1 / 3, -2.5e-17), (1.0, math.pi, float("inf"))]
    path = lab_io.write_csv(tmp_path / "a" / "x.csv", ("t", "a", "b"), rows)
    text = path.read_text()
    assert text.startswith("t,a,b\n") and "," in text and ";" not in text
    back = lab_io.read_csv(path)
    assert back["a"][0] == 1 / 3 and back["b"][1] == math.inf


def test_json_is_canonical(tmp_path):
    doc = {"b": np.float64(1.5), "a": [np.int64(2), np.bool_(True)], "c": float("nan"), "p": tmp_path}
    text = lab_io.json_text(doc)
    assert text.index('"a"') < text.index('"b"')
    parsed = json.loads(text)
    assert parsed["c"] == "nan" and parsed["a"] == [2, True]
    assert lab_io.json_text(doc) == text


@pytest.mark.parametrize("grid", [GridSpec.line(10.0, 64), GridSpec.halfline(5.0, 101)])
def test_frames_round_trip(tmp_path, grid):
    f = gaussian(grid, 1.0, 1.0, 1.0, 0.7) if grid.periodic else halfline_profile(grid, 2.0)
    frames = [(0.0, f), (0.25, f * 1j)]
    path = lab_io.write_frames(tmp_path / "f.bin", frames)
    header, back = lab_io.read_frames(path)
    assert header["n_frames"] == 2 and header["schema_version"] == lab_io.SCHEMA_VERSION
    assert back[1][0] == 0.25
    assert back[1][1].grid == grid
    assert np.array_equal(back[1][1].values, f.values * 1j)
    # header line is JSON, payload is little-endian float64
    raw = path.read_bytes()
    payload = raw[raw.index(b"\n") + 1 :]
    assert len(payload) == 8 * 2 * (1 + 2 * grid.n)


def test_frames_reject_mixed_grids(tmp_path):
    a = ComplexField.zeros(GridSpec.line(10.0, 64))
    b = ComplexField.zeros(GridSpec.line(10.0, 128))
    with pytest.raises(ValueError):
        lab_io.write_frames(tmp_path / "f.bin", [(0.0, a), (1.0, b)])


def test_read_frames_rejects_other_files(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b'{"format": "other"}\n')
    with pytest.raises(ValueError):
        lab_io.read_frames(p)


def test_manifest(tmp_path):
    lab_io.write_csv(tmp_path / "a.csv", ("t",), [(0.0,)])
    lab_io.write_json(tmp_path / "sub" / "b.json", {"x": 1})
    lab_io.write_manifest(tmp_path, {"k": 1}, "2020-01-01T00:00:00+00:00", "0.1.0")
    m = json.loads((tmp_path / lab_io.MANIFEST_NAME).read_text())
    assert m["artifact_paths"] == ["a.csv", "sub/b.json"]
    assert json.loads(m["config_echo"]) == {"k": 1}
    first = m["git_like_content_hash"]
    # rewriting the manifest leaves the hash alone; touching an artifact changes it
    lab_io.write_manifest(tmp_path, {"k": 1}, "2020-01-01T00:00:00+00:00", "0.1.0")
    assert json.loads((tmp_path / lab_io.MANIFEST_NAME).read_text())["git_like_content_hash"] == first
    (tmp_path / "a.csv").write_text("t\n1\n")
    lab_io.write_manifest(tmp_path, {"k": 1}, "2020-01-01T00:00:00+00:00", "0.1.0")
    assert json.loads((tmp_path / lab_io.MANIFEST_NAME).read_text())["git_like_content_hash"] != first
