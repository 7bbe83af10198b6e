import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussextrema.embedding import TriangleMesh, embed_profile, tessellate
from gaussextrema.io import format_csv, read_csv, read_obj, write_csv, write_obj
from gaussextrema.kernels import make_random_wave

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(finite, min_size=1, max_size=20))
def test_csv_round_trip_is_bit_exact(values):
    import tempfile, os

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "t.csv")
        write_csv(path, {"x": np.array(values), "i": np.arange(len(values))})
        table = read_csv(path)
    assert np.array_equal(table["x"], np.array(values, dtype=float))
    assert np.array_equal(table["i"], np.arange(len(values)))


def test_empty_table_is_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(path, {"r": [], "psi": []})
    assert path.read_text(encoding="utf-8") == "r,psi\n"
    assert read_csv(path)["r"].size == 0


def test_mixed_columns(tmp_path):
    path = tmp_path / "m.csv"
    write_csv(path, {"y": [0.1, 0.2], "method": ["series", "closed_form"], "valid": [True, False]})
    table = read_csv(path)
    assert table["method"] == ["series", "closed_form"]
    assert table["valid"] == [True, False]
    assert format_csv({"a": [1.0 / 3]}) == "a\n0.33333333333333331\n"


def test_unequal_columns_rejected():
    with pytest.raises(ValueError):
        format_csv({"a": [1, 2], "b": [1]})


def test_io_errors_name_the_path(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        write_csv(bad, {"a": [1]})
    with pytest.raises(OSError, match="missing"):
        read_obj(bad)


def test_obj_round_trip(tmp_path):
    mesh = tessellate(embed_profile(make_random_wave(1.0), np.linspace(0.0, 3.0, 13)), 24)
    path = tmp_path / "s.obj"
    write_obj(path, mesh)
    verts, tris = read_obj(path)
    assert np.array_equal(verts, mesh.vertices)
    assert np.array_equal(tris, mesh.triangles)
    lines = path.read_text().splitlines()
    first_face = next(i for i, l in enumerate(lines) if l.startswith("f "))
    assert all(l.startswith("v ") for l in lines[:first_face])
    assert min(int(t) for l in lines[first_face:] for t in l.split()[1:]) == 1


def test_obj_without_triangles(tmp_path):
    mesh = TriangleMesh(np.array([[0.0, 0.0, 0.0], [1.0, 0.5, 0.25]]), np.zeros((0, 3), np.int64),
                        np.zeros((2, 2)), np.array([]), 0.25)
    path = tmp_path / "v.obj"
    write_obj(path, mesh)
    verts, tris = read_obj(path)
    assert verts.shape == (2, 3) and tris.shape == (0, 3)
