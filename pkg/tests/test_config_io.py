import os
from pathlib import Path

import numpy as np
import pytest

from conftest import dd
from tvgcg.config import ConfigError, RunConfig, load_config, parse_config
from tvgcg.experiment import prepare
from tvgcg.io import atomic_write, fmt, read_csv, read_vtk_fields, vtk_string, write_csv, write_vtk
from tvgcg.mesh import MeshKind


def test_parse_full_config(tmp_path):
    text = """
    # comment
    ; another
    problem.alpha = 2e-3
    problem.c_coeff = 0.25
    problem.observation_file = data/y.txt
    mesh.kind = jittered
    mesh.n = 8
    mesh.jitter = 0.1
    mesh.seed = 3
    solver.zeta_tol = 1e-8
    solver.max_iter = 40
    output.dir = results
    output.vtk = no
    """
    cfg = parse_config(text, base_dir=tmp_path)
    assert cfg.alpha == 2e-3 and cfg.c_coeff == 0.25 and cfg.observation == "file"
    assert cfg.observation_file == tmp_path / "data/y.txt"
    assert cfg.output_dir == tmp_path / "results"
    assert cfg.mesh.kind is MeshKind.JITTERED and cfg.mesh.n == 8 and cfg.mesh.seed == 3
    assert cfg.zeta_tol == 1e-8 and cfg.max_iter == 40
    assert not cfg.write_vtk and cfg.write_csv
    assert cfg.ssn_tol == 1e-14 and cfg.cg_tol == 1e-12


@pytest.mark.parametrize("text,match", [
    ("problem.alpha = 1\nproblem.colour = red\n", r"line 2: unknown key"),
    ("problem.alpha = 1\nproblem.alpha = 2\n", r"line 2: duplicate key"),
    ("problem.alpha = 1\nmesh.n = eight\n", r"line 2: bad value"),
    ("problem.alpha = 1\n\nmesh.n\n", r"line 3: expected"),
    ("problem.alpha =\n", r"line 1: empty value"),
])
def test_errors_carry_line_numbers(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


@pytest.mark.parametrize("text,key", [
    ("problem.observation_file = y.txt\n", "problem.alpha"),
    ("problem.alpha = -1\nproblem.observation_file = y.txt\n", "problem.alpha"),
    ("problem.alpha = 1\n", "problem.observation_file"),
    ("problem.preset = castle\nproblem.alpha = 0.5\n", "problem.alpha"),
    ("problem.preset = moon\n", "problem.preset"),
    ("problem.alpha = 1\nproblem.observation = castle\nsolver.max_iter = 0\n", "solver.max_iter"),
])
def test_semantic_errors_name_the_key(text, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        parse_config(text)


def test_castle_preset_defaults():
    cfg = parse_config("problem.preset = castle\nmesh.n = 64\n")
    assert cfg.alpha == 1e-4 and cfg.c_coeff == 0.0 and cfg.observation == "castle"
    exp = prepare(cfg)
    assert exp.mesh.n_triangles == 4 * 64 * 64
    c = exp.mesh.centroids
    inside = (np.abs(c[:, 0]) < 0.5) & (np.abs(c[:, 1]) < 0.5)
    assert np.array_equal(exp.y_obs, inside.astype(float))


def test_from_preset():
    cfg = RunConfig.from_preset("two_spheres")
    assert cfg.alpha == 1e-5 and cfg.c_coeff == 0.5
    with pytest.raises(ConfigError):
        RunConfig.from_preset("nope")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.cfg")


def test_fmt():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(123456789.123) == "123456789"
    assert fmt(np.int64(12)) == "12" and fmt(True) == "1"
    assert fmt(2.5e-11) == "2.5e-11"


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "sub" / "t.csv"
    write_csv(path, ("k", "x"), [{"k": 0, "x": np.pi}, {"k": 1, "x": -1e-20}])
    assert path.read_text() == "k,x\n0,3.14159265\n1,-1e-20\n"
    assert read_csv(path) == [{"k": "0", "x": "3.14159265"}, {"k": "1", "x": "-1e-20"}]


def test_vtk_layout():
    mesh = dd(1)
    text = vtk_string(mesh, cell_data={"u": np.arange(4.0)}, point_data={"y": np.zeros(5)})
    lines = text.splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[2:5] == ["ASCII", "DATASET UNSTRUCTURED_GRID", "POINTS 5 double"]
    assert "CELLS 4 16" in lines and "CELL_TYPES 4" in lines
    assert lines.count("5") == 4
    assert "CELL_DATA 4" in lines and "POINT_DATA 5" in lines
    assert "SCALARS u double 1" in lines and "LOOKUP_TABLE default" in lines
    with pytest.raises(ValueError):
        vtk_string(mesh, cell_data={"u": np.zeros(3)})


def test_vtk_roundtrip(tmp_path, rng):
    mesh = dd(3)
    u, y = rng.normal(size=mesh.n_triangles), rng.normal(size=mesh.n_vertices)
    write_vtk(tmp_path / "f.vtk", mesh, cell_data={"u": u}, point_data={"y": y})
    back = read_vtk_fields(tmp_path / "f.vtk")
    assert back["u"] == pytest.approx(u, rel=1e-8)
    assert back["y"] == pytest.approx(y, rel=1e-8)


def test_atomic_write_keeps_old_file_on_failure(tmp_path):
    path = tmp_path / "x.csv"
    atomic_write(path, "old\n")

    class Boom:
        def __getitem__(self, key):
            raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        write_csv(path, ("a",), [{"a": 1}, Boom()])
    assert path.read_text() == "old\n"
    assert os.listdir(tmp_path) == ["x.csv"]


def test_observation_file_shape_checked(tmp_path):
    np.savetxt(tmp_path / "y.txt", np.zeros(7))
    cfg = parse_config("problem.alpha = 1\nproblem.observation_file = y.txt\nmesh.n = 2\n", base_dir=tmp_path)
    with pytest.raises(ValueError, match="7 values"):
        prepare(cfg)


def test_observation_file_loaded(tmp_path):
    mesh = dd(2)
    np.savetxt(tmp_path / "y.txt", np.arange(mesh.n_vertices, dtype=float))
    cfg = parse_config("problem.alpha = 1\nproblem.observation_file = y.txt\nmesh.n = 2\n", base_dir=tmp_path)
    assert prepare(cfg).y_obs.shape == (mesh.n_vertices,)
    assert isinstance(cfg.observation_file, Path)
