"""File output: legacy ASCII VTK and CSV, written atomically."""
from __future__ import annotations

import contextlib
import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .mesh import Mesh

__all__ = ["fmt", "atomic_write", "vtk_string", "write_vtk", "write_csv", "read_csv", "read_vtk_fields"]


def fmt(x) -> str:
    """Nine significant digits for floats; integers verbatim."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


@contextlib.contextmanager
def _replace_on_success(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def atomic_write(path, text: str) -> None:
    with _replace_on_success(Path(path)) as fh:
        fh.write(text)


def vtk_string(mesh: Mesh, cell_data: Mapping[str, np.ndarray] | None = None,
               point_data: Mapping[str, np.ndarray] | None = None, title: str = "tvgcg") -> str:
    """Legacy VTK 3.0 unstructured grid of triangles (cell type 5)."""
    out = io.StringIO()
    w = out.write
    w("# vtk DataFile Version 3.0\n")
    w(f"{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
    w(f"POINTS {mesh.n_vertices} double\n")
    for x, y in mesh.vertices:
        w(f"{fmt(x)} {fmt(y)} 0\n")
    nt = mesh.n_triangles
    w(f"CELLS {nt} {4 * nt}\n")
    for a, b, c in mesh.triangles:
        w(f"3 {a} {b} {c}\n")
    w(f"CELL_TYPES {nt}\n")
    w("5\n" * nt)
    for header, size, fields in (("CELL_DATA", nt, cell_data), ("POINT_DATA", mesh.n_vertices, point_data)):
        if not fields:
            continue
        w(f"{header} {size}\n")
        for name, values in fields.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (size,):
                raise ValueError(f"field {name!r} has shape {values.shape}, expected ({size},)")
            w(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            w("".join(f"{fmt(v)}\n" for v in values))
    return out.getvalue()


def write_vtk(path, mesh: Mesh, cell_data=None, point_data=None, title: str = "tvgcg") -> None:
    atomic_write(path, vtk_string(mesh, cell_data, point_data, title))


def write_csv(path, columns: Sequence[str], rows: Iterable[Mapping]) -> None:
    with _replace_on_success(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c]) for c in columns])


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_vtk_fields(path) -> dict[str, np.ndarray]:
    """Scalar fields of a file produced by :func:`write_vtk`."""
    lines = Path(path).read_text().splitlines()
    fields, i, size = {}, 0, 0
    while i < len(lines):
        parts = lines[i].split()
        if parts and parts[0] in ("CELL_DATA", "POINT_DATA"):
            size = int(parts[1])
        elif parts and parts[0] == "SCALARS":
            fields[parts[1]] = np.array([float(v) for v in lines[i + 2 : i + 2 + size]])
            i += 1 + size
        i += 1
    return fields
