"""File output: legacy VTK fields, matrix dumps, geometry dumps and CSV tables."""

import csv
import os
import tempfile

import numpy as np
import scipy.sparse as sp

VTK_TRIANGLE = 5


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_vtk(path, mesh, velocity, pressure, cells=None, title="olm-stokes"):
    """Legacy ASCII VTK 2.0 unstructured grid with point data ``velocity``
    (zero-padded to 3 components) and ``pressure``.

    ``velocity`` and ``pressure`` are given per mesh vertex.
    """
    cells = np.arange(mesh.n_cells) if cells is None else np.asarray(cells)
    velocity = np.asarray(velocity, dtype=float).reshape(mesh.n_vertices, 2)
    pressure = np.asarray(pressure, dtype=float).reshape(mesh.n_vertices)
    lines = ["# vtk DataFile Version 2.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_vertices} double")
    lines += [f"{x!r} {y!r} 0.0" for x, y in mesh.vertices.tolist()]
    lines.append(f"CELLS {len(cells)} {4 * len(cells)}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.cells[cells]]
    lines.append(f"CELL_TYPES {len(cells)}")
    lines += [str(VTK_TRIANGLE)] * len(cells)
    lines.append(f"POINT_DATA {mesh.n_vertices}")
    lines.append("VECTORS velocity double")
    lines += [f"{u!r} {v!r} 0.0" for u, v in velocity.tolist()]
    lines.append("SCALARS pressure double 1")
    lines.append("LOOKUP_TABLE default")
    lines += [repr(float(p)) for p in pressure]
    _atomic_write(path, "\n".join(lines) + "\n")


def read_vtk(path):
    """Parse the subset of legacy VTK written by :func:`write_vtk`.

    Returns a dict with ``points``, ``cells``, ``cell_types``, ``velocity``
    and ``pressure``; raises ``ValueError`` on malformed input.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    if not lines[0].startswith("# vtk DataFile Version"):
        raise ValueError("missing VTK header")
    if lines[2] != "ASCII" or lines[3] != "DATASET UNSTRUCTURED_GRID":
        raise ValueError("expected ASCII unstructured grid")
    out = {}
    i = 4
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        key = parts[0]
        if key == "POINTS":
            n = int(parts[1])
            out["points"] = np.array([lines[i + 1 + k].split() for k in range(n)], dtype=float)
            i += n + 1
        elif key == "CELLS":
            n, size = int(parts[1]), int(parts[2])
            rows = [lines[i + 1 + k].split() for k in range(n)]
            if sum(len(r) for r in rows) != size:
                raise ValueError("CELLS size mismatch")
            if any(int(r[0]) != len(r) - 1 for r in rows):
                raise ValueError("CELLS connectivity count mismatch")
            out["cells"] = np.array([r[1:] for r in rows], dtype=np.int64)
            i += n + 1
        elif key == "CELL_TYPES":
            n = int(parts[1])
            out["cell_types"] = np.array([lines[i + 1 + k] for k in range(n)], dtype=np.int64)
            i += n + 1
        elif key == "POINT_DATA":
            npts = int(parts[1])
            i += 1
        elif key == "VECTORS":
            out[parts[1]] = np.array([lines[i + 1 + k].split() for k in range(npts)], dtype=float)
            i += npts + 1
        elif key == "SCALARS":
            if lines[i + 1].split()[0] != "LOOKUP_TABLE":
                raise ValueError("SCALARS without LOOKUP_TABLE")
            out[parts[1]] = np.array(lines[i + 2 : i + 2 + npts], dtype=float)
            i += npts + 2
        else:
            raise ValueError(f"unexpected VTK keyword {key!r}")
    if "cells" in out and out["cells"].size and out["cells"].max() >= len(out["points"]):
        raise ValueError("cell references a missing point")
    return out


def dump_matrix(path, matrix):
    """ASCII dump: header ``rows cols nnz``, then 1-based ``row col value`` triples."""
    m = sp.coo_matrix(matrix)
    order = np.lexsort((m.col, m.row))
    lines = ["%%MatrixMarket matrix coordinate real general", f"{m.shape[0]} {m.shape[1]} {m.nnz}"]
    lines += [f"{r + 1} {c + 1} {v!r}" for r, c, v in zip(m.row[order], m.col[order], m.data[order].tolist())]
    _atomic_write(path, "\n".join(lines) + "\n")


def dump_geometry(path, geom):
    """CSV of overlap-piece polygons and interface segments."""
    rows = [("kind", "bg_cell", "ov_cell", "index", "x", "y", "nx", "ny")]
    for k, piece in enumerate(geom.overlap_pieces):
        for x, y in piece.polygon.vertices.tolist():
            rows.append(("piece", piece.bg_cell, piece.ov_cell, k, repr(x), repr(y), "", ""))
    for k, seg in enumerate(geom.interface_segments):
        for x, y in seg.endpoints.tolist():
            rows.append(("segment", seg.bg_cell, seg.ov_cell, k, repr(x), repr(y), repr(float(seg.normal[0])), repr(float(seg.normal[1]))))
    write_csv(path, rows[0], rows[1:])


def write_csv(path, header, rows, comment=None):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
        if comment:
            fh.write(f"# {comment}\n")
    os.replace(tmp, path)
