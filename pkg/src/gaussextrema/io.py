"""CSV tables and OBJ meshes.

Floats are written with 17 significant digits, which round-trips every
double exactly.
"""

import csv
import io

import numpy as np

__all__ = ["format_csv", "write_csv", "read_csv", "write_obj", "read_obj"]


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def format_csv(table):
    """Render ``table`` (mapping of column name to equal-length sequences)."""
    columns = list(table)
    cols = [np.ravel(np.asarray(table[c], dtype=object)) for c in columns]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, table):
    """Write ``table`` as UTF-8 CSV with a header row."""
    text = format_csv(table)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _parse(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def read_csv(path):
    """Read a table written by :func:`write_csv`.

    Numeric columns come back as float or int arrays, others as lists.
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise ValueError(f"{path} has no header row")
    header, body = rows[0], rows[1:]
    table = {}
    for j, name in enumerate(header):
        values = [_parse(r[j]) for r in body]
        if values and all(isinstance(v, int) and not isinstance(v, bool) for v in values):
            table[name] = np.array(values, dtype=np.int64)
        elif values and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            table[name] = np.array(values, dtype=float)
        elif not values:
            table[name] = np.array([], dtype=float)
        else:
            table[name] = values
    return table


def write_obj(path, mesh):
    """``v x y z`` lines, then ``f i j k`` lines with 1-based indices."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for x, y, z in np.asarray(mesh.vertices, dtype=float):
                fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
            for i, j, k in np.asarray(mesh.triangles, dtype=np.int64) + 1:
                fh.write(f"f {i} {j} {k}\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_obj(path):
    """Return ``(vertices, triangles)`` with 0-based triangle indices."""
    verts, faces = [], []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "v":
                    verts.append([float(t) for t in parts[1:4]])
                elif parts[0] == "f":
                    faces.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return (np.array(verts, dtype=float).reshape(-1, 3),
            np.array(faces, dtype=np.int64).reshape(-1, 3))
