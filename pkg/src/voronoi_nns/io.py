"""Point-cloud readers for XYZ, OBJ and ASCII PLY files."""

import logging
import os

import numpy as np

from .exceptions import PointFileError

__all__ = ["load_points", "dedupe_points", "FORMATS"]

log = logging.getLogger(__name__)

FORMATS = ("xyz", "obj", "ply")


def _floats(tokens, path, lineno):
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise PointFileError(f"{path}:{lineno}: non-numeric coordinate in {tokens}",
                             path=path, line=lineno) from None
    if not all(np.isfinite(vals)):
        raise PointFileError(f"{path}:{lineno}: non-finite coordinate",
                             path=path, line=lineno)
    return vals


def _read_xyz(lines, path):
    rows = []
    width = None
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].replace(",", " ").split()
        if not text:
            continue
        if width is None:
            if len(text) not in (2, 3):
                raise PointFileError(
                    f"{path}:{lineno}: expected 2 or 3 coordinates, got {len(text)}",
                    path=path, line=lineno)
            width = len(text)
        elif len(text) != width:
            raise PointFileError(
                f"{path}:{lineno}: expected {width} coordinates, got {len(text)}",
                path=path, line=lineno)
        rows.append(_floats(text, path, lineno))
    return rows


def _read_obj(lines, path):
    rows = []
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].split()
        if not text or text[0] != "v":
            continue
        if len(text) not in (4, 5):
            raise PointFileError(
                f"{path}:{lineno}: vertex line needs 3 coordinates (optionally w)",
                path=path, line=lineno)
        rows.append(_floats(text[1:4], path, lineno))
    return rows


def _read_ply(lines, path):
    if not lines or lines[0].strip() != "ply":
        raise PointFileError(f"{path}:1: missing 'ply' magic", path=path, line=1)
    n_vertex = None
    props = []
    element = None
    before = 0  # data lines belonging to elements declared before 'vertex'
    counts = []
    body = None
    for lineno, line in enumerate(lines[1:], 2):
        tok = line.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise PointFileError(
                    f"{path}:{lineno}: only ascii PLY is supported",
                    path=path, line=lineno)
        elif tok[0] == "element":
            if len(tok) != 3:
                raise PointFileError(f"{path}:{lineno}: malformed element line",
                                     path=path, line=lineno)
            element = tok[1]
            try:
                count = int(tok[2])
            except ValueError:
                raise PointFileError(f"{path}:{lineno}: bad element count",
                                     path=path, line=lineno) from None
            if element == "vertex":
                n_vertex = count
                before = sum(counts)
            counts.append(count)
        elif tok[0] == "property":
            if element == "vertex":
                if len(tok) >= 2 and tok[1] == "list":
                    raise PointFileError(
                        f"{path}:{lineno}: list properties on vertices are not supported",
                        path=path, line=lineno)
                props.append(tok[-1])
        elif tok[0] == "end_header":
            body = lineno
            break
        else:
            raise PointFileError(f"{path}:{lineno}: unexpected header line",
                                 path=path, line=lineno)
    if body is None:
        raise PointFileError(f"{path}: missing end_header", path=path)
    if n_vertex is None:
        raise PointFileError(f"{path}: no vertex element", path=path)
    try:
        cols = [props.index(c) for c in ("x", "y", "z")]
    except ValueError:
        raise PointFileError(f"{path}: vertex element lacks x/y/z properties",
                             path=path) from None
    rows = []
    data = [(i, ln) for i, ln in enumerate(lines[body:], body + 1) if ln.strip()]
    chunk = data[before: before + n_vertex]
    if len(chunk) < n_vertex:
        raise PointFileError(
            f"{path}: expected {n_vertex} vertex lines, found {len(chunk)}", path=path)
    for lineno, line in chunk:
        tok = line.split()
        if len(tok) != len(props):
            raise PointFileError(
                f"{path}:{lineno}: expected {len(props)} values, got {len(tok)}",
                path=path, line=lineno)
        rows.append(_floats([tok[c] for c in cols], path, lineno))
    return rows


_READERS = {"xyz": _read_xyz, "obj": _read_obj, "ply": _read_ply}


def dedupe_points(points):
    """Drop exact repeats, keeping first occurrences in their original order.

    Returns ``(unique_points, n_removed)``.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] < 2:
        return points, 0
    _, first = np.unique(points, axis=0, return_index=True)
    keep = np.sort(first)
    return np.ascontiguousarray(points[keep]), int(points.shape[0] - keep.shape[0])


def load_points(path, fmt=None):
    """Read vertex positions from ``path``.

    Parameters
    ----------
    path : str or path-like
    fmt : {"xyz", "obj", "ply"}, optional
        Inferred from the extension when omitted.

    Returns
    -------
    points : ndarray of shape (n, d)
        Distinct points in file order.
    dimension : int

    Raises
    ------
    PointFileError
        On malformed content (with the offending line number) or when the
        file holds no vertices.
    OSError
        When the file cannot be read.
    """
    path = os.fspath(path)
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip(".").lower()
    fmt = fmt.lower()
    if fmt not in _READERS:
        raise PointFileError(f"{path}: unknown point format {fmt!r}; use one of {FORMATS}",
                             path=path)
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        lines = fh.read().splitlines()
    rows = _READERS[fmt](lines, path)
    if not rows:
        raise PointFileError(f"{path}: no vertices found", path=path)
    points, removed = dedupe_points(np.array(rows, dtype=np.float64))
    if removed:
        log.info("%s: removed %d duplicate vertices", path, removed)
    return points, int(points.shape[1])
