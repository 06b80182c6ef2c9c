"""CSV/JSON serialization of phase-space grids and efficiency curves."""

from __future__ import annotations

import csv
import hashlib
import io
import json

import numpy as np

from .phase_space import GridSpec, PhaseGrid

FLOAT_FMT = "%.17g"


def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def grid_to_csv(grid: PhaseGrid) -> str:
    """``re,im,value`` rows, Im alpha varying fastest, 17 significant digits."""
    re, im = grid.re, grid.im
    lines = ["re,im,value"]
    for i, x in enumerate(re):
        rx = _fmt(x)
        row = grid.values[i]
        lines.extend(f"{rx},{_fmt(y)},{_fmt(v)}" for y, v in zip(im, row))
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def grid_to_json(grid: PhaseGrid) -> str:
    s = grid.spec
    doc = {
        "metadata": _jsonable(grid.metadata),
        "grid": {"re_min": s.re_min, "re_max": s.re_max, "n_re": s.n_re,
                 "im_min": s.im_min, "im_max": s.im_max, "n_im": s.n_im},
        "values": [[float(v) for v in row] for row in grid.values],
    }
    return json.dumps(doc, indent=1) + "\n"


def grid_from_csv(text: str) -> PhaseGrid:
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != ["re", "im", "value"]:
        raise ValueError("expected header re,im,value")
    data = np.array(rows[1:], dtype=float)
    re = np.unique(data[:, 0])
    im = np.unique(data[:, 1])
    spec = GridSpec(re[0], re[-1], re.size, im[0], im[-1], im.size)
    return PhaseGrid(spec, data[:, 2].reshape(re.size, im.size))


def grid_from_json(text: str) -> PhaseGrid:
    doc = json.loads(text)
    g = doc["grid"]
    spec = GridSpec(g["re_min"], g["re_max"], g["n_re"], g["im_min"], g["im_max"], g["n_im"])
    return PhaseGrid(spec, np.array(doc["values"], dtype=float), doc.get("metadata", {}))


def curve_to_csv(curve) -> str:
    cols = ["t", "eta_closed"] + (["eta_numeric"] if curve.numeric is not None else [])
    lines = [",".join(cols)]
    for i, t in enumerate(curve.times):
        row = [_fmt(t), _fmt(curve.values[i])]
        if curve.numeric is not None:
            row.append(_fmt(curve.numeric[i]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def curve_to_json(curve, metadata: dict) -> str:
    doc = {
        "metadata": _jsonable(metadata),
        "t": [float(t) for t in curve.times],
        "eta_closed": [float(v) for v in curve.values],
    }
    if curve.numeric is not None:
        doc["eta_numeric"] = [float(v) for v in curve.numeric]
    return json.dumps(doc, indent=1) + "\n"


def sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
