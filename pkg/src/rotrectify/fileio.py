"""Match CSV and homography JSON files.

Match files hold top-left pixel coordinates; they are converted to the
centered frame once, on load.  Homography files store centered-frame
matrices normalized so the bottom-right entry is 1.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .geometry import Frame, MatchSet, normalize_homography

MATCH_HEADER = ["x1", "y1", "x2", "y2"]


class FileFormatError(ValueError):
    pass


def read_matches(path, dims) -> MatchSet:
    """Load a match CSV and return it in the centered frame."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != MATCH_HEADER:
            raise FileFormatError(f"{path}: header must be {','.join(MATCH_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise FileFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise FileFormatError(f"{path}:{lineno}: not a number in {row}") from None
            if not all(math.isfinite(v) for v in values):
                raise FileFormatError(f"{path}:{lineno}: non-finite value in {row}")
            rows.append(values)
    if len(rows) < 2:
        raise FileFormatError(f"{path}: need at least 2 correspondences, got {len(rows)}")
    a = np.array(rows)
    return MatchSet(a[:, :2], a[:, 2:], Frame.TOP_LEFT).to_centered(dims)


def write_matches(path, matches: MatchSet, dims) -> None:
    tl = matches.to_top_left(dims)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(MATCH_HEADER) + "\n")
        for (x1, y1), (x2, y2) in zip(tl.left.tolist(), tl.right.tolist()):
            fh.write(f"{x1!r},{y1!r},{x2!r},{y2!r}\n")


def _flat(H) -> list[float]:
    return [float(v) for v in normalize_homography(H).ravel()]


def write_homographies(path, H1, H2, dims, vae: float, nvd) -> None:
    doc = {
        "width": int(dims[0]),
        "height": int(dims[1]),
        "frame": Frame.CENTERED.value,
        "H1": _flat(H1),
        "H2": _flat(H2),
        "vae": float(vae),
        "nvd": [float(nvd[0]), float(nvd[1])],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_homographies(path) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON ({exc})") from None
    for key in ("width", "height", "frame", "H1", "H2"):
        if key not in doc:
            raise FileFormatError(f"{path}: missing field {key!r}")
    out = dict(doc)
    for key in ("H1", "H2"):
        values = doc[key]
        if len(values) != 9 or not all(math.isfinite(float(v)) for v in values):
            raise FileFormatError(f"{path}: {key} must be 9 finite numbers")
        out[key] = np.array(values, dtype=float).reshape(3, 3)
    out["dims"] = (int(doc["width"]), int(doc["height"]))
    return out
