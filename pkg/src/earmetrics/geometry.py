"""Geometric ear features from eight anthropometric landmarks.

The landmark set is: otobasion superius (obs), otobasion inferius (obi),
tragus (t), superaurale (sa), subaurale (sba), postaurale (pa), preaurale
(pra) and the intertragic notch (intno).  From these we derive a fixed
16-dimensional feature vector: 14 pairwise Euclidean distances, the
axis-aligned ear rectangle area, and the ear outline hexagon area.

Coordinates are image coordinates: x grows to the right, y grows downward.
Right-ear landmark sets are mirrored to the left-ear frame before any
side-dependent measurement, so "left of the ear" is always the face side.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    ConstantFeature,
    DataError,
    DegenerateLandmarks,
    EmptySelection,
    SelfIntersectingPolygon,
)

LANDMARK_NAMES = ("obs", "obi", "t", "sa", "sba", "pa", "pra", "intno")

FEATURE_NAMES = (
    "obs_obi",
    "sa_sba",
    "sa_pa",
    "pa_sba",
    "obi_sba",
    "obi_pa",
    "t_obs",
    "t_sa",
    "t_pa",
    "t_sba",
    "t_obi",
    "pra_pa",
    "intno_obi",
    "intno_sba",
    "rect_area",
    "poly_area",
)

# (feature index -> landmark pair) for the 14 distance features
DISTANCE_PAIRS = (
    ("obs", "obi"),
    ("sa", "sba"),
    ("sa", "pa"),
    ("pa", "sba"),
    ("obi", "sba"),
    ("obi", "pa"),
    ("t", "obs"),
    ("t", "sa"),
    ("t", "pa"),
    ("t", "sba"),
    ("t", "obi"),
    ("pra", "pa"),
    ("intno", "obi"),
    ("intno", "sba"),
)

# outline hexagon, in this cyclic vertex order
HEXAGON_ORDER = ("obs", "sa", "pa", "sba", "obi", "t")


@dataclass(frozen=True)
class LandmarkPoint:
    """A sub-pixel image coordinate (x = column, y = row, y grows downward)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DataError(f"landmark coordinates must be finite, got ({self.x}, {self.y})")
        if self.x < 0 or self.y < 0:
            raise DataError(f"landmark coordinates must be non-negative, got ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def distance(a: LandmarkPoint, b: LandmarkPoint) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class EarLandmarks:
    """The eight anthropometric landmarks of one ear image.

    ``side`` states which ear was annotated; measurements are always taken in
    the left-ear frame (see :meth:`canonicalize`).  Exactly coincident points
    are rejected unless ``allow_coincident`` is set, in which case zero
    distances are tolerated with a warning -- except sa/sba, whose
    coincidence collapses the ear height and is always an error.
    """

    obs: LandmarkPoint
    obi: LandmarkPoint
    t: LandmarkPoint
    sa: LandmarkPoint
    sba: LandmarkPoint
    pa: LandmarkPoint
    pra: LandmarkPoint
    intno: LandmarkPoint
    side: str = "left"
    allow_coincident: bool = False

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise DataError(f"side must be 'left' or 'right', got {self.side!r}")
        pts = self.points()
        if pts["sa"].as_tuple() == pts["sba"].as_tuple():
            raise DegenerateLandmarks("sa and sba coincide: ear height is zero")
        if pts["sa"].y >= pts["sba"].y:
            raise DegenerateLandmarks(
                f"sa must lie above sba (sa.y={pts['sa'].y} >= sba.y={pts['sba'].y})"
            )
        names = list(pts)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                if pts[a].as_tuple() == pts[b].as_tuple():
                    if not self.allow_coincident:
                        raise DegenerateLandmarks(f"landmarks {a} and {b} coincide exactly")
                    warnings.warn(f"landmarks {a} and {b} coincide; distances involving them are 0")

    def points(self) -> dict[str, LandmarkPoint]:
        return {name: getattr(self, name) for name in LANDMARK_NAMES}

    def as_array(self) -> np.ndarray:
        """(8, 2) array of (x, y) rows in LANDMARK_NAMES order."""
        return np.array([getattr(self, n).as_tuple() for n in LANDMARK_NAMES], dtype=float)

    def translate(self, dx: float, dy: float) -> "EarLandmarks":
        moved = {n: LandmarkPoint(p.x + dx, p.y + dy) for n, p in self.points().items()}
        return replace(self, **moved)

    def canonicalize(self, image_width: float | None = None) -> "EarLandmarks":
        """Mirror a right-ear set into the left-ear frame; left sets pass through.

        Mirroring uses ``x -> image_width - x`` when the width is known and
        otherwise reflects about the landmark bounding box, which differs only
        by a horizontal translation and therefore yields identical features.
        After canonicalization pa is expected to be the rightmost of
        {obs, obi, pa}; a violation suggests a mislabeled side and is warned.
        """
        if self.side == "left":
            canon = self
        else:
            pivot = image_width if image_width is not None else max(p.x for p in self.points().values())
            mirrored = {n: LandmarkPoint(pivot - p.x, p.y) for n, p in self.points().items()}
            canon = replace(self, side="left", **mirrored)
        if canon.pa.x < max(canon.obs.x, canon.obi.x):
            warnings.warn(
                "pa is not the rightmost of {obs, obi, pa} after canonicalization; "
                "check the annotated side"
            )
        return canon


def shoelace_area(vertices: np.ndarray) -> float:
    """Absolute shoelace area of a polygon given as an (n, 2) vertex array.

    Terms are accumulated with fsum, so reversing the vertex order negates
    every term exactly and the absolute area is bit-identical.
    """
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    terms = [
        v[i, 0] * v[(i + 1) % n, 1] - v[(i + 1) % n, 0] * v[i, 1] for i in range(n)
    ]
    return 0.5 * abs(math.fsum(terms))


def _segments_touch(p1, p2, p3, p4) -> bool:
    """True if segments p1-p2 and p3-p4 intersect (including endpoint touches)."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0) and (d1 != 0 and d2 != 0)) and (
        (d3 > 0) != (d4 > 0) and (d3 != 0 and d4 != 0)
    ):
        return True
    if d1 == 0 and on_segment(p3, p4, p1):
        return True
    if d2 == 0 and on_segment(p3, p4, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, p3):
        return True
    if d4 == 0 and on_segment(p1, p2, p4):
        return True
    return False


def is_simple_polygon(vertices: np.ndarray) -> bool:
    """True when no two non-adjacent edges of the closed polygon touch."""
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    edges = [(tuple(v[i]), tuple(v[(i + 1) % n])) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):  # adjacent edges share a vertex
                continue
            if _segments_touch(*edges[i], *edges[j]):
                return False
    return True


def rectangle_area(lm: EarLandmarks, image_width: float | None = None) -> float:
    """Axis-aligned ear bounding rectangle area in px².

    Width runs from the innermost face-side point (the smaller of obs.x and
    obi.x in the left-ear frame) to pa.x; height runs from sa.y down to sba.y.
    """
    c = lm.canonicalize(image_width)
    width = c.pa.x - min(c.obs.x, c.obi.x)
    height = c.sba.y - c.sa.y
    if width <= 0 or height <= 0:
        raise DegenerateLandmarks(
            f"ear rectangle collapsed (width={width}, height={height})"
        )
    return width * height


def polygon_area(lm: EarLandmarks) -> float:
    """Absolute area of the ear outline hexagon obs-sa-pa-sba-obi-t in px²."""
    verts = np.array([getattr(lm, n).as_tuple() for n in HEXAGON_ORDER], dtype=float)
    if not is_simple_polygon(verts):
        raise SelfIntersectingPolygon(
            "ear outline hexagon obs-sa-pa-sba-obi-t has crossing edges"
        )
    return shoelace_area(verts)


@dataclass(frozen=True)
class GeometricFeatureVector:
    """The 16 geometric features in FEATURE_NAMES order (14 distances in px,
    2 areas in px²)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(FEATURE_NAMES),):
            raise DataError(f"expected {len(FEATURE_NAMES)} features, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    def __getitem__(self, key):
        if isinstance(key, str):
            return float(self.values[FEATURE_NAMES.index(key)])
        return self.values[key]

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(FEATURE_NAMES, self.values)}


def extract_features(lm: EarLandmarks, image_width: float | None = None) -> GeometricFeatureVector:
    """Compute the 16-feature vector from one landmark set.

    Distances are mirror-invariant; the two areas are computed in the
    canonical left-ear frame.  A zero distance (coincident landmarks admitted
    via ``allow_coincident``) is reported with a warning.
    """
    pts = lm.points()
    dists = []
    for a, b in DISTANCE_PAIRS:
        d = distance(pts[a], pts[b])
        if d == 0.0:
            warnings.warn(f"distance {a}-{b} is exactly 0")
        dists.append(d)
    values = np.array(
        dists + [rectangle_area(lm, image_width), polygon_area(lm)], dtype=float
    )
    return GeometricFeatureVector(values)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-feature training mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray
    fitted_on: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if mean.shape != std.shape or mean.ndim != 1:
            raise DataError("mean and std must be 1-D arrays of equal length")
        if self.fitted_on < 2:
            raise DataError("normalization stats need at least 2 training samples")
        if np.any(std <= 0):
            raise ConstantFeature(int(np.argmax(std <= 0)))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    def to_json(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NormalizationStats":
        return cls(np.array(obj["mean"]), np.array(obj["std"]), int(obj["fitted_on"]))


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        mat = features
    else:
        mat = np.array(
            [f.values if isinstance(f, GeometricFeatureVector) else f for f in features],
            dtype=float,
        )
    if mat.ndim != 2:
        raise DataError(f"expected a 2-D feature matrix, got shape {mat.shape}")
    return np.asarray(mat, dtype=float)


def fit_normalizer(train_features) -> NormalizationStats:
    """Fit per-column mean and population std (divide by n) on training rows.

    Raises ConstantFeature for any zero-variance column.
    """
    mat = _as_matrix(train_features)
    n = mat.shape[0]
    if n < 2:
        raise DataError(f"need at least 2 training rows to fit a normalizer, got {n}")
    for j in range(mat.shape[1]):
        if mat[:, j].max() == mat[:, j].min():
            raise ConstantFeature(j)
    return NormalizationStats(mat.mean(axis=0), mat.std(axis=0, ddof=0), n)


def apply_normalizer(features, stats: NormalizationStats):
    """Z-score features with training-set stats; works on a vector or matrix."""
    if isinstance(features, GeometricFeatureVector):
        return GeometricFeatureVector((features.values - stats.mean) / stats.std)
    arr = np.asarray(features, dtype=float)
    if arr.shape[-1] != stats.mean.shape[0]:
        raise DataError(
            f"feature dimension {arr.shape[-1]} does not match stats dimension {stats.mean.shape[0]}"
        )
    return (arr - stats.mean) / stats.std


@dataclass(frozen=True)
class FeatureMask:
    """Boolean feature subset produced by importance thresholding."""

    selected: np.ndarray
    threshold: float

    def __post_init__(self):
        sel = np.asarray(self.selected, dtype=bool)
        if sel.ndim != 1:
            raise DataError("selected must be a 1-D boolean array")
        if not sel.any():
            raise EmptySelection("feature mask selects nothing")
        object.__setattr__(self, "selected", sel)

    @property
    def n_selected(self) -> int:
        return int(self.selected.sum())

    def names(self, all_names=FEATURE_NAMES) -> list[str]:
        return [n for n, keep in zip(all_names, self.selected) if keep]

    def apply(self, features):
        if isinstance(features, GeometricFeatureVector):
            return features.values[self.selected]
        arr = np.asarray(features, dtype=float)
        return arr[..., self.selected]

    @classmethod
    def from_names(cls, names, all_names=FEATURE_NAMES, threshold: float = float("nan")) -> "FeatureMask":
        unknown = set(names) - set(all_names)
        if unknown:
            raise DataError(f"unknown feature names: {sorted(unknown)}")
        return cls(np.array([n in set(names) for n in all_names]), threshold)

    def to_json(self) -> dict:
        return {"selected": [bool(b) for b in self.selected], "threshold": self.threshold}

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureMask":
        return cls(np.array(obj["selected"], dtype=bool), float(obj["threshold"]))


def select_features(importances, threshold: float | None = None) -> FeatureMask:
    """Keep features whose importance is >= threshold (default: the mean).

    Importances are expected non-negative and normalized to sum 1, as
    produced by a trained forest.
    """
    imp = np.asarray(importances, dtype=float)
    if imp.ndim != 1 or np.any(imp < 0):
        raise DataError("importances must be a 1-D non-negative vector")
    if abs(imp.sum() - 1.0) > 1e-6:
        raise DataError(f"importances must sum to 1, got {imp.sum()}")
    thr = float(imp.mean()) if threshold is None else float(threshold)
    selected = imp >= thr
    if not selected.any():
        raise EmptySelection(f"no importance reaches threshold {thr}")
    return FeatureMask(selected, thr)


# ---------------------------------------------------------------------------
# file formats


def landmarks_to_json(lm: EarLandmarks, image: str) -> dict:
    return {
        "image": image,
        "side": lm.side,
        "landmarks": {n: [getattr(lm, n).x, getattr(lm, n).y] for n in LANDMARK_NAMES},
    }


def landmarks_from_json(obj: dict) -> tuple[EarLandmarks, str]:
    """Parse and validate one landmark file payload.

    Raises DataError with a field-level message on the first violation so the
    annotation server can surface it.
    """
    if not isinstance(obj, dict):
        raise DataError("landmark payload must be a JSON object")
    for key in ("image", "side", "landmarks"):
        if key not in obj:
            raise DataError(f"missing field: {key}")
    if obj["side"] not in ("left", "right"):
        raise DataError(f"side: must be 'left' or 'right', got {obj['side']!r}")
    raw = obj["landmarks"]
    if not isinstance(raw, dict):
        raise DataError("landmarks: must be an object of name -> [x, y]")
    points = {}
    for name in LANDMARK_NAMES:
        if name not in raw:
            raise DataError(f"landmarks.{name}: missing")
        coords = raw[name]
        if (
            not isinstance(coords, (list, tuple))
            or len(coords) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in coords)
        ):
            raise DataError(f"landmarks.{name}: expected [x, y] numbers, got {coords!r}")
        try:
            points[name] = LandmarkPoint(float(coords[0]), float(coords[1]))
        except DataError as exc:
            raise DataError(f"landmarks.{name}: {exc}") from exc
    try:
        lm = EarLandmarks(side=obj["side"], **points)
    except DegenerateLandmarks as exc:
        raise DegenerateLandmarks(f"landmarks: {exc}") from exc
    return lm, str(obj["image"])


def load_landmarks(path) -> tuple[EarLandmarks, str]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return landmarks_from_json(obj)
    except DataError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def save_landmarks(path, lm: EarLandmarks, image: str):
    Path(path).write_text(
        json.dumps(landmarks_to_json(lm, image), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_features_csv(path, rows: list[tuple[str, GeometricFeatureVector]]):
    """Write one row per subject: subject_id plus the 16 named features."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("subject_id",) + FEATURE_NAMES)
        for subject_id, vec in rows:
            writer.writerow([subject_id] + [repr(float(v)) for v in vec.values])


def read_features_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != ("subject_id",) + FEATURE_NAMES:
            raise DataError(f"{path}: unexpected feature CSV header")
        ids, rows = [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 1 + len(FEATURE_NAMES):
                raise DataError(f"{path}:{line_no}: expected {1 + len(FEATURE_NAMES)} columns")
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    return ids, np.array(rows, dtype=float)
