import numpy as np
import pytest

from earmetrics.geometry import EarLandmarks, LandmarkPoint

# A plausible left-ear landmark layout in image coordinates (y grows down).
LEFT_EAR_TEMPLATE = {
    "obs": (20.0, 30.0),
    "obi": (15.0, 95.0),
    "t": (30.0, 65.0),
    "sa": (45.0, 10.0),
    "sba": (25.0, 110.0),
    "pa": (80.0, 60.0),
    "pra": (18.0, 55.0),
    "intno": (32.0, 80.0),
}


def make_landmarks(jitter: float = 0.0, rng: np.random.Generator | None = None,
                   side: str = "left", scale: float = 1.0, offset=(0.0, 0.0)) -> EarLandmarks:
    """Build a valid landmark set from the template, optionally jittered/scaled."""
    rng = rng or np.random.default_rng(0)
    pts = {}
    for name, (x, y) in LEFT_EAR_TEMPLATE.items():
        dx, dy = (rng.uniform(-jitter, jitter, size=2) if jitter else (0.0, 0.0))
        pts[name] = LandmarkPoint(scale * x + dx + offset[0], scale * y + dy + offset[1])
    lm = EarLandmarks(side="left", **pts)
    if side == "right":
        width = max(p.x for p in pts.values()) + 10.0
        mirrored = {n: LandmarkPoint(width - p.x, p.y) for n, p in pts.items()}
        lm = EarLandmarks(side="right", **mirrored)
    return lm


def random_landmark_sets(n: int, seed: int = 0, jitter: float = 4.0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        try:
            out.append(make_landmarks(jitter=jitter, rng=rng))
        except Exception:
            continue  # jitter occasionally breaks an invariant; redraw
    return out


@pytest.fixture
def landmarks() -> EarLandmarks:
    return make_landmarks()
