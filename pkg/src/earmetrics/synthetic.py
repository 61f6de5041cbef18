"""Synthetic benchmark data: landmark sets whose scale encodes gender, and
procedurally drawn ear-silhouette images for the transfer benchmark.

Real study data is private, so correctness claims are exercised on generated
data with known structure instead.
"""

from __future__ import annotations

import numpy as np

from .geometry import EarLandmarks, LandmarkPoint, extract_features

# left-ear landmark template (image coordinates, y grows downward)
EAR_TEMPLATE = {
    "obs": (20.0, 30.0),
    "obi": (15.0, 95.0),
    "t": (30.0, 65.0),
    "sa": (45.0, 10.0),
    "sba": (25.0, 110.0),
    "pa": (80.0, 60.0),
    "pra": (18.0, 55.0),
    "intno": (32.0, 80.0),
}


def landmark_set_from_template(scale: float, jitter: np.ndarray, offset=(0.0, 0.0)) -> EarLandmarks:
    pts = {}
    for i, (name, (x, y)) in enumerate(EAR_TEMPLATE.items()):
        pts[name] = LandmarkPoint(
            scale * x + jitter[i, 0] + offset[0], scale * y + jitter[i, 1] + offset[1]
        )
    return EarLandmarks(side="left", **pts)


def gendered_landmark_population(
    n: int,
    seed: int,
    scale_gap_sigmas: float = 3.76,
    log_scale_sigma: float = 0.035,
    jitter_px: float = 1.0,
    male_fraction: float = 0.556,
):
    """Feature matrix + labels where gender determines overall ear scale.

    Per subject the scale is log-normal around a gender-specific mean; the
    means sit ``scale_gap_sigmas`` apart in log-scale units, so the optimal
    rule on scale alone attains Phi(gap/2) accuracy (~0.970 at the default
    3.76 sigma).  Landmarks get small positional jitter on top.

    Returns (features [n, 16], labels [n] with 0=female 1=male, subject_ids).
    """
    rng = np.random.default_rng(seed)
    n_male = int(round(n * male_fraction))
    labels = np.zeros(n, dtype=int)
    labels[rng.permutation(n)[:n_male]] = 1
    half_gap = 0.5 * scale_gap_sigmas * log_scale_sigma
    rows = []
    for i in range(n):
        mu = half_gap if labels[i] else -half_gap
        scale = float(np.exp(rng.normal(mu, log_scale_sigma)))
        jitter = rng.uniform(-jitter_px, jitter_px, size=(8, 2))
        lm = landmark_set_from_template(scale, jitter, offset=(30.0, 30.0))
        rows.append(extract_features(lm).values)
    ids = [f"synth{i:04d}" for i in range(n)]
    return np.array(rows), labels, ids


# ---------------------------------------------------------------------------
# silhouette images


def _filled_ellipse(xx, yy, cx, cy, a, b, theta):
    u = (xx - cx) * np.cos(theta) + (yy - cy) * np.sin(theta)
    v = -(xx - cx) * np.sin(theta) + (yy - cy) * np.cos(theta)
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def draw_ear_silhouette(rng: np.random.Generator, half_width: float, side: int = 64) -> np.ndarray:
    """One grayscale silhouette image with nuisance variation.

    The ear is a bright elongated ellipse with a darker inner concha; its
    position, rotation, aspect ratio, brightness, the background level and
    gradient, distractor blobs and pixel noise all vary, so apparent size is
    the only stable cue for ``half_width``.  Returns a (side, side) float
    array in [0, 1].
    """
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    bg = rng.uniform(20, 80)
    gx, gy = rng.uniform(-0.4, 0.4, size=2)
    img = bg + gx * (xx - side / 2) + gy * (yy - side / 2)

    cx, cy = side / 2 + rng.uniform(-7, 7, size=2)
    theta = rng.uniform(-0.5, 0.5)
    a = half_width * rng.uniform(0.95, 1.05)
    b = a * rng.uniform(1.4, 1.7)
    bright = rng.uniform(140, 220)
    ear = _filled_ellipse(xx, yy, cx, cy, a, b, theta)
    img = np.where(ear, bright, img)
    concha = _filled_ellipse(xx, yy, cx + 0.25 * a, cy, 0.45 * a, 0.45 * b, theta)
    img = np.where(ear & concha, bright - rng.uniform(35, 70), img)

    for _ in range(rng.integers(2, 5)):  # distractor blobs
        dx, dy = rng.uniform(4, side - 4, size=2)
        da = rng.uniform(1.5, 4.0)
        blob = _filled_ellipse(xx, yy, dx, dy, da, da * rng.uniform(0.8, 1.3), rng.uniform(0, np.pi))
        img = np.where(blob & ~ear, img + rng.uniform(30, 90), img)

    img += rng.normal(0, 9, size=img.shape)
    return np.clip(img, 0, 255) / 255.0


def silhouette_dataset(n: int, n_classes: int, seed: int, side: int = 64,
                       radius_range: tuple[float, float] = (6.5, 17.5)):
    """Dataset of silhouettes whose label is the size class of the ear.

    Class c draws its half-width uniformly from the c-th of ``n_classes``
    equal sub-intervals of ``radius_range`` (non-overlapping, so the classes
    are separable in principle).  Returns (x [n,1,side,side], labels [n]).
    """
    rng = np.random.default_rng(seed)
    lo, hi = radius_range
    edges = np.linspace(lo, hi, n_classes + 1)
    labels = rng.integers(0, n_classes, size=n)
    x = np.empty((n, 1, side, side))
    for i, c in enumerate(labels):
        pad = 0.05 * (edges[c + 1] - edges[c])
        half_width = rng.uniform(edges[c] + pad, edges[c + 1] - pad)
        x[i, 0] = draw_ear_silhouette(rng, half_width, side)
    return x, labels


def transfer_benchmark_arch(num_classes: int, side: int = 64) -> list[dict]:
    """Compact network for the silhouette transfer benchmark.

    Pool-first keeps the step cost low, and the deliberately narrow filter
    bank (4 then 8 channels) is a poor basis at random initialization, so
    the value of adapting it on the large domain set is measurable.
    """
    flat = 8 * (side // 8) * (side // 8)
    return [
        {"type": "maxpool"},
        {"type": "conv", "in_channels": 1, "out_channels": 4, "kernel": 3, "stride": 1, "pad": 1},
        {"type": "relu"},
        {"type": "maxpool"},
        {"type": "conv", "in_channels": 4, "out_channels": 8, "kernel": 3, "stride": 1, "pad": 1},
        {"type": "relu"},
        {"type": "maxpool"},
        {"type": "flatten"},
        {"type": "dense", "in_features": flat, "out_features": num_classes},
        {"type": "softmax"},
    ]


def run_transfer_benchmark(
    seed: int,
    domain,
    target,
    test_x,
    test_labels,
    global_lr: float = 0.0001,
    head_multiplier: float = 10.0,
    domain_epochs: int = 12,
    target_epochs: int = 40,
    batch_size: int = 4,
) -> tuple[float, float]:
    """Paired comparison on shared data and seeds.

    Trains one base init two ways -- two-stage (domain then target) versus
    the identical model trained on the target set alone -- and returns their
    test accuracies (two_stage, from_scratch).  The arms share the target
    head initialization, so the difference isolates the domain adaptation.
    """
    from .tinycnn import SgdConfig, accuracy, init_model, replace_head, train, two_stage_finetune

    cfg = SgdConfig(global_lr=global_lr, epochs=1, batch_size=batch_size, seed=seed,
                    last_layer_multiplier=head_multiplier)
    base = init_model(transfer_benchmark_arch(domain.n_classes), num_classes=domain.n_classes,
                      seed=seed, input_shape=domain.x.shape[1:])
    staged, _ = two_stage_finetune(base, domain, target, cfg,
                                   domain_epochs=domain_epochs, target_epochs=target_epochs)
    scratch = replace_head(base, target.n_classes, seed=cfg.seed,
                           lr_multiplier=cfg.last_layer_multiplier)
    train(scratch, target.x, target.labels, cfg, epochs=target_epochs)
    return accuracy(staged, test_x, test_labels), accuracy(scratch, test_x, test_labels)
