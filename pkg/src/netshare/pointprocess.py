"""Multi-operator transmitter deployments in a disc window around the user.

Two representations are used. :class:`Deployment` holds one realisation as
per-operator coordinate arrays and is what the public helpers take and
return. :class:`PointBlock` packs many realisations into flat arrays with an
offset table so the Monte-Carlo kernels can walk them without Python
overhead. Within a block the points of each realisation are ordered by
operator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels

__all__ = [
    "Window",
    "GppParams",
    "Deployment",
    "PointBlock",
    "sample_ppp",
    "sample_gpp",
    "sample_ppp_block",
    "sample_gpp_block",
    "apply_exclusion_zones",
    "exclusion_mask_block",
    "excluded_fraction",
    "nearest_point",
]

POINTS_PER_OPERATOR = 500


@dataclass(frozen=True)
class Window:
    """Disc of the given radius centred on the reference user."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"window radius must be positive, got {self.radius}")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @classmethod
    def for_densities(cls, densities, points: int = POINTS_PER_OPERATOR) -> "Window":
        """Smallest disc holding ``points`` expected points of the sparsest operator."""
        positive = [d for d in densities if d > 0]
        if not positive:
            raise ValueError("at least one positive density is required to size the window")
        return cls(math.sqrt(points / (min(positive) * math.pi)))


@dataclass(frozen=True)
class GppParams:
    """Gauss-Poisson clusters shared by two operators.

    Cluster centres form a PPP of ``cluster_intensity``; with probability
    ``pair_probability`` a companion sits uniformly on the circle of radius
    ``pair_radius`` around the centre. Centres belong to operator 0 and
    companions to operator 1 unless ``randomize_assignment`` flips each
    cluster with probability 1/2.
    """

    cluster_intensity: float = 1.0
    pair_probability: float = 1.0
    pair_radius: float = 0.0
    randomize_assignment: bool = False

    def __post_init__(self):
        if not self.cluster_intensity > 0:
            raise ValueError(f"cluster intensity must be positive, got {self.cluster_intensity}")
        if not 0.0 <= self.pair_probability <= 1.0:
            raise ValueError(f"pair probability must lie in [0, 1], got {self.pair_probability}")
        if not self.pair_radius >= 0:
            raise ValueError(f"pair radius must be non-negative, got {self.pair_radius}")

    @property
    def densities(self) -> tuple:
        if self.randomize_assignment:
            half = 0.5 * self.cluster_intensity * (1.0 + self.pair_probability)
            return (half, half)
        return (self.cluster_intensity, self.cluster_intensity * self.pair_probability)


@dataclass
class Deployment:
    """One realisation: per-operator points and per-point band permissions.

    ``band_mask[n][i, k]`` tells whether transmitter ``i`` of operator ``n``
    may use band ``k``.
    """

    points: list
    band_mask: list = None
    window: Window = None

    def __post_init__(self):
        self.points = [np.asarray(p, dtype=float).reshape(-1, 2) for p in self.points]
        n = len(self.points)
        if self.band_mask is None:
            self.band_mask = [np.ones((len(p), n), dtype=bool) for p in self.points]
        else:
            self.band_mask = [np.asarray(m, dtype=bool).reshape(len(p), n)
                              for m, p in zip(self.band_mask, self.points)]
        for k, m in enumerate(self.band_mask):
            if not m[:, k].all():
                raise ValueError(f"operator {k} must always be allowed on its own band")

    @property
    def n_operators(self) -> int:
        return len(self.points)

    def flatten(self):
        """Concatenated ``(xy, op, mask)`` arrays, ordered by operator."""
        xy = np.concatenate(self.points) if self.points else np.empty((0, 2))
        op = np.repeat(np.arange(self.n_operators), [len(p) for p in self.points])
        mask = np.concatenate(self.band_mask) if self.band_mask else np.empty((0, 0), bool)
        return xy, op, mask

    def to_block(self) -> "PointBlock":
        xy, op, _ = self.flatten()
        return PointBlock(xy[:, 0].copy(), xy[:, 1].copy(), op.astype(np.int64),
                          np.array([0, len(op)], dtype=np.int64), self.n_operators)

    def to_csv(self, path) -> None:
        """Rows of ``x, y, operator, band_mask`` (mask as a 0/1 string per band)."""
        xy, op, mask = self.flatten()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "y", "operator", "band_mask"])
            for (x, y), o, m in zip(xy, op, mask):
                writer.writerow([f"{x:.6g}", f"{y:.6g}", int(o), "".join("1" if b else "0" for b in m)])


@dataclass
class PointBlock:
    """Flat storage of many realisations; realisation ``j`` is ``offsets[j]:offsets[j+1]``."""

    x: np.ndarray
    y: np.ndarray
    op: np.ndarray
    offsets: np.ndarray
    n_operators: int
    meta: dict = field(default_factory=dict)

    @property
    def n_realizations(self) -> int:
        return len(self.offsets) - 1

    def deployment(self, j: int, mask: np.ndarray | None = None, window: Window | None = None) -> Deployment:
        s, e = self.offsets[j], self.offsets[j + 1]
        xy = np.column_stack([self.x[s:e], self.y[s:e]])
        op = self.op[s:e]
        pts = [xy[op == n] for n in range(self.n_operators)]
        masks = None if mask is None else [mask[s:e][op == n] for n in range(self.n_operators)]
        return Deployment(pts, masks, window)


def _uniform_disc(n: int, radius: float, rng: np.random.Generator):
    """Uniform points in a disc by rejection from the bounding square."""
    xs, ys, have = [], [], 0
    while have < n:
        want = int((n - have) * 1.3) + 16
        u = 2.0 * rng.random((want, 2)) - 1.0
        u = u[u[:, 0] ** 2 + u[:, 1] ** 2 <= 1.0]
        xs.append(u[:, 0])
        ys.append(u[:, 1])
        have += len(u)
    x = np.concatenate(xs)[:n] if xs else np.empty(0)
    y = np.concatenate(ys)[:n] if ys else np.empty(0)
    return radius * x, radius * y


def sample_ppp_block(densities, window: Window, n_realizations: int,
                     rng: np.random.Generator) -> PointBlock:
    """Independent PPPs, one per operator, for ``n_realizations`` windows."""
    densities = np.asarray(densities, dtype=float)
    if np.any(densities < 0):
        raise ValueError("densities must be non-negative")
    n_ops = len(densities)
    counts = rng.poisson(densities * window.area, size=(n_realizations, n_ops))
    x, y = _uniform_disc(int(counts.sum()), window.radius, rng)
    op = np.repeat(np.tile(np.arange(n_ops, dtype=np.int64), n_realizations), counts.ravel())
    offsets = np.concatenate([[0], np.cumsum(counts.sum(axis=1))]).astype(np.int64)
    return PointBlock(x, y, op, offsets, n_ops)


def sample_gpp_block(params: GppParams, window: Window, n_realizations: int,
                     rng: np.random.Generator) -> PointBlock:
    """Gauss-Poisson two-operator deployments.

    Centres are drawn in the disc enlarged by ``pair_radius`` so that
    companions of clusters centred outside the window are not lost; both
    centres and companions are then clipped to the window.
    """
    R, u = window.radius, params.pair_radius
    counts = rng.poisson(params.cluster_intensity * math.pi * (R + u) ** 2, size=n_realizations)
    m = int(counts.sum())
    cx, cy = _uniform_disc(m, R + u, rng)
    paired = rng.random(m) < params.pair_probability
    phi = 2.0 * np.pi * rng.random(m)
    centre_op = np.zeros(m, dtype=np.int64)
    if params.randomize_assignment:
        centre_op = (rng.random(m) < 0.5).astype(np.int64)
    real = np.repeat(np.arange(n_realizations, dtype=np.int64), counts)

    x = np.concatenate([cx, (cx + u * np.cos(phi))[paired]])
    y = np.concatenate([cy, (cy + u * np.sin(phi))[paired]])
    op = np.concatenate([centre_op, 1 - centre_op[paired]])
    real = np.concatenate([real, real[paired]])
    keep = x * x + y * y <= R * R
    x, y, op, real = x[keep], y[keep], op[keep], real[keep]
    order = np.lexsort((op, real))
    offsets = np.concatenate([[0], np.cumsum(np.bincount(real, minlength=n_realizations))])
    return PointBlock(x[order], y[order], op[order], offsets.astype(np.int64), 2)


def sample_ppp(intensity: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP in the window as an ``(m, 2)`` array."""
    if not intensity >= 0:
        raise ValueError(f"intensity must be non-negative, got {intensity}")
    block = sample_ppp_block([intensity], window, 1, rng)
    return np.column_stack([block.x, block.y])


def sample_gpp(params: GppParams, window: Window, rng: np.random.Generator):
    """One Gauss-Poisson realisation as ``(operator-0 points, operator-1 points)``."""
    dep = sample_gpp_block(params, window, 1, rng).deployment(0)
    return dep.points[0], dep.points[1]


def apply_exclusion_zones(deployment: Deployment, radius: float) -> Deployment:
    """Return a copy whose band masks honour exclusion discs of ``radius``.

    A transmitter of operator ``j`` loses band ``n != j`` when some operator-``n``
    transmitter lies at distance ``<= radius``. ``radius == 0`` switches
    coordination off.
    """
    if not radius >= 0:
        raise ValueError(f"exclusion radius must be non-negative, got {radius}")
    n_ops = deployment.n_operators
    masks = [np.ones((len(p), n_ops), dtype=bool) for p in deployment.points]
    if radius > 0:
        for n, own in enumerate(deployment.points):
            if len(own) == 0:
                continue
            tree = cKDTree(own)
            for j, pts in enumerate(deployment.points):
                if j == n or len(pts) == 0:
                    continue
                hits = tree.query_ball_point(pts, r=radius, return_length=True)
                masks[j][:, n] = hits == 0
    return Deployment(deployment.points, masks, deployment.window)


def exclusion_mask_block(block: PointBlock, radius: float) -> np.ndarray:
    """Band permissions for every point of a block, ``(n_points, n_operators)``."""
    if not radius >= 0:
        raise ValueError(f"exclusion radius must be non-negative, got {radius}")
    if radius == 0:
        return np.ones((len(block.op), block.n_operators), dtype=bool)
    return _kernels.exclusion_mask(block.x, block.y, block.op, block.offsets,
                                   block.n_operators, float(radius))


def excluded_fraction(block: PointBlock, mask: np.ndarray, radius: float, window: Window):
    """Count of (transmitter, foreign band) pairs that are switched off.

    Only transmitters at least ``radius`` inside the window edge are counted,
    so every counted transmitter sees a complete exclusion disc. Returns
    ``(excluded, total)``.
    """
    inner = window.radius - radius
    if inner <= 0:
        return 0, 0
    inside = block.x**2 + block.y**2 <= inner * inner
    foreign = np.ones_like(mask, dtype=bool)
    foreign[np.arange(len(block.op)), block.op] = False
    sel = foreign & inside[:, None]
    return int(np.count_nonzero(sel & ~mask)), int(np.count_nonzero(sel))


def nearest_point(point_sets, origin=(0.0, 0.0), subset=None):
    """Closest transmitter among the selected operators.

    ``subset`` is ``None`` (all operators), an operator index, or an iterable
    of indices. Ties go to the lowest operator index, then to the
    lexicographically smallest coordinates. Returns ``(point, operator, distance)``.
    """
    if subset is None:
        chosen = range(len(point_sets))
    elif np.isscalar(subset):
        chosen = [int(subset)]
    else:
        chosen = [int(s) for s in subset]
    pts, ops = [], []
    for n in chosen:
        p = np.asarray(point_sets[n], dtype=float).reshape(-1, 2)
        pts.append(p)
        ops.append(np.full(len(p), n))
    pts = np.concatenate(pts) if pts else np.empty((0, 2))
    if len(pts) == 0:
        raise ValueError("no transmitter in the selected operator subset")
    ops = np.concatenate(ops)
    d2 = np.sum((pts - np.asarray(origin, dtype=float)) ** 2, axis=1)
    best = np.lexsort((pts[:, 1], pts[:, 0], ops, d2))[0]
    return pts[best], int(ops[best]), float(math.sqrt(d2[best]))
