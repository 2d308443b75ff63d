"""Random point configurations in finite boxes.

Provides samplers for the homogeneous Poisson process and a Matérn type-II
hardcore thinning (a concrete process whose correlation functions stay below
the Poisson ones), plus a grid estimator for the first and second order
correlation functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import seed_sequence, stream

__all__ = [
    "SamplingError",
    "Window",
    "Configuration",
    "ProcessSpec",
    "CorrelationEstimate",
    "sample_poisson",
    "sample_matern_hardcore",
    "sample_process",
    "sample_many",
    "estimate_correlation",
]


class SamplingError(ValueError):
    """Invalid sampler parameters, window geometry, or estimator input."""


@dataclass(frozen=True)
class Window:
    """Axis-aligned box in R^n with a marked origin.

    The origin is the reference point of the exponential decay weights
    ``exp(-alpha * |x - origin|)``; it defaults to the box center, which
    maximizes symmetry in a finite box.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper) or not lower:
            raise SamplingError("window corners must have equal, positive length")
        if not all(np.isfinite(lower)) or not all(np.isfinite(upper)):
            raise SamplingError("window corners must be finite")
        if any(u <= l for l, u in zip(lower, upper)):
            raise SamplingError("window must satisfy upper > lower on every axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.origin is None:
            origin = tuple((l + u) / 2.0 for l, u in zip(lower, upper))
        else:
            origin = tuple(float(v) for v in np.atleast_1d(self.origin))
            if len(origin) != len(lower):
                raise SamplingError("origin dimension mismatch")
            if any(o < l or o > u for o, l, u in zip(origin, lower, upper)):
                raise SamplingError("origin must lie inside the closed box")
        object.__setattr__(self, "origin", origin)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def extents(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask: which rows of ``points`` lie in the closed box."""
        pts = np.atleast_2d(points)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((pts >= lo) & (pts <= hi), axis=1)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Finite simple point configuration living in a window."""

    window: Window
    points: np.ndarray
    provenance: str = "manual"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, self.window.dimension)
        if pts.ndim != 2 or pts.shape[1] != self.window.dimension:
            raise SamplingError(
                f"points must have shape (N, {self.window.dimension})"
            )
        if not np.all(np.isfinite(pts)):
            raise SamplingError("points must be finite")
        if len(pts) and not np.all(self.window.contains(pts)):
            raise SamplingError("all points must lie in the window")
        if len(pts) and np.unique(pts, axis=0).shape[0] != len(pts):
            raise SamplingError("points must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.window == other.window
            and self.provenance == other.provenance
            and np.array_equal(self.points, other.points)
        )

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.window.dimension


@dataclass(frozen=True)
class ProcessSpec:
    """Which disorder law to sample: ``poisson`` or ``matern_hardcore``."""

    kind: str
    intensity: float
    hardcore_radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("poisson", "matern_hardcore"):
            raise SamplingError(f"unknown process kind {self.kind!r}")
        if not self.intensity > 0:
            raise SamplingError("intensity must be > 0")
        if self.kind == "matern_hardcore" and not self.hardcore_radius > 0:
            raise SamplingError("matern_hardcore needs hardcore_radius > 0")


def _resolve_stream(seed, *path) -> tuple[np.random.Generator, str]:
    """Accept either a plain integer seed or a pre-split SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        rng = np.random.Generator(np.random.Philox(seed))
        return rng, f"seq{list(np.atleast_1d(seed.entropy))}"
    return stream(int(seed), *path), str(int(seed))


def _poisson_points(window: Window, intensity: float, rng) -> np.ndarray:
    count = int(rng.poisson(intensity * window.volume))
    lo = np.asarray(window.lower)
    span = window.extents
    return lo + rng.random((count, window.dimension)) * span


def sample_poisson(window: Window, intensity: float, seed) -> Configuration:
    """Homogeneous Poisson sample: Poisson count, i.i.d. uniform locations."""
    if not intensity > 0:
        raise SamplingError("intensity must be > 0")
    if not window.volume > 0:
        raise SamplingError("window volume must be > 0")
    rng, label = _resolve_stream(seed, "poisson")
    pts = _poisson_points(window, intensity, rng)
    return Configuration(
        window, pts, provenance=f"poisson(z={intensity!r}) seed={label}"
    )


def sample_matern_hardcore(
    window: Window, intensity: float, hardcore_radius: float, seed
) -> Configuration:
    """Matérn type-II thinning of a Poisson proposal.

    Each proposal point receives an independent uniform mark; a point
    survives iff no proposal point within ``hardcore_radius`` carries a
    strictly smaller mark.  Surviving pairs are therefore farther than the
    hardcore distance apart.
    """
    if not intensity > 0:
        raise SamplingError("intensity must be > 0")
    if not hardcore_radius > 0:
        raise SamplingError("hardcore_radius must be > 0")
    rng, label = _resolve_stream(seed, "matern")
    proposals = _poisson_points(window, intensity, rng)
    marks = rng.random(len(proposals))
    keep = np.ones(len(proposals), dtype=bool)
    if len(proposals) > 1:
        diff = proposals[:, None, :] - proposals[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        close = sq <= hardcore_radius * hardcore_radius
        np.fill_diagonal(close, False)
        killed_by = close & (marks[None, :] < marks[:, None])
        keep = ~killed_by.any(axis=1)
    return Configuration(
        window,
        proposals[keep],
        provenance=(
            f"matern_hardcore(z={intensity!r}, d={hardcore_radius!r}) seed={label}"
        ),
    )


def sample_process(spec: ProcessSpec, window: Window, seed) -> Configuration:
    if spec.kind == "poisson":
        return sample_poisson(window, spec.intensity, seed)
    return sample_matern_hardcore(window, spec.intensity, spec.hardcore_radius, seed)


def sample_many(
    spec: ProcessSpec, window: Window, count: int, seed: int
) -> list[Configuration]:
    """``count`` independent draws; draw k uses the child stream (seed, "draw", k)."""
    if count < 1:
        raise SamplingError("count must be >= 1")
    return [
        sample_process(spec, window, seed_sequence(seed, "draw", k))
        for k in range(count)
    ]


@dataclass(frozen=True, eq=False)
class CorrelationEstimate:
    """Grid estimate of a correlation function of order 1 or 2.

    For order 1 the entries are mean counts per unit volume, cell by cell.
    For order 2 the entries are ordered-pair counts of distinct points
    divided by the product of cell volumes and the number of samples, which
    estimates the second factorial moment density (pair correlation without
    normalization); the matrix is symmetric by construction.
    """

    order: int
    cell_size: float
    grid_shape: tuple[int, ...]
    cell_volumes: np.ndarray
    estimates: np.ndarray
    standard_errors: np.ndarray
    sup_estimate: float
    sample_count: int
    pooled: float
    pooled_se: float

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.grid_shape))


def _cell_grid(window: Window, cell_size: float):
    extents = window.extents
    counts = []
    for ext in extents:
        k = ext / cell_size
        n = int(np.floor(k + 1e-9))
        if k - n > 1e-9:
            n += 1  # clipped last cell
        counts.append(max(n, 1))
    shape = tuple(counts)
    widths = []
    for ext, n in zip(extents, shape):
        w = np.full(n, cell_size)
        w[-1] = ext - (n - 1) * cell_size
        widths.append(w)
    vols = widths[0]
    for w in widths[1:]:
        vols = np.multiply.outer(vols, w)
    return shape, vols.reshape(-1)


def _cell_indices(window: Window, cell_size: float, shape, points: np.ndarray):
    rel = (points - np.asarray(window.lower)) / cell_size
    idx = np.floor(rel).astype(np.int64)
    idx = np.minimum(np.maximum(idx, 0), np.asarray(shape) - 1)
    return np.ravel_multi_index(tuple(idx.T), shape)


def estimate_correlation(
    samples: list[Configuration], order: int, cell_size: float
) -> CorrelationEstimate:
    """Estimate the order-1 or order-2 correlation function on a cell grid."""
    if not samples:
        raise SamplingError("empty sample list")
    if order not in (1, 2):
        raise SamplingError("only correlation orders 1 and 2 are supported")
    window = samples[0].window
    if any(c.window != window for c in samples):
        raise SamplingError("all samples must share one window")
    if not 0 < cell_size <= float(np.min(window.extents)):
        raise SamplingError("cell_size must be positive and fit in the window")

    shape, vols = _cell_grid(window, cell_size)
    n_cells = int(np.prod(shape))
    S = len(samples)
    counts = np.zeros((S, n_cells), dtype=np.float64)
    for s, cfg in enumerate(samples):
        if cfg.n_points:
            flat = _cell_indices(window, cell_size, shape, cfg.points)
            counts[s] = np.bincount(flat, minlength=n_cells)

    if order == 1:
        dens = counts / vols
        est = dens.mean(axis=0)
        se = dens.std(axis=0, ddof=1) / np.sqrt(S) if S > 1 else np.full(n_cells, np.nan)
        per_sample_pooled = counts.sum(axis=1) / vols.sum()
        pooled = float(per_sample_pooled.mean())
        pooled_se = (
            float(per_sample_pooled.std(ddof=1) / np.sqrt(S)) if S > 1 else np.nan
        )
        return CorrelationEstimate(
            order=1,
            cell_size=cell_size,
            grid_shape=shape,
            cell_volumes=vols,
            estimates=est,
            standard_errors=se,
            sup_estimate=float(est.max()),
            sample_count=S,
            pooled=pooled,
            pooled_se=pooled_se,
        )

    # order 2: ordered pairs of distinct points; same-cell pairs are n(n-1)
    pair_sum = counts.T @ counts
    pair_sum[np.diag_indices(n_cells)] -= counts.sum(axis=0)
    sq = counts * counts
    pair_sq = sq.T @ sq  # sum over samples of (n_i n_j)^2, valid off-diagonal
    diag_x = counts * (counts - 1.0)
    pair_sq[np.diag_indices(n_cells)] = (diag_x * diag_x).sum(axis=0)
    vol_pair = np.multiply.outer(vols, vols)
    est = pair_sum / (S * vol_pair)
    mean_x = pair_sum / S
    var_x = np.maximum(pair_sq / S - mean_x * mean_x, 0.0)
    if S > 1:
        se = np.sqrt(var_x * (S / (S - 1.0)) / S) / vol_pair
    else:
        se = np.full_like(est, np.nan)

    dens = counts / vols
    tot = dens.sum(axis=1)
    off_stat = (tot * tot - (dens * dens).sum(axis=1)) / (n_cells * (n_cells - 1))
    pooled = float(off_stat.mean())
    pooled_se = float(off_stat.std(ddof=1) / np.sqrt(S)) if S > 1 else np.nan
    return CorrelationEstimate(
        order=2,
        cell_size=cell_size,
        grid_shape=shape,
        cell_volumes=vols,
        estimates=est,
        standard_errors=se,
        sup_estimate=float(est.max()),
        sample_count=S,
        pooled=pooled,
        pooled_se=pooled_se,
    )
