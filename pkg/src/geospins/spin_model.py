"""Potentials, energies, and tempered norms for vector spin fields.

A spin field assigns a vector in R^m to every point of a configuration.
Pair interactions have finite range R and polynomial growth; the single
site potential grows like a_V |u|^q, which keeps exp(-V) integrable and
compensates the unbounded interaction terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometric_graph import GeometricGraph, WeightParams
from .point_process import Configuration

__all__ = [
    "ModelError",
    "SpinField",
    "PairPotential",
    "SinglePotential",
    "ModelParams",
    "ValidityReport",
    "validate_params",
    "pair_energy",
    "local_energy",
    "tempered_norm",
    "tempered_norm_power",
]


class ModelError(ValueError):
    """Invalid model parameters or mismatched field domains."""


@dataclass(frozen=True, eq=False)
class SpinField:
    """Assignment x -> sigma(x) in R^m over the points of a configuration."""

    configuration: Configuration
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.ndim != 2 or vals.shape[0] != self.configuration.n_points:
            raise ModelError(
                "field values must have one row per configuration point"
            )
        if vals.size and not np.all(np.isfinite(vals)):
            raise ModelError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpinField):
            return NotImplemented
        return self.configuration == other.configuration and np.array_equal(
            self.values, other.values
        )

    @property
    def spin_dim(self) -> int:
        return self.values.shape[1]

    def magnitudes(self) -> np.ndarray:
        return np.sqrt((self.values * self.values).sum(axis=1))

    def scaled(self, factor: float) -> "SpinField":
        return SpinField(self.configuration, self.values * float(factor))


@dataclass(frozen=True, eq=False)
class PairPotential:
    """Finite-range pair interaction W_xy(u, v) = profile(|x-y|) * coupling(u, v).

    Two couplings are supported:

    * ``bilinear``: coupling(u, v) = u . (matrix @ v) with a fixed symmetric
      m x m matrix; the ferromagnetic convention is that coupling strength
      J > 0 means matrix = -J * identity (alignment lowers the energy).
    * ``custom_polynomial``: coupling(u, v) = sum_k c_k (u . v)^k.

    The radial profile is constant on [0, R] and zero beyond; range checks
    compare squared distances so that adjacency and interaction support
    agree bit for bit.
    """

    kind: str
    radius: float
    spin_dim: int
    matrix: np.ndarray | None = None
    poly_coeffs: tuple[float, ...] = ()
    profile_value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bilinear", "custom_polynomial"):
            raise ModelError(f"unknown pair potential kind {self.kind!r}")
        if not self.radius > 0:
            raise ModelError("interaction radius must be > 0")
        if self.spin_dim < 1:
            raise ModelError("spin dimension must be >= 1")
        if self.kind == "bilinear":
            if self.matrix is None:
                raise ModelError("bilinear potential needs a matrix")
            mat = np.asarray(self.matrix, dtype=np.float64)
            if mat.shape != (self.spin_dim, self.spin_dim):
                raise ModelError("matrix must be m x m")
            if not np.allclose(mat, mat.T):
                raise ModelError("matrix must be symmetric")
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)
        else:
            if not self.poly_coeffs:
                raise ModelError("custom_polynomial needs coefficients")
            object.__setattr__(
                self, "poly_coeffs", tuple(float(c) for c in self.poly_coeffs)
            )

    @classmethod
    def ferromagnetic(
        cls, coupling: float, radius: float, spin_dim: int = 1
    ) -> "PairPotential":
        return cls(
            kind="bilinear",
            radius=radius,
            spin_dim=spin_dim,
            matrix=-float(coupling) * np.eye(spin_dim),
        )

    @classmethod
    def zero(cls, radius: float, spin_dim: int = 1) -> "PairPotential":
        return cls(
            kind="bilinear",
            radius=radius,
            spin_dim=spin_dim,
            matrix=np.zeros((spin_dim, spin_dim)),
        )

    @property
    def growth_exponent(self) -> float:
        """Exponent r of the polynomial growth envelope |W| <= I(|u|^r + |v|^r) + J."""
        if self.kind == "bilinear":
            return 2.0
        return 2.0 * len(self.poly_coeffs)

    @property
    def growth_amplitude(self) -> float:
        if self.kind == "bilinear":
            norm = float(np.linalg.norm(self.matrix, 2))
            return abs(self.profile_value) * norm / 2.0
        return abs(self.profile_value) * sum(abs(c) for c in self.poly_coeffs) / 2.0

    @property
    def growth_offset(self) -> float:
        if self.kind == "bilinear":
            return 0.0
        return abs(self.profile_value) * sum(abs(c) for c in self.poly_coeffs)

    def in_range_sq(self, sqdist: float) -> bool:
        return sqdist <= self.radius * self.radius

    def profile(self, dist: float) -> float:
        return self.profile_value if dist <= self.radius else 0.0

    def coupling(self, u: np.ndarray, v: np.ndarray) -> float:
        u = np.asarray(u, dtype=np.float64).reshape(-1)
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        if u.shape != (self.spin_dim,) or v.shape != (self.spin_dim,):
            raise ModelError("spin dimension mismatch")
        if self.kind == "bilinear":
            if self.spin_dim == 1:  # commutative grouping: swap is bit-exact
                return float(self.matrix[0, 0]) * float(u[0] * v[0])
            return float(u @ self.matrix @ v)
        dot = float(u @ v)
        acc = 0.0
        for k, c in enumerate(self.poly_coeffs, start=1):
            acc += c * dot**k
        return acc

    def coupling_grid(self, grid: np.ndarray) -> np.ndarray:
        """coupling(u, v) on the tensor grid of scalar spins (m = 1 only)."""
        if self.spin_dim != 1:
            raise ModelError("grid coupling is defined for spin dimension 1")
        outer = np.multiply.outer(grid, grid)
        if self.kind == "bilinear":
            return float(self.matrix[0, 0]) * outer
        acc = np.zeros_like(outer)
        for k, c in enumerate(self.poly_coeffs, start=1):
            acc += c * outer**k
        return acc


def pair_energy(
    potential: PairPotential,
    x: np.ndarray,
    y: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
) -> float:
    """Interaction energy of spins u at x and v at y; zero beyond the range."""
    dx = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    sq = float((dx * dx).sum())
    if not potential.in_range_sq(sq):
        return 0.0
    return potential.profile_value * potential.coupling(u, v)


@dataclass(frozen=True)
class SinglePotential:
    """Radial single-spin potential V(u) = a |u|^q - kappa |u|^2.

    ``stability_coefficient`` / ``stability_offset`` report constants
    (a_V, b_V) with V(u) >= a_V |u|^q - b_V for all u: with no quadratic
    term these are (a, 0); otherwise a_V = a/2 and b_V is the closed-form
    maximum of kappa t^2 - (a/2) t^q.  Exponents q <= 2 can be constructed
    (useful as exact oracles) but fail model validation.
    """

    coefficient: float
    exponent: float
    quadratic_coefficient: float = 0.0

    def __post_init__(self):
        if not self.coefficient > 0:
            raise ModelError("leading coefficient must be > 0")
        if not self.exponent > 0:
            raise ModelError("exponent must be > 0")
        if self.quadratic_coefficient < 0:
            raise ModelError("quadratic coefficient must be >= 0")
        if self.quadratic_coefficient > 0 and self.exponent <= 2:
            raise ModelError("quadratic term needs exponent > 2 for stability")

    @property
    def stability_coefficient(self) -> float:
        if self.quadratic_coefficient == 0.0:
            return self.coefficient
        return self.coefficient / 2.0

    @property
    def stability_offset(self) -> float:
        kappa = self.quadratic_coefficient
        if kappa == 0.0:
            return 0.0
        a, q = self.coefficient / 2.0, self.exponent
        t_star = (2.0 * kappa / (q * a)) ** (1.0 / (q - 2.0))
        return kappa * t_star**2 - a * t_star**q

    def value_radial(self, magnitude):
        t = np.asarray(magnitude, dtype=np.float64)
        out = self.coefficient * t**self.exponent
        if self.quadratic_coefficient:
            out = out - self.quadratic_coefficient * t * t
        return out

    def __call__(self, u) -> float:
        u = np.asarray(u, dtype=np.float64).reshape(-1)
        return float(self.value_radial(np.sqrt((u * u).sum())))


@dataclass(frozen=True)
class ModelParams:
    """Full model: pair potential, single-site potential, temperedness knobs.

    ``alpha`` is the decay rate of the norm weights, ``p`` the norm
    exponent, ``order`` the number of bounded correlation orders assumed of
    the disorder (written M elsewhere).  The derived exponent
    p' = 2/(p - 2) is the degree-product power entering the moment bounds.
    """

    pair: PairPotential
    single: SinglePotential
    alpha: float
    p: float
    order: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ModelError("alpha must be > 0")
        if not self.p > 2:
            raise ModelError("norm exponent p must be > 2")
        if self.order < 2:
            raise ModelError("correlation order must be >= 2")

    @property
    def p_prime(self) -> float:
        return 2.0 / (self.p - 2.0)

    def weight_params(self, config: Configuration) -> WeightParams:
        return WeightParams(alpha=self.alpha, origin=config.window.origin)


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of the parameter-window checks, one entry per inequality."""

    checks: tuple[tuple[str, bool, str], ...]

    @property
    def valid(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def violations(self) -> tuple[str, ...]:
        return tuple(name for name, ok, _ in self.checks if not ok)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "checks": [
                {"name": name, "ok": ok, "detail": detail}
                for name, ok, detail in self.checks
            ],
        }


def validate_params(params: ModelParams) -> ValidityReport:
    """Check the admissible parameter window; report every violated inequality."""
    q = params.single.exponent
    M = params.order
    p = params.p
    r_w = params.pair.growth_exponent
    checks = []
    checks.append(("q > 2", q > 2, f"q = {q}"))
    if q > 2:
        lhs = 2.0 * q / (q - 2.0)
        checks.append(
            ("M > 2q/(q-2)", M > lhs, f"M = {M}, 2q/(q-2) = {lhs}")
        )
    else:
        checks.append(("M > 2q/(q-2)", False, f"undefined for q = {q} <= 2"))
    if M > 2:
        lo = 2.0 * M / (M - 2.0)
        checks.append(
            ("p >= 2M/(M-2)", p >= lo, f"p = {p}, 2M/(M-2) = {lo}")
        )
    else:
        checks.append(("p >= 2M/(M-2)", False, f"undefined for M = {M} <= 2"))
    checks.append(("p <= q", p <= q, f"p = {p}, q = {q}"))
    checks.append(("r_W < p", r_w < p, f"r_W = {r_w}, p = {p}"))
    checks.append(
        ("a_V > 0", params.single.stability_coefficient > 0,
         f"a_V = {params.single.stability_coefficient}")
    )
    checks.append(("alpha > 0", params.alpha > 0, f"alpha = {params.alpha}"))
    return ValidityReport(checks=tuple(checks))


def _positions(config: Configuration, indices: np.ndarray) -> dict[int, int]:
    return {int(g): k for k, g in enumerate(indices)}


def local_energy(
    graph: GeometricGraph,
    volume: np.ndarray,
    sigma: np.ndarray,
    boundary: np.ndarray,
    potential: PairPotential,
) -> float:
    """Relative interaction energy of spins on a finite volume.

    ``volume`` holds vertex indices, ``sigma`` the spins on those vertices
    (row k for volume[k]), ``boundary`` a full field over the
    configuration of which only the rows outside the volume are read.
    Pairs are enumerated through the graph adjacency, which is exact
    because the interaction vanishes beyond the graph radius.
    """
    volume = np.asarray(volume, dtype=np.int64)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    boundary = np.atleast_2d(np.asarray(boundary, dtype=np.float64))
    config = graph.configuration
    if sigma.shape != (len(volume), potential.spin_dim):
        raise ModelError("sigma must have one row per volume vertex")
    if boundary.shape != (config.n_points, potential.spin_dim):
        raise ModelError("boundary must cover the whole configuration")
    if len(volume) and (volume.min() < 0 or volume.max() >= config.n_points):
        raise ModelError("volume indices out of range")
    if len(np.unique(volume)) != len(volume):
        raise ModelError("volume indices must be distinct")
    pos = _positions(config, volume)
    in_vol = np.zeros(config.n_points, dtype=bool)
    in_vol[volume] = True
    j0 = potential.profile_value
    total = 0.0
    for k, x in enumerate(volume):
        u = sigma[k]
        for y in graph.adjacency[int(x)]:
            y = int(y)
            if in_vol[y]:
                if y > x:  # each internal edge once
                    total += j0 * potential.coupling(u, sigma[pos[y]])
            else:
                total += j0 * potential.coupling(u, boundary[y])
    return total


def tempered_norm_power(
    values: np.ndarray, weights: np.ndarray, p: float
) -> float:
    """sum_x |sigma(x)|^p w(x) for raw value rows and precomputed weights."""
    vals = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if vals.shape[0] == 0:
        return 0.0
    mags = np.sqrt((vals * vals).sum(axis=1))
    return float(np.sum(mags**p * weights))


def tempered_norm(field: SpinField, w: WeightParams, p: float) -> float:
    """Weighted l^p norm (sum_x |sigma(x)|^p exp(-alpha |x|))^(1/p)."""
    if not p >= 1:
        raise ModelError("norm exponent must be >= 1")
    if field.configuration.n_points == 0:
        return 0.0
    weights = w.weights(field.configuration.points)
    return tempered_norm_power(field.values, weights, p) ** (1.0 / p)
