"""Finite-volume conditional spin distributions: MCMC and quadrature.

The central object is the kernel that fixes boundary spins outside a finite
volume and weights the volume spins by ``exp(-energy)`` against the product
of single-spin measures.  A single-site random-walk Metropolis sampler with
systematic scan targets this kernel for arbitrary volumes; an exact tensor
quadrature over a truncated grid serves as an oracle for volumes of at most
three scalar spins, and certifies the consistency of nested kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .geometric_graph import GeometricGraph
from .point_process import Configuration
from .rng import stream
from .spin_model import (
    ModelError,
    ModelParams,
    SinglePotential,
    SpinField,
    validate_params,
)

__all__ = [
    "SimulationError",
    "KernelSpec",
    "SamplerConfig",
    "KernelSampleSet",
    "QuadratureGrid",
    "DiscreteKernel",
    "DlrReport",
    "DetailedBalanceReport",
    "mcmc_sample",
    "quadrature_kernel",
    "dlr_consistency_check",
    "detailed_balance_check",
]


class SimulationError(RuntimeError):
    """Sampler failure (diverged energy, invalid model)."""


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A finite volume inside a configuration plus a boundary condition.

    ``volume`` holds the vertex indices carrying free spins; ``boundary``
    is a full field over the configuration whose rows outside the volume
    act as the frozen condition (rows inside the volume seed the chain).
    """

    configuration: Configuration
    graph: GeometricGraph
    volume: np.ndarray
    boundary: SpinField
    model: ModelParams

    def __post_init__(self):
        vol = np.unique(np.asarray(self.volume, dtype=np.int64))
        if len(vol) != len(np.asarray(self.volume).reshape(-1)):
            raise ModelError("volume indices must be distinct")
        if len(vol) and (vol.min() < 0 or vol.max() >= self.configuration.n_points):
            raise ModelError("volume indices out of range")
        object.__setattr__(self, "volume", vol)
        if self.graph.configuration is not self.configuration and not (
            self.graph.configuration == self.configuration
        ):
            raise ModelError("graph must be built over the same configuration")
        if self.graph.radius != self.model.pair.radius:
            raise ModelError("graph radius must equal the interaction radius")
        if self.boundary.configuration is not self.configuration and not (
            self.boundary.configuration == self.configuration
        ):
            raise ModelError("boundary field must live on the same configuration")
        if self.boundary.spin_dim != self.model.pair.spin_dim:
            raise ModelError("boundary spin dimension mismatch")

    @property
    def n_sites(self) -> int:
        return len(self.volume)


@dataclass(frozen=True)
class SamplerConfig:
    """Metropolis sweep budget and proposal tuning knobs."""

    burn_in: int
    retained: int
    proposal_scale: float = 1.0
    adapt_window: int = 50
    target_acceptance: float = 0.3
    thinning: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0 or self.retained < 1 or self.thinning < 1:
            raise ModelError("sweep counts must be positive")
        if not self.proposal_scale > 0:
            raise ModelError("proposal scale must be > 0")
        if self.adapt_window < 1:
            raise ModelError("adaptation window must be >= 1")
        if not 0 < self.target_acceptance < 1:
            raise ModelError("target acceptance must be in (0, 1)")


@dataclass(frozen=True, eq=False)
class KernelSampleSet:
    """Retained states of one chain targeting a kernel."""

    volume: np.ndarray
    samples: np.ndarray  # (n_kept, n_sites, spin_dim)
    acceptance_rate: float
    proposal_scale: float
    scale_history: np.ndarray
    traces: dict
    sampler: SamplerConfig

    @property
    def n_kept(self) -> int:
        return self.samples.shape[0]

    def full_fields(self, boundary: SpinField) -> np.ndarray:
        """Merge the retained volume spins with the frozen boundary rows."""
        out = np.repeat(boundary.values[None, :, :], self.n_kept, axis=0)
        out[:, self.volume, :] = self.samples
        return out


class _VolumeSystem:
    """Precomputed per-site interaction structure for one kernel."""

    def __init__(self, spec: KernelSpec):
        model = spec.model
        pair = model.pair
        graph = spec.graph
        xi = spec.boundary.values
        vol = spec.volume
        pos = {int(g): k for k, g in enumerate(vol)}
        in_vol = np.zeros(spec.configuration.n_points, dtype=bool)
        in_vol[vol] = True
        self.pair = pair
        self.single = model.single
        self.m = pair.spin_dim
        self.j0 = pair.profile_value
        self.n_sites = len(vol)
        self.inner: list[np.ndarray] = []  # volume positions of in-volume neighbors
        self.outer_vals: list[np.ndarray] = []  # boundary spins of frozen neighbors
        self.field_const: list[np.ndarray] = []  # bilinear: j0 * sum_y A @ xi(y)
        a = pair.matrix if pair.kind == "bilinear" else None
        for g in vol:
            nbrs = graph.adjacency[int(g)]
            inner = np.asarray([pos[int(y)] for y in nbrs if in_vol[y]], dtype=np.int64)
            outer = np.asarray([int(y) for y in nbrs if not in_vol[y]], dtype=np.int64)
            self.inner.append(inner)
            vals = xi[outer] if outer.size else np.zeros((0, self.m))
            self.outer_vals.append(vals)
            if a is not None:
                self.field_const.append(self.j0 * (vals.sum(axis=0) @ a))
            else:
                self.field_const.append(np.zeros(self.m))

    def delta_interaction(self, state, k, u_old, u_new):
        pair = self.pair
        if pair.kind == "bilinear":
            inner = self.inner[k]
            f = self.field_const[k]
            if inner.size:
                f = f + self.j0 * (state[inner].sum(axis=0) @ pair.matrix)
            return float((u_new - u_old) @ f)
        acc = 0.0
        for j in self.inner[k]:
            acc += pair.coupling(u_new, state[j]) - pair.coupling(u_old, state[j])
        for v in self.outer_vals[k]:
            acc += pair.coupling(u_new, v) - pair.coupling(u_old, v)
        return self.j0 * acc

    def total_energy(self, state) -> float:
        """Interaction energy plus single-site potential of a volume state."""
        pair = self.pair
        total = 0.0
        for k in range(self.n_sites):
            u = state[k]
            if pair.kind == "bilinear":
                inner = self.inner[k]
                half_inner = (
                    0.5 * self.j0 * float(u @ pair.matrix @ state[inner].sum(axis=0))
                    if inner.size
                    else 0.0
                )
                total += half_inner + float(u @ self.field_const[k])
            else:
                for j in self.inner[k]:
                    if j > k:
                        total += self.j0 * pair.coupling(u, state[j])
                for v in self.outer_vals[k]:
                    total += self.j0 * pair.coupling(u, v)
            total += self.single(u)
        return total


def _chain_scalar(system: _VolumeSystem, spec: KernelSpec, cfg: SamplerConfig, rng):
    """Chain loop specialized to scalar spins (plain-float arithmetic)."""
    pair = system.pair
    single = system.single
    a_coef = single.coefficient
    q = single.exponent
    kappa = single.quadratic_coefficient
    bilinear = pair.kind == "bilinear"
    a00 = system.j0 * float(pair.matrix[0, 0]) if bilinear else 0.0
    coeffs = pair.poly_coeffs
    j0 = system.j0
    n_sites = system.n_sites
    inner = [nbrs.tolist() for nbrs in system.inner]
    ext = [float(c[0]) for c in system.field_const]  # bilinear boundary field
    outer_vals = [[float(v[0]) for v in vals] for vals in system.outer_vals]
    state = [float(v) for v in spec.boundary.values[spec.volume, 0]]

    def v_pot(u: float) -> float:
        t = abs(u)
        return a_coef * t**q - kappa * t * t

    def coupling_delta(k: int, u_old: float, u_new: float) -> float:
        if bilinear:
            field = ext[k]
            for j in inner[k]:
                field += a00 * state[j]
            return (u_new - u_old) * field
        acc = 0.0
        for j in inner[k]:
            v = state[j]
            for kk, c in enumerate(coeffs, start=1):
                acc += c * ((u_new * v) ** kk - (u_old * v) ** kk)
        for v in outer_vals[k]:
            for kk, c in enumerate(coeffs, start=1):
                acc += c * ((u_new * v) ** kk - (u_old * v) ** kk)
        return j0 * acc

    def energy() -> float:
        total = 0.0
        for k in range(n_sites):
            u = state[k]
            if bilinear:
                for j in inner[k]:
                    if j > k:
                        total += a00 * u * state[j]
                total += u * ext[k]
            else:
                for j in inner[k]:
                    if j > k:
                        for kk, c in enumerate(coeffs, start=1):
                            total += j0 * c * (u * state[j]) ** kk
                for v in outer_vals[k]:
                    for kk, c in enumerate(coeffs, start=1):
                        total += j0 * c * (u * v) ** kk
            total += v_pot(u)
        return total

    scale = float(cfg.proposal_scale)
    scale_history = [scale]

    def sweep(t_sweep: int) -> int:
        accepted = 0
        steps = rng.standard_normal(n_sites).tolist()
        unifs = rng.random(n_sites).tolist()
        for k in range(n_sites):
            u_old = state[k]
            u_new = u_old + scale * steps[k]
            delta = coupling_delta(k, u_old, u_new) + v_pot(u_new) - v_pot(u_old)
            if delta != delta:  # NaN
                raise SimulationError(f"divergent energy at sweep {t_sweep}, site {k}")
            if delta <= 0.0 or unifs[k] < math.exp(-delta):
                state[k] = u_new
                accepted += 1
        return accepted

    window_acc = 0
    rounds = 0
    for t in range(cfg.burn_in):
        window_acc += sweep(t)
        if (t + 1) % cfg.adapt_window == 0 and n_sites:
            rounds += 1
            rate = window_acc / (cfg.adapt_window * n_sites)
            scale *= math.exp((rate - cfg.target_acceptance) / rounds**0.7)
            scale_history.append(scale)
            window_acc = 0

    n_kept = cfg.retained // cfg.thinning
    samples = np.empty((n_kept, n_sites, 1))
    energy_trace = np.empty(n_kept)
    magnitude_trace = np.empty(n_kept)
    kept = 0
    accepted = 0
    for t in range(cfg.retained):
        accepted += sweep(cfg.burn_in + t)
        if (t + 1) % cfg.thinning == 0 and kept < n_kept:
            samples[kept, :, 0] = state
            energy_trace[kept] = energy()
            magnitude_trace[kept] = (
                sum(abs(u) for u in state) / n_sites if n_sites else 0.0
            )
            kept += 1
    acc_rate = accepted / (cfg.retained * n_sites) if n_sites else float("nan")
    return samples, acc_rate, scale, scale_history, energy_trace, magnitude_trace


def _chain_vector(system: _VolumeSystem, spec: KernelSpec, cfg: SamplerConfig, rng):
    """Generic chain loop for vector spins."""
    n_sites = system.n_sites
    m = system.m
    single = system.single
    state = np.array(spec.boundary.values[spec.volume], dtype=np.float64)
    scale = float(cfg.proposal_scale)
    scale_history = [scale]

    def sweep(t_sweep: int) -> int:
        accepted = 0
        steps = rng.standard_normal((n_sites, m))
        unifs = rng.random(n_sites)
        for k in range(n_sites):
            u_old = state[k]
            u_new = u_old + scale * steps[k]
            delta = (
                system.delta_interaction(state, k, u_old, u_new)
                + single(u_new)
                - single(u_old)
            )
            if math.isnan(delta):
                raise SimulationError(f"divergent energy at sweep {t_sweep}, site {k}")
            if delta <= 0.0 or unifs[k] < math.exp(-delta):
                state[k] = u_new
                accepted += 1
        return accepted

    window_acc = 0
    rounds = 0
    for t in range(cfg.burn_in):
        window_acc += sweep(t)
        if (t + 1) % cfg.adapt_window == 0 and n_sites:
            rounds += 1
            rate = window_acc / (cfg.adapt_window * n_sites)
            scale *= math.exp((rate - cfg.target_acceptance) / rounds**0.7)
            scale_history.append(scale)
            window_acc = 0

    n_kept = cfg.retained // cfg.thinning
    samples = np.empty((n_kept, n_sites, m))
    energy_trace = np.empty(n_kept)
    magnitude_trace = np.empty(n_kept)
    kept = 0
    accepted = 0
    for t in range(cfg.retained):
        accepted += sweep(cfg.burn_in + t)
        if (t + 1) % cfg.thinning == 0 and kept < n_kept:
            samples[kept] = state
            energy_trace[kept] = system.total_energy(state)
            magnitude_trace[kept] = (
                float(np.sqrt((state * state).sum(axis=1)).mean()) if n_sites else 0.0
            )
            kept += 1
    acc_rate = accepted / (cfg.retained * n_sites) if n_sites else float("nan")
    return samples, acc_rate, scale, scale_history, energy_trace, magnitude_trace


def mcmc_sample(
    spec: KernelSpec, cfg: SamplerConfig, *, allow_unvalidated: bool = False
) -> KernelSampleSet:
    """Sample the kernel by single-site random-walk Metropolis sweeps.

    Sites are scanned in a fixed ascending order; the Gaussian proposal
    scale is tuned by Robbins-Monro steps toward the target acceptance
    during burn-in only and frozen afterwards, so the retained sweeps
    target the exact kernel.  Deterministic given the sampler seed.
    Scalar spins run a specialized plain-float loop.
    """
    report = validate_params(spec.model)
    if not report.valid and not allow_unvalidated:
        raise SimulationError(
            "model fails validation: " + ", ".join(report.violations)
        )
    system = _VolumeSystem(spec)
    rng = stream(cfg.seed, "kernel-mcmc")
    runner = _chain_scalar if system.m == 1 else _chain_vector
    samples, acc_rate, scale, scale_history, energy_trace, magnitude_trace = runner(
        system, spec, cfg, rng
    )
    return KernelSampleSet(
        volume=spec.volume,
        samples=samples,
        acceptance_rate=float(acc_rate),
        proposal_scale=scale,
        scale_history=np.asarray(scale_history),
        traces={"energy": energy_trace, "mean_magnitude": magnitude_trace},
        sampler=cfg,
    )


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform trapezoid grid on [-half_width, half_width], odd node count."""

    half_width: float = 3.0
    n_nodes: int = 201

    def __post_init__(self):
        if not self.half_width > 0:
            raise ModelError("half width must be > 0")
        if self.n_nodes < 3 or self.n_nodes % 2 == 0:
            raise ModelError("node count must be odd and >= 3")

    def nodes(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_nodes)

    def weights(self) -> np.ndarray:
        h = 2.0 * self.half_width / (self.n_nodes - 1)
        w = np.full(self.n_nodes, h)
        w[0] = w[-1] = h / 2.0
        return w


def _check_truncation(single: SinglePotential, grid: QuadratureGrid, tol=1e-12):
    density = lambda t: math.exp(-float(single.value_radial(t)))
    tail, _ = quad(density, grid.half_width, np.inf)
    total, _ = quad(density, 0.0, np.inf)
    if not total > 0:
        raise ModelError("single-spin measure has zero mass")
    if tail / total >= tol:
        raise ModelError(
            f"truncation check failed: tail mass {tail / total:.3e} beyond "
            f"half_width {grid.half_width}"
        )


def _axis_shape(values: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = len(values)
    return values.reshape(shape)


def _pair_shape(mat: np.ndarray, ax1: int, ax2: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[ax1] = mat.shape[0]
    shape[ax2] = mat.shape[1]
    if ax1 < ax2:
        return mat.reshape(shape)
    return mat.T.reshape(shape)


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Exact grid representation of a kernel on at most three scalar spins."""

    volume: np.ndarray
    grid: QuadratureGrid
    weights: np.ndarray  # shape (G,)*len(volume), sums to 1

    def expectation(self, fn) -> float:
        """Expectation of fn(u_1, ..., u_k) with one argument per volume site."""
        k = len(self.volume)
        nodes = self.grid.nodes()
        args = [_axis_shape(nodes, i, k) for i in range(k)]
        return float((self.weights * fn(*args)).sum())

    def marginal(self, site_position: int) -> np.ndarray:
        k = len(self.volume)
        axes = tuple(i for i in range(k) if i != site_position)
        return self.weights.sum(axis=axes)


def _external_field_grid(system: _VolumeSystem, k: int, nodes: np.ndarray):
    """Energy of a grid spin at volume site k against its frozen neighbors."""
    pair = system.pair
    if pair.kind == "bilinear":
        return nodes * float(system.field_const[k][0])
    out = np.zeros_like(nodes)
    for v in system.outer_vals[k]:
        dot = nodes * float(v[0])
        for kk, c in enumerate(pair.poly_coeffs, start=1):
            out += system.j0 * c * dot**kk
    return out


def quadrature_kernel(spec: KernelSpec, grid: QuadratureGrid) -> DiscreteKernel:
    """Tensor-product trapezoid discretization of a kernel (m=1, <=3 sites)."""
    if spec.model.pair.spin_dim != 1:
        raise ModelError("quadrature oracle requires spin dimension 1")
    if spec.n_sites > 3:
        raise ModelError("quadrature oracle limited to volumes of <= 3 sites")
    if spec.n_sites == 0:
        raise ModelError("empty volume")
    _check_truncation(spec.model.single, grid)
    system = _VolumeSystem(spec)
    k = spec.n_sites
    nodes = grid.nodes()
    log_chi = np.log(grid.weights()) - spec.model.single.value_radial(np.abs(nodes))
    logw = np.zeros((len(nodes),) * k)
    for i in range(k):
        base = log_chi - _external_field_grid(system, i, nodes)
        logw += _axis_shape(base, i, k)
    pair_mat = system.j0 * spec.model.pair.coupling_grid(nodes)
    for i in range(k):
        for j_pos in system.inner[i]:
            if j_pos > i:
                logw -= _pair_shape(pair_mat, i, int(j_pos), k)
    logw -= logw.max()
    np.exp(logw, out=logw)
    logw /= logw.sum()
    return DiscreteKernel(volume=spec.volume, grid=grid, weights=logw)


@dataclass(frozen=True, eq=False)
class DlrReport:
    """Consistency residuals of a nested pair of kernels at grid level."""

    residuals: dict
    max_residual: float
    grid: QuadratureGrid
    inner_volume: np.ndarray
    outer_volume: np.ndarray


def dlr_consistency_check(
    spec: KernelSpec,
    inner_volume: np.ndarray,
    grid: QuadratureGrid,
    observables: dict,
) -> DlrReport:
    """Compare the nested-kernel composition against the outer kernel.

    ``spec.volume`` is the outer volume; ``inner_volume`` must be a subset.
    Each observable is a callable of the inner-volume node arrays.  The
    composition integrates the inner kernel over the outer one; the report
    returns the largest absolute discrepancy over the observables.
    """
    outer = spec.volume
    inner = np.unique(np.asarray(inner_volume, dtype=np.int64))
    if not np.all(np.isin(inner, outer)):
        raise ModelError("inner volume must be a subset of the outer volume")
    if len(outer) > 3:
        raise ModelError("outer volume limited to 3 sites")
    p2 = quadrature_kernel(spec, grid)
    nodes = grid.nodes()
    g = len(nodes)
    k2 = len(outer)
    axis_of = {int(gl): i for i, gl in enumerate(outer)}
    inner_axes = [axis_of[int(x)] for x in inner]

    # frame: outer sites outside the inner volume adjacent to an inner site
    graph = spec.graph
    inner_set = set(int(x) for x in inner)
    frame = []
    for gl in outer:
        gl = int(gl)
        if gl in inner_set:
            continue
        if any(int(y) in inner_set for y in graph.adjacency[gl]):
            frame.append(gl)
    frame = np.asarray(sorted(frame), dtype=np.int64)
    frame_axes = [axis_of[int(x)] for x in frame]

    # conditional inner kernel on axes (inner sites..., frame sites...)
    pair = spec.model.pair
    j0 = pair.profile_value
    k1 = len(inner)
    kd = len(frame)
    ndim = k1 + kd
    log_chi = np.log(grid.weights()) - spec.model.single.value_radial(np.abs(nodes))
    logw = np.zeros((g,) * ndim)
    pair_mat = j0 * pair.coupling_grid(nodes)
    frame_pos = {int(gl): k1 + d for d, gl in enumerate(frame)}
    for i, gl in enumerate(inner):
        gl = int(gl)
        # fixed part: single-spin weight plus coupling to spins frozen at the
        # boundary field (everything adjacent outside the outer volume)
        fixed = log_chi.copy()
        for y in graph.adjacency[gl]:
            y = int(y)
            if y in inner_set or y in frame_pos:
                continue
            dot = nodes * float(spec.boundary.values[y, 0])
            fixed -= _coupling_curve(pair, j0, dot)
        logw += _axis_shape(fixed, i, ndim)
        for y in graph.adjacency[gl]:
            y = int(y)
            if y in inner_set:
                j = int(np.searchsorted(inner, y))
                if j > i:
                    logw -= _pair_shape(pair_mat, i, j, ndim)
            elif y in frame_pos:
                logw -= _pair_shape(pair_mat, i, frame_pos[y], ndim)
    logw -= logw.max()
    np.exp(logw, out=logw)
    norm = logw.sum(axis=tuple(range(k1)), keepdims=True)
    cond = logw / norm

    # outer marginal on the frame axes
    other_axes = tuple(i for i in range(k2) if i not in frame_axes)
    marg = p2.weights.sum(axis=other_axes) if other_axes else p2.weights

    residuals = {}
    inner_args = [_axis_shape(nodes, i, ndim) for i in range(k1)]
    outer_inner_args = [_axis_shape(nodes, ax, k2) for ax in inner_axes]
    for name, fn in observables.items():
        vals = fn(*inner_args)
        comp = (cond * vals).sum(axis=tuple(range(k1)))  # shape (G,)*kd
        lhs = float((marg * comp).sum())
        rhs = float((p2.weights * fn(*outer_inner_args)).sum())
        residuals[name] = abs(lhs - rhs)
    return DlrReport(
        residuals=residuals,
        max_residual=max(residuals.values()) if residuals else 0.0,
        grid=grid,
        inner_volume=inner,
        outer_volume=outer,
    )


def _coupling_curve(pair, j0: float, dot: np.ndarray) -> np.ndarray:
    """W as a function of the inner-product curve ``dot`` (m = 1)."""
    if pair.kind == "bilinear":
        return j0 * float(pair.matrix[0, 0]) * dot
    out = np.zeros_like(dot)
    for kk, c in enumerate(pair.poly_coeffs, start=1):
        out += j0 * c * dot**kk
    return out


@dataclass(frozen=True, eq=False)
class DetailedBalanceReport:
    """Exact checks of the grid-discretized single-site Metropolis chain."""

    balance_violation: float
    stationarity_residual: float
    row_sum_error: float
    transition_matrix: np.ndarray
    stationary: np.ndarray


def detailed_balance_check(
    target, grid: QuadratureGrid, proposal_scale: float
) -> DetailedBalanceReport:
    """Build the discretized Metropolis matrix and verify its invariances.

    ``target`` is a single-spin potential (energy, negated into weights) or
    an array of unnormalized log-weights over the grid nodes.  The proposal
    is a symmetric discretized Gaussian step with a lazy self-transition
    absorbing the normalization slack.
    """
    nodes = grid.nodes()
    if isinstance(target, SinglePotential):
        logw = -target.value_radial(np.abs(nodes))
    else:
        logw = np.asarray(target, dtype=np.float64)
        if logw.shape != nodes.shape:
            raise ModelError("log-weight array must match the grid")
    pi = np.exp(logw - logw.max())
    pi /= pi.sum()

    diff = nodes[:, None] - nodes[None, :]
    q = np.exp(-(diff * diff) / (2.0 * proposal_scale**2))
    np.fill_diagonal(q, 0.0)
    q /= q.sum(axis=1).max()  # common constant keeps the matrix symmetric
    ratio = np.minimum(1.0, pi[None, :] / pi[:, None])
    p = q * ratio
    np.fill_diagonal(p, 0.0)
    np.fill_diagonal(p, 1.0 - p.sum(axis=1))

    balance = np.abs(pi[:, None] * p - pi[None, :] * p.T).max()
    stationarity = np.abs(pi @ p - pi).max()
    row_err = np.abs(p.sum(axis=1) - 1.0).max()
    return DetailedBalanceReport(
        balance_violation=float(balance),
        stationarity_residual=float(stationarity),
        row_sum_error=float(row_err),
        transition_matrix=p,
        stationary=pi,
    )
