"""Experiment drivers over quenched and annealed disorder.

These routines orchestrate chains across nested volumes and disorder draws
to witness, at desk scale, that the finite-volume kernels have tempered
moments bounded uniformly in the volume, that boundary sections obey the
weighted-norm bound, and that volume averages of kernel expectations
stabilize (Cesàro means).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometric_graph import GeometricGraph, build_graph, compute_functionals
from .point_process import Configuration, ProcessSpec, Window, sample_process
from .rng import derive_seed, seed_sequence
from .spin_model import ModelParams, SpinField, tempered_norm_power
from .stats import (
    MannKendallResult,
    NnlsFit,
    batch_means_se,
    ess_ratio,
    mann_kendall,
    nnls_fit,
)
from .local_gibbs import KernelSpec, SamplerConfig, mcmc_sample

__all__ = [
    "ExperimentError",
    "BoundarySection",
    "VolumeSequence",
    "LocalObservable",
    "MomentReport",
    "AnnealedReport",
    "CesaroReport",
    "build_section",
    "nested_volumes",
    "moment_study",
    "annealed_sample",
    "cesaro_study",
]


class ExperimentError(ValueError):
    """Invalid experiment inputs."""


@dataclass(frozen=True)
class BoundarySection:
    """Deterministic rule assigning a boundary spin to every point.

    Rules: ``zero``, ``constant`` (vector of magnitude ``amplitude``), and
    ``radial`` (magnitude ``amplitude * exp(growth_rate * |x|)`` along a
    fixed direction, distances measured from the window origin).  All rules
    satisfy |u(x)| <= amplitude * exp(growth_rate |x|) by construction.
    """

    rule: str
    amplitude: float = 0.0
    growth_rate: float = 0.0
    direction: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if self.rule not in ("zero", "constant", "radial"):
            raise ExperimentError(f"unknown section rule {self.rule!r}")
        if self.amplitude < 0 or self.growth_rate < 0:
            raise ExperimentError("amplitude and growth rate must be >= 0")
        vec = np.asarray(self.direction, dtype=np.float64)
        norm = float(np.sqrt((vec * vec).sum()))
        if not norm > 0:
            raise ExperimentError("direction must be a nonzero vector")
        object.__setattr__(self, "direction", tuple(vec / norm))

    @property
    def spin_dim(self) -> int:
        return len(self.direction)

    def magnitudes(self, config: Configuration) -> np.ndarray:
        if self.rule == "zero":
            return np.zeros(config.n_points)
        if self.rule == "constant":
            return np.full(config.n_points, self.amplitude)
        origin = np.asarray(config.window.origin)
        d = np.sqrt(((config.points - origin) ** 2).sum(axis=1))
        return self.amplitude * np.exp(self.growth_rate * d)


def build_section(rule: BoundarySection, config: Configuration) -> SpinField:
    """Materialize the section rule as a spin field over the configuration."""
    mags = rule.magnitudes(config)
    direction = np.asarray(rule.direction)
    return SpinField(config, np.outer(mags, direction))


@dataclass(frozen=True, eq=False)
class VolumeSequence:
    """Strictly increasing boxes exhausting the window."""

    window: Window
    boxes: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...]

    def __post_init__(self):
        if not self.boxes:
            raise ExperimentError("need at least one volume")
        lo_w, hi_w = np.asarray(self.window.lower), np.asarray(self.window.upper)
        prev_lo = prev_hi = None
        for lo, hi in self.boxes:
            lo, hi = np.asarray(lo), np.asarray(hi)
            if np.any(lo < lo_w) or np.any(hi > hi_w):
                raise ExperimentError("volumes must stay inside the window")
            if prev_lo is not None:
                if not (np.all(lo <= prev_lo) and np.all(hi >= prev_hi)):
                    raise ExperimentError("volumes must be increasing")
                if np.all(lo == prev_lo) and np.all(hi == prev_hi):
                    raise ExperimentError("volume inclusion must be strict")
            prev_lo, prev_hi = lo, hi
        last_lo, last_hi = self.boxes[-1]
        if tuple(last_lo) != self.window.lower or tuple(last_hi) != self.window.upper:
            raise ExperimentError("final volume must equal the window")

    def __len__(self) -> int:
        return len(self.boxes)

    def member_indices(self, config: Configuration, k: int) -> np.ndarray:
        lo, hi = self.boxes[k]
        lo, hi = np.asarray(lo), np.asarray(hi)
        mask = np.all((config.points >= lo) & (config.points <= hi), axis=1)
        return np.flatnonzero(mask).astype(np.int64)


def nested_volumes(window: Window, count: int, ratio: float = 1.3) -> VolumeSequence:
    """Concentric boxes with geometric side growth, last one the window itself."""
    if count < 1:
        raise ExperimentError("count must be >= 1")
    if not ratio > 1:
        raise ExperimentError("growth ratio must be > 1")
    center = np.asarray(window.origin)
    half = window.extents / 2.0
    boxes = []
    for k in range(count - 1):
        f = ratio ** (k + 1 - count)
        boxes.append((tuple(center - f * half), tuple(center + f * half)))
    boxes.append((window.lower, window.upper))
    return VolumeSequence(window=window, boxes=tuple(boxes))


def _norm_powers(
    sample_set, spec: KernelSpec, weights: np.ndarray, p: float
) -> tuple[np.ndarray, float]:
    """Per-sample ||sigma||^p of the merged field, and the frozen tail term."""
    vol = sample_set.volume
    off = np.setdiff1d(np.arange(spec.configuration.n_points), vol)
    tail = tempered_norm_power(
        spec.boundary.values[off], weights[off], p
    ) if off.size else 0.0
    mags = np.sqrt((sample_set.samples**2).sum(axis=2))  # (K, sites)
    inside = (mags**p * weights[vol]).sum(axis=1) if len(vol) else np.zeros(
        sample_set.n_kept
    )
    return inside + tail, tail


@dataclass(frozen=True)
class MomentDesignPoint:
    """One (volume, boundary-scale) cell of a moment study."""

    volume_index: int
    xi_scale: float
    eta_size: int
    moment: float
    moment_se: float
    exp_moment: float
    exp_moment_se: float
    exp_moment_ess: float
    tail_norm_power: float
    acceptance: float


@dataclass(frozen=True, eq=False)
class MomentReport:
    """Tempered-moment estimates across volumes and boundary scales.

    The trend test runs over the base-scale volumes; the nonnegative fit
    regresses every design point on the weighted vertex sum, the weighted
    degree-product sum, and the frozen-tail norm power.
    """

    volumes: VolumeSequence
    design: tuple[MomentDesignPoint, ...]
    base_scale: float
    regressors: np.ndarray  # columns: b_alpha, a_{alpha,p'}, ||xi off volume||^p
    responses: np.ndarray
    fit: NnlsFit
    trend: MannKendallResult
    exp_lambda: float
    xi_hat: float  # log of the largest exponential-moment estimate

    @property
    def base_moments(self) -> np.ndarray:
        return np.asarray(
            [d.moment for d in self.design if d.xi_scale == self.base_scale]
        )


def moment_study(
    config: Configuration,
    volumes: VolumeSequence,
    section: BoundarySection,
    model: ModelParams,
    sampler: SamplerConfig,
    seed: int,
    xi_scales: tuple[float, ...] = (1.0,),
    exp_lambda: float | None = None,
    graph: GeometricGraph | None = None,
) -> MomentReport:
    """Estimate E||sigma||^p under each finite-volume kernel of a fixed draw.

    Spins outside each volume stay frozen at the (scaled) section field;
    the reported moment is the full-field norm power, so the frozen tail
    enters as an additive constant per volume.  Exponential moments use a
    deliberately small rate (default a_V / 10) and carry an effective
    sample size to flag unreliable averages.
    """
    if graph is None:
        graph = build_graph(config, model.pair.radius)
    w = model.weight_params(config)
    weights = w.weights(config.points)
    xi = build_section(section, config)
    lam = 0.1 * model.single.stability_coefficient if exp_lambda is None else exp_lambda
    functionals = compute_functionals(graph, w, model.p_prime, model.order)

    design = []
    rows = []
    responses = []
    for v_idx in range(len(volumes)):
        vol = volumes.member_indices(config, v_idx)
        for s_idx, scale in enumerate(xi_scales):
            boundary = xi.scaled(scale)
            spec = KernelSpec(
                configuration=config,
                graph=graph,
                volume=vol,
                boundary=boundary,
                model=model,
            )
            cfg = SamplerConfig(
                burn_in=sampler.burn_in,
                retained=sampler.retained,
                proposal_scale=sampler.proposal_scale,
                adapt_window=sampler.adapt_window,
                target_acceptance=sampler.target_acceptance,
                thinning=sampler.thinning,
                seed=derive_seed(seed, "moment", v_idx, s_idx),
            )
            try:
                run = mcmc_sample(spec, cfg)
            except Exception as exc:
                raise ExperimentError(
                    f"sampler failed at volume {v_idx}, scale {scale}: {exc}"
                ) from exc
            powers, tail = _norm_powers(run, spec, weights, model.p)
            moment, moment_se = batch_means_se(powers)
            exp_vals = np.exp(lam * powers)
            exp_mean, exp_se = batch_means_se(exp_vals)
            design.append(
                MomentDesignPoint(
                    volume_index=v_idx,
                    xi_scale=scale,
                    eta_size=len(vol),
                    moment=moment,
                    moment_se=moment_se,
                    exp_moment=exp_mean,
                    exp_moment_se=exp_se,
                    exp_moment_ess=ess_ratio(exp_vals),
                    tail_norm_power=tail,
                    acceptance=run.acceptance_rate,
                )
            )
            rows.append([functionals.b, functionals.a, tail])
            responses.append(moment)

    regressors = np.asarray(rows)
    responses = np.asarray(responses)
    fit = nnls_fit(regressors, responses)
    base_scale = xi_scales[0]
    base = [d.moment for d in design if d.xi_scale == base_scale]
    if len(base) >= 3:
        trend = mann_kendall(np.asarray(base))
    else:  # too short for a trend statement
        trend = MannKendallResult(s=0, var_s=0.0, z=0.0, p_increasing=1.0)
    xi_hat = math.log(max(d.exp_moment for d in design))
    return MomentReport(
        volumes=volumes,
        design=tuple(design),
        base_scale=base_scale,
        regressors=regressors,
        responses=responses,
        fit=fit,
        trend=trend,
        exp_lambda=lam,
        xi_hat=xi_hat,
    )


@dataclass(frozen=True, eq=False)
class AnnealedReport:
    """Joint draws of (configuration, spin field) and the growth functional.

    ``phi`` is the weighted vertex sum of the configuration plus the norm
    power of the merged field; a uniform-in-volume bound on its mean is the
    finiteness margin this study witnesses.
    """

    records: tuple[SpinField, ...]
    phi_values: np.ndarray
    phi_mean: float
    phi_se: float
    b_values: np.ndarray
    norm_powers: np.ndarray
    eta_sizes: np.ndarray
    acceptance: np.ndarray


def annealed_sample(
    process: ProcessSpec,
    window: Window,
    region: tuple[tuple[float, ...], tuple[float, ...]],
    section: BoundarySection,
    model: ModelParams,
    sampler: SamplerConfig,
    num_disorder: int,
    seed: int,
    threads: int = 1,
) -> AnnealedReport:
    """Draw (gamma, sigma) pairs: disorder first, then the kernel on a region."""
    if num_disorder < 1:
        raise ExperimentError("num_disorder must be >= 1")
    lo, hi = np.asarray(region[0]), np.asarray(region[1])
    if np.any(lo < np.asarray(window.lower)) or np.any(hi > np.asarray(window.upper)):
        raise ExperimentError("region must sit inside the window")

    def one_draw(k: int):
        config = sample_process(process, window, seed_sequence(seed, "disorder", k))
        graph = build_graph(config, model.pair.radius)
        w = model.weight_params(config)
        weights = w.weights(config.points)
        xi = build_section(section, config)
        mask = np.all((config.points >= lo) & (config.points <= hi), axis=1)
        vol = np.flatnonzero(mask).astype(np.int64)
        spec = KernelSpec(
            configuration=config, graph=graph, volume=vol, boundary=xi, model=model
        )
        cfg = SamplerConfig(
            burn_in=sampler.burn_in,
            retained=sampler.retained,
            proposal_scale=sampler.proposal_scale,
            adapt_window=sampler.adapt_window,
            target_acceptance=sampler.target_acceptance,
            thinning=sampler.thinning,
            seed=derive_seed(seed, "annealed-chain", k),
        )
        run = mcmc_sample(spec, cfg)
        final = xi.values.copy()
        if len(vol):
            final[vol] = run.samples[-1]
        field = SpinField(config, final)
        b_val = float(weights.sum())
        powers, _ = _norm_powers(run, spec, weights, model.p)
        norm_power = float(powers.mean())
        acc = run.acceptance_rate
        return field, b_val, norm_power, len(vol), acc

    indices = range(num_disorder)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_draw, indices))
    else:
        results = [one_draw(k) for k in indices]

    records = tuple(r[0] for r in results)
    b_vals = np.asarray([r[1] for r in results])
    norm_powers = np.asarray([r[2] for r in results])
    phi = b_vals + norm_powers
    phi_se = float(phi.std(ddof=1) / math.sqrt(len(phi))) if len(phi) > 1 else float("nan")
    return AnnealedReport(
        records=records,
        phi_values=phi,
        phi_mean=float(phi.mean()),
        phi_se=phi_se,
        b_values=b_vals,
        norm_powers=norm_powers,
        eta_sizes=np.asarray([r[3] for r in results]),
        acceptance=np.asarray([r[4] for r in results]),
    )


@dataclass(frozen=True, eq=False)
class LocalObservable:
    """Bounded function of the spins at a fixed set of sites."""

    name: str
    sites: np.ndarray  # global vertex indices
    fn: object  # callable mapping (n_sites, m) spin block -> float

    def __post_init__(self):
        object.__setattr__(
            self, "sites", np.unique(np.asarray(self.sites, dtype=np.int64))
        )

    def evaluate(self, fields: np.ndarray) -> np.ndarray:
        """Apply to every retained full field, (K, N, m) -> (K,)."""
        block = fields[:, self.sites, :]
        return np.asarray([float(self.fn(b)) for b in block])


@dataclass(frozen=True, eq=False)
class CesaroReport:
    """Per-volume kernel expectations and their running volume averages."""

    observable_names: tuple[str, ...]
    per_volume: np.ndarray  # (n_obs, n_volumes) estimates g_j
    per_volume_se: np.ndarray
    running_means: np.ndarray  # same shape; entry j averages g_1..g_{j+1}
    running_ses: np.ndarray
    tail_start: int
    tail_fluctuation: np.ndarray  # per observable
    tail_combined_se: np.ndarray

    @property
    def stabilized(self) -> np.ndarray:
        return self.tail_fluctuation <= 3.0 * self.tail_combined_se


def cesaro_study(
    config: Configuration,
    volumes: VolumeSequence,
    section: BoundarySection,
    observables: tuple[LocalObservable, ...],
    model: ModelParams,
    sampler: SamplerConfig,
    seed: int,
    graph: GeometricGraph | None = None,
) -> CesaroReport:
    """Estimate kernel expectations volume by volume and average them.

    Observables must be supported inside the smallest volume so every
    kernel in the sequence integrates them.  The tail statistic is the
    largest deviation of the last third of running means from the final
    one, compared against three combined standard errors.
    """
    if graph is None:
        graph = build_graph(config, model.pair.radius)
    xi = build_section(section, config)
    smallest = set(volumes.member_indices(config, 0).tolist())
    for obs in observables:
        if not set(obs.sites.tolist()) <= smallest:
            raise ExperimentError(
                f"observable {obs.name!r} support not contained in the smallest volume"
            )
    n_vol = len(volumes)
    n_obs = len(observables)
    per_volume = np.empty((n_obs, n_vol))
    per_se = np.empty((n_obs, n_vol))
    for j in range(n_vol):
        vol = volumes.member_indices(config, j)
        spec = KernelSpec(
            configuration=config, graph=graph, volume=vol, boundary=xi, model=model
        )
        cfg = SamplerConfig(
            burn_in=sampler.burn_in,
            retained=sampler.retained,
            proposal_scale=sampler.proposal_scale,
            adapt_window=sampler.adapt_window,
            target_acceptance=sampler.target_acceptance,
            thinning=sampler.thinning,
            seed=derive_seed(seed, "cesaro", j),
        )
        run = mcmc_sample(spec, cfg)
        fields = run.full_fields(xi)
        for i, obs in enumerate(observables):
            series = obs.evaluate(fields)
            per_volume[i, j], per_se[i, j] = batch_means_se(series)

    running = np.empty_like(per_volume)
    running_se = np.empty_like(per_volume)
    for j in range(n_vol):
        running[:, j] = per_volume[:, : j + 1].mean(axis=1)
        running_se[:, j] = np.sqrt((per_se[:, : j + 1] ** 2).sum(axis=1)) / (j + 1)
    tail_start = n_vol - max(1, math.ceil(n_vol / 3))
    tail = running[:, tail_start:]
    fluct = np.abs(tail - running[:, -1:]).max(axis=1)
    combined = np.sqrt(running_se[:, tail_start:] ** 2 + running_se[:, -1:] ** 2).max(
        axis=1
    )
    return CesaroReport(
        observable_names=tuple(o.name for o in observables),
        per_volume=per_volume,
        per_volume_se=per_se,
        running_means=running,
        running_ses=running_se,
        tail_start=tail_start,
        tail_fluctuation=fluct,
        tail_combined_se=combined,
    )
