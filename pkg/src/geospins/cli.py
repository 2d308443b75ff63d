"""Command-line front end: run a study described by a manifest.

Usage: ``geospins run manifest.ini [--seed N] [--out DIR] [--threads K]
[--override section.key=value ...]``.  Every run writes a resolved manifest
(defaults included) plus a JSON report; statistical outputs carry standard
errors.  Re-running a manifest with the same master seed reproduces every
artifact byte for byte.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io as gio
from .geometric_graph import WeightParams, build_graph, compute_functionals
from .local_gibbs import (
    KernelSpec,
    SamplerConfig,
    dlr_consistency_check,
    mcmc_sample,
    quadrature_kernel,
)
from .point_process import Configuration, estimate_correlation, sample_many, sample_process
from .quench_experiments import (
    LocalObservable,
    annealed_sample,
    build_section,
    cesaro_study,
    moment_study,
    nested_volumes,
)
from .rng import derive_seed, seed_sequence
from .spin_model import validate_params
from .stats import batch_means_se

ENV_THREADS = "GEOSPINS_THREADS"


def _central_region(window, fraction: float):
    center = np.asarray(window.origin)
    half = window.extents * fraction / 2.0
    return tuple(center - half), tuple(center + half)


def _run_graph_stats(manifest, outdir: Path) -> dict:
    w = WeightParams.for_window(manifest.window, manifest.model.alpha)
    samples = sample_many(
        manifest.process,
        manifest.window,
        manifest.num_samples,
        derive_seed(manifest.seed, "graph-stats"),
    )
    radius = manifest.model.pair.radius
    rows = []
    all_degrees = []
    for cfg in samples:
        graph = build_graph(cfg, radius)
        f = compute_functionals(graph, w, manifest.functional_r, manifest.model.order)
        rows.append(f.to_dict())
        all_degrees.append(graph.degrees)
        del graph
    degrees = np.concatenate(all_degrees) if all_degrees else np.zeros(0, dtype=int)
    hist = np.bincount(degrees.astype(np.int64)) if degrees.size else np.zeros(1, int)
    first_graph = build_graph(samples[0], radius)
    gio.export_graph(first_graph, outdir / "graph0.edges.tsv", outdir / "graph0.degrees.tsv")
    gio.write_table(
        ["degree", "count"],
        [(int(d), int(c)) for d, c in enumerate(hist)],
        outdir / "degree_histogram.tsv",
    )
    a_vals = np.asarray([r["a"] for r in rows])
    b_vals = np.asarray([r["b"] for r in rows])
    maj_vals = np.asarray([r["majorant"] for r in rows])
    n = len(rows)
    return {
        "study": "graph-stats",
        "num_samples": n,
        "radius": radius,
        "alpha": manifest.model.alpha,
        "functional_r": manifest.functional_r,
        "order": manifest.model.order,
        "a_mean": float(a_vals.mean()),
        "a_se": float(a_vals.std(ddof=1) / math.sqrt(n)) if n > 1 else None,
        "b_mean": float(b_vals.mean()),
        "b_se": float(b_vals.std(ddof=1) / math.sqrt(n)) if n > 1 else None,
        "majorant_mean": float(maj_vals.mean()),
        "majorant_violations": int((a_vals > maj_vals).sum()),
        "degree_histogram": hist,
        "functionals": rows,
    }


def _run_correlation(manifest, outdir: Path) -> dict:
    samples = sample_many(
        manifest.process,
        manifest.window,
        manifest.num_samples,
        derive_seed(manifest.seed, "correlation"),
    )
    k1 = estimate_correlation(samples, 1, manifest.cell_size)
    k2 = estimate_correlation(samples, 2, manifest.cell_size)
    gio.write_table(
        ["cell", "k1", "se"],
        [(i, float(v), float(s)) for i, (v, s) in enumerate(zip(k1.estimates, k1.standard_errors))],
        outdir / "k1_cells.tsv",
    )
    z = manifest.process.intensity
    diag = np.diag(k2.estimates)
    return {
        "study": "correlation",
        "num_samples": manifest.num_samples,
        "cell_size": manifest.cell_size,
        "intensity": z,
        "k1_pooled": k1.pooled,
        "k1_pooled_se": k1.pooled_se,
        "k1_sup": k1.sup_estimate,
        "k2_pooled_offdiagonal": k2.pooled,
        "k2_pooled_se": k2.pooled_se,
        "k2_sup": k2.sup_estimate,
        "k2_diagonal_mean": float(diag.mean()),
        "poisson_reference": {"k1": z, "k2": z * z},
    }


def _standard_chain(manifest) -> Configuration:
    """Deterministic three-point chain centered at the window origin."""
    spacing = 0.9 * manifest.model.pair.radius
    center = np.asarray(manifest.window.origin)
    pts = np.vstack([center.copy() for _ in range(3)])
    pts[0, 0] -= spacing
    pts[2, 0] += spacing
    if not np.all(manifest.window.contains(pts)):
        raise gio.FormatError("window too small for the three-site chain")
    return Configuration(manifest.window, pts, provenance="three-site chain")


def _run_kernel_check(manifest, outdir: Path) -> dict:
    config = sample_process(
        manifest.process, manifest.window, seed_sequence(manifest.seed, "disorder", 0)
    )
    graph = build_graph(config, manifest.model.pair.radius)
    xi = build_section(manifest.section, config)
    lo, hi = _central_region(manifest.window, manifest.region_fraction)
    mask = np.all((config.points >= np.asarray(lo)) & (config.points <= np.asarray(hi)), axis=1)
    volume = np.flatnonzero(mask).astype(np.int64)
    spec = KernelSpec(
        configuration=config, graph=graph, volume=volume, boundary=xi, model=manifest.model
    )
    cfg = SamplerConfig(
        burn_in=manifest.sampler.burn_in,
        retained=manifest.sampler.retained,
        proposal_scale=manifest.sampler.proposal_scale,
        adapt_window=manifest.sampler.adapt_window,
        target_acceptance=manifest.sampler.target_acceptance,
        thinning=manifest.sampler.thinning,
        seed=derive_seed(manifest.seed, "kernel-check"),
    )
    run = mcmc_sample(spec, cfg)
    gio.write_table(
        ["sweep", "energy", "mean_magnitude"],
        [
            (k, float(run.traces["energy"][k]), float(run.traces["mean_magnitude"][k]))
            for k in range(run.n_kept)
        ],
        outdir / "trace.tsv",
    )
    moments = {}
    if len(volume):
        flat = run.samples[:, :, 0] if run.samples.shape[2] == 1 else np.sqrt(
            (run.samples**2).sum(axis=2)
        )
        site_mean = flat.mean(axis=1)
        for name, series in (
            ("u", site_mean),
            ("u2", (flat**2).mean(axis=1)),
            ("u4", (flat**4).mean(axis=1)),
        ):
            mean, se = batch_means_se(series)
            moments[name] = {"estimate": mean, "se": se}
    report = {
        "study": "kernel-check",
        "eta_size": int(len(volume)),
        "acceptance": run.acceptance_rate,
        "proposal_scale": run.proposal_scale,
        "moments": moments,
    }
    if manifest.model.pair.spin_dim == 1 and 1 <= len(volume) <= 3:
        kernel = quadrature_kernel(spec, manifest.grid)
        k = len(volume)
        report["quadrature_reference"] = {
            "u": kernel.expectation(lambda *a: sum(a) / k),
            "u2": kernel.expectation(lambda *a: sum(x**2 for x in a) / k),
            "u4": kernel.expectation(lambda *a: sum(x**4 for x in a) / k),
        }
    return report


def _run_dlr(manifest, outdir: Path) -> dict:
    config = _standard_chain(manifest)
    graph = build_graph(config, manifest.model.pair.radius)
    xi = build_section(manifest.section, config)
    spec = KernelSpec(
        configuration=config,
        graph=graph,
        volume=np.arange(3),
        boundary=xi,
        model=manifest.model,
    )
    observables = {
        "u": lambda u: u,
        "u2": lambda u: u**2,
        "tanh_u": lambda u: np.tanh(u),
    }
    report = dlr_consistency_check(spec, np.asarray([1]), manifest.grid, observables)
    return {
        "study": "dlr",
        "grid_nodes": manifest.grid.n_nodes,
        "grid_half_width": manifest.grid.half_width,
        "residuals": report.residuals,
        "max_residual": report.max_residual,
    }


def _run_moments(manifest, outdir: Path) -> dict:
    config = sample_process(
        manifest.process, manifest.window, seed_sequence(manifest.seed, "disorder", 0)
    )
    volumes = nested_volumes(manifest.window, manifest.volume_count, manifest.volume_ratio)
    report = moment_study(
        config,
        volumes,
        manifest.section,
        manifest.model,
        manifest.sampler,
        seed=derive_seed(manifest.seed, "moments"),
        xi_scales=manifest.xi_scales,
        exp_lambda=manifest.exp_lambda,
    )
    gio.write_table(
        ["volume", "xi_scale", "eta_size", "moment", "moment_se", "exp_moment",
         "exp_moment_se", "ess", "acceptance"],
        [
            (d.volume_index, d.xi_scale, d.eta_size, d.moment, d.moment_se,
             d.exp_moment, d.exp_moment_se, d.exp_moment_ess, d.acceptance)
            for d in report.design
        ],
        outdir / "volumes.tsv",
    )
    c1, c2, c3 = (float(v) for v in report.fit.coefficients)
    return {
        "study": "moments",
        "n_points": config.n_points,
        "volume_count": manifest.volume_count,
        "exp_lambda": report.exp_lambda,
        "xi_hat": report.xi_hat,
        "trend_p_increasing": report.trend.p_increasing,
        "trend_s": report.trend.s,
        "fit": {"C1": c1, "C2": c2, "C3": c3, "r_squared": report.fit.r_squared},
        "per_volume_moments": [d.moment for d in report.design],
        "per_volume_se": [d.moment_se for d in report.design],
    }


def _run_annealed(manifest, outdir: Path, threads: int) -> dict:
    region = _central_region(manifest.window, manifest.region_fraction)
    report = annealed_sample(
        manifest.process,
        manifest.window,
        region,
        manifest.section,
        manifest.model,
        manifest.sampler,
        manifest.num_disorder,
        seed=derive_seed(manifest.seed, "annealed"),
        threads=threads,
    )
    marked = gio.MarkedSet(
        fields=report.records,
        interaction_radius=manifest.model.pair.radius,
        master_seed=manifest.seed,
    )
    gio.save_marked(marked, outdir / "marked.txt")
    return {
        "study": "annealed",
        "num_disorder": manifest.num_disorder,
        "phi_mean": report.phi_mean,
        "phi_se": report.phi_se,
        "b_mean": float(report.b_values.mean()),
        "norm_power_mean": float(report.norm_powers.mean()),
        "eta_sizes": report.eta_sizes,
        "mean_acceptance": float(np.nanmean(report.acceptance)),
    }


def _run_cesaro(manifest, outdir: Path) -> dict:
    config = sample_process(
        manifest.process, manifest.window, seed_sequence(manifest.seed, "disorder", 0)
    )
    volumes = nested_volumes(manifest.window, manifest.volume_count, manifest.volume_ratio)
    obs_sites = volumes.member_indices(config, 0)
    if not obs_sites.size:
        raise gio.FormatError("smallest volume holds no points; enlarge it")
    observables = (
        LocalObservable("mean_tanh", obs_sites, lambda b: float(np.tanh(b[:, 0]).mean())),
        LocalObservable("mean_cos", obs_sites, lambda b: float(np.cos(b[:, 0]).mean())),
        LocalObservable(
            "mean_cauchy", obs_sites, lambda b: float((1.0 / (1.0 + b[:, 0] ** 2)).mean())
        ),
    )
    report = cesaro_study(
        config,
        volumes,
        manifest.section,
        observables,
        manifest.model,
        manifest.sampler,
        seed=derive_seed(manifest.seed, "cesaro"),
    )
    rows = []
    for j in range(len(volumes)):
        for i, name in enumerate(report.observable_names):
            rows.append(
                (j, name, report.per_volume[i, j], report.per_volume_se[i, j],
                 report.running_means[i, j], report.running_ses[i, j])
            )
    gio.write_table(
        ["volume", "observable", "estimate", "se", "running_mean", "running_se"],
        rows,
        outdir / "cesaro.tsv",
    )
    return {
        "study": "cesaro",
        "observables": list(report.observable_names),
        "tail_start": report.tail_start,
        "tail_fluctuation": report.tail_fluctuation,
        "tail_combined_se": report.tail_combined_se,
        "stabilized": report.stabilized,
        "per_volume": report.per_volume,
        "running_means": report.running_means,
    }


def run_manifest(manifest_path, overrides=(), out=None, seed=None, threads=None) -> dict:
    """Programmatic entry point; returns the report dict, raises on failure."""
    extra = list(overrides)
    if seed is not None:
        extra.append(f"experiment.seed={seed}")
    if out is not None:
        extra.append(f"experiment.output={out}")
    manifest = gio.parse_manifest(manifest_path, extra)
    if threads is None:
        threads = manifest.threads or int(os.environ.get(ENV_THREADS, "1"))
    if manifest.needs_spin_model():
        report = validate_params(manifest.model)
        if not report.valid:
            details = "; ".join(
                f"{name} violated ({detail})"
                for name, ok, detail in report.checks
                if not ok
            )
            raise gio.FormatError(f"model validation failed: {details}")
    outdir = Path(manifest.output)
    if not outdir.is_absolute():
        outdir = Path(manifest_path).parent / outdir
    outdir.mkdir(parents=True, exist_ok=True)
    gio.write_resolved_manifest(manifest, outdir / "resolved_manifest.ini", threads)
    if manifest.study == "graph-stats":
        report = _run_graph_stats(manifest, outdir)
    elif manifest.study == "correlation":
        report = _run_correlation(manifest, outdir)
    elif manifest.study == "kernel-check":
        report = _run_kernel_check(manifest, outdir)
    elif manifest.study == "dlr":
        report = _run_dlr(manifest, outdir)
    elif manifest.study == "moments":
        report = _run_moments(manifest, outdir)
    elif manifest.study == "annealed":
        report = _run_annealed(manifest, outdir, threads)
    else:
        report = _run_cesaro(manifest, outdir)
    report["master_seed"] = manifest.seed
    gio.write_json_report(report, outdir / "report.json")
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="geospins", description="run studies on spins over random configurations"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute the study named in a manifest")
    run_p.add_argument("manifest", help="path to the manifest (INI)")
    run_p.add_argument("--seed", type=int, default=None, help="override the master seed")
    run_p.add_argument("--out", default=None, help="override the output directory")
    run_p.add_argument(
        "--threads",
        type=int,
        default=None,
        help=f"worker threads (default: manifest, then ${ENV_THREADS}, then 1)",
    )
    run_p.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override any manifest field (repeatable)",
    )
    args = parser.parse_args(argv)
    try:
        report = run_manifest(
            args.manifest,
            overrides=args.override,
            out=args.out,
            seed=args.seed,
            threads=args.threads,
        )
    except gio.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: invalid inputs: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure inside a study
        print(f"error: study failed: {exc}", file=sys.stderr)
        return 1
    print(f"study {report['study']} finished; master seed {report['master_seed']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
