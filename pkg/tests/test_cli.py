import json

import numpy as np
import pytest

from geospins.cli import main, run_manifest

BASE = """\
[experiment]
study = {study}
seed = 4242
output = {out}

[process]
kind = poisson
intensity = 1.0

[window]
lower = 0 0
upper = {side} {side}

[pair]
kind = bilinear
radius = 1.0
coupling = 0.2

[single]
a = 1.0
q = {q}

[tempered]
alpha = 1.0
p = 3.0
order = 6

[sampler]
burn_in = 100
retained = 400

[study]
num_samples = 30
cell_size = 1.0
grid_nodes = 101
grid_half_width = 3.0
"""


def write_manifest(tmp_path, study, q="4.0", side="6", out="out", name="m.ini"):
    path = tmp_path / name
    path.write_text(BASE.format(study=study, q=q, side=side, out=out))
    return path


def test_graph_stats_smoke(tmp_path):
    path = write_manifest(tmp_path, "graph-stats")
    assert main(["run", str(path)]) == 0
    outdir = tmp_path / "out"
    report = json.loads((outdir / "report.json").read_text())
    assert report["study"] == "graph-stats"
    assert report["majorant_violations"] == 0
    assert (outdir / "degree_histogram.tsv").exists()
    assert (outdir / "graph0.edges.tsv").exists()
    assert (outdir / "resolved_manifest.ini").exists()


def test_resolved_manifest_contains_defaults(tmp_path):
    path = write_manifest(tmp_path, "graph-stats")
    run_manifest(path)
    resolved = (tmp_path / "out" / "resolved_manifest.ini").read_text()
    # values never mentioned in the input manifest appear with their defaults
    assert "target_acceptance" in resolved
    assert "region_fraction" in resolved
    assert "ratio = 1.3" in resolved


def test_invalid_growth_exponent_names_inequality(tmp_path, capsys):
    path = write_manifest(tmp_path, "kernel-check", q="2.0")
    code = main(["run", str(path)])
    captured = capsys.readouterr()
    assert code != 0
    assert "q > 2" in captured.err


def test_graph_study_does_not_validate_spin_model(tmp_path):
    # the spin model is irrelevant to pure geometry studies
    path = write_manifest(tmp_path, "graph-stats", q="2.0")
    assert main(["run", str(path)]) == 0


def test_parse_error_exit_code(tmp_path, capsys):
    path = tmp_path / "m.ini"
    path.write_text("[experiment]\nstudy = graph-stats\n")  # no seed
    assert main(["run", str(path)]) == 2
    assert "seed" in capsys.readouterr().err


def test_dlr_study_reports_small_residual(tmp_path):
    path = write_manifest(tmp_path, "dlr", side="8")
    report = run_manifest(path, overrides=["study.grid_nodes=201"])
    assert report["max_residual"] < 1e-6


def test_kernel_check_writes_trace_and_reference(tmp_path):
    path = write_manifest(tmp_path, "kernel-check", side="4")
    report = run_manifest(path, overrides=["study.region_fraction=0.35"])
    assert (tmp_path / "out" / "trace.tsv").exists()
    assert report["eta_size"] >= 0
    if 1 <= report["eta_size"] <= 3:
        assert "quadrature_reference" in report


def test_annealed_study_dumps_marked_records(tmp_path):
    path = write_manifest(tmp_path, "annealed", side="4")
    report = run_manifest(
        path, overrides=["study.num_disorder=4", "sampler.retained=200"]
    )
    from geospins.io import load_marked

    marked = load_marked(tmp_path / "out" / "marked.txt", expected_dimension=2)
    assert len(marked.fields) == 4
    assert report["phi_mean"] >= 0


def test_moments_study_smoke(tmp_path):
    path = write_manifest(tmp_path, "moments", side="6")
    report = run_manifest(
        path,
        overrides=[
            "volumes.count=3",
            "sampler.retained=600",
            "section.rule=constant",
            "section.amplitude=0.5",
            "study.xi_scales=0.0 1.0",
        ],
    )
    assert (tmp_path / "out" / "volumes.tsv").exists()
    assert len(report["per_volume_moments"]) == 6  # 3 volumes x 2 scales
    assert report["fit"]["r_squared"] <= 1.0


def test_cesaro_study_smoke(tmp_path):
    path = write_manifest(tmp_path, "cesaro", side="6")
    report = run_manifest(
        path,
        overrides=["volumes.count=4", "sampler.retained=600", "volumes.ratio=1.2"],
    )
    assert (tmp_path / "out" / "cesaro.tsv").exists()
    assert len(report["observables"]) == 3


def test_rerun_is_byte_identical(tmp_path):
    path_a = write_manifest(tmp_path, "kernel-check", out="out_a", name="a.ini")
    path_b = write_manifest(tmp_path, "kernel-check", out="out_b", name="b.ini")
    run_manifest(path_a)
    run_manifest(path_b)
    for name in ("report.json", "trace.tsv"):
        assert (tmp_path / "out_a" / name).read_bytes() == (
            tmp_path / "out_b" / name
        ).read_bytes()


def test_seed_override_changes_report(tmp_path):
    path = write_manifest(tmp_path, "kernel-check")
    a = run_manifest(path, out="out_a")
    b = run_manifest(path, out="out_b", seed=999)
    assert a["master_seed"] != b["master_seed"]
