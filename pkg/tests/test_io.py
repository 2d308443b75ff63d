import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geospins.io import (
    FormatError,
    MarkedSet,
    format_float,
    load_configuration,
    load_marked,
    parse_float,
    parse_manifest,
    parse_model_file,
    save_configuration,
    save_marked,
    write_model_file,
)
from geospins.point_process import Configuration, Window, sample_poisson
from geospins.spin_model import ModelParams, PairPotential, SinglePotential, SpinField


finite_floats = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=200)
@given(x=finite_floats)
def test_decimal_format_round_trips(x):
    assert parse_float(format_float(x)) == x


@settings(max_examples=200)
@given(x=finite_floats)
def test_hex_format_round_trips(x):
    assert parse_float(format_float(x, hex_floats=True)) == x


def test_configuration_round_trip(tmp_path):
    cfg = sample_poisson(Window((0.0, 0.0), (7.0, 3.0)), 2.0, seed=5)
    path = tmp_path / "config.txt"
    save_configuration(cfg, path)
    assert load_configuration(path) == cfg


def test_configuration_round_trip_hex(tmp_path):
    cfg = sample_poisson(Window((-1.0,), (1.0,)), 3.0, seed=6)
    path = tmp_path / "config.txt"
    save_configuration(cfg, path, hex_floats=True)
    assert load_configuration(path) == cfg


def test_configuration_bad_header(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("# not-the-right-magic\n1 2\n")
    with pytest.raises(FormatError):
        load_configuration(path)


def _random_marked(n_records, seed, window=None, spin_dim=1):
    window = window or Window((0.0, 0.0), (5.0, 5.0))
    rng = np.random.default_rng(seed)
    fields = []
    for k in range(n_records):
        cfg = sample_poisson(window, 2.0, seed=seed * 1000 + k)
        fields.append(SpinField(cfg, rng.standard_normal((cfg.n_points, spin_dim))))
    return MarkedSet(fields=tuple(fields), interaction_radius=0.8, master_seed=seed)


def test_marked_empty_round_trip(tmp_path):
    marked = MarkedSet(fields=(), interaction_radius=1.0, master_seed=3)
    path = tmp_path / "marked.txt"
    save_marked(marked, path)
    assert load_marked(path) == marked


def test_marked_round_trip_is_byte_identical(tmp_path):
    marked = _random_marked(n_records=20, seed=9)
    path_a = tmp_path / "a.txt"
    path_b = tmp_path / "b.txt"
    save_marked(marked, path_a)
    loaded = load_marked(path_a)
    assert loaded == marked
    save_marked(loaded, path_b)
    assert path_a.read_bytes() == path_b.read_bytes()


def test_marked_large_set_round_trip(tmp_path):
    marked = _random_marked(n_records=50, seed=10, spin_dim=2)
    total = sum(f.configuration.n_points for f in marked.fields)
    assert total > 1000  # many rows exercise the row parser
    path = tmp_path / "marked.txt"
    save_marked(marked, path)
    assert load_marked(path) == marked


def test_marked_dimension_mismatch_rejected(tmp_path):
    marked = _random_marked(n_records=3, seed=11)
    path = tmp_path / "marked.txt"
    save_marked(marked, path)
    with pytest.raises(FormatError, match="dimension mismatch"):
        load_marked(path, expected_dimension=3)
    with pytest.raises(FormatError, match="spin dimension mismatch"):
        load_marked(path, expected_spin_dim=2)


def test_marked_refuses_heterogeneous_records():
    a = _random_marked(1, 1).fields[0]
    b = _random_marked(1, 2, window=Window((0.0, 0.0), (9.0, 9.0))).fields[0]
    with pytest.raises(FormatError):
        MarkedSet(fields=(a, b), interaction_radius=1.0, master_seed=0)


def test_model_file_round_trip(tmp_path):
    model = ModelParams(
        pair=PairPotential.ferromagnetic(0.25, radius=1.5),
        single=SinglePotential(coefficient=0.9, exponent=4.5, quadratic_coefficient=0.1),
        alpha=1.1,
        p=3.2,
        order=8,
    )
    path = tmp_path / "model.ini"
    write_model_file(model, path)
    loaded = parse_model_file(path)
    assert np.array_equal(loaded.pair.matrix, model.pair.matrix)
    assert loaded.pair.radius == model.pair.radius
    assert loaded.single.coefficient == model.single.coefficient
    assert loaded.single.exponent == model.single.exponent
    assert loaded.alpha == model.alpha and loaded.p == model.p
    assert loaded.order == model.order


def test_model_file_polynomial_round_trip(tmp_path):
    model = ModelParams(
        pair=PairPotential(
            kind="custom_polynomial", radius=1.0, spin_dim=1, poly_coeffs=(0.3,)
        ),
        single=SinglePotential(coefficient=1.0, exponent=4.0),
        alpha=1.0,
        p=3.0,
        order=6,
    )
    path = tmp_path / "model.ini"
    write_model_file(model, path)
    loaded = parse_model_file(path)
    assert loaded.pair.kind == "custom_polynomial"
    assert loaded.pair.poly_coeffs == (0.3,)


def test_model_file_missing_section(tmp_path):
    path = tmp_path / "model.ini"
    path.write_text("[pair]\nkind = bilinear\n")
    with pytest.raises(FormatError, match=r"\[single\]"):
        parse_model_file(path)


MINIMAL_MANIFEST = """\
[experiment]
study = graph-stats
seed = 77
output = out
"""


def test_manifest_minimal_and_defaults(tmp_path):
    path = tmp_path / "m.ini"
    path.write_text(MINIMAL_MANIFEST)
    manifest = parse_manifest(path)
    assert manifest.study == "graph-stats"
    assert manifest.seed == 77
    assert manifest.sampler.burn_in == 500  # default
    assert manifest.window.lower == (0.0, 0.0)
    assert manifest.volume_ratio == 1.3


def test_manifest_requires_master_seed(tmp_path):
    path = tmp_path / "m.ini"
    path.write_text("[experiment]\nstudy = graph-stats\n")
    with pytest.raises(FormatError, match="master seed"):
        parse_manifest(path)


def test_manifest_rejects_unknown_study(tmp_path):
    path = tmp_path / "m.ini"
    path.write_text("[experiment]\nstudy = quantum\nseed = 1\n")
    with pytest.raises(FormatError, match="unknown kind"):
        parse_manifest(path)


def test_manifest_names_bad_field(tmp_path):
    path = tmp_path / "m.ini"
    path.write_text(MINIMAL_MANIFEST + "[process]\nintensity = abc\n")
    with pytest.raises(FormatError, match=r"\[process\] intensity"):
        parse_manifest(path)


def test_manifest_overrides_apply(tmp_path):
    path = tmp_path / "m.ini"
    path.write_text(MINIMAL_MANIFEST)
    manifest = parse_manifest(path, overrides=["process.intensity=2.5", "study.cell_size=0.5"])
    assert manifest.process.intensity == 2.5
    assert manifest.cell_size == 0.5
    with pytest.raises(FormatError, match="override"):
        parse_manifest(path, overrides=["no-equals-sign"])


def test_manifest_external_model_file(tmp_path):
    model = ModelParams(
        pair=PairPotential.ferromagnetic(0.5, radius=2.0),
        single=SinglePotential(coefficient=1.0, exponent=5.0),
        alpha=0.8,
        p=3.5,
        order=7,
    )
    write_model_file(model, tmp_path / "model.ini")
    path = tmp_path / "m.ini"
    path.write_text(MINIMAL_MANIFEST + "[model]\nfile = model.ini\n")
    manifest = parse_manifest(path)
    assert manifest.model.pair.radius == 2.0
    assert manifest.model.single.exponent == 5.0
    assert manifest.model.order == 7
