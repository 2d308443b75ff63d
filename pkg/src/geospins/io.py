"""File formats: configurations, marked records, model files, manifests.

All numeric text is written with 17 significant digits (or hexadecimal
floats behind a flag), so every round trip is bit exact.  Reports are JSON
with sorted keys and no timestamps, which makes re-runs byte identical.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .point_process import Configuration, ProcessSpec, Window
from .quench_experiments import BoundarySection
from .spin_model import (
    ModelParams,
    PairPotential,
    SinglePotential,
    SpinField,
)
from .local_gibbs import QuadratureGrid, SamplerConfig

__all__ = [
    "FormatError",
    "MarkedSet",
    "ExperimentManifest",
    "format_float",
    "parse_float",
    "save_configuration",
    "load_configuration",
    "save_marked",
    "load_marked",
    "export_graph",
    "parse_model_file",
    "write_model_file",
    "parse_manifest",
    "write_resolved_manifest",
    "write_json_report",
    "write_table",
]

_CONFIG_MAGIC = "geospins-configuration v1"
_MARKED_MAGIC = "geospins-marked v1"

STUDY_KINDS = (
    "graph-stats",
    "correlation",
    "kernel-check",
    "dlr",
    "moments",
    "annealed",
    "cesaro",
)


class FormatError(ValueError):
    """Malformed file, header mismatch, or bad manifest field."""


def format_float(x: float, hex_floats: bool = False) -> str:
    if hex_floats:
        return float(x).hex()
    return format(float(x), ".17g")


def parse_float(text: str) -> float:
    text = text.strip()
    if text.startswith("0x") or text.startswith("-0x"):
        return float.fromhex(text)
    return float(text)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(parse_float(tok) for tok in text.replace(",", " ").split())


# ---------------------------------------------------------------------------
# configurations


def save_configuration(
    config: Configuration, path, hex_floats: bool = False
) -> None:
    """One row per point, preceded by a header block."""
    lines = [f"# {_CONFIG_MAGIC}"]
    lines.append(f"# dimension = {config.dimension}")
    lines.append(
        "# window_lower = " + " ".join(format_float(v, hex_floats) for v in config.window.lower)
    )
    lines.append(
        "# window_upper = " + " ".join(format_float(v, hex_floats) for v in config.window.upper)
    )
    lines.append(
        "# window_origin = " + " ".join(format_float(v, hex_floats) for v in config.window.origin)
    )
    lines.append(f"# provenance = {config.provenance}")
    lines.append(f"# count = {config.n_points}")
    for row in config.points:
        lines.append(" ".join(format_float(v, hex_floats) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _header_fields(lines: list[str], magic: str) -> dict:
    if not lines or lines[0].strip() != f"# {magic}":
        raise FormatError(f"missing or wrong header magic (expected {magic!r})")
    fields = {}
    body_start = len(lines)
    for i, line in enumerate(lines[1:], start=1):
        if line.startswith("##") or not line.startswith("#"):
            body_start = i
            break
        if "=" in line:
            key, val = line[1:].split("=", 1)
            fields[key.strip()] = val.strip()
    return fields | {"_body_start": body_start}


def load_configuration(path) -> Configuration:
    lines = Path(path).read_text().splitlines()
    fields = _header_fields(lines, _CONFIG_MAGIC)
    try:
        dim = int(fields["dimension"])
        window = Window(
            lower=_floats(fields["window_lower"]),
            upper=_floats(fields["window_upper"]),
            origin=_floats(fields["window_origin"]),
        )
        count = int(fields["count"])
    except KeyError as exc:
        raise FormatError(f"configuration header missing field {exc}") from exc
    if window.dimension != dim:
        raise FormatError("window dimension disagrees with the dimension field")
    rows = [
        _floats(line) for line in lines[fields["_body_start"] :] if line.strip()
    ]
    if len(rows) != count:
        raise FormatError(f"expected {count} points, found {len(rows)}")
    pts = np.asarray(rows, dtype=np.float64).reshape(count, dim) if count else np.zeros((0, dim))
    return Configuration(window, pts, provenance=fields.get("provenance", "loaded"))


# ---------------------------------------------------------------------------
# marked configurations


@dataclass(frozen=True, eq=False)
class MarkedSet:
    """Homogeneous collection of marked configurations (gamma, sigma)."""

    fields: tuple[SpinField, ...]
    interaction_radius: float
    master_seed: int

    def __post_init__(self):
        if self.fields:
            first = self.fields[0]
            for f in self.fields:
                if f.configuration.window != first.configuration.window:
                    raise FormatError("marked records must share one window")
                if f.spin_dim != first.spin_dim:
                    raise FormatError("marked records must share the spin dimension")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarkedSet):
            return NotImplemented
        return (
            self.interaction_radius == other.interaction_radius
            and self.master_seed == other.master_seed
            and len(self.fields) == len(other.fields)
            and all(a == b for a, b in zip(self.fields, other.fields))
        )

    @property
    def dimension(self) -> int:
        return self.fields[0].configuration.dimension if self.fields else 0

    @property
    def spin_dim(self) -> int:
        return self.fields[0].spin_dim if self.fields else 0


def save_marked(marked: MarkedSet, path, hex_floats: bool = False) -> None:
    """Versioned text dump: header block, then per-record point/spin rows."""
    lines = [f"# {_MARKED_MAGIC}"]
    if marked.fields:
        window = marked.fields[0].configuration.window
        lines.append(f"# dimension = {marked.dimension}")
        lines.append(f"# spin_dimension = {marked.spin_dim}")
        lines.append(
            "# window_lower = " + " ".join(format_float(v, hex_floats) for v in window.lower)
        )
        lines.append(
            "# window_upper = " + " ".join(format_float(v, hex_floats) for v in window.upper)
        )
        lines.append(
            "# window_origin = " + " ".join(format_float(v, hex_floats) for v in window.origin)
        )
    else:
        lines.append("# dimension = 0")
        lines.append("# spin_dimension = 0")
    lines.append(f"# interaction_radius = {format_float(marked.interaction_radius, hex_floats)}")
    lines.append(f"# master_seed = {marked.master_seed}")
    lines.append(f"# records = {len(marked.fields)}")
    for idx, field in enumerate(marked.fields):
        cfg = field.configuration
        lines.append(f"## record {idx} count={cfg.n_points} provenance={cfg.provenance}")
        for x_row, s_row in zip(cfg.points, field.values):
            lines.append(
                " ".join(format_float(v, hex_floats) for v in x_row)
                + "  "
                + " ".join(format_float(v, hex_floats) for v in s_row)
            )
    Path(path).write_text("\n".join(lines) + "\n")


def load_marked(
    path,
    expected_dimension: int | None = None,
    expected_spin_dim: int | None = None,
) -> MarkedSet:
    lines = Path(path).read_text().splitlines()
    fields = _header_fields(lines, _MARKED_MAGIC)
    try:
        dim = int(fields["dimension"])
        spin_dim = int(fields["spin_dimension"])
        radius = parse_float(fields["interaction_radius"])
        seed = int(fields["master_seed"])
        n_records = int(fields["records"])
    except KeyError as exc:
        raise FormatError(f"marked header missing field {exc}") from exc
    if expected_dimension is not None and n_records and dim != expected_dimension:
        raise FormatError(
            f"dimension mismatch: file has n = {dim}, expected {expected_dimension}"
        )
    if expected_spin_dim is not None and n_records and spin_dim != expected_spin_dim:
        raise FormatError(
            f"spin dimension mismatch: file has m = {spin_dim}, expected {expected_spin_dim}"
        )
    window = None
    if n_records:
        try:
            window = Window(
                lower=_floats(fields["window_lower"]),
                upper=_floats(fields["window_upper"]),
                origin=_floats(fields["window_origin"]),
            )
        except KeyError as exc:
            raise FormatError(f"marked header missing field {exc}") from exc
    records: list[SpinField] = []
    i = fields["_body_start"]
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if not line.startswith("## record"):
            raise FormatError(f"expected record header at line {i + 1}")
        meta = dict(
            tok.split("=", 1) for tok in line.split()[3:] if "=" in tok
        )
        count = int(meta["count"])
        provenance = line.split("provenance=", 1)[1] if "provenance=" in line else "loaded"
        pts = np.zeros((count, dim))
        spins = np.zeros((count, spin_dim))
        for r in range(count):
            row = _floats(lines[i + 1 + r])
            if len(row) != dim + spin_dim:
                raise FormatError(
                    f"row width mismatch at line {i + 2 + r}: "
                    f"expected {dim}+{spin_dim} values, found {len(row)}"
                )
            pts[r] = row[:dim]
            spins[r] = row[dim:]
        config = Configuration(window, pts, provenance=provenance)
        records.append(SpinField(config, spins))
        i += 1 + count
    if len(records) != n_records:
        raise FormatError(f"expected {n_records} records, found {len(records)}")
    return MarkedSet(
        fields=tuple(records), interaction_radius=radius, master_seed=seed
    )


# ---------------------------------------------------------------------------
# graph export


def export_graph(graph, edges_path, degrees_path) -> None:
    """Edge list (index pairs) and degree table as plain text."""
    edge_lines = ["# i j"]
    edge_lines.extend(f"{i} {j}" for i, j in graph.edges())
    Path(edges_path).write_text("\n".join(edge_lines) + "\n")
    deg_lines = ["# vertex degree degree_2r"]
    for v in range(graph.n_vertices):
        deg_lines.append(f"{v} {graph.degrees[v]} {graph.degrees_2r[v]}")
    Path(degrees_path).write_text("\n".join(deg_lines) + "\n")


# ---------------------------------------------------------------------------
# model files


def _pair_from_section(sec) -> PairPotential:
    kind = sec.get("kind", "bilinear").strip()
    radius = parse_float(sec.get("radius", "1.0"))
    spin_dim = int(sec.get("spin_dim", "1"))
    profile = parse_float(sec.get("profile", "1.0"))
    if kind == "bilinear":
        if "matrix" in sec:
            rows = [r for r in sec["matrix"].split(";") if r.strip()]
            mat = np.asarray([_floats(r) for r in rows])
        else:
            coupling = parse_float(sec.get("coupling", "0.0"))
            mat = -coupling * np.eye(spin_dim)
        return PairPotential(
            kind="bilinear",
            radius=radius,
            spin_dim=spin_dim,
            matrix=mat,
            profile_value=profile,
        )
    if kind in ("custom_polynomial", "custom-polynomial"):
        coeffs = _floats(sec.get("coefficients", ""))
        return PairPotential(
            kind="custom_polynomial",
            radius=radius,
            spin_dim=spin_dim,
            poly_coeffs=coeffs,
            profile_value=profile,
        )
    raise FormatError(f"[pair] kind: unknown value {kind!r}")


def _model_from_parser(cp: configparser.ConfigParser) -> ModelParams:
    for section in ("pair", "single", "tempered"):
        if not cp.has_section(section):
            raise FormatError(f"model file missing section [{section}]")
    try:
        pair = _pair_from_section(cp["pair"])
        single = SinglePotential(
            coefficient=parse_float(cp["single"].get("a", "1.0")),
            exponent=parse_float(cp["single"].get("q", "4.0")),
            quadratic_coefficient=parse_float(cp["single"].get("kappa", "0.0")),
        )
        model = ModelParams(
            pair=pair,
            single=single,
            alpha=parse_float(cp["tempered"].get("alpha", "1.0")),
            p=parse_float(cp["tempered"].get("p", "3.0")),
            order=int(cp["tempered"].get("order", "6")),
        )
    except (ValueError, KeyError) as exc:
        raise FormatError(f"model file: {exc}") from exc
    return model


def parse_model_file(path) -> ModelParams:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise FormatError(f"cannot read model file {path}")
    return _model_from_parser(cp)


def write_model_file(model: ModelParams, path) -> None:
    cp = configparser.ConfigParser()
    pair = model.pair
    cp["pair"] = {
        "kind": pair.kind,
        "radius": format_float(pair.radius),
        "spin_dim": str(pair.spin_dim),
        "profile": format_float(pair.profile_value),
    }
    if pair.kind == "bilinear":
        cp["pair"]["matrix"] = "; ".join(
            " ".join(format_float(v) for v in row) for row in pair.matrix
        )
    else:
        cp["pair"]["coefficients"] = " ".join(
            format_float(c) for c in pair.poly_coeffs
        )
    cp["single"] = {
        "a": format_float(model.single.coefficient),
        "q": format_float(model.single.exponent),
        "kappa": format_float(model.single.quadratic_coefficient),
    }
    cp["tempered"] = {
        "alpha": format_float(model.alpha),
        "p": format_float(model.p),
        "order": str(model.order),
    }
    with open(path, "w") as fh:
        cp.write(fh)


# ---------------------------------------------------------------------------
# manifests


@dataclass(frozen=True, eq=False)
class ExperimentManifest:
    """Fully resolved description of one study run."""

    study: str
    seed: int
    output: str
    threads: int
    process: ProcessSpec
    window: Window
    model: ModelParams
    sampler: SamplerConfig
    volume_count: int
    volume_ratio: float
    section: BoundarySection
    grid: QuadratureGrid
    num_samples: int
    num_disorder: int
    cell_size: float
    functional_r: float
    xi_scales: tuple[float, ...]
    exp_lambda: float | None
    region_fraction: float

    def needs_spin_model(self) -> bool:
        return self.study in ("kernel-check", "dlr", "moments", "annealed", "cesaro")


_DEFAULTS = {
    "experiment": {"study": "graph-stats", "seed": "1", "output": "out", "threads": ""},
    "process": {"kind": "poisson", "intensity": "1.0", "hardcore_radius": "0.0"},
    "window": {"lower": "0 0", "upper": "10 10", "origin": ""},
    "pair": {"kind": "bilinear", "radius": "1.0", "spin_dim": "1", "coupling": "0.0",
             "profile": "1.0"},
    "single": {"a": "1.0", "q": "4.0", "kappa": "0.0"},
    "tempered": {"alpha": "1.0", "p": "3.0", "order": "6"},
    "sampler": {"burn_in": "500", "retained": "2000", "proposal_scale": "1.0",
                "adapt_window": "50", "target_acceptance": "0.3", "thinning": "1"},
    "volumes": {"count": "8", "ratio": "1.3"},
    "section": {"rule": "zero", "amplitude": "0.0", "growth_rate": "0.0",
                "direction": "1"},
    "study": {"num_samples": "200", "num_disorder": "8", "cell_size": "1.0",
              "grid_nodes": "201", "grid_half_width": "3.0", "functional_r": "2.0",
              "xi_scales": "1.0", "exp_lambda": "", "region_fraction": "0.5"},
}


def _apply_overrides(cp: configparser.ConfigParser, overrides) -> None:
    for item in overrides or ():
        if "=" not in item:
            raise FormatError(f"override {item!r} must look like section.key=value")
        key, value = item.split("=", 1)
        if "." not in key:
            raise FormatError(f"override key {key!r} must look like section.key")
        section, opt = key.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section.strip(), opt.strip(), value.strip())


def parse_manifest(path, overrides=()) -> ExperimentManifest:
    """Read a manifest, apply overrides, fill defaults, build typed blocks."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise FormatError(f"cannot read manifest {path}")
    _apply_overrides(cp, overrides)
    model_file = None
    if cp.has_section("model") and cp["model"].get("file"):
        model_file = Path(path).parent / cp["model"]["file"]

    def get(section: str, key: str) -> str:
        if cp.has_section(section) and key in cp[section]:
            return cp[section][key].strip()
        return _DEFAULTS[section][key]

    def get_float(section: str, key: str) -> float:
        raw = get(section, key)
        try:
            return parse_float(raw)
        except ValueError as exc:
            raise FormatError(f"[{section}] {key}: expected a number, got {raw!r}") from exc

    def get_int(section: str, key: str) -> int:
        raw = get(section, key)
        try:
            return int(raw)
        except ValueError as exc:
            raise FormatError(f"[{section}] {key}: expected an integer, got {raw!r}") from exc

    study = get("experiment", "study")
    if study not in STUDY_KINDS:
        raise FormatError(
            f"[experiment] study: unknown kind {study!r}; expected one of {STUDY_KINDS}"
        )
    if not (cp.has_section("experiment") and "seed" in cp["experiment"]):
        raise FormatError("[experiment] seed: master seed is required")

    try:
        origin_raw = get("window", "origin")
        window = Window(
            lower=_floats(get("window", "lower")),
            upper=_floats(get("window", "upper")),
            origin=_floats(origin_raw) if origin_raw else None,
        )
        process = ProcessSpec(
            kind=get("process", "kind"),
            intensity=get_float("process", "intensity"),
            hardcore_radius=get_float("process", "hardcore_radius"),
        )
    except (ValueError, FormatError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from exc

    if model_file is not None:
        model = parse_model_file(model_file)
    else:
        mp = configparser.ConfigParser()
        for section in ("pair", "single", "tempered"):
            mp.add_section(section)
            for key, default in _DEFAULTS[section].items():
                mp.set(section, key, default)
            if cp.has_section(section):
                for key, value in cp[section].items():
                    mp.set(section, key, value)
        model = _model_from_parser(mp)

    sampler = SamplerConfig(
        burn_in=get_int("sampler", "burn_in"),
        retained=get_int("sampler", "retained"),
        proposal_scale=get_float("sampler", "proposal_scale"),
        adapt_window=get_int("sampler", "adapt_window"),
        target_acceptance=get_float("sampler", "target_acceptance"),
        thinning=get_int("sampler", "thinning"),
        seed=0,  # per-study chains derive their own seeds from the master
    )
    section_rule = BoundarySection(
        rule=get("section", "rule"),
        amplitude=get_float("section", "amplitude"),
        growth_rate=get_float("section", "growth_rate"),
        direction=_floats(get("section", "direction")),
    )
    grid = QuadratureGrid(
        half_width=get_float("study", "grid_half_width"),
        n_nodes=get_int("study", "grid_nodes"),
    )
    exp_lambda_raw = get("study", "exp_lambda")
    threads_raw = get("experiment", "threads")
    return ExperimentManifest(
        study=study,
        seed=get_int("experiment", "seed"),
        output=get("experiment", "output"),
        threads=int(threads_raw) if threads_raw else 0,
        process=process,
        window=window,
        model=model,
        sampler=sampler,
        volume_count=get_int("volumes", "count"),
        volume_ratio=get_float("volumes", "ratio"),
        section=section_rule,
        grid=grid,
        num_samples=get_int("study", "num_samples"),
        num_disorder=get_int("study", "num_disorder"),
        cell_size=get_float("study", "cell_size"),
        functional_r=get_float("study", "functional_r"),
        xi_scales=_floats(get("study", "xi_scales")),
        exp_lambda=parse_float(exp_lambda_raw) if exp_lambda_raw else None,
        region_fraction=get_float("study", "region_fraction"),
    )


def write_resolved_manifest(manifest: ExperimentManifest, path, threads: int) -> None:
    """Echo every value the run actually used, defaults included."""
    cp = configparser.ConfigParser()
    cp["experiment"] = {
        "study": manifest.study,
        "seed": str(manifest.seed),
        "output": manifest.output,
        "threads": str(threads),
    }
    cp["process"] = {
        "kind": manifest.process.kind,
        "intensity": format_float(manifest.process.intensity),
        "hardcore_radius": format_float(manifest.process.hardcore_radius),
    }
    cp["window"] = {
        "lower": " ".join(format_float(v) for v in manifest.window.lower),
        "upper": " ".join(format_float(v) for v in manifest.window.upper),
        "origin": " ".join(format_float(v) for v in manifest.window.origin),
    }
    pair = manifest.model.pair
    cp["pair"] = {
        "kind": pair.kind,
        "radius": format_float(pair.radius),
        "spin_dim": str(pair.spin_dim),
        "profile": format_float(pair.profile_value),
    }
    if pair.kind == "bilinear":
        cp["pair"]["matrix"] = "; ".join(
            " ".join(format_float(v) for v in row) for row in pair.matrix
        )
    else:
        cp["pair"]["coefficients"] = " ".join(format_float(c) for c in pair.poly_coeffs)
    cp["single"] = {
        "a": format_float(manifest.model.single.coefficient),
        "q": format_float(manifest.model.single.exponent),
        "kappa": format_float(manifest.model.single.quadratic_coefficient),
    }
    cp["tempered"] = {
        "alpha": format_float(manifest.model.alpha),
        "p": format_float(manifest.model.p),
        "order": str(manifest.model.order),
    }
    cp["sampler"] = {
        "burn_in": str(manifest.sampler.burn_in),
        "retained": str(manifest.sampler.retained),
        "proposal_scale": format_float(manifest.sampler.proposal_scale),
        "adapt_window": str(manifest.sampler.adapt_window),
        "target_acceptance": format_float(manifest.sampler.target_acceptance),
        "thinning": str(manifest.sampler.thinning),
    }
    cp["volumes"] = {
        "count": str(manifest.volume_count),
        "ratio": format_float(manifest.volume_ratio),
    }
    cp["section"] = {
        "rule": manifest.section.rule,
        "amplitude": format_float(manifest.section.amplitude),
        "growth_rate": format_float(manifest.section.growth_rate),
        "direction": " ".join(format_float(v) for v in manifest.section.direction),
    }
    cp["study"] = {
        "num_samples": str(manifest.num_samples),
        "num_disorder": str(manifest.num_disorder),
        "cell_size": format_float(manifest.cell_size),
        "grid_nodes": str(manifest.grid.n_nodes),
        "grid_half_width": format_float(manifest.grid.half_width),
        "functional_r": format_float(manifest.functional_r),
        "xi_scales": " ".join(format_float(v) for v in manifest.xi_scales),
        "exp_lambda": "" if manifest.exp_lambda is None else format_float(manifest.exp_lambda),
        "region_fraction": format_float(manifest.region_fraction),
    }
    with open(path, "w") as fh:
        cp.write(fh)


# ---------------------------------------------------------------------------
# reports


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json_report(report: dict, path) -> None:
    Path(path).write_text(
        json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    )


def write_table(header: list[str], rows, path) -> None:
    """Tab-separated table with a commented header line."""
    lines = ["# " + "\t".join(header)]
    for row in rows:
        lines.append(
            "\t".join(
                format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                for v in row
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")
