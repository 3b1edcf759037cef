"""Config-driven scenario execution.

A scenario is one JSON object naming an experiment family and its numeric
parameters.  Parsing fills documented defaults and validates every field
before any computation starts; running writes CSV/JSON tables, per-figure
plot data, and a manifest that echoes the canonical config, so a finished
output directory is self-describing.  The pipeline contains no randomness:
identical configs produce byte-identical CSV files.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import (
    DEFAULT_MAX_STEPS,
    DEFAULT_TOL,
    ChannelParams,
    CouplingSchedule,
    iterate_to_fixed_point,
    run_schedule,
)
from .charfn import (
    CharFn,
    asymptotic_product,
    charfn_coherent,
    charfn_fock,
    charfn_of_state,
    charfn_thermal,
)
from .errors import ConfigError
from .fock import (
    TAIL_MASS_TOL,
    DensityMatrix,
    FockCutoff,
    coherent_state,
    fock_state,
    thermal_state,
)
from .measures import (
    MeasureReport,
    mean_photon_number,
    measure_report,
    purity,
    trace_distance,
)

SCENARIOS = ("relax", "product_compare", "lambda_sweep", "vanhove", "measures")
LAMBDA_MAX = math.pi / 2 + 1e-12
DEFAULT_N_MAX = 40
DEFAULT_R_MAX = 2.0
DEFAULT_GRID_POINTS = 25
GOLDEN_ANGLE = 2.399963229728653

TRAJECTORY_HEADER = ("step", "trace_distance_to_next", "mean_photon_number", "purity")
CHI_GRID_HEADER = ("re_z", "im_z", "re_chi", "im_chi", "abs_chi", "tail_bound")

SCENARIO_HELP = {
    "relax": (
        "iterate the collision channel at one coupling until consecutive "
        "states agree within tol; writes trajectory.csv, final_state.json, "
        "relaxation.csv"
    ),
    "product_compare": (
        "compare the iterated fixed point against the infinite-product "
        "characteristic function on a disk grid; writes chi_grid.csv, "
        "final_state.json, chi_profile.csv"
    ),
    "lambda_sweep": (
        "fixed point per coupling in a lambda list, with trace distance to "
        "the photon-matched thermal state; writes sweep.csv"
    ),
    "vanhove": (
        "K collisions at coupling 1/sqrt(K) for each K in the lambda list "
        "(interpreted as integer K values); writes vanhove.csv"
    ),
    "measures": (
        "purity/entropy/coherence-scale of the fixed point per coupling, "
        "plus the same measures of the reservoir state; writes measures.csv, "
        "sigma_measures.json, measures_vs_lambda.csv"
    ),
}


@dataclass(frozen=True)
class GridSpec:
    """Deterministic sampling of the disk |z| <= r_max."""

    r_max: float = DEFAULT_R_MAX
    points: int = DEFAULT_GRID_POINTS

    def radii(self) -> np.ndarray:
        j = np.arange(self.points)
        return self.r_max * (j + 1) / self.points

    def disk(self) -> np.ndarray:
        """Golden-angle spiral: radially uniform, angularly well spread."""
        j = np.arange(self.points)
        return self.radii() * np.exp(1j * GOLDEN_ANGLE * j)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario description with all defaults filled."""

    scenario: str
    sigma_spec: tuple
    rho0_spec: tuple
    lam: object  # scalar coupling, tuple of couplings, or tuple of K integers
    n_max: int
    tol: float
    max_steps: int
    z_grid: GridSpec
    output_dir: str | None


@dataclass(frozen=True)
class RunRecord:
    """Everything a finished run persisted, kept for re-emission."""

    scenario: str
    config_echo: dict
    results: dict
    versions: str
    wall_time_seconds: float
    tables: dict
    json_payloads: dict
    plot_tables: dict


_TOP_LEVEL_KEYS = (
    "scenario",
    "sigma_spec",
    "rho0_spec",
    "lambda",
    "n_max",
    "tol",
    "max_steps",
    "z_grid",
    "output_dir",
)
_STATE_KINDS = ("thermal", "fock", "coherent")


def _as_number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=field)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", field=field)
    return float(value)


def _as_int(value, field: str) -> int:
    number = _as_number(value, field)
    if number != int(number):
        raise ConfigError(f"expected an integer, got {value!r}", field=field)
    return int(number)


def _parse_lambda(raw, scenario: str):
    field = "lambda"
    if raw is None:
        raise ConfigError("missing required field", field=field)
    if scenario == "vanhove":
        values = raw if isinstance(raw, list) else [raw]
        if not values:
            raise ConfigError("K list must be non-empty", field=field)
        ks = []
        for value in values:
            k = _as_int(value, field)
            if k < 1:
                raise ConfigError(f"K must be a positive integer, got {value!r}", field=field)
            ks.append(k)
        ks.sort()
        if len(set(ks)) != len(ks):
            raise ConfigError("duplicate K values", field=field)
        return tuple(ks)
    if scenario in ("relax", "product_compare"):
        if isinstance(raw, list):
            raise ConfigError(f"{scenario} expects a single coupling, not a list", field=field)
        lam = _as_number(raw, field)
        if not 0.0 < lam <= LAMBDA_MAX:
            raise ConfigError(f"lambda must lie in (0, pi/2], got {raw!r}", field=field)
        return lam
    values = raw if isinstance(raw, list) else [raw]
    if not values:
        raise ConfigError("lambda list must be non-empty", field=field)
    lams = []
    for value in values:
        lam = _as_number(value, field)
        if not 0.0 < lam <= LAMBDA_MAX:
            raise ConfigError(f"lambda must lie in (0, pi/2], got {value!r}", field=field)
        lams.append(lam)
    lams.sort()
    if len(set(lams)) != len(lams):
        raise ConfigError("duplicate lambda values", field=field)
    return tuple(lams)


def _parse_state_spec(raw, field: str, n_max: int, allow_default: bool) -> tuple:
    if allow_default and raw in ("fock_default", {"fock_default": None}):
        return ("fock_default", None)
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError(
            'expected a one-key object such as {"thermal": 1.0}', field=field
        )
    kind, value = next(iter(raw.items()))
    if kind not in _STATE_KINDS:
        raise ConfigError(f"unknown state kind {kind!r}", field=field)
    if kind == "thermal":
        beta = _as_number(value, field)
        if beta <= 0.0:
            raise ConfigError(f"thermal beta must be positive, got {value!r}", field=field)
        # Same guard the constructor applies, surfaced as a config problem.
        if math.exp(-beta * (n_max + 1)) > TAIL_MASS_TOL:
            raise ConfigError(
                f"thermal(beta={beta:g}) leaks more than {TAIL_MASS_TOL:g} past "
                f"n_max={n_max}; raise n_max",
                field=field,
            )
        return ("thermal", beta)
    if kind == "fock":
        level = _as_int(value, field)
        if level < 0:
            raise ConfigError(f"fock level must be >= 0, got {value!r}", field=field)
        if level > n_max:
            raise ConfigError(f"fock level {level} exceeds n_max={n_max}", field=field)
        return ("fock", level)
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError("coherent amplitude list must be [re, im]", field=field)
        alpha = complex(_as_number(value[0], field), _as_number(value[1], field))
    else:
        alpha = complex(_as_number(value, field), 0.0)
    if abs(alpha) ** 2 > n_max / 4.0:
        raise ConfigError(
            f"coherent(|alpha|={abs(alpha):g}) needs n_max >= {4 * abs(alpha) ** 2:g}",
            field=field,
        )
    return ("coherent", alpha)


def _parse_grid(raw) -> GridSpec:
    field = "z_grid"
    if raw is None:
        return GridSpec()
    if not isinstance(raw, dict):
        raise ConfigError("expected an object with r_max and points", field=field)
    unknown = set(raw) - {"r_max", "points"}
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r}", field=field)
    r_max = _as_number(raw.get("r_max", DEFAULT_R_MAX), field)
    if r_max <= 0.0:
        raise ConfigError(f"r_max must be positive, got {r_max!r}", field=field)
    points = _as_int(raw.get("points", DEFAULT_GRID_POINTS), field)
    if points < 1:
        raise ConfigError(f"points must be >= 1, got {points!r}", field=field)
    return GridSpec(r_max=r_max, points=points)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario config, filling defaults."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON: {exc.msg}", line=exc.lineno, column=exc.colno
        ) from None
    if not isinstance(payload, dict):
        raise ConfigError("top level must be a JSON object")
    scenario = payload.get("scenario")
    if scenario is None:
        raise ConfigError("missing required field", field="scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}",
            field="scenario",
        )
    for key in payload:
        if key not in _TOP_LEVEL_KEYS:
            raise ConfigError("unknown field", field=key)

    # Coupling domain is checked before anything else so an out-of-range
    # lambda is reported even when the rest of the config is incomplete.
    lam = _parse_lambda(payload.get("lambda"), scenario)

    n_max = _as_int(payload.get("n_max", DEFAULT_N_MAX), "n_max")
    if n_max < 1:
        raise ConfigError(f"n_max must be >= 1, got {n_max}", field="n_max")
    tol = _as_number(payload.get("tol", DEFAULT_TOL), "tol")
    if not 1e-12 <= tol < 1.0:
        raise ConfigError(f"tol must lie in [1e-12, 1), got {tol!r}", field="tol")
    max_steps = _as_int(payload.get("max_steps", DEFAULT_MAX_STEPS), "max_steps")
    if max_steps < 1:
        raise ConfigError(f"max_steps must be >= 1, got {max_steps}", field="max_steps")
    z_grid = _parse_grid(payload.get("z_grid"))

    if "sigma_spec" not in payload:
        raise ConfigError("missing required field", field="sigma_spec")
    sigma_spec = _parse_state_spec(payload["sigma_spec"], "sigma_spec", n_max, False)
    rho0_spec = _parse_state_spec(
        payload.get("rho0_spec", "fock_default"), "rho0_spec", n_max, True
    )

    output_dir = payload.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("expected a path string", field="output_dir")

    return ScenarioConfig(
        scenario=scenario,
        sigma_spec=sigma_spec,
        rho0_spec=rho0_spec,
        lam=lam,
        n_max=n_max,
        tol=tol,
        max_steps=max_steps,
        z_grid=z_grid,
        output_dir=output_dir,
    )


def _spec_json(spec: tuple):
    kind, value = spec
    if kind == "fock_default":
        return "fock_default"
    if kind == "coherent":
        if value.imag != 0.0:
            return {"coherent": [value.real, value.imag]}
        return {"coherent": value.real}
    return {kind: value}


def serialize_config(config: ScenarioConfig) -> dict:
    """Canonical JSON form; parse(serialize(c)) == c."""
    payload = {
        "scenario": config.scenario,
        "sigma_spec": _spec_json(config.sigma_spec),
        "rho0_spec": _spec_json(config.rho0_spec),
        "lambda": list(config.lam) if isinstance(config.lam, tuple) else config.lam,
        "n_max": config.n_max,
        "tol": config.tol,
        "max_steps": config.max_steps,
        "z_grid": {"r_max": config.z_grid.r_max, "points": config.z_grid.points},
    }
    if config.output_dir is not None:
        payload["output_dir"] = config.output_dir
    return payload


def build_state(spec: tuple, cutoff: FockCutoff) -> DensityMatrix:
    """Materialize a parsed state spec on the given cutoff."""
    kind, value = spec
    if kind == "fock_default":
        return fock_state(0, cutoff)
    if kind == "thermal":
        return thermal_state(value, cutoff)
    if kind == "fock":
        return fock_state(value, cutoff)
    return coherent_state(value, cutoff)


def analytic_charfn(spec: tuple) -> CharFn:
    """Closed-form characteristic function of a parsed state spec."""
    kind, value = spec
    if kind == "fock_default":
        return charfn_fock(0)
    if kind == "thermal":
        return charfn_thermal(value)
    if kind == "fock":
        return charfn_fock(value)
    return charfn_coherent(value)


def _thermal_target(sigma: DensityMatrix, cutoff: FockCutoff) -> DensityMatrix:
    """Thermal state with sigma's mean photon number (vacuum if centered)."""
    n_bar = mean_photon_number(sigma)
    if n_bar <= 1e-12:
        return fock_state(0, cutoff)
    return thermal_state(math.log1p(1.0 / n_bar), cutoff)


def _run_relax(config: ScenarioConfig):
    cutoff = FockCutoff(config.n_max)
    sigma = build_state(config.sigma_spec, cutoff)
    rho0 = build_state(config.rho0_spec, cutoff)
    params = ChannelParams(config.lam, cutoff)
    traj = iterate_to_fixed_point(
        rho0, sigma, params, tol=config.tol, max_steps=config.max_steps
    )
    final = traj.final
    results = {
        "steps": traj.step_count,
        "converged_at": traj.converged_at,
        "final_distance_to_sigma": float(trace_distance(final, sigma)),
        "final_mean_photon": float(mean_photon_number(final)),
        "final_purity": float(purity(final)),
    }
    tables = {"trajectory": (TRAJECTORY_HEADER, tuple(traj.csv_rows()))}
    payloads = {"final_state": final.to_json_dict()}
    plots = {
        "relaxation": (
            ("step", "trace_distance"),
            tuple((step, d) for step, d in enumerate(traj.distances)),
        )
    }
    return tables, payloads, plots, results


def _run_product_compare(config: ScenarioConfig):
    cutoff = FockCutoff(config.n_max)
    sigma = build_state(config.sigma_spec, cutoff)
    rho0 = build_state(config.rho0_spec, cutoff)
    params = ChannelParams(config.lam, cutoff)
    traj = iterate_to_fixed_point(
        rho0, sigma, params, tol=config.tol, max_steps=config.max_steps
    )
    chi_iter = charfn_of_state(traj.final)
    chi_sigma = analytic_charfn(config.sigma_spec)

    grid_rows = []
    max_diff = 0.0
    max_tail = 0.0
    max_terms = 0
    for z in config.z_grid.disk():
        z = complex(z)
        value, trunc = asymptotic_product(chi_sigma, params, z, rel_tol=config.tol)
        grid_rows.append(
            (z.real, z.imag, value.real, value.imag, abs(value), trunc.tail_bound)
        )
        max_diff = max(max_diff, abs(complex(chi_iter(z)) - value))
        max_tail = max(max_tail, trunc.tail_bound)
        max_terms = max(max_terms, trunc.k_terms)

    profile_rows = []
    for r in config.z_grid.radii():
        r = float(r)
        iter_value = complex(chi_iter(r))
        prod_value, _ = asymptotic_product(
            chi_sigma, params, complex(r), rel_tol=config.tol
        )
        profile_rows.append(
            (r, abs(iter_value), abs(prod_value), abs(iter_value - prod_value))
        )

    results = {
        "converged_at": traj.converged_at,
        "max_abs_diff": max_diff,
        "max_tail_bound": max_tail,
        "max_product_terms": max_terms,
    }
    tables = {"chi_grid": (CHI_GRID_HEADER, tuple(grid_rows))}
    payloads = {"final_state": traj.final.to_json_dict()}
    plots = {
        "chi_profile": (
            ("r", "abs_chi_iter", "abs_chi_product", "abs_diff"),
            tuple(profile_rows),
        )
    }
    return tables, payloads, plots, results


def _run_lambda_sweep(config: ScenarioConfig):
    cutoff = FockCutoff(config.n_max)
    sigma = build_state(config.sigma_spec, cutoff)
    rho0 = build_state(config.rho0_spec, cutoff)
    target = _thermal_target(sigma, cutoff)
    rows = []
    distances = []
    for lam in config.lam:
        traj = iterate_to_fixed_point(
            rho0, sigma, ChannelParams(lam, cutoff),
            tol=config.tol, max_steps=config.max_steps,
        )
        distance = float(trace_distance(traj.final, target))
        distances.append(distance)
        rows.append(
            (
                lam,
                distance,
                float(mean_photon_number(traj.final)),
                float(purity(traj.final)),
                traj.converged_at,
            )
        )
    results = {
        "lambdas": list(config.lam),
        "distance_to_thermal": distances,
        "target_mean_photon": float(mean_photon_number(sigma)),
    }
    header = (
        "lambda",
        "trace_distance_to_thermal",
        "mean_photon_number",
        "purity",
        "converged_at",
    )
    return {"sweep": (header, tuple(rows))}, {}, {}, results


def _run_vanhove(config: ScenarioConfig):
    cutoff = FockCutoff(config.n_max)
    sigma = build_state(config.sigma_spec, cutoff)
    rho0 = build_state(config.rho0_spec, cutoff)
    target = _thermal_target(sigma, cutoff)
    rows = []
    distances = []
    for k in config.lam:
        traj = run_schedule(rho0, sigma, CouplingSchedule.van_hove_fixed_k(k), cutoff)
        distance = float(trace_distance(traj.final, target))
        distances.append(distance)
        rows.append(
            (
                k,
                distance,
                float(mean_photon_number(traj.final)),
                float(purity(traj.final)),
            )
        )
    results = {
        "K": list(config.lam),
        "distance_to_thermal": distances,
        "strictly_decreasing": all(
            later < earlier for earlier, later in zip(distances, distances[1:])
        ),
        "target_mean_photon": float(mean_photon_number(sigma)),
    }
    header = ("K", "trace_distance_to_thermal", "mean_photon_number", "purity")
    return {"vanhove": (header, tuple(rows))}, {}, {}, results


def _run_measures(config: ScenarioConfig):
    cutoff = FockCutoff(config.n_max)
    sigma = build_state(config.sigma_spec, cutoff)
    rho0 = build_state(config.rho0_spec, cutoff)
    sigma_report = measure_report(sigma)
    rows = []
    plot_rows = []
    reports = []
    for lam in config.lam:
        traj = iterate_to_fixed_point(
            rho0, sigma, ChannelParams(lam, cutoff),
            tol=config.tol, max_steps=config.max_steps,
        )
        report = measure_report(traj.final)
        reports.append(report.to_json_dict())
        rows.append((lam,) + report.csv_row())
        plot_rows.append((lam, report.purity, report.entropy, report.qcs_squared))
    results = {
        "lambdas": list(config.lam),
        "fixed_point_reports": reports,
        "sigma_report": sigma_report.to_json_dict(),
    }
    tables = {"measures": (("lambda",) + MeasureReport.FIELDS, tuple(rows))}
    payloads = {"sigma_measures": sigma_report.to_json_dict()}
    plots = {
        "measures_vs_lambda": (
            ("lambda", "purity", "entropy", "qcs_squared"),
            tuple(plot_rows),
        )
    }
    return tables, payloads, plots, results


_SCENARIO_RUNNERS = {
    "relax": _run_relax,
    "product_compare": _run_product_compare,
    "lambda_sweep": _run_lambda_sweep,
    "vanhove": _run_vanhove,
    "measures": _run_measures,
}


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(value) for value in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _versions_line() -> str:
    import scipy

    from . import __version__
    from .runtime import HAS_NUMBA

    parts = [
        f"beamchain {__version__}",
        f"numpy {np.__version__}",
        f"scipy {scipy.__version__}",
    ]
    if HAS_NUMBA:
        import numba

        parts.append(f"numba {numba.__version__}")
    return ", ".join(parts)


def emit_plot_data(record: RunRecord, out_dir) -> list:
    """Write the per-figure CSV files of a finished record."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (header, rows) in record.plot_tables.items():
        path = out / f"{name}.csv"
        _write_csv(path, header, rows)
        written.append(path)
    return written


def _write_outputs(record: RunRecord, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, (header, rows) in record.tables.items():
            path = out / f"{name}.csv"
            _write_csv(path, header, rows)
            written.append(path)
        for name, payload in record.json_payloads.items():
            path = out / f"{name}.json"
            path.write_text(json.dumps(payload, indent=2) + "\n")
            written.append(path)
        written.extend(emit_plot_data(record, out))
        manifest = {
            "config_echo": record.config_echo,
            "results": record.results,
            "versions": record.versions,
            "wall_time_seconds": record.wall_time_seconds,
        }
        path = out / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2) + "\n")
        written.append(path)
    except BaseException:
        # Never leave a half-written output directory behind.
        for path in written:
            path.unlink(missing_ok=True)
        raise


def run_scenario(config: ScenarioConfig, out_dir=None) -> RunRecord:
    """Execute a validated config and persist its outputs.

    `out_dir` overrides the config's output_dir; one of the two must be set.
    """
    target = out_dir if out_dir is not None else config.output_dir
    if target is None:
        raise ConfigError(
            "no output directory: set output_dir in the config or pass --out",
            field="output_dir",
        )
    started = time.perf_counter()
    tables, payloads, plots, results = _SCENARIO_RUNNERS[config.scenario](config)
    record = RunRecord(
        scenario=config.scenario,
        config_echo=serialize_config(config),
        results=results,
        versions=_versions_line(),
        wall_time_seconds=time.perf_counter() - started,
        tables=tables,
        json_payloads=payloads,
        plot_tables=plots,
    )
    _write_outputs(record, Path(target))
    return record
