"""Command-line front end.

Subcommands:

* ``systems``      list the system catalog
* ``sample``       draw a trajectory batch, write CSV and/or binary
* ``expect``       estimate one expectation value
* ``node-scan``    tabulate a single-time marginal and its nodes
* ``limit-sweep``  kernel-sharpness sweep against the classical value
* ``grid-study``   estimate vs time-grid resolution
* ``oracle-check`` cross-validate Monte Carlo against the lattice oracle
* ``battery``      run the anchor-value regression battery

Every run reads one TOML config (see README for the schema), applies
``--set section.key=value`` overrides, and writes its artifacts plus a
manifest (resolved config, seed, content digests, wall time) into the
output directory (``--out``, else $PATHDENSITY_OUT, else the working
directory).  Identical config and seed reproduce every artifact byte for
byte; the resolved-config echo re-parses to an identical run.

Exit codes: 0 success, 1 config/validation error, 2 numerical sentinel
(divergent observable, quadrature failure, sampler failure, degenerate
weights), 3 battery failure.
"""

from __future__ import annotations

import argparse
import hashlib
import inspect
import json
import math
import os
import sys
import time

import numpy as np
import tomli

from . import __version__
from .density import (
    AlphaMeasure,
    PathDensity,
    box_uniform,
    gaussian_prior,
    point_mass,
    position_pin,
    velocity_pin,
)
from .errors import (
    ConfigError,
    DegenerateWeightsError,
    DivergentObservableError,
    LatticeBudgetError,
    PathDensityError,
    QuadratureError,
    SamplerError,
)
from .experiments import (
    classical_limit_sweep,
    grid_refinement_study,
    regression_battery,
    sweep_converged,
)
from .kernels import (
    EXACT_DELTA,
    FAMILIES,
    KernelSpec,
    exact_delta,
)
from .model import make_grid
from .observables import (
    Observable,
    check_moments,
    expectation,
    node_scan,
)
from .oracle import LatticeSpec, lattice_for, oracle_compare
from .sampling import (
    METHODS,
    SamplerConfig,
    sample,
    write_batch_binary,
    write_batch_csv,
)
from .systems import _CATALOG, CATALOG_IDS, make_system, pinned_alpha

OUT_ENV = "PATHDENSITY_OUT"


# ---------------------------------------------------------------- config --


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from None


def _apply_overrides(config: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key.path=value")
        key, raw = item.split("=", 1)
        try:
            value = tomli.loads(f"v = {raw}")["v"]
        except tomli.TOMLDecodeError:
            value = raw
        parts = key.strip().split(".")
        node = config
        for p in parts[:-1]:
            if isinstance(node, list):
                node = node[int(p)]
            else:
                node = node.setdefault(p, {})
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return config


def _section(config: dict, name: str, required: bool = True) -> dict:
    tbl = config.get(name)
    if tbl is None:
        if required:
            raise ConfigError(f"config is missing the [{name}] section")
        return {}
    if not isinstance(tbl, dict):
        raise ConfigError(f"[{name}] must be a table")
    return tbl


def _get(tbl: dict, section: str, key: str, kind, default=None, required: bool = False):
    if key not in tbl:
        if required:
            raise ConfigError(f"config [{section}].{key} is required")
        return default
    v = tbl[key]
    if kind is float and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if not isinstance(v, kind) or isinstance(v, bool) and kind is not bool:
        raise ConfigError(
            f"config [{section}].{key} must be {getattr(kind, '__name__', kind)}, "
            f"got {type(v).__name__}"
        )
    return v


def build_system(config: dict):
    tbl = _section(config, "system")
    sys_id = _get(tbl, "system", "id", str, required=True)
    if sys_id not in CATALOG_IDS:
        raise ConfigError(
            f"config [system].id: unknown system {sys_id!r}; "
            f"catalog: {', '.join(CATALOG_IDS)}"
        )
    params = {k: v for k, v in tbl.items() if k != "id"}
    try:
        return make_system(sys_id, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config [system]: {exc}") from None


def build_grid(config: dict):
    tbl = _section(config, "grid")
    try:
        return make_grid(
            _get(tbl, "grid", "t_start", float, required=True),
            _get(tbl, "grid", "t_end", float, required=True),
            _get(tbl, "grid", "n_slices", int, required=True),
        )
    except ValueError as exc:
        raise ConfigError(f"config [grid]: {exc}") from None


def _kernel_from(tbl: dict, section: str, prefix: str = "") -> KernelSpec:
    family = _get(tbl, section, prefix + "family", str, required=True)
    if family not in FAMILIES:
        raise ConfigError(
            f"config [{section}].{prefix}family: unknown kernel {family!r}; "
            f"one of {', '.join(FAMILIES)}"
        )
    if family == EXACT_DELTA:
        return exact_delta()
    m = _get(tbl, section, prefix + "m_delta", float, required=True)
    radius = _get(tbl, section, prefix + "trunc_radius", float)
    try:
        if family == "truncated_fejer":
            if radius is None:
                raise ConfigError(
                    f"config [{section}].{prefix}trunc_radius is required for "
                    "truncated_fejer"
                )
            return KernelSpec(family, m, radius)
        if radius is not None:
            raise ConfigError(
                f"config [{section}].{prefix}trunc_radius only applies to "
                "truncated_fejer"
            )
        return KernelSpec(family, m)
    except ValueError as exc:
        raise ConfigError(f"config [{section}]: {exc}") from None


def build_kernel(config: dict) -> KernelSpec:
    return _kernel_from(_section(config, "kernel"), "kernel")


def build_alpha_measure(config: dict, system) -> AlphaMeasure:
    tbl = _section(config, "alpha")
    kind = _get(tbl, "alpha", "kind", str, required=True)
    try:
        if kind == "point_mass":
            return point_mass(_get(tbl, "alpha", "alpha0", list, required=True))
        if kind == "pinned":
            x0 = _get(tbl, "alpha", "x0", (list, float, int), required=True)
            v0 = _get(tbl, "alpha", "v0", (list, float, int), required=True)
            t0 = _get(tbl, "alpha", "t0", float, default=0.0)
            return point_mass(pinned_alpha(system, x0, v0, t0))
        if kind == "box_uniform":
            return box_uniform(
                _get(tbl, "alpha", "lo", list, required=True),
                _get(tbl, "alpha", "hi", list, required=True),
            )
        if kind == "gaussian_prior":
            return gaussian_prior(
                _get(tbl, "alpha", "mean", list, required=True),
                _get(tbl, "alpha", "stddev", (list, float, int), required=True),
            )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"config [alpha]: {exc}") from None
    raise ConfigError(
        f"config [alpha].kind: unknown kind {kind!r}; one of point_mass, "
        "pinned, box_uniform, gaussian_prior"
    )


def build_constraints(config: dict) -> tuple:
    entries = config.get("constraints", [])
    if not isinstance(entries, list):
        raise ConfigError("[[constraints]] must be an array of tables")
    out = []
    for i, tbl in enumerate(entries):
        sec = f"constraints[{i}]"
        kind = _get(tbl, sec, "kind", str, required=True)
        t_index = _get(tbl, sec, "t_index", int, required=True)
        target = _get(tbl, sec, "target", list, required=True)
        fam = _get(tbl, sec, "softness_family", str, required=True)
        if fam == EXACT_DELTA or fam == "exact":
            softness = exact_delta()
        else:
            softness = _kernel_from(
                {
                    "softness_family": fam,
                    **{k: v for k, v in tbl.items() if k.startswith("softness_")},
                },
                sec,
                prefix="softness_",
            )
        if kind == "position_at":
            out.append(position_pin(t_index, target, softness))
        elif kind == "stencil_velocity_at":
            out.append(velocity_pin(t_index, target, softness))
        else:
            raise ConfigError(
                f"config [{sec}].kind: unknown constraint {kind!r}; one of "
                "position_at, stencil_velocity_at"
            )
    return tuple(out)


def build_density(config: dict) -> PathDensity:
    system = build_system(config)
    grid = build_grid(config)
    kernel = build_kernel(config)
    measure = build_alpha_measure(config, system)
    constraints = build_constraints(config)
    quad = _get(_section(config, "alpha"), "alpha", "quadrature", int, default=129)
    try:
        return PathDensity(system, grid, kernel, measure, constraints, quad)
    except PathDensityError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_observable(config: dict) -> Observable:
    tbl = _section(config, "observable")
    return _observable_from(tbl, "observable")


def _observable_from(tbl: dict, sec: str) -> Observable:
    kind = _get(tbl, sec, "kind", str, required=True)
    try:
        if kind in ("position_at", "position_squared_at"):
            return Observable(
                kind,
                t_index=_get(tbl, sec, "t_index", int, required=True),
                coord=_get(tbl, sec, "coord", int, default=0),
            )
        if kind == "energy":
            return Observable(
                kind,
                t_index=_get(tbl, sec, "t_index", int, default=0),
                stencil=_get(tbl, sec, "stencil", str, default="forward"),
            )
        if kind == "path_average":
            inner = tbl.get("inner")
            if not isinstance(inner, dict):
                raise ConfigError(f"config [{sec}].inner table is required")
            return Observable(kind, inner=_observable_from(inner, f"{sec}.inner"))
    except ValueError as exc:
        raise ConfigError(f"config [{sec}]: {exc}") from None
    raise ConfigError(
        f"config [{sec}].kind: unknown observable {kind!r}; one of position_at, "
        "position_squared_at, energy, path_average"
    )


def build_sampler(config: dict) -> SamplerConfig:
    tbl = _section(config, "sampler")
    method = _get(tbl, "sampler", "method", str, required=True)
    if method not in METHODS:
        raise ConfigError(
            f"config [sampler].method: unknown method {method!r}; one of "
            f"{', '.join(METHODS)}"
        )
    try:
        return SamplerConfig(
            method=method,
            n_samples=_get(tbl, "sampler", "n_samples", int, required=True),
            burn_in=_get(tbl, "sampler", "burn_in", int, default=0),
            proposal_step=_get(tbl, "sampler", "proposal_step", float),
            n_chains=_get(tbl, "sampler", "n_chains", int, default=1),
            seed=_get(tbl, "sampler", "seed", int, default=0),
        )
    except ValueError as exc:
        raise ConfigError(f"config [sampler]: {exc}") from None


# ------------------------------------------------------------- resolved --


def _resolved_config(config: dict, command: str) -> dict:
    """The config with defaults filled, as re-parseable data."""
    out = {k: v for k, v in config.items()}
    if "sampler" in out:
        cfg = build_sampler(config)
        out["sampler"] = {
            "method": cfg.method,
            "n_samples": cfg.n_samples,
            "burn_in": cfg.burn_in,
            "n_chains": cfg.n_chains,
            "seed": cfg.seed,
        }
        if cfg.proposal_step is not None:
            out["sampler"]["proposal_step"] = cfg.proposal_step
    if "alpha" in out:
        tbl = dict(out["alpha"])
        tbl.setdefault("quadrature", 129)
        out["alpha"] = tbl
    out["command"] = command
    return out


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return repr(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__} to TOML")


def _toml_dump(config: dict) -> str:
    """Minimal TOML emitter for the resolved-config echo.

    Handles scalars, arrays, nested tables, and arrays of tables, which is
    everything the config schema produces.
    """
    lines: list[str] = []

    def emit_table(tbl: dict, path: str):
        scalars = {k: v for k, v in tbl.items() if not isinstance(v, (dict, list)) or (
            isinstance(v, list) and not (v and isinstance(v[0], dict))
        )}
        subtables = {k: v for k, v in tbl.items() if isinstance(v, dict)}
        arrays = {
            k: v
            for k, v in tbl.items()
            if isinstance(v, list) and v and isinstance(v[0], dict)
        }
        if path:
            lines.append(f"[{path}]")
        for k, v in scalars.items():
            lines.append(f"{k} = {_toml_value(v)}")
        if scalars or path:
            lines.append("")
        for k, v in subtables.items():
            emit_table(v, f"{path}.{k}" if path else k)
        for k, items in arrays.items():
            name = f"{path}.{k}" if path else k
            for item in items:
                lines.append(f"[[{name}]]")
                for kk, vv in item.items():
                    lines.append(f"{kk} = {_toml_value(vv)}")
                lines.append("")

    emit_table(config, "")
    return "\n".join(lines).rstrip() + "\n"


# ------------------------------------------------------------ artifacts --


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class _Run:
    """Collects artifacts for one CLI invocation and writes the manifest."""

    def __init__(self, command: str, out_dir: str, config: dict):
        self.command = command
        self.out_dir = out_dir
        self.config = config
        self.artifacts: list[str] = []
        self.t0 = time.perf_counter()
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.artifacts.append(name)
        return p

    def write_text(self, name: str, text: str) -> str:
        p = self.path(name)
        with open(p, "w") as fh:
            fh.write(text)
        return p

    def write_json(self, name: str, payload) -> str:
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def finish(self) -> str:
        resolved = _resolved_config(self.config, self.command)
        self.write_text("resolved_config.toml", _toml_dump(resolved))
        manifest = {
            "command": self.command,
            "version": __version__,
            "seed": self.config.get("sampler", {}).get("seed"),
            "config": resolved,
            "artifacts": {
                name: _sha256(os.path.join(self.out_dir, name))
                for name in self.artifacts
            },
            "wall_time_s": round(time.perf_counter() - self.t0, 6),
        }
        p = os.path.join(self.out_dir, "manifest.json")
        with open(p, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return p


def _csv_with_meta(meta: dict, header: str, rows) -> str:
    lines = ["# " + json.dumps(meta, sort_keys=True), header]
    lines.extend(rows)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- commands --


def _cmd_systems(args) -> int:
    print(f"{'id':<24} {'dim':>3} {'n_constants':>11}  parameters")
    for name in CATALOG_IDS:
        factory = _CATALOG[name]
        sig = inspect.signature(factory)
        params = ", ".join(
            p.name if p.default is inspect.Parameter.empty else f"{p.name}={p.default}"
            for p in sig.parameters.values()
        )
        probe = factory(
            **{
                p.name: 1.0
                for p in sig.parameters.values()
                if p.default is inspect.Parameter.empty
            }
        )
        print(f"{name:<24} {probe.dim:>3} {probe.n_constants:>11}  {params}")
    return 0


def _cmd_sample(args, config: dict) -> int:
    density = build_density(config)
    cfg = build_sampler(config)
    run = _Run("sample", args.out, config)
    batch = sample(density, cfg)
    fmt = args.format
    if fmt in ("csv", "both"):
        write_batch_csv(batch, run.path("batch.csv"))
    if fmt in ("binary", "both"):
        write_batch_binary(batch, run.path("batch.bin"))
    diag = {
        k: (v.tolist() if isinstance(v, np.ndarray) else v)
        for k, v in batch.diagnostics.items()
    }
    run.write_json("diagnostics.json", diag)
    run.finish()
    print(
        f"sampled {batch.n_samples} trajectories "
        f"(ess={batch.ess:.1f}) -> {args.out}"
    )
    return 0


def _cmd_expect(args, config: dict) -> int:
    density = build_density(config)
    obs = build_observable(config)
    cfg = build_sampler(config)
    if not density.is_classical:
        check_moments(density, obs)  # surface divergence before sampling
    run = _Run("expect", args.out, config)
    res = expectation(density, obs, cfg)
    run.write_json(
        "expectation.json",
        {
            "observable": obs.label,
            "estimate": res.estimate,
            "std_error": res.std_error,
            "n_samples": res.n_samples,
            "ess": res.ess,
            "seed": res.seed,
            "config_digest": res.config_digest,
        },
    )
    run.finish()
    print(f"{obs.label}: {res.estimate:.10g} +- {res.std_error:.3g} (ess={res.ess:.1f})")
    return 0


def _cmd_node_scan(args, config: dict) -> int:
    density = build_density(config)
    tbl = _section(config, "scan")
    t_index = _get(tbl, "scan", "t_index", int, required=True)
    n_points = _get(tbl, "scan", "n_points", int, default=2001)
    lo = _get(tbl, "scan", "x_lo", float)
    hi = _get(tbl, "scan", "x_hi", float)
    if lo is None or hi is None:
        m = density.kernel.m_delta
        half = _get(tbl, "scan", "half_width", float, default=4.0 * math.pi / m)
        center = float(
            density.classical_values(density.alpha_measure.center)[t_index, 0]
        )
        lo, hi = center - half, center + half
    run = _Run("node-scan", args.out, config)
    result = node_scan(density, t_index, (lo, hi), n_points)
    nodes = [float(x) for x in result.node_positions]
    meta = {
        "command": "node-scan",
        "t_index": t_index,
        "kernel_family": density.kernel.family,
        "m_delta": density.kernel.m_delta,
        "threshold_ratio": result.threshold_ratio,
        "nodes": nodes,
    }
    is_node = np.zeros(result.x.size, dtype=int)
    if nodes:
        for nx in nodes:
            is_node[int(np.argmin(np.abs(result.x - nx)))] = 1
    rows = (
        f"{float(x)!r},{float(r)!r},{int(b)}"
        for x, r, b in zip(result.x, result.rho, is_node)
    )
    run.write_text("node_scan.csv", _csv_with_meta(meta, "x,rho,is_node", rows))
    run.finish()
    print(f"scan of {result.x.size} points: {len(nodes)} nodes -> {args.out}")
    return 0


def _cmd_limit_sweep(args, config: dict) -> int:
    density = build_density(config)
    obs = build_observable(config)
    cfg = build_sampler(config)
    tbl = _section(config, "sweep")
    m_values = _get(tbl, "sweep", "m_values", list, required=True)
    run = _Run("limit-sweep", args.out, config)
    result = classical_limit_sweep(density, obs, m_values, cfg, workers=args.workers)
    meta = {
        "command": "limit-sweep",
        "observable": obs.label,
        "classical_reference": result.classical_reference,
        "converged": sweep_converged(result),
    }
    rows = (f"{m!r},{e!r},{s!r},{n}" for m, e, s, n in result.rows())
    run.write_text(
        "sweep.csv",
        _csv_with_meta(meta, "m_delta,estimate,std_error,n_samples", rows),
    )
    run.finish()
    print(
        f"sweep over {len(m_values)} kernel sharpness values; "
        f"classical reference {result.classical_reference:.10g}; "
        f"converged={meta['converged']} -> {args.out}"
    )
    return 0


def _cmd_grid_study(args, config: dict) -> int:
    density = build_density(config)
    obs = build_observable(config)
    cfg = build_sampler(config)
    tbl = _section(config, "grid_study")
    counts = _get(tbl, "grid_study", "slice_counts", list, required=True)
    run = _Run("grid-study", args.out, config)
    result = grid_refinement_study(density, obs, counts, cfg)
    meta = {
        "command": "grid-study",
        "observable": obs.label,
        "classical_reference": result.classical_reference,
    }
    rows = (
        f"{r.n_slices},{r.estimate!r},{r.std_error!r},{r.n_samples}"
        for r in result.rows
    )
    run.write_text(
        "grid_study.csv",
        _csv_with_meta(meta, "n_slices,estimate,std_error,n_samples", rows),
    )
    run.finish()
    print(f"grid study over {len(counts)} resolutions -> {args.out}")
    return 0


def _cmd_oracle_check(args, config: dict) -> int:
    density = build_density(config)
    obs = build_observable(config)
    cfg = build_sampler(config)
    tbl = _section(config, "lattice")
    points = _get(tbl, "lattice", "points_per_slice", int, required=True)
    lo = _get(tbl, "lattice", "x_lo", list)
    hi = _get(tbl, "lattice", "x_hi", list)
    if lo is not None and hi is not None:
        lattice = LatticeSpec(
            density.grid.n_slices, points, np.stack([lo, hi], axis=-1)
        )
    else:
        lattice = lattice_for(
            density, points, widths=_get(tbl, "lattice", "widths", float, default=6.0)
        )
    run = _Run("oracle-check", args.out, config)
    res = expectation(density, obs, cfg)
    report = oracle_compare(
        density,
        obs,
        res.estimate,
        res.std_error,
        lattice,
        case_id=res.config_digest,
    )
    run.write_json("oracle_report.json", report)
    run.finish()
    print(
        f"mc={report['mc_estimate']:.8g} lattice={report['lattice_value']:.8g} "
        f"verdict={report['verdict']} -> {args.out}"
    )
    return 0 if report["verdict"] == "agree" else 2


def _cmd_battery(args, config: dict) -> int:
    run = _Run("battery", args.out, config)
    report = regression_battery()
    rows = (
        f"{r.row_id},{json.dumps(r.description)},{r.value!r},{r.reference!r},"
        f"{r.tolerance!r},{int(r.passed)}"
        for r in report.rows
    )
    run.write_text(
        "battery.csv",
        _csv_with_meta(
            {"command": "battery", "passed": report.passed},
            "row_id,description,value,reference,tolerance,passed",
            rows,
        ),
    )
    run.write_json(
        "battery.json",
        {
            "passed": report.passed,
            "rows": [
                {
                    "row_id": r.row_id,
                    "description": r.description,
                    "value": r.value,
                    "reference": r.reference,
                    "tolerance": r.tolerance,
                    "passed": r.passed,
                }
                for r in report.rows
            ],
        },
    )
    run.finish()
    for line in report.lines():
        print(line)
    return 0 if report.passed else 3


# ----------------------------------------------------------------- main --


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pathdensity",
        description="Trajectory-density engine: classical mechanics as the "
        "sharp limit of kernel-smoothed path distributions.",
    )
    p.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: ${OUT_ENV} or the working directory)",
    )
    p.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads for independent study rows",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("systems", help="list the system catalog")

    def with_config(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="TOML config file")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY.PATH=VALUE",
            help="override a config value (repeatable)",
        )
        return sp

    sp = with_config("sample", "draw a trajectory batch")
    sp.add_argument(
        "--format", choices=("csv", "binary", "both"), default="csv",
        help="batch artifact format",
    )
    with_config("expect", "estimate one expectation value")
    with_config("node-scan", "tabulate a single-time marginal and its nodes")
    with_config("limit-sweep", "kernel sharpness sweep")
    with_config("grid-study", "estimate vs time-grid resolution")
    with_config("oracle-check", "cross-validate against the lattice oracle")
    bp = sub.add_parser("battery", help="run the regression battery")
    bp.add_argument("config", nargs="?", default=None, help="unused; battery is self-contained")
    return p


_COMMANDS = {
    "sample": _cmd_sample,
    "expect": _cmd_expect,
    "node-scan": _cmd_node_scan,
    "limit-sweep": _cmd_limit_sweep,
    "grid-study": _cmd_grid_study,
    "oracle-check": _cmd_oracle_check,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.out is None:
        args.out = os.environ.get(OUT_ENV, ".")
    try:
        if args.command == "systems":
            return _cmd_systems(args)
        if args.command == "battery":
            return _cmd_battery(args, {})
        config = _apply_overrides(_load_config(args.config), args.overrides)
        return _COMMANDS[args.command](args, config)
    except (ConfigError, LatticeBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        DivergentObservableError,
        QuadratureError,
        SamplerError,
        DegenerateWeightsError,
    ) as exc:
        print(f"numerical sentinel: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
