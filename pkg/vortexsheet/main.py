"""Command-line front end for vortexsheet."""

import argparse
import hashlib
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from vortexsheet import db
from vortexsheet.config import Config
from vortexsheet.db import log_system_event
from vortexsheet.errors import InvariantSuiteFailure, NoGrowingRootError, VortexSheetError
from vortexsheet.evolve import VerticalGrid, growth_rate_fit, linearized_solve
from vortexsheet.modes import build_mode, mode_residual, mode_summary, reflect_mode
from vortexsheet.physics import mach_class
from vortexsheet.schemas import EvolveSummary, RunConfig, ShearState
from vortexsheet.sobolev import illposedness_table
from vortexsheet.storage import ArtifactStore
from vortexsheet.symbol import (
    atlas_row,
    cartesian_root_data,
    neutral_root_exclusion,
    quartic_roots,
    tilde_c,
    velocity_coef_bounds,
)
from vortexsheet.verify import invariant_suite

SUBCOMMANDS = ("stability-map", "roots", "mode", "illposed", "evolve", "verify")
ATLAS_COLUMNS = [
    "M", "X1sq", "X1", "X2sq", "Y2", "a_over_eta2", "ratioSq", "coefLower", "coefValue", "coefUpper",
]
ILLPOSED_COLUMNS = [
    "n", "log_norm_initial_Hj", "log_norm_later_Hk", "lower_bound_log", "ratio_log", "threshold_flag",
]
EVOLVE_COLUMNS = ["time", "log_norm", "front_re", "front_im", "energy_residual"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML configuration file (default: config.toml if present)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides VORTEXSHEET_OUT_DIR and the file)")
    common.add_argument("--format", choices=["csv", "json"], help="table format")
    common.add_argument("--no-ledger", action="store_true", help="do not record the run in the SQLite ledger")

    state = common.add_argument_group("background state")
    state.add_argument("--mach", type=float, help="Mach number v/c of the shear")
    state.add_argument("--sound-speed", type=float, help="sound speed c")
    state.add_argument("--eps0", type=float, help="lower Mach cutoff of the growing range")
    state.add_argument("--angle", type=float, help="angle between wave vector and flow, radians")

    params = common.add_argument_group("subcommand parameters")
    params.add_argument("--eta", type=float, help="horizontal wavenumber (mode, evolve)")
    params.add_argument("--band-min", type=int, help="first band index n (illposed)")
    params.add_argument("--band-max", type=int, help="last band index n (illposed)")
    params.add_argument("--j", type=int, help="initial Sobolev order (illposed)")
    params.add_argument("--k", type=int, help="later Sobolev order (illposed)")
    params.add_argument("--t0", type=float, help="time of the later norm (illposed)")
    params.add_argument("--alpha", type=float, help="growth threshold (illposed)")
    params.add_argument("--grid-n", type=int, help="grid points per side (evolve)")
    params.add_argument("--grid-l", type=float, help="vertical half width L (evolve, default 40/eta)")
    params.add_argument("--dt", type=float, help="time step (evolve, default from CFL 0.5)")
    params.add_argument("--t-end", type=float, help="final time (evolve)")
    params.add_argument("--init", choices=["analytic-mode", "front-bump", "zero"], help="initial data (evolve)")

    parser = argparse.ArgumentParser(
        prog="vortexsheet",
        description="Linear stability of the compressible vortex sheet: symbol roots, modes, "
        "Sobolev growth tables and a time-domain oracle.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    helps = {
        "stability-map": "sweep the Mach number and tabulate the dispersion roots",
        "roots": "roots, Cartesian data and coefficient bounds for one state",
        "mode": "build the growing normal mode and its residuals (JSON)",
        "illposed": "band-by-band norm growth tables and thresholds",
        "evolve": "time-domain run of one Fourier mode with a growth-rate fit",
        "verify": "run the invariant suite; exit 3 on any failure",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def _state_section(cfg: Config, args: argparse.Namespace) -> Dict[str, Any]:
    section = cfg.section("state")
    mach = section.pop("mach", None)
    if "eps0" in section:
        section["mach_floor"] = section.pop("eps0")
    if args.sound_speed is not None:
        section["sound_speed"] = args.sound_speed
    if args.eps0 is not None:
        section["mach_floor"] = args.eps0
    if args.angle is not None:
        section["angle"] = args.angle
    if args.mach is not None:
        mach = args.mach
    if mach is not None:
        section["shear_velocity"] = mach * section.get("sound_speed", 1.0)
    return section


def _overlay(section: Dict[str, Any], values: Dict[str, Any]) -> Dict[str, Any]:
    section.update({k: v for k, v in values.items() if v is not None})
    return section


def build_run_config(args: argparse.Namespace, cfg: Config) -> RunConfig:
    """Effective configuration: flags over environment over file over defaults."""
    mode = cfg.section("mode")
    front_amp = mode.pop("front_amp", None)
    if front_amp is not None:
        mode["front_amp_re"], mode["front_amp_im"] = (
            (front_amp[0], front_amp[1]) if isinstance(front_amp, list) else (front_amp, 0.0)
        )
    output = cfg.section("output")
    output["out_dir"] = args.out or cfg.out_dir
    ledger = cfg.section("ledger")
    if args.no_ledger:
        ledger["enabled"] = False

    return RunConfig.model_validate({
        "subcommand": args.subcommand,
        "state": _state_section(cfg, args),
        "stability_map": cfg.section("stability_map"),
        "mode": _overlay(mode, {"eta": args.eta}),
        "illposed": _overlay(cfg.section("illposed"), {
            "j": args.j, "k": args.k, "t0": args.t0, "alpha": args.alpha,
            "band_min": args.band_min, "band_max": args.band_max,
        }),
        "evolve": _overlay(cfg.section("evolve"), {
            "eta": args.eta, "grid_n": args.grid_n, "grid_l": args.grid_l, "dt": args.dt,
            "t_end": args.t_end, "init": args.init,
        }),
        "output": _overlay(output, {"format": args.format}),
        "ledger": ledger,
    })


def config_digest(run_config: RunConfig) -> str:
    """sha256 of everything that determines the artifacts."""
    payload = run_config.model_dump_json(exclude={"output", "ledger"})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _state_at_mach(state: ShearState, mach: float) -> ShearState:
    return state.model_copy(update={"shear_velocity": mach * state.c / math.cos(state.angle)})


def run_stability_map(run_config: RunConfig, store: ArtifactStore) -> List[Path]:
    settings = run_config.stability_map
    count = int(math.floor((settings.mach_max - settings.mach_min) / settings.mach_step + 1e-9)) + 1
    rows = []
    for i in range(count):
        mach = settings.mach_min + i * settings.mach_step
        rows.append(atlas_row(_state_at_mach(run_config.state, mach)))
    log_system_event("INFO", f"stability map over {count} Mach values", "cli")
    return [store.write_table("stability_map", ATLAS_COLUMNS, rows, run_config.output.format)]


def run_roots(run_config: RunConfig, store: ArtifactStore) -> List[Path]:
    state = run_config.state
    row = atlas_row(state)
    atlas = quartic_roots(state)
    details: Dict[str, Any] = {
        "atlas": atlas.model_dump(),
        "regime": mach_class(state).value,
        "neutral_root": neutral_root_exclusion(state).model_dump(),
        "tilde_c": tilde_c(state.mach_floor),
    }
    if atlas.growth_slope is not None and state.mach >= state.mach_floor:
        details["cartesian"] = cartesian_root_data(state, 1.0).model_dump()
        details["coefficient_bounds"] = velocity_coef_bounds(state).model_dump()
    return [
        store.write_table("roots", ATLAS_COLUMNS, [row], run_config.output.format),
        store.write_json("roots_detail.json", details),
    ]


def run_mode(run_config: RunConfig, store: ArtifactStore) -> List[Path]:
    state = run_config.state
    mode = build_mode(state, run_config.mode.eta, run_config.mode.front_amp)
    summary = mode_summary(state, mode)
    summary["regime"] = mach_class(state).value
    summary["reflected_residuals"] = mode_residual(state, reflect_mode(mode)).model_dump()
    return [store.write_json("mode.json", summary)]


def run_illposed(run_config: RunConfig, store: ArtifactStore) -> List[Path]:
    settings = run_config.illposed
    table = illposedness_table(
        run_config.state,
        settings.j,
        settings.k,
        settings.t0,
        settings.alpha,
        range(settings.band_min, settings.band_max + 1),
        settings.norm_constant,
        settings.quadrature_order,
    )
    rows = [
        {
            "n": r.band_index,
            "log_norm_initial_Hj": r.log_norm_initial_hj,
            "log_norm_later_Hk": r.log_norm_later_hk,
            "lower_bound_log": r.lower_bound_log_hk,
            "ratio_log": r.ratio_log,
            "threshold_flag": int(r.exceeds_alpha),
        }
        for r in table.reports
    ]
    summary = table.model_dump(exclude={"reports"})
    summary["components"] = [
        r.model_dump(include={
            "band_index", "log_norm_initial_front", "log_norm_later_pressure", "log_norm_later_velocity",
            "lower_bound_log_pressure", "lower_bound_log_velocity",
        })
        for r in table.reports
    ]
    return [
        store.write_table("illposed", ILLPOSED_COLUMNS, rows, run_config.output.format),
        store.write_json("illposed_summary.json", summary),
    ]


def run_evolve(run_config: RunConfig, store: ArtifactStore) -> List[Path]:
    state, settings = run_config.state, run_config.evolve
    grid = VerticalGrid(half_width=settings.half_width, points_per_side=settings.grid_n)
    result = linearized_solve(
        state,
        settings.eta,
        grid,
        settings.dt,
        settings.t_end,
        settings.init,
        record_every=settings.record_every,
        cfl=settings.cfl,
    )

    residuals = np.full(len(result.times), math.nan)
    max_residual = None
    if len(result.times) >= 3:
        windows = result.energy_residuals()
        residuals[1:1 + len(windows)] = windows
        max_residual = float(np.max(windows))

    rows = [
        {"time": t, "log_norm": ln, "front_re": g.real, "front_im": g.imag, "energy_residual": r}
        for t, ln, g, r in zip(
            result.times.tolist(), result.log_norms.tolist(), result.fronts.tolist(), residuals.tolist()
        )
    ]
    artifacts = [store.write_table("evolve", EVOLVE_COLUMNS, rows, run_config.output.format)]

    fit = growth_rate_fit(result.times, result.log_norms)
    try:
        analytic: Optional[float] = quartic_roots(state).require_growth() * abs(settings.eta)
    except NoGrowingRootError:
        analytic = None
    summary = EvolveSummary(
        fitted_slope=fit.slope,
        analytic_rate=analytic,
        relative_error=abs(fit.slope - analytic) / analytic if analytic else None,
        r_squared=fit.r_squared,
        points_per_side=grid.points_per_side,
        half_width=grid.half_width,
        spacing=grid.spacing,
        dt=result.dt,
        steps=result.steps,
        resolved=result.resolved,
        far_field_contaminated=result.far_field_contaminated,
        max_energy_residual=max_residual,
    )
    artifacts.append(store.write_json("evolve_summary.json", summary.model_dump()))
    return artifacts


def run_verify(run_config: RunConfig, store: ArtifactStore) -> List[Path]:
    report = invariant_suite.run()
    payload = report.model_dump(exclude={"checks": {"__all__": {"seconds"}}})
    payload["passed"] = report.passed
    path = store.write_json("verify.json", payload)
    if not report.passed:
        raise InvariantSuiteFailure(f"failed checks: {', '.join(report.failed)}", [path])
    return [path]


HANDLERS: Dict[str, Callable[[RunConfig, ArtifactStore], List[Path]]] = {
    "stability-map": run_stability_map,
    "roots": run_roots,
    "mode": run_mode,
    "illposed": run_illposed,
    "evolve": run_evolve,
    "verify": run_verify,
}


def artifact_dir(run_config: RunConfig) -> Path:
    """<out_dir>/<subcommand>-<digest prefix>; a new config never touches older results."""
    return Path(run_config.output.out_dir) / f"{run_config.subcommand}-{config_digest(run_config)[:12]}"


def dispatch(run_config: RunConfig) -> Tuple[int, List[Path]]:
    """Run one subcommand; returns the exit status and the artifacts written."""
    store = ArtifactStore(str(artifact_dir(run_config)))
    try:
        artifacts = HANDLERS[run_config.subcommand](run_config, store)
    except InvariantSuiteFailure as e:
        log_system_event("ERROR", str(e), "cli")
        return e.exit_code, e.artifacts
    except VortexSheetError as e:
        log_system_event("ERROR", f"{type(e).__name__}: {e}", "cli")
        return e.exit_code, []
    return 0, artifacts


def _format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        field = ".".join(str(part) for part in item["loc"])
        lines.append(f"  {field}: {item['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = Config(args.config, required=args.config is not None)
        run_config = build_run_config(args, cfg)
    except ValidationError as e:
        print(_format_validation_error(e), file=sys.stderr)
        return 1
    except VortexSheetError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    _setup_logging(cfg.log_level)
    ledger = run_config.ledger
    db.configure_ledger(f"sqlite:///{ledger.db_file}" if ledger.enabled else None)

    digest = config_digest(run_config)
    run_id = db.start_run(run_config.subcommand, digest)
    code, artifacts = dispatch(run_config)
    db.finish_run(run_id, code, [str(a) for a in artifacts])

    for path in artifacts:
        print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
