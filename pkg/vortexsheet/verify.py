"""Invariant suite behind the ``verify`` subcommand."""

import math
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from vortexsheet.db import log_system_event
from vortexsheet.errors import VortexSheetError
from vortexsheet.evolve import (
    VerticalGrid,
    growth_rate_fit,
    linearized_solve,
    stable_step,
    window_residuals,
)
from vortexsheet.modes import build_mode, mode_residual
from vortexsheet.physics import cutoff, jacobian_lower_bound, theta_slope_bound
from vortexsheet.schemas import SQRT2, CheckResult, FlatteningProfile, ShearState, VerificationReport
from vortexsheet.sobolev import illposedness_table, make_bump, mode_norms_sq
from vortexsheet.symbol import (
    Frequency,
    cartesian_root_data,
    growing_root,
    neutral_root_exclusion,
    quartic_roots,
    quartic_residual,
    simple_root_factor,
    supercritical_scan,
    symbol_reduced,
    tilde_c,
    velocity_coef_bounds,
    vertical_roots,
)

Outcome = Tuple[bool, Optional[float], str]

ORACLE_MACHS = (0.3, 0.7, 1.0, 1.3)
ORACLE_ETAS = (1.0, 2.0)
ORACLE_POINTS = 2048
ORACLE_T_END = 5.0
# the radiated front stays inside the domain up to t = 200
SUPERCRITICAL_T_END = 200.0
SUPERCRITICAL_HALF_WIDTH = 280.0


def _unit_state(mach: float = 1.0, eps0: float = 0.1) -> ShearState:
    return ShearState.from_mach(mach, mach_floor=eps0)


def _oracle_slope(mach: float, eta: float, points: int) -> Tuple[float, float]:
    state = _unit_state(mach)
    grid = VerticalGrid(half_width=40.0 / eta, points_per_side=points)
    result = linearized_solve(state, eta, grid, None, ORACLE_T_END, "analytic-mode", record_every=4)
    fit = growth_rate_fit(result.times, result.log_norms)
    return fit.slope, quartic_roots(state).require_growth() * eta


def _energy_residual(points: int, t_end: float = 1.0) -> float:
    state = _unit_state()
    grid = VerticalGrid(half_width=40.0, points_per_side=points)
    result = linearized_solve(state, 1.0, grid, None, t_end, "analytic-mode")
    return float(np.max(window_residuals(result.dt, result.energies, result.productions)))


class InvariantSuite:
    """Named checks of the analytic results and their numerical oracles."""

    def __init__(self):
        self._checks: Dict[str, Callable[[], Outcome]] = {
            "stability_threshold": self.check_stability_threshold,
            "root_identities": self.check_root_identities,
            "symbol_zero_simple": self.check_symbol_zero_simple,
            "neutral_roots": self.check_neutral_roots,
            "ratio_bounds": self.check_ratio_bounds,
            "mode_residuals": self.check_mode_residuals,
            "illposedness_tables": self.check_illposedness_tables,
            "log_linear_consistency": self.check_log_linear_consistency,
            "growth_oracle": self.check_growth_oracle,
            "grid_convergence": self.check_grid_convergence,
            "supercritical_neutral": self.check_supercritical_neutral,
            "energy_identity": self.check_energy_identity,
            "zero_data": self.check_zero_data,
            "geometry_bound": self.check_geometry_bound,
        }

    @property
    def names(self) -> List[str]:
        return list(self._checks)

    def run(self, names: Optional[Sequence[str]] = None) -> VerificationReport:
        selected = list(names) if names else self.names
        unknown = [n for n in selected if n not in self._checks]
        if unknown:
            raise KeyError(f"unknown checks: {', '.join(unknown)}")

        results = []
        for name in selected:
            started = time.perf_counter()
            try:
                passed, value, detail = self._checks[name]()
            except VortexSheetError as e:
                passed, value, detail = False, None, f"{type(e).__name__}: {e}"
            elapsed = time.perf_counter() - started
            log_system_event(
                "INFO" if passed else "ERROR",
                f"{name}: {'pass' if passed else 'FAIL'} ({detail})",
                "verify",
            )
            results.append(CheckResult(name=name, passed=passed, value=value, detail=detail, seconds=elapsed))
        return VerificationReport(checks=results)

    # symbol

    def check_stability_threshold(self) -> Outcome:
        machs = [0.1 + 0.01 * i for i in range(191)]
        signs = [quartic_roots(_unit_state(m)).x1_sq for m in machs]
        wrong = [m for m, x in zip(machs, signs) if (x > 0) != (m < SQRT2)]
        crossings = [
            (lo, hi) for lo, hi, a, b in zip(machs, machs[1:], signs, signs[1:]) if a > 0 >= b
        ]
        ok = not wrong and len(crossings) == 1 and crossings[0][0] <= SQRT2 <= crossings[0][1]
        where = crossings[0] if crossings else None
        return ok, where[1] if where else None, f"sign change bracket {where}, misclassified {wrong}"

    def check_root_identities(self) -> Outcome:
        state = _unit_state()
        atlas = quartic_roots(state)
        worst = abs(atlas.x1_sq - (math.sqrt(5.0) - 2.0))
        ok = worst <= 1e-14
        for eta in (1.0, 10.0, 100.0):
            roots = vertical_roots(state, growing_root(state, eta))
            for err in (
                abs(roots.product - eta * eta) / eta**2,
                abs(abs(roots.mu_plus) - eta) / eta,
                abs(abs(roots.mu_minus) - eta) / eta,
            ):
                ok = ok and err <= 1e-12
                worst = max(worst, err)
        residual = max(quartic_residual(state, atlas.x1_sq), quartic_residual(state, atlas.x2_sq))
        ok = ok and residual <= 1e-12
        return ok, max(worst, residual), f"worst identity error {worst:.3e}, quartic residual {residual:.3e}"

    def check_symbol_zero_simple(self) -> Outcome:
        state = _unit_state()
        worst_zero, worst_fd = 0.0, 0.0
        floors = []
        for eta in (1.0, 10.0, 100.0):
            root = growing_root(state, eta)
            worst_zero = max(worst_zero, abs(symbol_reduced(state, root)) / (state.c**2 * eta**2))
            factor, floor = simple_root_factor(state, root)
            step = 1e-5 * eta
            above = symbol_reduced(state, Frequency(root.tau + step, eta))
            below = symbol_reduced(state, Frequency(root.tau - step, eta))
            slope = (above - below) / (2.0 * step)
            worst_fd = max(worst_fd, abs(slope - factor) / abs(factor))
            floors.append(floor / eta)
        ok = worst_zero <= 1e-10 and worst_fd <= 1e-6 and min(floors) > 0.0
        return ok, worst_zero, (
            f"|Sigma|/(c^2 eta^2) {worst_zero:.3e}, finite-difference mismatch {worst_fd:.3e}, "
            f"min ring floor/eta {min(floors):.4g}"
        )

    def check_neutral_roots(self) -> Outcome:
        excluded = neutral_root_exclusion(_unit_state()).excluded
        minimum = supercritical_scan(_unit_state(1.5))
        return excluded and minimum > 1e-8, minimum, (
            f"second root excluded: {excluded}; min |Sigma|/(c^2 eta^2) at M=1.5: {minimum:.4g}"
        )

    def check_ratio_bounds(self) -> Outcome:
        eps0 = 0.1
        floor = tilde_c(eps0)
        worst = math.inf
        bad = []
        for m in np.linspace(0.1, 1.41, 50):
            state = _unit_state(float(m), eps0)
            ratio = cartesian_root_data(state, 1.0).ratio_sq
            bounds = velocity_coef_bounds(state)
            slack = 1e-12
            if not (floor * (1.0 - slack) <= ratio < 4.0):
                bad.append(("ratioSq", float(m), ratio))
            if not (bounds.lower * (1.0 - slack) <= bounds.value <= bounds.upper * (1.0 + slack)):
                bad.append(("coef", float(m), bounds.value))
            worst = min(worst, ratio - floor)
        return not bad, worst, f"tilde C = {floor:.6g}; violations {bad}"

    # modes

    def check_mode_residuals(self) -> Outcome:
        worst = 0.0
        for m in (0.2, 0.5, 1.0, 1.3):
            state = _unit_state(m)
            for eta in (1.0, 10.0, 100.0):
                worst = max(worst, mode_residual(state, build_mode(state, eta)).worst)
        return worst <= 1e-10, worst, f"worst relative residual {worst:.3e}"

    # sobolev

    def check_illposedness_tables(self) -> Outcome:
        state = _unit_state()
        table = illposedness_table(state, 3, 3, 1.0, 2.0, range(1, 65))
        scaled = [r.band_index * math.exp(r.log_norm_initial_hj) for r in table.reports]
        bounded = max(scaled[32:]) <= max(scaled[:32])
        dominated = all(
            r.log_norm_later_hk >= r.lower_bound_log_hk
            and r.log_norm_later_pressure >= r.lower_bound_log_pressure
            and r.log_norm_later_velocity >= r.lower_bound_log_velocity
            for r in table.reports
        )
        ratios = [r.ratio_log for r in table.reports]
        increasing = all(b > a for a, b in zip(ratios, ratios[1:]))

        x1 = quartic_roots(state).require_growth()
        scan = next(
            n for n in range(1, 1000)
            if math.exp(2.0 * x1 * n) / (1.0 + (n + 1) ** 2) >= 4.0 * n * n
        )
        threshold = table.thresholds["front"]
        ok = bounded and dominated and increasing and threshold == scan == 12
        return ok, float(threshold), (
            f"n*||initial|| bounded: {bounded}, bounds dominated: {dominated}, "
            f"ratio increasing: {increasing}, front threshold {threshold} (scan {scan})"
        )

    def check_log_linear_consistency(self) -> Outcome:
        state = _unit_state()
        worst = 0.0
        for n in range(1, 21):
            spectrum = make_bump(n, 3)
            for degree, t in ((3, 0.0), (3, 1.0)):
                in_logs = mode_norms_sq(spectrum, state, degree, t)
                linear = mode_norms_sq(spectrum, state, degree, t, log_domain=False)
                worst = max(worst, max(abs(a - b) for a, b in zip(in_logs, linear)))
        return worst <= 1e-10, worst, f"largest log difference {worst:.3e}"

    # evolve

    def check_growth_oracle(self) -> Outcome:
        worst = 0.0
        for m in ORACLE_MACHS:
            for eta in ORACLE_ETAS:
                slope, rate = _oracle_slope(m, eta, ORACLE_POINTS)
                worst = max(worst, abs(slope - rate) / rate)
        return worst <= 0.02, worst, f"worst relative slope error {worst:.3e}"

    def check_grid_convergence(self) -> Outcome:
        coarse, rate = _oracle_slope(1.0, 1.0, ORACLE_POINTS // 2)
        fine, _ = _oracle_slope(1.0, 1.0, ORACLE_POINTS)
        gain = abs(coarse - rate) / max(abs(fine - rate), 1e-300)
        return gain >= 3.0, gain, f"slope error {abs(coarse - rate):.3e} -> {abs(fine - rate):.3e}"

    def check_supercritical_neutral(self) -> Outcome:
        state = _unit_state(1.5)
        grid = VerticalGrid(half_width=SUPERCRITICAL_HALF_WIDTH, points_per_side=ORACLE_POINTS)
        result = linearized_solve(state, 1.0, grid, None, SUPERCRITICAL_T_END, "front-bump", record_every=32)
        slope = growth_rate_fit(result.times, result.log_norms).slope
        ok = abs(slope) <= 0.01 * state.c and not result.far_field_contaminated
        return ok, slope, f"log-norm slope {slope:.3e}, far field contaminated: {result.far_field_contaminated}"

    def check_energy_identity(self) -> Outcome:
        baseline = _energy_residual(ORACLE_POINTS)
        coarse = _energy_residual(512)
        fine = _energy_residual(1024)
        ok = baseline <= 1e-6 and fine < coarse
        return ok, baseline, f"residual {baseline:.3e} at N={ORACLE_POINTS}; {coarse:.3e} -> {fine:.3e} on refinement"

    def check_zero_data(self) -> Outcome:
        state = _unit_state()
        grid = VerticalGrid(half_width=40.0, points_per_side=64)
        dt = stable_step(state, grid)
        result = linearized_solve(state, 1.0, grid, dt, 1000 * dt, "zero", record_every=10)
        peak = float(np.max(result.norms))
        return result.steps == 1000 and peak <= 1e-12, peak, f"max norm {peak:.3e} over {result.steps} steps"

    # physics

    def check_geometry_bound(self) -> Outcome:
        samples = np.linspace(-20.0, 20.0, 40001)
        lowest = math.inf
        for supremum in (0.0, 0.5, 1.0):
            profile = FlatteningProfile(front_supremum=supremum)
            for front in np.linspace(-2.0, 2.0, 41):
                lowest = min(lowest, jacobian_lower_bound(profile, float(front), samples))
        slope = theta_slope_bound(FlatteningProfile())
        inner, _ = cutoff(FlatteningProfile(), np.array([0.0, 1.0]))
        ok = lowest >= 1.0 / 3.0 - 1e-12 and slope <= 1.0 + 1e-12 and bool(np.all(inner == 1.0))
        return ok, lowest, f"min Jacobian {lowest:.6g}, max |theta'| {slope:.6g}"


invariant_suite = InvariantSuite()
