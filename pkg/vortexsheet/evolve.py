"""Time-domain check of the growth rate and the energy identity.

Each Fourier mode in x1 is advanced on two vertical half-grids that share the
interface node. Both halves are stored in their own outward coordinate
y = |x2| (index 0 at the interface), with the normal velocity taken along y,
so one operator serves both sides; the lower side stores -v2 internally.

Spatial derivatives use the second-order summation-by-parts (SBP) central
operator. The interface conditions [h] = 0 and [v2] = 2 i v eta g enter as
characteristic penalties towards the states of the exact interface Riemann
problem; the far field gets homogeneous incoming characteristics. The
semi-discrete energy changes through the interface production terms and the
closure terms of the penalties (an interface relaxation that vanishes with
the mismatch, and a non-positive far-field outflow). With both counted the
discrete balance is exact up to the time integrator.
"""

import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse, stats

from vortexsheet.db import log_system_event
from vortexsheet.errors import (
    InstabilityDetected,
    InsufficientData,
    NoGrowingRootError,
    StepSizeError,
    ValidationFailure,
)
from vortexsheet.modes import build_mode
from vortexsheet.schemas import FitResult, ShearState
from vortexsheet.symbol import growing_root, quartic_roots, require_growing_range, vertical_roots

InitKind = Literal["analytic-mode", "front-bump", "zero"]

CFL_LIMIT = 0.5
RESOLUTION_LIMIT = 0.2
CONTAMINATION_RATIO = 1e-8
MIN_FIT_SAMPLES = 10
INSTABILITY_FACTOR = 3.0
NEUTRAL_RATE_FLOOR = 0.05


@dataclass(frozen=True)
class VerticalGrid:
    half_width: float
    points_per_side: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValidationFailure(f"half width must be > 0, got {self.half_width}")
        if self.points_per_side < 64:
            raise ValidationFailure(f"points per side must be >= 64, got {self.points_per_side}")

    @property
    def spacing(self) -> float:
        return self.half_width / self.points_per_side

    @property
    def nodes(self) -> np.ndarray:
        """Distances |x2| of the nodes from the interface, 0..L."""
        return np.arange(self.points_per_side + 1) * self.spacing

    def resolves(self, decay_rate: complex) -> bool:
        return decay_rate.real * self.spacing <= RESOLUTION_LIMIT


@dataclass(frozen=True)
class ModeState:
    """One snapshot; v2 arrays are the physical vertical velocity on each side."""

    eta: float
    time: float
    spacing: float
    h_upper: np.ndarray
    h_lower: np.ndarray
    v1_upper: np.ndarray
    v1_lower: np.ndarray
    v2_upper: np.ndarray
    v2_lower: np.ndarray
    front_amp: complex
    interface_pressure: complex
    interface_v2_upper: complex
    interface_v2_lower: complex


def sbp_operator(points: int, spacing: float) -> Tuple[sparse.csr_matrix, np.ndarray]:
    """Second-order SBP first derivative D and the diagonal of its norm H."""
    n = points + 1
    off = np.full(n - 1, 0.5)
    d = sparse.diags([-off, off], [-1, 1], shape=(n, n), format="lil")
    d[0, 0], d[0, 1] = -1.0, 1.0
    d[n - 1, n - 2], d[n - 1, n - 1] = -1.0, 1.0
    weights = np.full(n, spacing)
    weights[0] = weights[-1] = 0.5 * spacing
    return (d / spacing).tocsr(), weights


class VortexSheetSolver:
    """Semi-discrete two-sided linearized system for one horizontal wavenumber."""

    def __init__(self, state: ShearState, eta: float, grid: VerticalGrid):
        self.state = state
        self.eta = float(eta)
        self.grid = grid
        self.n = grid.points_per_side + 1
        self.derivative, self.weights = sbp_operator(grid.points_per_side, grid.spacing)

    # packing: [h+, v1+, y+, h-, v1-, y-, g], y = velocity along |x2|
    def unpack(self, y: np.ndarray):
        n = self.n
        blocks = [y[i * n:(i + 1) * n] for i in range(6)]
        return blocks[:3], blocks[3:], y[6 * n]

    def pack(self, upper, lower, g: complex) -> np.ndarray:
        return np.concatenate([*upper, *lower, [g]]).astype(complex)

    def interface_states(self, y: np.ndarray) -> Tuple[complex, complex, complex]:
        """Riemann-solver pressure and physical v2 on each side of the interface."""
        c, v = self.state.c, self.state.shear
        (h_u, _, y_u), (h_l, _, y_l), g = self.unpack(y)
        out_upper = y_u[0] - c * h_u[0]
        out_lower = y_l[0] - c * h_l[0]
        jump = 2j * v * self.eta * g
        pressure = (jump - out_upper - out_lower) / (2.0 * c)
        v2_upper = out_upper + c * pressure
        v2_lower = -(out_lower + c * pressure)
        return complex(pressure), complex(v2_upper), complex(v2_lower)

    def _side_rhs(self, h, v1, vy, shear: float, target_incoming: complex):
        c, eta, dx = self.state.c, self.eta, self.grid.spacing
        advect = -1j * shear * eta
        dh = advect * h - 1j * eta * v1 - self.derivative @ vy
        dv1 = advect * v1 - c**2 * 1j * eta * h
        dvy = advect * vy - c**2 * (self.derivative @ h)

        # interface: relax the incoming characteristic towards the Riemann state
        mismatch = (vy[0] + c * h[0]) - target_incoming
        dh[0] -= mismatch / (2.0 * dx)
        dvy[0] -= c * mismatch / (2.0 * dx)

        # far field: zero incoming characteristic
        incoming = vy[-1] - c * h[-1]
        dh[-1] += incoming / (2.0 * dx)
        dvy[-1] -= c * incoming / (2.0 * dx)
        return dh, dv1, dvy

    def rhs(self, y: np.ndarray) -> np.ndarray:
        c, v = self.state.c, self.state.shear
        upper, lower, g = self.unpack(y)
        pressure, v2_upper, v2_lower = self.interface_states(y)
        d_upper = self._side_rhs(*upper, v, v2_upper + c * pressure)
        d_lower = self._side_rhs(*lower, -v, -v2_lower + c * pressure)
        dg = v2_upper - 1j * v * self.eta * g
        return self.pack(d_upper, d_lower, dg)

    def step(self, y: np.ndarray, dt: float) -> np.ndarray:
        """Classical fourth-order Runge-Kutta step."""
        k1 = self.rhs(y)
        k2 = self.rhs(y + 0.5 * dt * k1)
        k3 = self.rhs(y + 0.5 * dt * k2)
        k4 = self.rhs(y + dt * k3)
        return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def snapshot(self, y: np.ndarray, time: float) -> ModeState:
        (h_u, v1_u, y_u), (h_l, v1_l, y_l), g = self.unpack(y)
        pressure, v2_upper, v2_lower = self.interface_states(y)
        return ModeState(
            eta=self.eta,
            time=time,
            spacing=self.grid.spacing,
            h_upper=h_u.copy(),
            h_lower=h_l.copy(),
            v1_upper=v1_u.copy(),
            v1_lower=v1_l.copy(),
            v2_upper=y_u.copy(),
            v2_lower=-y_l,
            front_amp=complex(g),
            interface_pressure=pressure,
            interface_v2_upper=v2_upper,
            interface_v2_lower=v2_lower,
        )

    def initial_data(self, kind: InitKind) -> np.ndarray:
        x = self.grid.nodes
        n = self.n
        if kind == "zero":
            return np.zeros(6 * n + 1, dtype=complex)
        if kind == "front-bump":
            g = 1.0 + 0.0j
            bump = np.exp(-((self.eta * x) ** 2))
            kick = 1j * self.state.shear * self.eta * g * bump
            zeros = np.zeros(n, dtype=complex)
            # v2 jumps by 2 i v eta g; -v2 is stored below
            return self.pack((bump, zeros, kick), (bump, zeros, kick), g)
        if kind == "analytic-mode":
            mode = build_mode(self.state, self.eta)
            if not self.grid.resolves(mode.mu_plus) or not self.grid.resolves(mode.mu_minus):
                raise ValidationFailure(
                    f"grid spacing {self.grid.spacing:.4g} does not resolve decay rate "
                    f"{mode.mu_plus.real:.4g} (need Re mu * dx <= {RESOLUTION_LIMIT})"
                )
            upper = (mode.pressure_upper.value(x), mode.v1_upper.value(x), mode.v2_upper.value(x))
            lower = (mode.pressure_lower.value(-x), mode.v1_lower.value(-x), -mode.v2_lower.value(-x))
            return self.pack(upper, lower, mode.front_amp)
        raise ValidationFailure(f"unknown init {kind!r}")


def _weights(length: int, spacing: float) -> np.ndarray:
    weights = np.full(length, spacing)
    weights[0] = weights[-1] = 0.5 * spacing
    return weights


def mode_energy(state: ShearState, snap: ModeState) -> float:
    """1/2 of the discrete integral of c^2|h|^2 + |v|^2 over both sides, plus 1/2 |g|^2."""
    w = _weights(len(snap.h_upper), snap.spacing)
    bulk = 0.0
    for arr, factor in (
        (snap.h_upper, state.c**2), (snap.h_lower, state.c**2),
        (snap.v1_upper, 1.0), (snap.v1_lower, 1.0),
        (snap.v2_upper, 1.0), (snap.v2_lower, 1.0),
    ):
        bulk += factor * float(np.sum(w * np.abs(arr) ** 2))
    return 0.5 * bulk + 0.5 * abs(snap.front_amp) ** 2


def interface_production(state: ShearState, snap: ModeState) -> float:
    """2 c^2 Re(h(0) conj(i v eta g)) + Re(v2(0) conj(g)), on the Riemann states."""
    g = snap.front_amp
    forcing = 1j * state.shear * snap.eta * g
    return float(
        2.0 * state.c**2 * (snap.interface_pressure * forcing.conjugate()).real
        + (snap.interface_v2_upper * g.conjugate()).real
    )


def closure_rate(state: ShearState, snap: ModeState) -> float:
    """Energy rate of the penalty closures not covered by the interface production.

    Per side: node flux minus Riemann flux plus the interface relaxation, and
    the far-field outflow -c/4 |w + c h|^2 at y = L (never positive).
    """
    c, p = state.c, snap.interface_pressure
    total = 0.0
    # w is the velocity along |x2|; the lower side stores -v2
    for h, w, w_star in (
        (snap.h_upper, snap.v2_upper, snap.interface_v2_upper),
        (snap.h_lower, -snap.v2_lower, -snap.interface_v2_lower),
    ):
        incoming = w[0] + c * h[0]
        mismatch = incoming - (w_star + c * p)
        total += c**2 * (h[0].conjugate() * w[0]).real
        total -= c**2 * (p.conjugate() * w_star).real
        total -= 0.25 * c * (incoming.conjugate() * mismatch).real
        total -= 0.25 * c * abs(w[-1] + c * h[-1]) ** 2
    return float(total)


def boundary_production(state: ShearState, snap: ModeState) -> float:
    """Exact semi-discrete dE/dt: interface production plus closure terms."""
    return interface_production(state, snap) + closure_rate(state, snap)


def energy_residuals(state: ShearState, snapshots: Sequence[ModeState]) -> np.ndarray:
    """Per-window residual of the energy identity, Simpson rule over snapshot triples.

    Normalized by the largest energy change of any window.
    """
    if len(snapshots) < 3:
        raise InsufficientData(f"energy balance needs >= 3 snapshots, got {len(snapshots)}")
    times = np.array([s.time for s in snapshots])
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValidationFailure("energy balance needs equally spaced snapshots")
    energy = np.array([mode_energy(state, s) for s in snapshots])
    power = np.array([boundary_production(state, s) for s in snapshots])
    return window_residuals(steps[0], energy, power)


def window_residuals(step: float, energy: np.ndarray, power: np.ndarray) -> np.ndarray:
    """Simpson-window residuals for equally spaced energy and production samples."""
    energy = np.asarray(energy, dtype=float)
    power = np.asarray(power, dtype=float)
    if len(energy) < 3:
        raise InsufficientData(f"energy balance needs >= 3 samples, got {len(energy)}")
    change = energy[2:] - energy[:-2]
    produced = step / 3.0 * (power[:-2] + 4.0 * power[1:-1] + power[2:])
    scale = float(np.max(np.maximum(np.abs(change), np.abs(produced))))
    if scale == 0.0:
        return np.zeros_like(change)
    return np.abs(change - produced) / scale


def energy_balance(state: ShearState, snapshots: Sequence[ModeState]) -> float:
    return float(np.max(energy_residuals(state, snapshots)))


@dataclass
class EvolutionResult:
    times: np.ndarray
    norms: np.ndarray
    fronts: np.ndarray
    grid: VerticalGrid
    dt: float
    steps: int
    resolved: bool
    far_field_contaminated: bool = False
    energies: np.ndarray = field(default_factory=lambda: np.zeros(0))
    productions: np.ndarray = field(default_factory=lambda: np.zeros(0))
    snapshots: List[ModeState] = field(default_factory=list)

    @property
    def log_norms(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.norms)

    def series(self) -> List[Tuple[float, float, complex]]:
        return list(zip(self.times.tolist(), self.log_norms.tolist(), self.fronts.tolist()))

    def energy_residuals(self) -> np.ndarray:
        """Window residuals over the equally spaced part of the record."""
        times, energy, power = self.times, self.energies, self.productions
        if len(times) < 3:
            raise InsufficientData(f"energy balance needs >= 3 samples, got {len(times)}")
        spacing = times[1] - times[0]
        # the final record lands on t_end and may be closer than the others
        if not math.isclose(times[-1] - times[-2], spacing, rel_tol=1e-9):
            times, energy, power = times[:-1], energy[:-1], power[:-1]
        return window_residuals(spacing, energy, power)


def front_mode_evolve(state: ShearState, eta: float, g0: complex, gdot0: complex, t: float) -> complex:
    """Exact solution of g'' = X1^2 eta^2 g."""
    require_growing_range(state)
    if t < 0:
        raise ValidationFailure(f"t must be >= 0, got {t}")
    rate = quartic_roots(state).require_growth() * abs(eta)
    if rate == 0.0:
        return complex(g0 + gdot0 * t)
    grow = 0.5 * (g0 + gdot0 / rate)
    decay = 0.5 * (g0 - gdot0 / rate)
    return complex(grow * math.exp(rate * t) + decay * math.exp(-rate * t))


def stable_step(state: ShearState, grid: VerticalGrid, cfl: float = CFL_LIMIT) -> float:
    return cfl * grid.spacing / (state.c + state.shear)


def _reference_rate(state: ShearState, eta: float) -> float:
    atlas = quartic_roots(state)
    growth = atlas.growth_slope * abs(eta) if atlas.growth_slope is not None else 0.0
    return max(growth, NEUTRAL_RATE_FLOOR * state.c * abs(eta))


def linearized_solve(
    state: ShearState,
    eta: float,
    grid: VerticalGrid,
    dt: Optional[float],
    t_end: float,
    init: InitKind = "analytic-mode",
    record_every: int = 1,
    keep_snapshots: bool = False,
    cfl: float = CFL_LIMIT,
) -> EvolutionResult:
    """Advance one Fourier mode of the two-sided system and record its norm."""
    if eta == 0:
        raise ValidationFailure("eta must be nonzero")
    if t_end <= 0:
        raise ValidationFailure(f"t_end must be > 0, got {t_end}")
    limit = stable_step(state, grid)
    if dt is None:
        steps = max(1, math.ceil(t_end / stable_step(state, grid, cfl)))
        dt = t_end / steps
    else:
        if dt > limit * (1.0 + 1e-12):
            raise StepSizeError(f"dt={dt:.6g} exceeds 0.5 dx/(c+v) = {limit:.6g}")
        steps = max(1, int(round(t_end / dt)))

    solver = VortexSheetSolver(state, eta, grid)
    y = solver.initial_data(init)
    resolved = True
    try:
        freq = growing_root(state, eta)
        roots = vertical_roots(state, freq)
        resolved = grid.resolves(roots.mu_plus) and grid.resolves(roots.mu_minus)
    except NoGrowingRootError:
        pass

    reference = _reference_rate(state, eta)
    times, norms, fronts, energies, productions, snapshots = [], [], [], [], [], []
    contaminated = False

    def record(step: int):
        nonlocal contaminated
        t = step * dt
        snap = solver.snapshot(y, t)
        energy = mode_energy(state, snap)
        norm = math.sqrt(2.0 * energy)
        energies.append(energy)
        productions.append(boundary_production(state, snap))
        times.append(t)
        norms.append(norm)
        fronts.append(snap.front_amp)
        if keep_snapshots:
            snapshots.append(snap)
        if norms[0] > 0 and norm > 0:
            if math.log(norm / norms[0]) > INSTABILITY_FACTOR * reference * t + math.log(10.0):
                raise InstabilityDetected(
                    f"norm grew by {math.log(norm / norms[0]):.3g} e-folds by t={t:.4g}, "
                    f"analytic rate {reference:.4g}; reduce dt or refine the grid"
                )
        if not contaminated:
            far = max(abs(a[-1]) for a in (snap.h_upper, snap.h_lower, snap.v2_upper, snap.v2_lower))
            near = max(abs(snap.interface_pressure), abs(snap.interface_v2_upper), abs(snap.interface_v2_lower))
            if near > 0 and far > CONTAMINATION_RATIO * near:
                contaminated = True
                log_system_event(
                    "WARNING",
                    f"far-field values reach {far / near:.3g} of interface values at t={t:.4g}; "
                    f"increase the half width (L={grid.half_width})",
                    "evolve",
                )

    record(0)
    for step in range(1, steps + 1):
        y = solver.step(y, dt)
        if step % record_every == 0 or step == steps:
            record(step)

    log_system_event(
        "INFO",
        f"evolved eta={eta} on N={grid.points_per_side}, L={grid.half_width} for {steps} steps (dt={dt:.4g})",
        "evolve",
    )
    return EvolutionResult(
        times=np.array(times),
        norms=np.array(norms),
        fronts=np.array(fronts, dtype=complex),
        grid=grid,
        dt=dt,
        steps=steps,
        resolved=resolved,
        far_field_contaminated=contaminated,
        energies=np.array(energies),
        productions=np.array(productions),
        snapshots=snapshots,
    )


def growth_rate_fit(times: Sequence[float], log_norms: Sequence[float]) -> FitResult:
    """Least-squares slope of log-norm against time over the final two thirds."""
    times = np.asarray(times, dtype=float)
    log_norms = np.asarray(log_norms, dtype=float)
    if len(times) < MIN_FIT_SAMPLES:
        raise InsufficientData(f"growth-rate fit needs >= {MIN_FIT_SAMPLES} samples, got {len(times)}")
    start = len(times) // 3
    t, y = times[start:], log_norms[start:]
    if np.all(np.isneginf(y)):
        # identically zero field: nothing grows
        return FitResult(slope=0.0, r_squared=0.0, samples=len(t), e_folds=0.0)
    if not np.all(np.isfinite(y)):
        raise InsufficientData("growth-rate fit needs finite log-norms over the fit window")
    fit = stats.linregress(t, y)
    e_folds = float(np.max(y) - np.min(y))
    if fit.slope > 0 and e_folds < 2.0:
        log_system_event(
            "WARNING",
            f"fit window spans only {e_folds:.3g} e-folds; slope {fit.slope:.6g} may carry transients",
            "evolve",
        )
    return FitResult(
        slope=float(fit.slope),
        r_squared=float(fit.rvalue**2),
        samples=len(t),
        e_folds=e_folds,
    )
