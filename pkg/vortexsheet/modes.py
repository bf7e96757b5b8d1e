"""Explicit growing normal modes and their residual checks."""

from dataclasses import dataclass, replace
from typing import Any, Dict, Literal, Tuple

import numpy as np

from vortexsheet.errors import DegenerateModeError, ValidationFailure
from vortexsheet.schemas import ResidualReport, ShearState
from vortexsheet.symbol import require_growing_range, growing_root, quartic_roots, vertical_roots

Side = Literal["upper", "lower"]


@dataclass(frozen=True)
class ExpProfile:
    """amplitude * exp(-rate x2) above the interface, amplitude * exp(rate x2) below."""

    amplitude: complex
    decay_rate: complex
    side: Side

    def __post_init__(self):
        if self.decay_rate.real <= 0:
            raise ValidationFailure(f"decay rate must have Re > 0, got {self.decay_rate}")

    @property
    def _sign(self) -> float:
        return -1.0 if self.side == "upper" else 1.0

    def value(self, x2):
        return self.amplitude * np.exp(self._sign * self.decay_rate * np.asarray(x2, dtype=float))

    def derivative(self, x2):
        """d/dx2 of the profile."""
        return self._sign * self.decay_rate * self.value(x2)

    def conjugate(self) -> "ExpProfile":
        return ExpProfile(self.amplitude.conjugate(), self.decay_rate.conjugate(), self.side)

    def scaled(self, factor: complex) -> "ExpProfile":
        return ExpProfile(self.amplitude * factor, self.decay_rate, self.side)


@dataclass(frozen=True)
class LinearMode:
    eta: float
    tau: complex
    front_amp: complex
    mu_plus: complex
    mu_minus: complex
    pressure_upper: ExpProfile
    pressure_lower: ExpProfile
    v1_upper: ExpProfile
    v1_lower: ExpProfile
    v2_upper: ExpProfile
    v2_lower: ExpProfile

    def profiles(self, side: Side) -> Tuple[ExpProfile, ExpProfile, ExpProfile]:
        if side == "upper":
            return self.pressure_upper, self.v1_upper, self.v2_upper
        return self.pressure_lower, self.v1_lower, self.v2_lower


def build_mode(state: ShearState, eta: float, front_amp: complex = 1.0) -> LinearMode:
    """Growing mode at tau = X1 eta with front amplitude front_amp."""
    if eta == 0:
        raise DegenerateModeError("eta=0 gives mu+ = mu-, the zero mode")
    if eta < 0:
        raise ValidationFailure(f"eta must be > 0, got {eta}; build at |eta| and reflect")
    if front_amp == 0:
        raise ValidationFailure("front amplitude must be nonzero")
    require_growing_range(state)

    c2, v = state.c**2, state.shear
    freq = growing_root(state, eta)
    tau = freq.tau
    roots = vertical_roots(state, freq)
    mu_p, mu_m = roots.mu_plus, roots.mu_minus
    g = complex(front_amp)
    pressure = roots.difference * g
    up, down = tau + 1j * v * eta, tau - 1j * v * eta

    return LinearMode(
        eta=float(eta),
        tau=tau,
        front_amp=g,
        mu_plus=mu_p,
        mu_minus=mu_m,
        pressure_upper=ExpProfile(pressure, mu_p, "upper"),
        pressure_lower=ExpProfile(pressure, mu_m, "lower"),
        v1_upper=ExpProfile(-c2 * 1j * eta * pressure / up, mu_p, "upper"),
        v1_lower=ExpProfile(-c2 * 1j * eta * pressure / down, mu_m, "lower"),
        v2_upper=ExpProfile(c2 * mu_p * pressure / up, mu_p, "upper"),
        v2_lower=ExpProfile(-c2 * mu_m * pressure / down, mu_m, "lower"),
    )


def reflect_mode(mode: LinearMode) -> LinearMode:
    """The mode at -eta: every amplitude and rate conjugated."""
    return LinearMode(
        eta=-mode.eta,
        tau=mode.tau.conjugate(),
        front_amp=mode.front_amp.conjugate(),
        mu_plus=mode.mu_plus.conjugate(),
        mu_minus=mode.mu_minus.conjugate(),
        pressure_upper=mode.pressure_upper.conjugate(),
        pressure_lower=mode.pressure_lower.conjugate(),
        v1_upper=mode.v1_upper.conjugate(),
        v1_lower=mode.v1_lower.conjugate(),
        v2_upper=mode.v2_upper.conjugate(),
        v2_lower=mode.v2_lower.conjugate(),
    )


def scale_pressure(mode: LinearMode, factor: complex) -> LinearMode:
    """Copy of the mode with both pressure profiles scaled."""
    return replace(
        mode,
        pressure_upper=mode.pressure_upper.scaled(factor),
        pressure_lower=mode.pressure_lower.scaled(factor),
    )


def _relative(*terms: complex) -> float:
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(sum(terms)) / scale


def _interior_residual(state: ShearState, mode: LinearMode, side: Side) -> float:
    c2, eta = state.c**2, mode.eta
    shear = state.shear if side == "upper" else -state.shear
    pressure, v1, v2 = mode.profiles(side)
    rate = pressure.decay_rate.real
    sign = 1.0 if side == "upper" else -1.0
    advect = mode.tau + 1j * shear * eta
    worst = 0.0
    for depth in (0.0, 1.0 / rate, 2.0 / rate):
        x2 = sign * depth
        m, w1, w2 = complex(pressure.value(x2)), complex(v1.value(x2)), complex(v2.value(x2))
        worst = max(
            worst,
            _relative(advect * m, 1j * eta * w1, complex(v2.derivative(x2))),
            _relative(advect * w1, c2 * 1j * eta * m),
            _relative(advect * w2, c2 * complex(pressure.derivative(x2))),
        )
    return worst


def mode_residual(state: ShearState, mode: LinearMode) -> ResidualReport:
    """Relative residuals of the interior equations and the interface conditions."""
    c2, v, eta, tau, g = state.c**2, state.shear, mode.eta, mode.tau, mode.front_amp
    w2_up = complex(mode.v2_upper.value(0.0))
    w2_down = complex(mode.v2_lower.value(0.0))
    m_up = complex(mode.pressure_upper.value(0.0))
    m_down = complex(mode.pressure_lower.value(0.0))
    dm_up = complex(mode.pressure_upper.derivative(0.0))
    dm_down = complex(mode.pressure_lower.derivative(0.0))
    return ResidualReport(
        interior_upper=_interior_residual(state, mode, "upper"),
        interior_lower=_interior_residual(state, mode, "lower"),
        kinematic=_relative(tau * g, -w2_up, 1j * v * eta * g),
        velocity_jump=_relative(w2_up, -w2_down, -2j * v * eta * g),
        pressure_value_jump=_relative(m_up, -m_down),
        pressure_deriv_jump=_relative(c2 * dm_up, -c2 * dm_down, 4j * v * eta * tau * g),
    )


def evaluate_field(mode: LinearMode, t: float, x1: float, x2: float) -> Tuple[float, float, float, float]:
    """Real parts of front, pressure variable and velocity at (t, x1, x2)."""
    phase = np.exp(mode.tau * t + 1j * mode.eta * x1)
    side: Side = "upper" if x2 >= 0 else "lower"
    pressure, v1, v2 = mode.profiles(side)
    return (
        float((phase * mode.front_amp).real),
        float((phase * pressure.value(x2)).real),
        float((phase * v1.value(x2)).real),
        float((phase * v2.value(x2)).real),
    )


def _pair(z: complex):
    return [z.real, z.imag]


def mode_summary(state: ShearState, mode: LinearMode) -> Dict[str, Any]:
    """JSON-ready description of a mode and its residuals."""
    return {
        "eta": mode.eta,
        "tau": _pair(mode.tau),
        "X1": quartic_roots(state).require_growth(),
        "mu_plus": _pair(mode.mu_plus),
        "mu_minus": _pair(mode.mu_minus),
        "front_amp": _pair(mode.front_amp),
        "amplitudes": {
            name: {side: _pair(profile.amplitude) for side, profile in zip(("upper", "lower"), pair)}
            for name, pair in (
                ("pressure", (mode.pressure_upper, mode.pressure_lower)),
                ("v1", (mode.v1_upper, mode.v1_lower)),
                ("v2", (mode.v2_upper, mode.v2_lower)),
            )
        },
        "residuals": mode_residual(state, mode).model_dump(),
    }
