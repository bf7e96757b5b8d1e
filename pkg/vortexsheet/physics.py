"""Background state classification and the interface-flattening geometry."""

import math
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from vortexsheet.errors import FrontBoundError, JacobianViolation
from vortexsheet.schemas import SQRT2, FlatteningProfile, ShearState

CRITICAL_TOL = 1e-12
FRONT_LIMIT = 2.0
JACOBIAN_FLOOR = 1.0 / 3.0

ArrayLike = Union[float, Sequence[float], np.ndarray]


class MachRegime(str, Enum):
    SUBCRITICAL_GROWING = "subcritical-growing"
    CRITICAL = "critical"
    SUPERCRITICAL_NEUTRAL = "supercritical-neutral"
    BELOW_FLOOR = "below-floor"


def mach_class(state: ShearState) -> MachRegime:
    """Classify the background by Mach number."""
    m = state.mach
    if abs(m - SQRT2) <= CRITICAL_TOL:
        return MachRegime.CRITICAL
    if m > SQRT2:
        return MachRegime.SUPERCRITICAL_NEUTRAL
    if m < state.mach_floor:
        return MachRegime.BELOW_FLOOR
    return MachRegime.SUBCRITICAL_GROWING


def _smooth_step(u: np.ndarray):
    """C-infinity step from 0 (u<=0) to 1 (u>=1) and its derivative.

    S(u) = e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}), written through the logistic
    function so neither tail overflows.
    """
    shape = np.shape(u)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    value = np.where(u >= 1.0, 1.0, 0.0)
    slope = np.zeros_like(u)
    inside = (u > 0.0) & (u < 1.0)
    if np.any(inside):
        w = u[inside]
        g = 1.0 / w - 1.0 / (1.0 - w)
        lo, hi = expit(-g), expit(g)
        value[inside] = lo
        slope[inside] = (1.0 / w**2 + 1.0 / (1.0 - w) ** 2) * lo * hi
    return value.reshape(shape), slope.reshape(shape)


def cutoff(profile: FlatteningProfile, s: ArrayLike):
    """theta(s) and theta'(s): 1 on the inner radius, 0 beyond the outer one."""
    s = np.asarray(s, dtype=float)
    width = profile.cutoff_outer_radius - profile.cutoff_inner_radius
    value, slope = _smooth_step((profile.cutoff_outer_radius - np.abs(s)) / width)
    return value, -np.sign(s) * slope / width


def _check_front(front_value: float) -> None:
    if abs(front_value) > FRONT_LIMIT:
        raise FrontBoundError(f"|front value| must be <= {FRONT_LIMIT}, got {front_value}")


def _scale(profile: FlatteningProfile) -> float:
    return 3.0 * (1.0 + profile.front_supremum)


def cutoff_psi(profile: FlatteningProfile, front_value: float, x2: ArrayLike):
    """psi = theta(x2 / (3(1+a))) * f."""
    _check_front(front_value)
    theta, _ = cutoff(profile, np.asarray(x2, dtype=float) / _scale(profile))
    result = theta * front_value
    return float(result) if np.ndim(result) == 0 else result


def cutoff_psi_dx2(profile: FlatteningProfile, front_value: float, x2: ArrayLike):
    """Vertical derivative of cutoff_psi, computed analytically."""
    _check_front(front_value)
    scale = _scale(profile)
    _, dtheta = cutoff(profile, np.asarray(x2, dtype=float) / scale)
    result = dtheta * front_value / scale
    return float(result) if np.ndim(result) == 0 else result


def jacobian_lower_bound(profile: FlatteningProfile, front_value: float, x2_samples: ArrayLike) -> float:
    """Minimum of J = 1 + d(psi)/dx2 over the samples."""
    samples = np.atleast_1d(np.asarray(x2_samples, dtype=float))
    jac = 1.0 + cutoff_psi_dx2(profile, front_value, samples)
    lowest = float(np.min(jac))
    # tiny slack for the |theta'| = 1 extremum
    if lowest < JACOBIAN_FLOOR - 1e-12:
        raise JacobianViolation(
            f"Jacobian {lowest:.6g} < 1/3 for front value {front_value} (a={profile.front_supremum})"
        )
    return lowest


def theta_slope_bound(profile: FlatteningProfile, samples: int = 20001) -> float:
    """Largest |theta'| on a dense sample of the transition region."""
    s = np.linspace(0.0, profile.cutoff_outer_radius + 1.0, samples)
    return float(np.max(np.abs(cutoff(profile, s)[1])))
