"""Piecewise Sobolev norms of band-limited mode superpositions.

All accumulation over a frequency band happens in the log domain: the growth
factor e^{2 X1 n T0} leaves double range near n = 700 at M = 1, T0 = 1.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Literal, NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import logsumexp

from vortexsheet.db import log_system_event
from vortexsheet.errors import ComputationFailure, QuadratureFailure, ValidationFailure
from vortexsheet.modes import ExpProfile, build_mode
from vortexsheet.schemas import IllposednessTable, NormReport, ShearState
from vortexsheet.symbol import quartic_roots, require_growing_range, tilde_c

DEFAULT_ORDER = 64
NORMALIZATION_TOL = 1e-8
LOG_FLOAT_MAX = math.log(np.finfo(float).max)
THRESHOLD_SCAN_LIMIT = 10**7

Variant = Literal["front", "pressure", "velocity"]


def exp_profile_norm_sq(profile: ExpProfile, j: int, eta: float) -> float:
    """H^j norm squared of one exponential profile on its half-line, exactly."""
    rate = profile.decay_rate
    if rate.real <= 0:
        raise ValidationFailure(f"decay rate must have Re > 0, got {rate}")
    if j < 0:
        raise ValidationFailure(f"j must be >= 0, got {j}")
    weight = 1.0 + eta * eta
    base = abs(profile.amplitude) ** 2 / (2.0 * rate.real)
    return float(sum(weight ** (j - s) * abs(rate) ** (2 * s) for s in range(j + 1)) * base)


def exp_profile_norm_sq_quadrature(profile: ExpProfile, j: int, eta: float, depths: float = 40.0) -> float:
    """The same norm by adaptive quadrature in x2 over [0, depths / Re rate]."""
    rate = profile.decay_rate
    length = depths / rate.real
    lo, hi = (0.0, length) if profile.side == "upper" else (-length, 0.0)
    slope = -rate if profile.side == "upper" else rate
    weight = 1.0 + eta * eta
    total = 0.0
    for s in range(j + 1):
        value, _ = integrate.quad(
            lambda x, s=s: abs(slope**s * complex(profile.value(x))) ** 2, lo, hi, limit=200
        )
        total += weight ** (j - s) * value
    return total


@dataclass(frozen=True)
class BandSpectrum:
    """chi_n sampled on a Gauss-Legendre rule over (n, n+1)."""

    band_index: int
    regularity: int
    norm_constant: float
    etas: np.ndarray
    weights: np.ndarray
    log_amplitude: float

    def log_chi_at(self, eta) -> np.ndarray:
        s = 2.0 * (np.asarray(eta, dtype=float) - self.band_index) - 1.0
        return self.log_amplitude - 1.0 / (1.0 - s * s)

    @property
    def log_chi(self) -> np.ndarray:
        return self.log_chi_at(self.etas)

    @property
    def log_target(self) -> float:
        """log of 1 / (C_j^2 n^2)."""
        return -2.0 * math.log(self.norm_constant) - 2.0 * math.log(self.band_index)

    def log_band_integral(self, exponent: int) -> float:
        """log of the band integral of (1+eta^2)^exponent chi^2 on the stored nodes."""
        return float(logsumexp(
            np.log(self.weights) + exponent * np.log1p(self.etas**2) + 2.0 * self.log_chi
        ))


def _band_nodes(n: int, order: int):
    nodes, weights = leggauss(order)
    return n + 0.5 * (nodes + 1.0), 0.5 * weights, nodes


def band_integral(spectrum: BandSpectrum, exponent: int, order: int) -> float:
    """Band integral of (1+eta^2)^exponent chi^2 on a fresh rule of the given order."""
    etas, weights, _ = _band_nodes(spectrum.band_index, order)
    return float(np.exp(logsumexp(
        np.log(weights) + exponent * np.log1p(etas**2) + 2.0 * spectrum.log_chi_at(etas)
    )))


def make_bump(n: int, j: int, norm_constant: float = 1.0, order: int = DEFAULT_ORDER) -> BandSpectrum:
    if n < 1 or j < 3 or norm_constant <= 0 or order < DEFAULT_ORDER:
        raise ValidationFailure(
            f"make_bump needs n >= 1, j >= 3, norm constant > 0, order >= {DEFAULT_ORDER}; "
            f"got n={n}, j={j}, C={norm_constant}, order={order}"
        )
    etas, weights, nodes = _band_nodes(n, order)
    log_shape = -1.0 / (1.0 - nodes * nodes)
    log_integral = logsumexp(np.log(weights) + (j + 1) * np.log1p(etas**2) + 2.0 * log_shape)
    log_target = -2.0 * math.log(norm_constant) - 2.0 * math.log(n)
    spectrum = BandSpectrum(
        band_index=n,
        regularity=j,
        norm_constant=norm_constant,
        etas=etas,
        weights=weights,
        log_amplitude=0.5 * (log_target - float(log_integral)),
    )

    oracle = band_integral(spectrum, j + 1, 2 * order)
    residual = abs(oracle * math.exp(-log_target) - 1.0)
    if residual > NORMALIZATION_TOL:
        raise QuadratureFailure(
            f"band {n}: normalization residual {residual:.3e} at order {order} exceeds {NORMALIZATION_TOL}"
        )
    return spectrum


class ComponentNorms(NamedTuple):
    """Logs of the squared front, pressure and velocity norms."""

    front: float
    pressure: float
    velocity: float

    @property
    def log_total(self) -> float:
        """log(|f| + |h| + |v|) of the unsquared norms."""
        return float(logsumexp([0.5 * self.front, 0.5 * self.pressure, 0.5 * self.velocity]))


def _profile_norms(spectrum: BandSpectrum, state: ShearState, degree: int):
    pressure, velocity = [], []
    for eta in spectrum.etas:
        mode = build_mode(state, float(eta))
        pressure.append(
            exp_profile_norm_sq(mode.pressure_upper, degree, eta)
            + exp_profile_norm_sq(mode.pressure_lower, degree, eta)
        )
        velocity.append(sum(
            exp_profile_norm_sq(p, degree, eta)
            for p in (mode.v1_upper, mode.v1_lower, mode.v2_upper, mode.v2_lower)
        ))
    return np.array(pressure), np.array(velocity)


def mode_norms_sq(
    spectrum: BandSpectrum,
    state: ShearState,
    degree: int,
    t: float,
    log_domain: bool = True,
) -> ComponentNorms:
    """Squared component norms of the band superposition at time t."""
    require_growing_range(state)
    x1 = quartic_roots(state).require_growth()
    etas = spectrum.etas
    pressure, velocity = _profile_norms(spectrum, state, degree)
    front = np.exp(degree * np.log1p(etas**2))

    if log_domain:
        base = np.log(spectrum.weights) + 2.0 * spectrum.log_chi + 2.0 * x1 * etas * t
        return ComponentNorms(
            front=float(logsumexp(base + np.log(front))),
            pressure=float(logsumexp(base + np.log(pressure))),
            velocity=float(logsumexp(base + np.log(velocity))),
        )

    weight = spectrum.weights * np.exp(spectrum.log_chi) ** 2 * np.exp(2.0 * x1 * etas * t)
    return ComponentNorms(
        front=math.log(float(np.sum(weight * front))),
        pressure=math.log(float(np.sum(weight * pressure))),
        velocity=math.log(float(np.sum(weight * velocity))),
    )


def trace_norm_sq(spectrum: BandSpectrum, k: int, t: float, state: ShearState) -> float:
    """log of the squared H^k norm of the front at time t."""
    require_growing_range(state)
    if t < 0:
        raise ValidationFailure(f"t must be >= 0, got {t}")
    x1 = quartic_roots(state).require_growth()
    etas = spectrum.etas
    return float(logsumexp(
        np.log(spectrum.weights) + k * np.log1p(etas**2) + 2.0 * x1 * etas * t + 2.0 * spectrum.log_chi
    ))


def _log_one_plus_power(base: float, power: int) -> float:
    """log(1 + base^power) without forming the power."""
    return float(np.logaddexp(0.0, power * math.log(base)))


def _log_sufficiency_gap(
    state: ShearState, n: int, j: int, k: int, t0: float, alpha: float, norm_constant: float, variant: Variant
) -> float:
    """Left minus right side of the closed-form threshold inequality, in logs."""
    x1 = quartic_roots(state).require_growth()
    d = j - k + 1
    growth = 2.0 * x1 * n * t0
    log_alpha_c = 2.0 * math.log(alpha) + 2.0 * math.log(norm_constant)
    if variant == "front":
        return growth - d * math.log1p((n + 1) ** 2) - (log_alpha_c + 2.0 * math.log(n))
    log_c_tilde = math.log(tilde_c(state.mach_floor))
    denominator = _log_one_plus_power(n + 1, d)
    if variant == "pressure":
        return log_c_tilde + growth - denominator - (log_alpha_c + 2.0 * math.log(n))
    if variant == "velocity":
        return 2.0 * math.log(state.c) + log_c_tilde + growth - denominator - (log_alpha_c + math.log(n))
    raise ValidationFailure(f"unknown variant {variant!r}")


def _check_table_args(state: ShearState, j: int, k: int, t0: float) -> None:
    require_growing_range(state)
    if not (j >= k >= 3):
        raise ValidationFailure(f"need j >= k >= 3, got j={j}, k={k}")
    if t0 <= 0:
        raise ValidationFailure(f"T0 must be > 0, got {t0}")


def threshold_n(
    state: ShearState,
    j: int,
    k: int,
    t0: float,
    alpha: float,
    norm_constant: float = 1.0,
    variant: Variant = "front",
) -> int:
    """Smallest n satisfying the variant's sufficiency inequality."""
    _check_table_args(state, j, k, t0)
    for n in range(1, THRESHOLD_SCAN_LIMIT):
        if _log_sufficiency_gap(state, n, j, k, t0, alpha, norm_constant, variant) >= 0.0:
            return n
    raise ComputationFailure(f"{variant} threshold not reached below n={THRESHOLD_SCAN_LIMIT}")


def band_report(
    state: ShearState, spectrum: BandSpectrum, k: int, t0: float, alpha: float
) -> NormReport:
    n, j = spectrum.band_index, spectrum.regularity
    x1 = quartic_roots(state).require_growth()
    initial = mode_norms_sq(spectrum, state, j, 0.0)
    later = mode_norms_sq(spectrum, state, k, t0)

    d = j - k + 1
    growth = 2.0 * x1 * n * t0
    log_band = spectrum.log_band_integral(j + 1)
    log_c_tilde = math.log(tilde_c(state.mach_floor))
    denominator = _log_one_plus_power(n + 1, d)

    log_initial = initial.log_total
    log_later = later.log_total
    return NormReport(
        band_index=n,
        log_norm_initial_hj=log_initial,
        log_norm_later_hk=log_later,
        lower_bound_log_hk=0.5 * (growth - d * math.log1p((n + 1) ** 2) + log_band),
        ratio_log=log_later - log_initial,
        exceeds_alpha=log_later >= math.log(alpha),
        log_norm_initial_front=0.5 * initial.front,
        log_norm_later_pressure=0.5 * later.pressure,
        log_norm_later_velocity=0.5 * later.velocity,
        lower_bound_log_pressure=0.5 * (log_c_tilde + growth - denominator + log_band),
        lower_bound_log_velocity=0.5 * (
            2.0 * math.log(state.c) + log_c_tilde + growth - denominator + math.log(n) + log_band
        ),
    )


def illposedness_table(
    state: ShearState,
    j: int,
    k: int,
    t0: float,
    alpha: float,
    bands: Iterable[int],
    norm_constant: float = 1.0,
    order: int = DEFAULT_ORDER,
) -> IllposednessTable:
    """Norm growth of the chi_n sequence band by band."""
    _check_table_args(state, j, k, t0)
    if alpha <= 0:
        raise ValidationFailure(f"alpha must be > 0, got {alpha}")
    x1 = quartic_roots(state).require_growth()
    bands = sorted(set(int(n) for n in bands))

    overflow = any(2.0 * x1 * (n + 1) * t0 > LOG_FLOAT_MAX for n in bands)
    if overflow:
        log_system_event(
            "WARNING",
            f"growth factor exceeds double range for bands up to {bands[-1]}; log-domain values only",
            "sobolev",
        )

    reports: List[NormReport] = []
    for n in bands:
        spectrum = make_bump(n, j, norm_constant, order)
        reports.append(band_report(state, spectrum, k, t0, alpha))

    first = next((r.band_index for r in reports if r.exceeds_alpha), None)
    thresholds = {
        variant: threshold_n(state, j, k, t0, alpha, norm_constant, variant)
        for variant in ("front", "pressure", "velocity")
    }
    log_system_event(
        "INFO",
        f"ill-posedness table: {len(reports)} bands, first exceeding alpha={alpha}: {first}, "
        f"front threshold {thresholds['front']}",
        "sobolev",
    )
    return IllposednessTable(
        j=j,
        k=k,
        t0=t0,
        alpha=alpha,
        reports=reports,
        first_exceeding_band=first,
        thresholds=thresholds,
        overflow_warning=overflow,
    )
