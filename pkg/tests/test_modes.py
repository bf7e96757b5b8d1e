import math

import numpy as np
import pytest

from vortexsheet.errors import DegenerateModeError, MachRangeError, ValidationFailure
from vortexsheet.modes import (
    ExpProfile,
    build_mode,
    evaluate_field,
    mode_residual,
    mode_summary,
    reflect_mode,
    scale_pressure,
)
from vortexsheet.schemas import ShearState
from vortexsheet.symbol import quartic_roots


@pytest.mark.parametrize("mach", [0.2, 0.5, 1.0, 1.3])
@pytest.mark.parametrize("eta", [1.0, 10.0, 100.0])
def test_mode_satisfies_system(mach, eta):
    state = ShearState.from_mach(mach)
    report = mode_residual(state, build_mode(state, eta))
    assert report.worst <= 1e-10


def test_mode_amplitudes_at_mach_one(unit_state):
    mode = build_mode(unit_state, 1.0)
    up = mode.tau + 1j
    assert mode.tau == pytest.approx(0.485868, abs=1e-6)
    assert mode.pressure_upper.amplitude == pytest.approx(1.236068j, abs=1e-6)
    assert mode.pressure_lower.amplitude == mode.pressure_upper.amplitude
    assert mode.v1_upper.amplitude == pytest.approx(-1j * mode.pressure_upper.amplitude / up, rel=1e-14)
    assert mode.v2_upper.amplitude == pytest.approx(mode.mu_plus * mode.pressure_upper.amplitude / up, rel=1e-14)
    assert mode.pressure_upper.decay_rate.real > 0
    assert mode.pressure_lower.decay_rate.real > 0


def test_mode_scales_with_front_amplitude(unit_state):
    base = build_mode(unit_state, 2.0)
    scaled = build_mode(unit_state, 2.0, front_amp=0.5 - 2.0j)
    assert scaled.v2_lower.amplitude == pytest.approx((0.5 - 2.0j) * base.v2_lower.amplitude, rel=1e-14)
    assert mode_residual(unit_state, scaled).worst <= 1e-10


def test_reflected_mode_is_a_solution(unit_state):
    mode = build_mode(unit_state, 3.0)
    mirror = reflect_mode(mode)
    assert mirror.eta == -3.0
    assert mirror.tau == mode.tau.conjugate()
    assert mode_residual(unit_state, mirror).worst <= 1e-10


def test_pressure_perturbation_breaks_derivative_jump(unit_state):
    mode = scale_pressure(build_mode(unit_state, 1.0), 1.01)
    report = mode_residual(unit_state, mode)
    assert report.pressure_deriv_jump == pytest.approx(0.01, rel=1e-9)
    assert report.pressure_value_jump == pytest.approx(0.0, abs=1e-15)


def test_profiles_decay_away_from_interface(unit_state):
    mode = build_mode(unit_state, 1.0)
    assert abs(mode.pressure_upper.value(10.0)) < abs(mode.pressure_upper.value(0.0))
    assert abs(mode.pressure_lower.value(-10.0)) < abs(mode.pressure_lower.value(0.0))


@pytest.mark.parametrize("mach", [0.3, 1.0, 1.3])
@pytest.mark.parametrize("eta", [0.5, 2.0])
def test_field_grows_at_the_analytic_rate(mach, eta):
    state = ShearState.from_mach(mach)
    mode = build_mode(state, eta)
    rate = quartic_roots(state).require_growth() * eta
    assert mode.tau.imag == 0.0
    front0, pressure0, _, _ = evaluate_field(mode, 0.0, 0.0, 0.5)
    for t in (0.5, 2.0, 6.0):
        front, pressure, _, _ = evaluate_field(mode, t, 0.0, 0.5)
        assert front / front0 == pytest.approx(math.exp(rate * t), rel=1e-12)
        assert pressure / pressure0 == pytest.approx(math.exp(rate * t), rel=1e-10)


@pytest.mark.parametrize("side, sign", [("upper", 1.0), ("lower", -1.0)])
def test_profiles_vanish_far_from_interface(unit_state, side, sign):
    mode = build_mode(unit_state, 1.0)
    for profile in mode.profiles(side):
        rate = profile.decay_rate.real
        for depth in (1.0, 5.0, 30.0):
            expected = abs(profile.amplitude) * math.exp(-rate * depth)
            assert abs(profile.value(sign * depth)) == pytest.approx(expected, rel=1e-12)
        assert abs(profile.value(sign * 40.0)) <= 1e-12 * abs(profile.amplitude)
    fields = np.array(evaluate_field(mode, 1.0, 0.3, sign * 40.0)[1:])
    assert np.all(np.abs(fields) <= 1e-10)


def test_evaluate_field_at_origin(unit_state):
    mode = build_mode(unit_state, 1.0)
    front, pressure, v1, v2 = evaluate_field(mode, 0.0, 0.0, 0.0)
    assert front == pytest.approx(1.0)
    assert pressure == pytest.approx(mode.pressure_upper.amplitude.real)
    assert v2 == pytest.approx(mode.v2_upper.amplitude.real)


def test_zero_eta_is_degenerate(unit_state):
    with pytest.raises(DegenerateModeError):
        build_mode(unit_state, 0.0)


def test_negative_eta_rejected(unit_state):
    with pytest.raises(ValidationFailure):
        build_mode(unit_state, -1.0)


def test_zero_front_rejected(unit_state):
    with pytest.raises(ValidationFailure):
        build_mode(unit_state, 1.0, front_amp=0.0)


def test_supercritical_mode_rejected():
    with pytest.raises(MachRangeError):
        build_mode(ShearState.from_mach(1.5), 1.0)


def test_profile_rejects_growing_rate():
    with pytest.raises(ValidationFailure):
        ExpProfile(1.0 + 0j, -0.5 + 0j, "upper")


def test_mode_summary_is_json_ready(unit_state):
    summary = mode_summary(unit_state, build_mode(unit_state, 1.0))
    assert summary["eta"] == 1.0
    assert summary["mu_plus"] == pytest.approx([0.786151, 0.618034], abs=1e-6)
    assert set(summary["amplitudes"]) == {"pressure", "v1", "v2"}
    assert set(summary["amplitudes"]["v1"]) == {"upper", "lower"}
    assert summary["residuals"]["kinematic"] <= 1e-10
