import math

import numpy as np
import pytest

from vortexsheet.errors import MachRangeError, ValidationFailure
from vortexsheet.modes import ExpProfile, build_mode
from vortexsheet.schemas import ShearState
from vortexsheet.sobolev import (
    band_integral,
    exp_profile_norm_sq,
    exp_profile_norm_sq_quadrature,
    illposedness_table,
    make_bump,
    mode_norms_sq,
    threshold_n,
    trace_norm_sq,
)
from vortexsheet.symbol import quartic_roots


def test_unit_profile_norm(unit_state):
    mode = build_mode(unit_state, 1.0)
    profile = ExpProfile(1.0 + 0j, mode.mu_plus, "upper")
    assert exp_profile_norm_sq(profile, 0, 1.0) == pytest.approx(0.636010, abs=1e-6)


@pytest.mark.parametrize("j", [0, 1, 3])
@pytest.mark.parametrize("side", ["upper", "lower"])
def test_profile_norm_matches_quadrature(unit_state, j, side):
    mode = build_mode(unit_state, 2.0)
    profile = mode.pressure_upper if side == "upper" else mode.v2_lower
    exact = exp_profile_norm_sq(profile, j, 2.0)
    assert exp_profile_norm_sq_quadrature(profile, j, 2.0) == pytest.approx(exact, rel=1e-6)


def test_profile_norm_rejects_negative_order(unit_state):
    with pytest.raises(ValidationFailure):
        exp_profile_norm_sq(build_mode(unit_state, 1.0).pressure_upper, -1, 1.0)


@pytest.mark.parametrize("n", [1, 7, 64])
def test_bump_normalization(n):
    spectrum = make_bump(n, 3)
    assert band_integral(spectrum, 4, 128) == pytest.approx(1.0 / n**2, rel=1e-8)
    assert spectrum.log_band_integral(4) == pytest.approx(-2.0 * math.log(n), abs=1e-8)


def test_bump_shape():
    spectrum = make_bump(5, 3)
    centre = spectrum.log_chi_at(5.5)
    assert centre == pytest.approx(spectrum.log_amplitude - 1.0)
    assert np.all(spectrum.etas > 5.0) and np.all(spectrum.etas < 6.0)
    assert np.all(spectrum.log_chi <= centre)


@pytest.mark.parametrize(
    "kwargs",
    [dict(n=0, j=3), dict(n=1, j=2), dict(n=1, j=3, norm_constant=0.0), dict(n=1, j=3, order=32)],
)
def test_bump_rejects_bad_arguments(kwargs):
    with pytest.raises(ValidationFailure):
        make_bump(**kwargs)


def test_trace_norm_is_front_component(unit_state):
    spectrum = make_bump(4, 3)
    norms = mode_norms_sq(spectrum, unit_state, 3, 1.0)
    assert trace_norm_sq(spectrum, 3, 1.0, unit_state) == pytest.approx(norms.front, abs=1e-12)


def test_trace_norm_grows_at_band_rate(unit_state):
    spectrum = make_bump(10, 3)
    x1 = quartic_roots(unit_state).growth_slope
    early = trace_norm_sq(spectrum, 3, 0.0, unit_state)
    later = trace_norm_sq(spectrum, 3, 1.0, unit_state)
    assert 2 * x1 * 10 <= later - early <= 2 * x1 * 11


@pytest.mark.parametrize("n", [1, 5, 20])
@pytest.mark.parametrize("t", [0.0, 1.0])
def test_log_domain_matches_linear_domain(unit_state, n, t):
    spectrum = make_bump(n, 3)
    in_logs = mode_norms_sq(spectrum, unit_state, 3, t)
    linear = mode_norms_sq(spectrum, unit_state, 3, t, log_domain=False)
    for a, b in zip(in_logs, linear):
        assert a == pytest.approx(b, abs=1e-10)


def test_initial_norms_shrink_like_one_over_n(unit_state):
    scaled = []
    for n in (1, 4, 16, 64):
        spectrum = make_bump(n, 3)
        scaled.append(n * math.exp(mode_norms_sq(spectrum, unit_state, 3, 0.0).log_total))
    assert max(scaled[1:]) <= scaled[0]


def _independent_front_threshold(x1, j, k, t0, alpha):
    d = j - k + 1
    n = 1
    while math.exp(2 * x1 * n * t0) / (1 + (n + 1) ** 2) ** d < alpha**2 * n**2:
        n += 1
    return n


def test_front_threshold_at_mach_one(unit_state):
    assert threshold_n(unit_state, 3, 3, 1.0, 2.0) == 12
    x1 = quartic_roots(unit_state).growth_slope
    assert _independent_front_threshold(x1, 3, 3, 1.0, 2.0) == 12


@pytest.mark.parametrize("j, k, t0, alpha", [(4, 3, 1.0, 2.0), (5, 3, 2.0, 10.0), (3, 3, 0.5, 3.0)])
def test_front_threshold_matches_scan(unit_state, j, k, t0, alpha):
    x1 = quartic_roots(unit_state).growth_slope
    assert threshold_n(unit_state, j, k, t0, alpha) == _independent_front_threshold(x1, j, k, t0, alpha)


def test_pressure_and_velocity_thresholds_are_later(unit_state):
    front = threshold_n(unit_state, 3, 3, 1.0, 2.0, variant="front")
    assert threshold_n(unit_state, 3, 3, 1.0, 2.0, variant="pressure") > front
    assert threshold_n(unit_state, 3, 3, 1.0, 2.0, variant="velocity") > front


@pytest.mark.parametrize("j, k", [(3, 4), (2, 2)])
def test_threshold_rejects_orders(unit_state, j, k):
    with pytest.raises(ValidationFailure):
        threshold_n(unit_state, j, k, 1.0, 2.0)


def test_threshold_rejects_supercritical():
    with pytest.raises(MachRangeError):
        threshold_n(ShearState.from_mach(1.5), 3, 3, 1.0, 2.0)


def test_illposedness_table(unit_state):
    table = illposedness_table(unit_state, 3, 3, 1.0, 2.0, range(1, 17))
    assert [r.band_index for r in table.reports] == list(range(1, 17))
    assert table.thresholds["front"] == 12
    assert set(table.thresholds) == {"front", "pressure", "velocity"}
    assert not table.overflow_warning

    ratios = [r.ratio_log for r in table.reports]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    for r in table.reports:
        assert r.log_norm_later_hk >= r.lower_bound_log_hk
        assert r.log_norm_later_pressure >= r.lower_bound_log_pressure
        assert r.log_norm_later_velocity >= r.lower_bound_log_velocity
        assert r.exceeds_alpha == (r.log_norm_later_hk >= math.log(2.0))
    if table.first_exceeding_band is not None:
        assert table.reports[table.first_exceeding_band - 1].exceeds_alpha


@pytest.mark.parametrize("variant", ["front", "pressure", "velocity"])
def test_component_ratio_grows_with_band(unit_state, variant):
    ratios = []
    for n in range(1, 41):
        spectrum = make_bump(n, 3)
        initial = mode_norms_sq(spectrum, unit_state, 3, 0.0).log_total
        later = mode_norms_sq(spectrum, unit_state, 3, 1.0)
        ratios.append(0.5 * getattr(later, variant) - initial)
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


@pytest.mark.parametrize("j, k", [(3, 3), (4, 3)])
def test_ratio_divergence_rate(unit_state, j, k):
    x1 = quartic_roots(unit_state).growth_slope
    table = illposedness_table(unit_state, j, k, 1.0, 2.0, range(20, 40))
    for r in table.reports:
        n = r.band_index
        rate = 2.0 * r.ratio_log / n
        assert rate >= 2.0 * x1 - 2.0 * math.log(n + 1) * (j - k + 2) / n


@pytest.mark.parametrize("norm_constant", [0.25, 3.0])
def test_bump_norm_constant_scaling(norm_constant):
    base = make_bump(7, 4)
    scaled = make_bump(7, 4, norm_constant)
    assert scaled.log_amplitude == pytest.approx(base.log_amplitude - math.log(norm_constant), abs=1e-12)
    expected = 1.0 / (norm_constant**2 * 7**2)
    assert band_integral(scaled, 5, 128) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("variant", ["front", "pressure", "velocity"])
def test_threshold_is_one_for_tiny_alpha(unit_state, variant):
    assert threshold_n(unit_state, 3, 3, 1.0, 1e-30, variant=variant) == 1


@pytest.mark.parametrize("variant", ["front", "pressure", "velocity"])
@pytest.mark.parametrize("j, k", [(3, 3), (5, 3)])
def test_threshold_non_increasing_in_time(unit_state, variant, j, k):
    thresholds = [threshold_n(unit_state, j, k, t0, 2.0, variant=variant) for t0 in (0.5, 1.0, 2.0, 4.0)]
    assert all(b <= a for a, b in zip(thresholds, thresholds[1:]))
    assert thresholds[-1] < thresholds[0]


def test_illposedness_table_beyond_double_range(unit_state):
    table = illposedness_table(unit_state, 3, 3, 1.0, 2.0, [800])
    assert table.overflow_warning
    report = table.reports[0]
    assert math.isfinite(report.log_norm_later_hk)
    assert report.log_norm_later_hk >= report.lower_bound_log_hk
    assert report.ratio_log > 300
