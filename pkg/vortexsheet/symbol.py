"""Interface symbol of the linearized vortex sheet.

Vertical decay roots mu+-, the symbol in its original and reduced forms, the
quartic for X^2 = (tau/eta)^2 and the closed-form bounds built on its
growing root. Everything is evaluated from explicit radicals; no generic
polynomial solver is involved.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from vortexsheet.errors import DegenerateBranchError, DegenerateModeError, MachRangeError
from vortexsheet.schemas import (
    SQRT2,
    CartesianRootData,
    CoefficientBounds,
    NeutralRootCheck,
    RootAtlas,
    ShearState,
)

FACTOR_RING = 0.01
RING_SAMPLES = 64


@dataclass(frozen=True)
class Frequency:
    tau: complex
    eta: float

    @property
    def admissible(self) -> bool:
        """Membership in the open frequency set: Re tau > 0, (tau, eta) != 0."""
        return self.tau.real > 0 and (self.tau != 0 or self.eta != 0)


@dataclass(frozen=True)
class VerticalRootPair:
    mu_plus: complex
    mu_minus: complex

    @property
    def product(self) -> complex:
        return self.mu_plus * self.mu_minus

    @property
    def difference(self) -> complex:
        return self.mu_plus - self.mu_minus


def root_radicands(state: ShearState, tau, eta):
    """(tau +- i v eta)^2 / c^2 + eta^2, vectorized."""
    c, v = state.c, state.shear
    tau = np.asarray(tau, dtype=complex)
    eta = np.asarray(eta, dtype=float)
    plus = (tau + 1j * v * eta) ** 2 / c**2 + eta**2
    minus = (tau - 1j * v * eta) ** 2 / c**2 + eta**2
    return plus, minus


def vertical_roots_array(state: ShearState, tau, eta):
    """Principal square roots of the radicands (Re >= 0), vectorized."""
    plus, minus = root_radicands(state, tau, eta)
    return np.sqrt(plus), np.sqrt(minus)


def vertical_roots(state: ShearState, freq: Frequency) -> VerticalRootPair:
    mu_p, mu_m = vertical_roots_array(state, freq.tau, freq.eta)
    mu_p, mu_m = complex(mu_p), complex(mu_m)
    if mu_p.real == 0.0 or mu_m.real == 0.0:
        raise DegenerateBranchError(
            f"radicand on the branch cut at tau={freq.tau}, eta={freq.eta} (Re mu = 0)"
        )
    return VerticalRootPair(mu_p, mu_m)


def symbol_original(state: ShearState, freq: Frequency) -> complex:
    """tau^2 - v^2 eta^2 - 2 i v eta tau (mu+ - mu-) / (mu+ + mu-)."""
    roots = vertical_roots(state, freq)
    v, tau, eta = state.shear, freq.tau, freq.eta
    return complex(
        tau**2 - v**2 * eta**2
        - 2j * v * eta * tau * roots.difference / (roots.mu_plus + roots.mu_minus)
    )


def symbol_reduced(state: ShearState, freq: Frequency) -> complex:
    """c^2 (mu+ mu- - eta^2)."""
    roots = vertical_roots(state, freq)
    return complex(state.c**2 * (roots.product - freq.eta**2))


def symbol_reduced_array(state: ShearState, tau, eta):
    mu_p, mu_m = vertical_roots_array(state, tau, eta)
    return state.c**2 * (mu_p * mu_m - np.asarray(eta, dtype=float) ** 2)


def quartic_coefficients(state: ShearState) -> Tuple[float, float, float]:
    """Coefficients of X^4 + 2(v^2+c^2) X^2 + v^4 - 2 c^2 v^2 in powers of X^2."""
    c2, v2 = state.c**2, state.shear**2
    return 1.0, 2.0 * (v2 + c2), v2 * v2 - 2.0 * c2 * v2


def quartic_residual(state: ShearState, x_sq: float) -> float:
    """Residual of the quartic at X^2, relative to the largest coefficient."""
    a, b, c0 = quartic_coefficients(state)
    return abs(a * x_sq**2 + b * x_sq + c0) / max(abs(a), abs(b), abs(c0))


def quartic_roots(state: ShearState) -> RootAtlas:
    c2, v2 = state.c**2, state.shear**2
    disc = math.sqrt(c2 * c2 + 4.0 * c2 * v2)
    # rationalized form of -v^2 - c^2 + disc; exact zero at M = sqrt(2)
    x1_sq = v2 * (2.0 * c2 - v2) / (disc + v2 + c2)
    x2_sq = -v2 - c2 - disc
    growth = math.sqrt(x1_sq) if x1_sq > 0 else None
    return RootAtlas(
        mach=state.mach,
        x1_sq=x1_sq,
        x2_sq=x2_sq,
        y2=math.sqrt(-x2_sq),
        growth_slope=growth,
    )


def d_phi_dx(state: ShearState, x: float) -> complex:
    """Derivative of phi(X) = mu~+ mu~- - 1 along real X = tau/eta."""
    c, v = state.c, state.shear
    roots = vertical_roots(state, Frequency(complex(x), 1.0))
    return complex((2.0 * x / c**2) * ((x**2 + v**2) / c**2 + 1.0) / roots.product)


def _root_factor(state: ShearState, atlas: RootAtlas, tau, eta_abs):
    """Sigma / (tau - X1 |eta|) without cancellation.

    Uses (mu+ mu-)^2 - eta^4 = eta^4 / c^4 (X^2 - X1^2)(X^2 - X2^2).
    """
    x1 = atlas.require_growth()
    mu_p, mu_m = vertical_roots_array(state, tau, eta_abs)
    x = np.asarray(tau, dtype=complex) / eta_abs
    return (eta_abs**3 / state.c**2) * (x + x1) * (x * x - atlas.x2_sq) / (mu_p * mu_m + eta_abs**2)


def simple_root_factor(state: ShearState, freq: Frequency) -> Tuple[complex, float]:
    """F with Sigma_reduced = (tau - X1 eta) F near the growing root.

    Returns F and the floor min |F| on the ring |tau - X1 eta| = 0.01 eta.
    """
    if freq.eta == 0:
        raise DegenerateModeError("simple root factor undefined at eta=0 (mu+ = mu-)")
    atlas = quartic_roots(state)
    eta_abs = abs(freq.eta)
    factor = complex(_root_factor(state, atlas, freq.tau, eta_abs))
    centre = atlas.require_growth() * eta_abs
    ring = centre + FACTOR_RING * eta_abs * np.exp(2j * np.pi * np.arange(RING_SAMPLES) / RING_SAMPLES)
    floor = float(np.min(np.abs(_root_factor(state, atlas, ring, eta_abs))))
    return factor, floor


def growing_root(state: ShearState, eta: float) -> Frequency:
    """The admissible zero tau = X1 |eta|."""
    return Frequency(complex(quartic_roots(state).require_growth() * abs(eta)), eta)


def require_growing_range(state: ShearState) -> None:
    m = state.mach
    if not (state.mach_floor <= m < SQRT2):
        raise MachRangeError(f"M={m:.6g} outside [{state.mach_floor}, sqrt(2))")


def tilde_c(eps0: float) -> float:
    """Lower bound 2 - 2(sqrt(1+4 eps0^2) - 2 eps0^2) of the squared root ratio."""
    e2 = eps0 * eps0
    return 2.0 * (2.0 * e2 - 4.0 * e2 / (math.sqrt(1.0 + 4.0 * e2) + 1.0))


def cartesian_root_data(state: ShearState, eta: float) -> CartesianRootData:
    require_growing_range(state)
    if eta <= 0:
        raise MachRangeError(f"eta must be > 0, got {eta}")
    atlas = quartic_roots(state)
    c2, m = state.c**2, state.mach
    e2 = eta * eta
    a = (math.sqrt(1.0 + 4.0 * m * m) - 2.0 * m * m) * e2
    b = 2.0 * atlas.require_growth() * state.shear / c2 * e2
    r = math.hypot(a, b)
    gap = b * b / (r + a) if a > 0 else r - a
    return CartesianRootData(a=a, b=b, r=r, ratio_sq=2.0 * gap / r)


def velocity_coef_bounds(state: ShearState) -> CoefficientBounds:
    require_growing_range(state)
    c, v = state.c, state.shear
    atlas = quartic_roots(state)
    value = 1.0 / math.sqrt(atlas.x1_sq + v * v)
    lower = 1.0 / (SQRT2 * c)
    upper = 1.0 / (c * math.sqrt(math.sqrt(1.0 + 4.0 * state.mach_floor**2) - 1.0))
    freq = growing_root(state, 1.0)
    roots = vertical_roots(state, freq)
    mu_ratio = abs(roots.mu_plus) / abs(freq.tau + 1j * v)
    return CoefficientBounds(lower=lower, upper=upper, value=value, mu_ratio=mu_ratio)


def neutral_root_exclusion(state: ShearState, eta: float = 1.0) -> NeutralRootCheck:
    """mu~+ mu~- at tau = i Y2 |eta|; never 1, so the X2 root is not a zero."""
    c, v = state.c, state.shear
    y2 = quartic_roots(state).y2
    mu_p = 1j * math.sqrt((y2 + v) ** 2 / c**2 - 1.0)
    mu_m = 1j * math.sqrt(max((y2 - v) ** 2 / c**2 - 1.0, 0.0))
    product = mu_p * mu_m
    return NeutralRootCheck(
        product_re=product.real,
        product_im=product.imag,
        excluded=abs(product - 1.0) > 1e-12,
    )


def supercritical_scan(
    state: ShearState,
    re_tau: Optional[Sequence[float]] = None,
    im_tau: Optional[Sequence[float]] = None,
    etas: Optional[Sequence[float]] = None,
) -> float:
    """Grid minimum of |Sigma_reduced| / (c^2 eta^2) over admissible frequencies."""
    re_tau = np.geomspace(1e-3, 10.0, 40) if re_tau is None else np.asarray(re_tau, dtype=float)
    im_tau = np.linspace(-10.0, 10.0, 41) if im_tau is None else np.asarray(im_tau, dtype=float)
    etas = np.geomspace(0.1, 10.0, 20) if etas is None else np.asarray(etas, dtype=float)
    tau = re_tau[:, None, None] + 1j * im_tau[None, :, None]
    eta = etas[None, None, :]
    sigma = symbol_reduced_array(state, tau, eta)
    return float(np.min(np.abs(sigma) / (state.c**2 * eta**2)))


def atlas_row(state: ShearState) -> Dict[str, float]:
    """One stability-map row; Cartesian data and bounds are NaN outside the growing range."""
    atlas = quartic_roots(state)
    row = {
        "M": state.mach,
        "X1sq": atlas.x1_sq,
        "X1": atlas.growth_slope if atlas.growth_slope is not None else math.nan,
        "X2sq": atlas.x2_sq,
        "Y2": atlas.y2,
        "a_over_eta2": math.nan,
        "ratioSq": math.nan,
        "coefLower": math.nan,
        "coefValue": math.nan,
        "coefUpper": math.nan,
    }
    if state.mach_floor <= state.mach < SQRT2:
        cart = cartesian_root_data(state, 1.0)
        bounds = velocity_coef_bounds(state)
        row.update(
            a_over_eta2=cart.a,
            ratioSq=cart.ratio_sq,
            coefLower=bounds.lower,
            coefValue=bounds.value,
            coefUpper=bounds.upper,
        )
    return row
