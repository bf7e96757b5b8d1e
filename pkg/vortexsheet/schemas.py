"""Pydantic schemas for validated inputs and reported results."""

import math
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from vortexsheet.errors import NoGrowingRootError

SQRT2 = math.sqrt(2.0)


# Physical inputs
class ShearState(BaseModel):
    """Rectilinear vortex-sheet background.

    Only the upper shear velocity is stored; the lower one is its negative.
    """

    model_config = ConfigDict(frozen=True)

    sound_speed: float = Field(1.0, gt=0, allow_inf_nan=False)
    shear_velocity: float = Field(1.0, ge=0, allow_inf_nan=False)
    density: float = Field(1.0, gt=0, allow_inf_nan=False)
    mach_floor: float = Field(0.1, gt=0, allow_inf_nan=False)
    angle: float = Field(0.0, ge=0, lt=math.pi / 2)

    @classmethod
    def from_mach(cls, mach: float, sound_speed: float = 1.0, **kwargs) -> "ShearState":
        return cls(sound_speed=sound_speed, shear_velocity=mach * sound_speed, **kwargs)

    @property
    def c(self) -> float:
        return self.sound_speed

    @property
    def shear(self) -> float:
        """Shear velocity seen by a mode travelling at ``angle`` to the flow."""
        if self.angle == 0.0:
            return self.shear_velocity
        return self.shear_velocity * math.cos(self.angle)

    @property
    def mach(self) -> float:
        return self.shear / self.sound_speed


class FlatteningProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    front_supremum: float = Field(0.0, ge=0, le=1)
    cutoff_inner_radius: float = Field(1.0, gt=0)
    cutoff_outer_radius: float = Field(3.0, gt=0)

    @model_validator(mode="after")
    def check_radii(self):
        # the transition must be at least 2 wide to keep |theta'| <= 1
        if self.cutoff_outer_radius - self.cutoff_inner_radius < 2.0:
            raise ValueError(
                "cutoff_outer_radius - cutoff_inner_radius must be >= 2, got "
                f"{self.cutoff_outer_radius - self.cutoff_inner_radius}"
            )
        return self


# Symbol results
class RootAtlas(BaseModel):
    mach: float
    x1_sq: float
    x2_sq: float
    y2: float
    growth_slope: Optional[float] = None

    def require_growth(self) -> float:
        """Return X1, raising when the dispersion relation has no growing root."""
        if self.growth_slope is None:
            raise NoGrowingRootError(
                f"no growing root at M={self.mach:.6g} (X1^2={self.x1_sq:.6g} <= 0)"
            )
        return self.growth_slope


class CartesianRootData(BaseModel):
    a: float
    b: float
    r: float
    ratio_sq: float


class CoefficientBounds(BaseModel):
    lower: float
    upper: float
    value: float
    mu_ratio: float


class NeutralRootCheck(BaseModel):
    product_re: float
    product_im: float
    excluded: bool


# Mode results
class ResidualReport(BaseModel):
    interior_upper: float
    interior_lower: float
    kinematic: float
    velocity_jump: float
    pressure_value_jump: float
    pressure_deriv_jump: float

    @property
    def worst(self) -> float:
        return max(self.model_dump().values())


# Sobolev results
class NormReport(BaseModel):
    band_index: int
    log_norm_initial_hj: float
    log_norm_later_hk: float
    lower_bound_log_hk: float
    ratio_log: float
    exceeds_alpha: bool
    log_norm_initial_front: float
    log_norm_later_pressure: float
    log_norm_later_velocity: float
    lower_bound_log_pressure: float
    lower_bound_log_velocity: float


class IllposednessTable(BaseModel):
    j: int
    k: int
    t0: float
    alpha: float
    reports: List[NormReport]
    first_exceeding_band: Optional[int] = None
    thresholds: Dict[str, int] = Field(default_factory=dict)
    overflow_warning: bool = False


# Evolve results
class FitResult(BaseModel):
    slope: float
    r_squared: float
    samples: int
    e_folds: float


class EvolveSummary(BaseModel):
    fitted_slope: float
    analytic_rate: Optional[float] = None
    relative_error: Optional[float] = None
    r_squared: float
    points_per_side: int
    half_width: float
    spacing: float
    dt: float
    steps: int
    resolved: bool
    far_field_contaminated: bool
    max_energy_residual: Optional[float] = None


# Run configuration
class StabilityMapSettings(BaseModel):
    mach_min: float = Field(0.1, ge=0)
    mach_max: float = Field(2.0, gt=0)
    mach_step: float = Field(0.01, gt=0)

    @model_validator(mode="after")
    def check_range(self):
        if self.mach_max < self.mach_min:
            raise ValueError(f"mach_max ({self.mach_max}) must be >= mach_min ({self.mach_min})")
        return self


class ModeSettings(BaseModel):
    eta: float = Field(1.0, gt=0)
    front_amp_re: float = 1.0
    front_amp_im: float = 0.0

    @property
    def front_amp(self) -> complex:
        return complex(self.front_amp_re, self.front_amp_im)


class IllposedSettings(BaseModel):
    j: int = Field(3, ge=3)
    k: int = Field(3, ge=3)
    t0: float = Field(1.0, gt=0)
    alpha: float = Field(2.0, gt=0)
    norm_constant: float = Field(1.0, gt=0)
    band_min: int = Field(1, ge=1)
    band_max: int = Field(64, ge=1)
    quadrature_order: int = Field(64, ge=64)

    @model_validator(mode="after")
    def check_orders(self):
        if self.k > self.j:
            raise ValueError(f"k ({self.k}) must not exceed j ({self.j})")
        if self.band_max < self.band_min:
            raise ValueError(f"band_max ({self.band_max}) must be >= band_min ({self.band_min})")
        return self


class EvolveSettings(BaseModel):
    eta: float = Field(1.0, gt=0)
    grid_n: int = Field(2048, ge=64)
    grid_l: Optional[float] = Field(None, gt=0)
    dt: Optional[float] = Field(None, gt=0)
    t_end: float = Field(5.0, gt=0)
    init: Literal["analytic-mode", "front-bump", "zero"] = "analytic-mode"
    cfl: float = Field(0.5, gt=0, le=0.5)
    record_every: int = Field(4, ge=1)

    @property
    def half_width(self) -> float:
        """Half-width of the vertical domain, 40/eta unless set."""
        return self.grid_l if self.grid_l is not None else 40.0 / self.eta


class OutputSettings(BaseModel):
    out_dir: str = "results"
    format: Literal["csv", "json"] = "csv"


class LedgerSettings(BaseModel):
    enabled: bool = True
    db_file: str = "results/ledger.db"


class RunConfig(BaseModel):
    """Effective configuration of one command-line run."""

    subcommand: Literal["stability-map", "roots", "mode", "illposed", "evolve", "verify"]
    state: ShearState = Field(default_factory=ShearState)
    stability_map: StabilityMapSettings = Field(default_factory=StabilityMapSettings)
    mode: ModeSettings = Field(default_factory=ModeSettings)
    illposed: IllposedSettings = Field(default_factory=IllposedSettings)
    evolve: EvolveSettings = Field(default_factory=EvolveSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    ledger: LedgerSettings = Field(default_factory=LedgerSettings)


# Invariant suite
class CheckResult(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    detail: str = ""
    seconds: float = 0.0


class VerificationReport(BaseModel):
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]
