"""
Pydantic schemas for velocity models
Model parameters and the assumption report produced by the checker
"""

import enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class VelocityFamily(str, enum.Enum):
    GREENSHIELDS = "greenshields"
    UNDERWOOD = "underwood"
    GEN_GREENSHIELDS = "gen_greenshields"
    GEN_CALIFORNIA = "gen_california"
    GREENBERG = "greenberg"
    CUSTOM = "custom"


class PiecewisePolynomial(BaseModel):
    """
    Coefficient tables for a custom velocity

    Piece j covers [knots[j], knots[j+1]]; coefficients are in increasing
    powers of (xi - knots[j]).
    """
    model_config = ConfigDict(frozen=True)

    knots: List[float] = Field(..., min_length=2)
    v: List[List[float]]
    dv: List[List[float]]
    d2v: List[List[float]]

    @model_validator(mode="after")
    def _check_tables(self) -> "PiecewisePolynomial":
        if np.any(np.diff(self.knots) <= 0):
            raise ValueError("custom knots must be strictly increasing")
        pieces = len(self.knots) - 1
        for name in ("v", "dv", "d2v"):
            table = getattr(self, name)
            if len(table) != pieces:
                raise ValueError(f"custom table '{name}' needs {pieces} pieces, got {len(table)}")
            if any(len(row) == 0 for row in table):
                raise ValueError(f"custom table '{name}' has an empty piece")
        return self


class VelocityModel(BaseModel):
    """
    Speed-density relation V with exact first and second derivatives

    v_max doubles as v_0 for the families written with v_0.
    """
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"family": "greenshields", "v_max": 1.0, "rho_max": 1.0}
        },
    )

    family: VelocityFamily
    v_max: float = Field(1.0, gt=0, description="v_max or v_0")
    rho_max: float = Field(1.0, gt=0)
    n: int = Field(1, ge=1, description="Exponent of the generalized Greenshields model")
    alpha: float = Field(0.5, gt=0, lt=1, description="Exponent of the generalized California model")
    regularized: bool = Field(False, description="Shifted California variant, finite at 0")
    custom: Optional[PiecewisePolynomial] = None

    @model_validator(mode="after")
    def _check_custom(self) -> "VelocityModel":
        if self.family == VelocityFamily.CUSTOM and self.custom is None:
            raise ValueError("custom velocity needs coefficient tables")
        return self

    @classmethod
    def greenshields(cls, vmax: float = 1.0, rhomax: float = 1.0) -> "VelocityModel":
        return cls(family=VelocityFamily.GREENSHIELDS, v_max=vmax, rho_max=rhomax)

    @classmethod
    def underwood(cls, v0: float = 1.0, rhomax: float = 1.0) -> "VelocityModel":
        return cls(family=VelocityFamily.UNDERWOOD, v_max=v0, rho_max=rhomax)

    @classmethod
    def gen_greenshields(cls, v0: float = 1.0, rhomax: float = 1.0, n: int = 2) -> "VelocityModel":
        return cls(family=VelocityFamily.GEN_GREENSHIELDS, v_max=v0, rho_max=rhomax, n=n)

    @classmethod
    def gen_california(
        cls, v0: float = 1.0, rhomax: float = 1.0, alpha: float = 0.5, regularized: bool = False
    ) -> "VelocityModel":
        return cls(
            family=VelocityFamily.GEN_CALIFORNIA,
            v_max=v0,
            rho_max=rhomax,
            alpha=alpha,
            regularized=regularized,
        )

    @classmethod
    def greenberg(cls, v0: float = 1.0, rhomax: float = 1.0) -> "VelocityModel":
        return cls(family=VelocityFamily.GREENBERG, v_max=v0, rho_max=rhomax)

    def describe(self) -> str:
        if self.family == VelocityFamily.CUSTOM:
            return f"custom({len(self.custom.knots) - 1} pieces)"
        extra = ""
        if self.family == VelocityFamily.GEN_GREENSHIELDS:
            extra = f", n={self.n}"
        elif self.family == VelocityFamily.GEN_CALIFORNIA:
            extra = f", alpha={self.alpha:g}" + (", regularized" if self.regularized else "")
        return f"{self.family.value}(v={self.v_max:g}, rhomax={self.rho_max:g}{extra})"


class AssumptionReport(BaseModel):
    """
    Verdict of the velocity checker on the data range [m, M]

    Constants are the tightest values witnessed on the sample grid and are
    only populated when their flag holds.
    """
    m: float
    M: float
    samples: int
    nonincreasing: bool
    lipschitz_at_range: bool

    # V' = -delta (constant)
    linear: bool = False
    delta: Optional[float] = None

    # 0 <= V' + V'' xi <= kappa1, V' <= -kappa2, kappa2 > kappa1
    conv_more: bool = False
    conv_kappa1: Optional[float] = None
    conv_kappa2: Optional[float] = None

    # 0 <= (-V' - V'' xi)(M - m) <= -V' xi
    ob2: bool = False

    # -V' <= V'' xi <= -(2 - kappa1) V'
    ob3: bool = False
    ob3_kappa1: Optional[float] = None

    # V'' xi + V' == 0
    greenberg_zero_h: bool = False

    # sup V' < 0 on the range, reported as kappa2 = -sup V'
    strictly_decreasing_kappa2: Optional[float] = None

    kappa_w: Optional[float] = Field(None, description="Constant of the one-sided Lipschitz bound on W")
    kappa_w_source: Optional[str] = None
    kappa_g: Optional[float] = Field(None, description="Constant of the one-sided bound on g")
    kappa_g_source: Optional[str] = None

    @property
    def w_bound_available(self) -> bool:
        return self.kappa_w is not None

    @property
    def g_bound_available(self) -> bool:
        return self.kappa_g is not None

    def summary(self) -> str:
        flags = [
            name for name in ("linear", "conv_more", "ob2", "ob3", "greenberg_zero_h")
            if getattr(self, name)
        ]
        return (
            f"[{self.m:g}, {self.M:g}] holds: {', '.join(flags) or 'none'}; "
            f"kappa_w={self.kappa_w}, kappa_g={self.kappa_g}"
        )
