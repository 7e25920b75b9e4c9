"""
Pydantic schemas for diagnostic reports
Every report is a list of rows (t, metric, value, bound, pass) plus the
constants that produced the bound
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from app.schemas.profile_schema import Window


class CheckRow(BaseModel):
    """One checked quantity at one snapshot time"""
    t: float
    metric: str
    value: float
    bound: float
    margin: float = 0.0
    passed: bool


class CheckReport(BaseModel):
    name: str
    rows: List[CheckRow] = Field(default_factory=list)
    exploratory: bool = Field(False, description="Reported only, never asserted")
    slack: float = 0.0

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def asserted_failure(self) -> bool:
        return not self.exploratory and not self.passed

    def failures(self) -> List[CheckRow]:
        return [row for row in self.rows if not row.passed]

    def summary(self) -> str:
        tag = " (exploratory)" if self.exploratory else ""
        status = "PASS" if self.passed else f"FAIL at {len(self.failures())} of {len(self.rows)} times"
        return f"{self.name}{tag}: {status}"


class OleinikWReport(CheckReport):
    """
    inf dW/dx against -1/(kappa t); value is the infimum, bound is -1/(kappa t)
    """
    kappa: float
    kappa_source: str


class OleinikGReport(CheckReport):
    """
    sup of g = V'(W) W dW/dx against ||rho_0||_inf / (kappa t)
    """
    kappa: float
    kappa_source: str
    sup_rho0: float


class TVReport(CheckReport):
    """
    TV of W on the window against 2(|K|/(2t) + ||W(t)||_inf)

    W is continuous for both kernels, so jump_part is always 0.
    """
    window: Window
    jump_part: float = 0.0


class BoundsReport(CheckReport):
    """Maximum principle and mass conservation per snapshot"""
    lower: float
    upper: float
    value_tol: float = 1e-8
    mass_tol: float = 1e-10
    max_mass_drift: Optional[float] = None
