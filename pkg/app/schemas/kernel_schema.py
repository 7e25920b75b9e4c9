"""
Pydantic schemas for nonlocal kernels
"""

import enum

from pydantic import BaseModel, ConfigDict, Field


class KernelFamily(str, enum.Enum):
    EXPONENTIAL = "exp"
    BOX = "box"


class KernelSpec(BaseModel):
    """
    Forward-looking kernel of width eps

    exp: eta_eps(y) = exp(-y/eps)/eps on y > 0
    box: eta_eps(y) = 1/eps on (0, eps)
    """
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"family": "exp", "eps": 0.05}},
    )

    family: KernelFamily = KernelFamily.EXPONENTIAL
    eps: float = Field(..., gt=0, description="Kernel width")

    @classmethod
    def exp(cls, eps: float) -> "KernelSpec":
        return cls(family=KernelFamily.EXPONENTIAL, eps=eps)

    @classmethod
    def box(cls, eps: float) -> "KernelSpec":
        return cls(family=KernelFamily.BOX, eps=eps)

    @property
    def exploratory(self) -> bool:
        """Box-kernel results are reported but never asserted"""
        return self.family == KernelFamily.BOX

    def __str__(self) -> str:
        return f"{self.family.value}(eps={self.eps:g})"
