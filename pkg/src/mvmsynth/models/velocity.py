from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

CURVE_DIRECTIONS: tuple[str, str, str] = ("longitudinal", "radial", "circumferential")


class VelocityCurves(BaseModel):
    """Per-frame global myocardial velocities in mm/s.

    Frames that could not be analysed hold NaN and are listed in ``frame_errors``.
    """

    model_config = ConfigDict(extra="ignore", arbitrary_types_allowed=True)

    longitudinal: np.ndarray
    radial: np.ndarray
    circumferential: np.ndarray
    units: str = "mm/s"
    frame_errors: dict[int, str] = Field(default_factory=dict)

    @field_validator("longitudinal", "radial", "circumferential", mode="before")
    @classmethod
    def _as_float64(cls, v: Any) -> np.ndarray:
        return np.asarray(v, dtype=np.float64).reshape(-1)

    @property
    def T(self) -> int:  # noqa: N802 - domain symbol
        return int(self.longitudinal.shape[0])

    @property
    def valid(self) -> bool:
        return not self.frame_errors

    def direction(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "units": self.units,
            "valid": self.valid,
            "frame_errors": {str(k): v for k, v in self.frame_errors.items()},
            **{d: [float(x) for x in self.direction(d)] for d in CURVE_DIRECTIONS},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "VelocityCurves":
        return cls(
            longitudinal=data["longitudinal"],
            radial=data["radial"],
            circumferential=data["circumferential"],
            units=data.get("units", "mm/s"),
            frame_errors={int(k): v for k, v in data.get("frame_errors", {}).items()},
        )
