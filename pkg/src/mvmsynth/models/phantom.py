from pydantic import BaseModel, ConfigDict, Field


class PhantomConfig(BaseModel):
    """Contracting, twisting annulus phantom.

    Time is measured in frames times ``frame_interval_s``; with the default
    interval of 1.0 every derivative is "per frame".
    """

    model_config = ConfigDict(extra="ignore")

    T: int = Field(default=50, ge=1, description="Frames per cardiac cycle.")
    H: int = Field(default=64, ge=32)
    W: int = Field(default=64, ge=32)
    center: tuple[float, float] | None = Field(
        default=None, description="(cy, cx) in pixels; image centre when omitted."
    )
    endo_radius_mm: float = Field(default=15.0, gt=0.0)
    epi_radius_mm: float = Field(default=25.0, gt=0.0)
    radial_amplitude: float = Field(default=0.15, ge=0.0, lt=0.5)
    twist_amplitude_rad: float = 0.1
    longitudinal_amplitude_mm_per_s: float = 0.5
    noise_sigma: float = Field(default=0.02, ge=0.0)
    venc_mm_per_s: tuple[float, float, float] = (1.0, 1.0, 1.0)
    pixel_spacing_mm: tuple[float, float] = (1.7, 1.7)
    frame_interval_s: float = Field(default=1.0, gt=0.0)
    seed: int = 0
    subject_id: str = "phantom"
    slice_id: str = "s0"

    def resolved_center(self) -> tuple[float, float]:
        if self.center is not None:
            return (float(self.center[0]), float(self.center[1]))
        return (self.H / 2.0, self.W / 2.0)
