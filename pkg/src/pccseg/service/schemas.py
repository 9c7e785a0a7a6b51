"""Request/response models for the HTTP API (documented in docs/API.md)."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class StrokeIn(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    class_index: int = Field(alias="class", ge=0, le=7)
    points: list[tuple[float, float]] = Field(min_length=1)
    brush_radius: float = Field(default=2.0, gt=0, le=256)


class AnnotationsIn(BaseModel):
    strokes: list[StrokeIn]
    polygon: list[tuple[float, float]] | None = None


class SegmentRequest(BaseModel):
    """Config overrides for one run; unset fields keep their defaults."""

    mode: str = "proposed"
    max_pixels: int = Field(default=18_000, gt=192)
    background_class: int = Field(default=0, ge=0)
    seed: int = 0
    delta_v: float = Field(default=0.1, gt=0, le=1)
    p_grd: float = Field(default=0.5, ge=0, le=1)
    max_ite: int = Field(default=1_000_000, ge=0)
    max_stop: int = Field(default=15_000, gt=0)
    control_stop: float = Field(default=0.001, ge=0)


class SessionCreated(BaseModel):
    id: str


class Progress(BaseModel):
    iteration: int = 0
    mean_max_domination: float = 0.0


class StatusOut(BaseModel):
    status: str
    progress: Progress
    error: str | None = None
