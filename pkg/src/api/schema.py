from __future__ import annotations
from pydantic import BaseModel, Field
from typing import List, Optional

from src.models import (
    BifurcationEvent,
    ControllerModel,
    HysteresisReport,
    IntervalInventory,
    MuStep,
    SpectralVector,
)


class HealthResponse(BaseModel):
    ok: bool = True
    version: str
    reference_notes: List[str]


class EquilibriaRequest(BaseModel):
    mu: float
    a: float
    b: float
    alpha: float = 1.0


class VarietiesRequest(BaseModel):
    a: float
    b: float
    p: int = Field(default=1, ge=1)
    q: int = Field(default=2, ge=2)


class ReportRequest(BaseModel):
    schedule: List[MuStep]
    a: float
    b: float
    alpha: float = 1.0
    spectral: Optional[SpectralVector] = None
    t_end: Optional[float] = None


class ReportResponse(BaseModel):
    events: List[BifurcationEvent]
    inventories: List[IntervalInventory]
    hysteresis: HysteresisReport
    lines: List[str]


class ClosedFormRequest(BaseModel):
    r0: float = Field(ge=0)
    mu: float
    alpha: float
    t: List[float]


class ClosedFormResponse(BaseModel):
    r: List[float]
    escape_time: Optional[float] = None


class ReferenceResponse(BaseModel):
    name: str
    rho_sum: float
    g_coefficients: List[float]
    model: ControllerModel
    lines: List[str]
