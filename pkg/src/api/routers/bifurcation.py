from fastapi import APIRouter, HTTPException
from pydantic import ValidationError

from src.api.schema import EquilibriaRequest, ReportRequest, ReportResponse, VarietiesRequest
from src.bifurcation.analysis import (
    classify_events,
    detect_hysteresis,
    equilibria,
    interval_inventories,
    transition_varieties,
)
from src.bifurcation.report import narrate
from src.models import EquilibriumSet, MuSchedule, SpectralVector, TransitionVarieties

router = APIRouter(prefix="/bifurcation")

# inventories need partial ratios; a single partial with d_0 = 0 reduces tori to circles
_SINGLE_PARTIAL = SpectralVector(d=[0.0, 1.0], omega=[0.0, 1.0])


@router.post("/equilibria", response_model=EquilibriumSet)
def post_equilibria(req: EquilibriaRequest):
    return equilibria(req.mu, req.a, req.b, req.alpha)


@router.post("/varieties", response_model=TransitionVarieties)
def post_varieties(req: VarietiesRequest):
    if req.q <= req.p:
        raise HTTPException(status_code=422, detail="q must exceed p")
    return transition_varieties(req.a, req.b, req.p, req.q)


@router.post("/report", response_model=ReportResponse)
def post_report(req: ReportRequest):
    try:
        schedule = MuSchedule(steps=req.schedule)
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=str(e))
    spectral = req.spectral or _SINGLE_PARTIAL
    t_end = req.t_end if req.t_end is not None else schedule.switch_times[-1] + 1.0
    if t_end <= schedule.switch_times[-1]:
        raise HTTPException(status_code=422, detail="t_end must follow the last switch")

    events = classify_events(schedule, req.a, req.b, req.alpha, spectral)
    inventories = interval_inventories(schedule, req.a, req.b, req.alpha, spectral, t_end)
    return ReportResponse(
        events=events,
        inventories=inventories,
        hysteresis=detect_hysteresis(schedule, req.a, req.b),
        lines=narrate(events, inventories),
    )
