from fastapi import APIRouter, Depends, HTTPException

from src.api.deps import get_reference_notes
from src.api.schema import ClosedFormRequest, ClosedFormResponse, ReferenceResponse
from src.bifurcation.report import bifurcation_report
from src.data.reference_notes import reference_model
from src.dynamics.oracles import closed_form_cubic, escape_time
from src.errors import ClosedFormDomainError

router = APIRouter()


@router.post("/dynamics/closed-form", response_model=ClosedFormResponse)
def post_closed_form(req: ClosedFormRequest):
    try:
        r = closed_form_cubic(req.r0, req.mu, req.alpha, req.t)
    except ClosedFormDomainError as e:
        raise HTTPException(
            status_code=422, detail={"message": str(e), "escape_time": e.escape_time}
        )
    values = [float(v) for v in (r if hasattr(r, "__len__") else [r])]
    return ClosedFormResponse(r=values, escape_time=escape_time(req.r0, req.mu, req.alpha))


@router.get("/reference/{name}", response_model=ReferenceResponse)
def get_reference(name: str, notes=Depends(get_reference_notes)):
    note = notes.get(name)
    if note is None:
        raise HTTPException(status_code=404, detail=f"unknown reference note {name!r}")
    model = reference_model(note)
    return ReferenceResponse(
        name=note.name,
        rho_sum=model.spectral.rho_sum,
        g_coefficients=list(model.g_coefficients),
        model=model,
        lines=bifurcation_report(model).lines,
    )
