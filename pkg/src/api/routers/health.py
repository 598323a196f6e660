from fastapi import APIRouter, Depends
from src import __version__
from src.api.deps import get_reference_notes
from src.api.schema import HealthResponse

router = APIRouter()


@router.get("/health", response_model=HealthResponse)
def health(notes=Depends(get_reference_notes)):
    return HealthResponse(ok=True, version=__version__, reference_notes=sorted(notes))
