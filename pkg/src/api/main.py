from __future__ import annotations
import logging
from contextlib import asynccontextmanager
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from src import __version__
from src.api.deps import get_reference_notes
from src.config import get_log_level

logging.basicConfig(
    level=get_log_level(), format="%(asctime)s %(levelname)s %(name)s - %(message)s"
)
log = logging.getLogger("tonebif-api")


@asynccontextmanager
async def lifespan(app: FastAPI):
    notes = get_reference_notes()
    log.info("✅ tonebif API ready (reference notes: %s)", ", ".join(sorted(notes)))
    yield


app = FastAPI(title="tonebif API", version=__version__, lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000", "http://127.0.0.1:3000"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

from .routers import health, bifurcation, dynamics  # noqa: E402

app.include_router(health.router, tags=["Health"])
app.include_router(bifurcation.router, tags=["Bifurcation"])
app.include_router(dynamics.router, tags=["Dynamics"])


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "src.api.main:app", host="127.0.0.1", port=9000, reload=True, log_level="debug"
    )
