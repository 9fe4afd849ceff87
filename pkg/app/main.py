from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__, settings
from app.routers import sweeps

app = FastAPI(title="Vacuum Probe API", version=__version__)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins(),
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

app.include_router(sweeps.router, tags=["sweeps"])


@app.get("/health")
def health():
    return {"ok": True, "version": __version__}
