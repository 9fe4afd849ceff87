import os

from dotenv import load_dotenv

load_dotenv()

WORKERS = int(os.getenv("VACUUM_PROBE_WORKERS", "1"))
OUT_DIR = os.getenv("VACUUM_PROBE_OUT", "./out")
LOG_LEVEL = os.getenv("VACUUM_PROBE_LOG_LEVEL", "INFO").upper()
N_MAX = int(os.getenv("VACUUM_PROBE_N_MAX", "16"))
K = int(os.getenv("VACUUM_PROBE_K", "24"))

CORS_ORIGINS = os.getenv("CORS_ORIGINS", "*")


def cors_origins() -> list[str]:
    origins = [o.strip() for o in CORS_ORIGINS.split(",") if o.strip()]
    return ["*"] if not origins or "*" in origins else origins
