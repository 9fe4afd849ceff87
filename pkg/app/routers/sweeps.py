from fastapi import APIRouter, HTTPException
from fastapi.responses import Response
from typing import Any, Dict

from app.errors import ConfigError
from app.services.presets import figure_presets, get_preset
from app.services.result_codec import canonical_json_bytes, crc32_hex
from app.services.sweep import run_sweep
from app.services.sweep_schema import QUANTITIES, validate_config

router = APIRouter()


def _json(obj: Any) -> Response:
    return Response(content=canonical_json_bytes(obj), media_type="application/json")


@router.get("/presets")
def list_presets():
    presets = figure_presets()
    return _json({
        "presets": {
            name: {"model": s.base.model.kind.value, "axis": s.axis, "points": len(s.values), "outputs": s.outputs}
            for name, s in sorted(presets.items())
        },
        "quantities": list(QUANTITIES),
    })


@router.get("/presets/{name}")
def read_preset(name: str):
    try:
        spec = get_preset(name)
    except ConfigError as e:
        raise HTTPException(status_code=404, detail=str(e))
    return _json(spec.model_dump(mode="json", by_alias=True))


@router.post("/sweeps")
def create_sweep(body: Dict[str, Any]):
    try:
        spec = validate_config(body)
    except ConfigError as e:
        raise HTTPException(status_code=400, detail={"message": f"Invalid sweep: {e}", "key": e.key})

    result = run_sweep(spec)
    frame = result.to_frame()
    csv = result.csv_bytes()
    sidecar = result.sidecar()
    return _json({
        "name": spec.name,
        "columns": list(frame.columns),
        "rows": frame.to_dict(orient="records"),
        "csv_crc32": crc32_hex(csv),
        "spec_crc32": sidecar["spec_crc32"],
        "provenance": sidecar["provenance"],
        "failed_rows": result.failed_rows,
    })
