from __future__ import annotations

import zlib
from pathlib import Path
from typing import Any, Iterable

import orjson
import pandas as pd

CSV_FLOAT_FORMAT = "%.12g"


def canonical_json_bytes(obj: Any) -> bytes:
    return orjson.dumps(obj, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)


def crc32_hex(data: bytes) -> str:
    return f"{zlib.crc32(data) & 0xFFFFFFFF:08x}"


def rows_to_frame(rows: Iterable[dict], columns: list[str], per_level: Iterable[str] = ()) -> pd.DataFrame:
    """One CSV line per row; list-valued per-level columns become one line per level."""
    frame = pd.DataFrame(list(rows), columns=columns)
    exploded = [c for c in ("level", *per_level) if c in frame.columns]
    if exploded and len(frame):
        frame = frame.explode(exploded, ignore_index=True)
        for c in exploded:
            frame[c] = pd.to_numeric(frame[c])
    return frame


def csv_bytes(frame: pd.DataFrame) -> bytes:
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n").encode("utf-8")


def write_outputs(out_dir: Path, stem: str, csv: bytes, sidecar: dict) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    csv_path.write_bytes(csv)
    json_path.write_bytes(canonical_json_bytes({**sidecar, "csv_crc32": crc32_hex(csv)}))
    return csv_path, json_path
