"""Decode/encode at the file boundary, plus the results CSV schema."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import AutocorError, KeyMismatch, MissingColumn

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
CSV_COLUMNS = ("filename", "limb", "posterior_side", "aco_px", "pco_px", "fd_px",
               "acor", "pcor", "warnings", "status")


class DecodeError(AutocorError, OSError):
    pass


def read_image(path) -> np.ndarray:
    """8-bit gray (H, W) or RGB (H, W, 3); alpha and palettes are dropped."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "RGB"):
                out = im
            elif im.mode in ("1", "I;16", "I", "F"):
                out = im.convert("L")
            else:
                out = im.convert("RGB")
            return np.asarray(out, dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc


def png_bytes(img: np.ndarray, compress_level: int = 1) -> bytes:
    # low zlib effort: noisy radiographs barely compress and level 6 costs ~0.3 s
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8)).save(
        buf, format="PNG", compress_level=compress_level)
    return buf.getvalue()


def write_png(path, img: np.ndarray) -> None:
    Path(path).write_bytes(png_bytes(img))


def list_images(directory) -> list[Path]:
    d = Path(directory)
    return sorted((p for p in d.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES),
                  key=lambda p: p.name)


def fmt_float(x) -> str:
    """Shortest round-tripping text; empty for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def write_csv(path, rows: list[dict], columns=CSV_COLUMNS) -> None:
    """UTF-8, header row, '\\n' line ends, values formatted by the caller."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: r.get(c, "") for c in columns})


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def keyed_columns(rows: list[dict], columns, key: str = "filename",
                  source: str = "") -> dict[str, dict[str, float]]:
    """``{key: {column: float}}``; rows whose values are blank are skipped."""
    if rows:
        missing = [c for c in (key, *columns) if c not in rows[0]]
        if missing:
            raise MissingColumn(f"{source or 'csv'} lacks column(s) {', '.join(missing)}")
    out = {}
    for r in rows:
        if any(r[c] in ("", None) for c in columns):
            continue
        out[r[key]] = {c: float(r[c]) for c in columns}
    return out


def align(pred: dict, truth: dict) -> list[str]:
    """Shared keys in sorted order; any difference in key sets is an error."""
    if set(pred) != set(truth):
        only_p = sorted(set(pred) - set(truth))[:5]
        only_t = sorted(set(truth) - set(pred))[:5]
        raise KeyMismatch(f"filename keys differ: only in predictions {only_p}, "
                          f"only in truth {only_t}")
    return sorted(pred)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
