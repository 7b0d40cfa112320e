"""
输入输出工具 / I/O Helpers
==========================

CSV 与 JSON 读写：CSV 使用 pandas（17 位有效数字），JSON 使用缩进与排序键，
浮点数按 ``repr`` 精度写出以保证逐位往返。
CSV through pandas (17 significant digits) and JSON with sorted keys; floats
are written at ``repr`` precision so files round-trip bit-exactly.
"""

import json
import os
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ArtifactError

PathLike = Union[str, Path]

CSV_FLOAT_FORMAT = "%.17g"


def _ensure_parent(path: PathLike) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def to_native(obj: Any) -> Any:
    """Convert numpy containers and scalars to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): to_native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_native(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def save_json(obj: Any, path: PathLike) -> None:
    """Write ``obj`` as indented JSON (parent directories are created)."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_native(obj), f, ensure_ascii=False, indent=2, sort_keys=True)


def load_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: malformed JSON ({exc})") from exc


def write_csv(frame: pd.DataFrame, path: PathLike) -> None:
    """Write a table with a header row and 17 significant digits."""
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)


def read_csv(path: PathLike, columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Read a table, checking that the expected columns are present."""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    if columns is not None:
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise ArtifactError(f"{path}: missing columns {missing}")
    return frame


__all__ = ["to_native", "save_json", "load_json", "write_csv", "read_csv", "CSV_FLOAT_FORMAT"]
