import dataclasses
import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict

import numpy as np

from errors import FormatError


def to_jsonable(value: Any) -> Any:
    """
    Plain JSON types for dataclasses, enums, tuples and numpy values
    """
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: to_jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)

    return value


def canonical_json(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, separators=(",", ":"))


def config_hash(value: Any) -> str:
    """
    SHA-256 of the canonical (sorted-key) JSON form
    """
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def write_json(path: Path, value: Any):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(value), f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as error:
        raise FormatError(f"{path}: invalid JSON ({error})") from error


def append_jsonl(path: Path, value: Any):
    with open(path, "a", encoding="utf-8") as f:
        f.write(json.dumps(to_jsonable(value), sort_keys=True))
        f.write("\n")
