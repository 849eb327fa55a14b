"""
Binary checkpoint file

Layout, all little-endian::

    b"GWAE"         magic
    u32             format version
    u32             descriptor length L
    L bytes         UTF-8 JSON descriptor: architecture, grid,
                    normalization stats, config echo, loss history,
                    and the name and shape of every weight array
    weights         float64 blobs, in descriptor order
"""
import json
import struct
from pathlib import Path

import numpy as np

from errors import FormatError
from geodata import NormalizationStats
from model import ArchitectureConfig, GwaeCheckpoint

from .manifest import to_jsonable

magic = b"GWAE"
version = 1

prefix = struct.Struct("<4sII")


def write_checkpoint(path: Path, checkpoint: GwaeCheckpoint):
    names = sorted(checkpoint.params)
    descriptor = {
        "architecture": to_jsonable(checkpoint.architecture),
        "grid": {
            "dims": list(checkpoint.dims),
            "cell_size": list(checkpoint.cell_size),
            "top_depth": checkpoint.top_depth,
        },
        "stats": checkpoint.stats.to_dict(),
        "config": to_jsonable(checkpoint.config),
        "loss_history": [list(entry) for entry in checkpoint.loss_history],
        "params": [
            {"name": name, "shape": list(checkpoint.params[name].shape)}
            for name in names
        ],
    }
    encoded = json.dumps(descriptor, sort_keys=True).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(prefix.pack(magic, version, len(encoded)))
        f.write(encoded)
        for name in names:
            blob = np.ascontiguousarray(checkpoint.params[name], dtype="<f8")
            f.write(blob.tobytes())


def read_checkpoint(path: Path) -> GwaeCheckpoint:
    data = Path(path).read_bytes()
    if len(data) < prefix.size:
        raise FormatError(f"{path}: truncated checkpoint header")

    file_magic, file_version, length = prefix.unpack_from(data)
    if file_magic != magic:
        raise FormatError(f"{path}: not a checkpoint file (bad magic)")
    if file_version != version:
        raise FormatError(
            f"{path}: checkpoint format version {file_version} "
            + f"is not supported (expected {version})"
        )

    offset = prefix.size + length
    if len(data) < offset:
        raise FormatError(f"{path}: truncated checkpoint descriptor")

    try:
        descriptor = json.loads(data[prefix.size : offset].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as error:
        raise FormatError(f"{path}: unreadable checkpoint descriptor") from error

    params = {}
    for entry in descriptor["params"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) * 8
        if len(data) < offset + size:
            raise FormatError(f"{path}: truncated weights for {entry['name']}")
        params[entry["name"]] = (
            np.frombuffer(data, dtype="<f8", count=size // 8, offset=offset)
            .reshape(shape)
            .astype(np.float64)
        )
        offset += size

    if offset != len(data):
        raise FormatError(f"{path}: {len(data) - offset} trailing bytes")

    architecture = descriptor["architecture"]
    grid = descriptor["grid"]

    return GwaeCheckpoint(
        architecture=ArchitectureConfig(
            **{
                key: tuple(value) if isinstance(value, list) else value
                for key, value in architecture.items()
            }
        ),
        dims=tuple(grid["dims"]),
        cell_size=tuple(grid["cell_size"]),
        top_depth=float(grid["top_depth"]),
        params=params,
        stats=NormalizationStats.from_dict(descriptor["stats"]),
        config=descriptor["config"],
        loss_history=[tuple(entry) for entry in descriptor["loss_history"]],
    )
