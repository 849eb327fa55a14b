"""
Binary dataset file

Layout, all little-endian::

    b"GWDS"                 magic
    u32                     format version
    u32                     record count
    3 x u32                 nx, ny, nz
    4 x f64                 dx, dy, dz, top_depth
    count x record:
        u8                  scenario tag (255 = none)
        u64                 seed
        6 x f64             n_channels, width, thickness,
                            wavelength, amplitude, orientation (NaN = none)
        N x f32             porosity, C order
        N x f32             permeability (mD), C order

with N = nx * ny * nz.
"""
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from config import Scenario
from errors import FormatError, ValidationError
from geodata.channels import ChannelParams
from geodata.realisation import Realisation

magic = b"GWDS"
version = 1

no_scenario = 255

header_dtype = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("count", "<u4"),
        ("dims", "<u4", (3,)),
        ("geometry", "<f8", (4,)),
    ]
)


def record_dtype(cell_count: int) -> np.dtype:
    return np.dtype(
        [
            ("scenario", "u1"),
            ("seed", "<u8"),
            ("params", "<f8", (6,)),
            ("porosity", "<f4", (cell_count,)),
            ("permeability", "<f4", (cell_count,)),
        ]
    )


def dataset_file_size(count: int, dims: Tuple[int, int, int]) -> int:
    return header_dtype.itemsize + count * record_dtype(int(np.prod(dims))).itemsize


def write_dataset(path: Path, realisations: Sequence[Realisation]):
    """
    Write realisations sharing one grid; properties are stored as float32
    """
    if not realisations:
        raise ValidationError("cannot write an empty dataset")

    first = realisations[0]
    for r in realisations:
        if (r.dims, r.cell_size, r.top_depth) != (
            first.dims,
            first.cell_size,
            first.top_depth,
        ):
            raise ValidationError("all realisations in a dataset must share one grid")

    header = np.zeros(1, dtype=header_dtype)
    header["magic"] = magic
    header["version"] = version
    header["count"] = len(realisations)
    header["dims"] = first.dims
    header["geometry"] = first.cell_size + (first.top_depth,)

    records = np.zeros(len(realisations), dtype=record_dtype(first.cell_count))
    for n, r in enumerate(realisations):
        records[n]["scenario"] = no_scenario if r.scenario is None else r.scenario.tag
        records[n]["seed"] = r.seed
        records[n]["params"] = (
            np.full(6, np.nan) if r.params is None else r.params.as_array()
        )
        records[n]["porosity"] = r.porosity.ravel()
        records[n]["permeability"] = r.permeability.ravel()

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(records.tobytes())


def read_dataset(path: Path) -> List[Realisation]:
    """
    Read every record back, widened to float64 in memory
    """
    data = Path(path).read_bytes()

    if len(data) < header_dtype.itemsize:
        raise FormatError(f"{path}: truncated header")

    header = np.frombuffer(data, dtype=header_dtype, count=1)[0]
    if bytes(header["magic"]) != magic:
        raise FormatError(f"{path}: not a dataset file (bad magic)")
    if int(header["version"]) != version:
        raise FormatError(
            f"{path}: dataset format version {int(header['version'])} "
            + f"is not supported (expected {version})"
        )

    count = int(header["count"])
    dims = tuple(int(d) for d in header["dims"])
    dx, dy, dz, top_depth = (float(g) for g in header["geometry"])

    expected = dataset_file_size(count, dims)
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")

    records = np.frombuffer(
        data,
        dtype=record_dtype(int(np.prod(dims))),
        count=count,
        offset=header_dtype.itemsize,
    )

    realisations = []
    for record in records:
        tag = int(record["scenario"])
        if tag != no_scenario and tag >= len(Scenario):
            raise FormatError(f"{path}: unknown scenario tag {tag}")

        params = record["params"]
        realisations.append(
            Realisation(
                dims=dims,
                cell_size=(dx, dy, dz),
                top_depth=top_depth,
                porosity=record["porosity"].astype(np.float64).reshape(dims),
                permeability=record["permeability"].astype(np.float64).reshape(dims),
                scenario=None if tag == no_scenario else Scenario.from_tag(tag),
                params=None
                if np.isnan(params).any()
                else ChannelParams.from_array(params),
                seed=int(record["seed"]),
            )
        )

    return realisations
