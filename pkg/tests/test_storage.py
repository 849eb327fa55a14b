import struct

import numpy as np
import pytest

from errors import FormatError, ValidationError
from model import decode
from storage import (
    append_jsonl,
    canonical_json,
    config_hash,
    dataset_file_size,
    read_dataset,
    read_json,
    write_dataset,
    write_json,
)
from storage.checkpoint_file import read_checkpoint, write_checkpoint
from utils.rng import RngSeed

# region dataset file


def test_dataset_round_trip_is_bitwise(tmp_path, realisations):
    path = tmp_path / "dataset.gwds"

    write_dataset(path, realisations[:3])
    back = read_dataset(path)

    assert len(back) == 3
    for original, loaded in zip(realisations, back):
        np.testing.assert_array_equal(loaded.porosity, original.porosity)
        np.testing.assert_array_equal(loaded.permeability, original.permeability)
        assert loaded.scenario == original.scenario
        assert loaded.params == original.params
        assert loaded.seed == original.seed
        assert loaded.top_depth == original.top_depth


def test_two_record_file_length(tmp_path, realisations):
    path = tmp_path / "two.gwds"
    cells = 8 * 3 * 3

    write_dataset(path, realisations[:2])

    # 56-byte header, then scenario u8 + seed u64 + 6 f64 + 2 f32 arrays
    expected = 56 + 2 * (1 + 8 + 6 * 8 + 2 * 4 * cells)
    assert dataset_file_size(2, (8, 3, 3)) == expected
    assert path.stat().st_size == expected


def test_decoded_models_are_stored_without_metadata(tmp_path, realisations):
    r = realisations[0]
    decoded = r.like(r.porosity, r.permeability)

    write_dataset(tmp_path / "d.gwds", [decoded])
    (back,) = read_dataset(tmp_path / "d.gwds")

    assert back.scenario is None
    assert back.params is None


def test_dataset_version_bump_is_rejected(tmp_path, realisations):
    path = tmp_path / "dataset.gwds"
    write_dataset(path, realisations[:1])
    data = bytearray(path.read_bytes())
    data[4:8] = struct.pack("<I", 2)
    path.write_bytes(bytes(data))

    with pytest.raises(FormatError, match="version 2"):
        read_dataset(path)


def test_dataset_magic_and_length_are_checked(tmp_path, realisations):
    path = tmp_path / "dataset.gwds"
    write_dataset(path, realisations[:2])
    data = path.read_bytes()

    path.write_bytes(data[:-10])
    with pytest.raises(FormatError, match="bytes"):
        read_dataset(path)

    path.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(FormatError, match="magic"):
        read_dataset(path)

    path.write_bytes(data[:10])
    with pytest.raises(FormatError, match="truncated"):
        read_dataset(path)


def test_dataset_needs_one_grid(tmp_path, realisations):
    with pytest.raises(ValidationError):
        write_dataset(tmp_path / "empty.gwds", [])

    other = realisations[0].like(realisations[0].porosity, realisations[0].permeability)
    other.top_depth += 10.0
    with pytest.raises(ValidationError, match="one grid"):
        write_dataset(tmp_path / "mixed.gwds", [realisations[0], other])


# endregion

# region checkpoint file


def test_checkpoint_round_trip(tmp_path, checkpoint):
    path = tmp_path / "model.gwae"

    write_checkpoint(path, checkpoint)
    loaded = read_checkpoint(path)

    assert loaded.architecture == checkpoint.architecture
    assert loaded.stats == checkpoint.stats
    assert loaded.dims == checkpoint.dims
    assert loaded.loss_history == checkpoint.loss_history
    for name, value in checkpoint.params.items():
        np.testing.assert_array_equal(loaded.params[name], value)

    z = np.array([0.3, -0.2, 0.1])
    np.testing.assert_array_equal(decode(loaded, z).mu, decode(checkpoint, z).mu)


def test_checkpoint_writes_are_deterministic(tmp_path, checkpoint):
    write_checkpoint(tmp_path / "a.gwae", checkpoint)
    write_checkpoint(tmp_path / "b.gwae", checkpoint)

    assert (tmp_path / "a.gwae").read_bytes() == (tmp_path / "b.gwae").read_bytes()


def test_checkpoint_format_errors(tmp_path, checkpoint):
    path = tmp_path / "model.gwae"
    write_checkpoint(path, checkpoint)
    data = path.read_bytes()

    path.write_bytes(data[:4] + struct.pack("<I", 9) + data[8:])
    with pytest.raises(FormatError, match="version 9"):
        read_checkpoint(path)

    path.write_bytes(b"GWDS" + data[4:])
    with pytest.raises(FormatError, match="magic"):
        read_checkpoint(path)

    path.write_bytes(data[:-8])
    with pytest.raises(FormatError, match="truncated"):
        read_checkpoint(path)

    path.write_bytes(data + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        read_checkpoint(path)


# endregion

# region json


def test_config_hash_ignores_key_order():
    a = {"b": 1, "a": [1, 2, {"y": 0.5, "x": None}]}
    b = {"a": (1, 2, {"x": None, "y": 0.5}), "b": 1}

    assert canonical_json(a) == canonical_json(b)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({"b": 2, "a": []})
    assert len(config_hash(a)) == 64


def test_json_helpers(tmp_path):
    write_json(tmp_path / "x.json", {"array": np.arange(3), "value": np.float64(2.5)})
    assert read_json(tmp_path / "x.json") == {"array": [0, 1, 2], "value": 2.5}

    append_jsonl(tmp_path / "log.jsonl", {"a": 1})
    append_jsonl(tmp_path / "log.jsonl", {"a": 2})
    assert (tmp_path / "log.jsonl").read_text().splitlines() == ['{"a": 1}', '{"a": 2}']

    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(FormatError):
        read_json(tmp_path / "bad.json")


# endregion

# region rng


def test_rng_key_vector():
    key = RngSeed(42).child("dataset", 3).key()

    np.testing.assert_array_equal(
        key, np.array([0xC383A3137F3C1E7F, 0xEED12ADA0DB383E3], dtype=np.uint64)
    )


def test_rng_streams_are_reproducible_and_independent():
    root = RngSeed(5)

    first = root.child("a").generator().standard_normal(4)
    again = RngSeed(5, ("a",)).generator().standard_normal(4)
    other = root.child("b").generator().standard_normal(4)

    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other)


def test_integer_seeds_are_positive_31_bit():
    for label in range(20):
        value = RngSeed(label).child("x").as_int()
        assert 1 <= value < 2**31


# endregion
