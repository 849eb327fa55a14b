import json
from pathlib import Path

import pytest

from config import configs_dir
from config.run_config import RunConfig, load_run_config, parse_run_config
from errors import ValidationError


def write_config(tmp_path, data) -> Path:
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))

    return path


def test_desk_config():
    config = load_run_config(configs_dir / "desk.json", environ={})

    assert config.dataset.count == 400
    assert config.dataset.dims == (8, 6, 4)
    assert config.dataset.cell_size == (200.0, 200.0, 15.0)
    assert config.model.latent_dim == 8
    assert config.model.encoder_channels == (16, 32)
    assert config.training.epochs == 60
    assert config.hm.popsize == 16
    # untouched sections keep their defaults
    assert config.hm.weights.realism == 0.1
    assert config.flow.horizon_days == 3000.0
    assert config.flow.report_steps == 60


def test_full_scale_config_is_the_default():
    config = load_run_config(configs_dir / "full.json", environ={})

    assert config.hash == RunConfig().hash
    assert config.hm.restarts == 4
    assert config.dataset.count == 5000


def test_dict_round_trip_keeps_the_hash(run_config):
    again = parse_run_config(run_config.to_dict())

    assert again.hash == run_config.hash
    assert again.analysis.geodesic == run_config.analysis.geodesic


def test_hash_ignores_key_order_and_threads():
    a = parse_run_config({"schema_version": 1, "seed": 3, "threads": 2})
    b = parse_run_config({"threads": 8, "seed": 3, "schema_version": 1})

    assert a.hash == b.hash
    assert a.hash != RunConfig().hash


@pytest.mark.parametrize(
    "data, message",
    [
        ({"seed": 1}, "schema_version"),
        ({"schema_version": 2}, "not supported"),
        ({"schema_version": 1, "hm": {"weightz": {}}}, "hm.weightz"),
        ({"schema_version": 1, "hm": {"weights": {"flw": 1}}}, "hm.weights.flw"),
        ({"schema_version": 1, "seed": "7"}, "seed must be an integer"),
        ({"schema_version": 1, "seed": True}, "seed must be an integer"),
        ({"schema_version": 1, "dataset": {"dims": [8, 6]}}, "3 entries"),
        ({"schema_version": 1, "dataset": []}, "dataset must be an object"),
        ({"schema_version": 1, "flow": {"cfl": "high"}}, "flow.cfl must be a number"),
        ({"schema_version": 1, "hm": {"popsize": 2}}, "hm.popsize"),
        ({"schema_version": 1, "threads": -1}, "threads"),
    ],
)
def test_invalid_configs(data, message):
    with pytest.raises(ValidationError, match=message):
        parse_run_config(data)


def test_optional_values():
    config = parse_run_config(
        {"schema_version": 1, "hm": {"reference_index": 3}, "dataset": {}}
    )

    assert config.hm.reference_index == 3
    assert config.dataset.top_depth is None


def test_seed_from_environment(tmp_path):
    path = write_config(tmp_path, {"schema_version": 1, "seed": 1})

    config = load_run_config(path, environ={"GWAE_SEED": "42"})

    assert config.seed == 42


def test_bad_seed_in_environment():
    with pytest.raises(ValidationError, match="GWAE_SEED"):
        load_run_config(environ={"GWAE_SEED": "forty"})


def test_threads_override(tmp_path):
    path = write_config(tmp_path, {"schema_version": 1, "threads": 2})

    config = load_run_config(path, threads=5, environ={})

    assert config.threads == 5
    assert config.hash == load_run_config(path, environ={}).hash


def test_missing_file(tmp_path):
    with pytest.raises(ValidationError, match="not found"):
        load_run_config(tmp_path / "nope.json", environ={})


def test_defaults_without_a_file():
    assert load_run_config(environ={}).hash == RunConfig().hash
