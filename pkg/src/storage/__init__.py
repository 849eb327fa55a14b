from .dataset_file import dataset_file_size, read_dataset, write_dataset
from .manifest import (
    append_jsonl,
    canonical_json,
    config_hash,
    read_json,
    to_jsonable,
    write_json,
)
