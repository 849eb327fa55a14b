import logging
from pathlib import Path
from typing import Optional

from pythonjsonlogger import jsonlogger

console_format = "%(name)s %(asctime)s: %(message)s"
json_format = "%(asctime)s %(name)s %(levelname)s %(message)s"


def setup_logging(log_file: Optional[Path] = None, level: int = logging.INFO) -> None:
    """
    Route all pipeline loggers to the console and,
    when a file is given, to a JSONL log

    Parameters
    ----------
    log_file : Optional[Path]
        Where to write one JSON object per record
    level : int
        Minimum level for both handlers
    """
    root = logging.getLogger()
    root.setLevel(level)

    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(console_format, datefmt="%H:%M:%S"))
    root.addHandler(console)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setFormatter(jsonlogger.JsonFormatter(json_format))
        root.addHandler(file_handler)
