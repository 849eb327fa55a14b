from pathlib import Path


def ensure_dir(dir_path: Path) -> Path:
    """
    Ensure that the directory under the specified path exists
    """
    dir_path.mkdir(parents=True, exist_ok=True)

    return dir_path
