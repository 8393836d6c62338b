"""Packaged sample data."""

from importlib.resources import as_file, files
from pathlib import Path


def sample_hr_path() -> Path:
    """Filesystem path of the bundled synthetic heart-rate trace."""
    resource = files(__package__).joinpath("hr_sample.csv")
    with as_file(resource) as path:
        return Path(path)
