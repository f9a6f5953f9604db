"""Example process models shipped with the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path


def path(name: str = "tdsp") -> Path:
    """Filesystem path of the bundled ``<name>.mlproc`` model."""
    return Path(str(resources.files(__name__).joinpath(f"{name}.mlproc")))


def read(name: str = "tdsp") -> str:
    return path(name).read_text(encoding="utf-8")
