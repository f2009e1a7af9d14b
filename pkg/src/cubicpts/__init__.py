"""Rational points on smooth plane cubics: enumeration, descent, heights and the determinant method."""

from __future__ import annotations

from pathlib import Path

__version__ = "0.1.0"

CORPUS = Path(__file__).parent / "corpus"


def corpus_path(name: str) -> Path:
    """Path of a bundled curve spec, e.g. corpus_path("37a")."""
    path = CORPUS / f"{name}.curve"
    if not path.exists():
        raise FileNotFoundError(f"no corpus curve named {name!r}")
    return path
