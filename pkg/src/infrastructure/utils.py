"""Common utility functions for infrastructure layer."""
import hashlib
from typing import Any


def to_int(value: Any, default: int = 0) -> int:
    """Converts a value to an integer."""
    if isinstance(value, int) and not isinstance(value, bool):
        return value

    if isinstance(value, str):
        value = value.strip()
        try:
            return int(value)
        except (TypeError, ValueError):
            return default

    return default


def to_float(value: Any, default: float = 0.0) -> float:
    """Converts a value to a float."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)

    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            return default

    return default


def digest(text: str) -> str:
    """SHA-256 hex digest of a text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
