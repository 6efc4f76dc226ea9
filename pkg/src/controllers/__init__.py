"""Controllers module."""
