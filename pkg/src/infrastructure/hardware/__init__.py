"""Hardware infrastructure."""
