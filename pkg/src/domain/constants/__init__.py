"""Domain constants package."""
