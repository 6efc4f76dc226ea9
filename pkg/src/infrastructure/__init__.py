"""Infrastructure layer - Concrete implementations."""

