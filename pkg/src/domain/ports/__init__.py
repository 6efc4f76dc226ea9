"""Domain ports - interfaces for external dependencies."""
