"""Port for application logging."""
from abc import ABC, abstractmethod
from typing import Any, Sequence


class AppLogger(ABC):
    """Logging contract of the use cases: levels, banners and aligned tables."""

    @abstractmethod
    def info(self, msg: str, *args, **kwargs) -> None:
        pass

    @abstractmethod
    def warning(self, msg: str, *args, **kwargs) -> None:
        pass

    @abstractmethod
    def error(self, msg: str, *args, **kwargs) -> None:
        pass

    @abstractmethod
    def debug(self, msg: str, *args, **kwargs) -> None:
        """Per-step progress of long runs."""
        pass

    @abstractmethod
    def title(self, text: str, char: str = "=") -> None:
        """Stage banner."""
        pass

    @abstractmethod
    def subtitle(self, text: str, char: str = "-") -> None:
        """Section banner inside a stage."""
        pass

    @abstractmethod
    def table(self, headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        """Logs rows as right-aligned columns; floats use 4 significant digits."""
        pass
