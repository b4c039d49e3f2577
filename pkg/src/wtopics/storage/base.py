"""Abstract base class for sample stores."""

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Any, Dict

if TYPE_CHECKING:
    from ..inference.hmc import SampleSet


class SampleStore(ABC):
    """Abstract interface for persisting posterior draws."""

    @abstractmethod
    def save(self, samples: "SampleSet", manifest: Dict[str, Any]) -> None:
        """
        Persist every chain plus a manifest.

        Args:
            samples: Draws to store
            manifest: Extra fields merged into the stored manifest
                (parameter names, config and diagnostics are always written)
        """
        pass

    @abstractmethod
    def load(self) -> "SampleSet":
        """
        Read the stored draws back.

        Returns:
            SampleSet equal to the one saved
        """
        pass

    @abstractmethod
    def exists(self) -> bool:
        """
        Check whether a complete set of chains is stored.

        Returns:
            True if a manifest and every chain file are present
        """
        pass
