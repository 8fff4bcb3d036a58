"""Trace producer interface and registry.

A producer turns (experiment, secret) into one trace. The built-in MiniISA
interpreter and the external-command adapter are registered by
``orchestrator.producers.init_default_producers``.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional

from core.errors import ProducerError

if TYPE_CHECKING:
    from core.config import MatrixConfig
    from minivm.seeding import SecretInput
    from orchestrator.matrix import ExperimentSpec
    from reporting.symbols import SymbolMap
    from tracing.model import Trace


class TraceProducer(ABC):
    """Base class for trace producers."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Unique name for this producer."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """Human-readable description."""
        pass

    @abstractmethod
    def secret_length(self, spec: "ExperimentSpec", config: "MatrixConfig") -> int:
        """Number of secret bytes each run of ``spec`` consumes."""
        pass

    @abstractmethod
    def produce(
        self,
        spec: "ExperimentSpec",
        config: "MatrixConfig",
        secret: "SecretInput",
        workdir: Path,
    ) -> "Trace":
        """Collect one trace of ``spec`` under ``secret``."""
        pass

    def symbol_map(self, spec: "ExperimentSpec", config: "MatrixConfig") -> Optional["SymbolMap"]:
        """Symbols the producer knows about without a map file, if any."""
        return None

    def check_determinism(
        self,
        spec: "ExperimentSpec",
        config: "MatrixConfig",
        secret: "SecretInput",
        workdir: Path,
    ) -> bool:
        """Produce twice under the same secret and compare the traces."""
        first = self.produce(spec, config, secret, workdir)
        second = self.produce(spec, config, secret, workdir)
        return first == second


class ProducerRegistry:
    """Registry to manage available producers."""

    def __init__(self):
        self._producers: Dict[str, TraceProducer] = {}

    def register(self, producer: TraceProducer) -> None:
        """Register a producer instance."""
        self._producers[producer.name] = producer

    def unregister(self, name: str) -> None:
        """Unregister a producer by name."""
        self._producers.pop(name, None)

    def get(self, name: str) -> TraceProducer:
        """Get producer by name.

        Raises:
            ProducerError: no producer registered under ``name``
        """
        try:
            return self._producers[name]
        except KeyError:
            raise ProducerError(
                f"no producer named {name!r} (available: {', '.join(self.names()) or 'none'})"
            ) from None

    def names(self) -> List[str]:
        return sorted(self._producers)

    def list(self) -> Dict[str, TraceProducer]:
        """List all registered producers."""
        return dict(self._producers)


# Global registry instance
_registry = ProducerRegistry()


def get_registry() -> ProducerRegistry:
    """Get the global producer registry."""
    return _registry
