"""Registration of the built-in producers."""

from core.producer import ProducerRegistry, get_registry
from minivm.producer import MinivmProducer
from orchestrator.external import ExternalProducer


def init_default_producers(registry: ProducerRegistry = None) -> ProducerRegistry:
    """Register the minivm and external producers (idempotent)."""
    registry = registry or get_registry()
    for producer in (MinivmProducer(), ExternalProducer()):
        if producer.name not in registry.list():
            registry.register(producer)
    return registry
