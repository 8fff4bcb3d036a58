"""MiniISA interpreter as a trace producer."""

import logging
from pathlib import Path
from typing import Optional

from core.config import MatrixConfig
from core.errors import ProducerError
from core.producer import TraceProducer
from minivm.assembler import Program, load_program, symbol_map_from_program
from minivm.machine import check_determinism, execute
from minivm.seeding import SecretInput
from reporting.symbols import SymbolMap
from tracing.model import Trace

logger = logging.getLogger("ctdiff.minivm")


class MinivmProducer(TraceProducer):
    """Assembles the target's ``program`` and executes it in-process."""

    @property
    def name(self) -> str:
        return "minivm"

    @property
    def description(self) -> str:
        return "Deterministic MiniISA interpreter (built in)"

    def _program(self, spec) -> Program:
        if spec.program is None:
            raise ProducerError(f"experiment {spec.experiment_id} has no program path")
        return load_program(spec.program)

    def secret_length(self, spec, config: MatrixConfig) -> int:
        return self._program(spec).secret_len

    def produce(self, spec, config: MatrixConfig, secret: SecretInput, workdir: Path) -> Trace:
        return execute(self._program(spec), secret, config.limits).trace

    def symbol_map(self, spec, config: MatrixConfig) -> Optional[SymbolMap]:
        program = self._program(spec)
        return symbol_map_from_program(program) if program.functions else None

    def check_determinism(self, spec, config: MatrixConfig, secret: SecretInput, workdir: Path) -> bool:
        return check_determinism(self._program(spec), secret, config.limits)
