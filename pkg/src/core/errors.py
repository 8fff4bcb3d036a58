"""Exception hierarchy shared by every ctdiff package.

Input problems subclass ``ValueError`` and runtime problems subclass
``RuntimeError`` so callers that only know the builtin types still catch them.
"""

from typing import Optional


class CtDiffError(Exception):
    """Base class for all ctdiff errors."""


class _LocatedError(CtDiffError):
    """Error that may carry a 1-based line number of the offending input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TraceFormatError(_LocatedError, ValueError):
    """Malformed trace text."""


class TraceSetError(CtDiffError, ValueError):
    """A trace set that cannot be differenced."""


class ScopeError(CtDiffError, ValueError):
    """Invalid include ranges for scope filtering."""


class AssemblyError(_LocatedError, ValueError):
    """MiniISA source that does not assemble."""


class SymbolMapError(_LocatedError, ValueError):
    """Malformed or overlapping symbol map."""


class KnownIssueError(_LocatedError, ValueError):
    """Malformed known-issue list."""


class OracleBoundError(CtDiffError, ValueError):
    """Trace too long for the alignment oracle."""


class AggregationError(CtDiffError, ValueError):
    """Report cannot be placed into a summary group."""


class ConfigError(CtDiffError, ValueError):
    """Invalid matrix configuration."""


class VmError(CtDiffError, RuntimeError):
    """Fault raised while executing a MiniISA program."""

    def __init__(self, message: str, pc: Optional[int] = None):
        self.pc = pc
        super().__init__(f"pc {pc}: {message}" if pc is not None else message)


class StepLimitExceeded(VmError):
    pass


class MemoryFault(VmError):
    pass


class ReturnStackUnderflow(VmError):
    pass


class PcOutOfRange(VmError):
    pass


class ProducerError(CtDiffError, RuntimeError):
    """A trace producer failed to deliver a trace."""


class DeterminismError(CtDiffError, RuntimeError):
    """Two runs with the same secret produced different traces."""


class ManifestError(CtDiffError, ValueError):
    """Fixture manifest entry that breaks the corpus conventions."""
