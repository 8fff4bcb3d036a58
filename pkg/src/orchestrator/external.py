"""Producer that shells out to a user-supplied trace collection command.

The command template is split with shlex and each argument is formatted
with ``{target}``, ``{run}``, ``{secret_hex}``, ``{out}`` and the experiment's
parameters. The command must write a trace in the text format to ``{out}``.
"""

import logging
import shlex
import subprocess
from dataclasses import replace
from pathlib import Path
from typing import List

from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from core.config import MatrixConfig
from core.errors import ProducerError
from core.producer import TraceProducer
from minivm.seeding import SecretInput
from tracing.codec import read_trace
from tracing.model import Trace

logger = logging.getLogger("ctdiff.external")

STDERR_TAIL = 400


@retry(
    retry=retry_if_exception_type(subprocess.TimeoutExpired),
    stop=stop_after_attempt(2),
    wait=wait_exponential(multiplier=1, min=1, max=5),
    reraise=True,
)
def _run_with_retry(argv: List[str], timeout: float, cwd: Path) -> subprocess.CompletedProcess:
    return subprocess.run(argv, capture_output=True, text=True, timeout=timeout, cwd=cwd)


class ExternalProducer(TraceProducer):
    @property
    def name(self) -> str:
        return "external"

    @property
    def description(self) -> str:
        return "Runs external_cmd once per secret and decodes the trace it writes"

    def secret_length(self, spec, config: MatrixConfig) -> int:
        return config.secret_len

    def build_argv(self, spec, config: MatrixConfig, secret: SecretInput, out: Path) -> List[str]:
        values = {
            **spec.fields,
            "target": spec.command or (str(spec.program) if spec.program else spec.name),
            "run": str(secret.run_index),
            "secret_hex": secret.hex,
            "out": str(out),
        }
        try:
            return [token.format(**values) for token in shlex.split(config.external_cmd or "")]
        except (KeyError, ValueError) as e:
            raise ProducerError(f"cannot format external_cmd: {e}") from e

    def produce(self, spec, config: MatrixConfig, secret: SecretInput, workdir: Path) -> Trace:
        scratch = workdir / "external"
        scratch.mkdir(parents=True, exist_ok=True)
        out = scratch / f"run-{secret.run_index:02d}.out"
        if out.exists():
            out.unlink()
        argv = self.build_argv(spec, config, secret, out)
        if not argv:
            raise ProducerError("external_cmd is empty")

        logger.debug(f"{spec.experiment_id} run {secret.run_index}: {shlex.join(argv)}")
        try:
            proc = _run_with_retry(argv, config.timeout, config.base_dir)
        except subprocess.TimeoutExpired as e:
            raise ProducerError(f"{argv[0]} timed out after {config.timeout}s") from e
        except OSError as e:
            raise ProducerError(f"cannot run {argv[0]}: {e.strerror or e}") from e

        if proc.returncode != 0:
            tail = (proc.stderr or "").strip()[-STDERR_TAIL:]
            raise ProducerError(
                f"{argv[0]} exited with status {proc.returncode}" + (f": {tail}" if tail else "")
            )
        if not out.exists():
            raise ProducerError(f"{argv[0]} wrote no trace to {out}")

        trace = read_trace(out)
        # run labels come from ctdiff, not from the external tool
        return replace(trace, run_index=secret.run_index, secret_id=secret.secret_id)
