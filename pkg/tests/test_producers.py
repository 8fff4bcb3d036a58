"""Test the producer registry and the built-in producers."""

import shlex
import sys
from pathlib import Path

import pytest

from conftest import C
from core.config import MatrixConfig
from core.errors import ProducerError
from core.producer import ProducerRegistry, TraceProducer
from minivm.producer import MinivmProducer
from minivm.seeding import derive_secret
from orchestrator.external import ExternalProducer
from orchestrator.matrix import expand_matrix
from orchestrator.producers import init_default_producers
from tracing.codec import write_trace
from tracing.model import ImageRange, Trace


class CountingProducer(TraceProducer):
    """Returns a different trace on every call."""

    def __init__(self):
        self.calls = 0

    @property
    def name(self):
        return "counting"

    @property
    def description(self):
        return "test producer"

    def secret_length(self, spec, config):
        return 4

    def produce(self, spec, config, secret, workdir):
        self.calls += 1
        return Trace(secret.run_index, secret.secret_id, (C(0, self.calls),))


def test_register_and_get():
    registry = ProducerRegistry()
    producer = CountingProducer()
    registry.register(producer)
    assert registry.get("counting") is producer
    assert registry.names() == ["counting"]
    registry.unregister("counting")
    assert registry.list() == {}


def test_unknown_producer():
    registry = ProducerRegistry()
    registry.register(CountingProducer())
    with pytest.raises(ProducerError, match="available: counting"):
        registry.get("qemu")


def test_default_check_determinism_compares_two_runs(tmp_path):
    producer = CountingProducer()
    assert not producer.check_determinism(None, None, derive_secret(0, 4), tmp_path)
    assert producer.calls == 2
    assert producer.symbol_map(None, None) is None


def test_init_default_producers_is_idempotent():
    registry = ProducerRegistry()
    init_default_producers(registry)
    first = registry.get("minivm")
    init_default_producers(registry)
    assert registry.names() == ["external", "minivm"]
    assert registry.get("minivm") is first


def test_minivm_producer(fixture_asm_dir, tmp_path):
    config = MatrixConfig.from_dict({"targets": [str(fixture_asm_dir / "select_leaky.s")]})
    spec = expand_matrix(config)[0]
    producer = MinivmProducer()

    assert producer.secret_length(spec, config) == 32
    trace = producer.produce(spec, config, derive_secret(0, 32), tmp_path)
    assert trace.run_index == 0
    assert trace.secret_id == "afcd1d7b39a820e2"
    assert producer.check_determinism(spec, config, derive_secret(0, 32), tmp_path)
    symbols = producer.symbol_map(spec, config)
    assert [e.function_name for e in symbols.entries] == ["main", "select_leaky"]


def _external_config(tmp_path, script, secret_len=8):
    (tmp_path / "tracer.py").write_text(script)
    return MatrixConfig.from_dict(
        {
            "targets": [{"name": "prog", "command": "prog-{opt}"}],
            "dimensions": {"opt": ["O2"]},
            "producer": "external",
            "external_cmd": f"{shlex.quote(sys.executable)} tracer.py {{target}} {{run}} {{secret_hex}} {{out}}",
            "secret_len": secret_len,
            "timeout": 30,
        },
        base_dir=tmp_path,
    )


def test_external_argv(tmp_path):
    config = _external_config(tmp_path, "")
    spec = expand_matrix(config)[0]
    secret = derive_secret(1, 8)
    argv = ExternalProducer().build_argv(spec, config, secret, Path("/tmp/out"))
    assert argv == [sys.executable, "tracer.py", "prog-O2", "1", secret.hex, "/tmp/out"]
    assert secret.secret_id == "c15c0289ec2d0a91"


def test_external_reads_trace_and_relabels(tmp_path):
    trace = Trace(7, "ffffffffffffffff", (C(0x10, 0x20),), (ImageRange(0, 0x100, "prog"),))
    canned = tmp_path / "canned.trace"
    write_trace(trace, canned)
    config = _external_config(
        tmp_path,
        f"import shutil, sys\nshutil.copy({str(canned)!r}, sys.argv[4])\n",
    )
    spec = expand_matrix(config)[0]
    secret = derive_secret(2, 8)

    got = ExternalProducer().produce(spec, config, secret, tmp_path / "work")
    assert got.records == trace.records
    assert got.run_index == 2
    assert got.secret_id == secret.secret_id


def test_external_failure_status(tmp_path):
    config = _external_config(tmp_path, "import sys\nsys.stderr.write('tracer broke')\nsys.exit(3)\n")
    spec = expand_matrix(config)[0]
    with pytest.raises(ProducerError, match="exited with status 3: tracer broke"):
        ExternalProducer().produce(spec, config, derive_secret(0, 8), tmp_path / "work")


def test_external_no_output(tmp_path):
    config = _external_config(tmp_path, "pass\n")
    spec = expand_matrix(config)[0]
    with pytest.raises(ProducerError, match="wrote no trace"):
        ExternalProducer().produce(spec, config, derive_secret(0, 8), tmp_path / "work")
