"""Configuration management for ctdiff.

A matrix configuration is a JSON (or YAML) document describing the targets,
the parameter dimensions to expand, and how traces are produced and diffed.
Environment variables override file values; relative paths resolve against
the directory holding the config file.
"""

import json
import os
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple, Union

from core.errors import ConfigError
from diffing.engine import DiffParams
from minivm.machine import VmLimits

# Try to import yaml, fall back gracefully
try:
    import yaml

    YAML_AVAILABLE = True
except ImportError:
    yaml = None
    YAML_AVAILABLE = False

PRODUCERS = ("minivm", "external")
EXTERNAL_FIELDS = {"target", "run", "secret_hex", "out"}


@dataclass
class TargetConfig:
    """One program under test.

    ``program`` is an assembly path for the minivm producer; ``command`` is
    passed to external commands as ``{target}``. Both may use dimension and
    label placeholders.
    """

    name: str
    program: Optional[str] = None
    command: Optional[str] = None
    labels: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_value(cls, value: Union[str, Dict[str, Any]]) -> "TargetConfig":
        if isinstance(value, str):
            return cls(name=Path(value).stem, program=value)
        if not isinstance(value, dict):
            raise ConfigError(f"target must be a path or mapping, got {type(value).__name__}")
        program = value.get("program")
        command = value.get("command")
        if not program and not command:
            raise ConfigError("target needs a 'program' or a 'command'")
        name = value.get("name") or Path(program or command.split()[0]).stem
        labels = {str(k): str(v) for k, v in (value.get("labels") or {}).items()}
        return cls(name=name, program=program, command=command, labels=labels)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "program": self.program,
            "command": self.command,
            "labels": dict(self.labels),
        }


@dataclass
class MatrixConfig:
    """Main configuration container."""

    targets: List[TargetConfig] = field(default_factory=list)
    dimensions: Dict[str, List[str]] = field(default_factory=dict)
    runs_per_experiment: int = 8
    diff: DiffParams = field(default_factory=DiffParams)
    producer: str = "minivm"
    external_cmd: Optional[str] = None
    symbol_map: Optional[str] = None
    known_issues: Optional[str] = None
    output_dir: str = "ctdiff-out"
    group_by: Optional[List[str]] = None
    scope: List[Tuple[int, int]] = field(default_factory=list)
    secret_len: int = 32
    timeout: float = 300.0
    determinism_check: bool = True
    limits: VmLimits = field(default_factory=VmLimits)
    base_dir: Path = field(default_factory=Path.cwd, compare=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "MatrixConfig":
        """Create MatrixConfig from a dictionary and validate it."""
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        config = cls(base_dir=Path(base_dir) if base_dir else Path.cwd())

        config.targets = [TargetConfig.from_value(t) for t in data.get("targets", [])]

        dims = data.get("dimensions") or {}
        if not isinstance(dims, dict):
            raise ConfigError("'dimensions' must map names to value lists")
        config.dimensions = {}
        for name, values in dims.items():
            if not isinstance(values, list) or not values:
                raise ConfigError(f"dimension {name!r} needs a non-empty list of values")
            config.dimensions[str(name)] = [str(v) for v in values]

        config.runs_per_experiment = _as_int(data.get("runs_per_experiment", 8), "runs_per_experiment")

        diff = data.get("diff") or {}
        try:
            config.diff = DiffParams(
                window=_as_int(diff.get("window", 8), "diff.window"),
                horizon=_as_int(diff.get("horizon", 4096), "diff.horizon"),
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

        config.producer = data.get("producer", "minivm")
        config.external_cmd = data.get("external_cmd")
        config.symbol_map = data.get("symbol_map")
        config.known_issues = data.get("known_issues")
        config.output_dir = data.get("output_dir", "ctdiff-out")
        config.group_by = data.get("group_by")
        config.scope = [_as_range(r) for r in data.get("scope", [])]
        config.secret_len = _as_int(data.get("secret_len", 32), "secret_len")
        config.timeout = float(data.get("timeout", 300.0))
        config.determinism_check = bool(data.get("determinism_check", True))

        limits = data.get("limits") or {}
        try:
            config.limits = VmLimits(
                max_steps=_as_int(limits.get("max_steps", 1_000_000), "limits.max_steps"),
                data_size=_as_int(limits.get("data_size", 65536), "limits.data_size"),
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

        config.validate()
        return config

    def to_dict(self) -> Dict[str, Any]:
        """Convert MatrixConfig to dictionary."""
        return {
            "targets": [t.to_dict() for t in self.targets],
            "dimensions": {k: list(v) for k, v in self.dimensions.items()},
            "runs_per_experiment": self.runs_per_experiment,
            "diff": self.diff.to_dict(),
            "producer": self.producer,
            "external_cmd": self.external_cmd,
            "symbol_map": self.symbol_map,
            "known_issues": self.known_issues,
            "output_dir": self.output_dir,
            "group_by": self.effective_group_by,
            "scope": [[b, n] for b, n in self.scope],
            "secret_len": self.secret_len,
            "timeout": self.timeout,
            "determinism_check": self.determinism_check,
            "limits": {"max_steps": self.limits.max_steps, "data_size": self.limits.data_size},
        }

    @property
    def effective_group_by(self) -> List[str]:
        if self.group_by is not None:
            return list(self.group_by)
        return ["target", *sorted(self.dimensions)]

    def resolve_path(self, path: Union[str, Path]) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def output_path(self) -> Path:
        return self.resolve_path(self.output_dir)

    def validate(self) -> None:
        """Raise :class:`ConfigError` for the first invalid setting."""
        if self.runs_per_experiment < 2:
            raise ConfigError(
                f"runs_per_experiment must be >= 2 to difference traces, got {self.runs_per_experiment}"
            )
        if self.producer not in PRODUCERS:
            raise ConfigError(f"unknown producer {self.producer!r} (expected one of {', '.join(PRODUCERS)})")
        if self.producer == "external" and not self.external_cmd:
            raise ConfigError("producer 'external' requires 'external_cmd'")
        if self.secret_len < 1:
            raise ConfigError("secret_len must be >= 1")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")

        names = [t.name for t in self.targets]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ConfigError(f"duplicate target name(s): {', '.join(dupes)}")

        for target in self.targets:
            if self.producer == "minivm" and not target.program:
                raise ConfigError(f"target {target.name!r} has no 'program' for the minivm producer")
            known = {"name", *self.dimensions, *target.labels}
            for what, template in (
                ("program", target.program),
                ("command", target.command),
                ("symbol_map", self.symbol_map),
                ("known_issues", self.known_issues),
            ):
                _check_placeholders(template, known, f"target {target.name!r} {what}")
            _check_placeholders(self.external_cmd, known | EXTERNAL_FIELDS, "external_cmd")

        # a group key must be present in every cell's parameters
        shared_labels = set.intersection(*(set(t.labels) for t in self.targets)) if self.targets else set()
        groupable = {"target", *self.dimensions, *shared_labels}
        for key in self.effective_group_by:
            if key not in groupable:
                raise ConfigError(
                    f"group_by key {key!r} is not 'target', a dimension or a label every target defines"
                )

        spans = sorted(self.scope)
        for (b1, l1), (b2, _) in zip(spans, spans[1:]):
            if b1 + l1 > b2:
                raise ConfigError(f"scope ranges at {b1:#x} and {b2:#x} overlap")


def template_fields(template: str) -> Set[str]:
    """Names of the ``{placeholders}`` in ``template``."""
    try:
        return {name for _, name, _, _ in string.Formatter().parse(template) if name}
    except ValueError as e:
        raise ConfigError(f"malformed template {template!r}: {e}") from e


def _check_placeholders(template: Optional[str], known: Iterable[str], where: str) -> None:
    if not template:
        return
    missing = sorted(template_fields(template) - set(known))
    if missing:
        raise ConfigError(f"{where}: unresolved placeholder(s) {', '.join('{' + m + '}' for m in missing)}")


def _as_int(value: Any, name: str) -> int:
    try:
        return int(value, 0) if isinstance(value, str) else int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def _as_range(value: Any) -> Tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"scope entries are [base, length] pairs, got {value!r}")
    return _as_int(value[0], "scope base"), _as_int(value[1], "scope length")


def load_config(path: Union[str, Path]) -> MatrixConfig:
    """Load and validate a matrix configuration file.

    Args:
        path: Path to a ``.json``, ``.yaml`` or ``.yml`` file

    Returns:
        MatrixConfig with defaults applied

    Raises:
        ConfigError: unreadable file, parse error (with line and column) or
            invalid settings
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e.strerror or e}") from e

    suffix = p.suffix.lower()
    if suffix in (".yaml", ".yml"):
        if not YAML_AVAILABLE:
            raise ConfigError(
                "PyYAML is required to load YAML configuration files. Install with: pip install pyyaml"
            )
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f"{p}:{mark.line + 1}:{mark.column + 1}" if mark else str(p)
            raise ConfigError(f"{where}: {getattr(e, 'problem', None) or e}") from e
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{p}:{e.lineno}:{e.colno}: {e.msg}") from e

    try:
        return MatrixConfig.from_dict(data, base_dir=p.resolve().parent)
    except ConfigError as e:
        raise ConfigError(f"{p}: {e}") from e


def merge_env_config(config: MatrixConfig) -> MatrixConfig:
    """Merge environment variables into configuration.

    Environment variables take precedence over file configuration.

    Args:
        config: Existing configuration

    Returns:
        Updated, re-validated configuration
    """
    if os.environ.get("CTDIFF_RUNS"):
        config.runs_per_experiment = _as_int(os.environ["CTDIFF_RUNS"], "CTDIFF_RUNS")
    if os.environ.get("CTDIFF_OUTPUT_DIR"):
        config.output_dir = os.environ["CTDIFF_OUTPUT_DIR"]

    window = os.environ.get("CTDIFF_WINDOW")
    horizon = os.environ.get("CTDIFF_HORIZON")
    if window or horizon:
        try:
            config.diff = DiffParams(
                window=_as_int(window, "CTDIFF_WINDOW") if window else config.diff.window,
                horizon=_as_int(horizon, "CTDIFF_HORIZON") if horizon else config.diff.horizon,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

    config.validate()
    return config
