"""Cartesian expansion of a matrix configuration into experiment cells."""

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from core.config import MatrixConfig, TargetConfig


@dataclass(frozen=True)
class ExperimentSpec:
    """One (target, dimension values) cell with every template resolved."""

    experiment_id: str
    parameters: Dict[str, str]
    target: TargetConfig
    program: Optional[Path] = None
    command: Optional[str] = None
    symbol_map: Optional[Path] = None
    known_issues: Optional[Path] = None
    fields: Dict[str, str] = field(default_factory=dict, compare=False)

    @property
    def name(self) -> str:
        return self.target.name


def experiment_id_for(resolved: Dict[str, Any]) -> str:
    """Stable 16-hex-digit id of a resolved parameter map."""
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _fill(template: Optional[str], values: Dict[str, str]) -> Optional[str]:
    return template.format(**values) if template else None


def expand_matrix(config: MatrixConfig) -> List[ExperimentSpec]:
    """Expand targets x dimension values in a deterministic order.

    Targets keep their configured order. Within a target, dimensions are
    iterated with names sorted lexicographically (the first name varies
    slowest) and values in the order listed.
    """
    names = sorted(config.dimensions)
    specs: List[ExperimentSpec] = []
    for target in config.targets:
        for combo in itertools.product(*(config.dimensions[n] for n in names)):
            dims = dict(zip(names, combo))
            values = {"name": target.name, **target.labels, **dims}
            parameters = {"target": target.name, **target.labels, **dims}

            program = _fill(target.program, values)
            command = _fill(target.command, values)
            symbol_map = _fill(config.symbol_map, values)
            known_issues = _fill(config.known_issues, values)

            eid = experiment_id_for(
                {"parameters": parameters, "program": program, "command": command}
            )
            specs.append(
                ExperimentSpec(
                    experiment_id=eid,
                    parameters=parameters,
                    target=target,
                    program=config.resolve_path(program) if program else None,
                    command=command,
                    symbol_map=config.resolve_path(symbol_map) if symbol_map else None,
                    known_issues=config.resolve_path(known_issues) if known_issues else None,
                    fields=values,
                )
            )
    return specs
