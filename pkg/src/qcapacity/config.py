"""Solver budget configuration.

Values can come from a flat ``key = value`` file, from CLI flags, or from
keyword arguments; every report echoes the effective configuration.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    restarts: int = 16
    roof_max_iters: int = 400
    holevo_max_iters: int = 600
    fw_max_iters: int = 3000
    cert_tol: float = 1e-4
    probe_count: int = 2000
    gap_tol: float = 1e-3
    cq_tol: float = 1e-8
    degradable_tol: float = 1e-6
    dim_cap: int = 4
    essential_eps: float = 1e-6

    def replace(self, **changes) -> "SolverConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, values: dict) -> "SolverConfig":
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in types:
                raise ValueError(f"unknown solver setting {key!r}")
            kwargs[key] = int(raw) if types[key] in (int, "int") else float(raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "SolverConfig":
        text = Path(path).read_text()
        parser = configparser.ConfigParser()
        parser.read_string("[solver]\n" + text)
        return cls.from_mapping(dict(parser["solver"]))


DEFAULT_CONFIG = SolverConfig()
