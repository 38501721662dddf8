"""JSON result records written by the command-line tool."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

TOOL = "bpbmod"
DEFAULT_DIR = "bpb-records"


def spec_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def to_jsonable(obj):
    """Convert numpy values and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


@dataclass
class ResultRecord:
    command: str
    spec_sha256: str
    spec_text: str
    parameters: dict
    outputs: dict
    version: str = ""
    tool: str = TOOL
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_json(self) -> str:
        return json.dumps(to_jsonable(asdict(self)), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))

    def default_path(self) -> Path:
        key = spec_hash(self.spec_text + json.dumps(to_jsonable(self.parameters), sort_keys=True))
        return Path(DEFAULT_DIR) / f"{self.command}-{key[:12]}.json"

    def write(self, path: str | Path | None = None) -> Path:
        path = Path(path) if path is not None else self.default_path()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path


def make_record(command: str, spec_text: str, parameters: dict, outputs: dict) -> ResultRecord:
    from . import __version__

    return ResultRecord(command, spec_hash(spec_text), spec_text, to_jsonable(parameters), to_jsonable(outputs), __version__)
