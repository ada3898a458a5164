"""Deterministic file emission: CSV tables, JSON reports, run manifests.

Data files never contain timestamps, so re-running a seeded command writes
byte-identical outputs; wall-clock information lives only in the manifest.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path


def write_csv(path, columns: dict, comments: list[str] | None = None) -> Path:
    """Column-oriented CSV with optional '#' comment header lines."""
    path = Path(path)
    names = list(columns)
    rows = zip(*(columns[name] for name in names))
    lines = [f"# {text}" for text in (comments or [])]
    lines.append(",".join(names))
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def _format_cell(value) -> str:
    if hasattr(value, "item"):  # numpy scalar -> plain python
        value = value.item()
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


@dataclass
class RunManifest:
    """Reproducibility record for one CLI run.

    Re-running the recorded command with the recorded config snapshot and
    root seed regenerates every listed output byte-identically (timestamps
    live only here).
    """

    command: str
    config_snapshot: dict
    root_seed: int
    tool_version: str
    arguments: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    started_at: str = ""
    finished_at: str = ""

    def record(self, path) -> str:
        rel = str(Path(path))
        if rel not in self.outputs:
            self.outputs.append(rel)
        return rel

    def write(self, path) -> Path:
        self.finished_at = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
        return write_json(
            path,
            {
                "command": self.command,
                "config_snapshot": self.config_snapshot,
                "root_seed": self.root_seed,
                "tool_version": self.tool_version,
                "arguments": self.arguments,
                "outputs": sorted(self.outputs),
                "started_at": self.started_at,
                "finished_at": self.finished_at,
            },
        )

    @staticmethod
    def load(path) -> dict:
        return json.loads(Path(path).read_text())
