"""Machine-readable run reports.

A report is a JSON-compatible envelope: schema version, build identifier,
command, parameters, seed, and a command-specific body.  Serialization is
deterministic (fixed key order, repr-exact floats), so identical runs give
byte-identical files, and ``from_json(to_json(r)) == r`` holds exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Optional

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CheckResult:
    """One verification check: what was observed vs what was required."""

    name: str
    observed: Any
    expected: str
    passed: bool
    band: Optional[tuple[float, float]] = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "observed": self.observed,
            "expected": self.expected,
            "band": list(self.band) if self.band is not None else None,
            "passed": self.passed,
        }

    @staticmethod
    def from_dict(d: dict) -> "CheckResult":
        band = tuple(d["band"]) if d.get("band") is not None else None
        return CheckResult(name=d["name"], observed=d["observed"],
                           expected=d["expected"], passed=d["passed"], band=band)


@dataclass(frozen=True)
class ReportEnvelope:
    command: str
    params: dict
    body: dict
    seed: Optional[dict] = None
    build_id: str = "unspecified"
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "build_id": self.build_id,
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "body": self.body,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "ReportEnvelope":
        d = json.loads(text)
        return ReportEnvelope(command=d["command"], params=d["params"],
                              body=d["body"], seed=d["seed"],
                              build_id=d["build_id"],
                              schema_version=d["schema_version"])


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".kaltseq-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: list[str], rows: list[list]) -> str:
    """Minimal deterministic CSV rendering (values contain no separators)."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)
