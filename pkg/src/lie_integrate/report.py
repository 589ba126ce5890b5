"""Verification records and reports.

A report is a flat list of check records plus a config echo. Records are
sorted by check name before serialization so that report assembly does not
depend on the order in which (possibly parallel) checks finished.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

TIMING_FIELDS = ("wall_time",)


def inputs_digest(*arrays) -> str:
    """Short stable digest of the numeric inputs of a check."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(np.asarray(a, dtype=float))
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


@dataclass
class CheckRecord:
    check_name: str
    residual: float
    tolerance: float
    inputs_digest: str = ""
    wall_time: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check_name": self.check_name,
            "inputs_digest": self.inputs_digest,
            # null marks a check that produced no finite residual
            "residual": float(self.residual) if math.isfinite(self.residual) else None,
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "wall_time": float(self.wall_time),
            "details": _jsonable(self.details),
        }


@dataclass
class VerificationReport:
    records: list[CheckRecord] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)
    witnesses: dict[str, Any] = field(default_factory=dict)

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    def extend(self, other: "VerificationReport") -> None:
        self.records.extend(other.records)
        self.witnesses.update(other.witnesses)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def get(self, check_name: str) -> CheckRecord:
        for r in self.records:
            if r.check_name == check_name:
                return r
        raise KeyError(check_name)

    def summary(self) -> dict[str, int]:
        n_pass = sum(r.passed for r in self.records)
        return {"total": len(self.records), "passed": n_pass, "failed": len(self.records) - n_pass}

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        records = [r.to_dict() for r in sorted(self.records, key=lambda r: r.check_name)]
        if not include_timing:
            for r in records:
                for k in TIMING_FIELDS:
                    r.pop(k, None)
        return {
            "summary": self.summary(),
            "config": _jsonable(self.config),
            "witnesses": _jsonable(dict(sorted(self.witnesses.items()))),
            "records": records,
        }

    def to_json(self, include_timing: bool = True) -> str:
        # repr-based float output is the shortest exact round trip for doubles
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=False, allow_nan=False)

    def format_lines(self) -> list[str]:
        lines = []
        for r in sorted(self.records, key=lambda r: r.check_name):
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"{status}  {r.check_name:<60s} residual={r.residual:.3e}  tol={r.tolerance:.1e}")
        s = self.summary()
        lines.append(f"{s['passed']}/{s['total']} checks passed")
        return lines


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
