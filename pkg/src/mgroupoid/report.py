"""Check reports shared by the suites and the command line."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, List, Sequence

PASS, FAIL, WARN = "pass", "fail", "warn"


@dataclass
class Check:
    id: str
    status: str
    residual: float = 0.0
    witness: Any = None

    def to_json(self) -> dict:
        return {"id": self.id, "status": self.status, "residual": float(self.residual),
                "witness": self.witness}


@dataclass
class CheckReport:
    suite: str
    groupoid: str = ""
    checks: List[Check] = field(default_factory=list)

    def add(self, id: str, ok: bool, residual: float = 0.0, witness: Any = None,
            warn_only: bool = False) -> Check:
        status = PASS if ok else (WARN if warn_only else FAIL)
        c = Check(id, status, float(residual), _jsonable(witness))
        self.checks.append(c)
        return c

    def within(self, id: str, residual: float, tol: float, witness: Any = None) -> Check:
        return self.add(id, bool(residual <= tol), residual, witness)

    def extend(self, other: "CheckReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.id, c.status, c.residual, c.witness))

    @property
    def failed(self) -> List[Check]:
        return [c for c in self.checks if c.status == FAIL]

    @property
    def exit_status(self) -> int:
        return 1 if self.failed else 0

    def to_json(self) -> dict:
        return {"suite": self.suite, "groupoid": self.groupoid,
                "status": FAIL if self.failed else PASS, "exit_status": self.exit_status,
                "checks": [c.to_json() for c in self.checks]}

    def render(self, fmt: str = "text") -> str:
        if fmt == "json":
            return json.dumps(self.to_json(), indent=2)
        head = f"suite {self.suite}"
        if self.groupoid:
            head += f" on {self.groupoid}"
        lines = [f"{head}: {'FAIL' if self.failed else 'PASS'} "
                 f"({len(self.checks) - len(self.failed)}/{len(self.checks)} ok)"]
        for c in self.checks:
            line = f"  {c.status.upper():4s}  {c.id:<40s} residual={c.residual:.3e}"
            if c.witness not in (None, {}, []):
                line += "  " + json.dumps(c.witness, separators=(",", ":"))
            lines.append(line)
        return "\n".join(lines)


def merge(suite: str, reports: Sequence[CheckReport]) -> CheckReport:
    out = CheckReport(suite)
    for r in reports:
        out.extend(r, prefix=f"{r.groupoid}/{r.suite}/" if r.groupoid else f"{r.suite}/")
    return out


def _jsonable(obj: Any) -> Any:
    """Convert numpy scalars, fractions and tuples into plain JSON values."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    if hasattr(obj, "to_json"):
        return _jsonable(obj.to_json())
    return str(obj)


