"""Named residual checks shared by the suites, the CLI and the acceptance tests."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Check:
    """``residual <= threshold`` passes; ``residual`` may be an exact integer mismatch."""

    name: str
    residual: float
    threshold: float

    @property
    def passed(self):
        return bool(self.residual <= self.threshold)

    @property
    def status(self):
        return "pass" if self.passed else "fail"

    def to_dict(self):
        return {"name": self.name, "residual": float(self.residual),
                "threshold": float(self.threshold), "status": self.status}


def worst(checks):
    """Collapse repeated checks with the same name into their maximum residual."""
    out = {}
    for c in checks:
        if c.name not in out or c.residual > out[c.name].residual:
            out[c.name] = c
    return list(out.values())
