"""Pass/fail bookkeeping for property suites."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    worst: float = 0.0
    witness: object = None
    detail: str = ""


@dataclass
class Report:
    checks: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def add(self, name, passed, worst=0.0, witness=None, detail=""):
        self.checks[name] = Check(name, bool(passed), float(worst), witness, detail)
        return self.checks[name]

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, name):
        return self.checks[name]

    def __contains__(self, name):
        return name in self.checks

    def table(self):
        width = max((len(k) for k in self.checks), default=4)
        rows = []
        for c in self.checks.values():
            flag = "PASS" if c.passed else "FAIL"
            line = f"{c.name:<{width}}  {flag}  worst={c.worst:.3e}"
            if c.detail:
                line += f"  {c.detail}"
            if not c.passed and c.witness is not None:
                line += f"  witness={c.witness}"
            rows.append(line)
        return "\n".join(rows)
