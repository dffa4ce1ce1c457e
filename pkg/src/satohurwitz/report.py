"""Three-valued verdicts and structured reports shared by all checkers."""

from __future__ import annotations

from dataclasses import dataclass, field

YES = "yes"
NO = "no"
INCONCLUSIVE = "inconclusive"

PASS = "PASS"
FAIL = "FAIL"
INCONC = "INCONCLUSIVE"


@dataclass
class Report:
    """Outcome of a checker: a status, free-form findings and named data."""

    name: str
    status: str = PASS
    findings: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status == PASS

    def fail(self, message):
        self.status = FAIL
        self.findings.append(message)

    def inconclusive(self, message):
        if self.status == PASS:
            self.status = INCONC
        self.findings.append(message)

    def note(self, message):
        self.findings.append(message)

    def merge(self, other):
        """Fold a sub-report in; FAIL dominates INCONCLUSIVE dominates PASS."""
        for msg in other.findings:
            self.findings.append(f"{other.name}: {msg}")
        if other.status == FAIL:
            self.status = FAIL
        elif other.status == INCONC and self.status == PASS:
            self.status = INCONC
        self.data[other.name] = other.status
        return self

    def render(self):
        lines = [f"{self.name}: {self.status}"]
        for k in sorted(self.data):
            lines.append(f"  {k} = {self.data[k]}")
        for msg in self.findings:
            lines.append(f"  - {msg}")
        return "\n".join(lines)

    def __str__(self):
        return self.render()


def exit_code(reports):
    statuses = {r.status for r in reports}
    if FAIL in statuses:
        return 1
    if INCONC in statuses:
        return 2
    return 0
