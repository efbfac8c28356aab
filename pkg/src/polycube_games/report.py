"""Line-oriented check reports: ``CHECK <name> PASS|FAIL <detail>``."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"CHECK {self.name} {'PASS' if self.passed else 'FAIL'} {self.detail}".rstrip()


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    budget_exhausted: bool = False

    def add(self, name: str, passed: bool, detail: str = "") -> CheckResult:
        res = CheckResult(name, bool(passed), " ".join(str(detail).split()))
        self.checks.append(res)
        return res

    def note(self, text: str) -> None:
        self.notes.append(text)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def lines(self) -> list[str]:
        return [f"# {n}" for n in self.notes] + [c.line() for c in self.checks]

    def __str__(self) -> str:
        return "\n".join(self.lines())
