"""Per-constraint pass/fail reporting shared by vehicle and powertrain checks."""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ConstraintCheck:
    """One evaluated inequality with its margin (positive = satisfied)."""

    name: str
    value: float
    bound: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple
    extras: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def upper_bound(name: str, value: float, bound: float) -> ConstraintCheck:
    margin = bound - value
    return ConstraintCheck(name, value, bound, margin, margin >= 0.0)


def lower_bound(name: str, value: float, bound: float) -> ConstraintCheck:
    margin = value - bound
    return ConstraintCheck(name, value, bound, margin, margin >= 0.0)
