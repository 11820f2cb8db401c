from dataclasses import dataclass
from typing import Any, Dict, Optional

from exactmath import format_rat


@dataclass
class CheckOutcome:
    passed: bool
    lhs: Optional[Any] = None
    rhs: Optional[Any] = None
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "lhs": _render(self.lhs),
            "rhs": _render(self.rhs),
            "detail": self.detail,
        }

    def __bool__(self):
        return self.passed


def _render(value):
    if value is None:
        return None
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, (list, tuple)):
        return [_render(v) for v in value]
    return format_rat(value)


def compare_values(lhs, rhs) -> CheckOutcome:
    """Exact scalar comparison."""
    if lhs == rhs:
        return CheckOutcome(True, lhs, rhs)
    return CheckOutcome(False, lhs, rhs, f"{format_rat(lhs)} != {format_rat(rhs)}")


def compare_combinations(lhs, rhs) -> CheckOutcome:
    """Symbol-by-symbol comparison of two formal combinations; reports the first mismatch."""
    difference = lhs - rhs
    if difference.is_zero():
        return CheckOutcome(True, lhs, rhs)
    symbol, _ = next(iter(difference.items()))
    return CheckOutcome(
        False, lhs, rhs,
        f"{symbol}: {format_rat(lhs.coefficient(symbol))} != {format_rat(rhs.coefficient(symbol))}",
    )


def all_zero(values) -> CheckOutcome:
    values = list(values)
    for k, v in enumerate(values):
        if v != 0:
            return CheckOutcome(False, values, None, f"entry {k} is {format_rat(v)}")
    return CheckOutcome(True, values, None)
