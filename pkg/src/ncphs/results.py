from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a single verification: verdict, worst deviation, and a witness on failure."""

    passed: bool
    witness: Any = None
    max_deviation: float | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed
