"""Common result container returned by every evaluation backend."""

from dataclasses import dataclass, field


@dataclass
class EvalResult:
    """A density (or kernel) value with an absolute-error estimate.

    ``backend`` identifies the code path that produced the number
    ("series", "quad", "contour", "mc", possibly with a fallback
    annotation); ``counters`` holds backend-specific diagnostics such
    as term counts, function evaluations or subdivision counts.
    """

    value: float
    error: float
    backend: str
    counters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "backend": self.backend,
            "counters": dict(self.counters),
        }
