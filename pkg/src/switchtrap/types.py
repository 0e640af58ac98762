"""Result containers shared by the scenario modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .errors import ProbabilityRangeError

# Round-off can push |A|^2 a few ulps past the closed interval.
_PROB_SLACK = 1e-12


@dataclass(frozen=True)
class ProbabilityResult:
    """A probability ``|amplitude|**2`` with the amplitude and run metadata."""

    value: float
    amplitude: complex
    scenario: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        v = float(self.value)
        if not (-_PROB_SLACK <= v <= 1.0 + _PROB_SLACK):
            raise ProbabilityRangeError(f"probability {v!r} outside [0, 1] for {self.scenario}")
        object.__setattr__(self, "value", min(max(v, 0.0), 1.0))

    def __float__(self):
        return self.value

    @classmethod
    def from_amplitude(cls, amplitude, scenario, **params):
        amplitude = complex(amplitude)
        return cls(abs(amplitude) ** 2, amplitude, scenario, params)
