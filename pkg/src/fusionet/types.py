"""Two-class probability pairs, the currency of the whole pipeline."""

from __future__ import annotations

from typing import NamedTuple

PROB_SUM_TOL = 1e-6


class ProbPair(NamedTuple):
    """(p_real, p_fake) probability vector for one item."""

    p_real: float
    p_fake: float

    def validate(self, tol: float = PROB_SUM_TOL) -> "ProbPair":
        """Raise ValueError unless both entries are probabilities summing to 1."""
        if not (0.0 <= self.p_real <= 1.0 and 0.0 <= self.p_fake <= 1.0):
            raise ValueError(f"probabilities outside [0, 1]: {self}")
        if abs(self.p_real + self.p_fake - 1.0) > tol:
            raise ValueError(
                f"probabilities sum to {self.p_real + self.p_fake!r}, "
                f"expected 1 within {tol:g}: {self}"
            )
        return self


NEUTRAL_PAIR = ProbPair(0.5, 0.5)
