#!/usr/bin/env python3
"""Special functions used by the family catalog."""

from dataclasses import dataclass
from typing import Callable

from scipy import special


@dataclass(frozen=True)
class SpecialFunctionKit:
    """log-gamma, digamma and log-beta, backed by scipy.special."""

    log_gamma: Callable[[float], float] = special.gammaln
    digamma: Callable[[float], float] = special.digamma

    def log_beta(self, a: float, b: float) -> float:
        """log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b)."""
        return float(self.log_gamma(a) + self.log_gamma(b) - self.log_gamma(a + b))


SPECIAL = SpecialFunctionKit()
