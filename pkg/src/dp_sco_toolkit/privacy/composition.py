"""Composition and amplification calculators, plus a per-run privacy ledger."""

import math
from dataclasses import dataclass, field
from typing import Any

from dp_sco_toolkit.errors import DomainError, ParameterizationError

SHUFFLE_CONSTANT = 8.0


def compose_basic(k: int, epsilon: float) -> float:
    """k-fold basic composition: k·ε."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    return k * epsilon


def compose_advanced(k: int, epsilon: float, delta: float, delta_prime: float) -> tuple[float, float]:
    """Advanced composition of k (ε, δ) mechanisms.

    Returns:
        (√(2k·ln(1/δ'))·ε + k·ε·(e^ε - 1), δ' + k·δ)
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if not 0.0 < delta_prime < 1.0:
        raise DomainError(f"delta_prime must lie in (0, 1), got {delta_prime}")
    total = math.sqrt(2 * k * math.log(1.0 / delta_prime)) * epsilon + k * epsilon * math.expm1(epsilon)
    return total, delta_prime + k * delta


def shuffle_amplified_epsilon(
    epsilon0: float, n: int, delta: float, constant: float = SHUFFLE_CONSTANT
) -> float:
    """Advisory ε after shuffling n local ε₀-DP reports: c·ε₀·√(ln(1/δ)/n).

    The constant is a bookkeeping default, not a certified bound.

    Raises:
        ParameterizationError: If ε₀ > ln(n / (16·ln(2/δ)))
    """
    if n < 1 or not 0.0 < delta < 1.0:
        raise DomainError(f"need n >= 1 and 0 < delta < 1, got n={n}, delta={delta}")
    ratio = n / (16.0 * math.log(2.0 / delta))
    limit = math.log(ratio)
    if epsilon0 < 0 or epsilon0 > limit:
        raise ParameterizationError(
            f"epsilon0 <= log(n / (16 log(2/delta))) violated: {epsilon0} > {limit:.6g}"
        )
    return constant * epsilon0 * math.sqrt(math.log(1.0 / delta) / n)


def subsample_amplified(epsilon: float, delta: float, m: int, n: int) -> tuple[float, float]:
    """Privacy of an (ε, δ) mechanism run on a uniform m-of-n subsample."""
    if not 0 < m <= n:
        raise DomainError(f"need 0 < m <= n, got m={m}, n={n}")
    rate = m / n
    return math.log1p(rate * math.expm1(epsilon)), rate * delta


@dataclass
class LedgerEntry:
    label: str
    epsilon: float
    delta: float


@dataclass
class PrivacyLedger:
    """Per-run record of the budgets spent by sequential components.

    Totals use basic composition.
    """

    entries: list[LedgerEntry] = field(default_factory=list)
    non_private: bool = False

    def add(self, label: str, epsilon: float, delta: float) -> None:
        self.entries.append(LedgerEntry(label, epsilon, delta))

    @property
    def total_epsilon(self) -> float:
        return math.fsum(entry.epsilon for entry in self.entries)

    @property
    def total_delta(self) -> float:
        return math.fsum(entry.delta for entry in self.entries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "entries": [vars(entry) for entry in self.entries],
            "total_epsilon": self.total_epsilon,
            "total_delta": self.total_delta,
            "composition": "basic",
            "non_private": self.non_private,
        }
