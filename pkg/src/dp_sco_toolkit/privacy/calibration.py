"""Noise calibration formulas for noisy mirror descent and tree Frank-Wolfe."""

import math

from dp_sco_toolkit.errors import DomainError, ParameterizationError

DEFAULT_SIGMA_CONSTANT = 100.0


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")


def sigma_noisy_md(
    L: float,
    d: int,
    delta: float,
    b: int,
    epsilon: float,
    *,
    q: float = math.inf,
    constant: float = DEFAULT_SIGMA_CONSTANT,
) -> float:
    """Per-sample Gaussian scale σ = c·L·√(d_eff·ln(1/δ))/(b·ε).

    d_eff is d for the ℓ1 setting (q = ∞) and d^{1-2/q} for general ℓp.

    Args:
        L: Lipschitz constant (0 gives σ = 0)
        d: Dimension
        delta: δ in (0, 1)
        b: Batch size
        epsilon: ε > 0
        q: Dual exponent selecting the effective dimension
        constant: Analysis constant c

    Returns:
        σ

    Raises:
        DomainError: δ outside (0, 1) or non-positive arguments
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"Gaussian noise needs 0 < delta < 1, got {delta}")
    if L < 0:
        raise DomainError(f"L must be >= 0, got {L}")
    _positive(d=d, b=b, epsilon=epsilon, constant=constant)
    effective = float(d) if math.isinf(q) else float(d) ** (1.0 - 2.0 / q)
    return constant * L * math.sqrt(effective * math.log(1.0 / delta)) / (b * epsilon)


def lambda_pure_fw(L: float, D: float, t: int, b: int, epsilon: float) -> float:
    """Laplace scale 2·L·D·2^t/(b·ε) for phase t of pure-DP tree Frank-Wolfe.

    Raises:
        ParameterizationError: If 2^t > b
    """
    _positive(L=L, D=D, b=b, epsilon=epsilon)
    if t < 0:
        raise DomainError(f"phase must be >= 0, got {t}")
    if 2**t > b:
        raise ParameterizationError(f"2^t <= b violated: 2^{t} > {b}")
    return 2.0 * L * D * 2**t / (b * epsilon)


def lambda_approx_fw(
    L: float, D: float, T: int, n: int, delta: float, b: int, epsilon: float
) -> float:
    """Laplace scale L·D·2^{T/2}·ln(n/δ)/(b·ε) for approximate-DP tree Frank-Wolfe.

    Raises:
        ParameterizationError: Naming the violated inequality among 2^T <= b,
            δ <= 1/n and ε <= √(2^{-T}·ln(1/δ))
    """
    _positive(L=L, D=D, n=n, b=b, epsilon=epsilon)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if T < 0:
        raise DomainError(f"T must be >= 0, got {T}")
    if 2**T > b:
        raise ParameterizationError(f"2^T <= b violated: 2^{T} > {b}")
    if delta > 1.0 / n:
        raise ParameterizationError(f"delta <= 1/n violated: {delta} > 1/{n}")
    epsilon_cap = math.sqrt(2.0**-T * math.log(1.0 / delta))
    if epsilon > epsilon_cap:
        raise ParameterizationError(
            f"epsilon <= sqrt(2^-T log(1/delta)) violated: {epsilon} > {epsilon_cap:.6g}"
        )
    return L * D * 2.0 ** (T / 2.0) * math.log(n / delta) / (b * epsilon)
