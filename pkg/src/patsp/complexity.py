"""
Pattern-aware complexity, evaluated entirely in log space.

The worst-case cost n^2 * 2^n overflows a double long before n = 2392, so every
quantity here is carried as its natural logarithm and the additive residual
ln(n + 1) is folded in with log-sum-exp.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

DEFAULT_K_EXP = 2.0


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def base_log_complexity(n: int) -> float:
    """ln(n^2 * 2^n)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return 2.0 * math.log(n) + n * math.log(2.0)


def log_residual(n: int) -> float:
    """ln of the residual term ln(n + 1)."""
    return math.log(math.log(n + 1))


def pattern_factor(n: int, rho: float, H: float, k_exp: float = DEFAULT_K_EXP) -> float:
    """exp(-H / ln n) * (1 - rho^k)."""
    if n <= 1:
        raise ValueError("n must exceed 1 so that ln n > 0")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if H < 0:
        raise ValueError("entropy must be non-negative")
    if k_exp <= 0:
        raise ValueError("k_exp must be positive")
    return math.exp(-H / math.log(n)) * (1.0 - rho ** k_exp)


def _log_pattern_factor(n: int, rho: float, H: float, k_exp: float) -> float:
    pattern_factor(n, rho, H, k_exp)  # contract checks
    coverage = -math.expm1(k_exp * math.log(rho)) if rho > 0 else 1.0
    if coverage <= 0.0:
        return -math.inf
    return -H / math.log(n) + math.log(coverage)


@dataclass(frozen=True)
class ComplexityEstimate:
    n: int
    rho: float
    H: float
    R: float
    k_exp: float
    log_base: float
    log_effective: float
    pue_complexity: float
    pue_coverage: float

    def to_dict(self) -> dict:
        return asdict(self)


def effective_complexity(
    n: int,
    rho: float,
    H: float,
    R: float = 1.0,
    k_exp: float = DEFAULT_K_EXP,
    pattern_credit: bool = True,
) -> ComplexityEstimate:
    """
    Effective complexity T_base * f * R + ln(n + 1).

    With ``pattern_credit=False`` the pattern factor is forced to 1, which is
    how solvers that ignore detected patterns are scored.
    """
    if not 0.0 < R <= 1.0:
        raise ValueError("R must lie in (0, 1]")
    log_base = base_log_complexity(n)
    log_f = _log_pattern_factor(n, rho, H, k_exp) if pattern_credit else 0.0
    main = log_base + log_f + math.log(R)
    log_eff = _logaddexp(main, log_residual(n))
    return ComplexityEstimate(
        n=n,
        rho=rho,
        H=H,
        R=R,
        k_exp=k_exp,
        log_base=log_base,
        log_effective=log_eff,
        pue_complexity=pue_from_logs(log_base, log_eff),
        pue_coverage=rho * 100.0,
    )


def pue_from_logs(log_base: float, log_effective: float) -> float:
    """(C_base - C) / C_base * 100 from the two logarithms."""
    return -math.expm1(log_effective - log_base) * 100.0


def upper_bound_log(n: int, rho: float, H: float, k_exp: float = DEFAULT_K_EXP) -> float:
    """ln(T_base * exp(-H/ln n) * (1 - rho^k) + ln(n+1)): the R = 1 upper bound."""
    return effective_complexity(n, rho, H, 1.0, k_exp).log_effective


def domain_variant_complexity(
    log_t_base: float,
    rho: float,
    exponent: float,
    n: int,
    H: float | None = None,
) -> float:
    """
    ln(T_base * (1 - rho)^exponent * (1 + H)^-1 + ln(n + 1)).

    The (1 + H)^-1 factor is applied only when ``H`` is given. Covers the
    regime, trading and token-prevalence variants with one formula.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    if rho == 1.0:
        main = -math.inf
    else:
        main = log_t_base + exponent * math.log1p(-rho)
        if H is not None:
            if H < 0:
                raise ValueError("entropy must be non-negative")
            main -= math.log1p(H)
    return _logaddexp(main, log_residual(n))
