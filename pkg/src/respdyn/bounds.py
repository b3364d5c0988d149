"""Closed-form evaluators and exhaustive checkers for convergence and trap bounds.

Small inputs are handled with exact integer or rational arithmetic; large
grids run in the log domain through lgamma, so nothing here overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from scipy.special import gammaln, logsumexp


@dataclass(frozen=True)
class BoundParams:
    """Exponents and fitted scale used by the trap/PNE coexistence bound."""

    alpha: float = 0.5
    beta: float = 0.2
    sigma: float = 0.8
    constant: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")
        if self.beta >= self.alpha / 2:
            raise ValueError(f"beta must be < alpha/2, got {self.beta}")
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must be in (0,1), got {self.sigma}")
        if self.constant <= 0:
            raise ValueError(f"constant must be positive, got {self.constant}")


@dataclass(frozen=True)
class ColumnWeightVector:
    """Per-column occupancy counts with their derived totals."""

    entries: tuple[int, ...]

    @property
    def ell(self) -> int:
        return sum(self.entries)

    @property
    def nonzero_count(self) -> int:
        return sum(1 for x in self.entries if x)


def _entries(c) -> tuple[int, ...]:
    if isinstance(c, ColumnWeightVector):
        return c.entries
    return tuple(int(x) for x in c)


def best_response_convergence_formula(K: int) -> float:
    """Convergence probability of best-response dynamics on a random game.

    Evaluates 1/K + (1/K) * sum_{t=1}^{2K-3} prod_{j=1}^{t} (K-1-floor(j/2))/K.
    The value is an approximation target derived under a conditioned start,
    not exact ground truth (the exhaustive K=2 value is 7/8, not 3/4).
    """
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    j = np.arange(1, 2 * K - 2)
    factors = (K - 1 - j // 2) / K
    return 1.0 / K + float(np.cumprod(factors).sum()) / K


def best_response_convergence_bound(K: int) -> float:
    """Upper bound 1/K + sqrt(pi/K); vacuous (above 1) for very small K."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return 1.0 / K + math.sqrt(math.pi / K)


def riemann_chain_check(K: int) -> bool:
    """Verify the bounding chain behind `best_response_convergence_bound`.

    Checks sum_t prod_j (K-1-floor(j/2))/K <= 2 sum_{t=1}^{K-1} exp(-t^2/K)
    <= sqrt(K*pi).  The middle sum runs to K-1: the term-wise comparison
    pairs products (2v-1, 2v) with exp(-v^2/K) for v up to K-1, and the
    Riemann-sum step holds for every upper limit.
    """
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    j = np.arange(1, 2 * K - 2)
    s_prod = float(np.cumprod((K - 1 - j // 2) / K).sum())
    t = np.arange(1, K)
    s_mid = 2.0 * float(np.exp(-t * t / K).sum())
    return s_prod <= s_mid <= math.sqrt(K * math.pi)


def poisson_pne_pmf(k: int) -> float:
    """Limiting distribution of the equilibrium count: Poisson with mean 1."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return math.exp(-1.0) / math.factorial(k)


def check_comb_bound(c, m: int, K: int) -> bool:
    """Factorial-product bound for column weights capped at m, exact integers.

    prod_i c_i!(K-c_i)! <= (m!(K-m)!)^floor(l/m) * (K!)^(K-floor(l/m))
    where l is the total weight.
    """
    entries = _entries(c)
    if not 1 <= m <= K:
        raise ValueError(f"m must be in [1,K], got m={m}, K={K}")
    if len(entries) != K:
        raise ValueError(f"expected a length-{K} vector, got length {len(entries)}")
    if any(not 0 <= x <= m for x in entries):
        raise ValueError(f"entries must lie in [0,{m}]")
    lhs = math.prod(math.factorial(x) * math.factorial(K - x) for x in entries)
    blocks = sum(entries) // m
    rhs = (
        (math.factorial(m) * math.factorial(K - m)) ** blocks
        * math.factorial(K) ** (K - blocks)
    )
    return lhs <= rhs


def check_cocomb_bound(c, K: int, literal: bool = False) -> bool:
    """Factorial-product bound when total weight stays below K, exact integers.

    With l the total weight and j the number of nonzero entries, checks
    prod over nonzero entries of c_i!(K-c_i)! <=
    (l-j+1)! (K-l+j-1)! ((K-1)!)^(j-1) (K!)^(l-j).

    ``literal=True`` evaluates the uncorrected variant (product over all K
    entries and no factorial on K-l+j-1) for diagnostics; that reading is
    falsified by e.g. c=(2,0,0) at K=3.
    """
    entries = _entries(c)
    if len(entries) != K:
        raise ValueError(f"expected a length-{K} vector, got length {len(entries)}")
    if any(not 0 <= x <= K for x in entries):
        raise ValueError(f"entries must lie in [0,{K}]")
    ell = sum(entries)
    if ell >= K:
        raise ValueError(f"total weight must be < K, got {ell} >= {K}")
    j = sum(1 for x in entries if x)
    if j == 0:
        return True
    if literal:
        lhs = math.prod(math.factorial(x) * math.factorial(K - x) for x in entries)
        rhs = (
            math.factorial(ell - j + 1)
            * (K - ell + j - 1)
            * math.factorial(K - 1) ** (j - 1)
            * math.factorial(K) ** (ell - j)
        )
        return lhs <= rhs
    lhs = math.prod(
        math.factorial(x) * math.factorial(K - x) for x in entries if x
    )
    rhs = (
        math.factorial(ell - j + 1)
        * math.factorial(K - ell + j - 1)
        * math.factorial(K - 1) ** (j - 1)
        * math.factorial(K) ** (ell - j)
    )
    return lhs <= rhs


def check_prod_ratio_bound(c, m: int, K: int) -> bool:
    """Binomial-ratio bound prod_i C(m,c_i)/C(K,c_i) <= (m/K)^l, exact rationals."""
    entries = _entries(c)
    if not 1 <= m <= K:
        raise ValueError(f"m must be in [1,K], got m={m}, K={K}")
    if len(entries) != K:
        raise ValueError(f"expected a length-{K} vector, got length {len(entries)}")
    if any(not 0 <= x <= m for x in entries):
        raise ValueError(f"entries must lie in [0,{m}]")
    ell = sum(entries)
    if ell >= K:
        raise ValueError(f"total weight must be < K, got {ell} >= {K}")
    lhs = math.prod(
        Fraction(math.comb(m, x), math.comb(K, x)) for x in entries
    )
    return lhs <= Fraction(m, K) ** ell


def small_trap_sum_ratio(K: int, alpha: float) -> float:
    """Small-trap union-bound sum, scaled by K^(3-2*alpha).

    Evaluates S = sum_{n=4}^{floor(K^alpha)} sum_{j=2}^{n-2}
    (K-n+j-1)!(n-j+1)! / (K^(j-1) j! (K-j)!) * C(n+K-1,K) * (j/K)^n in the
    log domain and returns S * K^(3-2*alpha).  Boundedness of this ratio in
    K is the content of the small-trap estimate.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    top = math.floor(K**alpha)
    if top < 4:
        return 0.0
    logk = math.log(K)
    terms = []
    for n in range(4, top + 1):
        for j in range(2, n - 1):
            terms.append(
                gammaln(K - n + j)
                + gammaln(n - j + 2)
                - (j - 1) * logk
                - gammaln(j + 1)
                - gammaln(K - j + 1)
                + gammaln(n + K)
                - gammaln(K + 1)
                - gammaln(n)
                + n * (math.log(j) - logk)
            )
    return float(math.exp(logsumexp(terms) + (3 - 2 * alpha) * logk))


def large_trap_sum_gap(K: int, alpha: float, beta: float, floored: bool = False) -> float:
    """Log gap between the large-trap tail sum and its target K^(-beta*K^alpha).

    Returns log(sum_{n=floor(K^alpha)}^{K^2} C(n+K-1,K) * C(K,N)^(-n/N))
    minus log(K^(-beta*K^alpha)), with N = K^(alpha/2); negative means the
    tail bound is active.  The default evaluates the binomial penalty
    smoothly with real N and exponent n/N, matching the n-th root device the
    estimate is built on.  ``floored=True`` instead uses integer
    N = floor(K^(alpha/2)) and exponent floor(n/N); its plateaus make the
    first few terms past n = floor(K^alpha) dominate, so the gap stays
    positive far longer.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    if beta >= alpha / 2:
        raise ValueError(f"beta must be < alpha/2, got {beta}")
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    n0 = math.floor(K**alpha)
    n = np.arange(n0, K * K + 1, dtype=np.float64)
    log_count = gammaln(n + K) - gammaln(K + 1) - gammaln(n)
    if floored:
        N = math.floor(K ** (alpha / 2))
        expo = np.floor(n / N)
    else:
        N = K ** (alpha / 2)
        expo = n / N
    log_binom_KN = float(gammaln(K + 1) - gammaln(N + 1) - gammaln(K - N + 1))
    lhs = float(logsumexp(log_count - expo * log_binom_KN))
    rhs = -beta * (K**alpha) * math.log(K)
    return lhs - rhs


def stirling_bounds_check(n: int) -> bool:
    """Verify e^(1/(12n+1)) < n! e^n / (sqrt(2 pi) n^(n+1/2)) < e^(1/(12n))."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    with mpmath.workdps(50):
        mid = (
            mpmath.loggamma(n + 1)
            + n
            - mpmath.mpf(1) / 2 * mpmath.log(2 * mpmath.pi)
            - (n + mpmath.mpf(1) / 2) * mpmath.log(n)
        )
        lo = mpmath.mpf(1) / (12 * n + 1)
        hi = mpmath.mpf(1) / (12 * n)
        return bool(lo < mid < hi)


def trap_pne_coexistence_bound(K: int, params: BoundParams) -> float:
    """Bound on the probability that a trap and an equilibrium coexist.

    constant * K^(-3+2a) + K^2 (1/2)^(K^(a/2)) + K^(-K^a); vacuous at small K.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    a = params.alpha
    return (
        params.constant * K ** (-3 + 2 * a)
        + K**2 * 0.5 ** (K ** (a / 2))
        + K ** (-(K**a))
    )


def delta_event_bound(K: int, sigma: float) -> float:
    """Bound K^2 (1/2)^(K^sigma) on the row-domination event probability."""
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must be in (0,1), got {sigma}")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return K**2 * 0.5 ** (K**sigma)


def admissible_comb_inputs(K: int):
    """Yield every (entries, m) admissible for `check_comb_bound` at this K."""
    from itertools import product

    for m in range(1, K + 1):
        for entries in product(range(m + 1), repeat=K):
            yield entries, m


def admissible_cocomb_inputs(K: int):
    """Yield every entries vector admissible for `check_cocomb_bound` at this K."""
    from itertools import product

    for entries in product(range(K + 1), repeat=K):
        if sum(entries) < K:
            yield entries


def admissible_prod_ratio_inputs(K: int):
    """Yield every (entries, m) admissible for `check_prod_ratio_bound` at this K."""
    from itertools import product

    for m in range(1, K + 1):
        for entries in product(range(m + 1), repeat=K):
            if sum(entries) < K:
                yield entries, m
