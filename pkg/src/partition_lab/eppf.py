"""Partition probability functions for the extended two-parameter family.

The central object is the probability p(lambda) that an exchangeable
partition of [n] equals a fixed partition with block sizes lambda, in
order of appearance:

    p(lambda) = prod_{i<k} (theta + i*alpha) / (theta + 1)_{n-1}
                * prod_j (1 - alpha)_{lambda_j - 1}

on the range 0 <= alpha < 1, theta > -alpha, extended to alpha < 0 with
theta = -m*alpha (at most m blocks) and to the m-colour coupon limit

    p_m(lambda) = m (m - 1) ... (m - k + 1) / m^n.

All functions preserve exact (Fraction) arithmetic when the parameters
are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .core import (
    COUPON,
    NEG_ALPHA,
    TWO_PARAM,
    Composition,
    ConvergenceError,
    ExtParams,
    ParameterError,
    Scalar,
    exact_div,
    is_exact,
)


def rising_factorial(x: Scalar, n: int) -> Scalar:
    """(x)_n = x (x+1) ... (x+n-1), with (x)_0 = 1."""
    if not (isinstance(n, int) and n >= 0):
        raise ParameterError(f"rising factorial needs integer n >= 0, got {n}")
    out: Scalar = 1
    for i in range(n):
        out = out * (x + i)
    return out


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters of a beta distribution, both positive."""

    a: Scalar
    b: Scalar

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ParameterError(f"beta shapes must be positive, got ({self.a}, {self.b})")

    def moment(self, i: int, j: int) -> Scalar:
        """E[W^i (1-W)^j] = (a)_i (b)_j / (a+b)_{i+j} for W ~ beta(a, b)."""
        num = rising_factorial(self.a, i) * rising_factorial(self.b, j)
        return exact_div(num, rising_factorial(self.a + self.b, i + j))

    def mean(self) -> Scalar:
        return exact_div(self.a, self.a + self.b)


def stick_fraction_law(params: ExtParams, i: int) -> BetaParams | Scalar:
    """Law of the i-th stick-breaking fraction W_i.

    Returns BetaParams(1 - alpha, theta + i*alpha) while that is a
    proper beta law, or the deterministic value W_i takes otherwise
    (1 at i = m for the bounded ranges, 1/(m - i + 1) for coupon).
    """
    if not (isinstance(i, int) and i >= 1):
        raise ParameterError(f"stick index must be a positive integer, got {i}")
    if params.kind == COUPON:
        if i > params.m:
            raise ParameterError(f"stick index {i} beyond {params.m} colours")
        return Fraction(1, params.m - i + 1)
    if params.kind == NEG_ALPHA:
        if i > params.m:
            raise ParameterError(f"stick index {i} beyond {params.m} blocks")
        if i == params.m:
            return 1
    return BetaParams(1 - params.alpha, params.theta + i * params.alpha)


def residual_moment_family(params: ExtParams) -> Callable[[int, int, int], Scalar]:
    """Moment oracle (i, r, s) -> E[W_i^r (1 - W_i)^s] for the stick fractions."""

    def moment(i: int, r: int, s: int) -> Scalar:
        law = stick_fraction_law(params, i)
        if isinstance(law, BetaParams):
            return law.moment(r, s)
        return law ** r * (1 - law) ** s

    return moment


def eppf(params: ExtParams, parts: Composition | Iterable[int]) -> Scalar:
    """Probability of a fixed partition of [n] with the given block sizes.

    The sizes are taken in order of appearance; the value is symmetric
    in them.  Compositions with more blocks than the bounded ranges
    allow get probability 0.
    """
    lam = Composition.of(parts)
    if lam.k == 0:
        raise ParameterError("eppf needs at least one part")
    n, k = lam.n, lam.k
    if params.max_blocks is not None and k > params.max_blocks:
        return 0
    if params.kind == COUPON:
        m = params.m
        num = 1
        for i in range(k):
            num *= m - i
        return Fraction(num, m ** n)
    alpha, theta = params.alpha, params.theta
    out: Scalar = 1
    for i in range(1, k):
        out = out * (theta + i * alpha)
    out = exact_div(out, rising_factorial(theta + 1, n - 1))
    for p in lam.parts:
        out = out * rising_factorial(1 - alpha, p - 1)
    return out


def addition_residual(params: ExtParams, parts: Composition | Iterable[int]) -> Scalar:
    """p(lambda) minus the sum of p over all one-element extensions.

    Extending means growing one existing part by 1 or appending a new
    part of size 1; consistency of the family makes the residual 0.
    """
    lam = Composition.of(parts)
    total: Scalar = 0
    for j in range(lam.k):
        grown = list(lam.parts)
        grown[j] += 1
        total = total + eppf(params, grown)
    total = total + eppf(params, lam.parts + (1,))
    return eppf(params, lam) - total


def eppf_from_moments(
    moment: Callable[[int, int, int], Scalar],
    parts: Composition | Iterable[int],
) -> Scalar:
    """Evaluate the partition probability from stick-fraction moments.

    For independent stick fractions the probability factorizes as
    prod_i E[W_i^{lambda_i - 1} (1 - W_i)^{Lambda_{i+1}}] with
    Lambda_{i+1} the sum of the later parts.
    """
    lam = Composition.of(parts)
    if lam.k == 0:
        raise ParameterError("need at least one part")
    tails = lam.tail_sums()
    out: Scalar = 1
    for i, p in enumerate(lam.parts, start=1):
        out = out * moment(i, p - 1, tails[i])
        if out == 0:
            return 0
    return out


def q_first_block(params: ExtParams, n: int, m: int) -> Scalar:
    """Probability that the block containing 1 meets [n] in exactly [m].

    Equals E[W_1^{m-1} (1 - W_1)^{n-m}] where W_1 is the first stick
    fraction (the size-biased frequency of the block of 1).
    """
    if not (isinstance(n, int) and isinstance(m, int) and 1 <= m <= n):
        raise ParameterError(f"need integers 1 <= m <= n, got m={m}, n={n}")
    law = stick_fraction_law(params, 1)
    if isinstance(law, BetaParams):
        return law.moment(m - 1, n - m)
    return law ** (m - 1) * (1 - law) ** (n - m)


def first_color_count_law(params: ExtParams, n: int, m: int) -> Scalar:
    """P(T_n = m): mass of m in the size of the block of 1 at its deletion time.

    T_n counts the elements of the block containing 1 seen strictly
    before the n-th element outside that block, so that

        P(T_n = m) = C(m + n - 2, m - 1) E[W_1^{m-1} (1 - W_1)^n].
    """
    if not (isinstance(n, int) and n >= 1 and isinstance(m, int) and m >= 1):
        raise ParameterError(f"need integers n >= 1, m >= 1, got n={n}, m={m}")
    return math.comb(m + n - 2, m - 1) * q_first_block(params, n + m, m)


def first_color_tail(params: ExtParams, n: int, m_cap: int) -> Scalar:
    """P(T_n > m_cap), the mass missed by summing the law up to m_cap.

    The event is that the first m_cap + n - 1 arrivals after element 1
    contain at most n - 1 elements outside the block of 1, a finite
    binomial sum:

        sum_{r<n} C(m_cap + n - 1, r) E[W_1^{m_cap + n - 1 - r} (1 - W_1)^r].

    Exact parameters give an exact value (cost grows with m_cap); float
    parameters use log-gamma and support astronomically large caps.
    """
    if not (isinstance(n, int) and n >= 1 and isinstance(m_cap, int) and m_cap >= 0):
        raise ParameterError(f"need integers n >= 1, m_cap >= 0, got n={n}, m_cap={m_cap}")
    horizon = m_cap + n - 1
    law = stick_fraction_law(params, 1)
    if isinstance(law, BetaParams) and not (is_exact(law.a) and is_exact(law.b)):
        a, b = float(law.a), float(law.b)
        lden = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
        total = 0.0
        for r in range(n):
            lmom = (
                math.lgamma(a + horizon - r)
                + math.lgamma(b + r)
                - math.lgamma(a + b + horizon)
                - lden
            )
            total += math.exp(math.lgamma(horizon + 1) - math.lgamma(r + 1)
                              - math.lgamma(horizon - r + 1) + lmom)
        return total
    if isinstance(law, BetaParams):
        moment = law.moment
    else:
        # deterministic W; 0**0 == 1 keeps the degenerate W = 1 case right
        def moment(i, j, _w=law):
            return _w ** i * (1 - _w) ** j

    total = 0
    for r in range(n):
        total = total + math.comb(horizon, r) * moment(horizon - r, r)
    return total


def derived_eppf(
    params: ExtParams,
    parts: Composition | Iterable[int],
    tol: float = 1e-9,
    max_terms: int = 50_000_000,
) -> float:
    """Partition probability after deleting the block containing 1.

    Sums t_m = C(m + n_mu - 2, m - 1) p((m,) + mu) over the unseen size
    m of the deleted block; the binomial counts configurations with the
    last kept element forced outside the block of 1, which makes the
    events disjoint across m.  The summation runs in float blocks with
    the term recurrence

        t_{m+1}/t_m = (n_mu + m - 1)/m * (m - alpha)/(theta + n_mu + m)

    and stops once the tail bound P(T_{n_mu} > m) drops below tol
    (the tail decays like m^-(alpha+theta), so tol must be chosen with
    the parameters in mind); ConvergenceError is raised at max_terms.

    The closed-form counterpart is eppf at the shifted parameters
    (alpha, theta + alpha) (bounded ranges: m - 1), which the test
    suite compares against.
    """
    mu = Composition.of(parts)
    if mu.k == 0:
        raise ParameterError("need at least one part")
    if params.max_blocks is not None and mu.k + 1 > params.max_blocks:
        return 0.0
    n_mu = mu.n
    fparams = params.as_float()
    if params.kind == COUPON:
        alpha, theta = 0.0, 0.0  # only the block-count prefactor differs
        inv_m = 1.0 / params.m
    else:
        alpha, theta = float(params.alpha), float(params.theta)
        inv_m = None
    term = float(eppf(fparams, (1,) + mu.parts))
    total = 0.0
    m = 1
    block = 1024
    while m <= max_terms:
        j = np.arange(m, m + block, dtype=float)
        if inv_m is not None:
            ratios = (n_mu + j - 1.0) / j * inv_m
        else:
            ratios = (n_mu + j - 1.0) / j * (j - alpha) / (theta + n_mu + j)
        terms = term * np.concatenate(([1.0], np.cumprod(ratios[:-1])))
        total += float(terms.sum())
        term = float(terms[-1] * ratios[-1])
        m += block
        if term == 0.0:
            return total
        # the series tail is bounded by the tail of the law of T
        if first_color_tail(fparams, n_mu, m - 1) < tol:
            return total
        block = min(2 * block, 1 << 18)
    raise ConvergenceError(
        f"first-block sum did not reach tolerance {tol} within {max_terms} terms"
    )


def factorization_check(params: ExtParams, parts: Composition | Iterable[int]) -> Scalar:
    """p(lambda) - q(n : lambda_1) * p_shifted(lambda_2, ...), zero for the family.

    The first factor is the law of the trace of the block of 1, the
    second the shifted-parameter probability of the rest.
    """
    lam = Composition.of(parts)
    if lam.k == 0:
        raise ParameterError("need at least one part")
    q = q_first_block(params, lam.n, lam.parts[0])
    if lam.k == 1:
        rest: Scalar = 1
    else:
        rest = eppf(params.shifted(), lam.drop_first())
    return eppf(params, lam) - q * rest
