"""Block deletion kernels and the law of the deleted size.

A deletion kernel picks a block of a partition at random; the family
studied here interpolates between the size-biased pick (tau = 0) and
the co-size-biased pick (tau = 1), with the partition distribution
invariant under deletion exactly at tau = alpha/(alpha + theta).

The decrement matrix q(n, m) is the chance that the block deleted from
a partition of [n] has size m:

    q(n, m) = C(n, m) (1 - alpha)_{m-1} / (theta + n - m)_m
              * ((n - m) alpha + m theta) / n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    TWO_PARAM,
    Composition,
    ExtParams,
    FrequencyVector,
    ParameterError,
    ResidualPickError,
    Scalar,
    exact_div,
    SetPartition,
    UnsupportedKernelError,
    delete_block,
    scalar_to_json,
    scalar_from_json,
)
from .eppf import rising_factorial
from .samplers import RngHandle, tau_pick_law
import math


def _require_kernel_params(params: ExtParams) -> None:
    if params.kind != TWO_PARAM:
        raise UnsupportedKernelError(
            "deletion kernels are defined for the two-parameter range only"
        )
    if params.theta < 0:
        raise UnsupportedKernelError("deletion kernels need theta >= 0")
    if params.alpha == 0 and params.theta == 0:
        raise UnsupportedKernelError("deletion kernel undefined at alpha = theta = 0")


def deletion_kernel(
    parts: Composition | Iterable[int],
    j: int,
    params: ExtParams | None = None,
    tau: Scalar | None = None,
) -> Scalar:
    """Probability that the deletion kernel removes part j (1-based).

    With parameters (alpha, theta), both nonnegative and not both zero,

        d(lambda; j) = (theta lambda_j + alpha (n - lambda_j))
                       / (n (theta + alpha (k - 1))).

    The kernel depends on (alpha, theta) only through
    tau = alpha/(alpha + theta), which may be passed directly instead.
    """
    lam = Composition.of(parts)
    if not (1 <= j <= lam.k):
        raise ParameterError(f"part index {j} out of range 1..{lam.k}")
    if (params is None) == (tau is None):
        raise ParameterError("pass exactly one of params or tau")
    if tau is not None:
        if not (0 <= tau <= 1):
            raise ParameterError(f"need 0 <= tau <= 1, got {tau}")
        return tau_pick_law(lam.parts, tau)[j - 1]
    _require_kernel_params(params)
    if lam.k == 1:
        return 1
    alpha, theta = params.alpha, params.theta
    n = lam.n
    num = theta * lam.parts[j - 1] + alpha * (n - lam.parts[j - 1])
    den = n * (theta + alpha * (lam.k - 1))
    return exact_div(num, den)


@dataclass(frozen=True)
class DecrementMatrix:
    """Rows n = 1..n_max of the deleted-size law; rows[n-1][m-1] = q(n, m)."""

    n_max: int
    rows: tuple[tuple[Scalar, ...], ...]

    def value(self, n: int, m: int) -> Scalar:
        if not (1 <= m <= n <= self.n_max):
            raise ParameterError(f"need 1 <= m <= n <= {self.n_max}")
        return self.rows[n - 1][m - 1]

    def row(self, n: int) -> tuple[Scalar, ...]:
        if not (1 <= n <= self.n_max):
            raise ParameterError(f"need 1 <= n <= {self.n_max}")
        return self.rows[n - 1]

    def row_sums(self) -> tuple[Scalar, ...]:
        return tuple(sum(r) for r in self.rows)

    def to_json(self) -> dict:
        return {
            "n_max": self.n_max,
            "rows": [[scalar_to_json(v) for v in r] for r in self.rows],
        }

    @classmethod
    def from_json(cls, d: dict) -> "DecrementMatrix":
        return cls(d["n_max"], tuple(tuple(scalar_from_json(v) for v in r) for r in d["rows"]))


def decrement_entry(params: ExtParams, n: int, m: int) -> Scalar:
    """q(n, m) for the invariant deletion at tau = alpha/(alpha + theta)."""
    _require_kernel_params(params)
    if not (1 <= m <= n):
        raise ParameterError(f"need 1 <= m <= n, got m={m}, n={n}")
    alpha, theta = params.alpha, params.theta
    if m == n:
        # the (theta + n - m)_m denominator degenerates at theta = 0;
        # q(n, n) reduces to the single-block probability
        return exact_div(rising_factorial(1 - alpha, n - 1), rising_factorial(theta + 1, n - 1))
    num = math.comb(n, m) * rising_factorial(1 - alpha, m - 1) * ((n - m) * alpha + m * theta)
    return exact_div(num, rising_factorial(theta + n - m, m) * n)


def decrement_matrix(params: ExtParams, n_max: int) -> DecrementMatrix:
    """All rows q(n, .) for n up to n_max, exact when the parameters are."""
    if not (isinstance(n_max, int) and n_max >= 1):
        raise ParameterError(f"need n_max >= 1, got {n_max}")
    rows = tuple(
        tuple(decrement_entry(params, n, m) for m in range(1, n + 1))
        for n in range(1, n_max + 1)
    )
    return DecrementMatrix(n_max, rows)


def f1_consistency(params: ExtParams, n: int, lam1: int) -> Scalar:
    """Worst deviation of the kernel-and-EPPF route to q(n, lam1).

    For every composition lambda of n with first part lam1,

        d(lambda; 1) C(n, lam1) (1 - alpha)_{lam1 - 1}
        (theta + (k - 1) alpha) / (theta + n - lam1)_{lam1}

    must equal q(n, lam1) regardless of the remaining parts.  Returns
    the largest absolute deviation over all such compositions (0
    expected).
    """
    _require_kernel_params(params)
    if not (1 <= lam1 <= n):
        raise ParameterError(f"need 1 <= lam1 <= n, got {lam1}")
    target = decrement_entry(params, n, lam1)
    alpha, theta = params.alpha, params.theta
    worst: Scalar = 0
    for rest in _compositions(n - lam1):
        lam = Composition((lam1,) + rest)
        d = deletion_kernel(lam, 1, params=params)
        k = lam.k
        if lam1 == n:
            # (theta + (k-1) alpha) / (theta)_n reduces at k = 1
            tail_factor = exact_div(1, rising_factorial(theta + 1, n - 1))
        else:
            tail_factor = exact_div(theta + (k - 1) * alpha, rising_factorial(theta + n - lam1, lam1))
        val = d * math.comb(n, lam1) * rising_factorial(1 - alpha, lam1 - 1) * tail_factor
        dev = abs(val - target)
        if dev > worst:
            worst = dev
    return worst


def _compositions(n: int):
    """All compositions of n into positive parts; () for n = 0."""
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def tau_delete(
    pi: SetPartition,
    rng: RngHandle,
    params: ExtParams | None = None,
    tau: Scalar | None = None,
) -> tuple[int, int, SetPartition]:
    """Delete one block of pi by the deletion kernel.

    Returns (block index, block size, relabeled remainder); the
    remainder is a partition of [n - size].
    """
    if pi.k == 0:
        raise ParameterError("cannot delete from the empty partition")
    sizes = pi.block_sizes()
    law = [
        float(deletion_kernel(sizes, j, params=params, tau=tau))
        for j in range(1, pi.k + 1)
    ]
    u = rng.random()
    acc = 0.0
    pick = pi.k
    for j, p in enumerate(law, start=1):
        acc += p
        if u < acc:
            pick = j
            break
    return pick, sizes.parts[pick - 1], delete_block(pi, pick)


def bulk_delete(freq: FrequencyVector, rng: RngHandle) -> tuple[int, FrequencyVector]:
    """Size-biased deletion of one frequency, remainder renormalized.

    Walks the stick order with Bernoulli trials on the residual
    fractions, so index j is removed with probability exactly
    freq.entries[j-1].  Raises ResidualPickError when the walk runs past
    the stored prefix (probability = residual mass).
    """
    if freq.dust != 0:
        raise ParameterError("bulk_delete needs proper frequencies (no dust)")
    remaining = 1.0
    pick = None
    for j, p in enumerate(freq.entries, start=1):
        w = float(p) / remaining if remaining > 0 else 1.0
        if rng.random() < w:
            pick = j
            break
        remaining -= float(p)
    if pick is None:
        raise ResidualPickError("size-biased pick fell into the residual mass")
    kept = freq.entries[: pick - 1] + freq.entries[pick:]
    scale = 1 - freq.entries[pick - 1]
    if scale <= 0:
        raise ParameterError("deleted the whole mass, nothing to renormalize")
    entries = tuple(p / scale for p in kept)
    return pick, FrequencyVector(entries, dust=0, residual=freq.residual / scale)
