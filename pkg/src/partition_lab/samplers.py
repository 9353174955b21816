"""Random sampling for partitions, frequencies, picks and orders.

Reproducibility contract: an RngHandle is seeded with a 64-bit integer
and every variate is derived from the PCG64 uniform stream by fixed,
documented algorithms.  For a fixed seed and call sequence the output
is identical across runs and platforms (IEEE doubles):

* uniforms: PCG64 via numpy.random.Generator.random;
* normals: Box-Muller, z = sqrt(-2 log(1 - u1)) * cos(2 pi u2), one
  normal per pair of uniforms (the sine half is discarded);
* gamma(a), a >= 1: Marsaglia-Tsang rejection with d = a - 1/3,
  c = 1/sqrt(9 d); propose v = (1 + c x)^3 from a normal x, accept on
  the squeeze u < 1 - 0.0331 x^4 or on log u < x^2/2 + d(1 - v + log v);
* gamma(a), a < 1: gamma(a + 1) * (1 - u)^(1/a);
* beta(a, b): X/(X + Y) for independent gammas X, Y;
* exponentials: -log(1 - u).

Scalar and vectorized paths follow the same algorithms but consume the
uniform stream in different orders, so they are reproducible separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import (
    COUPON,
    ConvergenceError,
    ExtParams,
    FrequencyVector,
    IntervalSet,
    ParameterError,
    RankedFrequencies,
    ResidualFractions,
    Scalar,
    SetPartition,
    exact_div,
    is_exact,
    partition_from_assignment,
    canonicalize,
)
from .eppf import BetaParams, rising_factorial, stick_fraction_law

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    """One SplitMix64 output step; used only to derive child seeds."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class RngHandle:
    """Deterministic random source; see the module docstring for algorithms."""

    def __init__(self, seed: int):
        if not isinstance(seed, int):
            raise ParameterError(f"seed must be an integer, got {seed!r}")
        self.seed = seed & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, index: int) -> "RngHandle":
        """Independent child handle number `index`, derived by SplitMix64."""
        return RngHandle(_splitmix64(self.seed ^ _splitmix64(index & _MASK64)))

    # -- uniforms ----------------------------------------------------------
    def random(self, size: int | None = None):
        """Uniform on [0, 1); a float for size None, else a 1-d array."""
        if size is None:
            return float(self._gen.random())
        return self._gen.random(size)

    # -- derived variates --------------------------------------------------
    def normal(self, size: int | None = None):
        u1 = self._gen.random(size if size is not None else 1)
        u2 = self._gen.random(size if size is not None else 1)
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * math.pi * u2)
        return float(z[0]) if size is None else z

    def exponential(self, rate: float = 1.0, size: int | None = None):
        if not rate > 0:
            raise ParameterError(f"rate must be positive, got {rate}")
        u = self._gen.random(size if size is not None else 1)
        out = -np.log1p(-u) / rate
        return float(out[0]) if size is None else out

    def gamma(self, shape, size: int | None = None):
        if size is None:
            return self._gamma_scalar(float(shape))
        a = np.broadcast_to(np.asarray(shape, dtype=float), (size,)).copy()
        return self._gamma_vec(a)

    def beta(self, a, b, size: int | None = None):
        """beta(a, b) as a ratio of two gammas drawn in that order."""
        x = self.gamma(a, size)
        y = self.gamma(b, size)
        return x / (x + y)

    def _gamma_scalar(self, a: float) -> float:
        if not a > 0:
            raise ParameterError(f"gamma shape must be positive, got {a}")
        boost = 1.0
        if a < 1.0:
            u = self._gen.random()
            boost = (1.0 - u) ** (1.0 / a)
            a = a + 1.0
        d = a - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = (1.0 + c * x) ** 3
            if v <= 0.0:
                continue
            u = self._gen.random()
            if u < 1.0 - 0.0331 * x ** 4:
                return boost * d * v
            if u > 0.0 and math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
                return boost * d * v

    def _gamma_vec(self, a: np.ndarray) -> np.ndarray:
        if not (a > 0).all():
            raise ParameterError("gamma shapes must be positive")
        small = a < 1.0
        a_eff = np.where(small, a + 1.0, a)
        d = a_eff - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(a.shape[0])
        pending = np.arange(a.shape[0])
        while pending.size:
            x = self.normal(pending.size)
            v = (1.0 + c[pending] * x) ** 3
            u = self._gen.random(pending.size)
            with np.errstate(divide="ignore", invalid="ignore"):
                slow = np.log(u) < 0.5 * x * x + d[pending] * (1.0 - v + np.log(v))
            ok = (v > 0.0) & ((u < 1.0 - 0.0331 * x ** 4) | slow)
            hit = pending[ok]
            out[hit] = d[hit] * v[ok]
            pending = pending[~ok]
        if small.any():
            u = self._gen.random(int(small.sum()))
            out[small] *= (1.0 - u) ** (1.0 / a[small])
        return out


# ---------------------------------------------------------------------------
# sequential partition sampling

def crp_sample(params: ExtParams, n: int, rng: RngHandle) -> SetPartition:
    """Seat elements 1..n one at a time by the usual reinforcement rule.

    Element i + 1 joins an existing block of size s with probability
    (s - alpha)/(i + theta) and opens a new block with probability
    (theta + k alpha)/(i + theta); the coupon range instead picks one of
    m colours uniformly, i.e. each seen block with probability 1/m.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ParameterError(f"need n >= 1, got {n}")
    word = [1]
    sizes = [1]
    for i in range(1, n):
        k = len(sizes)
        if params.kind == COUPON:
            weights = [1.0] * k + [float(params.m - k)]
            total = float(params.m)
        else:
            alpha, theta = float(params.alpha), float(params.theta)
            weights = [s - alpha for s in sizes] + [theta + k * alpha]
            total = i + theta
        u = rng.random() * total
        acc = 0.0
        pick = k
        for j, w in enumerate(weights):
            acc += w
            if u < acc:
                pick = j
                break
        if pick == k:
            sizes.append(1)
        else:
            sizes[pick] += 1
        word.append(pick + 1)
    return partition_from_assignment(word)


def crp_assignments(params: ExtParams, n: int, count: int, rng: RngHandle) -> np.ndarray:
    """Vectorized crp_sample: (count, n) block labels in appearance order.

    Labels are 0-based; row-wise they form the same law as
    crp_sample(params, n, ...).assignment_word() minus 1.
    """
    if params.kind == COUPON:
        alpha = theta = None
    else:
        alpha, theta = float(params.alpha), float(params.theta)
    counts = np.zeros((count, n))
    counts[:, 0] = 1.0
    k = np.ones(count, dtype=np.int64)
    words = np.zeros((count, n), dtype=np.int64)
    rows = np.arange(count)
    for i in range(2, n + 1):
        if params.kind == COUPON:
            w = (counts > 0).astype(float)
            new_w = (params.m - k).astype(float)
        else:
            w = np.where(counts > 0, counts - alpha, 0.0)
            new_w = theta + k * alpha
        w[rows, k] = new_w
        cum = np.cumsum(w, axis=1)
        u = rng.random(count) * cum[:, -1]
        idx = (cum <= u[:, None]).sum(axis=1)
        words[:, i - 1] = idx
        counts[rows, idx] += 1.0
        k += (idx == k).astype(np.int64)
    return words


def gem_sample(
    params: ExtParams,
    rng: RngHandle,
    eps: float = 1e-9,
    max_sticks: int = 1_000_000,
    min_sticks: int = 0,
) -> tuple[ResidualFractions, FrequencyVector]:
    """Draw stick fractions W_k ~ beta(1 - alpha, theta + k alpha) and break sticks.

    Stops once the unbroken mass falls to eps or below (but not before
    min_sticks fractions are stored), or when a deterministic fraction 1
    terminates the stick (bounded ranges).  Raises if max_sticks is hit
    first.
    """
    ws: list[float] = []
    remaining = 1.0
    k = 1
    while True:
        law = stick_fraction_law(params, k)
        if isinstance(law, BetaParams):
            w = rng.beta(float(law.a), float(law.b))
        else:
            w = float(law)
        ws.append(w)
        remaining *= 1.0 - w
        if w == 1.0:
            break
        if remaining <= eps and len(ws) >= min_sticks:
            break
        if k >= max_sticks:
            raise ConvergenceError(f"stick budget {max_sticks} exhausted above eps={eps}")
        k += 1
    fractions = ResidualFractions.from_raw(ws)
    entries = []
    rem = 1.0
    for w in fractions.fractions:
        entries.append(w * rem)
        rem *= 1.0 - w
    if fractions.terminated:
        rem = 0.0
    freq = FrequencyVector(tuple(entries), dust=0.0, residual=rem)
    return fractions, freq


def stick_fraction_matrix(params: ExtParams, k: int, count: int, rng: RngHandle) -> np.ndarray:
    """(count, k) i.i.d. rows of the first k stick fractions (vectorized)."""
    out = np.empty((count, k))
    for i in range(1, k + 1):
        law = stick_fraction_law(params, i)
        if isinstance(law, BetaParams):
            out[:, i - 1] = rng.beta(float(law.a), float(law.b), size=count)
        else:
            out[:, i - 1] = float(law)
    return out


def paintbox_sample(
    freqs: FrequencyVector | RankedFrequencies | IntervalSet,
    n: int,
    rng: RngHandle,
) -> SetPartition:
    """Partition of [n] induced by n uniform points on a painted interval.

    Points falling in the same stored interval share a block; points in
    dust, residual, or any uncovered gap are singletons.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ParameterError(f"need n >= 1, got {n}")
    if isinstance(freqs, FrequencyVector):
        iv = IntervalSet.from_lengths(
            [float(p) for p in freqs.entries],
            residual=float(freqs.dust) + float(freqs.residual),
        )
    elif isinstance(freqs, RankedFrequencies):
        iv = IntervalSet.from_lengths(
            [float(p) for p in freqs.entries], residual=float(freqs.deficit)
        )
    else:
        iv = freqs
    blocks: dict[object, list[int]] = {}
    for e in range(1, n + 1):
        u = rng.random()
        idx = iv.locate(u)
        key = ("gap", e) if idx is None else ("atom", idx)
        blocks.setdefault(key, []).append(e)
    return canonicalize(blocks.values(), n=n)


# ---------------------------------------------------------------------------
# biased picks and permutations

def _check_weights(x: Sequence[Scalar]) -> None:
    if len(x) == 0:
        raise ParameterError("need at least one weight")
    for v in x:
        if v < 0:
            raise ParameterError(f"negative weight {v}")


def size_biased_pick(x: Sequence[Scalar], rng: RngHandle) -> int | None:
    """Pick index j (1-based) with probability x_j; None with the leftover mass.

    The weights must be nonnegative with sum at most 1 (up to float
    round-off); the leftover 1 - sum(x) is the chance of picking none.
    """
    _check_weights(x)
    total = sum(float(v) for v in x)
    if total > 1.0 + 1e-9:
        raise ParameterError(f"weights sum to {total} > 1")
    u = rng.random()
    acc = 0.0
    for j, v in enumerate(x, start=1):
        acc += float(v)
        if u < acc:
            return j
    return None


def tau_pick_law(x: Sequence[Scalar], tau: Scalar) -> list[Scalar]:
    """Probabilities of the tau-biased pick from positive weights x.

    Index j is chosen with probability proportional to
    (1 - tau) x_j + tau (s - x_j), s = sum(x): tau = 0 is the
    size-biased pick, tau = 1/2 uniform, tau = 1 co-size-biased.
    """
    _check_weights(x)
    if any(v == 0 for v in x):
        raise ParameterError("tau-biased pick needs strictly positive weights")
    if not (0 <= tau <= 1):
        raise ParameterError(f"need 0 <= tau <= 1, got {tau}")
    k = len(x)
    if k == 1:
        return [1 if is_exact(tau) and all_exact_seq(x) else 1.0]
    s = sum(x)
    weights = [(1 - tau) * v + tau * (s - v) for v in x]
    total = s * (1 - tau + tau * (k - 1))
    return [exact_div(w, total) for w in weights]


def all_exact_seq(x: Iterable[Scalar]) -> bool:
    return all(is_exact(v) for v in x)


def tau_biased_pick(x: Sequence[Scalar], tau: Scalar, rng: RngHandle) -> int:
    """Sample the tau-biased pick; returns a 1-based index."""
    law = tau_pick_law(x, tau)
    u = rng.random()
    acc = 0.0
    for j, p in enumerate(law, start=1):
        acc += float(p)
        if u < acc:
            return j
    return len(x)


def tau_biased_perm(x: Sequence[Scalar], tau: Scalar, rng: RngHandle) -> tuple[int, ...]:
    """Exhaust x by repeated tau-biased picks without replacement.

    Returns the original indices (1-based) in pick order; tau = 0 gives
    the size-biased permutation.
    """
    _check_weights(x)
    remaining = list(range(len(x)))
    out = []
    while remaining:
        sub = [x[i] for i in remaining]
        j = tau_biased_pick(sub, tau, rng)
        out.append(remaining.pop(j - 1) + 1)
    return tuple(out)


def tau_perm_probability(x: Sequence[Scalar], tau: Scalar, perm: Sequence[int]) -> Scalar:
    """Exact probability that tau_biased_perm produces the given pick order."""
    k = len(x)
    if sorted(perm) != list(range(1, k + 1)):
        raise ParameterError(f"{perm} is not a permutation of 1..{k}")
    remaining = list(range(1, k + 1))
    prob: Scalar = 1
    for target in perm:
        law = tau_pick_law([x[i - 1] for i in remaining], tau)
        prob = prob * law[remaining.index(target)]
        remaining.remove(target)
    return prob


# ---------------------------------------------------------------------------
# xi-biased orders

@dataclass(frozen=True)
class XiOrder:
    """A sampled left-to-right arrangement of 1..k with its insertion ranks.

    ``ranks[j-1]`` is the position (1-based from the left) at which
    element j entered; ``arrangement`` lists the elements left to right.
    """

    k: int
    ranks: tuple[int, ...]
    arrangement: tuple[int, ...]


def arrangement_from_ranks(ranks: Sequence[int]) -> tuple[int, ...]:
    """Replay insertions: element j enters at position ranks[j-1]."""
    out: list[int] = []
    for j, r in enumerate(ranks, start=1):
        if not (1 <= r <= j):
            raise ParameterError(f"rank {r} for element {j} outside 1..{j}")
        out.insert(r - 1, j)
    return tuple(out)


def xi_order(k: int, xi: Scalar, rng: RngHandle) -> XiOrder:
    """Sample the xi-biased random order on 1..k.

    Element j enters at the rightmost position with probability
    xi/(j - 1 + xi) and at each of the j - 1 older positions with
    probability 1/(j - 1 + xi).  xi = 1 is the uniform order, xi = 0
    keeps element 1 rightmost (others uniform), xi = inf is the
    standard left-to-right order.
    """
    if not (isinstance(k, int) and k >= 1):
        raise ParameterError(f"need k >= 1, got {k}")
    if not (xi >= 0):
        raise ParameterError(f"need xi >= 0, got {xi}")
    ranks = [1]
    for j in range(2, k + 1):
        if math.isinf(xi):
            ranks.append(j)
            continue
        u = rng.random() * (j - 1 + float(xi))
        if u < float(xi):
            ranks.append(j)
        else:
            ranks.append(1 + min(int(u - float(xi)), j - 2))
    return XiOrder(k, tuple(ranks), arrangement_from_ranks(ranks))


def xi_arrangements(k: int, xi: Scalar, count: int, rng: RngHandle) -> np.ndarray:
    """Vectorized xi_order: (count, k) arrangements, elements 1..k."""
    if math.isinf(xi):
        return np.tile(np.arange(1, k + 1), (count, 1))
    xif = float(xi)
    arr = np.zeros((count, k), dtype=np.int64)
    arr[:, 0] = 1
    for j in range(2, k + 1):
        u = rng.random(count) * (j - 1 + xif)
        pos = np.where(u < xif, j, 1 + np.minimum((u - xif).astype(np.int64), j - 2))
        old = arr[:, : j - 1]
        cols = np.arange(j)[None, :]
        p = pos[:, None] - 1
        # slots left of p keep old[c], slots right of p take old[c - 1]
        src = np.clip(np.where(cols < p, cols, cols - 1), 0, j - 2)
        gathered = np.take_along_axis(old, src, axis=1)
        arr[:, :j] = np.where(cols == p, j, gathered)
    return arr


def size_biased_perms(x: Sequence[float], count: int, rng: RngHandle) -> np.ndarray:
    """Vectorized size-biased permutations of indices 1..k under weights x."""
    k = len(x)
    w0 = np.asarray([float(v) for v in x])
    if (w0 <= 0).any():
        raise ParameterError("need strictly positive weights")
    alive = np.ones((count, k), dtype=bool)
    out = np.empty((count, k), dtype=np.int64)
    rows = np.arange(count)
    for step in range(k):
        w = np.where(alive, w0[None, :], 0.0)
        cum = np.cumsum(w, axis=1)
        u = rng.random(count) * cum[:, -1]
        idx = (cum <= u[:, None]).sum(axis=1)
        out[:, step] = idx + 1
        alive[rows, idx] = False
    return out


def right_record_count(arrangement: Sequence[int]) -> int:
    """Number of elements sitting to the right of every smaller element.

    Element 1 always counts.  This is the record statistic governing the
    probability of an arrangement under the xi-biased order.
    """
    k = len(arrangement)
    if sorted(arrangement) != list(range(1, k + 1)):
        raise ParameterError(f"{arrangement} is not an arrangement of 1..{k}")
    pos = {e: i for i, e in enumerate(arrangement)}
    count = 0
    best = -1
    for e in range(1, k + 1):
        if pos[e] > best:
            count += 1
        best = max(best, pos[e])
    return count


def order_probability(xi: Scalar, arrangement: Sequence[int]) -> Scalar:
    """P(the xi-biased order produces this left-to-right arrangement).

    Equals xi^r / (xi)_k where r = right_record_count(arrangement),
    with the degenerate conventions at xi = 0 (element 1 rightmost,
    the rest uniform) and xi = inf (standard order only).
    """
    k = len(arrangement)
    r = right_record_count(arrangement)
    if isinstance(xi, float) and math.isinf(xi):
        return 1.0 if tuple(arrangement) == tuple(range(1, k + 1)) else 0.0
    if not (xi >= 0):
        raise ParameterError(f"need xi >= 0, got {xi}")
    if is_exact(xi):
        xi = Fraction(xi)
    if xi == 0:
        if r == 1:
            return Fraction(1, math.factorial(k - 1)) if is_exact(xi) else 1.0 / math.factorial(k - 1)
        return Fraction(0) if is_exact(xi) else 0.0
    return xi ** r / rising_factorial(xi, k)
