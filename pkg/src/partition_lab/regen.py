"""Multiplicatively regenerative sets and their deletion laws.

A random closed subset of [0, 1] is multiplicatively regenerative when,
cut at the left end of the gap covering a uniform point, the rescaled
remainder reproduces the law of the whole set.  Such sets arise as
images of subordinator ranges under t -> 1 - exp(-t); everything about
the induced partition laws is encoded by the image Levy measure on
(0, 1] through the binomial integrals

    phi(n)    = integral of (1 - (1 - x)^n),
    phi(n, m) = C(n, m) * integral of x^m (1 - x)^(n - m),

whose ratios phi(n, m)/phi(n) give the deleted-size law q(n, m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    TWO_PARAM,
    ExtParams,
    FrequencyVector,
    IntervalSet,
    ParameterError,
    Scalar,
    SetPartition,
    canonicalize,
    delete_block,
    exact_div,
    is_exact,
    scalar_to_json,
    scalar_from_json,
)
from .deletion import DecrementMatrix
from .eppf import BetaParams, rising_factorial, stick_fraction_law
from .samplers import RngHandle, xi_order

ALPHA_THETA = "alpha_theta"
FINITE_ATOMS = "finite_atoms"


@dataclass(frozen=True)
class LevyImageMeasure:
    """Image Levy measure on (0, 1], either parametric or purely atomic.

    * alpha_theta: right tail u -> u^(-alpha) (1 - u)^theta on (0, 1),
      with 0 <= alpha < 1, theta >= 0, not both zero;
    * finite_atoms: finitely many atoms u_i with weights w_i > 0.
    """

    kind: str
    alpha: Scalar | None = None
    theta: Scalar | None = None
    atoms: tuple[tuple[Scalar, Scalar], ...] | None = None

    @classmethod
    def alpha_theta(cls, alpha: Scalar, theta: Scalar) -> "LevyImageMeasure":
        if not (0 <= alpha < 1):
            raise ParameterError(f"need 0 <= alpha < 1, got {alpha}")
        if not (theta >= 0):
            raise ParameterError(f"need theta >= 0, got {theta}")
        if alpha == 0 and theta == 0:
            raise ParameterError("alpha and theta cannot both be 0")
        return cls(ALPHA_THETA, alpha=alpha, theta=theta)

    @classmethod
    def finite_atoms(cls, atoms: Sequence[tuple[Scalar, Scalar]]) -> "LevyImageMeasure":
        atoms = tuple((u, w) for (u, w) in atoms)
        if not atoms:
            raise ParameterError("need at least one atom")
        for (u, w) in atoms:
            if not (0 < u <= 1):
                raise ParameterError(f"atom location {u} outside (0, 1]")
            if not (w > 0):
                raise ParameterError(f"atom weight {w} must be positive")
        return cls(FINITE_ATOMS, atoms=atoms)

    def scaled(self, c: Scalar) -> "LevyImageMeasure":
        """The measure multiplied by c > 0 (atomic variant only)."""
        if self.kind != FINITE_ATOMS:
            raise ParameterError("scaling is supported for finite_atoms only")
        if not (c > 0):
            raise ParameterError(f"scale must be positive, got {c}")
        return LevyImageMeasure.finite_atoms(tuple((u, c * w) for (u, w) in self.atoms))

    def to_json(self) -> dict:
        if self.kind == ALPHA_THETA:
            return {
                "kind": self.kind,
                "alpha": scalar_to_json(self.alpha),
                "theta": scalar_to_json(self.theta),
            }
        return {
            "kind": self.kind,
            "atoms": [[scalar_to_json(u), scalar_to_json(w)] for (u, w) in self.atoms],
        }

    @classmethod
    def from_json(cls, d: dict) -> "LevyImageMeasure":
        if d["kind"] == ALPHA_THETA:
            return cls.alpha_theta(scalar_from_json(d["alpha"]), scalar_from_json(d["theta"]))
        return cls.finite_atoms(
            tuple((scalar_from_json(u), scalar_from_json(w)) for u, w in d["atoms"])
        )


def _gamma_ratio(p: Scalar, q: Scalar) -> Scalar:
    """Gamma(p)/Gamma(q) for p, q > 0; exact when p - q is an integer."""
    d = p - q
    if is_exact(p) and is_exact(q) and Fraction(d).denominator == 1:
        d = int(d)
        if d >= 0:
            return rising_factorial(q, d)
        return exact_div(1, rising_factorial(p, -d))
    if isinstance(d, float) and d.is_integer():
        d = int(d)
        if d >= 0:
            return float(rising_factorial(q, d))
        return 1.0 / float(rising_factorial(p, -d))
    return math.exp(math.lgamma(float(p)) - math.lgamma(float(q)))


@dataclass(frozen=True)
class ScaledBeta:
    """The number c * B(x, y), kept in factored form.

    Values of the binomial integrals for the alpha_theta measure are
    transcendental, but their pairwise ratios at integer offsets are
    rational; ScaledBeta division produces those ratios exactly when
    the fields are exact.
    """

    c: Scalar
    x: Scalar
    y: Scalar

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0):
            raise ParameterError(f"beta arguments must be positive, got ({self.x}, {self.y})")

    def __float__(self) -> float:
        if self.c == 0:
            return 0.0
        lb = (
            math.lgamma(float(self.x))
            + math.lgamma(float(self.y))
            - math.lgamma(float(self.x + self.y))
        )
        return float(self.c) * math.exp(lb)

    def __mul__(self, s: Scalar) -> "ScaledBeta":
        return ScaledBeta(self.c * s, self.x, self.y)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Scalar:
        if not isinstance(other, ScaledBeta):
            return ScaledBeta(exact_div(self.c, other), self.x, self.y)
        if other.c == 0:
            raise ZeroDivisionError("division by a zero ScaledBeta")
        if self.c == 0:
            return 0 if is_exact(self.c) and is_exact(other.c) else 0.0
        return (
            exact_div(self.c, other.c)
            * _gamma_ratio(self.x, other.x)
            * _gamma_ratio(self.y, other.y)
            * _gamma_ratio(other.x + other.y, self.x + self.y)
        )


def laplace_exponent(measure: LevyImageMeasure, a: Scalar):
    """phi(a) = integral of (1 - (1 - x)^a) against the measure, a >= 0.

    For the alpha_theta measure this is a * B(1 - alpha, a + theta),
    returned as a ScaledBeta; the atomic variant returns a plain scalar
    (exact for exact atoms and integer a).
    """
    if not (a >= 0):
        raise ParameterError(f"need a >= 0, got {a}")
    if measure.kind == ALPHA_THETA:
        if a == 0:
            return ScaledBeta(0, 1 - measure.alpha, measure.theta + 1)
        return ScaledBeta(a, 1 - measure.alpha, a + measure.theta)
    total: Scalar = 0
    if is_exact(a) and Fraction(a).denominator == 1:
        a = int(a)
    for (u, w) in measure.atoms:
        total = total + w * (1 - (1 - u) ** a)
    return total


def phi_nm(measure: LevyImageMeasure, n: int, m: int):
    """phi(n, m) = C(n, m) * integral of x^m (1 - x)^(n - m), 1 <= m <= n.

    For the alpha_theta measure the integral reduces to a single
    beta term,

        phi(n, m) = C(n, m) (m theta + (n - m) alpha) / (n - m + theta)
                    * B(m - alpha, n - m + theta + 1),

    with the m = n case C(n, n) * n * B(n - alpha, theta + 1).
    """
    if not (isinstance(n, int) and isinstance(m, int) and 1 <= m <= n):
        raise ParameterError(f"need integers 1 <= m <= n, got m={m}, n={n}")
    if measure.kind == ALPHA_THETA:
        alpha, theta = measure.alpha, measure.theta
        if m == n:
            return ScaledBeta(n, n - alpha, theta + 1)
        coeff = exact_div(math.comb(n, m) * (m * theta + (n - m) * alpha), n - m + theta)
        return ScaledBeta(coeff, m - alpha, n - m + theta + 1)
    total: Scalar = 0
    for (u, w) in measure.atoms:
        total = total + w * u ** m * (1 - u) ** (n - m)
    return math.comb(n, m) * total


def decrement_from_phi(measure: LevyImageMeasure, n_max: int) -> DecrementMatrix:
    """Deleted-size laws q(n, m) = phi(n, m)/phi(n) for n up to n_max.

    This is the subordinator route to the decrement matrix; for the
    alpha_theta measure with exact parameters the entries are exact
    rationals and must agree with deletion.decrement_matrix.
    """
    if not (isinstance(n_max, int) and n_max >= 1):
        raise ParameterError(f"need n_max >= 1, got {n_max}")
    rows = []
    for n in range(1, n_max + 1):
        phin = laplace_exponent(measure, n)
        rows.append(tuple(exact_div(phi_nm(measure, n, m), phin) for m in range(1, n + 1)))
    return DecrementMatrix(n_max, tuple(rows))


# ---------------------------------------------------------------------------
# subordinator paths and set constructors

@dataclass(frozen=True)
class SubordinatorPath:
    """Jump times and sizes of a pure-jump subordinator realization."""

    times: tuple[float, ...]
    jumps: tuple[float, ...]
    killed: bool = False

    def __post_init__(self):
        if len(self.times) != len(self.jumps):
            raise ParameterError("times and jumps must have equal length")
        prev = 0.0
        for t in self.times:
            if t <= prev:
                raise ParameterError("jump times must be strictly increasing")
            prev = t
        for j in self.jumps:
            if not (j > 0):
                raise ParameterError("jumps must be positive")

    def to_json(self) -> dict:
        return {"times": list(self.times), "jumps": list(self.jumps), "killed": self.killed}


def _check_eps(eps: float) -> None:
    if not (0 < eps < 1):
        raise ParameterError(f"need 0 < eps < 1, got {eps}")


def compound_poisson_set(
    theta: float, eps: float, rng: RngHandle, max_jumps: int = 10_000_000
) -> tuple[SubordinatorPath, IntervalSet]:
    """Gap intervals of {1 - exp(-S_t)} for a compound Poisson S.

    S has unit jump rate and exponential(theta) jump sizes; each jump J
    from level s opens the gap (1 - e^-s, 1 - e^-(s+J)).  Jumps are
    drawn (waiting time first, then size) until the uncovered terminal
    mass e^-S drops to eps.
    """
    if not (theta > 0):
        raise ParameterError(f"need theta > 0, got {theta}")
    _check_eps(eps)
    times, jumps, lengths = [], [], []
    t = 0.0
    remaining = 1.0
    while remaining > eps:
        if len(jumps) >= max_jumps:
            raise ParameterError(f"jump budget {max_jumps} exhausted above eps={eps}")
        t += rng.exponential(1.0)
        j = rng.exponential(theta)
        times.append(t)
        jumps.append(j)
        lengths.append(remaining * -math.expm1(-j))
        remaining *= math.exp(-j)
    path = SubordinatorPath(tuple(times), tuple(jumps))
    return path, IntervalSet.from_lengths(lengths, residual=remaining)


def stick_breaking_set(theta: float, eps: float, rng: RngHandle) -> IntervalSet:
    """Gap intervals from stick breaking with beta(1, theta) fractions.

    Same law as compound_poisson_set (the stick fractions are the jump
    images 1 - e^-J) but generated through the beta sampler, which makes
    the pair a useful cross-check.
    """
    if not (theta > 0):
        raise ParameterError(f"need theta > 0, got {theta}")
    _check_eps(eps)
    lengths = []
    remaining = 1.0
    while remaining > eps:
        v = rng.beta(1.0, float(theta))
        lengths.append(remaining * v)
        remaining *= 1.0 - v
    return IntervalSet.from_lengths(lengths, residual=remaining)


def ordered_arrangement(freq: FrequencyVector, xi: Scalar, rng: RngHandle) -> IntervalSet:
    """Lay out frequencies left to right in a xi-biased random order.

    The first frequency is a size-biased pick when the vector comes
    from stick breaking, so xi = theta/alpha turns GEM(alpha, theta)
    frequencies into a multiplicatively regenerative set.  The residual
    mass becomes the terminal gap.
    """
    if freq.dust != 0:
        raise ParameterError("ordered_arrangement needs proper frequencies (no dust)")
    if freq.k == 0:
        raise ParameterError("need at least one frequency")
    order = xi_order(freq.k, xi, rng).arrangement
    lengths = [float(freq.entries[e - 1]) for e in order]
    return IntervalSet.from_lengths(lengths, residual=float(freq.residual))


def _alpha_zero_lengths(
    alpha: float, eps: float, rng: RngHandle, max_sticks: int = 1_000_000
) -> tuple[list[float], float]:
    """Relative gap lengths of an (alpha, 0) set on (0, 1), residual last.

    Breaks sticks with beta(1 - alpha, k alpha) fractions (drawn in
    vectorized chunks), then applies the xi = 0 arrangement: every
    stick after the first in uniform random order, the first stick
    rightmost.
    """
    ws: list[float] = []
    remaining = 1.0
    k = 1
    chunk = 64
    while remaining > eps:
        if k > max_sticks:
            raise ParameterError(f"stick budget {max_sticks} exhausted above eps={eps}")
        shapes_b = alpha * np.arange(k, k + chunk, dtype=float)
        x = rng.gamma(1.0 - alpha, size=chunk)
        y = rng.gamma(shapes_b, size=chunk)
        w = x / (x + y)
        for wi in w:
            ws.append(float(wi))
            remaining *= 1.0 - float(wi)
            if remaining <= eps:
                break
        k += chunk
    lengths = []
    rem = 1.0
    for wi in ws:
        lengths.append(rem * wi)
        rem *= 1.0 - wi
    # xi = 0 arrangement: uniform order on sticks 2..K, stick 1 rightmost
    rest = np.argsort(rng.random(len(lengths) - 1)) + 1 if len(lengths) > 1 else []
    arranged = [lengths[i] for i in rest] + [lengths[0]]
    return arranged, rem


def crossbreed_set(alpha: float, theta: float, eps: float, rng: RngHandle) -> IntervalSet:
    """Regenerative set for (alpha, theta) built from two independent stages.

    Stage one breaks (0, 1) by beta(1, theta) sticks; stage two splits
    each stick by an independent copy of the (alpha, 0) set.  Each stage
    is truncated at eps/2, so untracked mass stays below eps.
    """
    if not (0 < alpha < 1):
        raise ParameterError(f"need 0 < alpha < 1, got {alpha}")
    if not (theta > 0):
        raise ParameterError(f"need theta > 0, got {theta}")
    _check_eps(eps)
    sticks = []
    remaining = 1.0
    while remaining > eps / 2:
        v = rng.beta(1.0, float(theta))
        sticks.append(remaining * v)
        remaining *= 1.0 - v
    intervals = []
    pos = 0.0
    for L in sticks:
        sub, _ = _alpha_zero_lengths(float(alpha), eps / 2, rng)
        # carry the right endpoint forward so rounding cannot reorder
        cursor = pos
        for s in sub:
            right = cursor + L * s
            if right > cursor:  # sublengths can vanish at float resolution
                intervals.append((cursor, right))
                cursor = right
        pos = max(pos + L, cursor)
    iv = tuple(intervals)
    total = sum(r - l for (l, r) in iv)
    return IntervalSet(iv, residual=max(1.0 - total, 0.0))


def leftmost_delete(iv: IntervalSet, n: int, rng: RngHandle) -> tuple[int, SetPartition]:
    """Paint n uniform points on iv, delete the leftmost occupied component.

    Points sharing an interval form a block located at the interval's
    left end; gap points are singletons at their own position.  The
    block with the smallest location is removed and the rest relabeled;
    returns (deleted size, remainder).
    """
    if not (isinstance(n, int) and n >= 1):
        raise ParameterError(f"need n >= 1, got {n}")
    groups: dict[object, list[int]] = {}
    location: dict[object, float] = {}
    for e in range(1, n + 1):
        u = rng.random()
        idx = iv.locate(u)
        key = ("gap", e) if idx is None else ("atom", idx)
        groups.setdefault(key, []).append(e)
        location.setdefault(key, float(iv.intervals[idx][0]) if idx is not None else u)
    pi = canonicalize(groups.values(), n=n)
    leftmost_key = min(groups, key=lambda kk: location[kk])
    j = pi.block_of(groups[leftmost_key][0])
    return len(groups[leftmost_key]), delete_block(pi, j)


def _gem_lengths_matrix(
    params: ExtParams,
    count: int,
    eps: float,
    rng: RngHandle,
    max_sticks: int,
    tail_frac: float = 0.01,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(count, K) stick lengths per row, zero-padded, plus counts and residuals.

    Rows stop once their residual drops to eps.  For alpha > 0 the
    residual only decays polynomially and its row-to-row spread is wide,
    so insisting on eps everywhere would let a few stragglers blow up
    the matrix width; the loop therefore also stops once at most a
    tail_frac fraction of rows remains above eps, and those rows keep
    their larger residual (the caller's pseudo-tail absorbs it).

    Fractions are drawn in column blocks, W_j ~ beta(1 - alpha,
    theta + j alpha) broadcast over the rows still running, so the
    python-level iteration count stays logarithmic in the final width.
    """
    if params.kind != TWO_PARAM:
        raise ParameterError("stick length matrix needs two_param frequencies")
    alpha, theta = float(params.alpha), float(params.theta)
    rem = np.ones(count)
    ks = np.zeros(count, dtype=np.int64)
    live = np.arange(count)
    chunks = []
    j = 1
    width = 64
    while live.size > tail_frac * count and j <= max_sticks:
        width = min(width, max_sticks - j + 1)
        b_cols = theta + alpha * np.arange(j, j + width, dtype=float)
        flat_b = np.broadcast_to(b_cols, (live.size, width)).ravel()
        w = rng.beta(1.0 - alpha, flat_b, size=flat_b.size).reshape(live.size, width)
        bar = np.cumprod(1.0 - w, axis=1)
        lens = rem[live, None] * w
        lens[:, 1:] *= bar[:, :-1]
        row_rem = rem[live, None] * bar
        hit = row_rem <= eps
        done = hit.any(axis=1)
        stop = np.where(done, hit.argmax(axis=1), width - 1)
        lens[np.arange(width)[None, :] > stop[:, None]] = 0.0
        chunk = np.zeros((count, width))
        chunk[live] = lens
        chunks.append(chunk)
        rem[live] = row_rem[np.arange(live.size), stop]
        ks[live] = j + stop
        live = live[~done]
        j += width
        width = min(2 * width, 1024)
    return np.concatenate(chunks, axis=1), ks, rem


def leftmost_deletion_counts(
    params: ExtParams,
    n: int,
    count: int,
    eps: float,
    rng: RngHandle,
    batch: int = 1024,
    max_sticks: int = 16384,
) -> np.ndarray:
    """Monte Carlo law of the leftmost-deleted block size, vectorized.

    Builds GEM(alpha, theta) stick lengths, arranges them by the
    xi = theta/alpha order, paints n uniform points and deletes the
    leftmost occupied component; entry m of the returned array counts
    replicates whose deleted block had size m.  Supported arrangements
    are the exchangeable cases xi in {0, 1, inf}; other xi need the
    object path (ordered_arrangement + leftmost_delete).

    The deleted size only depends on which occupied component the
    arrangement puts first, so instead of sorting the whole stick
    matrix each component gets an arrangement key and the minimum key
    over occupied components decides: for xi = 1 keys are iid uniform
    (the order is exchangeable), xi = 0 additionally forces stick 1
    after everything else, and xi = inf uses appearance order itself.

    For finite xi the mass beyond the truncation horizon is kept as one
    pseudo-component with its own key, since the true tail sticks would
    be interleaved, not rightmost; merging them only misgroups
    replicates with two or more points in the tail, an O((n*eps)^2)
    bias.  For xi = inf the appearance order really does place the tail
    rightmost, so the terminal gap is exact there.
    """
    if params.kind != TWO_PARAM:
        raise ParameterError("bulk deletion harness needs two_param frequencies")
    xi = params.xi()
    if not (math.isinf(xi) or xi == 0 or xi == 1):
        raise ParameterError(f"bulk harness supports xi in {{0, 1, inf}}, got {xi}")
    _check_eps(eps)
    counts = np.zeros(n + 1, dtype=np.int64)
    remaining = count
    while remaining > 0:
        b = min(batch, remaining)
        remaining -= b
        lengths, ks, rem = _gem_lengths_matrix(params, b, eps, rng, max_sticks)
        kc = lengths.shape[1]
        bounds = np.cumsum(lengths, axis=1)
        pts = rng.random(b * n).reshape(b, n)
        offs = 2.0 * np.arange(b)[:, None]
        gidx = np.searchsorted((bounds + offs).ravel(), (pts + offs).ravel(), side="left")
        col = gidx.reshape(b, n) - kc * np.arange(b)[:, None]  # col kc = tail
        rows = np.arange(b)
        if math.isinf(xi):
            key = col.astype(float)
        else:
            keys = rng.random(b * (kc + 1)).reshape(b, kc + 1)
            if xi == 0:
                keys[:, 0] = 1.5  # stick 1 goes after every uniform key
            key = keys[rows[:, None], col]
        win = col[rows, np.argmin(key, axis=1)]
        m = (col == win[:, None]).sum(axis=1)
        if math.isinf(xi):
            m[win == kc] = 1
        counts += np.bincount(m, minlength=n + 1)[: n + 1]
    return counts
