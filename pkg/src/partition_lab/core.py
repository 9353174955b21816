"""Shared value types for exchangeable partition computations.

Scalars are either exact (int / fractions.Fraction) or float.  Every
function in the package preserves the arithmetic mode of its inputs:
exact in, exact out, unless a routine is documented as float-only
(numerical series, gamma-function evaluations).  Mixing an exact scalar
with a float falls through to float, matching Python semantics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Scalar = Union[int, Fraction, float]

MASS_TOL = 1e-9


class ParameterError(ValueError):
    """Raised for parameter values outside the supported ranges."""


class MalformedPartitionError(ValueError):
    """Raised when blocks do not form a partition of {1, ..., n}."""


class UnsupportedKernelError(ValueError):
    """Raised when a deletion kernel is requested outside its domain."""


class ConvergenceError(RuntimeError):
    """Raised when a truncated series fails to meet its tolerance."""


class ResidualPickError(RuntimeError):
    """Raised when a random pick lands in untracked residual mass."""


# ---------------------------------------------------------------------------
# scalar helpers

def is_exact(x: Scalar) -> bool:
    """True when x is an int or Fraction (participates in exact mode)."""
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def all_exact(*xs: Scalar) -> bool:
    return all(is_exact(x) for x in xs)


def as_float(x: Scalar) -> float:
    return float(x)


def exact_div(num: Scalar, den: Scalar) -> Scalar:
    """Division that keeps int/int exact instead of floating it."""
    if isinstance(num, int) and isinstance(den, int):
        return Fraction(num, den)
    return num / den


def parse_scalar(text: str) -> Scalar:
    """Parse '1/2' or '3' as exact values, '0.5' or 'inf' as floats."""
    s = text.strip()
    if s in ("inf", "Infinity"):
        return math.inf
    if "/" in s:
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise ParameterError(f"cannot parse scalar {text!r}") from None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        raise ParameterError(f"cannot parse scalar {text!r}") from None


def scalar_to_json(x: Scalar):
    """JSON form: ints and floats verbatim, Fractions as {num, den}."""
    if isinstance(x, Fraction):
        return {"num": x.numerator, "den": x.denominator}
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def scalar_from_json(v) -> Scalar:
    if isinstance(v, dict):
        return Fraction(v["num"], v["den"])
    if v == "inf":
        return math.inf
    if isinstance(v, bool):
        raise ParameterError("boolean is not a scalar")
    if isinstance(v, (int, float)):
        return v
    raise ParameterError(f"cannot decode scalar from {v!r}")


def _mass_ok(total: Scalar, target: Scalar = 1) -> bool:
    if is_exact(total) and is_exact(target):
        return total == target
    return abs(as_float(total) - as_float(target)) <= MASS_TOL


def dumps(obj) -> str:
    """Deterministic JSON encoding used by all serializers."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# parameters of the extended two-parameter family

TWO_PARAM = "two_param"
NEG_ALPHA = "neg_alpha"
COUPON = "coupon"


@dataclass(frozen=True)
class ExtParams:
    """Parameters of the extended two-parameter partition family.

    Three ranges are supported:

    * ``two_param``: 0 <= alpha < 1, theta > -alpha;
    * ``neg_alpha``: alpha < 0 with theta = -m * alpha for an integer
      m >= 1, so at most m blocks ever appear;
    * ``coupon``: the limit of the previous range as alpha -> -infinity
      with m fixed: n draws from m equally likely colours.

    Use the classmethod constructors; the raw constructor performs no
    validation beyond what they establish.
    """

    kind: str
    alpha: Scalar | None
    theta: Scalar | None
    m: int | None = None

    @classmethod
    def two_param(cls, alpha: Scalar, theta: Scalar) -> "ExtParams":
        if isinstance(alpha, float) or isinstance(theta, float):
            alpha, theta = float(alpha), float(theta)
        if not (0 <= alpha < 1):
            raise ParameterError(f"need 0 <= alpha < 1, got {alpha}")
        if not (theta > -alpha):
            raise ParameterError(f"need theta > -alpha, got theta={theta}")
        return cls(TWO_PARAM, alpha, theta)

    @classmethod
    def neg_alpha(cls, alpha: Scalar, m: int) -> "ExtParams":
        if not (alpha < 0):
            raise ParameterError(f"need alpha < 0, got {alpha}")
        if not (isinstance(m, int) and m >= 1):
            raise ParameterError(f"need integer m >= 1, got {m}")
        return cls(NEG_ALPHA, alpha, -m * alpha, m)

    @classmethod
    def coupon(cls, m: int) -> "ExtParams":
        if not (isinstance(m, int) and m >= 1):
            raise ParameterError(f"need integer m >= 1, got {m}")
        return cls(COUPON, None, None, m)

    @property
    def is_exact_mode(self) -> bool:
        if self.kind == COUPON:
            return True
        return all_exact(self.alpha, self.theta)

    @property
    def max_blocks(self) -> int | None:
        """Upper bound on the number of blocks, None when unbounded."""
        return self.m

    def tau(self) -> Scalar:
        """Deletion bias tau = alpha / (alpha + theta); needs alpha, theta >= 0."""
        if self.kind != TWO_PARAM:
            raise ParameterError("tau is defined on the two_param range only")
        if self.alpha == 0 and self.theta == 0:
            raise ParameterError("tau undefined at alpha = theta = 0")
        if is_exact(self.alpha) and is_exact(self.theta):
            return Fraction(self.alpha) / (self.alpha + self.theta)
        return self.alpha / (self.alpha + self.theta)

    def xi(self) -> Scalar:
        """Order-bias parameter xi = theta / alpha, +inf when alpha = 0."""
        if self.kind != TWO_PARAM:
            raise ParameterError("xi is defined on the two_param range only")
        if self.alpha == 0:
            return math.inf
        if is_exact(self.alpha) and is_exact(self.theta):
            return Fraction(self.theta) / Fraction(self.alpha)
        return self.theta / self.alpha

    def shifted(self) -> "ExtParams":
        """Parameters after removing the block containing element 1.

        (alpha, theta) moves to (alpha, theta + alpha); the bounded
        ranges drop one block: m moves to m - 1.
        """
        if self.kind == TWO_PARAM:
            return ExtParams.two_param(self.alpha, self.theta + self.alpha)
        if self.m is None or self.m < 2:
            raise ParameterError("cannot shift below one block")
        if self.kind == NEG_ALPHA:
            return ExtParams.neg_alpha(self.alpha, self.m - 1)
        return ExtParams.coupon(self.m - 1)

    def as_float(self) -> "ExtParams":
        if self.kind == COUPON:
            return self
        return ExtParams(self.kind, float(self.alpha), float(self.theta), self.m)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.alpha is not None:
            out["alpha"] = scalar_to_json(self.alpha)
            out["theta"] = scalar_to_json(self.theta)
        if self.m is not None:
            out["m"] = self.m
        return out

    @classmethod
    def from_json(cls, d: dict) -> "ExtParams":
        kind = d["kind"]
        if kind == TWO_PARAM:
            return cls.two_param(scalar_from_json(d["alpha"]), scalar_from_json(d["theta"]))
        if kind == NEG_ALPHA:
            return cls.neg_alpha(scalar_from_json(d["alpha"]), d["m"])
        if kind == COUPON:
            return cls.coupon(d["m"])
        raise ParameterError(f"unknown parameter kind {kind!r}")


# ---------------------------------------------------------------------------
# compositions and set partitions

@dataclass(frozen=True)
class Composition:
    """A finite sequence of positive integer parts, order kept."""

    parts: tuple[int, ...]

    def __post_init__(self):
        for p in self.parts:
            if not (isinstance(p, int) and p >= 1):
                raise ParameterError(f"parts must be positive integers, got {p}")

    @classmethod
    def of(cls, parts: "Composition | Iterable[int]") -> "Composition":
        if isinstance(parts, Composition):
            return parts
        return cls(tuple(parts))

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    def tail_sums(self) -> tuple[int, ...]:
        """Suffix sums (part_j + ... + part_k) for j = 1..k, plus a final 0."""
        out = [0]
        for p in reversed(self.parts):
            out.append(out[-1] + p)
        return tuple(reversed(out))

    def sorted_desc(self) -> "Composition":
        return Composition(tuple(sorted(self.parts, reverse=True)))

    def drop_first(self) -> "Composition":
        return Composition(self.parts[1:])

    def to_json(self) -> dict:
        return {"parts": list(self.parts)}

    @classmethod
    def from_json(cls, d: dict) -> "Composition":
        return cls(tuple(d["parts"]))


@dataclass(frozen=True)
class SetPartition:
    """A partition of {1, ..., n} in order-of-appearance form.

    Blocks are tuples of increasing integers, listed by their least
    element.  The empty partition (n = 0) is allowed so that deleting
    the last block is total.
    """

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = set()
        prev_min = 0
        for b in self.blocks:
            if not b:
                raise MalformedPartitionError("empty block")
            if list(b) != sorted(b):
                raise MalformedPartitionError(f"block {b} not sorted")
            if b[0] <= prev_min:
                raise MalformedPartitionError("blocks not ordered by least element")
            prev_min = b[0]
            for e in b:
                if not (isinstance(e, int) and 1 <= e <= self.n):
                    raise MalformedPartitionError(f"element {e} outside 1..{self.n}")
                if e in seen:
                    raise MalformedPartitionError(f"element {e} repeated")
                seen.add(e)
        if len(seen) != self.n:
            raise MalformedPartitionError("blocks do not cover 1..n")

    @property
    def k(self) -> int:
        return len(self.blocks)

    def block_sizes(self) -> Composition:
        return Composition(tuple(len(b) for b in self.blocks))

    def block_of(self, element: int) -> int:
        """1-based index of the block containing the element."""
        for j, b in enumerate(self.blocks, start=1):
            if element in b:
                return j
        raise MalformedPartitionError(f"element {element} not present")

    def assignment_word(self) -> tuple[int, ...]:
        """Block index of each element 1..n; appearance order makes this canonical."""
        word = [0] * self.n
        for j, b in enumerate(self.blocks, start=1):
            for e in b:
                word[e - 1] = j
        return tuple(word)

    def to_json(self) -> dict:
        return {"n": self.n, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, d: dict) -> "SetPartition":
        return canonicalize([tuple(b) for b in d["blocks"]], n=d["n"])


def canonicalize(blocks: Iterable[Iterable[int]], n: int | None = None) -> SetPartition:
    """Sort blocks into order-of-appearance form and validate coverage.

    Elements must be exactly 1..n; n defaults to the total element count.
    """
    cleaned = [tuple(sorted(b)) for b in blocks if len(tuple(b)) > 0]
    cleaned.sort(key=lambda b: b[0] if b else 0)
    total = sum(len(b) for b in cleaned)
    if n is None:
        n = total
    return SetPartition(n, tuple(cleaned))


def delete_block(pi: SetPartition, j: int) -> SetPartition:
    """Remove the j-th block (1-based) and relabel what is left.

    The surviving elements are renamed by the unique increasing
    bijection onto {1, ..., n - |B_j|}.
    """
    if not (1 <= j <= pi.k):
        raise MalformedPartitionError(f"block index {j} out of range 1..{pi.k}")
    removed = set(pi.blocks[j - 1])
    survivors = sorted(e for e in range(1, pi.n + 1) if e not in removed)
    relabel = {e: i + 1 for i, e in enumerate(survivors)}
    new_blocks = [tuple(relabel[e] for e in b) for i, b in enumerate(pi.blocks) if i != j - 1]
    return canonicalize(new_blocks, n=len(survivors))


def partition_from_assignment(word: Sequence[int]) -> SetPartition:
    """Inverse of assignment_word for words using labels in appearance order."""
    blocks: dict[int, list[int]] = {}
    for i, lab in enumerate(word, start=1):
        blocks.setdefault(lab, []).append(i)
    return canonicalize(blocks.values(), n=len(word))


# ---------------------------------------------------------------------------
# frequencies

@dataclass(frozen=True)
class ResidualFractions:
    """Stick-breaking fractions W_1, W_2, ... with a termination flag.

    A fraction equal to 1 exhausts the stick; by convention the sequence
    stops there, so a terminated sequence ends in exactly one 1 and an
    unterminated one contains none.
    """

    fractions: tuple[Scalar, ...]
    terminated: bool = False

    def __post_init__(self):
        fr = self.fractions
        for i, w in enumerate(fr):
            if not (0 <= w <= 1):
                raise ParameterError(f"fraction {w} outside [0, 1]")
            if w == 1 and i != len(fr) - 1:
                raise ParameterError("fraction 1 before the last position")
        if self.terminated:
            if not fr or fr[-1] != 1:
                raise ParameterError("terminated sequence must end in 1")
        elif fr and fr[-1] == 1:
            raise ParameterError("sequence ending in 1 must be flagged terminated")

    @classmethod
    def from_raw(cls, ws: Iterable[Scalar]) -> "ResidualFractions":
        """Truncate a raw sequence at its first 1, flagging termination."""
        kept = []
        for w in ws:
            kept.append(w)
            if w == 1:
                return cls(tuple(kept), terminated=True)
        return cls(tuple(kept), terminated=False)

    def to_json(self) -> dict:
        return {
            "fractions": [scalar_to_json(w) for w in self.fractions],
            "terminated": self.terminated,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ResidualFractions":
        return cls(tuple(scalar_from_json(w) for w in d["fractions"]), d["terminated"])


@dataclass(frozen=True)
class FrequencyVector:
    """Frequencies in discovery order plus dust and an untracked residual.

    ``entries`` are the atom masses actually produced, ``dust`` is mass
    spread over a continuum (every sample point there is a singleton),
    and ``residual`` is mass beyond a truncation horizon.  The three
    must account for total mass 1, exactly in exact mode and within
    MASS_TOL in float mode.
    """

    entries: tuple[Scalar, ...]
    dust: Scalar = 0
    residual: Scalar = 0

    def __post_init__(self):
        for p in self.entries:
            if not (0 <= p <= 1):
                raise ParameterError(f"frequency {p} outside [0, 1]")
        if not (0 <= self.dust <= 1) or not (0 <= self.residual <= 1):
            raise ParameterError("dust and residual must lie in [0, 1]")
        total = sum(self.entries) + self.dust + self.residual
        if not _mass_ok(total):
            raise ParameterError(f"mass {total} does not account for 1")

    @property
    def k(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict:
        return {
            "entries": [scalar_to_json(p) for p in self.entries],
            "dust": scalar_to_json(self.dust),
            "residual": scalar_to_json(self.residual),
        }

    @classmethod
    def from_json(cls, d: dict) -> "FrequencyVector":
        return cls(
            tuple(scalar_from_json(p) for p in d["entries"]),
            scalar_from_json(d["dust"]),
            scalar_from_json(d["residual"]),
        )


@dataclass(frozen=True)
class RankedFrequencies:
    """Frequencies sorted nonincreasing; the deficit from 1 is dust."""

    entries: tuple[Scalar, ...]
    deficit: Scalar = 0

    def __post_init__(self):
        prev = 1
        for p in self.entries:
            if not (0 <= p <= 1):
                raise ParameterError(f"frequency {p} outside [0, 1]")
            if p > prev:
                raise ParameterError("entries must be nonincreasing")
            prev = p
        total = sum(self.entries) + self.deficit
        if not (0 <= self.deficit <= 1) or not _mass_ok(total):
            raise ParameterError("entries and deficit must account for mass 1")

    def to_json(self) -> dict:
        return {
            "entries": [scalar_to_json(p) for p in self.entries],
            "deficit": scalar_to_json(self.deficit),
        }

    @classmethod
    def from_json(cls, d: dict) -> "RankedFrequencies":
        return cls(tuple(scalar_from_json(p) for p in d["entries"]), scalar_from_json(d["deficit"]))


def stick_breaking(fractions: "ResidualFractions | Iterable[Scalar]") -> FrequencyVector:
    """Map residual fractions to frequencies P_i = W_i * prod_{j<i} (1 - W_j).

    The leftover product after the stored fractions becomes the residual
    (zero when the sequence terminated in a 1).
    """
    if not isinstance(fractions, ResidualFractions):
        fractions = ResidualFractions.from_raw(fractions)
    entries = []
    remaining: Scalar = 1
    for w in fractions.fractions:
        entries.append(w * remaining)
        remaining = remaining * (1 - w)
    if fractions.terminated:
        remaining = 0
    return FrequencyVector(tuple(entries), dust=0, residual=remaining)


def rank(freq: FrequencyVector) -> RankedFrequencies:
    """Sort frequencies nonincreasing; dust and residual pool into the deficit."""
    entries = tuple(sorted(freq.entries, reverse=True))
    return RankedFrequencies(entries, deficit=freq.dust + freq.residual)


# ---------------------------------------------------------------------------
# interval sets

@dataclass(frozen=True)
class IntervalSet:
    """Disjoint open subintervals of (0, 1) with an untracked residual mass.

    The intervals are sorted; the residual is mass not covered by any
    stored interval (a truncation artifact), so stored lengths plus the
    residual account for 1.
    """

    intervals: tuple[tuple[Scalar, Scalar], ...]
    residual: Scalar = 0

    def __post_init__(self):
        prev_r: Scalar = 0
        for (l, r) in self.intervals:
            if not (0 <= l < r <= 1):
                raise ParameterError(f"bad interval ({l}, {r})")
            if l < prev_r:
                raise ParameterError("intervals overlap or are unsorted")
            prev_r = r
        if not (0 <= self.residual <= 1):
            raise ParameterError("residual must lie in [0, 1]")
        if not _mass_ok(self.total_length + self.residual):
            raise ParameterError("interval lengths plus residual must reach 1")

    @property
    def total_length(self) -> Scalar:
        return sum((r - l for (l, r) in self.intervals), 0)

    @classmethod
    def from_lengths(cls, lengths: Sequence[Scalar], residual: Scalar = 0) -> "IntervalSet":
        """Lay out lengths contiguously from 0; the residual is the terminal gap."""
        intervals = []
        x: Scalar = 0
        for w in lengths:
            if w < 0:
                raise ParameterError("lengths must be nonnegative")
            # x + w == x when w underflows at float resolution; skip those too
            if w > 0 and x + w > x:
                intervals.append((x, x + w))
                x = x + w
        return cls(tuple(intervals), residual=residual)

    def locate(self, u: Scalar) -> int | None:
        """Index of the interval containing u, None when u falls in a gap."""
        lo, hi = 0, len(self.intervals) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            l, r = self.intervals[mid]
            if u <= l:
                hi = mid - 1
            elif u >= r:
                lo = mid + 1
            else:
                return mid
        return None

    def to_json(self) -> dict:
        return {
            "intervals": [[scalar_to_json(l), scalar_to_json(r)] for (l, r) in self.intervals],
            "residual": scalar_to_json(self.residual),
        }

    @classmethod
    def from_json(cls, d: dict) -> "IntervalSet":
        return cls(
            tuple((scalar_from_json(l), scalar_from_json(r)) for l, r in d["intervals"]),
            scalar_from_json(d["residual"]),
        )
