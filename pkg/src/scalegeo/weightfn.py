"""Weight functions and diverging sequences with exact rational arithmetic.

A Weight is a monotone unbounded positive rule on the positive integers.
Weights come from a closed symbolic family (powers n^a, exponentials b^n,
powers of the binary magnitude bit_length(n), and products and shifts of
those) or from explicit tables with a declared tail rule.  Keeping the
family closed makes equivalence exactly decidable and keeps every value an
exact Fraction, which matters because downstream block boundaries grow far
beyond anything floating point can certify.

A DivergingSeq drops monotonicity but keeps a certified tail lower bound:
tail_lower_bound(K) never exceeds any value past index K and diverges with
K.  That bound is what lets rearrange_prefix return a provably correct
sorted prefix of an infinite sequence after scanning only finitely far.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import CapacityExceeded, ScanCapExceeded
from .permutation import (
    BlockReversalPerm,
    FiniteSupportPerm,
    IdentityPerm,
    Permutation,
)

__all__ = [
    "DivergingSeq",
    "Weight",
    "SymbolicWeight",
    "TableWeight",
    "ProductWeight",
    "TableSeq",
    "ProductSeq",
    "PushforwardSeq",
    "EquivVerdict",
    "power",
    "exponential",
    "power_log",
    "table",
    "table_seq",
    "seq_product",
    "running_max_table",
    "eval",
    "product",
    "shift",
    "min_product",
    "pushforward",
    "rearrange_prefix",
    "equiv_check",
    "inclusion_tail_norm",
    "weight_to_json",
    "weight_from_json",
    "DEFAULT_SCAN_CAP",
]

DEFAULT_SCAN_CAP = 10**6


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _check_eval_index(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"evaluation index must be a positive integer, got {n!r}")


class DivergingSeq(ABC):
    """Positive rule on the positive integers that diverges to infinity."""

    monotone = False
    endpoint_min_certified = False

    @abstractmethod
    def value(self, n: int) -> Fraction:
        """Exact value at index n >= 1."""

    @abstractmethod
    def tail_lower_bound(self, K: int) -> Fraction:
        """Bound t with t <= value(k) for every k > K, nondecreasing in K."""

    def prefix(self, m: int):
        return [self.value(n) for n in range(1, m + 1)]


class Weight(DivergingSeq):
    """Monotone unbounded positive rule; also a DivergingSeq."""

    monotone = True
    unbounded = True

    def tail_lower_bound(self, K: int) -> Fraction:
        # monotone, so everything past K is at least the next value
        return self.value(K + 1)

    def shifted(self, ell: int) -> "Weight":
        raise NotImplementedError

    @property
    def family_tag(self) -> str:
        return "weight"


@dataclass(frozen=True)
class SymbolicWeight(Weight):
    """Product c * prod (n+s)^a * base^n * prod bit_length(n+r)^g.

    coeff is a positive rational, powers is a sorted tuple of (shift s,
    exponent a >= 1), base is a rational >= 1 (1 means no exponential
    part), logs is a sorted tuple of (shift r, exponent g >= 1).  Every
    factor is nondecreasing, so the product is monotone; it is unbounded
    as long as at least one factor grows, which construction enforces.
    """

    coeff: Fraction
    powers: tuple
    base: Fraction
    logs: tuple

    def __post_init__(self):
        # integer numerator/denominator parts, cached for the hot path
        object.__setattr__(self, "_cnum", self.coeff.numerator)
        object.__setattr__(self, "_cden", self.coeff.denominator)
        object.__setattr__(self, "_bnum", self.base.numerator)
        object.__setattr__(self, "_bden", self.base.denominator)

    def value(self, n: int) -> Fraction:
        _check_eval_index(n)
        num = self._cnum
        den = self._cden
        for s, a in self.powers:
            num *= (n + s) ** a
        if self._bnum != 1:
            num *= self._bnum**n
        if self._bden != 1:
            den *= self._bden**n
        for r, g in self.logs:
            num *= (n + r).bit_length() ** g
        if den == 1:
            return Fraction(num)
        return Fraction(num, den)

    def shifted(self, ell: int) -> "SymbolicWeight":
        if ell == 0:
            return self
        return SymbolicWeight(
            coeff=self.coeff * self.base**ell,
            powers=tuple((s + ell, a) for s, a in self.powers),
            base=self.base,
            logs=tuple((r + ell, g) for r, g in self.logs),
        )

    @property
    def endpoint_min_certified(self) -> bool:
        # power and exponential factors are log-concave in a real variable,
        # so products against a reversed copy take their minimum at an end
        # of the index interval; bit_length factors break that.
        return not self.logs

    @property
    def signature(self):
        """(total power exponent, exponential base, total log exponent).

        Two symbolic weights have bounded mutual ratio exactly when their
        signatures agree; the coefficient and the shifts never matter.
        """
        return (
            sum(a for _, a in self.powers),
            self.base,
            sum(g for _, g in self.logs),
        )

    @property
    def family_tag(self) -> str:
        plain = self.coeff == 1 and self.base == 1
        if plain and not self.logs and len(self.powers) == 1 and self.powers[0][0] == 0:
            return f"power({self.powers[0][1]})"
        if self.coeff == 1 and not self.powers and not self.logs and self.base > 1:
            return f"exponential({self.base})"
        if (
            plain
            and len(self.logs) == 1
            and self.logs[0][0] == 0
            and (not self.powers or self.powers[0][0] == 0)
        ):
            a = self.powers[0][1] if self.powers else 0
            return f"power_log({a},{self.logs[0][1]})"
        return "symbolic"

    def __repr__(self):
        return f"SymbolicWeight<{self.family_tag}>"


def _merge_factors(pairs):
    acc = {}
    for s, a in pairs:
        acc[s] = acc.get(s, 0) + a
    return tuple(sorted((s, a) for s, a in acc.items() if a != 0))


def power(alpha: int) -> SymbolicWeight:
    """Weight n -> n^alpha for an integer alpha >= 1."""
    alpha = int(alpha)
    if alpha < 1:
        raise ValueError("power exponent must be a positive integer")
    return SymbolicWeight(Fraction(1), ((0, alpha),), Fraction(1), ())


def exponential(beta) -> SymbolicWeight:
    """Weight n -> beta^n for a rational beta > 1."""
    beta = _to_fraction(beta)
    if beta <= 1:
        raise ValueError("exponential base must exceed 1")
    return SymbolicWeight(Fraction(1), (), beta, ())


def power_log(alpha: int, gamma: int) -> SymbolicWeight:
    """Weight n -> n^alpha * bit_length(n)^gamma; gamma=0 gives power(alpha)."""
    alpha, gamma = int(alpha), int(gamma)
    if alpha < 0 or gamma < 0 or alpha + gamma < 1:
        raise ValueError("need alpha >= 0, gamma >= 0 and some growth")
    powers = ((0, alpha),) if alpha else ()
    logs = ((0, gamma),) if gamma else ()
    return SymbolicWeight(Fraction(1), powers, Fraction(1), logs)


class TableWeight(Weight):
    """Weight backed by an explicit nondecreasing positive prefix.

    tail_rule "linear" continues past the prefix with the last increment,
    which must be positive (a constant tail would not be unbounded);
    tail_rule "error" raises CapacityExceeded past the prefix.
    """

    def __init__(self, prefix, tail_rule="linear"):
        vals = tuple(_to_fraction(x) for x in prefix)
        if not vals:
            raise ValueError("table prefix must be nonempty")
        if any(v <= 0 for v in vals):
            raise ValueError("table values must be positive")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("table prefix must be nondecreasing")
        if tail_rule == "linear":
            if len(vals) < 2:
                raise ValueError("linear tail needs at least two prefix values")
            slope = vals[-1] - vals[-2]
            if slope <= 0:
                raise ValueError("constant tail is not unbounded")
            self._slope = slope
        elif tail_rule == "error":
            self._slope = None
        else:
            raise ValueError(f"unknown tail rule {tail_rule!r}")
        self.prefix_values = vals
        self.tail_rule = tail_rule

    @property
    def unbounded(self):
        return self.tail_rule == "linear"

    def value(self, n: int) -> Fraction:
        _check_eval_index(n)
        L = len(self.prefix_values)
        if n <= L:
            return self.prefix_values[n - 1]
        if self.tail_rule == "error":
            raise CapacityExceeded(
                f"table of length {L} has no value at {n} (tail rule is 'error')"
            )
        return self.prefix_values[-1] + self._slope * (n - L)

    def shifted(self, ell: int) -> "TableWeight":
        if ell == 0:
            return self
        L = len(self.prefix_values)
        if self.tail_rule == "error":
            if ell >= L:
                raise CapacityExceeded("shift exhausts the table prefix")
            return TableWeight(self.prefix_values[ell:], "error")
        keep = max(2, L - ell)
        return TableWeight(
            [self.value(ell + i) for i in range(1, keep + 1)], "linear"
        )

    @property
    def family_tag(self) -> str:
        return f"table({len(self.prefix_values)},{self.tail_rule})"

    def __repr__(self):
        return f"TableWeight<len={len(self.prefix_values)},tail={self.tail_rule}>"


def table(prefix, tail_rule="linear") -> TableWeight:
    return TableWeight(prefix, tail_rule)


class ProductWeight(Weight):
    """Pointwise product of weights where at least one is table backed."""

    def __init__(self, parts):
        flat = []
        for p in parts:
            if isinstance(p, ProductWeight):
                flat.extend(p.parts)
            else:
                flat.append(p)
        if not all(isinstance(p, Weight) for p in flat):
            raise TypeError("product parts must be Weights")
        self.parts = tuple(flat)

    @property
    def unbounded(self):
        return any(p.unbounded for p in self.parts)

    @property
    def endpoint_min_certified(self):
        return all(p.endpoint_min_certified for p in self.parts)

    def value(self, n: int) -> Fraction:
        out = Fraction(1)
        for p in self.parts:
            out *= p.value(n)
        return out

    def shifted(self, ell: int) -> "ProductWeight":
        return ProductWeight(tuple(p.shifted(ell) for p in self.parts))

    @property
    def family_tag(self) -> str:
        return "product"

    def __repr__(self):
        return f"ProductWeight<{len(self.parts)} parts>"


class TableSeq(DivergingSeq):
    """Diverging sequence backed by a positive prefix and a linear tail.

    The prefix may be non-monotone.  The tail continues from the last
    prefix value with the given positive slope, which is what certifies
    divergence; unverifiable tails are rejected by construction.
    """

    def __init__(self, prefix, slope=1):
        vals = tuple(_to_fraction(x) for x in prefix)
        if not vals:
            raise ValueError("prefix must be nonempty")
        if any(v <= 0 for v in vals):
            raise ValueError("sequence values must be positive")
        self.slope = _to_fraction(slope)
        if self.slope <= 0:
            raise ValueError("tail slope must be positive")
        self.prefix_values = vals
        self.monotone = all(a <= b for a, b in zip(vals, vals[1:]))
        # suffix_min[i] = min of prefix values from position i (0-based) on
        sm = list(vals)
        for i in range(len(sm) - 2, -1, -1):
            sm[i] = min(sm[i], sm[i + 1])
        self._suffix_min = sm

    def value(self, n: int) -> Fraction:
        _check_eval_index(n)
        L = len(self.prefix_values)
        if n <= L:
            return self.prefix_values[n - 1]
        return self.prefix_values[-1] + self.slope * (n - L)

    def tail_lower_bound(self, K: int) -> Fraction:
        L = len(self.prefix_values)
        if K >= L:
            return self.value(K + 1)
        first_tail = self.prefix_values[-1] + self.slope
        return min(self._suffix_min[K], first_tail)


def table_seq(prefix, slope=1) -> TableSeq:
    return TableSeq(prefix, slope)


class ProductSeq(DivergingSeq):
    """Pointwise product of diverging sequences."""

    def __init__(self, parts):
        flat = []
        for p in parts:
            if isinstance(p, ProductSeq):
                flat.extend(p.parts)
            else:
                flat.append(p)
        if not all(isinstance(p, DivergingSeq) for p in flat):
            raise TypeError("product parts must be DivergingSeqs")
        self.parts = tuple(flat)
        self.monotone = all(p.monotone for p in flat)

    def value(self, n: int) -> Fraction:
        out = Fraction(1)
        for p in self.parts:
            out *= p.value(n)
        return out

    def tail_lower_bound(self, K: int) -> Fraction:
        out = Fraction(1)
        for p in self.parts:
            out *= p.tail_lower_bound(K)
        return out


def seq_product(*parts) -> DivergingSeq:
    """Pointwise product; collapses to a Weight product when all parts are Weights."""
    if len(parts) == 1:
        return parts[0]
    if all(isinstance(p, Weight) for p in parts):
        out = parts[0]
        for p in parts[1:]:
            out = product(out, p)
        return out
    return ProductSeq(parts)


class PushforwardSeq(DivergingSeq):
    """Sequence n -> u(sigma(n)) with a tail bound from sigma's structure."""

    def __init__(self, sigma: Permutation, u: DivergingSeq):
        self.sigma = sigma
        self.u = u

    def value(self, n: int) -> Fraction:
        return self.u.value(self.sigma.apply(n))

    def tail_lower_bound(self, K: int) -> Fraction:
        s = self.sigma
        if isinstance(s, IdentityPerm):
            return self.u.tail_lower_bound(K)
        if isinstance(s, FiniteSupportPerm):
            top = s.max_support
            if K >= top:
                return self.u.tail_lower_bound(K)
            cands = [self.u.value(s.apply(j)) for j in range(K + 1, top + 1)]
            cands.append(self.u.tail_lower_bound(top))
            return min(cands)
        if isinstance(s, BlockReversalPerm):
            # every index past K stays in its own block, so its image is at
            # least the start of the block containing K+1
            start = s.block_start(K + 1)
            if start == 1:
                return self.u.tail_lower_bound(0)
            return self.u.tail_lower_bound(start - 1)
        raise CapacityExceeded(
            f"no certified tail bound for permutation kind {s.kind!r}"
        )


# ---------------------------------------------------------------------------
# operations


def eval(w: DivergingSeq, n: int) -> Fraction:  # noqa: A001 - contract name
    """Exact value of the rule at index n >= 1."""
    _check_eval_index(n)
    return w.value(n)


def product(w1: Weight, w2: Weight) -> Weight:
    """Pointwise product of two weights."""
    if isinstance(w1, SymbolicWeight) and isinstance(w2, SymbolicWeight):
        return SymbolicWeight(
            coeff=w1.coeff * w2.coeff,
            powers=_merge_factors(w1.powers + w2.powers),
            base=w1.base * w2.base,
            logs=_merge_factors(w1.logs + w2.logs),
        )
    return ProductWeight((w1, w2))


def shift(w: Weight, ell: int) -> Weight:
    """Weight n -> w(n + ell) for ell >= 0."""
    ell = int(ell)
    if ell < 0:
        raise ValueError("shift must be nonnegative")
    return w.shifted(ell)


def min_product(f1: Weight, f2: Weight, n: int) -> Fraction:
    """min over k in [1, n] of f1(k) * f2(n + 1 - k).

    As a function of n this is nondecreasing and unbounded.  When both
    weights certify log-concavity the minimum sits at an endpoint and is
    found in O(1); otherwise all n candidates are tried.
    """
    _check_eval_index(n)
    if f1.endpoint_min_certified and f2.endpoint_min_certified:
        return min(f1.value(1) * f2.value(n), f1.value(n) * f2.value(1))
    return min(f1.value(k) * f2.value(n + 1 - k) for k in range(1, n + 1))


def pushforward(sigma: Permutation, u: DivergingSeq) -> DivergingSeq:
    """Sequence n -> u(sigma(n))."""
    if isinstance(sigma, IdentityPerm):
        return u
    return PushforwardSeq(sigma, u)


def rearrange_prefix(u: DivergingSeq, m: int, scan_cap: int = DEFAULT_SCAN_CAP):
    """First m values of the monotone rearrangement of u, in sorted order.

    Scans u on [1, K] for growing K until at least m scanned values do not
    exceed tail_lower_bound(K); past that point no unseen value can enter
    the bottom m, so the sorted prefix is certified.  Equal values keep
    their multiplicity.  Raises ScanCapExceeded when no K up to scan_cap
    certifies.
    """
    if not isinstance(m, int) or m < 1:
        raise ValueError("prefix length must be a positive integer")
    if u.monotone:
        return [u.value(n) for n in range(1, m + 1)]
    if scan_cap < m:
        raise ScanCapExceeded(f"scan cap {scan_cap} is below the prefix length {m}")
    # tail_lower_bound is nondecreasing in K, so a value once certified
    # below the bound stays certified; split the scanned values into a
    # certified pile and a pending pile instead of recounting every round.
    small = []
    pending = []
    scanned = 0
    K = min(max(m, 64), scan_cap)
    while True:
        while scanned < K:
            scanned += 1
            pending.append(u.value(scanned))
        t = u.tail_lower_bound(K)
        keep = []
        for v in pending:
            if v <= t:
                small.append(v)
            else:
                keep.append(v)
        pending = keep
        if len(small) >= m:
            small.sort()
            return small[:m]
        if K >= scan_cap:
            raise ScanCapExceeded(
                f"rearrangement of {m} values not certified within scan cap "
                f"{scan_cap} (only {len(small)} values below the tail bound)"
            )
        K = min(K * 2, scan_cap)


@dataclass(frozen=True)
class EquivVerdict:
    """Outcome of an equivalence check between two weights.

    kind is "exact" (decided symbolically; see `equivalent`),
    "bounded_ratio" (mutual ratio bounded by c on the scanned window) or
    "divergence_witness" (index and ratio where the threshold was passed).
    """

    kind: str
    equivalent: bool = None
    c: Fraction = None
    window: int = None
    index: int = None
    ratio: Fraction = None

    @staticmethod
    def exact(equivalent: bool) -> "EquivVerdict":
        return EquivVerdict(kind="exact", equivalent=bool(equivalent))

    @staticmethod
    def bounded(c, window) -> "EquivVerdict":
        return EquivVerdict(kind="bounded_ratio", c=c, window=window)

    @staticmethod
    def witness(index, ratio) -> "EquivVerdict":
        return EquivVerdict(kind="divergence_witness", index=index, ratio=ratio)


def equiv_check(w1: Weight, w2: Weight, window: int, c_threshold) -> EquivVerdict:
    """Decide or probe whether two weights have bounded mutual ratio.

    Two symbolic weights are decided exactly from their growth signatures.
    Otherwise the ratio is scanned on [1, window]: the first index whose
    ratio strictly exceeds c_threshold is returned as a witness, and if
    none exists the largest observed ratio is returned as the bound.
    """
    if not isinstance(window, int) or window < 1:
        raise ValueError("window must be a positive integer")
    thr = _to_fraction(c_threshold)
    if thr < 1:
        raise ValueError("ratio threshold must be at least 1")
    if isinstance(w1, SymbolicWeight) and isinstance(w2, SymbolicWeight):
        return EquivVerdict.exact(w1.signature == w2.signature)
    worst = Fraction(1)
    for n in range(1, window + 1):
        a, b = w1.value(n), w2.value(n)
        r = max(a / b, b / a)
        if r > thr:
            return EquivVerdict.witness(n, r)
        if r > worst:
            worst = r
    return EquivVerdict.bounded(worst, window)


def inclusion_tail_norm(f: Weight, n: int):
    """Norm 1/sqrt(f(n+1)) of the inclusion minus its rank-n truncation.

    Exact Fraction when f(n+1) is a square of a rational, float otherwise.
    """
    if not isinstance(n, int) or n < 0:
        raise ValueError("truncation rank must be a nonnegative integer")
    v = f.value(n + 1)
    num, den = v.numerator, v.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rd, rn)
    try:
        x = num / den
    except OverflowError:
        x = math.inf
    if math.isfinite(x):
        return 1.0 / math.sqrt(x)
    return math.exp(-0.5 * (math.log(num) - math.log(den)))


def running_max_table(u: DivergingSeq, m: int, tail_rule="error") -> TableWeight:
    """Monotone upper envelope max(u(1..n)) for n <= m, as a table weight."""
    vals = []
    best = None
    for n in range(1, m + 1):
        v = u.value(n)
        best = v if best is None or v > best else best
        vals.append(best)
    return TableWeight(vals, tail_rule)


# ---------------------------------------------------------------------------
# JSON interchange


def weight_to_json(w: Weight) -> dict:
    """Interchange form; rationals are serialized as exact "p/q" strings."""
    if isinstance(w, SymbolicWeight):
        tag = w.family_tag
        if tag.startswith("power(") and "," not in tag:
            return {"family": "power", "alpha": str(w.powers[0][1])}
        if tag.startswith("exponential("):
            return {"family": "exp", "beta": str(w.base)}
        if tag.startswith("power_log("):
            a = w.powers[0][1] if w.powers else 0
            return {"family": "power_log", "alpha": str(a), "gamma": str(w.logs[0][1])}
        raise ValueError(f"no interchange form for composite weight {w!r}")
    if isinstance(w, TableWeight):
        return {
            "family": "table",
            "prefix": [str(v) for v in w.prefix_values],
            "tail_rule": w.tail_rule,
        }
    raise ValueError(f"no interchange form for {w!r}")


def _int_param(obj, key):
    raw = obj[key]
    frac = Fraction(str(raw))
    if frac.denominator != 1:
        raise ValueError(f"{key} must be an integer, got {raw!r}")
    return int(frac)


def weight_from_json(obj: dict) -> Weight:
    if not isinstance(obj, dict) or "family" not in obj:
        raise ValueError("weight spec must be an object with a 'family' key")
    fam = obj["family"]
    if fam == "power":
        return power(_int_param(obj, "alpha"))
    if fam == "exp":
        return exponential(Fraction(str(obj["beta"])))
    if fam == "power_log":
        return power_log(_int_param(obj, "alpha"), _int_param(obj, "gamma"))
    if fam == "table":
        return table(
            [Fraction(str(v)) for v in obj["prefix"]],
            obj.get("tail_rule", "linear"),
        )
    raise ValueError(f"unknown weight family {fam!r}")
