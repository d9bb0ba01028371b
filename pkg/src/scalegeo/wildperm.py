"""Construction and certification of wild permutation families.

Starting from the singleton family {identity}, each new permutation is a
block reversal whose boundary stream comes from a three-quantity
recursion: b_l is the largest rearranged-product value at index l over
the current family, a_l is the least n at which the min-product of the
shifted weights reaches l*b_l, and the next boundary is a_l plus the
current one.  A block built this way forces the rearranged product of
the new permutation to exceed every previous one by an unbounded factor,
and divergence witnesses certify that pairwise at explicit indices.

Everything here is exact rational arithmetic; boundaries grow far past
64-bit range by modest depth, so caps on scan work are mandatory and
hitting one raises instead of silently truncating.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

from .errors import ScanCapExceeded, StateMismatch, WitnessNotFoundBelowCap
from .permutation import BlockReversalPerm, IdentityPerm, Permutation
from .weightfn import (
    DEFAULT_SCAN_CAP,
    Weight,
    min_product,
    pushforward,
    rearrange_prefix,
    seq_product,
    shift,
    weight_to_json,
)

__all__ = [
    "Caps",
    "DEFAULT_CAPS",
    "DEFAULT_DEPTH",
    "WildRecursionState",
    "WildGenerator",
    "Certificate",
    "Witness",
    "StepReport",
    "WildSet",
    "wp_prefix",
    "wp_value",
    "next_boundary",
    "build_sigma",
    "verify_step4",
    "verify_step5",
    "divergence_witness",
    "grow_wild_set",
]

DEFAULT_DEPTH = 5


@dataclass(frozen=True)
class Caps:
    """Work limits for unbounded searches.

    scan_cap bounds element-by-element work (linear scans, block merges,
    rearrangement certification); index_cap bounds the indices reachable
    by certified binary searches, whose work is logarithmic in the index.
    """

    scan_cap: int = DEFAULT_SCAN_CAP
    index_cap: int = 10**18


DEFAULT_CAPS = Caps()


def _check_rank(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"rank must be a positive integer, got {n!r}")


def _normalize_family(wild_so_far):
    if isinstance(wild_so_far, WildSet):
        return tuple(g.perm for g in wild_so_far.generators)
    if isinstance(wild_so_far, Permutation):
        return (wild_so_far,)
    return tuple(wild_so_far)


# ---------------------------------------------------------------------------
# rearranged product evaluation


def wp_prefix(sigma, f1: Weight, f2: Weight, m: int, scan_cap=DEFAULT_SCAN_CAP):
    """First m values, ascending, of the rearranged product f1 * (f2 o sigma)."""
    return rearrange_prefix(seq_product(f1, pushforward(sigma, f2)), m, scan_cap)


def _block_select(g1, g2, length, r):
    # products g1(i)*g2(length+1-i) rise and then fall across the block,
    # so ascending order is the two-way merge from the block's ends
    i, j = 1, length
    left = g1.value(1) * g2.value(length)
    right = g1.value(length) * g2.value(1)
    pick = left
    for _ in range(r):
        if left <= right:
            pick = left
            i += 1
            if i <= j:
                left = g1.value(i) * g2.value(length + 1 - i)
        else:
            pick = right
            j -= 1
            if j >= i:
                right = g1.value(j) * g2.value(length + 1 - j)
    return pick


def wp_value(sigma, f1: Weight, f2: Weight, n: int, scan_cap=DEFAULT_SCAN_CAP):
    """n-th value of the rearranged product f1 * (f2 o sigma).

    Fast path for block reversals: monotone factors keep each reversed
    block's products above every earlier block and below every later one,
    so the rank-n value lies in the block containing index n, where it is
    the (n - block start + 1)-th smallest blockwise product of the shifted
    weights.  Rank 1 within a block is the min-product of the shifts; for
    log-concave shifts deeper ranks come from a two-pointer merge; other
    weights fall back to materializing the block, and permutations without
    block structure fall back to sorting a certified prefix.
    """
    _check_rank(n)
    if isinstance(sigma, IdentityPerm):
        return f1.value(n) * f2.value(n)
    if isinstance(sigma, BlockReversalPerm):
        lo, hi = sigma.block_of(n)
        length = hi - lo
        r = n - lo + 1
        g1, g2 = shift(f1, lo - 1), shift(f2, lo - 1)
        if r == 1:
            return min_product(g1, g2, length)
        if g1.endpoint_min_certified and g2.endpoint_min_certified:
            if r > scan_cap:
                raise ScanCapExceeded(
                    f"rank {r} within block [{lo},{hi}) exceeds scan cap {scan_cap}"
                )
            return _block_select(g1, g2, length, r)
        if length <= scan_cap:
            vals = heapq.nsmallest(
                r, (g1.value(i) * g2.value(length + 1 - i) for i in range(1, length + 1))
            )
            return vals[-1]
        raise ScanCapExceeded(
            f"block [{lo},{hi}) of length {length} exceeds scan cap {scan_cap}"
        )
    return rearrange_prefix(seq_product(f1, pushforward(sigma, f2)), n, scan_cap)[n - 1]


# ---------------------------------------------------------------------------
# the boundary recursion


class WildRecursionState:
    """Mutable record of one boundary-stream construction.

    ell is the boundary list itself (shared with the permutation under
    construction, which extends it lazily through next_boundary); a and b
    record the recursion quantities at each boundary they were computed
    for; rearranged-product values of the existing family are memoized
    per generator.
    """

    def __init__(self, f1: Weight, f2: Weight, wild_so_far, caps: Caps = None):
        gens = _normalize_family(wild_so_far)
        if not gens:
            raise ValueError("the existing family must be nonempty (seed with the identity)")
        self.f1 = f1
        self.f2 = f2
        self.wild_so_far = gens
        self.caps = caps or DEFAULT_CAPS
        self.ell = [1]
        self.a = {}
        self.b = {}
        self._wp_cache = {}

    def wp_at(self, gen_index: int, n: int) -> Fraction:
        key = (gen_index, n)
        if key not in self._wp_cache:
            self._wp_cache[key] = wp_value(
                self.wild_so_far[gen_index], self.f1, self.f2, n, self.caps.scan_cap
            )
        return self._wp_cache[key]

    def get_b(self, ell: int) -> Fraction:
        """Largest rearranged-product value at ell over the existing family."""
        if ell not in self.b:
            self.b[ell] = max(self.wp_at(g, ell) for g in range(len(self.wild_so_far)))
        return self.b[ell]


def _least_reaching(g1, g2, target, index_cap):
    # least n with min(g1(1)g2(n), g1(n)g2(1)) >= target, by doubling
    # bracket plus binary search; valid because that min is nondecreasing
    c1, c2 = g1.value(1), g2.value(1)

    def g(n):
        return min(c1 * g2.value(n), g1.value(n) * c2)

    if g(1) >= target:
        return 1
    lo, hi = 1, 2
    while g(hi) < target:
        if hi >= index_cap:
            raise ScanCapExceeded(
                f"min-product stayed below {target} up to index cap {index_cap}"
            )
        lo, hi = hi, min(hi * 2, index_cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def next_boundary(state: WildRecursionState) -> int:
    """Append and return the next boundary of the recursion.

    From the last boundary l: the target is l * b_l, and the increment a_l
    is the least n at which the min-product of the weights shifted by l-1
    reaches the target.  The search is a forward scan capped by scan_cap;
    when both shifted weights certify endpoint minima the min-product is
    O(1) to evaluate and monotone, so a binary search capped by index_cap
    is used instead.
    """
    ell = state.ell[-1]
    b = state.get_b(ell)
    target = ell * b
    g1 = shift(state.f1, ell - 1)
    g2 = shift(state.f2, ell - 1)
    if g1.endpoint_min_certified and g2.endpoint_min_certified:
        a = _least_reaching(g1, g2, target, state.caps.index_cap)
    else:
        a = None
        for n in range(1, state.caps.scan_cap + 1):
            if min_product(g1, g2, n) >= target:
                a = n
                break
        if a is None:
            raise ScanCapExceeded(
                f"min-product stayed below {target} within scan cap {state.caps.scan_cap}"
            )
    state.a[ell] = a
    nxt = ell + a
    state.ell.append(nxt)
    return nxt


def build_sigma(
    f1: Weight, f2: Weight, wild_so_far, depth: int = DEFAULT_DEPTH, caps: Caps = None
) -> BlockReversalPerm:
    """Block reversal over the recursion's boundary stream.

    Generates depth boundaries beyond the initial 1 and stays lazily
    extendable afterwards; the construction state is attached as the
    permutation's `recursion` attribute.
    """
    if not isinstance(depth, int) or depth < 1:
        raise ValueError("depth must be a positive integer")
    state = WildRecursionState(f1, f2, wild_so_far, caps)
    perm = BlockReversalPerm(state.ell, extender=lambda: next_boundary(state), _shared=True)
    perm.recursion = state
    for _ in range(depth):
        next_boundary(state)
    return perm


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class StepReport:
    """Outcome of one inequality check, with the violating index if any."""

    ok: bool
    nu: int
    ell: int
    bound: Fraction
    witness_k: int = None
    value: Fraction = None

    def __bool__(self):
        return self.ok


def _resolve_state(sigma, state) -> WildRecursionState:
    st = state if state is not None else getattr(sigma, "recursion", None)
    if st is None:
        raise StateMismatch(
            "permutation carries no construction record; pass the recursion state explicitly"
        )
    return st


def _boundary_at(sigma, nu: int) -> int:
    bounds = getattr(sigma, "boundaries", None)
    if bounds is None:
        raise StateMismatch("only block reversals carry a boundary stream")
    if not isinstance(nu, int) or nu < 1 or nu > len(bounds):
        raise StateMismatch(
            f"boundary {nu} was never generated (stream has {len(bounds)})"
        )
    return bounds[nu - 1]


def verify_step4(
    sigma, f1: Weight, f2: Weight, nu: int, k_max: int, state: WildRecursionState = None
) -> StepReport:
    """Check f1(k) * f2(sigma(k)) >= l_nu * b_{l_nu} for all k in [l_nu, k_max].

    b comes from the recursion state (the permutation's own unless passed
    explicitly).  Returns a falsy report carrying the first violating k
    when the inequality fails.
    """
    st = _resolve_state(sigma, state)
    ell = _boundary_at(sigma, nu)
    if k_max < ell:
        raise ValueError(f"k_max must be at least the boundary {ell}")
    bound = ell * st.get_b(ell)
    for k in range(ell, k_max + 1):
        val = f1.value(k) * f2.value(sigma.apply(k))
        if val < bound:
            return StepReport(
                ok=False, nu=nu, ell=ell, bound=bound, witness_k=k, value=val
            )
    return StepReport(ok=True, nu=nu, ell=ell, bound=bound)


def verify_step5(
    sigma, f1: Weight, f2: Weight, nu: int, state: WildRecursionState = None
) -> StepReport:
    """Check that the rearranged product at l_nu reaches l_nu * b_{l_nu}."""
    st = _resolve_state(sigma, state)
    ell = _boundary_at(sigma, nu)
    bound = ell * st.get_b(ell)
    val = wp_value(sigma, f1, f2, ell, st.caps.scan_cap)
    ok = val >= bound
    return StepReport(
        ok=ok, nu=nu, ell=ell, bound=bound, witness_k=None if ok else ell, value=val
    )


# ---------------------------------------------------------------------------
# wildness certificates


@dataclass(frozen=True)
class Witness:
    """Index where two rearranged products differ by more than the threshold."""

    index: int
    ratio: Fraction


def divergence_witness(
    sigma,
    sigma_prime,
    f1: Weight,
    f2: Weight,
    c,
    cap: int = DEFAULT_SCAN_CAP,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> Witness:
    """Least index n <= cap where the rearranged products of two distinct
    permutations have mutual ratio strictly above c.

    Raises WitnessNotFoundBelowCap (carrying the best ratio seen) when no
    index up to cap qualifies.
    """
    if sigma is sigma_prime or sigma == sigma_prime:
        raise ValueError("divergence requires two distinct permutations")
    thr = Fraction(c)
    if thr < 1:
        raise ValueError("ratio threshold must be at least 1")
    best_idx, best_ratio = None, Fraction(0)
    start = 1
    m = min(32, cap)
    while True:
        p1 = wp_prefix(sigma, f1, f2, m, scan_cap)
        p2 = wp_prefix(sigma_prime, f1, f2, m, scan_cap)
        for n in range(start, m + 1):
            a, b = p1[n - 1], p2[n - 1]
            r = a / b if a >= b else b / a
            if r > thr:
                return Witness(index=n, ratio=r)
            if r > best_ratio:
                best_idx, best_ratio = n, r
        if m >= cap:
            raise WitnessNotFoundBelowCap(
                f"no ratio above {thr} at indices up to {cap}; "
                f"best was {best_ratio} at {best_idx}",
                best_index=best_idx,
                best_ratio=best_ratio,
            )
        start = m + 1
        m = min(m * 2, cap)


@dataclass(frozen=True)
class Certificate:
    """Divergence witness for the generator pair (i, j)."""

    i: int
    j: int
    index: int
    ratio: Fraction


@dataclass(frozen=True)
class WildGenerator:
    perm: Permutation
    boundaries: tuple
    depth: int


@dataclass
class WildSet:
    """Permutation family with pairwise divergence certificates."""

    f1: Weight
    f2: Weight
    generators: list
    certificates: list

    @property
    def perms(self):
        return [g.perm for g in self.generators]

    def to_json(self) -> dict:
        def wjson(w):
            try:
                return weight_to_json(w)
            except ValueError:
                return {"family": "opaque", "tag": w.family_tag}

        return {
            "f1": wjson(self.f1),
            "f2": wjson(self.f2),
            "generators": [
                {
                    "index": k,
                    "kind": g.perm.kind,
                    "boundaries": [str(b) for b in g.boundaries],
                    "depth": g.depth,
                }
                for k, g in enumerate(self.generators)
            ],
            "certificates": [
                {
                    "i": c.i,
                    "j": c.j,
                    "index": c.index,
                    "ratio_num": str(c.ratio.numerator),
                    "ratio_den": str(c.ratio.denominator),
                }
                for c in self.certificates
            ],
        }

    def growth_csv(self, m: int, scan_cap: int = DEFAULT_SCAN_CAP) -> str:
        """Plot-ready table: column n, then one rearranged-product column
        per generator, values as decimal floats."""
        cols = [wp_prefix(g.perm, self.f1, self.f2, m, scan_cap) for g in self.generators]
        lines = ["n," + ",".join(f"wp_{k}" for k in range(len(cols)))]
        for n in range(1, m + 1):
            row = [str(n)] + [_csv_float(col[n - 1]) for col in cols]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _csv_float(v: Fraction) -> str:
    try:
        return repr(v.numerator / v.denominator)
    except OverflowError:
        return "inf"


def grow_wild_set(
    f1: Weight,
    f2: Weight,
    target_size: int,
    depth: int = DEFAULT_DEPTH,
    caps: Caps = None,
    threshold=10,
) -> WildSet:
    """Grow a family of pairwise-diverging permutations to target_size.

    Seeds with the identity; each new generator is built over the current
    family; every unordered pair then gets a divergence certificate at
    the given ratio threshold, searched up to the scan cap.
    """
    if not isinstance(target_size, int) or target_size < 1:
        raise ValueError("target size must be a positive integer")
    caps = caps or DEFAULT_CAPS
    gens = [WildGenerator(perm=IdentityPerm(), boundaries=(), depth=0)]
    while len(gens) < target_size:
        sigma = build_sigma(f1, f2, [g.perm for g in gens], depth, caps)
        gens.append(WildGenerator(perm=sigma, boundaries=sigma.boundaries, depth=depth))
    certs = []
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            w = divergence_witness(
                gens[i].perm,
                gens[j].perm,
                f1,
                f2,
                threshold,
                cap=caps.scan_cap,
                scan_cap=caps.scan_cap,
            )
            certs.append(Certificate(i=i, j=j, index=w.index, ratio=w.ratio))
    return WildSet(f1=f1, f2=f2, generators=gens, certificates=certs)
