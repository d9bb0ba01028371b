"""Bijections of the positive integers with block-reversal structure.

Three kinds are supported: the identity, finitely supported permutations,
and block reversals built from a strictly increasing boundary stream
1 = l_1 < l_2 < ... where each block [l_v, l_{v+1}) is mapped onto itself
by k -> l_v + l_{v+1} - k - 1.  Boundary streams may be extended lazily by
a caller-supplied extender, so a block reversal can cover every positive
integer even though only finitely many boundaries exist at any moment.

Composition convention: compose(s, t) applies t first, then s, i.e.
compose(s, t).apply(n) == s.apply(t.apply(n)).
"""

from __future__ import annotations

import threading
from bisect import bisect_right

import numpy as np

from .errors import BlockOverflow, CapacityExceeded, InvalidBoundaries

__all__ = [
    "Permutation",
    "identity",
    "finite_support",
    "block_reversal",
    "apply",
    "invert",
    "compose",
    "jsigma_matrix",
]


class Permutation:
    """Abstract bijection of the positive integers."""

    kind = "abstract"

    def apply(self, k: int) -> int:
        raise NotImplementedError

    def invert(self) -> "Permutation":
        raise NotImplementedError


class IdentityPerm(Permutation):
    kind = "identity"

    def apply(self, k):
        _check_index(k)
        return k

    def invert(self):
        return self

    def __eq__(self, other):
        return isinstance(other, IdentityPerm)

    def __hash__(self):
        return hash("identity")

    def __repr__(self):
        return "identity()"


class FiniteSupportPerm(Permutation):
    """Permutation moving only finitely many points."""

    kind = "finite_support"

    def __init__(self, mapping: dict):
        moved = {int(k): int(v) for k, v in mapping.items() if int(k) != int(v)}
        for k, v in moved.items():
            if k < 1 or v < 1:
                raise InvalidBoundaries("finite support entries must be positive")
        if set(moved.keys()) != set(moved.values()):
            raise InvalidBoundaries("finite support mapping is not a bijection")
        self.mapping = moved
        self.max_support = max(moved) if moved else 0

    def apply(self, k):
        _check_index(k)
        return self.mapping.get(k, k)

    def invert(self):
        return FiniteSupportPerm({v: k for k, v in self.mapping.items()})

    def __eq__(self, other):
        if isinstance(other, IdentityPerm):
            return not self.mapping
        return isinstance(other, FiniteSupportPerm) and self.mapping == other.mapping

    def __hash__(self):
        return hash(frozenset(self.mapping.items()))

    def __repr__(self):
        return f"finite_support({self.mapping!r})"


class BlockReversalPerm(Permutation):
    """Block reversal over a lazily extendable boundary stream.

    The boundary list may be shared with the producer of the stream (the
    extender appends to it); extension is serialized by a lock and is
    append-only, so concurrent readers always see a consistent prefix.
    """

    kind = "block_reversal"

    def __init__(self, boundaries, extender=None, _shared=False):
        bounds = boundaries if _shared else [int(b) for b in boundaries]
        if not bounds or bounds[0] != 1:
            raise InvalidBoundaries("boundary stream must start at 1")
        for a, b in zip(bounds, bounds[1:]):
            if b <= a:
                raise InvalidBoundaries("boundaries must be strictly increasing")
        self._bounds = bounds
        self._extender = extender
        self._lock = threading.Lock()
        self.recursion = None  # construction state, attached by the builder

    @property
    def boundaries(self):
        """Snapshot of the boundaries generated so far."""
        return tuple(self._bounds)

    def _cover(self, k: int):
        """Extend the stream until the last boundary exceeds k."""
        while self._bounds[-1] <= k:
            if self._extender is None:
                raise CapacityExceeded(
                    f"index {k} is beyond the last generated boundary "
                    f"{self._bounds[-1]} and no extender is attached"
                )
            with self._lock:
                if self._bounds[-1] > k:
                    continue
                before = len(self._bounds)
                self._extender()
                if len(self._bounds) <= before:
                    raise CapacityExceeded("extender failed to produce a boundary")

    def apply(self, k):
        _check_index(k)
        self._cover(k)
        v = bisect_right(self._bounds, k) - 1
        lo, hi = self._bounds[v], self._bounds[v + 1]
        return lo + hi - k - 1

    def block_start(self, k: int) -> int:
        """First index of the block containing k."""
        _check_index(k)
        self._cover(k)
        return self._bounds[bisect_right(self._bounds, k) - 1]

    def block_of(self, k: int):
        """Boundary pair (lo, hi) of the block [lo, hi) containing k."""
        _check_index(k)
        self._cover(k)
        v = bisect_right(self._bounds, k) - 1
        return self._bounds[v], self._bounds[v + 1]

    def invert(self):
        # each block is reversed in place, so the map is an involution
        return self

    def __repr__(self):
        head = ",".join(str(b) for b in self._bounds[:6])
        more = ",..." if self._extender is not None or len(self._bounds) > 6 else ""
        return f"block_reversal([{head}{more}])"


class ComposedPerm(Permutation):
    kind = "composed"

    def __init__(self, outer: Permutation, inner: Permutation):
        self.outer = outer
        self.inner = inner

    def apply(self, k):
        return self.outer.apply(self.inner.apply(k))

    def invert(self):
        return ComposedPerm(self.inner.invert(), self.outer.invert())

    def __repr__(self):
        return f"compose({self.outer!r}, {self.inner!r})"


def _check_index(k):
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"permutation index must be a positive integer, got {k!r}")


def identity() -> Permutation:
    return IdentityPerm()


def finite_support(mapping: dict) -> Permutation:
    return FiniteSupportPerm(mapping)


def block_reversal(boundaries, extender=None) -> BlockReversalPerm:
    """Block reversal over the given boundaries, lazily extendable."""
    return BlockReversalPerm(list(boundaries), extender=extender)


def apply(sigma: Permutation, k: int) -> int:
    return sigma.apply(k)


def invert(sigma: Permutation) -> Permutation:
    return sigma.invert()


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """Permutation n -> sigma(tau(n))."""
    if isinstance(sigma, IdentityPerm):
        return tau
    if isinstance(tau, IdentityPerm):
        return sigma
    if isinstance(sigma, FiniteSupportPerm) and isinstance(tau, FiniteSupportPerm):
        support = set(sigma.mapping) | set(tau.mapping)
        return FiniteSupportPerm({k: sigma.apply(tau.apply(k)) for k in support})
    return ComposedPerm(sigma, tau)


def jsigma_matrix(sigma: Permutation, n_dim: int) -> np.ndarray:
    """Matrix sending the k-th standard basis vector to the sigma(k)-th.

    Entry 1 sits at row sigma(k), column k (1-based).  Raises BlockOverflow
    when sigma does not map [1, n_dim] into itself, e.g. when a reversal
    block straddles the truncation.
    """
    if n_dim < 1:
        raise ValueError("matrix size must be positive")
    mat = np.zeros((n_dim, n_dim))
    for k in range(1, n_dim + 1):
        img = sigma.apply(k)
        if img > n_dim:
            raise BlockOverflow(
                f"index {k} maps to {img}, outside the truncation range {n_dim}"
            )
        mat[img - 1, k - 1] = 1.0
    return mat
