"""Finite truncations of nested scale structures as Gram-matrix pencils.

A pair of nested spaces truncates to two symmetric positive-definite Gram
matrices on a shared basis; its canonical weight is the nondecreasing
sequence of reciprocal eigenvalues of the pencil G_H v = lam G_W v.  The
pencil is reduced by an in-house triangular factorization and diagonalized
by cyclic Jacobi sweeps, so results do not depend on an external solver;
pairs built directly from weight rules additionally carry exact rational
diagonals and skip floating point entirely.

Tuples of nested spaces, their invariant tables over all index pairs,
product scales, splices, and the bijectivity grid for isomorphism
candidates live here as well.  This is the only module that uses 64-bit
floating point.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    CapacityExceeded,
    ConvergenceFailure,
    IndexOutOfRange,
    ModelMismatch,
    NotPositiveDefinite,
)
from .weightfn import (
    DEFAULT_SCAN_CAP,
    DivergingSeq,
    Weight,
    rearrange_prefix,
    seq_product,
)

__all__ = [
    "GramPairTrunc",
    "ScaleTupleTrunc",
    "InvariantTable",
    "MultReport",
    "IsoCandidate",
    "ClaimReport",
    "read_matrix",
    "make_gram_pair",
    "pair_gram",
    "generalized_eigh",
    "canonical_weight",
    "scale_isometry",
    "make_diagonal_tuple",
    "make_gram_tuple",
    "build_product_scale",
    "invariant_table",
    "check_multiplicativity",
    "splice_tuple",
    "make_iso_candidate",
    "anm_operator",
    "claim_check",
]

DEFAULT_MAX_SWEEPS = 60


def _to_float(v) -> float:
    try:
        return float(v)
    except OverflowError:
        raise CapacityExceeded("value exceeds the double-precision range")


def _csv_value(v) -> str:
    if isinstance(v, Fraction):
        try:
            return repr(v.numerator / v.denominator)
        except OverflowError:
            return "inf"
    return repr(float(v))


# ---------------------------------------------------------------------------
# matrix ingest


def _ingest_matrix(mat) -> np.ndarray:
    a = np.asarray(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def _symmetrized(a: np.ndarray, asym_tol: float, label: str) -> np.ndarray:
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a))))
    if asym > asym_tol * scale:
        warnings.warn(
            f"{label} deviates from symmetry by {asym:.3e}; symmetrizing",
            stacklevel=3,
        )
    return 0.5 * (a + a.T)


def read_matrix(path) -> np.ndarray:
    """Read a matrix from CSV (row-major decimals) or JSON {"n": N, "data": [[...]]}."""
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        obj = json.loads(text)
        if not isinstance(obj, dict) or "data" not in obj:
            raise ValueError("matrix JSON must be an object with a 'data' key")
        data = np.asarray(obj["data"], dtype=float)
        if data.ndim != 2:
            raise ValueError("matrix JSON 'data' must be a list of equal-length rows")
        if "n" in obj and int(obj["n"]) != data.shape[0]:
            raise ValueError("matrix JSON 'n' does not match the row count")
    else:
        rows = [
            [float(x) for x in line.split(",")]
            for line in text.strip().splitlines()
            if line.strip()
        ]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix CSV rows must be nonempty and of equal length")
        data = np.asarray(rows, dtype=float)
    return data


# ---------------------------------------------------------------------------
# the pencil solver


def _cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular factor of an SPD matrix, column by column."""
    n = a.shape[0]
    low = np.zeros_like(a)
    floor = float(np.max(np.diag(a))) * 1e-30
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if d <= 0.0 or d <= floor:
            raise NotPositiveDefinite(
                f"pivot {d:.3e} at index {j} (matrix is not positive definite "
                "to working precision)"
            )
        low[j, j] = np.sqrt(d)
        if j + 1 < n:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def _solve_lower(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    x = np.array(b, dtype=float, copy=True)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    for i in range(low.shape[0]):
        x[i] = (x[i] - low[i, :i] @ x[:i]) / low[i, i]
    return x[:, 0] if squeeze else x


def _solve_upper(up: np.ndarray, b: np.ndarray) -> np.ndarray:
    x = np.array(b, dtype=float, copy=True)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    n = up.shape[0]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - up[i, i + 1 :] @ x[i + 1 :]) / up[i, i]
    return x[:, 0] if squeeze else x


def _offdiag_norm(a: np.ndarray) -> float:
    # computed entrywise; the sum-of-squares difference form cancels badly
    # once the matrix is nearly diagonal
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _jacobi_eigh(c: np.ndarray, max_sweeps: int = DEFAULT_MAX_SWEEPS):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
    matrix by cyclic Jacobi rotations, to off-diagonal norm 1e-14 of the
    matrix norm."""
    a = np.array(c, dtype=float, copy=True)
    n = a.shape[0]
    vec = np.eye(n)
    fro = float(np.linalg.norm(a))
    tol = 1e-14 * fro
    if n == 1 or fro == 0.0:
        order = np.argsort(np.diag(a), kind="stable")
        return np.diag(a)[order], vec[:, order]
    skip = tol / (2.0 * n * n)
    for _ in range(max_sweeps):
        off = _offdiag_norm(a)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                cs = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * cs
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cs * cp - sn * cq
                a[:, q] = sn * cp + cs * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = cs * rp - sn * rq
                a[q, :] = sn * rp + cs * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = vec[:, p].copy(), vec[:, q].copy()
                vec[:, p] = cs * vp - sn * vq
                vec[:, q] = sn * vp + cs * vq
    else:
        off = _offdiag_norm(a)
        if off > tol:
            raise ConvergenceFailure(
                f"off-diagonal norm {off:.3e} still above {tol:.3e} "
                f"after {max_sweeps} sweeps"
            )
    eigs = np.diag(a).copy()
    order = np.argsort(eigs, kind="stable")
    return eigs[order], vec[:, order]


def generalized_eigh(
    gram_h: np.ndarray, gram_w: np.ndarray, max_sweeps: int = DEFAULT_MAX_SWEEPS
):
    """Solve the symmetric-definite pencil gram_h v = lam gram_w v.

    Returns eigenvalues ascending and eigenvectors as columns, normalized
    so that V^T gram_w V = I.  Every returned pair is residual-checked
    against 1e-10 of the spectral norm of gram_h.
    """
    gh = np.asarray(gram_h, dtype=float)
    gw = np.asarray(gram_w, dtype=float)
    low = _cholesky(gw)
    x = _solve_lower(low, gh)
    c = _solve_lower(low, x.T)
    c = 0.5 * (c + c.T)
    lam, y = _jacobi_eigh(c, max_sweeps)
    vec = _solve_upper(low.T, y)
    resid = gh @ vec - (gw @ vec) * lam[None, :]
    worst = float(np.max(np.sqrt(np.sum(resid * resid, axis=0))))
    thr = 1e-10 * float(np.linalg.norm(gh, 2))
    if worst > thr:
        raise ConvergenceFailure(
            f"eigenpair residual {worst:.3e} exceeds threshold {thr:.3e}"
        )
    return lam, vec


# ---------------------------------------------------------------------------
# scale pairs


class GramPairTrunc:
    """Two SPD Gram matrices on a shared truncated basis.

    gram_w belongs to the inner space, gram_h to the outer, in the same
    coordinates.  Pairs built from weight rules carry exact rational
    diagonals enabling the rational fast path.  A pair whose two inner
    products coincide at truncation is degenerate as a scale pair and is
    flagged (with a warning) rather than rejected.
    """

    def __init__(self, gram_h, gram_w, diag_h_exact=None, diag_w_exact=None):
        self.gram_h = np.asarray(gram_h, dtype=float)
        self.gram_w = np.asarray(gram_w, dtype=float)
        self.dim = int(self.gram_h.shape[0])
        self.diag_h_exact = diag_h_exact
        self.diag_w_exact = diag_w_exact
        self.degenerate = bool(
            np.allclose(self.gram_h, self.gram_w, rtol=1e-12, atol=1e-12)
        )
        if self.degenerate:
            warnings.warn(
                "the two inner products coincide at this truncation; "
                "the pair is degenerate as a scale pair",
                stacklevel=2,
            )

    def __repr__(self):
        return f"GramPairTrunc<dim={self.dim}, exact={self.diag_h_exact is not None}>"


def make_gram_pair(gram_h, gram_w, asym_tol: float = 1e-12) -> GramPairTrunc:
    """Validate and ingest a raw Gram pair: symmetrize (warning above
    asym_tol relative asymmetry) and require positive definiteness."""
    gh = _symmetrized(_ingest_matrix(gram_h), asym_tol, "gram_h")
    gw = _symmetrized(_ingest_matrix(gram_w), asym_tol, "gram_w")
    if gh.shape != gw.shape:
        raise ModelMismatch(f"Gram shapes differ: {gh.shape} vs {gw.shape}")
    _cholesky(gh)
    _cholesky(gw)
    return GramPairTrunc(gh, gw)


def pair_gram(f: Weight, n_dim: int) -> GramPairTrunc:
    """Model of the pair (full space, f-weighted space) on n_dim coordinates,
    in the inner space's orthonormal basis: gram_w identity, gram_h the
    diagonal of 1/f."""
    if not isinstance(n_dim, int) or n_dim < 1:
        raise ValueError("truncation dimension must be a positive integer")
    diag_h = tuple(Fraction(1) / f.value(k) for k in range(1, n_dim + 1))
    diag_w = tuple(Fraction(1) for _ in range(n_dim))
    gram_h = np.diag([_to_float(v) for v in diag_h])
    return GramPairTrunc(gram_h, np.eye(n_dim), diag_h, diag_w)


def canonical_weight(pair: GramPairTrunc, force_solver: bool = False):
    """Nondecreasing reciprocals of the pencil eigenvalues of the pair.

    Exact rational when the pair carries exact diagonals (unless
    force_solver), floating point via the pencil solver otherwise.
    """
    if (
        not force_solver
        and pair.diag_h_exact is not None
        and pair.diag_w_exact is not None
    ):
        return sorted(w / h for h, w in zip(pair.diag_h_exact, pair.diag_w_exact))
    lam, _ = generalized_eigh(pair.gram_h, pair.gram_w)
    if lam[0] <= 0.0:
        raise NotPositiveDefinite(
            f"pencil produced a nonpositive eigenvalue {lam[0]:.3e}"
        )
    return list((1.0 / lam)[::-1])


def scale_isometry(pair: GramPairTrunc, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> np.ndarray:
    """Coordinate change onto the canonical diagonal model of the pair.

    With lam the pencil eigenvalues in descending order and V the matching
    gram_w-orthonormal eigenvectors, phi = diag(sqrt(lam)) V^T gram_w
    satisfies phi^T phi = gram_h and phi^T diag(f) phi = gram_w, where f
    is the canonical weight.  Repeated eigenvalues make V, hence phi,
    non-unique; the solver's eigenbasis is used as is.
    """
    lam, vec = generalized_eigh(pair.gram_h, pair.gram_w, max_sweeps)
    if lam[0] <= 0.0:
        raise NotPositiveDefinite(
            f"pencil produced a nonpositive eigenvalue {lam[0]:.3e}"
        )
    lam_desc = lam[::-1]
    vec_desc = vec[:, ::-1]
    return np.sqrt(lam_desc)[:, None] * (vec_desc.T @ pair.gram_w)


# ---------------------------------------------------------------------------
# scale tuples and the invariant table


class ScaleTupleTrunc:
    """Nested family of inner products on one truncated basis.

    A diagonal model stores the successive density factors; the k-th Gram
    is the diagonal of the product of the first k factors (the 0th is the
    identity), all in the innermost coordinates.  A raw tuple stores the
    Gram matrices directly.
    """

    def __init__(self, dim: int, factors=None, grams=None):
        if (factors is None) == (grams is None):
            raise ModelMismatch("provide exactly one of factors or grams")
        if not isinstance(dim, int) or dim < 1:
            raise ValueError("truncation dimension must be a positive integer")
        self.dim = dim
        if factors is not None:
            factors = tuple(factors)
            if not factors:
                raise ModelMismatch("a diagonal model needs at least one factor")
            for fac in factors:
                if not isinstance(fac, DivergingSeq):
                    raise ModelMismatch(
                        "diagonal factors must be diverging sequences"
                    )
            self.factors = factors
            self.grams_raw = None
            self.n_spaces = len(factors) + 1
            self.diagonal = True
        else:
            gs = [np.asarray(g, dtype=float) for g in grams]
            if len(gs) < 2:
                raise ModelMismatch("a tuple needs at least two spaces")
            for g in gs:
                if g.shape != (dim, dim):
                    raise ModelMismatch(
                        f"all Grams must be {dim}x{dim}, got {g.shape}"
                    )
            self.factors = None
            self.grams_raw = gs
            self.n_spaces = len(gs)
            self.diagonal = False

    def factor_product(self, i: int, j: int) -> DivergingSeq:
        """Density of space j relative to space i (i < j), diagonal models only."""
        if not self.diagonal:
            raise ModelMismatch("factor products require a diagonal model")
        if not 0 <= i < j < self.n_spaces:
            raise IndexOutOfRange(f"need 0 <= i < j < {self.n_spaces}")
        return seq_product(*self.factors[i:j])

    def gram(self, k: int) -> np.ndarray:
        """Gram matrix of the k-th space in the innermost coordinates."""
        if not 0 <= k < self.n_spaces:
            raise IndexOutOfRange(f"space index {k} outside [0, {self.n_spaces})")
        if not self.diagonal:
            return self.grams_raw[k]
        if k == 0:
            return np.eye(self.dim)
        seq = seq_product(*self.factors[:k])
        return np.diag([_to_float(seq.value(v)) for v in range(1, self.dim + 1)])

    def __repr__(self):
        kind = "diagonal" if self.diagonal else "raw"
        return f"ScaleTupleTrunc<{kind}, n={self.n_spaces}, dim={self.dim}>"


def make_diagonal_tuple(factors, n_dim: int) -> ScaleTupleTrunc:
    return ScaleTupleTrunc(n_dim, factors=factors)


def make_gram_tuple(grams, asym_tol: float = 1e-12) -> ScaleTupleTrunc:
    mats = [_symmetrized(_ingest_matrix(g), asym_tol, f"gram_{k}") for k, g in enumerate(grams)]
    for m in mats:
        _cholesky(m)
    return ScaleTupleTrunc(mats[0].shape[0], grams=mats)


def build_product_scale(weights, n: int, n_dim: int) -> ScaleTupleTrunc:
    """Diagonal tuple whose k-th density is the product of the first k
    factor weights."""
    ws = list(weights)
    if not isinstance(n, int) or n < 2:
        raise ValueError("tuple length must be an integer >= 2")
    if len(ws) < n - 1:
        raise ValueError(f"need {n - 1} factor weights, got {len(ws)}")
    for w in ws[: n - 1]:
        if not isinstance(w, Weight):
            raise ModelMismatch("product-scale factors must be weights")
    return ScaleTupleTrunc(n_dim, factors=tuple(ws[: n - 1]))


@dataclass
class InvariantTable:
    """Canonical weight prefixes for every index pair i < j of a tuple."""

    dim: int
    n_spaces: int
    entries: dict

    def entry(self, i: int, j: int):
        if (i, j) not in self.entries:
            raise IndexOutOfRange(f"no entry for pair ({i}, {j})")
        return self.entries[(i, j)]

    def to_csv(self) -> str:
        lines = ["i,j,nu,value"]
        for (i, j) in sorted(self.entries):
            vals = self.entries[(i, j)]
            for nu, v in enumerate(vals, start=1):
                lines.append(f"{i},{j},{nu},{_csv_value(v)}")
        return "\n".join(lines) + "\n"


def invariant_table(
    tup: ScaleTupleTrunc,
    cross_check: bool = False,
    force_solver: bool = False,
    scan_cap: int = DEFAULT_SCAN_CAP,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> InvariantTable:
    """Canonical weights of all pairs (i, j), i < j, of the tuple.

    Diagonal models use the exact rearrangement fast path (optionally
    cross-checked against the pencil solver to 1e-9); raw tuples go
    through the solver pair by pair.
    """
    pairs = [
        (i, j) for i in range(tup.n_spaces) for j in range(i + 1, tup.n_spaces)
    ]
    entries = {}
    if tup.diagonal and not force_solver:
        for i, j in pairs:
            entries[(i, j)] = rearrange_prefix(
                tup.factor_product(i, j), tup.dim, scan_cap
            )
        if cross_check:
            for i, j in pairs:
                lam, _ = generalized_eigh(tup.gram(i), tup.gram(j), max_sweeps)
                numeric = (1.0 / lam)[::-1]
                for v_exact, v_num in zip(entries[(i, j)], numeric):
                    ref = _to_float(v_exact)
                    if abs(v_num - ref) > 1e-9 * max(1.0, abs(ref)):
                        raise ConvergenceFailure(
                            f"solver cross-check failed at pair ({i},{j}): "
                            f"{v_num!r} vs exact {ref!r}"
                        )
    else:
        for i, j in pairs:
            lam, _ = generalized_eigh(tup.gram(i), tup.gram(j), max_sweeps)
            if lam[0] <= 0.0:
                raise NotPositiveDefinite(
                    f"pair ({i},{j}) produced a nonpositive eigenvalue"
                )
            entries[(i, j)] = list((1.0 / lam)[::-1])
    return InvariantTable(dim=tup.dim, n_spaces=tup.n_spaces, entries=entries)


@dataclass
class MultReport:
    """Worst pointwise deviation of entry(i,j) from the product of the
    consecutive entries between i and j."""

    ok: bool
    worst_ratio: object
    worst_pair: tuple = None
    worst_nu: int = None

    def __bool__(self):
        return self.ok


def check_multiplicativity(table: InvariantTable, tolerance=1e-9) -> MultReport:
    """Compare entry(i,j) with the product of entries (k, k+1), i <= k < j.

    The identity is guaranteed only for diagonal product-scale models; for
    general tuples the report is a diagnostic.  Tuples of length <= 2 pass
    vacuously.
    """
    worst = Fraction(1)
    worst_pair = None
    worst_nu = None
    for (i, j) in sorted(table.entries):
        if j - i < 2:
            continue
        lhs_vals = table.entries[(i, j)]
        chain = [table.entries[(k, k + 1)] for k in range(i, j)]
        for nu in range(1, table.dim + 1):
            lhs = lhs_vals[nu - 1]
            rhs = chain[0][nu - 1]
            for col in chain[1:]:
                rhs = rhs * col[nu - 1]
            ratio = lhs / rhs if lhs >= rhs else rhs / lhs
            if ratio > worst:
                worst = ratio
                worst_pair = (i, j)
                worst_nu = nu
    return MultReport(
        ok=bool(worst <= 1 + tolerance),
        worst_ratio=worst,
        worst_pair=worst_pair,
        worst_nu=worst_nu,
    )


def splice_tuple(triple: ScaleTupleTrunc, tail: ScaleTupleTrunc) -> ScaleTupleTrunc:
    """Glue a diagonal triple to a diagonal tuple: spaces 0..2 keep the
    triple's densities, and each deeper density is the triple's innermost
    one multiplied by the tail's matching density."""
    if not (triple.diagonal and tail.diagonal):
        raise ModelMismatch("splice requires diagonal models on both sides")
    if triple.n_spaces != 3:
        raise ModelMismatch(f"first argument must be a triple, has {triple.n_spaces} spaces")
    if triple.dim != tail.dim:
        raise ModelMismatch(
            f"truncation dimensions differ: {triple.dim} vs {tail.dim}"
        )
    return ScaleTupleTrunc(triple.dim, factors=triple.factors + tail.factors)


# ---------------------------------------------------------------------------
# isomorphism candidates and the bijectivity grid


@dataclass
class IsoCandidate:
    """Invertible coordinate map between two pair models, with its claimed
    two-level operator-norm bound c."""

    dim: int
    phi: np.ndarray
    psi: np.ndarray
    c: Fraction


def make_iso_candidate(phi, psi=None, c=1, tol: float = 1e-8) -> IsoCandidate:
    mat = _ingest_matrix(phi)
    if psi is None:
        inv = np.linalg.inv(mat)
    else:
        inv = _ingest_matrix(psi)
        if inv.shape != mat.shape:
            raise ModelMismatch("phi and psi shapes differ")
    err = float(np.max(np.abs(inv @ mat - np.eye(mat.shape[0]))))
    if err > tol:
        raise ModelMismatch(f"psi fails to invert phi (max deviation {err:.3e})")
    cf = c if isinstance(c, Fraction) else Fraction(c)
    if cf <= 0:
        raise ValueError("norm bound c must be positive")
    return IsoCandidate(dim=mat.shape[0], phi=mat, psi=inv, c=cf)


def anm_operator(cand: IsoCandidate, n: int, m: int) -> np.ndarray:
    """Matrix of: pad to N, apply phi, keep the first m-1 coordinates,
    apply psi, keep the first n coordinates."""
    if not isinstance(n, int) or not isinstance(m, int) or n < 1 or m < 1:
        raise IndexOutOfRange("n and m must be positive integers")
    if n > cand.dim or m > cand.dim:
        raise IndexOutOfRange(
            f"(n={n}, m={m}) exceeds the truncation dimension {cand.dim}"
        )
    if m == 1:
        return np.zeros((n, n))
    return cand.psi[:n, : m - 1] @ cand.phi[: m - 1, :n]


@dataclass
class ClaimReport:
    """Grid summary: every cell satisfying the premise must give an
    invertible operator with n < m."""

    ok: bool
    grid: int
    premise_cells: int
    violations: list
    sv_tol: float

    def __bool__(self):
        return self.ok


def claim_check(
    f1: Weight, f2: Weight, cand: IsoCandidate, grid: int, sv_tol: float = 1e-8
) -> ClaimReport:
    """Test over all n, m <= grid: whenever c^4 * f1(n) < f2(m) (exact
    rational premise), the block operator must be invertible (smallest
    singular value above sv_tol) and n < m.  Violations falsify the
    candidate's claimed norm bound and are reported, not raised.
    """
    if not isinstance(grid, int) or grid < 1:
        raise ValueError("grid must be a positive integer")
    if grid > cand.dim:
        raise IndexOutOfRange(f"grid {grid} exceeds the truncation {cand.dim}")
    c4 = cand.c**4
    cells = 0
    violations = []
    f2_vals = [f2.value(m) for m in range(1, grid + 1)]
    for n in range(1, grid + 1):
        lhs = c4 * f1.value(n)
        for m in range(1, grid + 1):
            if lhs < f2_vals[m - 1]:
                cells += 1
                a = anm_operator(cand, n, m)
                smin = float(np.linalg.svd(a, compute_uv=False)[-1])
                if smin <= sv_tol:
                    violations.append((n, m, "singular", smin))
                elif n >= m:
                    violations.append((n, m, "order", smin))
    return ClaimReport(
        ok=not violations,
        grid=grid,
        premise_cells=cells,
        violations=violations,
        sv_tol=sv_tol,
    )
