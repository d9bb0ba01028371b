"""Tests for the wild permutation recursion and its certificates."""

from fractions import Fraction

import pytest

from scalegeo.errors import ScanCapExceeded, StateMismatch, WitnessNotFoundBelowCap
from scalegeo.permutation import block_reversal, finite_support, identity
from scalegeo.weightfn import eval as weval
from scalegeo.weightfn import power, power_log
from scalegeo.wildperm import (
    Caps,
    WildRecursionState,
    build_sigma,
    divergence_witness,
    grow_wild_set,
    next_boundary,
    verify_step4,
    verify_step5,
    wp_prefix,
    wp_value,
)

F1 = power(1)
F2 = power(1)

# sorted rearranged products of the first construction over {identity},
# cross-checked below against a full materialized sort
WP_FIRST_26 = [
    1, 8, 8, 9, 125, 125, 144, 144, 161, 161, 176, 176, 189, 189,
    200, 200, 209, 209, 216, 216, 221, 221, 224, 224, 225, 17576,
]


def _naive_blocks(bounds, f1, f2):
    """Products f1(k) * f2(sigma(k)) per reversal block, by the formula."""
    return [
        [weval(f1, k) * weval(f2, lo + hi - k - 1) for k in range(lo, hi)]
        for lo, hi in zip(bounds, bounds[1:])
    ]


def _naive_rank(bounds, f1, f2, n):
    """Rank-n rearranged product by fully sorting the covered range.

    bounds None means the identity (products are pointwise).  Indices past
    the last boundary L satisfy f1(k) * f2(sigma(k)) >= f1(L) * f2(L) since
    sigma keeps k inside its own block, so the sort is certified as long as
    the reported value stays below that floor.
    """
    if bounds is None:
        return weval(f1, n) * weval(f2, n)
    cover = [v for blk in _naive_blocks(bounds, f1, f2) for v in blk]
    cover.sort()
    assert n <= len(cover), "oracle horizon too small"
    out = cover[n - 1]
    L = bounds[-1]
    assert out < weval(f1, L) * weval(f2, L), "oracle certification failed"
    return out


def _naive_min_product(f1, f2, n, ell):
    """Brute min over k of the shifted split products."""
    return min(
        weval(f1, k + ell - 1) * weval(f2, n - k + ell) for k in range(1, n + 1)
    )


def _naive_boundaries(f1, f2, family_bounds, depth):
    """Recompute the boundary recursion with linear scans only."""
    ell = [1]
    for _ in range(depth):
        l = ell[-1]
        b = max(_naive_rank(bs, f1, f2, l) for bs in family_bounds)
        target = l * b
        n = 0
        while True:
            n += 1
            if _naive_min_product(f1, f2, n, l) >= target:
                break
        ell.append(l + n)
    return ell


class TestWpPrefix:
    def test_identity_is_pointwise_product(self):
        assert wp_prefix(identity(), power(1), power(2), 5) == [1, 8, 27, 64, 125]

    def test_first_construction_prefix(self):
        sigma = build_sigma(F1, F2, [identity()], depth=4)
        assert wp_prefix(sigma, F1, F2, 26) == WP_FIRST_26

    def test_matches_materialized_sort(self):
        sigma = build_sigma(F1, F2, [identity()], depth=4)
        cover = [v for blk in _naive_blocks(sigma.boundaries, F1, F2) for v in blk]
        cover.sort()
        m = 100
        assert wp_prefix(sigma, F1, F2, m) == cover[:m]


class TestBlockwiseDomination:
    def test_blocks_dominate_previous_blocks(self):
        """Every product in a block exceeds every product in earlier blocks."""
        sigma = build_sigma(F1, F2, [identity()], depth=4)
        blocks = _naive_blocks(sigma.boundaries, F1, F2)
        for left, right in zip(blocks, blocks[1:]):
            assert max(left) <= min(right)

    def test_holds_for_mixed_weights(self):
        f2 = power_log(1, 1)
        sigma = build_sigma(F1, f2, [identity()], depth=3)
        blocks = _naive_blocks(sigma.boundaries, F1, f2)
        for left, right in zip(blocks, blocks[1:]):
            assert max(left) <= min(right)


class TestWpValue:
    def test_identity(self):
        assert wp_value(identity(), power(2), power(1), 7) == 343

    def test_rank_validation(self):
        with pytest.raises(ValueError):
            wp_value(identity(), F1, F2, 0)

    def test_matches_global_sort(self):
        sigma = build_sigma(F1, F2, [identity()], depth=5)
        cover = [
            v
            for blk in _naive_blocks(sigma.boundaries[:5], F1, F2)
            for v in blk
        ]
        cover.sort()
        for n in list(range(1, 60)) + [350, 675, 676]:
            assert wp_value(sigma, F1, F2, n) == cover[n - 1]

    def test_uncertified_weights_materialize_block(self):
        f2 = power_log(1, 1)
        sigma = build_sigma(F1, f2, [identity()], depth=3)
        cover = [v for blk in _naive_blocks(sigma.boundaries, F1, f2) for v in blk]
        cover.sort()
        for n in (1, 2, 5, 9, 20):
            assert wp_value(sigma, F1, f2, n) == cover[n - 1]

    def test_generic_permutation_falls_back_to_prefix(self):
        sigma = finite_support({1: 4, 4: 1})
        vals = sorted(
            weval(F1, k) * weval(F2, sigma.apply(k)) for k in range(1, 40)
        )
        for n in (1, 2, 3, 6):
            assert wp_value(sigma, F1, F2, n) == vals[n - 1]

    def test_deep_rank_needs_scan_budget(self):
        sigma = build_sigma(F1, F2, [identity()], depth=5)
        with pytest.raises(ScanCapExceeded):
            wp_value(sigma, F1, F2, 500, scan_cap=100)


class TestBoundaryRecursion:
    def test_first_generation_matches_naive(self):
        """The packaged recursion over {identity} equals a brute recompute."""
        sigma = build_sigma(F1, F2, [identity()], depth=4)
        assert list(sigma.boundaries) == _naive_boundaries(F1, F2, [None], 4)
        assert sigma.boundaries == (1, 2, 5, 26, 677)

    def test_recursion_quantities(self):
        sigma = build_sigma(F1, F2, [identity()], depth=5)
        state = sigma.recursion
        assert state.a == {1: 1, 2: 3, 5: 21, 26: 651, 677: 457653}
        assert state.b == {1: 1, 2: 4, 5: 25, 26: 676, 677: 458329}
        assert sigma.boundaries == (1, 2, 5, 26, 677, 458330)

    def test_increment_is_least_reaching(self):
        """a sits exactly where the min-product first reaches the target."""
        sigma = build_sigma(F1, F2, [identity()], depth=5)
        state = sigma.recursion
        for ell, a in list(state.a.items())[:4]:
            target = ell * state.b[ell]
            assert _naive_min_product(F1, F2, a, ell) >= target
            if a > 1:
                assert _naive_min_product(F1, F2, a - 1, ell) < target

    def test_second_generation_matches_naive(self):
        first = build_sigma(F1, F2, [identity()], depth=3)
        second = build_sigma(F1, F2, [identity(), first], depth=3)
        naive = _naive_boundaries(F1, F2, [None, list(first.boundaries)], 3)
        assert list(second.boundaries) == naive == [1, 2, 9, 162]

    def test_lazy_extension_reaches_huge_boundaries(self):
        """Applying past the generated stream extends it by binary search."""
        sigma = build_sigma(F1, F2, [identity()], depth=5)
        assert sigma.apply(458330) == 458330**2
        assert sigma.boundaries == (1, 2, 5, 26, 677, 458330, 458330**2 + 1)

    def test_next_boundary_steps_the_state(self):
        state = WildRecursionState(F1, F2, [identity()])
        assert [next_boundary(state) for _ in range(4)] == [2, 5, 26, 677]

    def test_uncertified_weights_scan_linearly(self):
        f2 = power_log(1, 1)
        sigma = build_sigma(F1, f2, [identity()], depth=2)
        state = sigma.recursion
        for ell, a in state.a.items():
            target = ell * state.b[ell]
            assert _naive_min_product(F1, f2, a, ell) >= target
            if a > 1:
                assert _naive_min_product(F1, f2, a - 1, ell) < target

    def test_caps_are_enforced(self):
        with pytest.raises(ScanCapExceeded):
            build_sigma(F1, F2, [identity()], depth=4, caps=Caps(index_cap=100))
        with pytest.raises(ScanCapExceeded):
            build_sigma(F1, power_log(1, 1), [identity()], depth=2, caps=Caps(scan_cap=2))

    def test_validation(self):
        with pytest.raises(ValueError):
            build_sigma(F1, F2, [identity()], depth=0)
        with pytest.raises(ValueError):
            WildRecursionState(F1, F2, [])


class TestVerifySteps:
    def setup_method(self):
        self.sigma = build_sigma(F1, F2, [identity()], depth=4)

    def test_step4_holds_on_the_first_construction(self):
        rep = verify_step4(self.sigma, F1, F2, nu=4, k_max=2000)
        assert rep
        assert rep.ell == 26 and rep.bound == 26 * 676
        # same inequality, checked directly
        for k in range(26, 2001):
            assert k * self.sigma.apply(k) >= 17576

    def test_step5_holds_at_every_boundary(self):
        for nu in range(1, 6):
            rep = verify_step5(self.sigma, F1, F2, nu)
            assert rep
            assert rep.value >= rep.bound

    def test_step5_value_is_exactly_the_target(self):
        """The increment is least-reaching, so step 5 is tight here."""
        rep = verify_step5(self.sigma, F1, F2, 4)
        assert rep.value == rep.bound == 17576

    def test_mismatched_state_fails_honestly(self):
        """A bound from a later family is too strong for the first one."""
        second = build_sigma(F1, F2, [identity(), self.sigma], depth=3)
        rep = verify_step4(self.sigma, F1, F2, nu=3, k_max=30, state=second.recursion)
        assert not rep
        assert rep.witness_k == 5 and rep.value == 125 and rep.bound == 625

    def test_state_and_boundary_errors(self):
        bare = block_reversal([1, 2, 5])
        with pytest.raises(StateMismatch):
            verify_step4(bare, F1, F2, nu=1, k_max=10)
        with pytest.raises(StateMismatch):
            verify_step4(self.sigma, F1, F2, nu=9, k_max=10)
        with pytest.raises(StateMismatch):
            verify_step5(identity(), F1, F2, nu=1, state=self.sigma.recursion)
        with pytest.raises(ValueError):
            verify_step4(self.sigma, F1, F2, nu=4, k_max=10)


class TestDivergenceWitness:
    def setup_method(self):
        self.sigma = build_sigma(F1, F2, [identity()], depth=4)

    def test_first_witness_against_identity(self):
        w = divergence_witness(identity(), self.sigma, F1, F2, c=10)
        assert w.index == 26 and w.ratio == 26

    def test_symmetric_in_the_ratio(self):
        w = divergence_witness(self.sigma, identity(), F1, F2, c=10)
        assert w.index == 26 and w.ratio == 26

    def test_cap_failure_reports_best_seen(self):
        with pytest.raises(WitnessNotFoundBelowCap) as err:
            divergence_witness(identity(), self.sigma, F1, F2, c=10, cap=20)
        assert err.value.best_ratio == 5 and err.value.best_index == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            divergence_witness(self.sigma, self.sigma, F1, F2, c=10)
        with pytest.raises(ValueError):
            divergence_witness(identity(), identity(), F1, F2, c=10)
        with pytest.raises(ValueError):
            divergence_witness(identity(), self.sigma, F1, F2, c=Fraction(1, 2))


class TestGrowWildSet:
    def test_three_generators_with_certificates(self):
        ws = grow_wild_set(F1, F2, target_size=3, depth=3, threshold=10)
        bounds = [g.boundaries for g in ws.generators]
        assert bounds == [(), (1, 2, 5, 26), (1, 2, 9, 162)]
        got = {(c.i, c.j): (c.index, c.ratio) for c in ws.certificates}
        assert got == {
            (0, 1): (26, Fraction(26)),
            (0, 2): (9, Fraction(161, 9)),
            (1, 2): (19, Fraction(91, 9)),
        }

    def test_fourth_generator_boundaries(self):
        """Deeper families raise the recursion targets, checked by hand.

        At l=17 the dominant rank over the family is 2041 (from the third
        generator), making the target 34697; the least reaching increment
        is 2025, checked at the boundary by brute min-product scans.
        """
        ws = grow_wild_set(F1, F2, target_size=4, depth=3, threshold=10)
        third = ws.generators[2].boundaries
        assert _naive_rank(list(third), F1, F2, 17) == 2041
        assert _naive_min_product(F1, F2, 2025, 17) >= 17 * 2041
        assert _naive_min_product(F1, F2, 2024, 17) < 17 * 2041
        assert ws.generators[3].boundaries == (1, 2, 17, 2042)

    def test_json_shape(self):
        ws = grow_wild_set(F1, F2, target_size=2, depth=3, threshold=10)
        doc = ws.to_json()
        assert doc["f1"] == {"family": "power", "alpha": "1"}
        assert doc["generators"][0]["kind"] == "identity"
        assert doc["generators"][1]["boundaries"] == ["1", "2", "5", "26"]
        cert = doc["certificates"][0]
        assert cert == {
            "i": 0,
            "j": 1,
            "index": 26,
            "ratio_num": "26",
            "ratio_den": "1",
        }

    def test_growth_csv(self):
        ws = grow_wild_set(F1, F2, target_size=2, depth=3, threshold=10)
        text = ws.growth_csv(10)
        lines = text.strip().split("\n")
        assert lines[0] == "n,wp_0,wp_1"
        assert len(lines) == 11
        n, wp0, wp1 = lines[4].split(",")
        assert (n, float(wp0), float(wp1)) == ("4", 16.0, 9.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            grow_wild_set(F1, F2, target_size=0)
