import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elltwist import stats as stt
from elltwist.lvalue import TwistRecord


def rec(f, A, curve="11a1", k=3):
    return TwistRecord(curve, f, 2, k, 0j, 0j, 1 + 0j, "generic", 1 + 0j, float(A), A, 0.0, 10)


CFG3 = stt.StatConfig.for_order(3)


class TestAccumulate:
    def test_empty_stream_rejected(self):
        with pytest.raises(ValueError):
            stt.accumulate([], CFG3)

    def test_single_record(self):
        s = stt.accumulate([rec(7, 1)], CFG3)
        assert s.n_counts[1][-1] == 1 and s.n_counts[-1][-1] == 0
        assert s.s_counts[1][-1] == 1
        for c in CFG3.exponents:
            assert s.m_counts[c][-1] == 1  # 7^c >= 1 = |A|

    def test_mixed_streams_rejected(self):
        with pytest.raises(ValueError):
            stt.accumulate([rec(7, 1), rec(9, 1, curve="14a1")], CFG3)
        with pytest.raises(ValueError):
            stt.accumulate([rec(7, 1), rec(11, 1, k=5)], CFG3)

    def test_s_from_n_identity_synthetic(self):
        rng = np.random.default_rng(11)
        recs = [
            rec(int(f), int(a))
            for f, a in zip(rng.integers(7, 40000, 10**4), rng.integers(-9, 10, 10**4))
        ]
        s = stt.accumulate(recs, CFG3)
        for L in CFG3.thresholds:
            total = sum(s.n_counts[l] for l in CFG3.values if 0 < abs(l) <= L)
            assert np.array_equal(s.s_counts[L], total)

    def test_counters_nondecreasing_in_x(self):
        rng = np.random.default_rng(5)
        recs = [rec(int(f), int(a)) for f, a in zip(rng.integers(7, 5000, 500), rng.integers(-9, 10, 500))]
        s = stt.accumulate(recs, CFG3)
        for arr in [*s.n_counts.values(), *s.s_counts.values(), *s.m_counts.values()]:
            assert (np.diff(arr) >= 0).all()

    def test_m_monotone_in_exponent(self):
        rng = np.random.default_rng(6)
        recs = [rec(int(f), int(a)) for f, a in zip(rng.integers(7, 5000, 500), rng.integers(-30, 31, 500))]
        s = stt.accumulate(recs, CFG3)
        cs = sorted(s.m_counts)
        for lo, hi in zip(cs, cs[1:]):
            assert (s.m_counts[lo] <= s.m_counts[hi]).all()

    def test_m_includes_zero_and_pos_variant_does_not(self):
        s = stt.accumulate([rec(7, 0), rec(13, 1)], CFG3)
        assert s.m_counts[0.1][-1] == 2
        assert s.m_counts_positive[0.1][-1] == 1

    def test_recount_is_idempotent(self):
        rng = np.random.default_rng(8)
        recs = [rec(int(f), int(a)) for f, a in zip(rng.integers(7, 3000, 300), rng.integers(-9, 10, 300))]
        s1 = stt.accumulate(recs, CFG3)
        s2 = stt.accumulate(list(reversed(recs)), CFG3)
        for key in s1.n_counts:
            assert np.array_equal(s1.n_counts[key], s2.n_counts[key])
        for key in s1.m_counts:
            assert np.array_equal(s1.m_counts[key], s2.m_counts[key])

    def test_grid_geometric(self):
        recs = [rec(7, 1), rec(5000, 2)]
        s = stt.accumulate(recs, stt.StatConfig(values=(0, 1), thresholds=(1,), exponents=(0.1,)))
        ratios = s.grid[1:-1] / s.grid[:-2]
        assert np.allclose(ratios, 1.05)
        assert s.grid[0] >= 2 and s.grid[-1] == 5000


class TestRatioSeries:
    def test_constant_counter_decays_like_comparator(self):
        recs = [rec(7, 1)]
        s = stt.accumulate([rec(7, 1), rec(4000, 3)], stt.StatConfig(values=(0, 1, 3), thresholds=(1, 3), exponents=(0.1,)))
        table = stt.ratio_series(s, "n")
        # n(x;1) is 1 from x = 7 on; ratio against sqrt(x) decays as x^{-1/2}
        x = table.x
        col = table.columns["l=1"]
        mask = (x > 7) & (x < 4000)
        assert np.allclose(col[mask], 1.0 / np.sqrt(x[mask]))

    def test_vanishing_header_semantics(self, records11_k3):
        from elltwist.lvalue import dataset_gcd_normalize

        _, recs = dataset_gcd_normalize(records11_k3)
        s = stt.accumulate(recs, CFG3)
        table = stt.ratio_series(s, "vanishing")
        assert list(table.columns) == ["l=0"]
        comp = stt.comparator("vanishing", "11a1", 3, s.grid)
        assert np.allclose(table.columns["l=0"], s.n_counts[0] / comp)

    def test_s_ratios_monotone_in_threshold(self):
        rng = np.random.default_rng(13)
        recs = [rec(int(f), int(a)) for f, a in zip(rng.integers(7, 30000, 2000), rng.integers(-9, 10, 2000))]
        s = stt.accumulate(recs, CFG3)
        table = stt.ratio_series(s, "s")
        cols = [table.columns[f"L={L}"] for L in sorted(CFG3.thresholds)]
        for lo, hi in zip(cols, cols[1:]):
            assert (hi >= lo).all()

    def test_unknown_kind(self):
        s = stt.accumulate([rec(7, 1)], CFG3)
        with pytest.raises(ValueError):
            stt.ratio_series(s, "bogus")


class TestNormForm:
    def test_first_nine_values(self):
        assert stt.quadratic_norm_values(9) == [1, 4, 5, 9, 11, 16, 19, 20, 25]

    def test_zero_and_negatives(self):
        assert stt.norm_form_representable(0)
        assert stt.norm_form_representable(-11)
        assert not stt.norm_form_representable(-2)

    @settings(max_examples=200, deadline=None)
    @given(n=st.integers(min_value=1, max_value=2000))
    def test_against_factorization_criterion(self, n):
        # representable iff every prime = +-2 (mod 5) divides to an even power
        m, ok = n, True
        p = 2
        while p * p <= m:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            if e % 2 and p % 5 in (2, 3):
                ok = False
            p += 1
        if m > 1 and m % 5 in (2, 3):
            ok = False
        assert stt.norm_form_representable(n) == ok
