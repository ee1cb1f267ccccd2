import numpy as np
import pytest

from elltwist import characters as ch
from elltwist import lvalue as lv


def orbit_reps(E, k, f_max, limit=None):
    reps = []
    seen = set()
    for chi in ch.enumerate_characters(k, E.conductor, (3, f_max)):
        key = (chi.conductor, min(c.label for c in ch.galois_orbit(chi)))
        if key in seen:
            continue
        seen.add(key)
        reps.append(chi)
        if limit and len(reps) >= limit:
            break
    return reps


class TestCentralValue:
    def test_conjugation_symmetry_direct(self, E11, coeffs11):
        for chi in orbit_reps(E11, 3, 120):
            L, _ = lv.central_value(E11, chi, 8, coeffs11)
            Lbar, _ = lv.central_value(E11, chi.conjugate(), 8, coeffs11)
            assert Lbar == pytest.approx(np.conj(L), abs=1e-10)

    def test_tail_contract(self, E11, coeffs11):
        # more digits (hence more terms) moves the value below the old tail
        chi = ch.PrimitiveCharacter.from_label(13, 3)
        L8, T8 = lv.central_value(E11, chi, 8, coeffs11)
        L12, T12 = lv.central_value(E11, chi, 12, coeffs11)
        assert T12 > T8
        assert abs(L12 - L8) < 1e-8

    def test_budget_error_names_requirement(self, E11, coeffs11):
        chi = ch.PrimitiveCharacter.from_label(9973, 2)  # needs far more terms
        with pytest.raises(lv.CoefficientBudgetError) as err:
            lv.central_value(E11, chi, 8, coeffs11)
        assert err.value.needed > coeffs11.length
        assert err.value.available == coeffs11.length

    def test_coprimality_requirement(self, E11, coeffs11):
        chi = ch.PrimitiveCharacter.from_label(11, 2)  # conductor shares 11
        with pytest.raises(ValueError):
            lv.central_value(E11, chi, 8, coeffs11)

    def test_trivial_twist_recovers_known_central_value(self, E11, coeffs11):
        # the series degenerates to 2 sum a_n/n exp(-2 pi n / sqrt(N)) at
        # conductor 1, whose value for the conductor-11 curve is pinned by
        # the rank-0 arithmetic chain: Omega+ * |Sha| * c_11 / |tors|^2
        # = Omega+ * 1 * 5 / 25
        one = ch.PrimitiveCharacter(1, 1, (), 1)
        L, _ = lv.central_value(E11, one, 12, coeffs11)
        assert L.imag == pytest.approx(0.0, abs=1e-12)
        assert L.real == pytest.approx(E11.real_period / 5.0, abs=1e-11)

    def test_double_vs_extended_sample(self, E11, E14, coeffs11, coeffs14):
        # precision-knob cross-check on a 100-record sample
        checked = 0
        for E, tab in ((E11, coeffs11), (E14, coeffs14)):
            for chi in ch.enumerate_characters(3, E.conductor, (3, 260)):
                L, _ = lv.central_value(E, chi, 8, tab)
                Lx, _ = lv.central_value(E, chi, 8, tab, precision="extended")
                assert L == pytest.approx(Lx, abs=1e-11)
                checked += 1
        assert checked >= 100


class TestAlgebraicPart:
    def test_linearity_at_zero(self, E11):
        chi = ch.PrimitiveCharacter.from_label(7, 2)
        assert lv.algebraic_part(E11, chi, 0j) == 0

    def test_reflection_identity(self, E11, records11_k3):
        for r in records11_k3:
            if abs(r.L_alg) > lv.zero_threshold(r.conductor):
                resid = abs(r.L_alg - r.zeta * np.conj(r.L_alg)) / abs(r.L_alg)
                assert resid < 1e-8

    def test_even_order_rejected(self, E11):
        chi = ch.PrimitiveCharacter.from_label(16, 3)
        with pytest.raises(lv.UnsupportedCharacterError):
            lv.algebraic_part(E11, chi, 1 + 0j)

    def test_galois_equivariance_via_orbit_norms(self, records11_k5):
        # sigma permutes the alpha values, so A is orbit-constant
        by_orbit = {}
        for r in records11_k5:
            chi = ch.PrimitiveCharacter.from_label(r.conductor, r.label)
            key = (r.conductor, min(c.label for c in ch.galois_orbit(chi)))
            by_orbit.setdefault(key, set()).add(r.A)
        assert by_orbit and all(len(v) == 1 for v in by_orbit.values())


class TestLambdaSelect:
    def test_zeta_one_branch(self, E11, records11_k3):
        hits = [r for r in records11_k3 if abs(r.zeta - 1) < 1e-9]
        assert hits, "no plus_one branch in range"
        assert all(r.lambda_case == "plus_one" and r.lam == 1 for r in hits)

    def test_generic_branch_identity(self, E11):
        # lambda / conj(lambda) recovers zeta
        for chi in orbit_reps(E11, 3, 60):
            case, lam = lv.lambda_select(E11, chi)
            zeta = lv.zeta_sign(E11, chi)
            assert lam == pytest.approx(zeta * np.conj(lam), rel=1e-12)

    def test_minus_one_never_fires_for_odd_order_positive_sign(self, records11_k3, records11_k5):
        assert all(r.lambda_case != "minus_one" for r in records11_k3 + records11_k5)

    def test_minus_one_branch_constructible(self, E11):
        # flip the root number so zeta = -chi(-11) can land on -1 for even k...
        # odd order keeps zeta off -1, so exercise the branch via a synthetic
        # curve with w = -1 and a character with chi(-N) = -1: impossible for
        # odd k; assert the exhaustiveness guard instead.
        chi = ch.PrimitiveCharacter.from_label(7, 2)
        case, lam = lv.lambda_select(E11, chi)
        assert case in ("generic", "plus_one")

    def test_alternate_variant_unit_invariance(self, E11, coeffs11):
        # the alternate branch factor differs by a circular unit: |A| survives
        for chi in orbit_reps(E11, 3, 200, limit=12):
            recs = lv.evaluate_orbit(E11, chi, 8, coeffs11)
            case, lam_alt = lv.lambda_select(E11, chi, variant="alternate")
            assert case == "alternate"
            L_alg = recs[0].L_alg if recs[0].label == chi.label else recs[1].L_alg
            alpha_alt = (L_alg / lam_alt).real
            # k = 3: A_alt = round(alpha_alt) must match |A| up to sign
            assert abs(round(alpha_alt)) == abs(recs[0].A)
            assert abs(alpha_alt - round(alpha_alt)) < 1e-4

    def test_alternate_variant_unit_invariance_quintic(self, E11, coeffs11):
        for chi in orbit_reps(E11, 5, 200, limit=6):
            recs = {r.label: r for r in lv.evaluate_orbit(E11, chi, 10, coeffs11)}
            base = ch.PrimitiveCharacter.from_label(chi.conductor, min(recs))
            prod = 1.0
            for j in (1, 2):
                chi_j = base.galois_power(j)
                _, lam_alt = lv.lambda_select(E11, chi_j, variant="alternate")
                prod *= (recs[chi_j.label].L_alg / lam_alt).real
            A_alt = round(prod)
            assert abs(prod - A_alt) < 1e-4
            assert abs(A_alt) == abs(recs[min(recs)].A)


class TestAlphaAndNorm:
    def test_cubic_norm_is_alpha(self, records11_k3):
        for r in records11_k3:
            assert r.A == round(r.alpha)

    def test_quintic_norm_is_pair_product(self, E11, coeffs11):
        chi = next(ch.enumerate_characters(5, 11, (31, 31)))
        recs = lv.evaluate_orbit(E11, chi, 10, coeffs11)
        base = min(recs, key=lambda r: r.label)
        labels = {r.label: r for r in recs}
        chi1 = ch.PrimitiveCharacter.from_label(31, base.label)
        a1 = labels[chi1.label].alpha
        a2 = labels[chi1.galois_power(2).label].alpha
        assert base.A == round(a1 * a2)

    def test_conjugate_alphas_agree(self, records11_k5):
        by_label = {(r.conductor, r.label): r for r in records11_k5}
        for r in records11_k5:
            chi = ch.PrimitiveCharacter.from_label(r.conductor, r.label)
            rbar = by_label[(r.conductor, chi.conjugate().label)]
            assert rbar.alpha == pytest.approx(r.alpha, abs=1e-6)

    def test_incomplete_orbit_rejected(self, E11, coeffs11):
        chi = next(ch.enumerate_characters(5, 11, (31, 31)))
        case, lam = lv.lambda_select(E11, chi)
        L, _ = lv.central_value(E11, chi, 8, coeffs11)
        L_alg = lv.algebraic_part(E11, chi, L)
        with pytest.raises(ValueError):
            lv.alpha_and_norm(E11, [(chi, L_alg, lam)])

    def test_integrality_small_range(self, records11_k3, records14_k3):
        for r in records11_k3 + records14_k3:
            assert r.residual < 1e-4
            assert not r.flagged


class TestVanishing:
    # first rank-jumping cubic twists in range, found by the sweep itself
    CASES = [("14a1", 31, 5), ("11a1", 151, 32)]

    @pytest.mark.parametrize("label,f,chi_label", CASES)
    def test_zero_records_confirmed_at_extended_precision(
        self, label, f, chi_label, E11, E14, coeffs11, coeffs14
    ):
        E, tab = {"11a1": (E11, coeffs11), "14a1": (E14, coeffs14)}[label]
        chi = ch.PrimitiveCharacter.from_label(f, chi_label)
        recs = lv.evaluate_orbit(E, chi, 8, tab)
        assert all(r.A == 0 for r in recs)
        assert all(abs(r.L_alg) < lv.zero_threshold(f) for r in recs)
        L_ext, _ = lv.central_value(E, chi, 14, tab, precision="extended")
        assert abs(L_ext) < 1e-12

    def test_zero_set_is_orbit_wide(self, records14_k3):
        # a vanishing alpha forces the whole orbit to vanish
        by_orbit = {}
        for r in records14_k3:
            chi = ch.PrimitiveCharacter.from_label(r.conductor, r.label)
            key = (r.conductor, min(c.label for c in ch.galois_orbit(chi)))
            by_orbit.setdefault(key, []).append(r)
        saw_zero = False
        for recs in by_orbit.values():
            zeros = [abs(r.L) < 1e-8 for r in recs]
            assert all(zeros) or not any(zeros)
            saw_zero = saw_zero or all(zeros)
        assert saw_zero  # f = 31 twist of the conductor-14 curve vanishes

    def test_quintic_orbit_extended_precision_norm(self, E11, coeffs11):
        # recompute one quintic orbit entirely through the extended path and
        # re-derive A; both routes must land on the same integer
        chi = next(ch.enumerate_characters(5, 11, (31, 31)))
        recs = lv.evaluate_orbit(E11, chi, 10, coeffs11)
        base = ch.PrimitiveCharacter.from_label(31, min(r.label for r in recs))
        prod = 1.0
        for j in (1, 2):
            chi_j = base.galois_power(j)
            L, _ = lv.central_value(E11, chi_j, 12, coeffs11, precision="extended")
            _, lam = lv.lambda_select(E11, chi_j)
            prod *= (lv.algebraic_part(E11, chi_j, L) / lam).real
        assert round(prod) == recs[0].A
        assert abs(prod - round(prod)) < 1e-6


class TestGcdNormalize:
    def _rec(self, A):
        return lv.TwistRecord("11a1", 7, 2, 3, 0j, 0j, 1, "generic", 1, float(A), A, 0.0, 10)

    def test_example_multiset(self):
        recs = [self._rec(a) for a in (0, 5, -10, 25)]
        g, out = lv.dataset_gcd_normalize(recs)
        assert g == 5
        assert [r.A for r in out] == [0, 1, -2, 5]

    def test_idempotent(self):
        recs = [self._rec(a) for a in (0, 5, -10, 25)]
        _, out = lv.dataset_gcd_normalize(recs)
        g2, out2 = lv.dataset_gcd_normalize(out)
        assert g2 == 1
        assert [r.A for r in out2] == [r.A for r in out]

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            lv.dataset_gcd_normalize([self._rec(0)])

    def test_fixture_normalisation_nontrivial(self, records11_k3):
        g, _ = lv.dataset_gcd_normalize(records11_k3)
        assert g > 1


class TestIntegralityInvariant:
    def test_full_range_to_1e4(self, E11, E14):
        # the stated invariant range: cubic sweeps to conductor 1e4 on both
        # fixtures, >= 99.9% within tolerance first pass, 100% after retries
        from elltwist.curve import coefficient_table
        from elltwist.sweep import _records_for_orbit

        for E in (E11, E14):
            table = coefficient_table(E, lv.tail_terms(10**4, E.conductor, 8))
            first_pass_fail = 0
            total = 0
            seen = set()
            for chi in ch.enumerate_characters(3, E.conductor, (3, 10**4)):
                key = (chi.conductor, min(c.label for c in ch.galois_orbit(chi)))
                if key in seen:
                    continue
                seen.add(key)
                recs = lv.evaluate_orbit(E, chi, 8, table)
                total += len(recs)
                if recs[0].flagged:
                    first_pass_fail += len(recs)
                    retried = _records_for_orbit(E, chi, 8, table)
                    assert not retried[0].flagged, (E.label, chi.conductor, chi.label)
            assert first_pass_fail / total <= 0.001
            assert total > 2000


class TestRootNumber:
    def test_both_fixtures_positive(self, E11, E14):
        assert lv.empirical_root_number(E11, sample=3) == 1
        assert lv.empirical_root_number(E14, sample=3) == 1


class TestTailTerms:
    def test_monotone_in_digits_and_conductor(self):
        assert lv.tail_terms(100, 11, 10) > lv.tail_terms(100, 11, 8)
        assert lv.tail_terms(200, 11, 8) > lv.tail_terms(100, 11, 8)

    def test_tail_bound_is_respected(self, E11, coeffs11):
        # truncating at the advertised T then doubling changes nothing at 1e-8
        chi = ch.PrimitiveCharacter.from_label(31, 5)
        L1, T = lv.central_value(E11, chi, 8, coeffs11)
        # manual evaluation with 2T terms via the 12-digit path
        L2, T2 = lv.central_value(E11, chi, 12, coeffs11)
        assert abs(L2 - L1) < 1e-8
