import math

import numpy as np
import pytest

from walkersim.analysis import GaitFeatures
from walkersim.errors import DegenerateSampleError, SampleSizeError
from walkersim.stats import (
    ComparisonError,
    TTestVariant,
    betainc,
    compare_conditions,
    shapiro_wilk,
    t_sf_two_sided,
    t_test,
)

scipy_stats = pytest.importorskip("scipy.stats")
scipy_special = pytest.importorskip("scipy.special")


@pytest.mark.parametrize("n", [3, 4, 5, 7, 11, 12, 20, 50, 200, 1000])
def test_shapiro_matches_scipy(n):
    rng = np.random.default_rng(n)
    for x in (rng.normal(size=n), rng.exponential(size=n), rng.uniform(size=n)):
        ours = shapiro_wilk(x)
        ref = scipy_stats.shapiro(x)
        assert ours.w_statistic == pytest.approx(ref.statistic, abs=1e-5)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-5)


def test_shapiro_reference_sample():
    x = [148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236]
    r = shapiro_wilk(x)
    assert r.w_statistic == pytest.approx(0.7888147, abs=1e-6)
    assert r.p_value == pytest.approx(0.0067038, abs=1e-6)
    assert not r.normal_at_alpha


def test_shapiro_n3_exact():
    r = shapiro_wilk([1.0, 2.0, 4.0])
    w = r.w_statistic
    expected = 6 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
    assert r.p_value == pytest.approx(expected, abs=1e-9)


def test_shapiro_invariant_to_location_and_scale():
    x = np.random.default_rng(1).normal(size=15)
    a, b = shapiro_wilk(x), shapiro_wilk(3.0 * x + 100.0)
    assert a.w_statistic == pytest.approx(b.w_statistic, abs=1e-12)


def test_shapiro_size_and_degenerate_errors():
    with pytest.raises(SampleSizeError):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(SampleSizeError):
        shapiro_wilk(np.arange(5001.0))
    with pytest.raises(DegenerateSampleError):
        shapiro_wilk([2.0, 2.0, 2.0, 2.0])


def test_betainc_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b, x = rng.uniform(0.2, 40), rng.uniform(0.2, 40), rng.uniform()
        assert betainc(a, b, x) == pytest.approx(scipy_special.betainc(a, b, x), abs=1e-12)
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0


def test_t_tail_matches_scipy():
    for t, df in [(0.0, 3), (1.5, 2), (-2.7, 6), (10.0, 1.5), (40.0, 30)]:
        assert t_sf_two_sided(t, df) == pytest.approx(2 * scipy_stats.t.sf(abs(t), df), rel=1e-9, abs=1e-300)


def student_oracle(a, b):
    na, nb = len(a), len(b)
    sp2 = ((na - 1) * np.var(a, ddof=1) + (nb - 1) * np.var(b, ddof=1)) / (na + nb - 2)
    return (np.mean(a) - np.mean(b)) / math.sqrt(sp2 * (1 / na + 1 / nb)), na + nb - 2


def test_student_matches_direct_formula():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = rng.normal(0, 1, rng.integers(2, 12))
        b = rng.normal(0.5, 2, rng.integers(2, 12))
        t, df = student_oracle(a, b)
        r = t_test(a, b)
        assert r.t_statistic == pytest.approx(t, abs=1e-9)
        assert r.degrees_of_freedom == df
        assert r.p_value == pytest.approx(2 * scipy_stats.t.sf(abs(t), df), abs=1e-6)


@pytest.mark.parametrize("variant", ["welch", "paired"])
def test_other_variants_match_scipy(variant):
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(3, 10))
        a, b = rng.normal(size=n), rng.normal(0.3, 1.5, n)
        r = t_test(a, b, variant)
        ref = scipy_stats.ttest_rel(a, b) if variant == "paired" else scipy_stats.ttest_ind(a, b, equal_var=False)
        assert r.t_statistic == pytest.approx(ref.statistic, abs=1e-9)
        assert r.p_value == pytest.approx(ref.pvalue, abs=1e-6)


def test_symmetry_and_invariance():
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=6), rng.normal(1, 1, 5)
    ab, ba = t_test(a, b), t_test(b, a)
    assert ab.t_statistic == pytest.approx(-ba.t_statistic, abs=1e-12)
    assert ab.p_value == pytest.approx(ba.p_value, abs=1e-12)
    shifted = t_test(a + 1e3, b + 1e3)
    assert shifted.t_statistic == pytest.approx(ab.t_statistic, rel=1e-9)
    scaled = t_test(7.5 * a, 7.5 * b)
    assert scaled.t_statistic == pytest.approx(ab.t_statistic, rel=1e-12)


def test_separated_samples_significant():
    a = [1.0, 2.0, 3.0, 4.0]
    r = t_test(a, [x + 100 for x in a])
    assert r.significant and r.p_value < 1e-9


def test_zero_variance_cases():
    same = t_test([2.0, 2.0, 2.0], [2.0, 2.0, 2.0])
    assert same.t_statistic == 0 and same.p_value == 1.0
    diff = t_test([2.0, 2.0, 2.0], [3.0, 3.0, 3.0])
    assert diff.t_statistic == -math.inf and diff.p_value == 0.0


def test_variant_preconditions():
    with pytest.raises(SampleSizeError):
        t_test([1.0], [1.0, 2.0])
    with pytest.raises(SampleSizeError):
        t_test([1.0, 2.0, 3.0], [1.0, 2.0], TTestVariant.PAIRED)


def feats(stance_l, stance_r, steps=30, dur=16.0):
    return GaitFeatures(dur, steps, stance_l, stance_r, 100 - stance_l, 100 - stance_r, 0.5, dur - 1, 12, 12, 2)


def test_compare_conditions_pools_legs():
    fa = [feats(58.1, 60.2), feats(57.9, 59.9)]
    fb = [feats(58.0, 58.1, 28, 15.0), feats(58.2, 58.9, 28, 15.1)]
    rep = compare_conditions(fa, fb)
    assert rep.tests["stance"]["degrees_of_freedom"] == 6
    assert set(rep.normality) == {"stance_A", "stance_B", "swing_A", "swing_B"}
    assert rep.deltas[0]["stance_right"] == pytest.approx(-2.1)
    assert rep.deltas[1]["step_count"] == -2
    assert rep.tests["stance"]["t_statistic"] == pytest.approx(-rep.tests["swing"]["t_statistic"])
    assert rep.to_dict()["trials_a"][0]["label"] == "T1"


def test_compare_conditions_reports_degenerate_sample():
    fa = [feats(58.0, 58.0), feats(58.0, 58.0)]
    fb = [feats(58.0, 57.0), feats(58.1, 57.2)]
    with pytest.raises(ComparisonError, match="stance_A"):
        compare_conditions(fa, fb)


def test_uniform_fails_normality_at_large_n():
    x = np.random.default_rng(500).uniform(size=500)
    assert not shapiro_wilk(x).normal_at_alpha


def test_identical_samples():
    r = t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert r.t_statistic == 0 and r.p_value == 1.0 and not r.significant


def test_location_invariance_tight():
    rng = np.random.default_rng(21)
    a, b = rng.normal(size=8), rng.normal(0.5, 1, 8)
    r0, r1 = t_test(a, b), t_test(a + 3.0, b + 3.0)
    assert abs(r0.t_statistic - r1.t_statistic) < 1e-12
    assert abs(r0.p_value - r1.p_value) < 1e-12


def test_shapiro_affine_invariance_tight():
    x = np.random.default_rng(4).normal(size=30)
    assert abs(shapiro_wilk(x).w_statistic - shapiro_wilk(0.25 * x - 7.0).w_statistic) < 1e-9


def test_t_test_null_calibration():
    rng = np.random.default_rng(77)
    rejects = sum(t_test(rng.normal(size=10), rng.normal(size=10)).significant for _ in range(1000))
    assert 0.03 <= rejects / 1000 <= 0.07


def test_identical_conditions_show_nothing():
    rng = np.random.default_rng(3)
    fa = [feats(58 + rng.normal(0, .3), 60 + rng.normal(0, .3)) for _ in range(3)]
    fb = [feats(58 + rng.normal(0, .3), 60 + rng.normal(0, .3)) for _ in range(3)]
    rep = compare_conditions(fa, fb)
    assert not rep.tests["stance"]["significant"] and not rep.tests["swing"]["significant"]
    assert all(abs(d["stance_right"]) < 1.5 for d in rep.deltas)
