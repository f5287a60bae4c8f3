import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from autocor import stats
from autocor.errors import KeyMismatch, NOutOfRange, TooFewObservations, ZeroVariance

mpmath.mp.dps = 50

# (data, W, p) from scipy.stats.shapiro (scipy 1.15.3), computed once and frozen
SHAPIRO_REFERENCE = {
    "weights_n11": ([148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236],
                    0.7888146948631716, 0.006703814061898823),
    "ramp_n20": (list(range(1, 21)), 0.9603751832429884, 0.5513717457916771),
    "small_n4": ([2.1, 3.7, 3.9, 9.6], 0.8319883792188281, 0.1730462888737262),
    "small_n5": ([0.51, 0.73, 0.98, 1.02, 2.45], 0.7961610935605081, 0.0753742916258596),
    "n3": ([1.0, 2.0, 4.0], 0.9642857142857142, 0.6368868450289689),
    "normal_n50": ([1.222, 1.159, 1.02, 0.908, 0.925, 0.524, 1.01, 0.881, 1.034, 1.042, 1.213, 0.901,
                    1.033, 1.269, 0.863, 0.979, 0.983, 0.729, 1.04, 0.755, 1.228, 0.729, 1.018, 0.953,
                    1.04, 1.058, 0.806, 1.048, 0.858, 1.093, 0.75, 0.831, 0.96, 1.105, 0.913, 0.945,
                    1.223, 1.101, 0.967, 0.866, 0.855, 0.887, 0.82, 1.032, 1.072, 1.11, 0.792, 0.954,
                    0.87, 1.33], 0.9864000851837812, 0.8297337925627073),
    "lognormal_n50": ([0.2445, 0.021, 0.2571, 0.2023, 0.1133, 0.2238, 0.2342, 0.0911, 0.1603, 0.0622,
                       0.0832, 0.097, 0.1568, 0.0861, 0.0915, 0.1277, 0.0251, 0.1194, 0.2004, 0.2161,
                       0.1602, 0.0502, 0.1559, 0.2026, 0.1441, 0.0588, 0.1325, 0.0551, 0.04, 0.1825,
                       0.1492, 0.3311, 0.3044, 0.0573, 0.0682, 0.3307, 0.0393, 0.126, 0.0616, 0.0522,
                       0.0975, 0.2303, 0.0954, 0.0832, 0.0457, 0.0636, 0.0899, 0.0812, 0.3994, 0.0653],
                      0.9048480970560038, 0.0006973871385149962),
}

values = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=60)


def mp_pearson(x, y):
    x = [mpmath.mpf(float(v)) for v in x]
    y = [mpmath.mpf(float(v)) for v in y]
    mx, my = sum(x) / len(x), sum(y) / len(y)
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / mpmath.sqrt(sxx * syy)


def mp_t_pvalue(r, n):
    df = n - 2
    t = r * mpmath.sqrt(df / (1 - r * r))
    # two-sided Student-t tail by direct integration of the density
    dens = lambda u: mpmath.gamma((df + 1) / mpmath.mpf(2)) / (
        mpmath.sqrt(df * mpmath.pi) * mpmath.gamma(df / mpmath.mpf(2))) * (1 + u * u / df) ** (-(df + 1) / mpmath.mpf(2))
    return 2 * mpmath.quad(dens, [abs(t), mpmath.inf])


def hand_ranks(x):
    order = sorted(range(len(x)), key=lambda i: x[i])
    ranks = [0.0] * len(x)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def phantom_like_pairs(seed=0, n=50):
    rng = np.random.default_rng(seed)
    truth = rng.uniform(0.5, 1.6, n)
    return truth + rng.normal(0, 0.02, n), truth


# ---------------------------------------------------------------------------

def test_mean_sd_examples():
    assert stats.mean_sd([1, 1, 1]) == (1.0, 0.0)
    m, s = stats.mean_sd([0, 2])
    assert m == 1.0 and s == pytest.approx(math.sqrt(2), abs=1e-15)
    with pytest.raises(TooFewObservations):
        stats.mean_sd([3.0])


def test_mean_sd_high_precision_oracle():
    x = np.random.default_rng(1).normal(0.97, 0.16, 50)
    xm = [mpmath.mpf(float(v)) for v in x]
    mean = sum(xm) / 50
    sd = mpmath.sqrt(sum((v - mean) ** 2 for v in xm) / 49)
    m, s = stats.mean_sd(x)
    assert abs(m - float(mean)) < 1e-10 and abs(s - float(sd)) < 1e-10


@pytest.mark.parametrize("name", sorted(SHAPIRO_REFERENCE))
def test_shapiro_wilk_matches_reference(name):
    data, w_ref, p_ref = SHAPIRO_REFERENCE[name]
    W, p = stats.shapiro_wilk(data)
    assert abs(W - w_ref) < 1e-3 and abs(p - p_ref) < 1e-3


def test_shapiro_wilk_closed_form_n3():
    W, p = stats.shapiro_wilk([-1, 0, 1])
    assert W == pytest.approx(1.0, abs=1e-12)
    x = np.array([1.0, 2.0, 4.0])
    closed = (math.sqrt(0.5) * (x[2] - x[0])) ** 2 / ((x - x.mean()) ** 2).sum()
    assert stats.shapiro_wilk(x)[0] == pytest.approx(closed, abs=1e-12)


def test_shapiro_wilk_errors():
    with pytest.raises(ZeroVariance):
        stats.shapiro_wilk([2, 2, 2, 2])
    with pytest.raises(NOutOfRange):
        stats.shapiro_wilk([1, 2])
    with pytest.raises(NOutOfRange):
        stats.shapiro_wilk(np.arange(5001.0))


def test_shapiro_coefficients_unit_norm():
    for n in (4, 5, 6, 11, 12, 50, 333):
        w = stats.sw_coefficients(n)
        assert 2 * np.sum(w ** 2) == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(w) < 0)


@settings(max_examples=60)
@given(values, st.floats(0.01, 100), st.floats(-100, 100))
def test_shapiro_w_range_and_affine_invariance(x, a, b):
    x = np.array(x)
    assume(np.ptp(x) > 1e-6 * max(1.0, np.abs(x).max()))
    W, p = stats.shapiro_wilk(x)
    assert 0 < W <= 1 and 0 <= p <= 1
    for scale in (a, -a):
        W2, _ = stats.shapiro_wilk(scale * x + b)
        assert W2 == pytest.approx(W, abs=1e-9)


def test_pearson_examples():
    x = np.arange(10.0)
    assert stats.pearson((2 * x + 1, x))[0] == pytest.approx(1.0, abs=1e-15)
    assert stats.pearson((-x, x))[0] == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(ZeroVariance):
        stats.pearson((np.ones(5), x[:5]))
    with pytest.raises(TooFewObservations):
        stats.pearson(([1, 2], [2, 3]))


def test_pearson_matches_high_precision():
    model, truth = phantom_like_pairs()
    r, p = stats.pearson((model, truth))
    assert abs(r - float(mp_pearson(model, truth))) < 1e-9
    m2, t2 = phantom_like_pairs(3, 12)
    m2 = m2 + np.random.default_rng(9).normal(0, 0.4, 12)
    r2, p2 = stats.pearson((m2, t2))
    ref = mp_t_pvalue(mp_pearson(m2, t2), 12)
    assert abs(p2 - float(ref)) < 1e-9


def test_spearman_examples():
    x = np.arange(1.0, 11.0)
    assert stats.spearman((np.exp(x), x))[0] == pytest.approx(1.0)
    assert stats.spearman((-x ** 3, x))[0] == pytest.approx(-1.0)
    assert stats.spearman(([1, 2, 2, 3], [4, 5, 5, 6]))[0] == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ZeroVariance):
        stats.spearman(([1, 1, 1, 1], [1, 2, 3, 4]))


def test_midranks_match_hand_ranking():
    x = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5]
    assert stats.midranks(x).tolist() == hand_ranks(x)


def test_spearman_matches_high_precision():
    rng = np.random.default_rng(4)
    x = np.round(rng.uniform(0, 1, 40), 2)
    y = np.round(x ** 2 + rng.normal(0, 0.1, 40), 2)
    r, p = stats.spearman((x, y))
    ref_r = mp_pearson(hand_ranks(list(x)), hand_ranks(list(y)))
    assert abs(r - float(ref_r)) < 1e-9
    assert abs(p - float(mp_t_pvalue(ref_r, 40))) < 1e-9


@settings(max_examples=60)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=40),
       st.floats(0.1, 10), st.floats(-10, 10))
def test_correlation_properties(pairs, a, b):
    x, y = np.array(pairs).T
    assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
    r, _ = stats.pearson((x, y))
    rs, _ = stats.spearman((x, y))
    assert -1 <= r <= 1 and -1 <= rs <= 1
    assert stats.pearson((a * x + b, y))[0] == pytest.approx(r, abs=1e-9)
    fx, fy = np.exp(x / 50), np.cbrt(y)
    # the transform must stay strictly monotone in floating point
    assume(np.array_equal(stats.midranks(fx), stats.midranks(x)))
    assume(np.array_equal(stats.midranks(fy), stats.midranks(y)))
    assert stats.spearman((fx, fy))[0] == pytest.approx(rs, abs=1e-12)


def test_bland_altman_examples():
    x = np.array([0.5, 0.7, 1.1, 0.9])
    ba = stats.bland_altman((x, x))
    assert (ba.mean_diff, ba.sd_diff, ba.loa_low, ba.loa_high) == (0.0, 0.0, 0.0, 0.0)
    ba = stats.bland_altman((x + 0.25, x))
    assert ba.mean_diff == pytest.approx(0.25) and ba.sd_diff == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(TooFewObservations):
        stats.bland_altman(([1.0], [1.0]))


def test_bland_altman_matches_direct_formula():
    model, truth = phantom_like_pairs(2)
    ba = stats.bland_altman((model, truth))
    d = [mpmath.mpf(float(a)) - mpmath.mpf(float(b)) for a, b in zip(model, truth)]
    md = sum(d) / len(d)
    sd = mpmath.sqrt(sum((v - md) ** 2 for v in d) / (len(d) - 1))
    assert abs(ba.mean_diff - float(md)) < 1e-10
    assert abs(ba.sd_diff - float(sd)) < 1e-10
    assert abs(ba.loa_low - float(md - 1.96 * sd)) < 1e-10
    assert abs(ba.loa_high - float(md + 1.96 * sd)) < 1e-10
    assert np.allclose(ba.means, (model + truth) / 2) and np.array_equal(ba.diffs, model - truth)
    assert ba.mean_diff == pytest.approx(model.mean() - truth.mean(), abs=1e-15)


def test_histogram_sturges():
    counts, edges = stats.histogram(np.arange(50.0))
    assert len(counts) == stats.sturges_bins(50) == 7
    assert counts.sum() == 50 and edges[0] == 0 and edges[-1] == 49
    assert len(stats.histogram(np.arange(50.0), bins=4)[0]) == 4


def test_agreement_report_branches():
    rng = np.random.default_rng(12)
    truth = rng.normal(1.0, 0.2, 50)
    model = truth + rng.normal(0, 0.05, 50)
    assert stats.shapiro_wilk(truth)[1] > 0.05 and stats.shapiro_wilk(model)[1] > 0.05
    rep = stats.agreement_report((model, truth))
    assert rep.method == "Pearson" and rep.coefficient == stats.pearson((model, truth))[0]
    skewed = rng.lognormal(-2.3, 0.9, 50)
    rep = stats.agreement_report((skewed + rng.normal(0, 0.01, 50), skewed))
    assert rep.method == "Spearman"
    with pytest.raises(TooFewObservations):
        stats.agreement_report(([1.0, 2.0], [1.0, 2.0]))


def test_method_choice_on_reported_normality_results():
    # PCOR: both series normal (p .635 and .294); ACOR: model p < .0001, truth p .042
    assert stats.choose_correlation(0.635, 0.294) == "Pearson"
    assert stats.choose_correlation(0.0001, 0.042) == "Spearman"


def test_report_serializes():
    import json
    model, truth = phantom_like_pairs(5)
    d = stats.agreement_report((model, truth)).to_dict()
    back = json.loads(json.dumps(d))
    assert back["correlation"]["method"] in ("Pearson", "Spearman")
    assert set(back["bland_altman"]) == {"mean_diff", "sd_diff", "loa_low", "loa_high"}


def test_series_validation():
    with pytest.raises(KeyMismatch):
        stats.PairedSeries.of([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        stats.Series((1.0, float("nan")))
