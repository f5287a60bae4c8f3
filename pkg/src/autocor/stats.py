"""Validation statistics: descriptives, normality, correlation and agreement."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import special
from scipy.stats import norm

from .errors import KeyMismatch, NOutOfRange, TooFewObservations, ZeroVariance

ALPHA = 0.05
LOA_Z = 1.96


@dataclass(frozen=True)
class Series:
    values: tuple
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size < 1:
            raise TooFewObservations(f"series {self.label!r} is empty")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"series {self.label!r} has non-finite values")
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    def __len__(self):
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


@dataclass(frozen=True)
class PairedSeries:
    model: Series
    truth: Series

    def __post_init__(self):
        if len(self.model) != len(self.truth):
            raise KeyMismatch(f"paired series differ in length: {len(self.model)} vs {len(self.truth)}")

    @classmethod
    def of(cls, model, truth, labels=("model", "truth")) -> "PairedSeries":
        return cls(as_series(model, labels[0]), as_series(truth, labels[1]))

    def __len__(self):
        return len(self.model)


def as_series(s, label: str = "") -> Series:
    return s if isinstance(s, Series) else Series(tuple(np.ravel(s)), label)


def as_pair(p) -> PairedSeries:
    return p if isinstance(p, PairedSeries) else PairedSeries.of(*p)


# ---------------------------------------------------------------------------
# descriptives

def mean_sd(s) -> tuple[float, float]:
    """Sample mean and standard deviation with the n - 1 denominator."""
    x = as_series(s).array
    if x.size < 2:
        raise TooFewObservations("standard deviation needs at least two values")
    m = math.fsum(x) / x.size
    var = math.fsum((x - m) ** 2) / (x.size - 1)
    return m, math.sqrt(var)


def sturges_bins(n: int) -> int:
    return int(math.ceil(math.log2(n))) + 1 if n > 0 else 1


def histogram(values, bins: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width counts over the data range; Sturges' rule when ``bins`` is None."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise TooFewObservations("histogram of an empty series")
    counts, edges = np.histogram(x, bins=bins or sturges_bins(x.size))
    return counts, edges


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston's AS R94 approximation)

_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(c, x: float) -> float:
    """c[0] + c[1] x + c[2] x^2 + ..."""
    out = 0.0
    for coef in reversed(c):
        out = out * x + coef
    return out


def sw_coefficients(n: int) -> np.ndarray:
    """Weights for the upper half of the order statistics, largest first.

    The full antisymmetric weight vector is ``a[n-1-i] = w[i]``, ``a[i] = -w[i]``
    for ``i < n // 2`` (and 0 for the middle value of odd n); its squares sum to 1.
    """
    if n < 3:
        raise NOutOfRange(f"need n >= 3, got {n}")
    half = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = -norm.ppf((np.arange(1, half + 1) - 0.375) / (n + 0.25))
    summ2 = 2.0 * float(np.sum(m ** 2))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    w = m / ssumm2
    a1 = _poly(_C1, rsn) + m[0] / ssumm2
    if n > 5:
        a2 = _poly(_C2, rsn) + m[1] / ssumm2
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
        w = m / fac
        w[0], w[1] = a1, a2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
        w = m / fac
        w[0] = a1
    return w


def _sw_pvalue(w: float, n: int) -> float:
    if n == 3:
        return max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0))
    w1 = math.log1p(-w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if w1 >= gamma:
            return 1e-99
        y = -math.log(gamma - w1)
        mu, sigma = _poly(_C3, n), math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        y = w1
        mu, sigma = _poly(_C5, ln), math.exp(_poly(_C6, ln))
    if math.isinf(y):
        return 1.0
    return float(norm.sf(y, loc=mu, scale=sigma))


def shapiro_wilk(s) -> tuple[float, float]:
    """W statistic and its p-value (small p rejects normality)."""
    x = np.sort(as_series(s).array)
    n = x.size
    if not 3 <= n <= 5000:
        raise NOutOfRange(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    if x[-1] - x[0] == 0:
        raise ZeroVariance("Shapiro-Wilk on a constant series")
    half = n // 2
    w_upper = sw_coefficients(n)
    a = np.zeros(n)
    a[n - half:] = w_upper[::-1]
    a[:half] = -w_upper
    # scale first: W is affine invariant and this keeps the sums well conditioned
    z = (x - x.mean()) / (x[-1] - x[0])
    ac = a - a.mean()
    sax = float(np.dot(ac, z))
    ssa, ssx = float(np.dot(ac, ac)), float(np.dot(z, z))
    W = min(1.0, sax * sax / (ssa * ssx))
    return W, _sw_pvalue(W, n)


# ---------------------------------------------------------------------------
# correlation

def _t_pvalue(r: float, n: int) -> float:
    """Two-tailed p for H0: rho = 0, from t = r sqrt((n-2)/(1-r^2)) on n-2 df."""
    df = n - 2
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt(df / (1.0 - r * r))
    # two-sided Student-t tail via the regularized incomplete beta
    return float(special.betainc(0.5 * df, 0.5, df / (df + t * t)))


def _pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(np.dot(dx, dx)), float(np.dot(dy, dy))
    if sxx == 0 or syy == 0:
        raise ZeroVariance("correlation with a constant series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _check_pair(p, minimum: int = 3) -> tuple[np.ndarray, np.ndarray]:
    p = as_pair(p)
    if len(p) < minimum:
        raise TooFewObservations(f"need at least {minimum} pairs, got {len(p)}")
    return p.model.array, p.truth.array


def pearson(p) -> tuple[float, float]:
    x, y = _check_pair(p)
    r = _pearson_r(x, y)
    return r, _t_pvalue(r, x.size)


def midranks(x) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(x.size)
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], x.size]
    for lo, hi in zip(starts, ends):
        ranks[order[lo:hi]] = 0.5 * (lo + hi - 1) + 1.0
    return ranks


def spearman(p) -> tuple[float, float]:
    x, y = _check_pair(p)
    r = _pearson_r(midranks(x), midranks(y))
    return r, _t_pvalue(r, x.size)


# ---------------------------------------------------------------------------
# agreement

@dataclass
class BlandAltman:
    mean_diff: float
    sd_diff: float
    loa_low: float
    loa_high: float
    means: np.ndarray = field(repr=False)
    diffs: np.ndarray = field(repr=False)

    def to_dict(self, points: bool = False) -> dict:
        d = {"mean_diff": self.mean_diff, "sd_diff": self.sd_diff,
             "loa_low": self.loa_low, "loa_high": self.loa_high}
        if points:
            d["means"] = self.means.tolist()
            d["diffs"] = self.diffs.tolist()
        return d


def bland_altman(p, z: float = LOA_Z) -> BlandAltman:
    """Differences are model minus truth; limits are mean_diff +/- z sd_diff."""
    x, y = _check_pair(p, minimum=2)
    diffs = x - y
    md, sd = mean_sd(diffs)
    return BlandAltman(md, sd, md - z * sd, md + z * sd, 0.5 * (x + y), diffs)


@dataclass
class SeriesSummary:
    label: str
    n: int
    min: float
    max: float
    mean: float
    sd: float
    W: float
    p_sw: float
    normal: bool


def summarize(s, alpha: float = ALPHA) -> SeriesSummary:
    s = as_series(s)
    x = s.array
    mean, sd = mean_sd(s)
    W, p = shapiro_wilk(s)
    return SeriesSummary(s.label, x.size, float(x.min()), float(x.max()), mean, sd, W, p, p > alpha)


@dataclass
class AgreementReport:
    model: SeriesSummary
    truth: SeriesSummary
    method: str                 # "Pearson" or "Spearman"
    coefficient: float
    p_value: float
    bland_altman: BlandAltman
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    alpha: float = ALPHA

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "series": {"model": asdict(self.model), "truth": asdict(self.truth)},
            "correlation": {"method": self.method, "coefficient": self.coefficient,
                            "p": self.p_value},
            "bland_altman": self.bland_altman.to_dict(),
            "histogram": {"counts": self.hist_counts.tolist(),
                          "edges": self.hist_edges.tolist()},
        }


def choose_correlation(p_model: float, p_truth: float, alpha: float = ALPHA) -> str:
    """Pearson only when neither series departs from normality at ``alpha``."""
    return "Pearson" if p_model > alpha and p_truth > alpha else "Spearman"


def agreement_report(p, alpha: float = ALPHA, bins: int | None = None) -> AgreementReport:
    p = as_pair(p)
    if len(p) < 3:
        raise TooFewObservations(f"agreement report needs at least 3 pairs, got {len(p)}")
    sm, st = summarize(p.model, alpha), summarize(p.truth, alpha)
    method = choose_correlation(sm.p_sw, st.p_sw, alpha)
    coef, pv = (pearson if method == "Pearson" else spearman)(p)
    ba = bland_altman(p)
    counts, edges = histogram(ba.diffs, bins)
    return AgreementReport(sm, st, method, coef, pv, ba, counts, edges, alpha)


def paired_from_columns(model: Sequence[float], truth: Sequence[float],
                        label: str = "") -> PairedSeries:
    return PairedSeries(Series(tuple(model), f"{label} model".strip()),
                        Series(tuple(truth), f"{label} truth".strip()))
