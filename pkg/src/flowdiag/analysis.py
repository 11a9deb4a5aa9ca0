"""Statistical analysis of (active flows, aggregate rate) samples.

The central object is the utilization curve: mean aggregate rate per bin of
active-flow count.  On a healthy link the curve starts as a straight line
through the origin, ``B = b * N`` with ``b`` the mean per-flow performance;
the line breaks away once the link saturates.  This module bins samples,
fits the linear operating region, sizes the Gaussian confidence envelope
``B = b * (N +/- alpha * A(eps) * sqrt(N))`` around it, and offers the
supporting tests (per-bin normality of flow performance, the
sigma-versus-sqrt(N) correlation) plus cross-link comparison.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from .errors import (
    ConfigError,
    DegenerateDataError,
    DegenerateFitError,
    InvalidModelError,
    UndefinedCorrelationError,
)
from .model import BinStats, RegionFit, TrafficSample

__all__ = [
    "STREAMING_RATE_BPS",
    "BinSpec",
    "ChiSquareResult",
    "ComparisonEntry",
    "ComparisonReport",
    "auto_bin_spec",
    "assign_bins",
    "bin_by_flow_count",
    "fit_operational_region",
    "estimate_alpha",
    "analyze_bins",
    "confidence_interval",
    "normal_quantile",
    "normality_test",
    "chi_square_critical",
    "sigma_sqrtn_correlation",
    "compare_networks",
    "fit_to_dict",
    "fit_from_dict",
]

# A link is useful for streaming media once the mean per-flow rate clears
# this bar (10 kbit/s).
STREAMING_RATE_BPS = 10_000.0

_MIN_EXPECTED_PER_CELL = 5.0  # classic Pearson rule of thumb
_MIN_VALUES_FOR_TEST = 30
_RESIDUAL_SLACK = 1e-9  # relative float tolerance in the region residual test


# --------------------------------------------------------------------------
# binning
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BinSpec:
    """Bin layout for grouping samples by active-flow count.

    ``edges`` are strictly ascending boundaries: ``m`` edges define ``m - 1``
    half-open bins ``[edges[i], edges[i+1])``.  The final edge may be
    ``math.inf`` to leave the last bin unbounded.  Bins holding fewer than
    ``min_samples`` samples are flagged ``enough_data=False`` and excluded
    from fitting.
    """

    edges: tuple[float, ...]
    min_samples: int = 30

    def __post_init__(self) -> None:
        if len(self.edges) < 2:
            raise ConfigError(f"edges needs at least two boundaries, got {self.edges}")
        if any(not e2 > e1 for e1, e2 in zip(self.edges, self.edges[1:])):
            raise ConfigError(f"edges must be strictly ascending, got {self.edges}")
        if any(math.isnan(e) for e in self.edges):
            raise ConfigError("edges must not contain NaN")
        if self.min_samples < 2:
            raise ConfigError(f"min_samples must be >= 2, got {self.min_samples}")


def auto_bin_spec(samples: list[TrafficSample], min_samples: int = 30) -> BinSpec:
    """Decile-based bin layout for the observed flow counts.

    Edges start at the decile boundaries of the flow counts (last bin
    unbounded) and adjacent bins are merged until every bin holds at least
    ``min_samples`` samples.
    """
    if not samples:
        raise DegenerateDataError("cannot derive bins from an empty sample list")
    ns = np.array([s.active_flows for s in samples], dtype=float)
    quantiles = np.quantile(ns, np.linspace(0.0, 0.9, 10))
    edges = sorted(set(float(q) for q in quantiles))
    edges.append(math.inf)
    if len(edges) < 2:
        edges = [float(ns.min()), math.inf]

    def occupancy(bounds: list[float]) -> np.ndarray:
        idx = np.searchsorted(bounds, ns, side="right") - 1
        valid = (idx >= 0) & (idx < len(bounds) - 1)
        return np.bincount(idx[valid], minlength=len(bounds) - 1)

    while len(edges) > 2:
        counts = occupancy(edges)
        lean = np.where(counts < min_samples)[0]
        if lean.size == 0:
            break
        first = int(lean[0])
        # Merging drops the boundary between the lean bin and a neighbour.
        drop = first + 1 if first + 1 < len(edges) - 1 else first
        del edges[drop]
    return BinSpec(edges=tuple(edges), min_samples=min_samples)


def assign_bins(samples: list[TrafficSample], spec: BinSpec) -> np.ndarray:
    """Bin index per sample (-1 when the flow count is outside all bins)."""
    ns = np.array([s.active_flows for s in samples], dtype=float)
    edges = np.array(spec.edges)
    idx = np.searchsorted(edges, ns, side="right") - 1
    idx[(idx < 0) | (idx >= len(edges) - 1)] = -1
    # searchsorted(side="right") puts a count equal to an upper edge into the
    # next bin, which is exactly the half-open [lo, hi) convention.
    return idx


def bin_by_flow_count(samples: list[TrafficSample], spec: BinSpec) -> list[BinStats]:
    """Group samples into flow-count bins and compute per-bin statistics.

    Mean and sample standard deviation (ddof=1, two-pass) are computed for
    the aggregate rate and for the per-sample flow performance ``B / N``;
    zero-flow samples contribute to the rate statistics but are structurally
    excluded from the performance statistics (no division by zero).  Empty
    bins are dropped; bins below ``spec.min_samples`` come back flagged
    ``enough_data=False``.  ``bin_index`` numbers the emitted bins.
    """
    idx = assign_bins(samples, spec)
    if len(samples) and not np.any(idx >= 0):
        warnings.warn("all samples fall outside the configured bin edges", stacklevel=2)
    ns = np.array([s.active_flows for s in samples], dtype=float)
    rates = np.array([s.total_rate for s in samples], dtype=float)
    out: list[BinStats] = []
    for position in range(len(spec.edges) - 1):
        member = idx == position
        count = int(member.sum())
        if count == 0:
            continue
        bin_ns = ns[member]
        bin_rates = rates[member]
        with_flows = bin_ns > 0
        perf = bin_rates[with_flows] / bin_ns[with_flows]
        out.append(
            BinStats(
                bin_index=len(out),
                n_lo=float(spec.edges[position]),
                n_hi=float(spec.edges[position + 1]),
                mean_n=float(bin_ns.mean()),
                mean_rate=float(bin_rates.mean()),
                sigma_rate=_sample_std(bin_rates),
                mean_perf=float(perf.mean()) if perf.size else math.nan,
                sigma_perf=_sample_std(perf),
                sample_count=count,
                enough_data=count >= spec.min_samples,
            )
        )
    return out


def _sample_std(values: np.ndarray) -> float:
    if values.size < 2:
        return math.nan
    return float(values.std(ddof=1))


# --------------------------------------------------------------------------
# operating-region fit and envelope
# --------------------------------------------------------------------------


def _through_origin_slope(bins: list[BinStats]) -> float:
    num = sum(b.mean_n * b.mean_rate for b in bins)
    den = sum(b.mean_n**2 for b in bins)
    return num / den


def _within_band(stats: BinStats, slope: float, residual_k: float) -> bool:
    predicted = slope * stats.mean_n
    slack = _RESIDUAL_SLACK * max(abs(stats.mean_rate), abs(predicted))
    return abs(stats.mean_rate - predicted) <= residual_k * stats.sigma_rate + slack


def fit_operational_region(
    bins: list[BinStats], *, epsilon: float = 0.05, residual_k: float = 1.0
) -> RegionFit:
    """Fit the linear operating region of the utilization curve.

    Bins (ordered by mean flow count) are swept front to back: a line
    through the origin is fitted to the first two usable bins, and the
    region grows while the next bin's mean rate stays within ``residual_k``
    sample standard deviations of the current line, refitting after every
    inclusion.  The returned fit carries ``alpha = 0``; size the envelope
    with :func:`estimate_alpha` (or use :func:`analyze_bins`).

    Raises :class:`DegenerateFitError` when no two leading bins agree on a
    line — manual bin edges or more data are needed in that case.
    """
    if not 0 < epsilon < 1:
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    if not residual_k > 0:
        raise ConfigError(f"residual_k must be positive, got {residual_k}")
    usable = [
        b
        for b in sorted(bins, key=lambda s: s.mean_n)
        if b.enough_data and b.mean_n > 0 and not math.isnan(b.sigma_rate)
    ]
    if len(usable) < 2:
        raise DegenerateFitError(
            "need at least two bins with usable statistics to fit a region; "
            "supply manual edges or more samples"
        )
    region = usable[:2]
    slope = _through_origin_slope(region)
    if not all(_within_band(b, slope, residual_k) for b in region):
        raise DegenerateFitError(
            "the two leading bins do not fit a line through the origin within "
            f"{residual_k} sigma; supply manual edges or more samples"
        )
    for candidate in usable[2:]:
        if not _within_band(candidate, slope, residual_k):
            break
        region.append(candidate)
        slope = _through_origin_slope(region)
    return RegionFit(
        slope_perf=slope,
        threshold_n=region[-1].n_hi,
        alpha=0.0,
        epsilon=epsilon,
        quantile=normal_quantile(epsilon),
        # Membership is what matters; sort so the result is valid even when
        # the caller's bin indices are not in mean_n order.
        region_bins=tuple(sorted(b.bin_index for b in region)),
    )


def estimate_alpha(
    bins: list[BinStats], slope_perf: float, epsilon: float = 0.05
) -> float:
    """Envelope width so that ``B = b * (N +/- alpha * A(eps) * sqrt(N))``.

    Every valid bin contributes ``sigma_rate / (A(eps) * b * sqrt(mean_n))``
    and ``alpha`` is their arithmetic mean over all valid bins, not only the
    operating region.
    """
    if not (slope_perf > 0 and math.isfinite(slope_perf)):
        raise InvalidModelError(f"slope_perf must be positive and finite, got {slope_perf}")
    quantile = normal_quantile(epsilon)
    valid = [
        b
        for b in bins
        if b.enough_data and b.mean_n > 0 and not math.isnan(b.sigma_rate)
    ]
    if not valid:
        raise DegenerateDataError("no bins with usable sigma statistics")
    ratios = [
        b.sigma_rate / (quantile * slope_perf * math.sqrt(b.mean_n)) for b in valid
    ]
    return float(np.mean(ratios))


def analyze_bins(
    bins: list[BinStats], *, epsilon: float = 0.05, residual_k: float = 1.0
) -> RegionFit:
    """Region fit with the envelope width filled in — the one-call pipeline."""
    fit = fit_operational_region(bins, epsilon=epsilon, residual_k=residual_k)
    alpha = estimate_alpha(bins, fit.slope_perf, epsilon)
    return dataclasses.replace(fit, alpha=alpha)


def confidence_interval(
    fit: RegionFit, n: float, quantile: float | None = None
) -> tuple[float, float]:
    """Envelope bounds for the aggregate rate at ``n`` active flows.

    Returns ``slope * (n -/+ alpha * quantile * sqrt(n))`` with the lower
    bound clamped at zero.  ``quantile`` overrides the fit's own quantile
    when a detector runs at a different confidence level.
    """
    if not n >= 0:
        raise ValueError(f"n must be >= 0, got {n}")
    q = fit.quantile if quantile is None else quantile
    half_width = fit.alpha * q * math.sqrt(n)
    lower = max(fit.slope_perf * (n - half_width), 0.0)
    upper = fit.slope_perf * (n + half_width)
    return lower, upper


# --------------------------------------------------------------------------
# normal quantile (rational approximation)
# --------------------------------------------------------------------------

# Coefficients of the standard rational approximation of the inverse normal
# CDF (relative error below 1.2e-9 everywhere), polished by one Halley step
# against erfc, which brings the absolute error to the few-ulp level.
_ICDF_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_ICDF_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_ICDF_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_ICDF_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
)
_ICDF_SPLIT = 0.02425


def _inv_norm_cdf(p: float) -> float:
    """Inverse standard-normal CDF for 0 < p < 1."""
    a, b, c, d = _ICDF_A, _ICDF_B, _ICDF_C, _ICDF_D
    if p < _ICDF_SPLIT:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= 1.0 - _ICDF_SPLIT:
        q = p - 0.5
        r = q * q
        x = (
            (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
        )
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    # One Halley refinement against the exact CDF (via erfc).
    error = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = error * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def normal_quantile(epsilon: float) -> float:
    """Two-sided standard-normal quantile ``A(eps)``.

    A standard normal variable falls outside ``[-A, A]`` with probability
    ``epsilon``; e.g. ``A(0.05) = 1.96``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return -_inv_norm_cdf(epsilon / 2.0)


# --------------------------------------------------------------------------
# Pearson chi-square normality test
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChiSquareResult:
    """Outcome of the Pearson normality test on one value set.

    ``observed`` / ``expected`` are the cell counts after merging, so the
    statistic can be recomputed independently.  When ``note`` is non-empty
    (``"not enough data"``) the test was not performed and ``passed`` is
    ``None``.
    """

    statistic: float
    critical: float
    dof: int
    histogram_bins: int
    observed: tuple[int, ...] = ()
    expected: tuple[float, ...] = ()
    note: str = ""

    @property
    def passed(self) -> bool | None:
        if self.note:
            return None
        return self.statistic <= self.critical


def chi_square_critical(level: float, dof: int) -> float:
    """Upper critical value of the chi-square law.

    Computed from the (inverse) regularized incomplete gamma function —
    no lookup table, so any level and any dof work.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    return float(_scipy_stats.chi2.ppf(level, dof))


def normality_test(
    values, level: float = 0.95, histogram_bins: int = 20
) -> ChiSquareResult:
    """Pearson chi-square test of normality with fitted mean and sigma.

    Values are counted into ``histogram_bins`` equal-probability cells under
    the fitted normal law; cells with expected count below five are merged
    with their neighbours; the statistic ``sum((O - E)^2 / E)`` is compared
    against the chi-square critical value at ``level`` with
    ``cells - 3`` degrees of freedom (two fitted parameters).  Fewer than 30
    values — or too few cells after merging — yield a "not enough data"
    result instead of a verdict, mirroring how sparse bins are reported.
    """
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must be in (0, 1), got {level}")
    if histogram_bins < 4:
        raise ConfigError(f"histogram_bins must be >= 4, got {histogram_bins}")
    data = np.asarray(values, dtype=float)
    if data.ndim != 1:
        raise ConfigError(f"values must be one-dimensional, got shape {data.shape}")
    if data.size < _MIN_VALUES_FOR_TEST:
        return ChiSquareResult(
            statistic=math.nan,
            critical=math.nan,
            dof=0,
            histogram_bins=histogram_bins,
            note="not enough data",
        )
    mean = float(data.mean())
    sigma = float(data.std(ddof=1))
    if sigma == 0.0:
        raise DegenerateDataError("values have zero variance; normality test undefined")

    cuts = np.array(
        [mean + sigma * _inv_norm_cdf(i / histogram_bins) for i in range(1, histogram_bins)]
    )
    observed = np.bincount(np.searchsorted(cuts, data), minlength=histogram_bins)
    expected = np.full(histogram_bins, data.size / histogram_bins)
    obs, exp = _merge_lean_cells(list(observed), list(expected))
    dof = len(obs) - 3
    if dof < 1:
        return ChiSquareResult(
            statistic=math.nan,
            critical=math.nan,
            dof=0,
            histogram_bins=histogram_bins,
            note="not enough data",
        )
    statistic = float(sum((o - e) ** 2 / e for o, e in zip(obs, exp)))
    return ChiSquareResult(
        statistic=statistic,
        critical=chi_square_critical(level, dof),
        dof=dof,
        histogram_bins=histogram_bins,
        observed=tuple(int(o) for o in obs),
        expected=tuple(float(e) for e in exp),
    )


def _merge_lean_cells(obs: list[float], exp: list[float]) -> tuple[list[float], list[float]]:
    """Merge cells with expected count < 5 into a neighbour (left to right)."""
    i = 0
    while i < len(obs) and len(obs) > 1:
        if exp[i] < _MIN_EXPECTED_PER_CELL:
            j = i + 1 if i + 1 < len(obs) else i - 1
            obs[j] += obs[i]
            exp[j] += exp[i]
            del obs[i], exp[i]
            i = max(i - 1, 0) if j < i else i  # re-examine the merged cell
        else:
            i += 1
    return obs, exp


# --------------------------------------------------------------------------
# supporting statistics and comparison
# --------------------------------------------------------------------------


def sigma_sqrtn_correlation(bins: list[BinStats]) -> float:
    """Pearson correlation between per-bin sigma(B) and sqrt(mean N).

    On a healthy link the rate fluctuation grows like the square root of the
    flow count, so this correlation should be strongly positive.
    """
    valid = [
        b
        for b in bins
        if b.enough_data and b.mean_n > 0 and not math.isnan(b.sigma_rate)
    ]
    if len(valid) < 3:
        raise DegenerateDataError(
            f"need at least 3 bins with usable sigma, got {len(valid)}"
        )
    x = np.array([math.sqrt(b.mean_n) for b in valid])
    y = np.array([b.sigma_rate for b in valid])
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation undefined: a variable has zero range")
    return float(np.corrcoef(x, y)[0, 1])


@dataclass(frozen=True)
class ComparisonEntry:
    """One link in a cross-network comparison."""

    label: str
    mean_flow_perf: float  # bit/s per flow (the fitted slope)
    streaming_capable: bool


@dataclass(frozen=True)
class ComparisonReport:
    """Links ranked by mean per-flow performance (best first)."""

    entries: tuple[ComparisonEntry, ...]

    @property
    def ranking(self) -> tuple[str, ...]:
        return tuple(entry.label for entry in self.entries)


def compare_networks(models: list[tuple[str, RegionFit]]) -> ComparisonReport:
    """Rank fitted links by per-flow performance, ties broken by label."""
    if not models:
        raise ConfigError("compare needs at least one fitted model")
    labels = [label for label, _ in models]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate labels in comparison: {labels}")
    entries = [
        ComparisonEntry(
            label=label,
            mean_flow_perf=fit.slope_perf,
            streaming_capable=fit.slope_perf >= STREAMING_RATE_BPS,
        )
        for label, fit in models
    ]
    entries.sort(key=lambda e: (-e.mean_flow_perf, e.label))
    return ComparisonReport(entries=tuple(entries))


# --------------------------------------------------------------------------
# model (de)serialization
# --------------------------------------------------------------------------


def fit_to_dict(fit: RegionFit) -> dict:
    """JSON-ready form of a region fit (``threshold_n`` of inf becomes null)."""
    return {
        "slope_perf": fit.slope_perf,
        "threshold_n": None if math.isinf(fit.threshold_n) else fit.threshold_n,
        "alpha": fit.alpha,
        "epsilon": fit.epsilon,
        "quantile": fit.quantile,
        "region_bins": list(fit.region_bins),
    }


def fit_from_dict(payload: dict) -> RegionFit:
    """Inverse of :func:`fit_to_dict`; raises :class:`InvalidModelError`."""
    if not isinstance(payload, dict):
        raise InvalidModelError(f"model payload must be an object, got {type(payload).__name__}")
    required = {"slope_perf", "threshold_n", "alpha", "epsilon", "quantile", "region_bins"}
    missing = required - payload.keys()
    if missing:
        raise InvalidModelError(f"model payload is missing fields: {sorted(missing)}")
    threshold = payload["threshold_n"]
    try:
        return RegionFit(
            slope_perf=float(payload["slope_perf"]),
            threshold_n=math.inf if threshold is None else float(threshold),
            alpha=float(payload["alpha"]),
            epsilon=float(payload["epsilon"]),
            quantile=float(payload["quantile"]),
            region_bins=tuple(int(i) for i in payload["region_bins"]),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidModelError(f"model payload failed validation: {exc}") from exc
