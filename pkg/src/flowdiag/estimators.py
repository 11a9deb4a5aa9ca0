"""Scikit-learn estimator wrappers around the region fit and detector.

These adapters expose the toolkit through the familiar ``fit`` /
``predict`` protocol so the models drop into pipelines, grid search and
``clone`` without glue code.  The underlying statistics live in
:mod:`flowdiag.analysis` and :mod:`flowdiag.detect`; the wrappers only
translate array-shaped input into samples and back.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import (
    BinSpec,
    analyze_bins,
    auto_bin_spec,
    bin_by_flow_count,
    confidence_interval,
)
from .detect import DetectorConfig, classify_state, detect_anomalies
from .errors import ConfigError
from .model import RegionFit, TrafficSample

__all__ = ["OperationalRegionModel", "EnvelopeAnomalyDetector"]


def _samples_from_arrays(n, rate, timestamps=None) -> list[TrafficSample]:
    if timestamps is None:
        timestamps = np.arange(len(n), dtype=float)
    return [
        TrafficSample(timestamp=float(t), active_flows=int(round(c)), total_rate=float(b))
        for t, c, b in zip(timestamps, n, rate)
    ]


def _resolve_bin_spec(samples, edges, min_samples) -> BinSpec:
    if edges is None:
        return auto_bin_spec(samples, min_samples=min_samples)
    return BinSpec(edges=tuple(float(e) for e in edges), min_samples=min_samples)


class OperationalRegionModel(RegressorMixin, BaseEstimator):
    """Linear operating-region regressor for aggregate link rate.

    ``fit`` takes ``X`` of shape ``(n, 1)`` holding active-flow counts and
    ``y`` the matching aggregate rates; samples are binned by flow count,
    the through-origin line of the low-load region is fitted and the
    confidence envelope is sized.  ``predict`` returns the expected rate;
    ``predict_interval`` the envelope; ``classify`` the per-sample link
    state labels (``"operational"`` etc.).

    Parameters follow the scikit-learn convention (stored unmodified, work
    happens in ``fit``):

    edges : sequence of float or None
        Bin boundaries; ``None`` derives decile bins from the data.
    min_samples : int
        Occupancy below which a bin is ignored by the fit.
    epsilon : float
        Two-sided tail probability of the envelope.
    residual_k : float
        Width, in per-bin sigmas, of the region-growing residual test.
    """

    def __init__(self, edges=None, min_samples=30, epsilon=0.05, residual_k=1.0):
        self.edges = edges
        self.min_samples = min_samples
        self.epsilon = epsilon
        self.residual_k = residual_k

    def fit(self, X, y):
        X = check_array(X, ensure_2d=True)
        y = check_array(y, ensure_2d=False)
        if X.shape[1] != 1:
            raise ValueError(f"X must have exactly one column, got {X.shape[1]}")
        if len(y) != X.shape[0]:
            raise ValueError(f"X and y disagree in length: {X.shape[0]} vs {len(y)}")
        samples = _samples_from_arrays(X[:, 0], y)
        spec = _resolve_bin_spec(samples, self.edges, self.min_samples)
        self.bins_ = bin_by_flow_count(samples, spec)
        self.fit_ = analyze_bins(
            self.bins_, epsilon=self.epsilon, residual_k=self.residual_k
        )
        self.slope_ = self.fit_.slope_perf
        self.alpha_ = self.fit_.alpha
        self.threshold_ = self.fit_.threshold_n
        self.quantile_ = self.fit_.quantile
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        X = check_array(X, ensure_2d=True)
        return self.slope_ * X[:, 0]

    def predict_interval(self, X):
        """Envelope bounds per row; shape ``(n, 2)`` of (lower, upper)."""
        check_is_fitted(self, "fit_")
        X = check_array(X, ensure_2d=True)
        return np.array(
            [confidence_interval(self.fit_, float(n)) for n in X[:, 0]]
        )

    def classify(self, X, y):
        """Link-state label per sample (values of ``NetworkState``)."""
        check_is_fitted(self, "fit_")
        X = check_array(X, ensure_2d=True)
        samples = _samples_from_arrays(X[:, 0], y)
        return np.array([classify_state(s, self.fit_).value for s in samples])


class EnvelopeAnomalyDetector(OutlierMixin, BaseEstimator):
    """Outlier detector flagging samples outside the confidence envelope.

    ``X`` has two columns: active-flow count and aggregate rate.  With no
    pre-fitted ``region`` the operating region is learned from the training
    data itself.  ``predict`` follows the scikit-learn outlier convention:
    ``-1`` for samples inside anomalous runs, ``+1`` elsewhere.  The richer
    event view (run boundaries, directions) is available from
    :meth:`events`.

    Parameters
    ----------
    region : RegionFit or None
        Pre-fitted operating region; ``None`` learns one in ``fit``.
    consecutive : int
        Run length required before samples count as anomalous.
    epsilon : float
        Envelope tail probability used at detection time.
    poll_period : float or None
        Nominal sample spacing; longer gaps split runs.
    edges, min_samples, residual_k :
        Binning and fit parameters used only when ``region`` is ``None``.
    """

    def __init__(
        self,
        region=None,
        consecutive=2,
        epsilon=0.05,
        poll_period=None,
        edges=None,
        min_samples=30,
        residual_k=1.0,
    ):
        self.region = region
        self.consecutive = consecutive
        self.epsilon = epsilon
        self.poll_period = poll_period
        self.edges = edges
        self.min_samples = min_samples
        self.residual_k = residual_k

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 2:
            raise ValueError(
                f"X must have two columns (active flows, rate), got {X.shape[1]}"
            )
        if self.region is not None:
            if not isinstance(self.region, RegionFit):
                raise ConfigError(
                    f"region must be a RegionFit, got {type(self.region).__name__}"
                )
            self.region_ = self.region
        else:
            samples = _samples_from_arrays(X[:, 0], X[:, 1])
            spec = _resolve_bin_spec(samples, self.edges, self.min_samples)
            self.region_ = analyze_bins(
                bin_by_flow_count(samples, spec),
                epsilon=self.epsilon,
                residual_k=self.residual_k,
            )
        self.config_ = DetectorConfig(
            fit=self.region_,
            consecutive_required=self.consecutive,
            epsilon=self.epsilon,
            poll_period=self.poll_period,
        )
        return self

    def _to_samples(self, X, timestamps):
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 2:
            raise ValueError(
                f"X must have two columns (active flows, rate), got {X.shape[1]}"
            )
        return _samples_from_arrays(X[:, 0], X[:, 1], timestamps)

    def events(self, X, timestamps=None):
        """Detected anomaly events for the given samples."""
        check_is_fitted(self, "config_")
        return detect_anomalies(self._to_samples(X, timestamps), self.config_)

    def predict(self, X, timestamps=None):
        """Outlier labels per row: ``-1`` inside an event, ``+1`` otherwise."""
        check_is_fitted(self, "config_")
        samples = self._to_samples(X, timestamps)
        flagged = {
            (s.timestamp, s.active_flows, s.total_rate)
            for event in detect_anomalies(samples, self.config_)
            for s in event.samples
        }
        return np.array(
            [
                -1 if (s.timestamp, s.active_flows, s.total_rate) in flagged else 1
                for s in samples
            ]
        )

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)
