"""Core value types for flow-level link diagnostics.

Unit conventions
----------------
Internally everything is expressed in seconds and bits per second.  Megabit
conversions happen only at presentation boundaries (CSV headers, reports,
log lines); see :func:`mbps_to_bps` / :func:`bps_to_mbps`.

All types in this module are immutable value objects: they validate their
invariants on construction and can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "BITS_PER_MEGABIT",
    "mbps_to_bps",
    "bps_to_mbps",
    "RateShape",
    "NetworkState",
    "Direction",
    "FlowRecord",
    "TrafficSample",
    "BinStats",
    "RegionFit",
    "AnomalyEvent",
]

BITS_PER_MEGABIT = 1_000_000.0


def mbps_to_bps(value: float) -> float:
    """Convert a rate in Mbit/s to bit/s."""
    return value * BITS_PER_MEGABIT


def bps_to_mbps(value: float) -> float:
    """Convert a rate in bit/s to Mbit/s."""
    return value / BITS_PER_MEGABIT


class RateShape(Enum):
    """Shape of a flow's instantaneous rate over its lifetime.

    Only the rectangular shape (constant rate ``size / duration``) is
    implemented; the enum exists so richer shapes can be added without
    changing :class:`FlowRecord`.
    """

    RECTANGULAR = "rectangular"


class NetworkState(Enum):
    """Coarse health state of a link derived from one traffic sample."""

    OPERATIONAL = "operational"
    MODERATELY_LOADED = "moderately_loaded"
    OVERLOADED = "overloaded"


class Direction(Enum):
    """Side of the confidence envelope on which a deviation occurred."""

    ABOVE = "above"
    BELOW = "below"


# --------------------------------------------------------------------------
# flow and sample records
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class FlowRecord:
    """One transfer on the link.

    Attributes
    ----------
    arrival_time:
        Start of the transfer in seconds.  May be negative for flows seeded
        before the observation window to warm the system up.
    size:
        Total bits carried by the flow.
    duration:
        Lifetime of the flow in seconds.
    rate_shape:
        How the ``size`` is spread over the ``duration``.
    """

    arrival_time: float
    size: float
    duration: float
    rate_shape: RateShape = RateShape.RECTANGULAR

    def __post_init__(self) -> None:
        if not math.isfinite(self.arrival_time):
            raise ValueError(f"arrival_time must be finite, got {self.arrival_time}")
        if not (self.size > 0 and math.isfinite(self.size)):
            raise ValueError(f"size must be positive and finite, got {self.size}")
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ValueError(f"duration must be positive and finite, got {self.duration}")

    @property
    def end_time(self) -> float:
        """Instant at which the flow finishes."""
        return self.arrival_time + self.duration

    @property
    def nominal_rate(self) -> float:
        """Constant rate in bit/s for the rectangular shape."""
        return self.size / self.duration

    def active_at(self, t: float) -> bool:
        """Whether the flow is in progress at instant ``t`` (closed interval)."""
        return self.arrival_time <= t <= self.end_time


@dataclass(frozen=True, slots=True)
class TrafficSample:
    """One poll of the link: active-flow count and aggregate rate.

    ``total_rate`` is in bit/s.  ``flow_perf`` (the per-flow performance
    ``total_rate / active_flows``) is only defined when at least one flow
    is active; consumers must guard the zero-flow case.
    """

    timestamp: float
    active_flows: int
    total_rate: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.timestamp):
            raise ValueError(f"timestamp must be finite, got {self.timestamp}")
        if self.active_flows < 0 or self.active_flows != int(self.active_flows):
            raise ValueError(f"active_flows must be a non-negative integer, got {self.active_flows}")
        if not (self.total_rate >= 0 and math.isfinite(self.total_rate)):
            raise ValueError(f"total_rate must be >= 0 and finite, got {self.total_rate}")

    @property
    def flow_perf(self) -> float:
        """Mean per-flow rate ``total_rate / active_flows`` in bit/s."""
        if self.active_flows == 0:
            raise ValueError("flow_perf is undefined when active_flows == 0")
        return self.total_rate / self.active_flows


# --------------------------------------------------------------------------
# aggregated statistics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BinStats:
    """Statistics of all samples whose flow count fell into one bin.

    The bin covers flow counts in the half-open interval ``[n_lo, n_hi)``;
    ``n_hi`` may be ``math.inf`` for the last bin.  ``sigma_rate`` and
    ``sigma_perf`` are sample standard deviations (ddof=1) and are NaN when
    fewer than two samples contributed.  ``sample_count`` is ``None`` for
    bundled reference tables whose underlying sample counts were never
    published.  ``enough_data`` marks bins that met the configured minimum
    occupancy and may participate in region fitting.
    """

    bin_index: int
    n_lo: float
    n_hi: float
    mean_n: float
    mean_rate: float
    sigma_rate: float
    mean_perf: float
    sigma_perf: float
    sample_count: int | None
    enough_data: bool = True

    def __post_init__(self) -> None:
        if self.bin_index < 0:
            raise ValueError(f"bin_index must be >= 0, got {self.bin_index}")
        if not self.n_lo < self.n_hi:
            raise ValueError(f"bin bounds must satisfy n_lo < n_hi, got [{self.n_lo}, {self.n_hi})")
        if not (self.n_lo <= self.mean_n < self.n_hi):
            raise ValueError(
                f"mean_n {self.mean_n} outside bin [{self.n_lo}, {self.n_hi})"
            )
        if self.mean_rate < 0 or self.mean_perf < 0:
            raise ValueError("mean_rate and mean_perf must be >= 0")
        for name in ("sigma_rate", "sigma_perf"):
            value = getattr(self, name)
            if not math.isnan(value) and value < 0:
                raise ValueError(f"{name} must be >= 0 or NaN, got {value}")
        if self.sample_count is not None and self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1 when known, got {self.sample_count}")


@dataclass(frozen=True)
class RegionFit:
    """Fitted operating-region model of a link.

    ``slope_perf`` is the through-origin slope of mean rate against mean
    flow count (bit/s per flow); ``threshold_n`` is the flow count at which
    the linear region ends (may be ``math.inf`` when no bin broke away from
    the line).  The confidence envelope around the line is
    ``slope_perf * (n +/- alpha * quantile * sqrt(n))`` where ``quantile``
    is the two-sided standard-normal quantile of ``epsilon``.
    ``region_bins`` lists the indices of the bins inside the linear region.
    """

    slope_perf: float
    threshold_n: float
    alpha: float
    epsilon: float
    quantile: float
    region_bins: tuple[int, ...]

    def __post_init__(self) -> None:
        if not (self.slope_perf > 0 and math.isfinite(self.slope_perf)):
            raise ValueError(f"slope_perf must be positive and finite, got {self.slope_perf}")
        if not self.threshold_n > 0:
            raise ValueError(f"threshold_n must be positive, got {self.threshold_n}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not self.quantile > 0:
            raise ValueError(f"quantile must be positive, got {self.quantile}")
        if tuple(sorted(set(self.region_bins))) != tuple(self.region_bins):
            raise ValueError(f"region_bins must be sorted and unique, got {self.region_bins}")


@dataclass(frozen=True)
class AnomalyEvent:
    """A run of consecutive samples outside the confidence envelope.

    All samples in one event deviate on the same side (``direction``) and
    are consecutive in the input timeline; an event never mixes sides.
    """

    start_time: float
    end_time: float
    samples: tuple[TrafficSample, ...]
    direction: Direction

    def __post_init__(self) -> None:
        if len(self.samples) < 2:
            raise ValueError(f"an event needs >= 2 samples, got {len(self.samples)}")
        if not self.start_time <= self.end_time:
            raise ValueError("start_time must be <= end_time")
        if self.start_time != self.samples[0].timestamp or self.end_time != self.samples[-1].timestamp:
            raise ValueError("event times must match first/last sample timestamps")
