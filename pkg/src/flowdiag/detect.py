"""Online link-state classification and envelope-based anomaly detection.

A fitted operating region (:class:`~flowdiag.model.RegionFit`) turns a
stream of (active flows, aggregate rate) samples into operational verdicts:

* :func:`classify_state` labels one sample — operational while the flow
  count is at or below the fitted threshold, and beyond it moderately
  loaded or overloaded depending on whether the rate still clears the
  envelope floor at the threshold.
* :func:`detect_anomalies` flags runs of consecutive samples whose rate
  leaves the confidence envelope; isolated excursions are ignored, since a
  single sample outside the band is expected at the configured rate.
* :func:`cluster_summary` condenses events that hit overlapping flow-count
  ranges in the same direction, which is what an operator scans first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ConfigError
from .model import AnomalyEvent, Direction, NetworkState, RegionFit, TrafficSample
from .analysis import confidence_interval, normal_quantile

__all__ = [
    "DetectorConfig",
    "AnomalyCluster",
    "classify_state",
    "detect_anomalies",
    "cluster_summary",
    "events_to_dicts",
    "write_events_json",
    "write_alert_log",
]


@dataclass(frozen=True)
class DetectorConfig:
    """Tuning knobs for :func:`detect_anomalies`.

    ``consecutive_required`` is the run length needed to raise an event
    (at least 2 — one stray sample is noise by construction).  ``epsilon``
    sets the envelope confidence level for detection, independently of the
    level the fit was made at.  ``poll_period``, when given, is the nominal
    sample spacing: a gap longer than that breaks a run, so an excursion
    never spans a polling outage.
    """

    fit: RegionFit
    consecutive_required: int = 2
    epsilon: float = 0.05
    poll_period: float | None = None

    def __post_init__(self) -> None:
        if self.consecutive_required < 2:
            raise ConfigError(
                f"consecutive_required must be >= 2, got {self.consecutive_required}"
            )
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.poll_period is not None and not self.poll_period > 0:
            raise ConfigError(f"poll_period must be positive, got {self.poll_period}")


def classify_state(sample: TrafficSample, fit: RegionFit) -> NetworkState:
    """Label one sample as operational / moderately loaded / overloaded.

    At or below the fitted flow-count threshold the link is operational.
    Beyond it, the verdict depends on whether the aggregate rate still
    reaches the envelope floor evaluated at the threshold itself: per-flow
    performance has left the linear law by then, so the floor at the edge
    of the fitted region is the last trustworthy reference level.  Rates at
    or above that floor mean the link still moves traffic (moderately
    loaded); below it the link has collapsed (overloaded).
    """
    if sample.active_flows <= fit.threshold_n:
        return NetworkState.OPERATIONAL
    floor, _ = confidence_interval(fit, fit.threshold_n)
    if sample.total_rate >= floor:
        return NetworkState.MODERATELY_LOADED
    return NetworkState.OVERLOADED


def detect_anomalies(
    samples: list[TrafficSample], config: DetectorConfig
) -> list[AnomalyEvent]:
    """Find maximal runs of samples outside the confidence envelope.

    Each sample is compared against the envelope at its own flow count.
    Consecutive samples on the same side of the band form a run; runs of at
    least ``consecutive_required`` samples become events.  Zero-flow
    samples have a degenerate band ``[0, 0]``, so any traffic on a link
    reporting no flows is immediately suspect (above).  Gaps longer than
    ``poll_period`` split runs.  Events come back ordered by start time.
    """
    quantile = normal_quantile(config.epsilon)
    events: list[AnomalyEvent] = []
    run: list[TrafficSample] = []
    run_side: Direction | None = None

    def flush() -> None:
        if run_side is not None and len(run) >= config.consecutive_required:
            events.append(
                AnomalyEvent(
                    start_time=run[0].timestamp,
                    end_time=run[-1].timestamp,
                    samples=tuple(run),
                    direction=run_side,
                )
            )

    previous: TrafficSample | None = None
    for sample in samples:
        if previous is not None and sample.timestamp <= previous.timestamp:
            raise ConfigError(
                "samples must be strictly increasing in time: "
                f"{sample.timestamp} after {previous.timestamp}"
            )
        gap_broken = (
            previous is not None
            and config.poll_period is not None
            and sample.timestamp - previous.timestamp > config.poll_period
        )
        lower, upper = confidence_interval(config.fit, sample.active_flows, quantile)
        if sample.total_rate > upper:
            side: Direction | None = Direction.ABOVE
        elif sample.total_rate < lower:
            side = Direction.BELOW
        else:
            side = None
        if gap_broken or side != run_side:
            flush()
            run = []
            run_side = side
        if side is not None:
            run.append(sample)
        previous = sample
    flush()
    return events


@dataclass(frozen=True)
class AnomalyCluster:
    """A group of same-direction events over overlapping flow-count ranges."""

    direction: Direction
    n_lo: float
    n_hi: float
    event_count: int
    sample_count: int
    mean_n: float
    mean_rate: float
    first_start: float
    last_end: float


def cluster_summary(events: list[AnomalyEvent]) -> list[AnomalyCluster]:
    """Merge events of one direction whose flow-count ranges overlap.

    Overlap is transitive: events A-B and B-C overlapping puts all three in
    one cluster even if A and C do not touch.  Clusters come back sorted by
    direction (above first) then by the low end of their range.
    """
    clusters: list[AnomalyCluster] = []
    for direction in (Direction.ABOVE, Direction.BELOW):
        ranged = []
        for event in events:
            if event.direction is not direction:
                continue
            counts = [s.active_flows for s in event.samples]
            ranged.append((min(counts), max(counts), event))
        ranged.sort(key=lambda item: (item[0], item[1]))
        group: list[tuple[float, float, AnomalyEvent]] = []
        group_hi = -math.inf
        for item in ranged:
            if group and item[0] > group_hi:
                clusters.append(_build_cluster(direction, group))
                group = []
                group_hi = -math.inf
            group.append(item)
            group_hi = max(group_hi, item[1])
        if group:
            clusters.append(_build_cluster(direction, group))
    return clusters


def _build_cluster(
    direction: Direction, group: list[tuple[float, float, AnomalyEvent]]
) -> AnomalyCluster:
    samples = [s for _, _, event in group for s in event.samples]
    return AnomalyCluster(
        direction=direction,
        n_lo=min(lo for lo, _, _ in group),
        n_hi=max(hi for _, hi, _ in group),
        event_count=len(group),
        sample_count=len(samples),
        mean_n=sum(s.active_flows for s in samples) / len(samples),
        mean_rate=sum(s.total_rate for s in samples) / len(samples),
        first_start=min(event.start_time for _, _, event in group),
        last_end=max(event.end_time for _, _, event in group),
    )


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def events_to_dicts(events: list[AnomalyEvent]) -> list[dict]:
    """JSON-ready form of detected events (samples inlined)."""
    return [
        {
            "start_time": event.start_time,
            "end_time": event.end_time,
            "direction": event.direction.value,
            "sample_count": len(event.samples),
            "samples": [
                {
                    "timestamp": s.timestamp,
                    "active_flows": s.active_flows,
                    "total_rate": s.total_rate,
                }
                for s in event.samples
            ],
        }
        for event in events
    ]


def write_events_json(events: list[AnomalyEvent], path) -> None:
    """Write detected events as a JSON document ``{"events": [...]}``."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump({"events": events_to_dicts(events)}, handle, indent=2)
        handle.write("\n")


def write_alert_log(events: list[AnomalyEvent], path) -> None:
    """Write one human-readable alert line per event.

    Format: ``ALERT <direction> start=<t0> end=<t1> samples=<k> mean_rate=<B>``.
    """
    with open(path, "w", encoding="utf-8") as handle:
        for event in events:
            mean_rate = sum(s.total_rate for s in event.samples) / len(event.samples)
            handle.write(
                f"ALERT {event.direction.value} start={event.start_time} "
                f"end={event.end_time} samples={len(event.samples)} "
                f"mean_rate={mean_rate}\n"
            )
