"""Shared fixtures: small deterministic sample sets and fitted regions."""

import math

import pytest

from flowdiag import (
    BinSpec,
    RegionFit,
    TrafficSample,
    analyze_bins,
    bin_by_flow_count,
    load_reference_dataset,
    normal_quantile,
)


def brute_force_events(samples, config):
    """Independent anomaly-detection oracle: side per sample, then run scan.

    Recomputes the envelope from first principles and groups runs with an
    explicit two-pointer sweep, deliberately sharing no code with
    ``detect_anomalies``.  Returns (start, end, direction, length) tuples.
    """
    q = normal_quantile(config.epsilon)
    sides = []
    for s in samples:
        half = config.fit.alpha * q * math.sqrt(s.active_flows)
        lo = max(config.fit.slope_perf * (s.active_flows - half), 0.0)
        hi = config.fit.slope_perf * (s.active_flows + half)
        sides.append("above" if s.total_rate > hi else "below" if s.total_rate < lo else None)
    events = []
    i = 0
    while i < len(samples):
        if sides[i] is None:
            i += 1
            continue
        j = i
        while (
            j + 1 < len(samples)
            and sides[j + 1] == sides[i]
            and not (
                config.poll_period is not None
                and samples[j + 1].timestamp - samples[j].timestamp > config.poll_period
            )
        ):
            j += 1
        if j - i + 1 >= config.consecutive_required:
            events.append((samples[i].timestamp, samples[j].timestamp, sides[i], j - i + 1))
        i = j + 1
    return events


def make_samples(rows):
    """Build TrafficSamples from (timestamp, active_flows, rate) tuples."""
    return [TrafficSample(timestamp=t, active_flows=n, total_rate=b) for t, n, b in rows]


def linear_series(slope, counts, start=0.0, step=1.0):
    """Perfectly linear samples B = slope * N at unit spacing."""
    return [
        TrafficSample(timestamp=start + k * step, active_flows=n, total_rate=slope * n)
        for k, n in enumerate(counts)
    ]


@pytest.fixture(scope="session")
def dataset1_bins():
    return load_reference_dataset("dataset1")


@pytest.fixture(scope="session")
def dataset2_bins():
    return load_reference_dataset("dataset2")


@pytest.fixture(scope="session")
def dataset1_fit(dataset1_bins):
    return analyze_bins(dataset1_bins)


@pytest.fixture()
def simple_fit():
    """A small, exactly known region fit: slope 1000, alpha 2, eps 0.05."""
    return RegionFit(
        slope_perf=1000.0,
        threshold_n=100.0,
        alpha=2.0,
        epsilon=0.05,
        quantile=normal_quantile(0.05),
        region_bins=(0, 1),
    )


@pytest.fixture()
def noiseless_bins():
    """Bins from a noiseless linear series; slope exactly 2000."""
    counts = [5, 6, 7, 15, 16, 17, 25, 26, 27, 35, 36, 37] * 3
    samples = linear_series(2000.0, counts)
    spec = BinSpec(edges=(0.0, 10.0, 20.0, 30.0, 40.0), min_samples=3)
    return bin_by_flow_count(samples, spec)
