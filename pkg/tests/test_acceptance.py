"""Acceptance suite: ten end-to-end checks, one test per criterion.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line
per criterion.  Tolerances are stated inline next to each assertion.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from flowdiag import (
    BinSpec,
    ChiSquareResult,
    DetectorConfig,
    DistSpec,
    RegionFit,
    SimConfig,
    TrafficSample,
    analyze_bins,
    apply_overload,
    bin_by_flow_count,
    compare_networks,
    confidence_interval,
    detect_anomalies,
    estimate_alpha,
    fit_from_dict,
    generate_flows,
    load_reference_dataset,
    normal_quantile,
    normality_test,
    sample_traffic,
    sigma_sqrtn_correlation,
    theoretical_moments,
    time_average_stats,
)
from flowdiag.cli import main
from flowdiag.ingest import read_samples_csv, write_samples_csv

from conftest import brute_force_events


def _exp_exp_config(seed):
    return SimConfig(
        arrival_rate=100.0,
        size_dist=DistSpec(kind="exponential", mean=5e4),
        duration_dist=DistSpec(kind="exponential", mean=10.0),
        horizon=3600.0,
        seed=seed,
    )


def test_criterion_01_moment_validation():
    """Mean rate, mean flow count and rate variance match theory; < 30 s."""
    started = time.monotonic()
    rates, counts, variances, oracles = [], [], [], []
    for seed in range(20):
        config = _exp_exp_config(seed)
        flows = generate_flows(config)
        averages = time_average_stats(flows, config.horizon)
        rates.append(averages.mean_rate)
        counts.append(averages.mean_flows)
        variances.append(averages.var_rate)
        # Independent variance reference: the shot-noise variance is the
        # arrival-averaged size^2/duration, estimated from the very flows
        # the simulator produced (no closed form exists for exponential
        # durations, whose reciprocal moment diverges).
        oracles.append(
            sum(f.size**2 / f.duration for f in flows if 0 <= f.arrival_time < config.horizon)
            / config.horizon
        )
    mean_rate = float(np.mean(rates))
    mean_count = float(np.mean(counts))
    mean_var = float(np.mean(variances))
    mean_oracle = float(np.mean(oracles))
    assert abs(mean_rate - 5e6) / 5e6 < 0.02  # B within 2% of lambda E[S]
    assert abs(mean_count - 1000.0) / 1000.0 < 0.02  # N within 2% of lambda E[D]
    assert abs(mean_var - mean_oracle) / mean_oracle < 0.10  # var within 10%
    assert time.monotonic() - started < 30.0


def test_criterion_02_heavy_tail_littles_law():
    """Pareto durations (shape 2.5): mean flow count still matches theory."""
    counts = []
    for seed in range(20):
        config = SimConfig(
            arrival_rate=100.0,
            size_dist=DistSpec(kind="exponential", mean=5e4),
            duration_dist=DistSpec(kind="pareto", mean=10.0, shape=2.5),
            horizon=3600.0,
            seed=seed,
        )
        counts.append(time_average_stats(generate_flows(config), config.horizon).mean_flows)
    mean_count = float(np.mean(counts))
    assert abs(mean_count - 1000.0) / 1000.0 < 0.05  # N within 5% of 1000


def test_criterion_03_fixture_correlations():
    """sigma vs sqrt(N) correlation on the bundled reference tables."""
    first = sigma_sqrtn_correlation(load_reference_dataset("dataset1"))
    second = sigma_sqrtn_correlation(load_reference_dataset("dataset2"))
    assert abs(first - 0.70) <= 0.02
    assert abs(second - 0.93) <= 0.02


def test_criterion_04_slope_reproduction():
    """Through-origin least squares over dataset1's first three bins."""
    bins = load_reference_dataset("dataset1")
    head = bins[:3]
    # Independent inline least squares: slope = sum(x*y) / sum(x*x).
    brute = sum(b.mean_n * b.mean_rate for b in head) / sum(b.mean_n**2 for b in head)
    assert abs(brute - 5700.0) / 5700.0 < 0.02
    # The fitted region lands on exactly those three bins with that slope.
    fit = analyze_bins(bins)
    assert fit.region_bins == (0, 1, 2)
    assert fit.slope_perf == pytest.approx(brute, rel=1e-12)


def test_criterion_05_alpha_reproduction():
    """Envelope width estimates for both reference tables."""
    dataset1 = load_reference_dataset("dataset1")
    dataset2 = load_reference_dataset("dataset2")
    fitted1 = analyze_bins(dataset1)
    assert 10.0 <= fitted1.alpha <= 16.0
    assert 10.0 <= estimate_alpha(dataset1, 5700.0, 0.05) <= 16.0
    fitted2 = analyze_bins(dataset2)
    assert 3.5 <= fitted2.alpha <= 6.5


def test_criterion_06_normal_quantile():
    assert abs(normal_quantile(0.05) - 1.96) <= 0.001


def test_criterion_07_chi_square_behavior():
    """Calibration, power, brute-force statistic equality, fixture verdicts."""
    normal_passes = 0
    uniform_fails = 0
    half_width = math.sqrt(3.0)  # U(-sqrt(3), sqrt(3)): mean 0, variance 1
    for k in range(100):
        rng = np.random.default_rng(3000 + k)
        normal_result = normality_test(rng.normal(0.0, 1.0, 200))
        if normal_result.passed:
            normal_passes += 1
        uniform_result = normality_test(rng.uniform(-half_width, half_width, 200))
        if uniform_result.passed is False:
            uniform_fails += 1
        for result in (normal_result, uniform_result):
            brute = sum((o - e) ** 2 / e for o, e in zip(result.observed, result.expected))
            assert brute == result.statistic  # exact, not approximate
    assert normal_passes >= 90
    assert uniform_fails >= 90
    # Known statistic/critical pairs must evaluate to pass verdicts.
    first = ChiSquareResult(statistic=3.49, critical=9.49, dof=4, histogram_bins=20)
    second = ChiSquareResult(statistic=9.15, critical=12.6, dof=6, histogram_bins=20)
    assert first.passed is True
    assert second.passed is True


def test_criterion_08_detector_exactness(tmp_path):
    """Fuzz vs brute-force oracle, then the CLI on an injected rate drop."""
    rng = np.random.default_rng(42)
    for _ in range(1000):
        fit = RegionFit(
            slope_perf=float(rng.uniform(500, 20_000)),
            threshold_n=float(rng.uniform(100, 5000)),
            alpha=float(rng.uniform(0.5, 20)),
            epsilon=0.05,
            quantile=normal_quantile(0.05),
            region_bins=(0, 1),
        )
        config = DetectorConfig(
            fit=fit,
            consecutive_required=int(rng.integers(2, 6)),
            epsilon=float(rng.choice([0.05, 0.1, 0.3173])),
            poll_period=None if rng.random() < 0.5 else float(rng.uniform(0.5, 3.0)),
        )
        quantile = normal_quantile(config.epsilon)
        t = 0.0
        samples = []
        for _ in range(int(rng.integers(2, 120))):
            t += float(rng.choice([1.0, 1.0, 1.0, 2.5, 5.0]))
            n = int(rng.integers(0, 200))
            lower, upper = confidence_interval(fit, n, quantile)
            mode = rng.random()
            if mode < 0.45:
                rate = float(rng.uniform(lower, upper))
            elif mode < 0.7:
                rate = upper * float(rng.uniform(1.0001, 1.5)) + 1.0
            else:
                rate = max(lower * float(rng.uniform(0.2, 0.999)) - 1.0, 0.0)
            samples.append(TrafficSample(timestamp=t, active_flows=n, total_rate=rate))
        got = [
            (e.start_time, e.end_time, e.direction.value, len(e.samples))
            for e in detect_anomalies(samples, config)
        ]
        assert got == brute_force_events(samples, config)

    # CLI leg: simulate a well-behaved series, fit it, inject a sustained
    # below-envelope cluster, and expect the detect command to exit 1.
    config_path = tmp_path / "link.cfg"
    config_path.write_text(
        "lambda = 20\nsize_dist = constant\nsize_mean = 1e4\n"
        "duration_dist = constant\nduration_mean = 2\nhorizon = 60\n"
        "seed = 7\nwarmup = false\ninterval = 0.25\n"
    )
    run = tmp_path / "run"
    assert main(["simulate", "--config", str(config_path), "--out", str(run)]) == 0
    fitted = tmp_path / "fitted"
    assert main(["analyze", "--samples", str(run / "samples.csv"), "--out", str(fitted)]) == 0
    model = fit_from_dict(json.loads((fitted / "model.json").read_text()))

    samples = read_samples_csv(str(run / "samples.csv"))
    clean = detect_anomalies(samples, DetectorConfig(fit=model))
    assert clean == []  # the untouched series sits inside its own envelope
    doctored = list(samples)
    for index in range(150, 156):
        original = doctored[index]
        floor, _ = confidence_interval(model, original.active_flows)
        assert original.active_flows > 0 and floor > 0
        doctored[index] = TrafficSample(
            timestamp=original.timestamp,
            active_flows=original.active_flows,
            total_rate=floor * 0.3,
        )
    dipped = tmp_path / "dipped.csv"
    write_samples_csv(doctored, str(dipped))
    out = tmp_path / "alerting"
    code = main(["detect", "--samples", str(dipped), "--model", str(fitted / "model.json"),
                 "--out", str(out)])
    assert code == 1
    events = json.loads((out / "events.json").read_text())["events"]
    assert any(event["direction"] == "below" for event in events)


def test_criterion_09_end_to_end_pipeline():
    """simulate -> analyze free and capacity-limited; region must shrink."""
    started = time.monotonic()
    edges = (0.0, 60.0, 120.0, 180.0, 240.0, 300.0, 400.0, 600.0, 1000.0, math.inf)
    spec = BinSpec(edges=edges, min_samples=20)
    free_samples: list[TrafficSample] = []
    capped_samples: list[TrafficSample] = []
    moments = None
    for seed in range(10):
        config = SimConfig(
            arrival_rate=50.0,
            size_dist=DistSpec(kind="exponential", mean=2.5e4),
            duration_dist=DistSpec(kind="lognormal", mean=10.0, sigma=0.15),
            horizon=100.0,
            seed=seed,
            warmup=False,  # ramp from empty: spans the low-load bins
        )
        moments = theoretical_moments(config)
        flows = generate_flows(config)
        free_samples.extend(sample_traffic(flows, 0.05, config.horizon))
        loaded = apply_overload(flows, 0.6 * moments.mean_rate)
        capped_samples.extend(sample_traffic(loaded, 0.05, config.horizon))

    free_bins = bin_by_flow_count(free_samples, spec)
    free_fit = analyze_bins(free_bins)
    usable = tuple(b.bin_index for b in free_bins if b.enough_data)
    assert free_fit.region_bins == usable  # region covers every usable bin
    relative = abs(free_fit.slope_perf - moments.mean_flow_perf) / moments.mean_flow_perf
    assert relative < 0.10  # slope within 10% of theoretical E[S] E[1/D]

    capped_fit = analyze_bins(bin_by_flow_count(capped_samples, spec))
    assert capped_fit.threshold_n < free_fit.threshold_n  # strictly shorter
    assert len(capped_fit.region_bins) < len(free_fit.region_bins)
    assert time.monotonic() - started < 60.0


def test_criterion_10_comparison_report():
    def _fit(slope):
        return RegionFit(
            slope_perf=slope,
            threshold_n=30_000.0,
            alpha=13.0,
            epsilon=0.05,
            quantile=normal_quantile(0.05),
            region_bins=(0, 1, 2),
        )

    report = compare_networks([("link-a", _fit(5700.0)), ("link-b", _fit(15_000.0))])
    assert report.ranking == ("link-b", "link-a")
    flags = {entry.label: entry.streaming_capable for entry in report.entries}
    assert flags == {"link-b": True, "link-a": False}
