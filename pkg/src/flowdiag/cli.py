"""Command-line interface.

Four subcommands cover the workflow end to end::

    flowdiag simulate --config link.cfg --out run1      # synthetic samples
    flowdiag analyze  --samples run1/samples.csv        # fit the region
    flowdiag detect   --samples live.csv --model out/model.json
    flowdiag compare  a/model.json b/model.json         # rank links

Every run writes its artifacts into one output directory (``--out``, else
the ``FLOWDIAG_OUT`` environment variable, else the working directory)
under fixed names, plus a ``manifest.json`` recording the command, a
digest of the effective configuration, the seed, the tool version and a
timestamp — enough to reproduce the run.

Exit codes: 0 success, 1 anomalies detected (``detect`` only), 2 bad
input or configuration, 3 analysis impossible on the given data.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import (
    BinSpec,
    analyze_bins,
    assign_bins,
    auto_bin_spec,
    bin_by_flow_count,
    compare_networks,
    confidence_interval,
    fit_from_dict,
    fit_to_dict,
    normality_test,
    sigma_sqrtn_correlation,
)
from .detect import DetectorConfig, detect_anomalies, write_alert_log, write_events_json
from .errors import (
    ConfigError,
    DegenerateDataError,
    DegenerateFitError,
    FlowDiagError,
    InvalidModelError,
    SampleFormatError,
    UndefinedCorrelationError,
)
from .ingest import (
    REFERENCE_DATASETS,
    load_reference_dataset,
    read_samples_csv,
    write_samples_csv,
)
from .sim import (
    apply_overload,
    generate_flows,
    parse_config_file,
    sample_traffic,
    sim_config_from_mapping,
    theoretical_moments,
    time_average_stats,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_EVENTS = 1
EXIT_BAD_INPUT = 2
EXIT_DEGENERATE = 3

OUT_ENV_VAR = "FLOWDIAG_OUT"


# --------------------------------------------------------------------------
# shared plumbing
# --------------------------------------------------------------------------


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _json_safe(value):
    """Replace non-finite floats with null so the JSON stays standard."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def _write_json(payload: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_json_safe(payload), handle, indent=2)
        handle.write("\n")


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _digest_params(params: dict) -> str:
    return _digest(json.dumps(_json_safe(params), sort_keys=True).encode("utf-8"))


def _write_manifest(
    out: Path, command: str, config_digest: str, seed: int | None, outputs: list[str]
) -> None:
    _write_json(
        {
            "command": command,
            "config_digest": config_digest,
            "seed": seed,
            "tool_version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "outputs": outputs,
        },
        out / "manifest.json",
    )


def _bin_to_dict(stats) -> dict:
    return {
        "bin_index": stats.bin_index,
        "n_lo": stats.n_lo,
        "n_hi": stats.n_hi,
        "mean_n": stats.mean_n,
        "mean_rate": stats.mean_rate,
        "sigma_rate": stats.sigma_rate,
        "mean_perf": stats.mean_perf,
        "sigma_perf": stats.sigma_perf,
        "sample_count": stats.sample_count,
        "enough_data": stats.enough_data,
    }


def _write_plot_csv(bins, fit, path: Path) -> None:
    """Per-bin curve table: measured point plus the fitted envelope."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("bin_index,mean_n,mean_rate,sigma_rate,envelope_lower,envelope_upper\n")
        for stats in bins:
            lower, upper = confidence_interval(fit, stats.mean_n)
            handle.write(
                f"{stats.bin_index},{stats.mean_n!r},{stats.mean_rate!r},"
                f"{stats.sigma_rate!r},{lower!r},{upper!r}\n"
            )


def _parse_edges(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse edges {text!r}: {exc}") from exc


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    config_path = Path(args.config)
    values = parse_config_file(config_path)
    config = sim_config_from_mapping(values)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    interval = float(values.get("interval", "1.0"))
    if not interval > 0:
        raise ConfigError(f"interval must be positive, got {interval}")

    flows = generate_flows(config)
    if config.capacity is not None:
        flows = apply_overload(flows, config.capacity, config.impatience)
    samples = sample_traffic(flows, interval, config.horizon)

    out = _out_dir(args)
    write_samples_csv(samples, out / "samples.csv", source="flowdiag simulate")
    moments = theoretical_moments(config)
    averages = time_average_stats(flows, config.horizon)
    _write_json(
        {
            "theoretical": dataclasses.asdict(moments),
            "empirical": dataclasses.asdict(averages),
            "sample_count": len(samples),
            "flow_count": len(flows),
            "interval": interval,
        },
        out / "moments.json",
    )
    _write_manifest(
        out,
        command="simulate",
        config_digest=_digest(config_path.read_bytes()),
        seed=config.seed,
        outputs=["samples.csv", "moments.json"],
    )
    print(f"wrote {len(samples)} samples from {len(flows)} flows to {out / 'samples.csv'}")
    return EXIT_OK


def _load_bins_for_analyze(args):
    """Returns (bins, per-bin perf value arrays or None, source label)."""
    if args.fixture:
        if args.edges or args.samples:
            raise ConfigError("--fixture cannot be combined with --samples or --edges")
        return load_reference_dataset(args.fixture), None, f"fixture:{args.fixture}"
    if not args.samples:
        raise ConfigError("analyze needs --samples or --fixture")
    samples = read_samples_csv(args.samples)
    if args.edges:
        spec = BinSpec(edges=_parse_edges(args.edges), min_samples=args.min_samples)
    else:
        spec = auto_bin_spec(samples, min_samples=args.min_samples)
    bins = bin_by_flow_count(samples, spec)
    index = assign_bins(samples, spec)
    occupied = sorted({int(i) for i in index if i >= 0})
    perf_by_position: dict[int, list[float]] = {}
    for sample, position in zip(samples, index):
        if position >= 0 and sample.active_flows > 0:
            perf_by_position.setdefault(int(position), []).append(sample.flow_perf)
    # Empty bins were dropped, so the emitted bins line up with the occupied
    # edge positions in ascending order.
    ordered = [perf_by_position.get(position, []) for position in occupied]
    return bins, ordered, str(args.samples)


def _cmd_analyze(args) -> int:
    bins, perf_values, source = _load_bins_for_analyze(args)
    fit = analyze_bins(bins, epsilon=args.epsilon, residual_k=args.residual_k)

    try:
        correlation = sigma_sqrtn_correlation(bins)
        correlation_note = ""
    except (DegenerateDataError, UndefinedCorrelationError) as exc:
        correlation = None
        correlation_note = str(exc)

    normality = []
    if perf_values is not None:
        for stats, values in zip(bins, perf_values):
            try:
                result = normality_test(values, histogram_bins=args.histogram_bins)
                entry = {
                    "statistic": result.statistic,
                    "critical": result.critical,
                    "dof": result.dof,
                    "passed": result.passed,
                    "note": result.note,
                }
            except DegenerateDataError as exc:
                # A degenerate bin (constant per-flow rate) should not kill
                # an analyze run whose fit already succeeded.
                entry = {
                    "statistic": math.nan,
                    "critical": math.nan,
                    "dof": 0,
                    "passed": None,
                    "note": str(exc),
                }
            normality.append({"bin_index": stats.bin_index, **entry})

    out = _out_dir(args)
    _write_json(
        {
            "source": source,
            "bins": [_bin_to_dict(b) for b in bins],
            "fit": fit_to_dict(fit),
            "sigma_sqrtn_correlation": correlation,
            "correlation_note": correlation_note,
            "normality": normality,
        },
        out / "report.json",
    )
    _write_plot_csv(bins, fit, out / "plot.csv")
    _write_json(fit_to_dict(fit), out / "model.json")
    _write_manifest(
        out,
        command="analyze",
        config_digest=_digest_params(
            {
                "source": source,
                "edges": args.edges,
                "min_samples": args.min_samples,
                "epsilon": args.epsilon,
                "residual_k": args.residual_k,
                "histogram_bins": args.histogram_bins,
            }
        ),
        seed=None,
        outputs=["report.json", "plot.csv", "model.json"],
    )
    threshold = "unbounded" if math.isinf(fit.threshold_n) else f"{fit.threshold_n:g}"
    print(
        f"fitted region: slope={fit.slope_perf:.6g} bit/s per flow, "
        f"threshold={threshold} flows, alpha={fit.alpha:.4g} "
        f"({len(fit.region_bins)} of {len(bins)} bins)"
    )
    return EXIT_OK


def _load_model(path) -> "object":
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise InvalidModelError(f"{path}: not valid JSON: {exc}") from exc
    return fit_from_dict(payload)


def _cmd_detect(args) -> int:
    samples = read_samples_csv(args.samples)
    fit = _load_model(args.model)
    config = DetectorConfig(
        fit=fit,
        consecutive_required=args.consecutive,
        epsilon=args.epsilon,
        poll_period=args.poll_period,
    )
    events = detect_anomalies(samples, config)

    out = _out_dir(args)
    write_events_json(events, out / "events.json")
    write_alert_log(events, out / "alerts.log")
    _write_manifest(
        out,
        command="detect",
        config_digest=_digest_params(
            {
                "samples": str(args.samples),
                "model": str(args.model),
                "consecutive": args.consecutive,
                "epsilon": args.epsilon,
                "poll_period": args.poll_period,
            }
        ),
        seed=None,
        outputs=["events.json", "alerts.log"],
    )
    print(f"{len(events)} anomaly events in {len(samples)} samples")
    return EXIT_EVENTS if events else EXIT_OK


def _cmd_compare(args) -> int:
    if args.labels:
        labels = [part.strip() for part in args.labels.split(",")]
        if len(labels) != len(args.models):
            raise ConfigError(
                f"{len(args.models)} models but {len(labels)} labels given"
            )
    else:
        labels = [Path(path).parent.name or Path(path).stem for path in args.models]
    pairs = [(label, _load_model(path)) for label, path in zip(labels, args.models)]
    report = compare_networks(pairs)

    out = _out_dir(args)
    _write_json(
        {
            "entries": [
                {
                    "rank": rank,
                    "label": entry.label,
                    "mean_flow_perf": entry.mean_flow_perf,
                    "streaming_capable": entry.streaming_capable,
                }
                for rank, entry in enumerate(report.entries, start=1)
            ]
        },
        out / "comparison.json",
    )
    _write_manifest(
        out,
        command="compare",
        config_digest=_digest_params({"models": [str(p) for p in args.models], "labels": labels}),
        seed=None,
        outputs=["comparison.json"],
    )
    for rank, entry in enumerate(report.entries, start=1):
        streaming = "yes" if entry.streaming_capable else "no"
        print(
            f"{rank}. {entry.label}: {entry.mean_flow_perf:.6g} bit/s per flow, "
            f"streaming={streaming}"
        )
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowdiag",
        description="Flow-level link diagnostics: simulate, fit, detect, compare.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser(
        "simulate", help="generate synthetic traffic samples from a config file"
    )
    simulate.add_argument("--config", required=True, help="simulation config file")
    simulate.add_argument("--seed", type=int, default=None, help="override the config seed")
    simulate.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV_VAR} or .)")
    simulate.set_defaults(func=_cmd_simulate)

    analyze = commands.add_parser(
        "analyze", help="bin samples, fit the operating region, write the model"
    )
    analyze.add_argument("--samples", default=None, help="samples CSV to analyze")
    analyze.add_argument(
        "--fixture",
        default=None,
        choices=sorted(REFERENCE_DATASETS),
        help="analyze a bundled reference table instead of a samples file",
    )
    analyze.add_argument("--edges", default=None, help="comma-separated bin edges (last may be inf)")
    analyze.add_argument("--min-samples", type=int, default=30, help="minimum samples per usable bin")
    analyze.add_argument("--epsilon", type=float, default=0.05, help="envelope tail probability")
    analyze.add_argument("--residual-k", type=float, default=1.0, help="region residual width in sigmas")
    analyze.add_argument("--histogram-bins", type=int, default=20, help="cells for the per-bin normality test")
    analyze.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV_VAR} or .)")
    analyze.set_defaults(func=_cmd_analyze)

    detect = commands.add_parser(
        "detect", help="flag envelope excursions in a samples file against a model"
    )
    detect.add_argument("--samples", required=True, help="samples CSV to scan")
    detect.add_argument("--model", required=True, help="model JSON from analyze")
    detect.add_argument("--consecutive", type=int, default=2, help="run length that raises an event")
    detect.add_argument("--epsilon", type=float, default=0.05, help="envelope tail probability")
    detect.add_argument("--poll-period", type=float, default=None, help="nominal sample spacing; larger gaps split runs")
    detect.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV_VAR} or .)")
    detect.set_defaults(func=_cmd_detect)

    compare = commands.add_parser(
        "compare", help="rank fitted links by mean per-flow performance"
    )
    compare.add_argument("models", nargs="+", help="model JSON files to rank")
    compare.add_argument("--labels", default=None, help="comma-separated labels, one per model")
    compare.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV_VAR} or .)")
    compare.set_defaults(func=_cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SampleFormatError, InvalidModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (DegenerateFitError, DegenerateDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except FlowDiagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
