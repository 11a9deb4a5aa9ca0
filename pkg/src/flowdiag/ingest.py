"""Reading and writing traffic measurements.

Sample CSV format (version 1)
-----------------------------
::

    # version=1
    # unit=bps
    # source=<free-form label>
    timestamp,active_flows,rate
    0.0,12,1250000.0

Comment lines carry the metadata; ``unit`` is ``bps`` or ``Mbps`` and rates
are normalized to bit/s on read.  Malformed input is rejected with the
offending line number — no row is ever silently skipped.

Router summary format
---------------------
A small line-oriented grammar for pasting interactive router output::

    summary   = { line } ;
    line      = flows-line | rate-line | other ;
    flows-line = "active flows:" integer ;
    rate-line  = "throughput:" number ( "bps" | "Mbps" ) ;

Unrecognized lines are ignored; both the flows line and the rate line must
appear exactly once.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass

from .errors import SampleFormatError
from .model import BITS_PER_MEGABIT, BinStats, TrafficSample, bps_to_mbps, mbps_to_bps

__all__ = [
    "RouterSummary",
    "read_samples_csv",
    "write_samples_csv",
    "parse_router_summary",
    "load_reference_dataset",
    "write_reference_csv",
    "REFERENCE_DATASETS",
    "DATASET_NOTES",
]

_CSV_HEADER = ["timestamp", "active_flows", "rate"]
_UNITS = {"bps": 1.0, "Mbps": BITS_PER_MEGABIT}


# --------------------------------------------------------------------------
# sample CSV
# --------------------------------------------------------------------------


def write_samples_csv(
    samples: list[TrafficSample],
    path: str,
    unit: str = "bps",
    source: str = "flowdiag",
) -> None:
    """Write samples in the version-1 CSV format.

    Rates are stored in ``unit`` (``bps`` keeps them bit-exact; ``Mbps``
    round-trips to a relative error below 1e-6).
    """
    if unit not in _UNITS:
        raise SampleFormatError(f"unit must be one of {sorted(_UNITS)}, got {unit!r}")
    if any(ch in source for ch in "\r\n"):
        raise SampleFormatError("source label must be a single line")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("# version=1\n")
        handle.write(f"# unit={unit}\n")
        handle.write(f"# source={source}\n")
        writer = csv.writer(handle)
        writer.writerow(_CSV_HEADER)
        for sample in samples:
            rate = sample.total_rate if unit == "bps" else bps_to_mbps(sample.total_rate)
            writer.writerow([repr(sample.timestamp), sample.active_flows, repr(rate)])


def read_samples_csv(path: str) -> list[TrafficSample]:
    """Read a version-1 sample CSV, normalizing rates to bit/s."""
    meta: dict[str, str] = {}
    samples: list[TrafficSample] = []
    header_seen = False
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if line.startswith("#"):
                if header_seen:
                    raise SampleFormatError("comment after the header row", line=number)
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
                continue
            if not header_seen:
                if [cell.strip() for cell in line.split(",")] != _CSV_HEADER:
                    raise SampleFormatError(
                        f"expected header {','.join(_CSV_HEADER)!r}, got {line!r}",
                        line=number,
                    )
                header_seen = True
                _check_meta(meta, number)
                continue
            samples.append(_parse_row(line, number, _UNITS[meta["unit"]]))
    if not header_seen:
        raise SampleFormatError("missing header row (empty or comment-only file)")
    return samples


def _check_meta(meta: dict[str, str], line: int) -> None:
    if meta.get("version") != "1":
        raise SampleFormatError(
            f"unsupported or missing version (expected 1, got {meta.get('version')!r})",
            line=line,
        )
    if meta.get("unit") not in _UNITS:
        raise SampleFormatError(
            f"unit must be one of {sorted(_UNITS)}, got {meta.get('unit')!r}", line=line
        )


def _parse_row(line: str, number: int, unit_factor: float) -> TrafficSample:
    cells = line.split(",")
    if len(cells) != 3:
        raise SampleFormatError(f"expected 3 fields, got {len(cells)}", line=number)
    raw_time, raw_flows, raw_rate = (cell.strip() for cell in cells)
    try:
        timestamp = float(raw_time)
    except ValueError:
        raise SampleFormatError(f"timestamp is not a number: {raw_time!r}", line=number) from None
    try:
        active_flows = int(raw_flows)
    except ValueError:
        raise SampleFormatError(
            f"active_flows is not an integer: {raw_flows!r}", line=number
        ) from None
    try:
        rate = float(raw_rate)
    except ValueError:
        raise SampleFormatError(f"rate is not a number: {raw_rate!r}", line=number) from None
    try:
        return TrafficSample(
            timestamp=timestamp,
            active_flows=active_flows,
            total_rate=rate * unit_factor,
        )
    except ValueError as exc:
        raise SampleFormatError(str(exc), line=number) from None


# --------------------------------------------------------------------------
# router summaries
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RouterSummary:
    """One (flows, rate) reading scraped from router output.

    The caller supplies the timestamp when turning this into a
    :class:`~flowdiag.model.TrafficSample`.
    """

    active_flows: int
    total_rate: float  # bit/s

    def at(self, timestamp: float) -> TrafficSample:
        return TrafficSample(
            timestamp=timestamp, active_flows=self.active_flows, total_rate=self.total_rate
        )


_FLOWS_RE = re.compile(r"^active flows:\s*(\S+)\s*$")
_RATE_RE = re.compile(r"^throughput:\s*(\S+)\s+(\S+)\s*$")


def parse_router_summary(text: str) -> RouterSummary:
    """Parse the router summary grammar documented in the module header."""
    flows: int | None = None
    rate: float | None = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        match = _FLOWS_RE.match(line)
        if match:
            if flows is not None:
                raise SampleFormatError("duplicate 'active flows' line", line=number)
            try:
                flows = int(match.group(1))
            except ValueError:
                raise SampleFormatError(
                    f"active flows is not an integer: {match.group(1)!r}", line=number
                ) from None
            continue
        match = _RATE_RE.match(line)
        if match:
            if rate is not None:
                raise SampleFormatError("duplicate 'throughput' line", line=number)
            value, unit = match.groups()
            if unit not in _UNITS:
                raise SampleFormatError(
                    f"throughput unit must be one of {sorted(_UNITS)}, got {unit!r}",
                    line=number,
                )
            try:
                rate = float(value) * _UNITS[unit]
            except ValueError:
                raise SampleFormatError(
                    f"throughput is not a number: {value!r}", line=number
                ) from None
    if flows is None:
        raise SampleFormatError("missing 'active flows:' line")
    if rate is None:
        raise SampleFormatError("missing 'throughput:' line")
    if flows < 0:
        raise SampleFormatError(f"active flows must be >= 0, got {flows}")
    if rate < 0 or not math.isfinite(rate):
        raise SampleFormatError(f"throughput must be >= 0 and finite, got {rate}")
    return RouterSummary(active_flows=flows, total_rate=rate)


# --------------------------------------------------------------------------
# bundled reference datasets
# --------------------------------------------------------------------------

# Two bin summaries measured on production backbone links, kept digit for
# digit as published by their operators: per bin the mean flow count, mean
# and standard deviation of the aggregate rate (Mbit/s), and mean and
# standard deviation of the per-flow performance (bit/s).  Underlying
# sample counts were not published, so ``sample_count`` is None.
_DATASET1 = (
    # (n_lo, n_hi, mean_n, mean_rate_mbps, sigma_rate_mbps, mean_perf, sigma_perf)
    (15000, 20000, 17489, 113.1, 23.1, 6784, 1386),
    (20000, 25000, 23260, 126.0, 21.4, 5682, 965),
    (25000, 30000, 27007, 152.0, 39.2, 5628, 1452),
    (30000, 40000, 34902, 156.7, 26.9, 4990, 770),
    (40000, 50000, 45104, 163.9, 33.9, 3634, 752),
    (50000, 60000, 55019, 176.3, 33.2, 3205, 604),
    (60000, math.inf, 64778, 215.4, 42.2, 3325, 652),
)

_DATASET2 = (
    (5000, 6000, 5446, 15.42, 2.25, 2843, 413),
    (6000, 7000, 6531, 17.11, 2.45, 2364, 377),
    (7000, 8000, 7508, 17.74, 2.35, 2364, 313),
    (8000, 9000, 8370, 18.92, 2.24, 2261, 268),
    (9000, 10000, 9443, 20.67, 3.81, 2190, 404),
    (10000, math.inf, 15495, 28.05, 5.40, 1811, 349),
)

REFERENCE_DATASETS = {"dataset1": _DATASET1, "dataset2": _DATASET2}

DATASET_NOTES = {
    "dataset1": (
        "interval bounds for the 40000-50000 bin inferred from row ordering; "
        "the published interval list skips it"
    ),
    "dataset2": (
        "interval bounds for the 8000-9000 bin inferred from row ordering; "
        "the published interval list skips it"
    ),
}


def load_reference_dataset(name: str) -> list[BinStats]:
    """Return one of the bundled bin summaries as normalized bin statistics.

    Rates come back in bit/s (the stored Mbit/s values times 1e6, exactly);
    per-flow performances are stored in bit/s already.
    """
    if name not in REFERENCE_DATASETS:
        raise KeyError(f"unknown dataset {name!r}; available: {sorted(REFERENCE_DATASETS)}")
    return [
        BinStats(
            bin_index=index,
            n_lo=float(n_lo),
            n_hi=float(n_hi),
            mean_n=float(mean_n),
            mean_rate=mbps_to_bps(mean_rate),
            sigma_rate=mbps_to_bps(sigma_rate),
            mean_perf=float(mean_perf),
            sigma_perf=float(sigma_perf),
            sample_count=None,
            enough_data=True,
        )
        for index, (n_lo, n_hi, mean_n, mean_rate, sigma_rate, mean_perf, sigma_perf) in enumerate(
            REFERENCE_DATASETS[name]
        )
    ]


def write_reference_csv(name: str, path: str) -> None:
    """Export a bundled dataset as CSV for inspection or plotting."""
    bins = load_reference_dataset(name)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# dataset={name}\n")
        handle.write(f"# note={DATASET_NOTES[name]}\n")
        writer = csv.writer(handle)
        writer.writerow(
            [
                "bin_index",
                "n_lo",
                "n_hi",
                "mean_n",
                "mean_rate_mbps",
                "sigma_rate_mbps",
                "mean_perf_bps",
                "sigma_perf_bps",
            ]
        )
        for stats in bins:
            writer.writerow(
                [
                    stats.bin_index,
                    stats.n_lo,
                    "inf" if math.isinf(stats.n_hi) else stats.n_hi,
                    stats.mean_n,
                    bps_to_mbps(stats.mean_rate),
                    bps_to_mbps(stats.sigma_rate),
                    stats.mean_perf,
                    stats.sigma_perf,
                ]
            )
