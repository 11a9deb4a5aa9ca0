"""Tests for CSV/router-summary ingest and the bundled reference datasets."""

from __future__ import annotations

import math

import pytest

from flowdiag.errors import SampleFormatError
from flowdiag.ingest import (
    DATASET_NOTES,
    REFERENCE_DATASETS,
    RouterSummary,
    load_reference_dataset,
    parse_router_summary,
    read_samples_csv,
    write_reference_csv,
    write_samples_csv,
)
from flowdiag.model import TrafficSample

from conftest import make_samples


# --------------------------------------------------------------------------
# sample CSV round trips
# --------------------------------------------------------------------------


def test_csv_round_trip_is_exact(tmp_path):
    samples = make_samples(
        [
            (0.0, 0, 0.0),
            (0.1, 3, 1250000.125),
            (1.0 / 3.0, 12, 9.87654321e8),
            (1e9, 40000, 1.7e11),
        ]
    )
    path = tmp_path / "samples.csv"
    write_samples_csv(samples, str(path))
    assert read_samples_csv(str(path)) == samples


def test_csv_round_trip_is_byte_identical(tmp_path):
    samples = make_samples([(0.5, 7, 1.23e6), (1.5, 8, 4.56e6)])
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_samples_csv(samples, str(first), source="run")
    write_samples_csv(samples, str(second), source="run")
    assert first.read_bytes() == second.read_bytes()


def test_csv_header_and_metadata_layout(tmp_path):
    path = tmp_path / "samples.csv"
    write_samples_csv(make_samples([(0.0, 1, 2.0)]), str(path), source="probe-7")
    lines = path.read_text().splitlines()
    assert lines[0] == "# version=1"
    assert lines[1] == "# unit=bps"
    assert lines[2] == "# source=probe-7"
    assert lines[3] == "timestamp,active_flows,rate"
    assert lines[4] == "0.0,1,2.0"


def test_csv_mbps_unit_scales_on_read(tmp_path):
    samples = make_samples([(0.0, 5, 113.1e6), (1.0, 6, 215.4e6)])
    path = tmp_path / "mbps.csv"
    write_samples_csv(samples, str(path), unit="Mbps")
    text = path.read_text()
    assert "# unit=Mbps" in text
    back = read_samples_csv(str(path))
    for original, restored in zip(samples, back):
        assert restored.timestamp == original.timestamp
        assert restored.active_flows == original.active_flows
        assert restored.total_rate == pytest.approx(original.total_rate, rel=1e-9)


def test_csv_hand_written_mbps_values(tmp_path):
    path = tmp_path / "hand.csv"
    path.write_text(
        "# version=1\n# unit=Mbps\n# source=test\n"
        "timestamp,active_flows,rate\n"
        "0.0,10,1.5\n"
    )
    (sample,) = read_samples_csv(str(path))
    assert sample.total_rate == 1.5e6


def test_csv_blank_lines_and_padding_tolerated(tmp_path):
    path = tmp_path / "padded.csv"
    path.write_text(
        "# version=1\n"
        "#  unit = bps\n"
        "# source=x\n"
        "\n"
        " timestamp , active_flows , rate \n"
        " 1.0 , 2 , 3.0 \n"
        "\n"
    )
    assert read_samples_csv(str(path)) == [TrafficSample(1.0, 2, 3.0)]


def test_csv_writer_rejects_bad_unit_and_multiline_source(tmp_path):
    path = tmp_path / "x.csv"
    with pytest.raises(SampleFormatError, match="unit"):
        write_samples_csv([], str(path), unit="kbps")
    with pytest.raises(SampleFormatError, match="single line"):
        write_samples_csv([], str(path), source="two\nlines")


@pytest.mark.parametrize(
    ("content", "pattern"),
    [
        ("", "missing header"),
        ("# version=1\n# unit=bps\n", "missing header"),
        ("# unit=bps\ntimestamp,active_flows,rate\n", "line 2: .*version"),
        ("# version=2\n# unit=bps\ntimestamp,active_flows,rate\n", "line 3: .*version"),
        ("# version=1\ntimestamp,active_flows,rate\n", "line 2: unit"),
        ("# version=1\n# unit=kbps\ntimestamp,active_flows,rate\n", "line 3: unit"),
        ("# version=1\n# unit=bps\ntime,flows,rate\n", "line 3: expected header"),
        (
            "# version=1\n# unit=bps\ntimestamp,active_flows,rate\n# late comment\n",
            "line 4: comment after the header",
        ),
        (
            "# version=1\n# unit=bps\ntimestamp,active_flows,rate\n1.0,2\n",
            "line 4: expected 3 fields",
        ),
        (
            "# version=1\n# unit=bps\ntimestamp,active_flows,rate\nabc,2,3.0\n",
            "line 4: timestamp",
        ),
        (
            "# version=1\n# unit=bps\ntimestamp,active_flows,rate\n1.0,2.5,3.0\n",
            "line 4: active_flows",
        ),
        (
            "# version=1\n# unit=bps\ntimestamp,active_flows,rate\n1.0,2,xyz\n",
            "line 4: rate",
        ),
        (
            "# version=1\n# unit=bps\ntimestamp,active_flows,rate\n1.0,-2,3.0\n",
            "line 4: ",
        ),
        (
            "# version=1\n# unit=bps\ntimestamp,active_flows,rate\n1.0,2,-3.0\n",
            "line 4: ",
        ),
    ],
)
def test_csv_reader_rejects_malformed_input(tmp_path, content, pattern):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(SampleFormatError, match=pattern):
        read_samples_csv(str(path))


def test_csv_error_carries_line_attribute(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# version=1\n# unit=bps\ntimestamp,active_flows,rate\nnope,1,2\n")
    with pytest.raises(SampleFormatError) as excinfo:
        read_samples_csv(str(path))
    assert excinfo.value.line == 4


# --------------------------------------------------------------------------
# router summaries
# --------------------------------------------------------------------------


def test_router_summary_happy_path():
    text = (
        "Interface GigabitEthernet0/1 is up\n"
        "active flows: 23260\n"
        "queue depth: 5\n"
        "throughput: 126.0 Mbps\n"
    )
    summary = parse_router_summary(text)
    assert summary == RouterSummary(active_flows=23260, total_rate=126.0e6)


def test_router_summary_bps_unit_and_at():
    summary = parse_router_summary("active flows: 4\nthroughput: 5000 bps\n")
    assert summary.total_rate == 5000.0
    sample = summary.at(17.5)
    assert sample == TrafficSample(timestamp=17.5, active_flows=4, total_rate=5000.0)


@pytest.mark.parametrize(
    ("text", "pattern"),
    [
        ("throughput: 5 bps\n", "missing 'active flows:'"),
        ("active flows: 5\n", "missing 'throughput:'"),
        ("active flows: 5\nactive flows: 6\nthroughput: 1 bps\n", "line 2: duplicate"),
        ("active flows: 5\nthroughput: 1 bps\nthroughput: 2 bps\n", "line 3: duplicate"),
        ("active flows: 5\nthroughput: 1 kbps\n", "line 2: throughput unit"),
        ("active flows: x\nthroughput: 1 bps\n", "line 1: active flows is not an integer"),
        ("active flows: -5\nthroughput: 1 bps\n", "active flows must be >= 0"),
        ("active flows: 5\nthroughput: -1 bps\n", "throughput must be >= 0"),
        ("active flows: 5\nthroughput: inf Mbps\n", "throughput must be >= 0 and finite"),
    ],
)
def test_router_summary_rejects_malformed_input(text, pattern):
    with pytest.raises(SampleFormatError, match=pattern):
        parse_router_summary(text)


# --------------------------------------------------------------------------
# bundled reference datasets
# --------------------------------------------------------------------------


def test_dataset_registry_names():
    assert sorted(REFERENCE_DATASETS) == ["dataset1", "dataset2"]
    assert sorted(DATASET_NOTES) == ["dataset1", "dataset2"]


def test_dataset1_values_digit_for_digit():
    bins = load_reference_dataset("dataset1")
    assert len(bins) == 7
    first = bins[0]
    assert (first.n_lo, first.n_hi) == (15000.0, 20000.0)
    assert first.mean_n == 17489.0
    assert first.mean_rate == 113.1e6
    assert first.sigma_rate == 23.1e6
    assert first.mean_perf == 6784.0
    assert first.sigma_perf == 1386.0
    assert first.sample_count is None
    assert first.enough_data is True
    last = bins[-1]
    assert last.n_lo == 60000.0
    assert math.isinf(last.n_hi)
    assert last.mean_n == 64778.0
    assert last.mean_rate == 215.4e6
    assert last.mean_perf == 3325.0


def test_dataset2_values_digit_for_digit():
    bins = load_reference_dataset("dataset2")
    assert len(bins) == 6
    assert [b.mean_n for b in bins] == [5446.0, 6531.0, 7508.0, 8370.0, 9443.0, 15495.0]
    assert bins[0].mean_rate == pytest.approx(15.42e6)
    assert bins[0].sigma_rate == pytest.approx(2.25e6)
    assert bins[0].mean_perf == 2843.0
    assert bins[3].n_lo == 8000.0 and bins[3].n_hi == 9000.0
    assert bins[-1].mean_rate == pytest.approx(28.05e6)
    assert bins[-1].sigma_perf == 349.0


@pytest.mark.parametrize("name", sorted(REFERENCE_DATASETS))
def test_dataset_bins_are_contiguous_and_ordered(name):
    bins = load_reference_dataset(name)
    for index, stats in enumerate(bins):
        assert stats.bin_index == index
        assert stats.n_lo <= stats.mean_n < stats.n_hi
    for left, right in zip(bins, bins[1:]):
        assert left.n_hi == right.n_lo
    assert math.isinf(bins[-1].n_hi)
    # More flows per bin should mean less throughput per flow on a loaded link.
    perfs = [b.mean_perf for b in bins]
    assert perfs[0] > perfs[-1]


def test_load_reference_dataset_unknown_name():
    with pytest.raises(KeyError, match="unknown dataset"):
        load_reference_dataset("dataset3")


def test_write_reference_csv(tmp_path):
    path = tmp_path / "dataset1.csv"
    write_reference_csv("dataset1", str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "# dataset=dataset1"
    assert lines[1].startswith("# note=")
    header = lines[2].split(",")
    assert header[:4] == ["bin_index", "n_lo", "n_hi", "mean_n"]
    rows = [line.split(",") for line in lines[3:]]
    assert len(rows) == 7
    # Mbit/s columns must come back out exactly as stored.
    assert rows[0][4] == "113.1"
    assert rows[0][5] == "23.1"
    assert rows[-1][2] == "inf"
