"""flowdiag — flow-level diagnostics for backbone links.

The toolkit treats a link as a population of concurrent flows and works on
paired observations of (active flow count, aggregate rate).  It simulates
such traffic, fits the linear operating region of the utilization curve
with its confidence envelope, classifies link state, detects envelope
excursions, and ranks links by mean per-flow performance.
"""

from .model import (
    BITS_PER_MEGABIT,
    AnomalyEvent,
    BinStats,
    Direction,
    FlowRecord,
    NetworkState,
    RateShape,
    RegionFit,
    TrafficSample,
    bps_to_mbps,
    mbps_to_bps,
)
from .errors import (
    ConfigError,
    DegenerateDataError,
    DegenerateFitError,
    FlowDiagError,
    InvalidModelError,
    SampleFormatError,
    UndefinedCorrelationError,
)
from .sim import (
    DistSpec,
    Impatience,
    MomentReport,
    SimConfig,
    TimeAverages,
    apply_overload,
    generate_flows,
    load_sim_config,
    sample_traffic,
    theoretical_moments,
    time_average_stats,
)
from .ingest import (
    REFERENCE_DATASETS,
    RouterSummary,
    load_reference_dataset,
    parse_router_summary,
    read_samples_csv,
    write_reference_csv,
    write_samples_csv,
)
from .analysis import (
    STREAMING_RATE_BPS,
    BinSpec,
    ChiSquareResult,
    ComparisonEntry,
    ComparisonReport,
    analyze_bins,
    assign_bins,
    auto_bin_spec,
    bin_by_flow_count,
    chi_square_critical,
    compare_networks,
    confidence_interval,
    estimate_alpha,
    fit_from_dict,
    fit_operational_region,
    fit_to_dict,
    normal_quantile,
    normality_test,
    sigma_sqrtn_correlation,
)
from .detect import (
    AnomalyCluster,
    DetectorConfig,
    classify_state,
    cluster_summary,
    detect_anomalies,
    write_alert_log,
    write_events_json,
)
from .estimators import EnvelopeAnomalyDetector, OperationalRegionModel

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "BITS_PER_MEGABIT",
    "AnomalyEvent",
    "BinStats",
    "Direction",
    "FlowRecord",
    "NetworkState",
    "RateShape",
    "RegionFit",
    "TrafficSample",
    "bps_to_mbps",
    "mbps_to_bps",
    # errors
    "ConfigError",
    "DegenerateDataError",
    "DegenerateFitError",
    "FlowDiagError",
    "InvalidModelError",
    "SampleFormatError",
    "UndefinedCorrelationError",
    # sim
    "DistSpec",
    "Impatience",
    "MomentReport",
    "SimConfig",
    "TimeAverages",
    "apply_overload",
    "generate_flows",
    "load_sim_config",
    "sample_traffic",
    "theoretical_moments",
    "time_average_stats",
    # ingest
    "REFERENCE_DATASETS",
    "RouterSummary",
    "load_reference_dataset",
    "parse_router_summary",
    "read_samples_csv",
    "write_reference_csv",
    "write_samples_csv",
    # analysis
    "STREAMING_RATE_BPS",
    "BinSpec",
    "ChiSquareResult",
    "ComparisonEntry",
    "ComparisonReport",
    "analyze_bins",
    "assign_bins",
    "auto_bin_spec",
    "bin_by_flow_count",
    "chi_square_critical",
    "compare_networks",
    "confidence_interval",
    "estimate_alpha",
    "fit_from_dict",
    "fit_operational_region",
    "fit_to_dict",
    "normal_quantile",
    "normality_test",
    "sigma_sqrtn_correlation",
    # detect
    "AnomalyCluster",
    "DetectorConfig",
    "classify_state",
    "cluster_summary",
    "detect_anomalies",
    "write_alert_log",
    "write_events_json",
    # estimators
    "EnvelopeAnomalyDetector",
    "OperationalRegionModel",
]
