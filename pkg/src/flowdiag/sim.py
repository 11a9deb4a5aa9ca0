"""Flow-level traffic simulator for a single link.

Flows arrive as a homogeneous Poisson process; each flow carries an
independently drawn size (bits) and duration (seconds) and transfers at the
constant rate ``size / duration`` (rectangular shape).  The aggregate rate
``B(t)`` is the sum over active flows and the active-flow count ``N(t)``
follows the classic infinite-server occupancy law, so long-run averages obey

    mean B = lambda * E[S]
    var  B = lambda * E[S^2 / D]
    mean N = lambda * E[D]

which is what :func:`theoretical_moments` reports.  :func:`apply_overload`
replays a flow population through a finite-capacity link with egalitarian
processor sharing and optional impatience.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import FlowRecord, TrafficSample

__all__ = [
    "DistSpec",
    "Impatience",
    "SimConfig",
    "MomentReport",
    "TimeAverages",
    "generate_flows",
    "sample_traffic",
    "theoretical_moments",
    "apply_overload",
    "time_average_stats",
    "load_sim_config",
    "parse_config_file",
]

# Stationarity warm-up: arrivals are also seeded on [-WARMUP_DURATIONS * E[D], 0)
# so that t = 0 starts near steady state.
WARMUP_DURATIONS = 10.0

_DIST_KINDS = ("constant", "exponential", "pareto", "lognormal")


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DistSpec:
    """A positive distribution identified by kind and mean.

    ``shape`` is the tail index for ``pareto`` (must exceed 1 so the mean is
    finite); ``sigma`` is the log-space standard deviation for ``lognormal``.
    """

    kind: str
    mean: float
    shape: float | None = None
    sigma: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _DIST_KINDS:
            raise ConfigError(f"dist kind must be one of {_DIST_KINDS}, got {self.kind!r}")
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ConfigError(f"dist mean must be positive and finite, got {self.mean}")
        if self.kind == "pareto":
            if self.shape is None:
                raise ConfigError("pareto dist requires a shape parameter")
            if not self.shape > 1:
                raise ConfigError(
                    f"pareto shape must be > 1 for a finite mean, got {self.shape}"
                )
        elif self.shape is not None:
            raise ConfigError(f"shape is only meaningful for pareto, not {self.kind}")
        if self.kind == "lognormal":
            if self.sigma is None:
                raise ConfigError("lognormal dist requires a sigma parameter")
            if not (self.sigma > 0 and math.isfinite(self.sigma)):
                raise ConfigError(f"lognormal sigma must be positive and finite, got {self.sigma}")
        elif self.sigma is not None:
            raise ConfigError(f"sigma is only meaningful for lognormal, not {self.kind}")

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` values; vectorized, consumes the given generator."""
        if self.kind == "constant":
            return np.full(count, self.mean)
        if self.kind == "exponential":
            return rng.exponential(self.mean, count)
        if self.kind == "pareto":
            # numpy draws the zero-based (Lomax) variant; shift to the
            # classical form supported on [scale, inf).
            return self._pareto_scale() * (1.0 + rng.pareto(self.shape, count))
        mu = self._lognormal_mu()
        return rng.lognormal(mu, self.sigma, count)

    def _pareto_scale(self) -> float:
        return self.mean * (self.shape - 1.0) / self.shape

    def _lognormal_mu(self) -> float:
        return math.log(self.mean) - 0.5 * self.sigma**2

    # -- closed-form moments ------------------------------------------------

    def second_moment(self) -> float:
        """E[X^2]; ``math.inf`` when the tail is too heavy (pareto shape <= 2)."""
        if self.kind == "constant":
            return self.mean**2
        if self.kind == "exponential":
            return 2.0 * self.mean**2
        if self.kind == "pareto":
            if self.shape <= 2:
                return math.inf
            scale = self._pareto_scale()
            return self.shape * scale**2 / (self.shape - 2.0)
        return self.mean**2 * math.exp(self.sigma**2)

    def reciprocal_mean(self) -> float:
        """E[1/X]; ``math.inf`` for the exponential (divergent at zero)."""
        if self.kind == "constant":
            return 1.0 / self.mean
        if self.kind == "exponential":
            return math.inf
        if self.kind == "pareto":
            return self.shape / ((self.shape + 1.0) * self._pareto_scale())
        return math.exp(self.sigma**2) / self.mean


@dataclass(frozen=True)
class Impatience:
    """Abort policy under overload.

    A flow is dropped once its instantaneous rate stays strictly below
    ``min_rate`` for longer than ``patience`` seconds.
    """

    min_rate: float
    patience: float

    def __post_init__(self) -> None:
        if not (self.min_rate > 0 and math.isfinite(self.min_rate)):
            raise ConfigError(f"min_rate must be positive and finite, got {self.min_rate}")
        if not (self.patience >= 0 and math.isfinite(self.patience)):
            raise ConfigError(f"patience must be >= 0 and finite, got {self.patience}")


@dataclass(frozen=True)
class SimConfig:
    """Full description of one simulation run."""

    arrival_rate: float  # flows per second ("lambda" in config files)
    size_dist: DistSpec  # bits per flow
    duration_dist: DistSpec  # seconds per flow
    horizon: float  # observation window [0, horizon] in seconds
    seed: int = 0
    capacity: float | None = None  # link capacity in bit/s; None = unconstrained
    impatience: Impatience | None = None
    warmup: bool = True  # seed arrivals before t=0 for a stationary start

    def __post_init__(self) -> None:
        if not (self.arrival_rate > 0 and math.isfinite(self.arrival_rate)):
            raise ConfigError(f"lambda must be > 0, got {self.arrival_rate}")
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise ConfigError(f"horizon must be >= 0 and finite, got {self.horizon}")
        if self.seed < 0 or self.seed != int(self.seed):
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        if self.capacity is not None and not (self.capacity > 0 and math.isfinite(self.capacity)):
            raise ConfigError(f"capacity must be positive and finite, got {self.capacity}")
        if self.impatience is not None and self.capacity is None:
            raise ConfigError("impatience requires a capacity")


@dataclass(frozen=True)
class MomentReport:
    """Closed-form long-run moments implied by a :class:`SimConfig`.

    ``mean_sq_size_over_dur`` and ``mean_flow_perf`` may be ``math.inf``
    when the duration law has no finite reciprocal moment (exponential).
    """

    mean_rate: float  # lambda * E[S], bit/s
    var_rate: float  # lambda * E[S^2] * E[1/D], (bit/s)^2
    mean_flows: float  # lambda * E[D]
    mean_size: float  # E[S], bits
    mean_duration: float  # E[D], seconds
    mean_sq_size_over_dur: float  # E[S^2] * E[1/D]
    mean_flow_perf: float  # E[S] * E[1/D], bit/s

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class TimeAverages:
    """Exact time-weighted statistics of a flow population on a window."""

    mean_rate: float
    var_rate: float
    mean_flows: float
    var_flows: float
    span: float


# --------------------------------------------------------------------------
# generation and sampling
# --------------------------------------------------------------------------


def generate_flows(config: SimConfig) -> list[FlowRecord]:
    """Draw a Poisson flow population for the configured window.

    Arrivals are homogeneous Poisson with rate ``config.arrival_rate`` on
    ``[-w, horizon)`` where the warm-up span ``w`` is ten mean durations
    (zero when ``config.warmup`` is false), so the observation window starts
    near steady state.  Deterministic for a fixed seed: the generator draws
    the arrival count, then arrival times, then sizes, then durations.
    """
    if config.horizon <= 0:
        return []
    rng = np.random.default_rng(config.seed)
    warm_span = WARMUP_DURATIONS * config.duration_dist.mean if config.warmup else 0.0
    span = config.horizon + warm_span
    count = int(rng.poisson(config.arrival_rate * span))
    arrivals = np.sort(rng.uniform(-warm_span, config.horizon, count))
    sizes = config.size_dist.sample(rng, count)
    durations = config.duration_dist.sample(rng, count)
    # tolist() hands plain floats to the constructor, which keeps record
    # creation cheap for the multi-hundred-thousand-flow runs.
    return [
        FlowRecord(t, s, d)
        for t, s, d in zip(arrivals.tolist(), sizes.tolist(), durations.tolist())
    ]


def _instant_index_ranges(
    arrivals: np.ndarray, ends: np.ndarray, interval: float, n_samples: int
) -> tuple[np.ndarray, np.ndarray]:
    """First/last sample index covered by each flow, boundary-exact.

    A flow is active at instant ``k * interval`` iff
    ``arrival <= k * interval <= end`` evaluated in float arithmetic; the
    index arithmetic below is corrected until it agrees with that predicate
    exactly, so vectorized sampling matches a brute-force recount bit for bit.
    """
    first = np.ceil(arrivals / interval).astype(np.int64)
    last = np.floor(ends / interval).astype(np.int64)
    for _ in range(3):  # float round-off moves an index by at most one step
        first -= (first - 1) * interval >= arrivals
        first += first * interval < arrivals
        last += (last + 1) * interval <= ends
        last -= last * interval > ends
    first = np.maximum(first, 0)
    last = np.minimum(last, n_samples - 1)
    return first, last


def sample_traffic(
    flows: list[FlowRecord], interval: float, horizon: float
) -> list[TrafficSample]:
    """Poll the aggregate state at every instant ``k * interval <= horizon``.

    A flow is counted while ``arrival_time <= t <= arrival_time + duration``
    (closed on both ends) and contributes its constant nominal rate.
    """
    if not (interval > 0 and math.isfinite(interval)):
        raise ConfigError(f"interval must be positive and finite, got {interval}")
    if not (horizon >= 0 and math.isfinite(horizon)):
        raise ConfigError(f"horizon must be >= 0 and finite, got {horizon}")
    n_samples = int(math.floor(horizon / interval)) + 1
    while n_samples * interval <= horizon:  # float-safe count of instants
        n_samples += 1
    while (n_samples - 1) * interval > horizon:
        n_samples -= 1

    rate_delta = np.zeros(n_samples + 1)
    count_delta = np.zeros(n_samples + 1, dtype=np.int64)
    if flows:
        arrivals = np.array([f.arrival_time for f in flows])
        ends = np.array([f.end_time for f in flows])
        rates = np.array([f.nominal_rate for f in flows])
        first, last = _instant_index_ranges(arrivals, ends, interval, n_samples)
        covered = first <= last
        first, last, rates = first[covered], last[covered], rates[covered]
        np.add.at(rate_delta, first, rates)
        np.add.at(rate_delta, last + 1, -rates)
        np.add.at(count_delta, first, 1)
        np.add.at(count_delta, last + 1, -1)
    total_rate = np.cumsum(rate_delta)[:n_samples]
    active = np.cumsum(count_delta)[:n_samples]
    # Clip float residue from the +/- rate accumulation.
    total_rate[active == 0] = 0.0
    np.maximum(total_rate, 0.0, out=total_rate)
    return [
        TrafficSample(timestamp=k * interval, active_flows=int(active[k]), total_rate=float(total_rate[k]))
        for k in range(n_samples)
    ]


def theoretical_moments(config: SimConfig) -> MomentReport:
    """Closed-form moments for the configured (unconstrained) link."""
    lam = config.arrival_rate
    mean_size = config.size_dist.mean
    mean_duration = config.duration_dist.mean
    recip_dur = config.duration_dist.reciprocal_mean()
    sq_size = config.size_dist.second_moment()
    mean_sq_size_over_dur = sq_size * recip_dur
    return MomentReport(
        mean_rate=lam * mean_size,
        var_rate=lam * mean_sq_size_over_dur,
        mean_flows=lam * mean_duration,
        mean_size=mean_size,
        mean_duration=mean_duration,
        mean_sq_size_over_dur=mean_sq_size_over_dur,
        mean_flow_perf=mean_size * recip_dur,
    )


# --------------------------------------------------------------------------
# exact time averages
# --------------------------------------------------------------------------


def time_average_stats(
    flows: list[FlowRecord], horizon: float, start: float = 0.0
) -> TimeAverages:
    """Exact time-weighted mean/variance of ``B(t)`` and ``N(t)`` on a window.

    Both processes are piecewise constant between flow starts and ends, so
    the integrals are computed from the event timeline with no sampling
    error; this is the limit of ever-finer polling.
    """
    if not horizon > start:
        raise ConfigError(f"window must have positive length, got [{start}, {horizon}]")
    span = horizon - start
    if not flows:
        return TimeAverages(0.0, 0.0, 0.0, 0.0, span)
    arrivals = np.array([f.arrival_time for f in flows])
    ends = np.array([f.end_time for f in flows])
    rates = np.array([f.nominal_rate for f in flows])
    lo = np.clip(arrivals, start, horizon)
    hi = np.clip(ends, start, horizon)
    covered = hi > lo
    lo, hi, rates = lo[covered], hi[covered], rates[covered]

    times = np.concatenate([lo, hi])
    rate_steps = np.concatenate([rates, -rates])
    count_steps = np.concatenate([np.ones(len(lo)), -np.ones(len(hi))])
    order = np.argsort(times, kind="stable")
    times = times[order]
    rate_level = np.cumsum(rate_steps[order])
    count_level = np.cumsum(count_steps[order])

    bounds = np.concatenate([[start], times, [horizon]])
    widths = np.diff(bounds)
    rate_piece = np.concatenate([[0.0], rate_level])
    count_piece = np.concatenate([[0.0], count_level])

    mean_rate = float(np.dot(rate_piece, widths) / span)
    mean_sq_rate = float(np.dot(rate_piece**2, widths) / span)
    mean_flows = float(np.dot(count_piece, widths) / span)
    mean_sq_flows = float(np.dot(count_piece**2, widths) / span)
    return TimeAverages(
        mean_rate=mean_rate,
        var_rate=max(mean_sq_rate - mean_rate**2, 0.0),
        mean_flows=mean_flows,
        var_flows=max(mean_sq_flows - mean_flows**2, 0.0),
        span=span,
    )


# --------------------------------------------------------------------------
# overload replay (egalitarian processor sharing)
# --------------------------------------------------------------------------


def _peak_demand(flows: list[FlowRecord]) -> float:
    times = np.concatenate(
        [[f.arrival_time for f in flows], [f.end_time for f in flows]]
    )
    steps = np.concatenate(
        [[f.nominal_rate for f in flows], [-f.nominal_rate for f in flows]]
    )
    order = np.argsort(times, kind="stable")
    # Starts sort before ends at equal instants (stable sort, starts were
    # concatenated first), so back-to-back handovers count as overlapping.
    return float(np.max(np.cumsum(steps[order]), initial=0.0))


class _SharedLinkSweep:
    """Event sweep for processor sharing with optional impatience.

    Every active flow demands its nominal rate; whenever total demand R
    exceeds capacity C, all rates are scaled by the common factor s = C/R.
    In virtual time v with dv = s*dt each flow finishes exactly when its
    nominal duration of virtual time has elapsed, which keeps completions
    in a single heap even though every rate changes at every event.
    """

    _COMPLETE, _ABORT, _ARRIVE = 0, 1, 2

    def __init__(self, flows: list[FlowRecord], capacity: float, impatience: Impatience | None):
        self.flows = sorted(flows, key=lambda f: f.arrival_time)
        self.capacity = capacity
        self.impatience = impatience
        self.t = -math.inf  # real clock
        self.v = 0.0  # virtual clock
        self.demand = 0.0
        self.scale = 1.0
        self.active: dict[int, FlowRecord] = {}
        self.v_start: dict[int, float] = {}
        self.completions: list[tuple[float, int]] = []  # (virtual deadline, id)
        self.next_arrival = 0
        # impatience bookkeeping
        self.thresholds: list[tuple[float, int]] = []  # sorted (min_rate / rate, id)
        self.below_since: dict[int, float] = {}
        self.generation: dict[int, int] = {}
        self.aborts: list[tuple[float, int, int]] = []  # (deadline, id, generation)
        self.out: list[FlowRecord] = []

    # -- event queue --------------------------------------------------------

    def _next_completion(self) -> tuple[float, int] | None:
        while self.completions and self.completions[0][1] not in self.active:
            heapq.heappop(self.completions)
        return self.completions[0] if self.completions else None

    def _next_abort(self) -> tuple[float, int, int] | None:
        while self.aborts:
            deadline, flow_id, gen = self.aborts[0]
            if flow_id in self.active and self.generation.get(flow_id) == gen:
                return self.aborts[0]
            heapq.heappop(self.aborts)
        return None

    def _pick_event(self) -> tuple[float, int, int] | None:
        """Return (time, kind, flow_id) of the earliest pending event."""
        best: tuple[float, int, int] | None = None
        completion = self._next_completion()
        if completion is not None:
            v_deadline, flow_id = completion
            when = max(self.t, self.t + (v_deadline - self.v) / self.scale)
            best = (when, self._COMPLETE, flow_id)
        abort = self._next_abort()
        if abort is not None:
            when, flow_id, _ = abort
            candidate = (max(when, self.t), self._ABORT, flow_id)
            if best is None or candidate[:2] < best[:2]:
                best = candidate
        if self.next_arrival < len(self.flows):
            candidate = (self.flows[self.next_arrival].arrival_time, self._ARRIVE, self.next_arrival)
            if best is None or candidate[:2] < best[:2]:
                best = candidate
        return best

    # -- state transitions --------------------------------------------------

    def _advance(self, when: float) -> None:
        if self.t == -math.inf:
            self.t = when
            return
        self.v += (when - self.t) * self.scale
        self.t = when

    def _set_scale(self) -> None:
        old = self.scale
        self.scale = min(1.0, self.capacity / self.demand) if self.demand > 0 else 1.0
        if self.impatience is not None and self.scale != old:
            self._update_below(old, self.scale)

    def _update_below(self, old: float, new: float) -> None:
        # A flow is rate-starved while scale < min_rate / nominal_rate.
        if new < old:
            lo = bisect_right(self.thresholds, (new, math.inf))
            hi = bisect_right(self.thresholds, (old, math.inf))
            for threshold, flow_id in self.thresholds[lo:hi]:
                if flow_id not in self.below_since:
                    self._start_timer(flow_id)
        else:
            lo = bisect_right(self.thresholds, (old, math.inf))
            hi = bisect_right(self.thresholds, (new, math.inf))
            for threshold, flow_id in self.thresholds[lo:hi]:
                if flow_id in self.below_since:
                    del self.below_since[flow_id]
                    self.generation[flow_id] += 1

    def _start_timer(self, flow_id: int) -> None:
        self.below_since[flow_id] = self.t
        self.generation[flow_id] += 1
        heapq.heappush(
            self.aborts,
            (self.t + self.impatience.patience, flow_id, self.generation[flow_id]),
        )

    def _add_flow(self, flow_id: int) -> None:
        flow = self.flows[flow_id]
        self.active[flow_id] = flow
        self.v_start[flow_id] = self.v
        self.demand += flow.nominal_rate
        heapq.heappush(self.completions, (self.v + flow.duration, flow_id))
        if self.impatience is not None:
            threshold = self.impatience.min_rate / flow.nominal_rate
            insort(self.thresholds, (threshold, flow_id))
            self.generation[flow_id] = 0
            if self.scale < threshold:  # starved from the first instant
                self._start_timer(flow_id)
        self._set_scale()

    def _remove_flow(self, flow_id: int) -> None:
        flow = self.active.pop(flow_id)
        self.demand -= flow.nominal_rate
        if self.impatience is not None:
            threshold = self.impatience.min_rate / flow.nominal_rate
            index = bisect_left(self.thresholds, (threshold, flow_id))
            del self.thresholds[index]
            self.below_since.pop(flow_id, None)
            self.generation[flow_id] += 1
        self._set_scale()

    # -- event handlers ------------------------------------------------------

    def _complete(self, flow_id: int) -> None:
        flow = self.active[flow_id]
        self.out.append(
            FlowRecord(
                arrival_time=flow.arrival_time,
                size=flow.size,
                duration=self.t - flow.arrival_time,
                rate_shape=flow.rate_shape,
            )
        )
        self._remove_flow(flow_id)

    def _abort(self, flow_id: int) -> None:
        flow = self.active[flow_id]
        transferred = flow.nominal_rate * (self.v - self.v_start[flow_id])
        elapsed = self.t - flow.arrival_time
        if transferred > 0 and elapsed > 0:
            self.out.append(
                FlowRecord(
                    arrival_time=flow.arrival_time,
                    size=transferred,
                    duration=elapsed,
                    rate_shape=flow.rate_shape,
                )
            )
        self._remove_flow(flow_id)

    def run(self) -> list[FlowRecord]:
        while True:
            event = self._pick_event()
            if event is None:
                break
            when, kind, flow_id = event
            self._advance(when)
            if kind == self._ARRIVE:
                self.next_arrival += 1
                self._add_flow(flow_id)
            elif kind == self._COMPLETE:
                self._complete(flow_id)
            else:
                # Flows whose patience expires at the same instant give up
                # together: snapshot the whole batch before aborting any of
                # them, so the rate recovery from one abort cannot rescue a
                # sibling that was already out of patience at this instant.
                batch = [flow_id]
                heapq.heappop(self.aborts)
                while True:
                    pending = self._next_abort()
                    if pending is None or pending[0] > when:
                        break
                    heapq.heappop(self.aborts)
                    batch.append(pending[1])
                for member in batch:
                    if member in self.active:
                        self._abort(member)
        self.out.sort(key=lambda f: f.arrival_time)
        return self.out


def apply_overload(
    flows: list[FlowRecord],
    capacity: float,
    impatience: Impatience | None = None,
) -> list[FlowRecord]:
    """Replay a flow population through a finite-capacity link.

    While aggregate nominal demand exceeds ``capacity`` every active flow's
    instantaneous rate is scaled by ``capacity / demand``, so transfers
    stretch in time but still carry their full size — unless an
    ``impatience`` policy aborts them, in which case the realized record is
    truncated to the bits moved so far (flows aborted before moving any bits
    are dropped).  If capacity is never exceeded the input is returned
    unchanged.
    """
    if not (capacity > 0 and math.isfinite(capacity)):
        raise ConfigError(f"capacity must be positive and finite, got {capacity}")
    if not flows:
        return []
    if _peak_demand(flows) <= capacity:
        return list(flows)
    return _SharedLinkSweep(flows, capacity, impatience).run()


# --------------------------------------------------------------------------
# configuration files
# --------------------------------------------------------------------------

_CONFIG_KEYS = {
    "lambda",
    "horizon",
    "seed",
    "size_dist",
    "size_mean",
    "size_shape",
    "size_sigma",
    "duration_dist",
    "duration_mean",
    "duration_shape",
    "duration_sigma",
    "capacity",
    "min_rate",
    "patience",
    "warmup",
    "interval",
}

_TRUE_WORDS = {"true", "yes", "1", "on"}
_FALSE_WORDS = {"false", "no", "0", "off"}


def parse_config_file(path: str) -> dict[str, str]:
    """Read a ``key = value`` file (``#`` comments, blank lines allowed)."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {number}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"line {number}: unknown config key {key!r}")
            if key in values:
                raise ConfigError(f"line {number}: duplicate config key {key!r}")
            values[key] = value
    return values


def _config_float(values: dict[str, str], key: str) -> float:
    try:
        return float(values[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number: {values[key]!r}") from exc


def _dist_from_config(values: dict[str, str], prefix: str) -> DistSpec:
    kind_key, mean_key = f"{prefix}_dist", f"{prefix}_mean"
    for key in (kind_key, mean_key):
        if key not in values:
            raise ConfigError(f"{key}: required key missing")
    kind = values[kind_key]
    if kind not in _DIST_KINDS:
        raise ConfigError(f"{kind_key}: must be one of {_DIST_KINDS}, got {kind!r}")
    shape = sigma = None
    if f"{prefix}_shape" in values:
        shape = _config_float(values, f"{prefix}_shape")
    if f"{prefix}_sigma" in values:
        sigma = _config_float(values, f"{prefix}_sigma")
    try:
        return DistSpec(kind=kind, mean=_config_float(values, mean_key), shape=shape, sigma=sigma)
    except ConfigError as exc:
        raise ConfigError(f"{prefix}_dist: {exc}") from exc


def sim_config_from_mapping(values: dict[str, str]) -> SimConfig:
    """Build a :class:`SimConfig` from parsed key/value strings.

    The ``interval`` key (polling period, used by the command line when
    writing sample files) is not part of the simulation itself and is
    ignored here.
    """
    for key in ("lambda", "horizon"):
        if key not in values:
            raise ConfigError(f"{key}: required key missing")
    arrival_rate = _config_float(values, "lambda")
    if not arrival_rate > 0:
        raise ConfigError(f"lambda must be > 0, got {arrival_rate}")
    capacity = _config_float(values, "capacity") if "capacity" in values else None
    impatience = None
    if ("min_rate" in values) != ("patience" in values):
        raise ConfigError("min_rate and patience must be configured together")
    if "min_rate" in values:
        impatience = Impatience(
            min_rate=_config_float(values, "min_rate"),
            patience=_config_float(values, "patience"),
        )
    warmup = True
    if "warmup" in values:
        word = values["warmup"].lower()
        if word in _TRUE_WORDS:
            warmup = True
        elif word in _FALSE_WORDS:
            warmup = False
        else:
            raise ConfigError(f"warmup: expected a boolean word, got {values['warmup']!r}")
    seed = 0
    if "seed" in values:
        try:
            seed = int(values["seed"])
        except ValueError as exc:
            raise ConfigError(f"seed: not an integer: {values['seed']!r}") from exc
    return SimConfig(
        arrival_rate=arrival_rate,
        size_dist=_dist_from_config(values, "size"),
        duration_dist=_dist_from_config(values, "duration"),
        horizon=_config_float(values, "horizon"),
        seed=seed,
        capacity=capacity,
        impatience=impatience,
        warmup=warmup,
    )


def load_sim_config(path: str) -> SimConfig:
    """Load a simulation configuration from a ``key = value`` file."""
    return sim_config_from_mapping(parse_config_file(path))
