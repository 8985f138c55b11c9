"""Event simulation of the bufferless single-server queue.

The server takes one packet at a time and has no waiting room: any arrival
during an ongoing service is silently dropped.  Writing T for the epoch of
the previous departure, the next admitted packet is the earliest arrival
strictly after T; the gap between T and that arrival is the server's idle
time, and the next inter-departure gap is idle time plus the new service
duration.  The first packet arrives at time 0 and is always admitted.

The admitted-index rule lives in `admitted_indices` as a pure function so
the decoder can replay it against hypothesized arrival sequences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _output

__all__ = [
    "ArrivalsExhausted",
    "SimConfig",
    "QueueTrace",
    "simulate",
    "admitted_indices",
    "expected_decode_time",
    "trace_csv",
]

_CHUNK = 1024


class ArrivalsExhausted(RuntimeError):
    """A finite explicit arrival sequence ended before enough departures."""


def admitted_indices(arrival_epochs, departure_epochs) -> np.ndarray:
    """Admitted packet indices for as many departures as the arrivals resolve.

    Index 0 is always admitted (service starts at the first arrival).  After
    the i-th departure the next admitted packet is the first arrival whose
    epoch strictly exceeds that departure epoch; an arrival landing exactly
    on a departure epoch is dropped.  Departures whose successor lies beyond
    the last known arrival are left unresolved, so the result holds the
    longest prefix computable from the given arrivals.
    """
    epochs = np.asarray(arrival_epochs, dtype=float)
    deps = np.asarray(departure_epochs, dtype=float)
    if epochs.ndim != 1 or deps.ndim != 1 or epochs.size == 0:
        raise ValueError("expected one-dimensional, nonempty epoch sequences")
    if np.any(np.diff(epochs) < 0) or np.any(np.diff(deps) < 0):
        raise ValueError("epoch sequences must be nondecreasing")
    nxt = np.searchsorted(epochs, deps, side="right")
    resolved = int(np.searchsorted(nxt, epochs.size, side="left"))
    return np.concatenate(([0], nxt[:resolved])).astype(np.intp)


@dataclass
class SimConfig:
    """Inputs for one simulated trace.

    arrival: a process model (PoissonProcess / RenewalProcess), a bare
        duration model for the gaps, or an explicit gap sequence / iterator
        whose first element is 0 (the time-origin packet).
    service: a duration model, or an explicit sequence of at least n+1
        positive service times.
    n: number of departures to observe beyond the zeroth.
    seed: 64-bit integer; model-driven draws are reproducible given it.
    """

    arrival: object
    service: object
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")


@dataclass
class QueueTrace:
    """One realization: arrivals, admissions, services, idles, departures.

    Inter-times and cumulative epochs are stored redundantly so that every
    defining relation can be checked in place by `validate`.
    """

    arrival_epochs: np.ndarray
    admitted_indices: np.ndarray
    service_times: np.ndarray
    idle_times: np.ndarray
    inter_departures: np.ndarray
    departure_epochs: np.ndarray

    @property
    def n(self) -> int:
        return len(self.inter_departures) - 1

    def validate(self) -> None:
        k = self.admitted_indices
        s = self.service_times
        w = self.idle_times
        d = self.inter_departures
        t = self.departure_epochs
        if not (len(k) == len(s) == len(d) == len(t) == len(w) + 1):
            raise ValueError("trace field lengths are inconsistent")
        if k[0] != 0:
            raise ValueError("packet 0 must be admitted")
        if np.any(np.diff(k) <= 0):
            raise ValueError("admitted indices must be strictly increasing")
        if not np.all(w > 0):
            raise ValueError("idle times must be strictly positive")
        if d[0] != s[0] or not np.array_equal(d[1:], w + s[1:]):
            raise ValueError("inter-departures must equal idle + service")
        if not np.array_equal(t, np.cumsum(d)):
            raise ValueError("departure epochs must be the running sum of gaps")
        replay = admitted_indices(self.arrival_epochs, t[:-1])
        if len(replay) < len(k) or not np.array_equal(replay[: len(k)], k):
            raise ValueError("admitted indices disagree with the admission rule")
        # no arrival strictly between two admissions may postdate the
        # departure that the later admission answers to
        if np.any(self.arrival_epochs < 0):
            raise ValueError("arrival epochs must be nonnegative")


class _EpochBuffer:
    """Arrival epochs materialized on demand from a model or a gap source."""

    def __init__(self, arrival, rng):
        self._law = None
        self._iter = None
        self._rng = rng
        self._exhausted = False
        sample = getattr(arrival, "sample", None)
        inter = getattr(arrival, "inter_arrival", None)
        if inter is not None and hasattr(inter, "sample"):
            self._law = inter
        elif callable(sample):
            self._law = arrival
        else:
            self._iter = iter(arrival)
            first = next(self._iter, None)
            if first is None or float(first) != 0.0:
                raise ValueError(
                    "explicit arrival gaps must start with 0, the time-origin packet")
        self._gaps = np.empty(0)
        self.epochs = np.zeros(1)

    def _extend(self) -> bool:
        if self._law is not None:
            new = self._law.sample(self._rng, size=_CHUNK)
        else:
            if self._exhausted:
                return False
            new = np.array(list(itertools.islice(self._iter, _CHUNK)), dtype=float)
            if new.size < _CHUNK:
                self._exhausted = True
            if new.size == 0:
                return False
        if np.any(new <= 0):
            raise ValueError("arrival gaps after the first must be positive")
        # one cumulative sum over the whole gap prefix: epoch floats must not
        # depend on chunk boundaries, or the decoder could not replay them
        self._gaps = np.concatenate([self._gaps, new])
        self.epochs = np.concatenate(([0.0], np.cumsum(self._gaps)))
        return True

    def first_after(self, t: float) -> int:
        """Index of the earliest arrival with epoch strictly greater than t."""
        while self.epochs[-1] <= t:
            if not self._extend():
                raise ArrivalsExhausted(
                    f"arrival sequence ended at epoch {float(self.epochs[-1])!r}, "
                    f"none remain after departure epoch {float(t)!r}")
        return int(np.searchsorted(self.epochs, t, side="right"))


def _service_draws(service, count, rng):
    if hasattr(service, "sample"):
        return np.asarray(service.sample(rng, size=count), dtype=float)
    s = np.asarray(service, dtype=float)
    if s.size < count:
        raise ValueError(f"need {count} explicit service times, got {s.size}")
    if np.any(s[:count] <= 0):
        raise ValueError("service times must be positive")
    return s[:count]


def simulate(config: SimConfig) -> QueueTrace:
    """Run the queue for n departures past the zeroth and return the trace.

    Model-driven arrivals and services draw from independent child streams
    of the seed, so lazy arrival extension never disturbs service draws.
    Raises ArrivalsExhausted when a finite explicit arrival sequence cannot
    supply the next admission.
    """
    arrival_child, service_child = np.random.SeedSequence(config.seed).spawn(2)
    buf = _EpochBuffer(config.arrival, np.random.default_rng(arrival_child))
    services = _service_draws(config.service, config.n + 1,
                              np.random.default_rng(service_child))

    admitted = [0]
    idles = np.empty(config.n)
    gaps = np.empty(config.n + 1)
    gaps[0] = services[0]
    t = float(services[0])
    for i in range(1, config.n + 1):
        m = buf.first_after(t)
        idles[i - 1] = buf.epochs[m] - t
        gaps[i] = idles[i - 1] + services[i]
        t += gaps[i]
        admitted.append(m)

    last = admitted[-1]
    trace = QueueTrace(
        arrival_epochs=buf.epochs[: last + 1].copy(),
        admitted_indices=np.asarray(admitted, dtype=np.intp),
        service_times=services.copy(),
        idle_times=idles,
        inter_departures=gaps,
        departure_epochs=np.cumsum(gaps),
    )
    trace.validate()
    return trace


def expected_decode_time(lam: float, service, n: int) -> float:
    """Expected epoch of departure n: one mean service for the zeroth packet
    plus n cycles of mean idle (1/lam, by memorylessness of the arrivals)
    and mean service."""
    mean = service.mean() if hasattr(service, "mean") else float(service)
    return mean + n * (1.0 / lam + mean)


def trace_csv(trace: QueueTrace, config: dict | None = None) -> str:
    """Render a trace as CSV, one row per departure.

    Columns are (i, k_i, S_i, W_{i-1}, D_i, departure_epoch); the idle cell
    is empty on row 0, which has no preceding departure.
    """
    columns = ["i", "k_i", "S_i", "W_{i-1}", "D_i", "departure_epoch"]
    rows = []
    for i in range(len(trace.inter_departures)):
        rows.append((
            i,
            int(trace.admitted_indices[i]),
            trace.service_times[i],
            None if i == 0 else trace.idle_times[i - 1],
            trace.inter_departures[i],
            trace.departure_epochs[i],
        ))
    return _output.csv_text(columns, rows, config)
