"""Capacity analysis toolkit for the bufferless single-server timing queue.

Information rides on packet timing: a sender schedules arrivals, the
bufferless server drops whatever shows up mid-service, and the receiver
observes departure times only.  This package simulates that channel,
decodes timing codewords by maximum likelihood, evaluates the converse
capacity bounds, and verifies achievable rates by Monte Carlo
information-density estimation.
"""

from .achievability import (
    InfoDensityReport,
    TrialFailure,
    decode_rate_experiment,
    empirical_liminf,
    info_density_report,
    info_density_trial,
)
from .bounds import (
    BoundCurve,
    OptimumReport,
    c_upper,
    cas_bound,
    g_rho,
    hypoexp_entropy_rewritten,
    maximize_rate,
    per_service_time,
    rate_R,
    rate_R_normalized,
    sweep,
    universal_bound,
    universal_bound_at,
)
from .coding import (
    Codebook,
    DecodeFailure,
    DecodeResult,
    encode,
    idle_path,
    ml_decode,
    reconstruct_idle,
)
from .distributions import (
    Deterministic,
    Erlang,
    Exponential,
    Hypoexponential,
    NumericalConvolution,
    PoissonProcess,
    QuadratureError,
    RenewalProcess,
    Uniform,
    hypoexp_entropy,
)
from .queue_sim import (
    ArrivalsExhausted,
    QueueTrace,
    SimConfig,
    admitted_indices,
    expected_decode_time,
    simulate,
    trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalsExhausted",
    "BoundCurve",
    "Codebook",
    "DecodeFailure",
    "DecodeResult",
    "Deterministic",
    "Erlang",
    "Exponential",
    "Hypoexponential",
    "InfoDensityReport",
    "NumericalConvolution",
    "OptimumReport",
    "PoissonProcess",
    "QuadratureError",
    "QueueTrace",
    "RenewalProcess",
    "SimConfig",
    "TrialFailure",
    "Uniform",
    "admitted_indices",
    "c_upper",
    "cas_bound",
    "decode_rate_experiment",
    "empirical_liminf",
    "encode",
    "expected_decode_time",
    "g_rho",
    "hypoexp_entropy",
    "hypoexp_entropy_rewritten",
    "idle_path",
    "info_density_report",
    "info_density_trial",
    "maximize_rate",
    "ml_decode",
    "per_service_time",
    "rate_R",
    "rate_R_normalized",
    "reconstruct_idle",
    "simulate",
    "sweep",
    "trace_csv",
    "universal_bound",
    "universal_bound_at",
]
