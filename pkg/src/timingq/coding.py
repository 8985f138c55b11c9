"""Timing codebooks, the encoder, and the maximum-likelihood decoder.

A codeword is an infinite sequence of packet inter-arrival gaps; message u
is transmitted by releasing packets at the codeword's epochs and the
receiver sees only departure times.  Decoding replays the queue's admission
rule against every hypothesized codeword: under hypothesis u the idle time
before departure i is a deterministic function of the observed departures,
so the residual d_i - w_{i-1} is the service time that hypothesis implies,
and the decoder scores it under the service density.

Codeword gaps are generated by hashing (seed, message, position) to a
uniform variate and inverting the inter-arrival CDF.  The accessor is a
pure function, which is what makes lazily extended "infinite" codewords
and replayable decoding possible without storing anything.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .distributions import _inter_arrival_law

__all__ = ["Codebook", "DecodeResult", "DecodeFailure",
           "encode", "reconstruct_idle", "ml_decode"]


class DecodeFailure(RuntimeError):
    """Every hypothesis was eliminated: no codeword is consistent with the
    observed departures under the service model's support."""


# --- hashing: SplitMix64 finalizer over numpy uint64, wraps mod 2^64 ---

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z):
    # wraparound mod 2^64 is the point; silence numpy's scalar overflow note
    with np.errstate(over="ignore"):
        z = (np.asarray(z, dtype=np.uint64) + _GAMMA)
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def _hash_uniform(base, j):
    """Uniform variates in the open interval (0, 1) from counter positions j."""
    with np.errstate(over="ignore"):
        bits = _mix64(base + np.asarray(j, dtype=np.uint64))
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


class Codebook:
    """M deterministic codewords of inter-arrival gaps, indexed u = 1..M.

    Every codeword starts with gap 0 (its first packet marks the time
    origin) and continues with strictly positive gaps.  Gaps come either
    from the hash-and-invert generator (the default, giving infinite
    codewords) or from explicit finite sequences via `from_sequences`.
    Epoch prefixes are cached per message and extended on demand; the cache
    is guarded so a codebook can be shared across worker threads.
    """

    def __init__(self, M: int, seed: int, inter_arrival):
        if M < 1:
            raise ValueError(f"M must be at least 1, got {M}")
        self.M = int(M)
        self.seed = int(seed) & (2**64 - 1)
        self.inter_arrival = _inter_arrival_law(inter_arrival)
        self._explicit = None
        self._gap_cache: dict[int, np.ndarray] = {}
        self._epochs: dict[int, np.ndarray] = {}
        self._matrix = None
        self._lock = threading.Lock()

    @classmethod
    def from_sequences(cls, sequences) -> "Codebook":
        """Build a codebook from explicit gap sequences (each starting 0)."""
        seqs = [np.asarray(s, dtype=float) for s in sequences]
        for s in seqs:
            if s.size == 0 or s[0] != 0.0:
                raise ValueError("each codeword must start with gap 0")
            if np.any(s[1:] <= 0):
                raise ValueError("codeword gaps after the first must be positive")
        cb = cls.__new__(cls)
        cb.M = len(seqs)
        cb.seed = 0
        cb.inter_arrival = None
        cb._explicit = seqs
        cb._gap_cache = {}
        cb._epochs = {u + 1: np.cumsum(s) for u, s in enumerate(seqs)}
        cb._matrix = None
        cb._lock = threading.Lock()
        if cb.M < 1:
            raise ValueError("need at least one codeword")
        return cb

    def _check_u(self, u: int) -> None:
        if not 1 <= u <= self.M:
            raise ValueError(f"message index {u} outside 1..{self.M}")

    def _base(self, u) -> np.uint64:
        return _mix64(np.uint64(self.seed) ^ _mix64(np.uint64(u)))

    def gaps(self, u: int, j_start: int, j_stop: int) -> np.ndarray:
        """Codeword gaps at positions j_start..j_stop-1 (positions >= 1)."""
        self._check_u(u)
        if self._explicit is not None:
            seq = self._explicit[u - 1]
            return seq[j_start:j_stop]
        j = np.arange(j_start, j_stop, dtype=np.uint64)
        return self.inter_arrival.ppf(_hash_uniform(self._base(u), j))

    def epochs(self, u: int, beyond: float) -> np.ndarray:
        """Arrival epochs of codeword u, extended until the last one exceeds
        `beyond` (or the codeword runs out, for explicit sequences).

        Epochs are always one cumulative sum over the full gap prefix, so
        the floats are identical no matter how the extension was chunked;
        that is what lets the decoder reproduce simulator-side idle times
        bit for bit.
        """
        self._check_u(u)
        with self._lock:
            ep = self._epochs.get(u)
            if ep is None:
                ep = np.zeros(1)
            while ep[-1] <= beyond:
                if self._explicit is not None:
                    break
                held = self._gap_cache.get(u, np.empty(0))
                grow = max(64, held.size)
                new = self.gaps(u, held.size + 1, held.size + 1 + grow)
                held = np.concatenate([held, new])
                self._gap_cache[u] = held
                ep = np.concatenate(([0.0], np.cumsum(held)))
            self._epochs[u] = ep
            return ep

    def epoch_matrix(self, beyond: float) -> np.ndarray:
        """Epochs of all M codewords as one (M, J) array covering `beyond`.

        Explicit codewords shorter than J are padded with +inf, which the
        decoder reads as "no further arrivals": any hypothesis forced past
        the end of its codeword is eliminated rather than erroring out.
        """
        with self._lock:
            if self._matrix is not None and np.min(self._matrix[:, -1]) > beyond:
                return self._matrix
            if self._explicit is not None:
                width = max(s.size for s in self._explicit)
                mat = np.full((self.M, width), np.inf)
                for row, s in enumerate(self._explicit):
                    mat[row, : s.size] = np.cumsum(s)
            else:
                width = 64
                mat = self._hashed_matrix(width)
                while np.min(mat[:, -1]) <= beyond:
                    width *= 2
                    mat = self._hashed_matrix(width)
            self._matrix = mat
            return mat

    def _hashed_matrix(self, width: int) -> np.ndarray:
        bases = self._base(np.arange(1, self.M + 1, dtype=np.uint64))
        j = np.arange(1, width + 1, dtype=np.uint64)
        uniforms = _hash_uniform(bases[:, None], j[None, :])
        gaps = self.inter_arrival.ppf(uniforms)
        epochs = np.empty((self.M, width + 1))
        epochs[:, 0] = 0.0
        np.cumsum(gaps, axis=1, out=epochs[:, 1:])
        return epochs


def encode(codebook: Codebook, u: int):
    """Yield the arrival gaps of codeword u: 0 first, then gap 1, 2, ...

    Infinite for hashed codebooks; explicit codebooks yield their stored
    gaps and stop.
    """
    codebook._check_u(u)
    yield 0.0
    if codebook._explicit is not None:
        yield from codebook._explicit[u - 1][1:]
        return
    j = 1
    while True:
        chunk = codebook.gaps(u, j, j + 256)
        yield from chunk.tolist()
        j += 256


def reconstruct_idle(codebook: Codebook, u: int, inter_departures) -> float:
    """Idle time implied by hypothesis u after the given departure gaps.

    With departures through epoch T = sum of the gaps, hypothesis u says the
    next admitted packet is the first codeword arrival strictly after T, so
    the server idles from T until that arrival.  Codeword entries are
    consumed lazily as needed.
    """
    d = np.asarray(inter_departures, dtype=float)
    if d.size == 0 or np.any(d < 0):
        raise ValueError("need a nonempty sequence of nonnegative departures")
    t = float(np.cumsum(d)[-1])
    ep = codebook.epochs(u, t)
    m = int(np.searchsorted(ep, t, side="right"))
    if m >= ep.size:
        raise ValueError("codeword exhausted before any arrival passed the last departure")
    return float(ep[m] - t)


def idle_path(codebook: Codebook, u: int, inter_departures) -> np.ndarray:
    """Hypothesis-u idle times before departures 1..n, as one vector.

    Entry i-1 is the idle time between departure i-1 and the admission of
    the packet that leaves as departure i, replayed from the codeword and
    the observed gaps d_0..d_{i-1} only.
    """
    d = np.asarray(inter_departures, dtype=float)
    t = np.cumsum(d)
    ep = codebook.epochs(u, float(t[-2]) if t.size > 1 else 0.0)
    idx = np.searchsorted(ep, t[:-1], side="right")
    w = np.full(t.size - 1, np.inf)
    ok = idx < ep.size
    w[ok] = ep[idx[ok]] - t[:-1][ok]
    return w


@dataclass
class DecodeResult:
    """Outcome of one maximum-likelihood decode.

    chosen: the 1-based message attaining the best score (smallest index
        on exact ties, with ties_broken set).
    scores: per-message log-likelihood of the observed departure gaps.
    """

    chosen: int
    scores: np.ndarray
    ties_broken: bool


def ml_decode(codebook: Codebook, inter_departures, service) -> DecodeResult:
    """Score every message against the observed departure gaps and pick the
    maximizer.

    For each hypothesis u the admission replay turns the gaps into implied
    service times d_i - w_{i-1}; the score is the sum of service
    log-densities over departures 1..n.  A nonpositive implied service time
    eliminates the hypothesis (score -inf).  If every hypothesis is
    eliminated a DecodeFailure is raised.
    """
    d = np.asarray(inter_departures, dtype=float)
    if d.ndim != 1 or d.size < 2:
        raise ValueError("need inter-departure gaps d_0..d_n with n >= 1")
    t = np.cumsum(d)
    n = d.size - 1

    mat = codebook.epoch_matrix(float(t[-2]))
    # first arrival strictly after each departure epoch, per hypothesis:
    # count epochs <= t gives the searchsorted 'right' insertion point
    idx = (mat[:, :, None] <= t[None, None, :n]).sum(axis=1)
    capped = np.minimum(idx, mat.shape[1] - 1)
    w = np.take_along_axis(mat, capped, axis=1) - t[None, :n]
    w[idx >= mat.shape[1]] = np.inf
    implied = d[None, 1:] - w

    scores = np.full(codebook.M, -np.inf)
    alive = (implied > 0).all(axis=1)
    if alive.any():
        lp = service.log_pdf(implied[alive])
        scores[alive] = np.sum(lp, axis=1)
    if not np.any(scores > -np.inf):
        raise DecodeFailure(
            "all hypotheses eliminated: no codeword admits positive service times")

    best = int(np.argmax(scores))
    ties = int(np.sum(scores == scores[best])) > 1
    return DecodeResult(chosen=best + 1, scores=scores, ties_broken=ties)
