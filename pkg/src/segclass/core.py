"""Shared domain types, configuration and the project-wide RNG contract.

Boundaries are always stored as observation counts: a segmentation of n
observations is an increasing integer sequence starting at 0 and ending at n,
and a boundary b means "b observations lie before the cut". Segments are the
half-open index ranges (u, v].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "TimeSeriesMatrix",
    "Segmentation",
    "SegmentBounds",
    "DetectionConfig",
    "make_rng_stream",
    "ceil_count",
    "as_series",
    "InputError",
    "SegmentTooShortError",
]

DEFAULT_ETA = float(np.exp(-6.0))


class InputError(ValueError):
    """Raised when user-supplied data or parameters violate a contract."""


class SegmentTooShortError(InputError):
    """Raised when a segment cannot host any admissible split candidate."""


def ceil_count(x: float) -> int:
    """Ceiling of ``x`` that is robust to float noise in products like 0.1*600.

    Values within 1e-9 of an integer are treated as that integer.
    """
    f = int(np.floor(x))
    return f if x - f <= 1e-9 else f + 1


@dataclass(frozen=True)
class TimeSeriesMatrix:
    """An n-by-d matrix of time-ordered observations (rows = time order)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C")  # owned copy
        if arr.ndim != 2:
            raise InputError(f"expected a 2-D matrix, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError(f"matrix must be at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("matrix contains NaN or infinite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def as_series(x) -> TimeSeriesMatrix:
    """Coerce an array-like (or pass through a TimeSeriesMatrix) to a series."""
    if isinstance(x, TimeSeriesMatrix):
        return x
    return TimeSeriesMatrix(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class Segmentation:
    """Ordered boundary set {0, a_1, ..., n} splitting [1, n] into segments."""

    boundaries: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(v) for v in self.boundaries)
        if len(b) < 2:
            raise InputError("a segmentation needs at least the boundaries (0, n)")
        if b[0] != 0:
            raise InputError(f"first boundary must be 0, got {b[0]}")
        for prev, cur in zip(b, b[1:]):
            if cur <= prev:
                raise InputError(f"boundaries must be strictly increasing, got {b}")
        object.__setattr__(self, "boundaries", b)

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def n_segments(self) -> int:
        return len(self.boundaries) - 1

    @property
    def changepoints(self) -> tuple[int, ...]:
        """Interior boundaries (excludes 0 and n)."""
        return self.boundaries[1:-1]

    def segment_lengths(self) -> tuple[int, ...]:
        b = self.boundaries
        return tuple(b[i + 1] - b[i] for i in range(len(b) - 1))

    @classmethod
    def from_lengths(cls, lengths: Iterable[int]) -> "Segmentation":
        bounds = [0]
        for length in lengths:
            bounds.append(bounds[-1] + int(length))
        return cls(tuple(bounds))

    def labels(self) -> np.ndarray:
        """Segment membership (0-based segment index) per observation."""
        out = np.empty(self.n, dtype=np.int64)
        for k in range(self.n_segments):
            out[self.boundaries[k]:self.boundaries[k + 1]] = k
        return out


@dataclass(frozen=True)
class SegmentBounds:
    """The half-open observation range (u, v]."""

    u: int
    v: int

    def __post_init__(self):
        if not (0 <= self.u < self.v):
            raise InputError(f"need 0 <= u < v, got u={self.u}, v={self.v}")

    @property
    def length(self) -> int:
        return self.v - self.u


VALID_METHODS = ("random_forest", "knn", "change_in_mean")


@dataclass(frozen=True)
class DetectionConfig:
    """Knobs shared by every detection run.

    delta is the minimum relative segment length; splits are only considered
    at least ceil(delta*n) observations away from the enclosing boundaries.
    """

    delta: float = 0.01
    eta: float = DEFAULT_ETA
    threshold: float = 0.02
    permutations: int = 199
    seed: int = 0
    method: str = "random_forest"
    method_params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise InputError(f"delta must be in (0, 0.5), got {self.delta}")
        if not 0.0 < self.eta < 1.0:
            raise InputError(f"eta must be in (0, 1), got {self.eta}")
        if not 0.0 < self.threshold < 1.0:
            raise InputError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.permutations < 1:
            raise InputError("permutations must be >= 1")
        if self.seed < 0:
            raise InputError("seed must be a non-negative integer")
        if self.method not in VALID_METHODS:
            raise InputError(
                f"method must be one of {VALID_METHODS}, got {self.method!r}")

    def min_segment(self, n: int) -> int:
        """ceil(delta * n); delta*n >= 1 is required at detection time."""
        if self.delta * n < 1.0 - 1e-9:
            raise InputError(
                f"delta*n must be >= 1 at detection time (delta={self.delta}, n={n})")
        return ceil_count(self.delta * n)


def make_rng_stream(seed: int, stream: int | Sequence[int] = 0) -> np.random.Generator:
    """A reproducible, counter-based random stream.

    Philox is used project-wide so that identical (seed, stream) pairs yield
    identical sequences regardless of platform, thread count or the order in
    which streams are consumed. ``stream`` may be a single id or a tuple of
    ids (e.g. segment bounds) identifying a derived stream.
    """
    if isinstance(stream, (int, np.integer)):
        key = (int(stream),)
    else:
        key = tuple(int(s) for s in stream)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
