"""Core domain types and tallying for competing-risks current status data.

A current status observation records a single inspection time together with
the subject's status at that time: 0 means the event of interest had not yet
occurred, and k in 1..K means the event had occurred with cause k.  All
estimators in this package consume a :class:`TallyTable`, the per-support-point
cause counts which are sufficient for the likelihood in the exact, discrete
and grouped observation-time models.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "Observation",
    "Dataset",
    "Interval",
    "GroupingScheme",
    "TallyTable",
    "StepEstimate",
    "RegularityFlags",
    "as_observation_arrays",
    "tally_discrete",
    "tally_grouped",
    "classify_regular",
]

CLOSURES = ("oo", "oc", "co", "cc")
ESTIMATE_KINDS = ("mle", "naive", "simple")
MODELS = ("discrete", "grouped", "smooth")


@dataclass(frozen=True)
class Observation:
    """One subject's inspection time and status indicator.

    ``status == 0`` encodes "event not yet occurred at the inspection time";
    ``status == k`` for k >= 1 encodes "event occurred with cause k".
    """

    time: float
    status: int

    def __post_init__(self):
        if not np.isfinite(self.time):
            raise ValueError("observation time must be finite")
        if int(self.status) != self.status or self.status < 0:
            raise ValueError("status must be a nonnegative integer")


class Dataset(Sequence):
    """A column-oriented sequence of observations.

    Behaves as a ``Sequence[Observation]`` but stores times and statuses as
    arrays so that tallying and resampling stay cheap for large samples.
    """

    __slots__ = ("times", "statuses")

    def __init__(self, times, statuses):
        times = np.asarray(times, dtype=float)
        statuses = np.asarray(statuses)
        if times.ndim != 1 or times.shape != statuses.shape:
            raise ValueError("times and statuses must be 1-D arrays of equal length")
        if not np.all(np.isfinite(times)):
            raise ValueError("observation time must be finite")
        if statuses.size and (
            not np.issubdtype(statuses.dtype, np.integer) and not np.all(statuses == statuses.astype(int))
        ):
            raise ValueError("status must be a nonnegative integer")
        statuses = statuses.astype(np.int64)
        if np.any(statuses < 0):
            raise ValueError("status must be a nonnegative integer")
        self.times = times
        self.statuses = statuses

    def __len__(self):
        return self.times.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Dataset(self.times[idx], self.statuses[idx])
        return Observation(float(self.times[idx]), int(self.statuses[idx]))

    def sorted(self) -> "Dataset":
        """Return a copy ordered by (time, status)."""
        order = np.lexsort((self.statuses, self.times))
        return Dataset(self.times[order], self.statuses[order])

    def take(self, indices) -> "Dataset":
        return Dataset(self.times[indices], self.statuses[indices])

    def __repr__(self):
        return f"Dataset(n={len(self)})"


def as_observation_arrays(observations) -> tuple[np.ndarray, np.ndarray]:
    """Normalize observation input to (times, statuses) arrays.

    Accepts a :class:`Dataset`, a sequence of :class:`Observation`, or a
    sequence of (time, status) pairs.  Raises on empty input.
    """
    if isinstance(observations, Dataset):
        if len(observations) == 0:
            raise ValueError("no observations")
        return observations.times, observations.statuses
    obs = list(observations)
    if not obs:
        raise ValueError("no observations")
    times = np.empty(len(obs), dtype=float)
    statuses = np.empty(len(obs), dtype=np.int64)
    for i, o in enumerate(obs):
        if isinstance(o, Observation):
            t, s = o.time, o.status
        else:
            t, s = o
        times[i] = t
        statuses[i] = s
    if not np.all(np.isfinite(times)):
        raise ValueError("observation time must be finite")
    if np.any(statuses < 0):
        raise ValueError("status must be a nonnegative integer")
    return times, statuses


@dataclass(frozen=True)
class Interval:
    """A real interval with explicit closure flags.

    ``closure`` is two letters, one per endpoint: "o" for open, "c" for
    closed.  The menopause-style age cell (25, 30] is ``Interval(25, 30, "oc")``.
    """

    lower: float
    upper: float
    closure: str = "oc"

    def __post_init__(self):
        if self.closure not in CLOSURES:
            raise ValueError(f"closure must be one of {CLOSURES}, got {self.closure!r}")
        if self.lower > self.upper:
            raise ValueError("interval lower bound exceeds upper bound")
        if self.lower == self.upper and self.closure != "cc":
            raise ValueError("degenerate interval must be closed on both ends")

    def contains(self, t):
        """Vectorized membership test honoring the closure flags."""
        t = np.asarray(t, dtype=float)
        left = t >= self.lower if self.closure[0] == "c" else t > self.lower
        right = t <= self.upper if self.closure[1] == "c" else t < self.upper
        return left & right


class GroupingScheme:
    """Ordered disjoint intervals with one representative point each.

    Observation times falling in an interval are recorded as (rounded to)
    that interval's representative.
    """

    __slots__ = ("intervals", "representatives")

    def __init__(self, intervals: Iterable[Interval], representatives):
        intervals = tuple(intervals)
        representatives = np.asarray(representatives, dtype=float)
        if len(intervals) != representatives.shape[0] or not intervals:
            raise ValueError("need one representative per interval")
        if np.any(np.diff(representatives) <= 0):
            raise ValueError("representatives must be strictly increasing")
        for iv, m in zip(intervals, representatives):
            if not bool(iv.contains(m)):
                raise ValueError(f"representative {m} lies outside its interval ({iv.lower}, {iv.upper})")
        for a, b in zip(intervals, intervals[1:]):
            if a.lower > b.lower:
                raise ValueError("intervals must be ordered by lower bound")
            touching_closed = a.closure[1] == "c" and b.closure[0] == "c"
            if a.upper > b.lower or (a.upper == b.lower and touching_closed):
                raise ValueError("intervals must be pairwise disjoint")
        self.intervals = intervals
        self.representatives = representatives

    def __len__(self):
        return len(self.intervals)

    def locate(self, times) -> np.ndarray:
        """Index of the covering interval for each time, -1 if uncovered."""
        times = np.asarray(times, dtype=float)
        out = np.full(times.shape, -1, dtype=np.int64)
        for i, iv in enumerate(self.intervals):
            hit = iv.contains(times)
            out[hit] = i
        return out

    @classmethod
    def regular_cells(cls, lower: float, upper: float, width: float, closure: str = "oc") -> "GroupingScheme":
        """Equal-width cells covering (lower, upper] with midpoint representatives."""
        ncells = int(round((upper - lower) / width))
        if ncells < 1 or abs(lower + ncells * width - upper) > 1e-9 * max(1.0, abs(upper)):
            raise ValueError("width must evenly divide the range")
        edges = lower + width * np.arange(ncells + 1)
        intervals = [Interval(edges[i], edges[i + 1], closure) for i in range(ncells)]
        mids = 0.5 * (edges[:-1] + edges[1:])
        return cls(intervals, mids)


class TallyTable:
    """Per-support-point cause counts, the sufficient statistic for estimation.

    ``counts[i, k-1]`` is the number of subjects inspected at ``support[i]``
    whose event had occurred with cause k; ``counts[i, K]`` counts those whose
    event had not yet occurred.  Counts are raw integers; divide by ``n`` for
    the empirical fractions.
    """

    __slots__ = ("support", "counts", "n", "K")

    def __init__(self, support, counts, n: int, K: int):
        support = np.asarray(support, dtype=float)
        counts = np.asarray(counts, dtype=np.int64)
        if K < 1:
            raise ValueError("K must be at least 1")
        if support.ndim != 1 or counts.shape != (support.shape[0], K + 1):
            raise ValueError("counts must have shape (len(support), K + 1)")
        if support.shape[0] == 0:
            raise ValueError("no observations")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if int(counts.sum()) != n:
            raise ValueError("counts must sum to n")
        self.support = support
        self.counts = counts
        self.n = int(n)
        self.K = int(K)

    @property
    def totals(self) -> np.ndarray:
        """Total number of subjects inspected at each support point."""
        return self.counts.sum(axis=1)

    @property
    def fractions(self) -> np.ndarray:
        """Counts divided by the sample size."""
        return self.counts / self.n

    def cause_counts(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.K:
            raise ValueError(f"cause index must be in 1..{self.K}")
        return self.counts[:, k - 1]

    @property
    def censored_counts(self) -> np.ndarray:
        return self.counts[:, self.K]

    def index_of(self, point: float) -> int:
        """Index of an exact support point; raises KeyError if absent."""
        i = int(np.searchsorted(self.support, point))
        if i == len(self.support) or self.support[i] != point:
            raise KeyError(f"point {point} not in support")
        return i

    def __repr__(self):
        return f"TallyTable(points={len(self.support)}, n={self.n}, K={self.K})"


@dataclass
class StepEstimate:
    """A K-vector of functions given by their values at the support points.

    Values between support points are not interpolated; step-function
    evaluation uses the value at the largest support point <= t (0 before the
    first).  ``kind`` is "mle", "naive" or "simple"; "mle" values are
    componentwise nondecreasing with pointwise sum <= 1, "naive" values are
    componentwise nondecreasing but the sum may exceed 1, and "simple" values
    carry no shape constraint.
    """

    support: np.ndarray
    values: np.ndarray
    kind: str
    model: str = "discrete"

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.support.shape[0]:
            raise ValueError("values must have shape (len(support), K)")
        if self.kind not in ESTIMATE_KINDS:
            raise ValueError(f"kind must be one of {ESTIMATE_KINDS}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if np.any(self.values < -1e-12) or np.any(self.values > 1 + 1e-12):
            raise ValueError("estimate values must lie in [0, 1]")
        if self.kind in ("mle", "naive") and np.any(np.diff(self.values, axis=0) < -1e-12):
            raise ValueError(f"{self.kind} estimate must be componentwise nondecreasing")
        if self.kind == "mle" and np.any(self.values.sum(axis=1) > 1 + 1e-10):
            raise ValueError("mle estimate must have pointwise sum <= 1")

    @property
    def K(self) -> int:
        return self.values.shape[1]

    def value_at(self, t, k: int | None = None):
        """Step-function evaluation at t (left-limit convention).

        Returns the K-vector at the largest support point <= t, or zeros when
        t precedes the whole support.  With ``k`` given, returns that cause's
        component only.
        """
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.support, t, side="right") - 1
        padded = np.vstack([np.zeros(self.values.shape[1]), self.values])
        out = padded[idx + 1]
        if k is not None:
            if not 1 <= k <= self.K:
                raise ValueError(f"cause index must be in 1..{self.K}")
            out = out[..., k - 1]
        return out if out.ndim else float(out)


def tally_discrete(observations, K: int) -> TallyTable:
    """Tally observations on their distinct inspection times.

    Ties are detected by bit-identical time values.  Works for both the
    discrete model (times drawn from a discrete law) and the smooth model,
    where the likelihood depends on the estimand only through its values at
    the observed times.

    Parameters
    ----------
    observations : Dataset or sequence of Observation / (time, status) pairs
    K : int
        Number of competing risks; all statuses must be <= K.
    """
    times, statuses = as_observation_arrays(observations)
    if K < 1:
        raise ValueError("K must be at least 1")
    if np.any(statuses > K):
        bad = int(statuses[statuses > K][0])
        raise ValueError(f"invalid cause label: status {bad} exceeds K={K}")
    support, inverse = np.unique(times, return_inverse=True)
    cols = np.where(statuses == 0, K, statuses - 1)
    flat = np.bincount(inverse * (K + 1) + cols, minlength=len(support) * (K + 1))
    counts = flat.reshape(len(support), K + 1)
    return TallyTable(support, counts, len(times), K)


def tally_grouped(observations, scheme: GroupingScheme, K: int) -> TallyTable:
    """Tally observations by grouping-scheme interval.

    Raw inspection times are rounded to the representative of the interval
    that covers them; a time outside every interval is an error, never a
    silent drop.  If every time already equals a representative the input is
    treated as pre-rounded and passed through.
    """
    times, statuses = as_observation_arrays(observations)
    if K < 1:
        raise ValueError("K must be at least 1")
    if np.any(statuses > K):
        bad = int(statuses[statuses > K][0])
        raise ValueError(f"invalid cause label: status {bad} exceeds K={K}")
    if np.isin(times, scheme.representatives).all():
        rounded = times
    else:
        idx = scheme.locate(times)
        if np.any(idx < 0):
            bad = float(times[idx < 0][0])
            raise ValueError(f"time not covered by grouping scheme: {bad}")
        rounded = scheme.representatives[idx]
    return tally_discrete(Dataset(rounded, statuses), K)


@dataclass
class RegularityFlags:
    """Per-point regularity classification of a candidate K-vector.

    ``reasons`` holds one code per point: "all_zero" (every component zero),
    "interior" (strict increase through both neighbors for every nonzero
    component), "boundary" (a support endpoint where only the one-sided
    condition applies), or "violation".  ``known_complete`` records whether
    the supplied support was asserted to be the full support of the
    observation-time law; endpoint classifications are only meaningful in
    that case.
    """

    support: np.ndarray
    regular: np.ndarray
    reasons: list[str]
    known_complete: bool = True


def classify_regular(support, values, known_complete: bool = True) -> RegularityFlags:
    """Classify each support point of a candidate as regular or not.

    A point is regular when all components are zero there, or when every
    nonzero component strictly increases from the left neighbor and to the
    right neighbor (one-sided at the support endpoints).  At regular points
    the estimators agree asymptotically and are jointly normal; the
    classification uses only the ordering of the support, not its values.

    Parameters
    ----------
    support : array
        Strictly increasing support points.
    values : array, shape (len(support), K)
        Candidate component values, in [0, 1] and componentwise nondecreasing.
    known_complete : bool
        Whether ``support`` is the full support of the observation-time law.
    """
    support = np.asarray(support, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != support.shape[0]:
        raise ValueError("values must have shape (len(support), K)")
    m = support.shape[0]
    regular = np.zeros(m, dtype=bool)
    reasons: list[str] = []
    for i in range(m):
        v = values[i]
        if np.all(v == 0.0):
            regular[i] = True
            reasons.append("all_zero")
            continue
        left_ok = i == 0 or np.all((values[i - 1] < v) | (v == 0.0))
        right_ok = i == m - 1 or np.all((v < values[i + 1]) | (v == 0.0))
        if left_ok and right_ok:
            regular[i] = True
            reasons.append("boundary" if i in (0, m - 1) else "interior")
        else:
            reasons.append("violation")
    return RegularityFlags(support, regular, reasons, known_complete)
