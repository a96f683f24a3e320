"""Independent oracles used by the test and acceptance suites.

Nothing here is part of the estimation path: the lattice optimizer evaluates
candidate values directly on a value grid, and the convex-minorant slopes are
computed geometrically from the lower hull of the cumulative sum diagram.
They exist to certify the estimators, not to serve requests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TallyTable

__all__ = ["OracleResult", "brute_force_mle", "gcm_slopes", "brute_force_monotone_binomial"]

_MAX_POINTS = 3
_MAX_CAUSES = 2


@dataclass(frozen=True)
class OracleResult:
    optimum: float
    argmax: np.ndarray
    grid_step: float


def _log_levels(levels):
    with np.errstate(divide="ignore"):
        return np.log(levels)


def brute_force_mle(tally: TallyTable, grid_step: float) -> OracleResult:
    """Exact maximizer of the joint likelihood over the value lattice.

    Searches all componentwise-nondecreasing candidates with pointwise sum
    <= 1 whose values are multiples of ``grid_step``, by dynamic programming
    over per-point lattice states (exhaustive over the lattice: every
    feasible candidate is a monotone path through the state tables).  Ties
    resolve to the lexicographically smallest state per point.  The search
    streams over lattice rows, so fine grids cost time, not memory.
    """
    m = len(tally.support)
    K = tally.K
    if m > _MAX_POINTS or K > _MAX_CAUSES:
        raise ValueError("oracle limit exceeded: need |support| <= 3 and K <= 2")
    if not 0 < grid_step <= 0.1:
        raise ValueError("grid_step must lie in (0, 0.1]")
    G = int(round(1.0 / grid_step))
    levels = np.arange(G + 1) / G
    counts = tally.counts
    if K == 1:
        optimum, states = _dp_univariate(counts, levels)
        argmax = levels[states][:, None]
    else:
        optimum, states = _dp_bivariate(counts, levels)
        argmax = np.array([[levels[i], levels[j]] for i, j in states])
    return OracleResult(float(optimum), argmax, grid_step)


def _dp_univariate(counts, levels):
    m = len(counts)
    logL = _log_levels(levels)
    logS = _log_levels(1.0 - levels)
    tables = []
    running = 0.0
    for s in range(m):
        a, c = counts[s]
        phi = np.zeros(len(levels))
        if a > 0:
            phi = phi + a * logL
        if c > 0:
            phi = phi + c * logS
        table = phi + running
        running = np.maximum.accumulate(table)
        tables.append(table)
    states = [int(np.argmax(tables[-1]))]
    for s in range(m - 2, -1, -1):
        states.append(int(np.argmax(tables[s][: states[-1] + 1])))
    states.reverse()
    return float(tables[-1][states[-1]]), states


def _dp_bivariate(counts, levels):
    m = len(counts)
    G = len(levels) - 1
    logL = _log_levels(levels)

    def phi_row(s, r):
        a1, a2, cc = counts[s]
        row = np.zeros(G + 1)
        if a1 > 0:
            row = row + a1 * logL[r]
        if a2 > 0:
            row = row + a2 * logL
        survivor = 1.0 - levels[r] - levels
        if cc > 0:
            with np.errstate(divide="ignore"):
                row = row + cc * np.log(np.maximum(survivor, 0.0))
        return np.where(survivor < -1e-12, -np.inf, row)

    def forward(track_point, max_row, col_limit):
        # prefix-max rows per point, streamed over the cause-1 level index
        prefix = [np.full(G + 1, -np.inf) for _ in range(track_point + 1)]
        best = -np.inf
        arg = (0, 0)
        for r in range(max_row + 1):
            for s in range(track_point + 1):
                row = phi_row(s, r)
                if s > 0:
                    row = row + prefix[s - 1]
                np.maximum(prefix[s], np.maximum.accumulate(row), out=prefix[s])
                if s == track_point:
                    sub = row[: col_limit + 1]
                    j = int(np.argmax(sub))
                    if sub[j] > best:
                        best = float(sub[j])
                        arg = (r, j)
        return best, arg

    optimum, arg = forward(m - 1, G, G)
    states = [arg]
    for s in range(m - 2, -1, -1):
        _, arg = forward(s, states[-1][0], states[-1][1])
        states.append(arg)
    states.reverse()
    return optimum, states


def gcm_slopes(diagram) -> np.ndarray:
    """Left slopes of the greatest convex minorant of a cumulative diagram.

    ``diagram`` is a sequence of (cumulative weight, cumulative sum) points
    with strictly increasing weights; the first point anchors the minorant
    and slopes are returned for each subsequent point.  Hull membership is
    decided by cross products, so integer-valued diagrams are handled
    exactly; collinear points pool into a single segment.
    """
    pts = np.asarray(diagram, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("diagram must be a sequence of at least two (weight, sum) points")
    w, s = pts[:, 0], pts[:, 1]
    if np.any(np.diff(w) <= 0):
        raise ValueError("diagram weights must be strictly increasing")
    hull = [0]
    for i in range(1, len(pts)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b when it lies on or above the chord a -> i
            if (s[b] - s[a]) * (w[i] - w[a]) >= (s[i] - s[a]) * (w[b] - w[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    slopes = np.empty(len(pts) - 1)
    for a, b in zip(hull[:-1], hull[1:]):
        slopes[a:b] = (s[b] - s[a]) / (w[b] - w[a])
    return slopes


def brute_force_monotone_binomial(events, totals, grid_step: float, pin: tuple[int, float] | None = None):
    """Exhaustive monotone maximizer of a binomial likelihood on a lattice.

    Enumerates nondecreasing vectors with values in {0, step, ..., 1} (the
    pinned index, if given, takes exactly the pinned value) and returns the
    best (log likelihood, vector).  Only intended for tiny instances.
    """
    events = np.asarray(events, dtype=float)
    totals = np.asarray(totals, dtype=float)
    m = len(events)
    if m > 5:
        raise ValueError("oracle limit exceeded")
    G = int(round(1.0 / grid_step))
    level_sets = []
    for i in range(m):
        vals = list(np.arange(G + 1) / G)
        if pin is not None and i == pin[0]:
            vals = [pin[1]]
        level_sets.append(vals)

    def loglik(vec):
        ll = 0.0
        for d, t, v in zip(events, totals, vec):
            if d > 0:
                ll += d * (np.log(v) if v > 0 else -np.inf)
            if t - d > 0:
                ll += (t - d) * (np.log(1 - v) if v < 1 else -np.inf)
        return ll

    best_ll = -np.inf
    best_vec = None
    stack = [(0, ())]
    while stack:
        i, prefix = stack.pop()
        if i == m:
            ll = loglik(prefix)
            if ll > best_ll:
                best_ll, best_vec = ll, prefix
            continue
        lo = prefix[-1] if prefix else 0.0
        for v in level_sets[i]:
            if v >= lo - 1e-15:
                stack.append((i + 1, prefix + (v,)))
    return best_ll, np.array(best_vec)
