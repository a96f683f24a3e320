"""Simple, naive and maximum likelihood estimators over a tally.

All three estimators act on a :class:`~crstatus.core.TallyTable`:

* the simple estimator is the per-point ratio of cause counts to the point
  total, the unconstrained-model maximizer;
* the naive estimator maximizes each cause's marginal binomial likelihood
  over nondecreasing vectors (weighted isotonic regression, equivalently the
  left slopes of the greatest convex minorant of the cumulative sum diagram);
* the maximum likelihood estimator maximizes the joint likelihood over
  K-vectors that are componentwise nondecreasing with pointwise sum <= 1.

The joint maximizer is computed by cyclic per-cause iterative-convex-minorant
steps (weighted isotonic regression of a Newton surrogate with backtracking
line search), interleaved with expectation-maximization sweeps on the mass
parametrization.  The EM sweeps reallocate mass across causes jointly, which
the per-cause steps cannot do once the pointwise sum constraint is active.
Every accepted step increases the likelihood, and the returned iterate is
certified by a first-order optimality residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import StepEstimate, TallyTable
from .isotonic import isotonic_ratio, weighted_isotonic

__all__ = [
    "SolverSettings",
    "MLEResult",
    "NonConvergenceError",
    "log_likelihood",
    "marginal_log_likelihood",
    "simple_estimator",
    "naive_estimator",
    "naive_estimate_all",
    "constrained_naive",
    "kkt_residual",
    "fit_mle",
    "mle",
]


@dataclass(frozen=True)
class SolverSettings:
    """Tuning knobs for the joint maximum likelihood solver."""

    max_outer_iterations: int = 10_000
    likelihood_tolerance: float = 1e-12  # relative improvement per outer sweep
    kkt_tolerance: float = 1e-8
    line_search_contraction: float = 0.5
    log_floor: float = 1e-14  # floor inside logs during iteration only

    def __post_init__(self):
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be positive")
        if min(self.likelihood_tolerance, self.kkt_tolerance, self.log_floor) <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.line_search_contraction < 1:
            raise ValueError("line search contraction must be in (0, 1)")


def _count_log_terms(counts, values) -> np.ndarray:
    # counts * log(values) with the 0*log(0)=0 convention; positive count on a
    # nonpositive value yields -inf
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(np.maximum(values, 0.0))
        terms = np.where(counts > 0, counts * logs, 0.0)
    return terms


def log_likelihood(tally: TallyTable, values) -> float:
    """Joint log likelihood of a candidate K-vector, using raw counts.

    The candidate's implicit (K+1)-th component is one minus the pointwise
    sum.  Terms with zero count contribute zero even when the corresponding
    value is zero; a positive count on a zero value gives ``-inf``.
    """
    values = np.asarray(values, dtype=float)
    K = tally.K
    if values.shape != (len(tally.support), K):
        raise ValueError("values must have shape (len(support), K)")
    survivor = 1.0 - values.sum(axis=1)
    event_terms = _count_log_terms(tally.counts[:, :K], values)
    censored_terms = _count_log_terms(tally.censored_counts, survivor)
    return float(event_terms.sum() + censored_terms.sum())


def marginal_log_likelihood(tally: TallyTable, k: int, component) -> float:
    """Binomial log likelihood of one cause's component, using raw counts."""
    component = np.asarray(component, dtype=float)
    events = tally.cause_counts(k)
    others = tally.totals - events
    terms = _count_log_terms(events, component) + _count_log_terms(others, 1.0 - component)
    return float(terms.sum())


def simple_estimator(tally: TallyTable, model: str = "discrete") -> StepEstimate:
    """Per-point ratio estimator: cause count over point total, with 0/0 = 0.

    This is the maximizer of the joint likelihood once the monotonicity
    constraints are dropped, so its likelihood dominates every candidate with
    nonnegative components and pointwise sum <= 1.
    """
    totals = tally.totals
    denom = np.where(totals > 0, totals, 1)
    values = tally.counts[:, : tally.K] / denom[:, None]
    values[totals == 0] = 0.0
    return StepEstimate(tally.support, values, kind="simple", model=model)


def _forward_fill(values: np.ndarray, included: np.ndarray) -> np.ndarray:
    """Assign excluded points the value of the nearest preceding included one."""
    if included.all():
        return values
    idx = np.where(included, np.arange(len(values)), -1)
    idx = np.maximum.accumulate(idx)
    return np.where(idx >= 0, values[np.maximum(idx, 0)], 0.0)


def naive_estimator(tally: TallyTable, k: int) -> np.ndarray:
    """Monotone marginal maximizer for cause k.

    Weighted isotonic regression of the per-point event fraction with the
    point totals as weights; equivalently the left-slope sequence of the
    greatest convex minorant of the cumulative sum diagram.  Points with zero
    total are excluded from the diagram and take the value of the nearest
    preceding included point (0 if none).
    """
    events = tally.cause_counts(k)
    totals = tally.totals
    included = totals > 0
    fit = isotonic_ratio(events[included], totals[included])
    values = np.zeros(len(tally.support))
    values[included] = fit
    return _forward_fill(values, included)


def naive_estimate_all(tally: TallyTable, model: str = "discrete") -> StepEstimate:
    """All K naive components stacked into a StepEstimate."""
    values = np.column_stack([naive_estimator(tally, k) for k in range(1, tally.K + 1)])
    return StepEstimate(tally.support, values, kind="naive", model=model)


def constrained_naive(tally: TallyTable, k: int, t0: float, theta: float) -> np.ndarray:
    """Monotone marginal maximizer for cause k with its value pinned at t0.

    The constraint splits the problem at t0: points before t0 solve their own
    isotonic problem capped above at theta, points after t0 solve theirs
    floored below at theta, and the value at t0 is theta itself.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    i0 = tally.index_of(t0)
    events = tally.cause_counts(k)
    totals = tally.totals
    m = len(tally.support)

    def side_fit(indices):
        vals = np.zeros(len(indices))
        if len(indices) == 0:
            return vals
        included = totals[indices] > 0
        if included.any():
            vals[included] = isotonic_ratio(events[indices][included], totals[indices][included])
        return _forward_fill(vals, included)

    out = np.empty(m)
    left = np.arange(0, i0)
    right = np.arange(i0 + 1, m)
    out[left] = np.minimum(side_fit(left), theta)
    out[i0] = theta
    out[right] = np.maximum(side_fit(right), theta)
    return out


def kkt_residual(tally: TallyTable, values, mass_tol: float = 1e-9) -> float:
    """First-order optimality residual of a feasible candidate, 0 at an optimum.

    In the mass parametrization (per-point increments of each component plus
    a tail mass) the joint problem is a concave maximization over a simplex,
    so optimality reduces to: every cell's aggregated gradient is at most the
    total count, with equality on cells carrying mass.  Expressed on the
    candidate values this gives, per cause, right-to-left partial sums of the
    per-point gradients that must not exceed the slack of the pointwise-sum
    constraint, with equality wherever the component increases.  Counts are
    scaled by 1/n so the residual is in per-observation units.

    Returns ``inf`` when a positive count sits on a zero value.
    """
    x = np.asarray(values, dtype=float)
    K = tally.K
    if x.shape != (len(tally.support), K):
        raise ValueError("values must have shape (len(support), K)")
    a = tally.counts[:, :K] / tally.n
    c = tally.censored_counts / tally.n
    survivor = 1.0 - x.sum(axis=1)
    if np.any((a > 0) & (x <= 0)) or np.any((c > 0) & (survivor <= 0)):
        return float("inf")
    grad_event = np.divide(a, x, out=np.zeros_like(a), where=a > 0)
    grad_cens = np.divide(c, survivor, out=np.zeros_like(c), where=c > 0)
    g = grad_event - grad_cens[:, None]
    # right-to-left partial sums: cell (k, i) aggregates gradients at points >= i
    tail_sums = np.cumsum(g[::-1], axis=0)[::-1]
    slack = 1.0 - grad_cens.sum()  # multiplier of the binding sum constraint
    increments = np.diff(x, axis=0, prepend=0.0)
    mass = increments > mass_tol
    tail_mass = 1.0 - x[-1].sum()

    violations = [max(0.0, -slack), max(0.0, float((tail_sums - slack).max()))]
    if tail_mass > mass_tol:
        violations.append(abs(slack))
    if mass.any():
        violations.append(float(np.abs(tail_sums[mass] - slack).max()))
    return max(violations)


def _newton_polish(x, ll, tally, settings):
    """Damped Newton steps on the active mass cells.

    Once the sweeps have settled which cells carry mass, the reduced problem
    (log likelihood as a function of the active masses, tail eliminated) is
    smooth and strictly concave, so a few Newton steps reach machine
    precision where the fixed-point maps only contract linearly.  Steps are
    capped at the nonnegativity boundary, the total-mass constraint is kept
    as an equality when the tail carries no mass, and every step is
    safeguarded by the likelihood.
    """
    m, K = x.shape
    a = tally.counts[:, :K].astype(float)
    c = tally.censored_counts.astype(float)
    active_tol = 1e-10
    improved = False
    for _ in range(12):
        mu = np.diff(x, axis=0, prepend=0.0)
        tail = 1.0 - x[-1].sum()
        cells = np.argwhere(mu > active_tol)
        if len(cells) == 0:
            return x, ll, improved
        survivor = 1.0 - x.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ge = np.divide(a, x, out=np.zeros_like(a), where=a > 0)
            gc = np.divide(c, survivor, out=np.zeros(m), where=c > 0)
            wa = np.divide(a, x * x, out=np.zeros_like(a), where=a > 0)
            wc = np.divide(c, survivor * survivor, out=np.zeros(m), where=c > 0)
        grad_full = np.cumsum((ge - gc[:, None])[::-1], axis=0)[::-1]
        suff_a = np.cumsum(wa[::-1], axis=0)[::-1]
        suff_c = np.cumsum(wc[::-1])[::-1]
        rows = cells[:, 0]
        ks = cells[:, 1]
        grad = grad_full[rows, ks]
        later = np.maximum.outer(rows, rows)
        hess = -suff_c[later]
        same = np.equal.outer(ks, ks)
        hess = np.where(same, hess - suff_a[later, ks[:, None]], hess)
        # tiny ridge keeps transiently collinear cells solvable
        hess[np.diag_indices_from(hess)] -= 1e-12 * (1.0 + np.abs(hess.diagonal()))
        try:
            if tail > active_tol:
                step = np.linalg.solve(hess, -grad)
            else:
                p = len(cells)
                bordered = np.zeros((p + 1, p + 1))
                bordered[:p, :p] = hess
                bordered[:p, p] = 1.0
                bordered[p, :p] = 1.0
                rhs = np.concatenate([-grad, [0.0]])
                step = np.linalg.solve(bordered, rhs)[:p]
        except np.linalg.LinAlgError:
            return x, ll, improved
        mu_act = mu[rows, ks]
        t_max = 1.0
        shrinking = step < 0
        if shrinking.any():
            t_max = min(t_max, float(np.min(-mu_act[shrinking] / step[shrinking])))
        if tail > active_tol and step.sum() > 0:
            t_max = min(t_max, tail / float(step.sum()))
        if t_max <= 0:
            return x, ll, improved
        slack = 32.0 * np.finfo(float).eps * (1.0 + abs(ll))
        t = t_max
        accepted = False
        for _ in range(40):
            mu_trial = mu.copy()
            mu_trial[rows, ks] = np.maximum(mu_act + t * step, 0.0)
            x_trial = np.cumsum(mu_trial, axis=0)
            ll_trial = _raw_log_likelihood(tally, x_trial)
            if ll_trial >= ll - slack:
                x, ll = x_trial, ll_trial
                accepted = True
                improved = True
                break
            t *= settings.line_search_contraction
        if not accepted:
            return x, ll, improved
        if float(np.abs(grad - (grad.mean() if tail <= active_tol else 0.0)).max()) < 1e-12 * tally.n:
            return x, ll, improved
    return x, ll, improved


class NonConvergenceError(RuntimeError):
    """Raised when the joint solver exhausts its iteration budget.

    Carries the last iterate so callers can inspect or report it.
    """

    def __init__(self, message: str, estimate: StepEstimate, log_likelihood: float, kkt_residual: float):
        super().__init__(message)
        self.estimate = estimate
        self.log_likelihood = log_likelihood
        self.kkt_residual = kkt_residual


@dataclass
class MLEResult:
    """Joint maximizer plus solver diagnostics."""

    estimate: StepEstimate
    iterations: int
    log_likelihood: float
    kkt_residual: float
    converged: bool
    likelihood_path: list[float]


def _first_positive_index(column: np.ndarray) -> int:
    nz = np.nonzero(column)[0]
    return int(nz[0]) if len(nz) else len(column)


def _initial_values(tally: TallyTable) -> np.ndarray:
    # monotonized simple estimator, rescaled so the sum constraint is slack
    values = np.column_stack([naive_estimator(tally, k) for k in range(1, tally.K + 1)])
    max_sum = values.sum(axis=1).max()
    scale = (1.0 - 1e-6) / max(1.0, max_sum)
    return values * scale


def _icm_cause_step(x, k, events, censored, first_pos, current_ll, tally, settings):
    """One iterative-convex-minorant step on cause k with backtracking."""
    m = x.shape[0]
    if first_pos >= m:
        return x, current_ll
    xk = x[:, k]
    headroom = 1.0 - (x.sum(axis=1) - xk)
    floor = settings.log_floor
    xs = np.maximum(xk, floor)
    gap = np.maximum(headroom - xk, floor)
    grad = np.divide(events, xs, out=np.zeros(m), where=events > 0)
    grad -= np.divide(censored, gap, out=np.zeros(m), where=censored > 0)
    curv = np.divide(events, xs * xs, out=np.zeros(m), where=events > 0)
    curv += np.divide(censored, gap * gap, out=np.zeros(m), where=censored > 0)
    active = (curv > 0) & (np.arange(m) >= first_pos)
    if not active.any():
        return x, current_ll
    target = np.zeros(m)
    target[active] = np.clip(
        weighted_isotonic(xk[active] + grad[active] / curv[active], curv[active]), 0.0, 1.0
    )
    target = _forward_fill(target, active)
    target[:first_pos] = 0.0
    direction = target - xk
    if not np.any(direction):
        return x, current_ll
    others = x.sum(axis=1) - xk
    # allow a few ulps of apparent descent: near the optimum genuine ascent
    # drops below the float resolution of the summed log likelihood while the
    # surrogate step still contracts toward the maximizer
    slack = 32.0 * np.finfo(float).eps * (1.0 + abs(current_ll))
    t = 1.0
    for _ in range(80):
        candidate = xk + t * direction
        if np.all(others + candidate <= 1.0):
            trial = x.copy()
            trial[:, k] = candidate
            trial_ll = _raw_log_likelihood(tally, trial)
            if trial_ll >= current_ll - slack:
                return trial, trial_ll
        t *= settings.line_search_contraction
    return x, current_ll


def _em_sweep(x, tally):
    """One EM update of the mass parametrization; reallocates across causes."""
    m, K = x.shape
    a = tally.counts[:, :K].astype(float)
    c = tally.censored_counts.astype(float)
    n = float(tally.n)
    survivor = 1.0 - x.sum(axis=1)
    event_ratio = np.divide(a, x, out=np.zeros_like(a), where=a > 0)
    cens_ratio = np.divide(c, survivor, out=np.zeros(m), where=c > 0)
    # cell (k, i) is compatible with cause-k events at points >= i and with
    # censored observations at points < i; the tail cell with all censored
    weight = np.cumsum(event_ratio[::-1], axis=0)[::-1]
    weight += np.concatenate([[0.0], np.cumsum(cens_ratio)[:-1]])[:, None]
    increments = np.maximum(np.diff(x, axis=0, prepend=0.0), 0.0)
    tail = max(0.0, 1.0 - x[-1].sum())
    new_inc = increments * weight / n
    new_tail = tail * cens_ratio.sum() / n
    total = new_inc.sum() + new_tail
    if total > 1.0:
        new_inc /= total
    return np.cumsum(new_inc, axis=0)


def _raw_log_likelihood(tally, values):
    survivor = 1.0 - values.sum(axis=1)
    terms = _count_log_terms(tally.counts[:, : tally.K], values)
    terms_c = _count_log_terms(tally.censored_counts, survivor)
    return float(terms.sum() + terms_c.sum())


def _cell_gradients(x, tally):
    """Aggregated likelihood gradient of each mass cell and the tail cell."""
    m, K = x.shape
    a = tally.counts[:, :K].astype(float)
    c = tally.censored_counts.astype(float)
    survivor = 1.0 - x.sum(axis=1)
    event_ratio = np.divide(a, x, out=np.zeros_like(a), where=a > 0)
    cens_ratio = np.divide(c, survivor, out=np.zeros(m), where=c > 0)
    d = np.cumsum(event_ratio[::-1], axis=0)[::-1]
    d += np.concatenate([[0.0], np.cumsum(cens_ratio)[:-1]])[:, None]
    return d, float(cens_ratio.sum()), survivor


def _exchange_step(x, tally, current_ll, settings):
    """Move mass from the worst mass cell to the best cell, exact line search.

    Handles weakly active boundary cells, where the optimum carries zero mass
    but the per-cause steps and the EM sweep converge only sublinearly.  The
    transfer amount solves the one-dimensional stationarity condition (the
    likelihood difference itself can be below float resolution even when the
    move matters for the optimality certificate).
    """
    m, K = x.shape
    d, d_tail, survivor = _cell_gradients(x, tally)
    increments = np.diff(x, axis=0, prepend=0.0)
    tail = 1.0 - x[-1].sum()

    donor = None  # (kind, point index, cause index, cell gradient, mass)
    best = np.inf
    for k in range(K):
        for i in range(m):
            if increments[i, k] > 0 and d[i, k] < best:
                best = d[i, k]
                donor = ("cell", i, k, d[i, k], increments[i, k])
    if tail > 0 and d_tail < best:
        donor = ("tail", m, -1, d_tail, tail)
    if donor is None:
        return x, current_ll, False
    flat = int(np.argmax(d))
    rec_i, rec_k = np.unravel_index(flat, d.shape)
    recipient = ("cell", int(rec_i), int(rec_k), float(d[rec_i, rec_k]))
    if d_tail > recipient[3]:
        recipient = ("tail", m, -1, d_tail)
    gain = recipient[3] - donor[3]
    if gain <= 1e-13 * tally.n:
        return x, current_ll, False

    a = tally.counts[:, :K].astype(float)
    c = tally.censored_counts.astype(float)
    idx = np.arange(m)
    # per-observation-group direction weights for the transfer
    w_event = np.zeros((m, K))
    w_cens = np.zeros(m)
    if recipient[0] == "cell":
        w_event[:, recipient[2]] += (idx >= recipient[1]).astype(float)
        w_cens += (idx < recipient[1]).astype(float)
    else:
        w_cens += 1.0
    if donor[0] == "cell":
        w_event[:, donor[2]] -= (idx >= donor[1]).astype(float)
        w_cens -= (idx < donor[1]).astype(float)
    else:
        w_cens -= 1.0

    cap = donor[4]
    # rows that gain mass must keep their pointwise sum <= 1
    row_gain = np.zeros(m)
    if recipient[0] == "cell":
        row_gain[recipient[1] :] += 1.0
    if donor[0] == "cell":
        row_gain[donor[1] :] -= 1.0
    gaining = row_gain > 0
    if gaining.any():
        cap = min(cap, float(survivor[gaining].min()))
    if cap <= 0:
        return x, current_ll, False

    def slope(delta):
        pe = x + delta * w_event
        pc = survivor + delta * w_cens
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.divide(a * w_event, pe, out=np.zeros_like(a), where=(a > 0) & (w_event != 0))
            terms_c = np.divide(c * w_cens, pc, out=np.zeros(m), where=(c > 0) & (w_cens != 0))
        return float(terms.sum() + terms_c.sum())

    if slope(cap) >= 0:
        delta = cap
    else:
        lo, hi = 0.0, cap
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if slope(mid) > 0:
                lo = mid
            else:
                hi = mid
        delta = lo
    if delta <= 0:
        return x, current_ll, False
    trial = x + delta * w_event
    trial_ll = _raw_log_likelihood(tally, trial)
    slack = 32.0 * np.finfo(float).eps * (1.0 + abs(current_ll))
    if trial_ll >= current_ll - slack:
        return trial, trial_ll, True
    return x, current_ll, False


def _fill_likelihood_free(x, tally) -> np.ndarray:
    # a cell (point, cause) with no cause-k count and no censored count at
    # that point does not enter the likelihood; pin it to the value of the
    # previous point for a deterministic, minimal representation
    out = x.copy()
    free_rows = tally.censored_counts == 0
    for k in range(tally.K):
        free = free_rows & (tally.counts[:, k] == 0)
        if free.any():
            out[:, k] = _forward_fill(np.where(free, 0.0, out[:, k]), ~free)
    return out


def fit_mle(tally: TallyTable, settings: SolverSettings | None = None, model: str = "discrete") -> MLEResult:
    """Compute the joint maximum likelihood estimate with diagnostics.

    For K = 1 the joint likelihood coincides with the marginal binomial
    likelihood, so the naive estimator is returned directly.  Otherwise the
    solver alternates cyclic per-cause convex-minorant steps with EM sweeps,
    both accepted only on likelihood ascent, until the optimality residual
    falls below ``settings.kkt_tolerance``.

    Raises
    ------
    NonConvergenceError
        If the residual is still above tolerance after
        ``settings.max_outer_iterations`` sweeps; the error carries the last
        iterate, its likelihood and its residual.
    """
    settings = settings or SolverSettings()
    if tally.K == 1:
        values = naive_estimator(tally, 1)[:, None]
        estimate = StepEstimate(tally.support, values, kind="mle", model=model)
        ll = _raw_log_likelihood(tally, values)
        return MLEResult(estimate, 0, ll, kkt_residual(tally, values), True, [ll])

    K = tally.K
    events = [tally.cause_counts(k) for k in range(1, K + 1)]
    censored = tally.censored_counts
    first_pos = [_first_positive_index(e) for e in events]

    def sweep(x, ll):
        # cyclic per-cause convex-minorant steps, then EM (an ascent step by
        # construction: it maximizes the minorizing surrogate exactly, so it
        # is accepted unconditionally and its float-evaluated likelihood may
        # wobble by ulps near the optimum), then a mass exchange
        for k in range(K):
            x, ll = _icm_cause_step(x, k, events[k], censored, first_pos[k], ll, tally, settings)
        x = _em_sweep(x, tally)
        ll = _raw_log_likelihood(tally, x)
        x, ll, _ = _exchange_step(x, tally, ll, settings)
        return x, ll

    def to_mass(values):
        return np.diff(values, axis=0, prepend=0.0)

    x = _initial_values(tally)
    ll = _raw_log_likelihood(tally, x)
    path = [ll]
    check_period = 10
    for it in range(1, settings.max_outer_iterations + 1):
        ll_before = ll
        x1, ll1 = sweep(x, ll)
        x2, ll2 = sweep(x1, ll1)
        # squared extrapolation of the two-sweep fixed-point map, done in the
        # mass parametrization (feasibility there is just nonnegativity and
        # total mass <= 1) and safeguarded by the likelihood
        mu0, mu1, mu2 = to_mass(x), to_mass(x1), to_mass(x2)
        r = mu1 - mu0
        v = (mu2 - mu1) - r
        vnorm = float(np.sqrt((v * v).sum()))
        if vnorm > 0:
            alpha = -float(np.sqrt((r * r).sum())) / vnorm
            if alpha < -1.0:
                cand = np.maximum(mu0 - 2.0 * alpha * r + alpha * alpha * v, 0.0)
                total = float(cand.sum())
                if total > 1.0:
                    cand /= total
                xc = np.cumsum(cand, axis=0)
                llc = _raw_log_likelihood(tally, xc)
                if llc >= ll2:
                    x2, ll2 = xc, llc
        x, ll = x2, ll2
        stalled = ll - ll_before <= settings.likelihood_tolerance * (1.0 + abs(ll_before))
        if stalled or it % check_period == 0:
            x, ll, _ = _newton_polish(x, ll, tally, settings)
            filled = _fill_likelihood_free(x, tally)
            residual = kkt_residual(tally, filled, mass_tol=settings.kkt_tolerance / 10)
            if residual <= settings.kkt_tolerance:
                path.append(ll)
                estimate = StepEstimate(tally.support, filled, kind="mle", model=model)
                return MLEResult(estimate, it, ll, residual, True, path)
        path.append(ll)
    filled = _fill_likelihood_free(x, tally)
    residual = kkt_residual(tally, filled, mass_tol=settings.kkt_tolerance / 10)
    estimate = StepEstimate(tally.support, filled, kind="mle", model=model)
    raise NonConvergenceError(
        f"solver did not reach optimality residual {settings.kkt_tolerance:g} "
        f"within {settings.max_outer_iterations} sweeps (residual {residual:.3e})",
        estimate,
        ll,
        residual,
    )


def mle(tally: TallyTable, settings: SolverSettings | None = None, model: str = "discrete") -> StepEstimate:
    """Joint maximum likelihood estimate (see :func:`fit_mle` for diagnostics)."""
    return fit_mle(tally, settings=settings, model=model).estimate
