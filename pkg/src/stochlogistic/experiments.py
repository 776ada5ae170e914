"""Orchestrated experiments: bifurcation sweeps, evolution of an
initial distribution under the transfer operator, stochastic-versus-
deterministic mean comparisons with z-scored verdicts, the lemma
verification suite for the two-cycle regime, and the sign scanner for
the alternation of the mean inequality across period-2^rho regimes.

Every experiment is a pure function of its configuration and seed;
reruns produce identical artifacts byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import Regime, classify_regime, detect_period, periodic_orbit
from .errors import ConvergenceError, DomainError, WindowNotFoundError
from .maps import INIT_STREAM, ParameterDistribution, generate_path, stream_rng
from .measure import (
    Histogram,
    MonteCarloConfig,
    ensemble_time_mean,
    pf_iterate,
    pf_step,
    right_derivative_profile,
    stationary_stats,
    time_average,
    time_average_se,
    uniform_ensemble,
)

#: z threshold separating a conclusive verdict from Monte-Carlo noise.
Z_THRESHOLD = 3.0

_REGIME_PERIOD = {
    Regime.EXTINCTION: 1,
    Regime.PERIOD1: 1,
    Regime.PERIOD2: 2,
    Regime.PERIOD4: 4,
}


@dataclass(frozen=True, eq=False)
class BifurcationDataset:
    """Terminal states of many initial conditions on a grid of rates."""

    kind: str  # "deterministic" or "stochastic"
    parameters: np.ndarray  # grid of rates (lambda or lambda_bar)
    terminal_states: np.ndarray  # shape (len(parameters), n_init)
    delta_lambda: float
    n_iter: int
    seed: int

    def csv_rows(self):
        """Long-format rows (parameter, terminal_state)."""
        for lam, row in zip(self.parameters, self.terminal_states):
            for x in row:
                yield float(lam), float(x)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "delta_lambda": self.delta_lambda,
            "n_iter": self.n_iter,
            "seed": self.seed,
            "parameters": [float(v) for v in self.parameters],
            "terminal_states": [[float(x) for x in row] for row in self.terminal_states],
        }


def _rate_grid(lam_lo: float, lam_hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise DomainError(f"step must be > 0, got {step}")
    if lam_hi < lam_lo:
        raise DomainError(f"need lam_lo <= lam_hi, got [{lam_lo}, {lam_hi}]")
    n = int(round((lam_hi - lam_lo) / step))
    grid = lam_lo + step * np.arange(n + 1)
    # guard rounding drift at the top end
    grid[grid > lam_hi] = lam_hi
    return grid


def deterministic_bifurcation(
    lam_lo: float,
    lam_hi: float,
    step: float = 0.001,
    n_init: int = 100,
    n_iter: int = 1000,
    seed: int = 12345,
) -> BifurcationDataset:
    """Iterate n_init uniform initial conditions n_iter times at every
    rate on the grid and record the final state of each."""
    grid = _rate_grid(lam_lo, lam_hi, step)
    if grid[0] < 0.0 or grid[-1] > 4.0:
        raise DomainError(f"rate grid must stay inside [0, 4], got [{lam_lo}, {lam_hi}]")
    if n_init < 1 or n_iter < 0:
        raise DomainError("need n_init >= 1 and n_iter >= 0")
    x = stream_rng(seed, INIT_STREAM).random((len(grid), n_init))
    lam = grid[:, None]
    for _ in range(n_iter):
        x = lam * x * (1.0 - x)
    return BifurcationDataset(
        kind="deterministic",
        parameters=grid,
        terminal_states=x,
        delta_lambda=0.0,
        n_iter=n_iter,
        seed=seed,
    )


def stochastic_bifurcation(
    lam_lo: float,
    lam_hi: float,
    step: float = 0.01,
    delta_lambda: float = 0.1,
    n_init: int = 100,
    n_iter: int = 1000,
    seed: int = 12345,
) -> BifurcationDataset:
    """Same sweep with a fresh rate draw per path and per iteration,
    uniform in [lambda_bar - delta, lambda_bar + delta] for each grid
    value of lambda_bar.  With delta_lambda = 0 the output coincides
    with the deterministic sweep at the same seed."""
    if delta_lambda < 0:
        raise DomainError(f"delta_lambda must be >= 0, got {delta_lambda}")
    grid = _rate_grid(lam_lo, lam_hi, step)
    if grid[0] - delta_lambda < 0.0 or grid[-1] + delta_lambda > 4.0:
        raise DomainError(
            f"rate window must stay inside [0, 4]; grid [{lam_lo}, {lam_hi}] "
            f"with half-width {delta_lambda} does not"
        )
    if n_init < 1 or n_iter < 0:
        raise DomainError("need n_init >= 1 and n_iter >= 0")
    shape = (len(grid), n_init)
    x = stream_rng(seed, INIT_STREAM).random(shape)
    center = grid[:, None]
    for t in range(n_iter):
        offsets = stream_rng(seed, t + 1).uniform(-1.0, 1.0, size=shape)
        lam = center + delta_lambda * offsets
        x = lam * x * (1.0 - x)
    return BifurcationDataset(
        kind="stochastic",
        parameters=grid,
        terminal_states=x,
        delta_lambda=delta_lambda,
        n_iter=n_iter,
        seed=seed,
    )


@dataclass(frozen=True, eq=False)
class EvolutionSnapshot:
    generation: int
    histogram: Histogram


def distribution_evolution(
    dist: ParameterDistribution,
    n_particles: int = 1000,
    checkpoints: tuple[int, ...] = (0, 1, 10, 50, 100, 10_000),
    seed: int = 12345,
    n_bins: int = 200,
) -> list[EvolutionSnapshot]:
    """Histogram snapshots of a uniform initial ensemble pushed through
    the transfer operator, taken at the checkpoint generations."""
    cps = list(checkpoints)
    if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 0:
        raise DomainError("checkpoints must be non-negative and strictly ascending")
    ens = uniform_ensemble(n_particles, seed)
    out = []
    for target in cps:
        ens = pf_iterate(ens, dist, target - ens.generation)
        out.append(
            EvolutionSnapshot(
                generation=ens.generation,
                histogram=Histogram.from_samples(ens.particles, n_bins=n_bins),
            )
        )
    return out


@dataclass(frozen=True)
class ComparisonReport:
    """Stochastic ensemble mean versus the deterministic cycle mean at
    the center rate, with a z-scored verdict."""

    lambda_bar: float
    delta_lambda: float
    regime: str
    period: int
    stochastic_mean: float
    stochastic_se: float
    deterministic_mean: float
    difference: float
    z_score: float
    verdict: str
    n_particles: int
    generations: int
    window: int
    seed: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _verdict(z: float) -> str:
    if z >= Z_THRESHOLD:
        return "stochastic_greater"
    if z <= -Z_THRESHOLD:
        return "stochastic_less"
    return "inconclusive"


def _parity_window(window: int, period: int) -> int:
    w = window - (window % period)
    return max(w, period)


def mean_comparison(
    lambda_bar: float,
    delta_lambda: float,
    cfg: MonteCarloConfig,
    seed: int | None = None,
) -> ComparisonReport:
    """Compare the converged stochastic mean against the mean of the
    attracting cycle of the fixed-rate map at lambda_bar.

    The window of the rates must sit strictly inside one regime.  The
    stochastic mean pools the trailing window of generations (clipped to
    a multiple of the cycle length so both cycle phases contribute
    equally); its standard error comes from the spread of per-particle
    time averages, which are independent across particles.
    """
    run_seed = cfg.seed if seed is None else seed
    regime = classify_regime(lambda_bar - delta_lambda, lambda_bar + delta_lambda)
    if regime is Regime.EXTINCTION:
        period = 1
        det_mean = 0.0
    else:
        period = _REGIME_PERIOD.get(regime) or detect_period(lambda_bar)
        det_mean = float(np.mean(periodic_orbit(lambda_bar, period)))
    window = _parity_window(min(cfg.window, cfg.generations), period)
    dist = ParameterDistribution(lambda_bar, delta_lambda)
    stoch_mean, se = ensemble_time_mean(dist, cfg, window=window, seed=run_seed)
    diff = stoch_mean - det_mean
    # differences below float-noise scale are never meaningful, however
    # small the standard error (point-mass windows, extinction decay)
    if abs(diff) < 1e-12:
        z = 0.0
    elif se == 0.0:
        z = math.copysign(math.inf, diff)
    else:
        z = diff / se
    return ComparisonReport(
        lambda_bar=lambda_bar,
        delta_lambda=delta_lambda,
        regime=regime.value,
        period=period,
        stochastic_mean=stoch_mean,
        stochastic_se=se,
        deterministic_mean=det_mean,
        difference=diff,
        z_score=z,
        verdict=_verdict(z),
        n_particles=cfg.n_particles,
        generations=cfg.generations,
        window=window,
        seed=run_seed,
    )


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "details": self.details}


@dataclass(frozen=True)
class LemmaSuiteReport:
    lambda_bar: float
    delta_lambda: float
    seed: int
    checks: tuple[LemmaCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "lambda_bar": self.lambda_bar,
            "delta_lambda": self.delta_lambda,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _variance_ladder(lambda_bar: float) -> list[float]:
    h0 = 0.05
    while True:
        try:
            analytic.require_period2_window(lambda_bar, h0)
            return [h0, h0 / 2, h0 / 4, h0 / 8]
        except Exception:
            h0 /= 2
            if h0 < 1e-6:
                raise


def _root_chain_check(lambda_bar: float) -> LemmaCheck:
    pair = analytic.period2_points(lambda_bar)
    x_star = analytic.fixed_point(lambda_bar)
    eps = 1e-3
    roots = None
    for _ in range(4):
        try:
            roots = analytic.h_function_roots(lambda_bar, eps)
            break
        except Exception:
            eps /= 4
    if roots is None:
        return LemmaCheck("shifted_root_ordering", False, {"error": "no four roots"})
    z_h, p_h, xs_h, q_h = roots
    ok = z_h < 0.0 < pair.p < p_h < xs_h < x_star < pair.q < q_h
    return LemmaCheck(
        "shifted_root_ordering",
        bool(ok),
        {"epsilon": eps, "roots": list(roots), "p": pair.p, "x_star": x_star, "q": pair.q},
    )


def lemma_suite(
    lambda_bar: float,
    delta_lambda: float,
    cfg: MonteCarloConfig,
    seed: int | None = None,
) -> LemmaSuiteReport:
    """Run the numerical verification chain behind the two-cycle mean
    inequality and report each step.

    Checks: (i) support containment in the analytic intervals plus the
    eight-point ordering chain, (ii) the pushforward identity
    E_right[X] = lam*(E_left[X] - E_left[X^2]), (iii) the left-peak
    shift E_left[X] > p(lam), (iv) decay of the right-peak variance
    ratio V(h)/h together with its analytic bound, (v) the ordering of
    the shifted comparison-function roots, (vi) convexity of h on I_p.
    """
    analytic.require_period2_window(lambda_bar, delta_lambda)
    run_seed = cfg.seed if seed is None else seed
    dist = ParameterDistribution(lambda_bar, delta_lambda)
    sup = analytic.support_intervals(lambda_bar, delta_lambda)
    checks: list[LemmaCheck] = []

    # (i) ordering chain + containment of a converged snapshot
    try:
        analytic.check_ordering(lambda_bar, delta_lambda)
        ordering_ok = True
    except Exception:
        ordering_ok = False
    window = _parity_window(min(cfg.window, cfg.generations), 2)
    stats = stationary_stats(dist, cfg, window=window, seed=run_seed)
    x = stats.final.particles
    inside = np.fromiter((sup.contains(v, inflate=1e-9) for v in x), dtype=bool)
    fraction = float(inside.mean())
    checks.append(
        LemmaCheck(
            "support_containment_and_ordering",
            bool(ordering_ok and fraction == 1.0),
            {
                "ordering_ok": ordering_ok,
                "containment_fraction": fraction,
                "n_outside": int((~inside).sum()),
                "I_p": list(sup.I_p),
                "I_q": list(sup.I_q),
            },
        )
    )

    # (ii) pushforward identity, per-particle statistic
    g_pp = stats.right_mean_pp - lambda_bar * (stats.left_mean_pp - stats.left_sq_pp)
    g = float(g_pp.mean())
    g_se = float(g_pp.std(ddof=1) / np.sqrt(len(g_pp))) if len(g_pp) > 1 else 0.0
    if g_se == 0.0:
        identity_ok = abs(g) < 1e-12
    else:
        identity_ok = abs(g) <= 4.0 * g_se
    checks.append(
        LemmaCheck(
            "pushforward_identity",
            bool(identity_ok),
            {"statistic": g, "se": g_se, "threshold_se": 4.0},
        )
    )

    # (iii) left-peak shift above p(lambda_bar)
    p_center = analytic.period2_points(lambda_bar).p
    gap_pp = stats.left_mean_pp - p_center
    gap = float(gap_pp.mean())
    gap_se = float(gap_pp.std(ddof=1) / np.sqrt(len(gap_pp))) if len(gap_pp) > 1 else 0.0
    if delta_lambda == 0.0:
        shift_ok = abs(gap) <= 1e-9
        z_gap = 0.0
    else:
        z_gap = gap / gap_se if gap_se > 0 else math.inf * math.copysign(1.0, gap)
        shift_ok = z_gap >= Z_THRESHOLD
    checks.append(
        LemmaCheck(
            "left_peak_shift",
            bool(shift_ok),
            {"gap": gap, "se": gap_se, "z": z_gap, "p": p_center},
        )
    )

    # (iv) right-peak variance ratio decay with analytic bound
    ladder = _variance_ladder(lambda_bar)
    profile = right_derivative_profile(lambda_bar, ladder, cfg)
    ratios = [r for (_, r, _) in profile]
    ses = [s for (_, _, s) in profile]
    monotone = all(
        ratios[i + 1] <= ratios[i] + Z_THRESHOLD * math.hypot(ses[i], ses[i + 1])
        for i in range(len(ratios) - 1)
    )
    bounds = []
    for h in ladder:
        s = analytic.support_intervals(lambda_bar, h)
        bounds.append((s.q_hi - s.q_lo) ** 2 / h)
    bound_decreasing = all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
    checks.append(
        LemmaCheck(
            "right_variance_decay",
            bool(monotone and bound_decreasing),
            {
                "h": ladder,
                "ratio": ratios,
                "ratio_se": ses,
                "analytic_bound": bounds,
            },
        )
    )

    # (v) shifted-root ordering
    checks.append(_root_chain_check(lambda_bar))

    # (vi) convexity of h on I_p
    convex = analytic.convexity_on_interval(lambda_bar, sup.I_p)
    checks.append(
        LemmaCheck("left_interval_convexity", bool(convex), {"I_p": list(sup.I_p)})
    )

    return LemmaSuiteReport(
        lambda_bar=lambda_bar,
        delta_lambda=delta_lambda,
        seed=run_seed,
        checks=tuple(checks),
    )


@dataclass(frozen=True)
class FlipFlopRow:
    rho: int
    period: int
    lambda_bar: float
    delta_lambda: float
    stochastic_mean: float
    stochastic_se: float
    deterministic_mean: float
    difference: float
    z_score: float
    sign: str
    verdict: str
    ci_low: float
    ci_high: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class FlipFlopReport:
    delta_lambda: float
    seed: int
    rows: tuple[FlipFlopRow, ...]

    def to_dict(self) -> dict:
        return {
            "delta_lambda": self.delta_lambda,
            "seed": self.seed,
            "rows": [r.to_dict() for r in self.rows],
        }


#: Default window centers for the first two doubling levels.
_RHO_CENTERS = {1: 3.208, 2: 3.508}


def _periods_on_grid(lams: np.ndarray, burn: int = 20_000, tol: float = 1e-9) -> np.ndarray:
    """Vectorized cycle-length detection over a grid (period <= 64,
    -1 where undetected)."""
    x = np.full(len(lams), 0.5)
    for _ in range(burn):
        x = lams * x * (1.0 - x)
    span = 128
    orbit = np.empty((span, len(lams)))
    for i in range(span):
        x = lams * x * (1.0 - x)
        orbit[i] = x
    periods = np.full(len(lams), -1, dtype=np.int64)
    for k in range(1, 65):
        hit = np.all(np.abs(orbit[k : k + 64] - orbit[:64]) < tol, axis=0)
        periods = np.where((periods == -1) & hit, k, periods)
    return periods


def _window_for_rho(rho: int, delta_lambda: float) -> tuple[float, float]:
    """(lambda_bar, usable half-width) for a window inside the stable
    period-2^rho regime; rho >= 3 windows are located by scanning the
    cascade range and shrinking the half-width until both endpoints
    carry the requested cycle length."""
    target = 2**rho
    if rho in _RHO_CENTERS:
        center = _RHO_CENTERS[rho]
    else:
        grid = np.linspace(
            analytic.LAMBDA_C4_END, analytic.LAMBDA_C2_OMEGA, 257
        )[1:-1]
        periods = _periods_on_grid(grid)
        hits = np.flatnonzero(periods == target)
        if len(hits) == 0:
            raise WindowNotFoundError(
                f"no rate with a stable cycle of length {target} found in "
                f"({analytic.LAMBDA_C4_END}, {analytic.LAMBDA_C2_OMEGA})"
            )
        # longest contiguous run of hits
        breaks = np.flatnonzero(np.diff(hits) > 1)
        segments = np.split(hits, breaks + 1)
        run = max(segments, key=len)
        center = float(grid[run].mean())
    delta = delta_lambda
    while delta >= 1e-6:
        try:
            lo_ok = detect_period(center - delta) == target
            hi_ok = detect_period(center + delta) == target
        except (ConvergenceError, DomainError):
            lo_ok = hi_ok = False
        if lo_ok and hi_ok:
            return center, delta
        delta /= 2.0
    raise WindowNotFoundError(
        f"could not shrink a window at {center} onto the period-{target} regime"
    )


def flipflop_scan(
    rho_values: tuple[int, ...],
    delta_lambda: float,
    cfg: MonteCarloConfig,
    seed: int | None = None,
) -> FlipFlopReport:
    """Sign table of (stochastic mean - deterministic cycle mean) across
    period-2^rho regimes.

    rho = 1 and 2 get conclusive verdicts at the usual z threshold;
    rows with rho >= 3 are exploratory (conjectured alternation) and
    carry a 3-sigma confidence interval instead of a pass/fail claim.
    """
    if delta_lambda <= 0:
        raise DomainError("delta_lambda must be > 0 for the scan")
    base_seed = cfg.seed if seed is None else seed
    rows = []
    for rho in rho_values:
        if rho < 1:
            raise DomainError(f"rho must be >= 1, got {rho}")
        period = 2**rho
        center, delta = _window_for_rho(rho, delta_lambda)
        det_mean = float(np.mean(periodic_orbit(center, period)))
        window = _parity_window(min(cfg.window, cfg.generations), period)
        dist = ParameterDistribution(center, delta)
        row_seed = base_seed + rho
        stoch, se = ensemble_time_mean(dist, cfg, window=window, seed=row_seed)
        diff = stoch - det_mean
        z = diff / se if se > 0 else 0.0
        sign = "+" if diff > 0 else ("-" if diff < 0 else "0")
        verdict = "exploratory" if rho >= 3 else _verdict(z)
        rows.append(
            FlipFlopRow(
                rho=rho,
                period=period,
                lambda_bar=center,
                delta_lambda=delta,
                stochastic_mean=stoch,
                stochastic_se=se,
                deterministic_mean=det_mean,
                difference=diff,
                z_score=z,
                sign=sign,
                verdict=verdict,
                ci_low=diff - Z_THRESHOLD * se,
                ci_high=diff + Z_THRESHOLD * se,
            )
        )
    return FlipFlopReport(delta_lambda=delta_lambda, seed=base_seed, rows=tuple(rows))


def ergodic_consistency(
    lambda_bar: float,
    delta_lambda: float,
    cfg: MonteCarloConfig,
    seed: int | None = None,
    path_steps: int = 10_000,
    burn_in: int = 1000,
) -> dict:
    """Single-path time average versus the converged ensemble mean; the
    two estimate the same invariant-measure mean, so their difference
    should sit within combined standard errors."""
    regime = classify_regime(lambda_bar - delta_lambda, lambda_bar + delta_lambda)
    period = _REGIME_PERIOD.get(regime, 1)
    run_seed = cfg.seed if seed is None else seed
    dist = ParameterDistribution(lambda_bar, delta_lambda)
    window = _parity_window(min(cfg.window, cfg.generations), period)
    ens_mean, ens_se = ensemble_time_mean(dist, cfg, window=window, seed=run_seed)
    path = generate_path(dist, x0=0.3, n=path_steps, seed=run_seed + 1)
    p_mean = time_average(path, burn_in)
    p_se = time_average_se(path, burn_in)
    diff = p_mean - ens_mean
    combined = math.hypot(ens_se, p_se)
    return {
        "lambda_bar": lambda_bar,
        "delta_lambda": delta_lambda,
        "path_mean": p_mean,
        "path_se": p_se,
        "ensemble_mean": ens_mean,
        "ensemble_se": ens_se,
        "difference": diff,
        "combined_se": combined,
        "within_3se": bool(abs(diff) <= 3.0 * combined),
    }
