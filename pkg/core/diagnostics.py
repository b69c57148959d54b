"""
Diagnostics - Empirical Measurements over Chains

Acceptance rates, ensemble Kolmogorov-Smirnov curves, one-step drift ratios
PV(x)/V(x), Monte Carlo regularity moments and draw-count comparisons.

Ensembles run every chain on its own stream derived from (root seed, chain
index), so results do not depend on how chains are grouped across threads;
aggregation always follows chain-index order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .errors import InvalidParameterError, InvalidSpecError, NonFiniteError
from .rng_core import DrawCounts, RngStream, draw_uniform, spawn_streams
from .samplers import (
    ChainRun,
    ProposalSpec,
    draws_per_step,
    log_uniform,
    propose_displacement,
)
from .targets import StateVector, TargetModel

CdfFunc = Callable[[np.ndarray], np.ndarray]
StreamFactory = Callable[[int], RngStream]


def acceptance_rate(run: ChainRun) -> float:
    """Fraction of accepted proposals."""
    if run.n_iter < 1:
        raise InvalidParameterError("run has no iterations")
    return run.accept_count / run.n_iter


def ks_statistic(samples: Sequence[float], cdf: CdfFunc) -> float:
    """Exact sup |F_n - F| from the sorted-sample formula."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise InvalidParameterError("ks_statistic needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("samples contain non-finite values")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))


@dataclass(frozen=True)
class KsSeries:
    """KS distance of an ensemble's marginal against the target, per recorded time."""

    kind: str
    times: np.ndarray
    ks_values: np.ndarray
    n_chains: int
    coords: Tuple[int, ...]
    reference: str

    def __post_init__(self):
        if self.n_chains < 2:
            raise InvalidParameterError(f"a KS series needs L >= 2 chains, got {self.n_chains}")
        if len(self.times) != len(self.ks_values):
            raise InvalidParameterError("times and ks_values differ in length")
        if np.any(self.ks_values < 0.0) or np.any(self.ks_values > 1.0):
            raise InvalidParameterError("KS values must lie in [0, 1]")

    def mean_over(self, t_min: int, t_max: int) -> float:
        """Average KS over recorded times in [t_min, t_max]."""
        mask = (self.times >= t_min) & (self.times <= t_max)
        if not np.any(mask):
            raise InvalidParameterError(f"no recorded times in [{t_min}, {t_max}]")
        return float(np.mean(self.ks_values[mask]))


def record_times(horizon: int, dense_until: int = 200, stride: int = 10) -> np.ndarray:
    """Every iteration up to dense_until, then every stride-th, always ending at horizon."""
    if horizon < 1:
        raise InvalidParameterError(f"horizon must be >= 1, got {horizon}")
    dense = np.arange(0, min(horizon, dense_until) + 1)
    sparse = np.arange(dense_until + stride, horizon + 1, stride)
    times = np.concatenate([dense, sparse])
    if times[-1] != horizon:
        times = np.append(times, horizon)
    return times.astype(np.int64)


def tail_slope(series: KsSeries, fraction: float = 0.2) -> float:
    """Least-squares slope of KS against t over the final fraction of recorded times."""
    if not 0.0 < fraction <= 1.0:
        raise InvalidParameterError(f"fraction must lie in (0, 1], got {fraction}")
    t_start = series.times[-1] - fraction * (series.times[-1] - series.times[0])
    mask = series.times >= t_start
    if mask.sum() < 2:
        raise InvalidParameterError("not enough recorded times in the tail window")
    slope, _ = np.polyfit(series.times[mask].astype(float), series.ks_values[mask], 1)
    return float(slope)


# Ensembles


@dataclass
class EnsembleRun:
    """Recorded coordinates of L chains run in lockstep from a common start."""

    kind: str
    times: np.ndarray
    values: np.ndarray          # (n_times, L, n_coords)
    accept_counts: np.ndarray   # (L,)
    coords: Tuple[int, ...]
    draws: DrawCounts

    @property
    def n_chains(self) -> int:
        return self.values.shape[1]


def _run_group(model: TargetModel, spec: ProposalSpec, x0: np.ndarray, streams: List[RngStream],
               times: np.ndarray, index: np.ndarray, progress: bool):
    n = len(streams)
    X = np.tile(x0, (n, 1))
    logp = np.atleast_1d(model.log_pi(X))
    out = np.empty((len(times), n, len(index)))
    accepted = np.zeros(n, dtype=np.int64)
    displacement = np.empty((n, model.d))
    log_u = np.empty(n)

    rec = 0
    if times[0] == 0:
        out[0] = X[:, index]
        rec = 1
    horizon = int(times[-1])
    for t in tqdm(range(1, horizon + 1), disable=not progress, desc=f"{spec.kind} ensemble", leave=False):
        for j, stream in enumerate(streams):
            displacement[j] = propose_displacement(spec, stream)
            log_u[j] = log_uniform(draw_uniform(stream))
        Y = X + displacement
        logp_y = np.atleast_1d(model.log_pi(Y))
        diff = logp_y - logp
        if not np.all(np.isfinite(diff)):
            raise NonFiniteError("log-density difference is not finite")
        accept = log_u < np.minimum(0.0, diff)
        X = np.where(accept[:, None], Y, X)
        logp = np.where(accept, logp_y, logp)
        accepted += accept
        if rec < len(times) and times[rec] == t:
            out[rec] = X[:, index]
            rec += 1
    return out, accepted


def run_ensemble(model: TargetModel,
                 spec: ProposalSpec,
                 x0: StateVector,
                 n_chains: int,
                 horizon: int,
                 seed: int = 0,
                 first_stream_id: int = 0,
                 times: Optional[np.ndarray] = None,
                 coords: Sequence[int] = (0,),
                 threads: int = 1,
                 stream_factory: Optional[StreamFactory] = None,
                 progress: bool = False) -> EnsembleRun:
    """Run n_chains chains from x0 for horizon steps; chain j uses stream first_stream_id + j."""
    if spec.d != model.d:
        raise InvalidSpecError(f"proposal dimension {spec.d} does not match target dimension {model.d}")
    if n_chains < 1 or horizon < 1 or threads < 1:
        raise InvalidParameterError("n_chains, horizon and threads must all be >= 1")
    x0 = model.check_state(x0)
    times = record_times(horizon) if times is None else np.asarray(times, dtype=np.int64)
    if times[-1] > horizon or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise InvalidParameterError("recording times must be increasing and within [0, horizon]")
    coords = tuple(int(i) for i in coords)
    if not coords or any(i < 0 or i >= model.d for i in coords):
        raise InvalidParameterError(f"coords must be indices in [0, {model.d}), got {coords}")

    if stream_factory is None:
        streams = spawn_streams(seed, n_chains, first_stream_id)
    else:
        streams = [stream_factory(first_stream_id + j) for j in range(n_chains)]
    index = np.asarray(coords)

    groups = [g for g in np.array_split(np.arange(n_chains), min(threads, n_chains)) if len(g)]
    with ThreadPoolExecutor(max_workers=len(groups)) as pool:
        futures = [
            pool.submit(_run_group, model, spec, x0, [streams[j] for j in g], times, index,
                        progress and k == 0)
            for k, g in enumerate(groups)
        ]
        results = [f.result() for f in futures]

    per_step = draws_per_step(spec)
    steps = n_chains * int(times[-1])
    return EnsembleRun(
        kind=spec.kind,
        times=times,
        values=np.concatenate([r[0] for r in results], axis=1),
        accept_counts=np.concatenate([r[1] for r in results]),
        coords=coords,
        draws=DrawCounts(per_step.continuous * steps, per_step.sign_bits * steps),
    )


def ks_series(ensemble: EnsembleRun, cdf: CdfFunc, reference: str) -> KsSeries:
    """KS of the ensemble at each recorded time, averaged over the recorded coordinates."""
    values = np.array([
        np.mean([ks_statistic(ensemble.values[t, :, k], cdf) for k in range(len(ensemble.coords))])
        for t in range(len(ensemble.times))
    ])
    return KsSeries(kind=ensemble.kind, times=ensemble.times, ks_values=values,
                    n_chains=ensemble.n_chains, coords=ensemble.coords, reference=reference)


def ks_experiment(model: TargetModel,
                  spec_a: ProposalSpec,
                  spec_b: ProposalSpec,
                  x0: StateVector,
                  n_chains: int = 500,
                  horizon: int = 5000,
                  seed: int = 0,
                  coords: Sequence[int] = (0,),
                  threads: int = 1,
                  stream_factory: Optional[StreamFactory] = None,
                  progress: bool = False) -> Tuple[KsSeries, KsSeries]:
    """KS-vs-time curves for two kernels started from the same point.

    Chains of spec_a use stream ids [0, L), chains of spec_b use [L, 2L).
    """
    if n_chains < 2:
        raise InvalidParameterError(f"ks_experiment needs L >= 2 chains, got {n_chains}")
    if spec_a.d != model.d or spec_b.d != model.d:
        raise InvalidSpecError("both proposal specs must share the target dimension")
    times = record_times(horizon)
    reference = repr(model.component)
    series = []
    for slot, spec in enumerate((spec_a, spec_b)):
        ensemble = run_ensemble(model, spec, x0, n_chains, horizon, seed=seed,
                                first_stream_id=slot * n_chains, times=times, coords=coords,
                                threads=threads, stream_factory=stream_factory, progress=progress)
        series.append(ks_series(ensemble, model.marginal_cdf, reference))
    return series[0], series[1]


# Drift and regularity


@dataclass(frozen=True)
class DriftEstimate:
    """Monte Carlo estimate of PV(x)/V(x) for V_s(x) = exp(s |x_1|)."""

    x_probe: Tuple[float, ...]
    s: float
    estimate: float
    stderr: float
    n_samples: int
    v_family: str = "exp_abs_x1"

    def describe(self) -> Dict[str, object]:
        return {
            "x_probe": list(self.x_probe),
            "V": {"family": self.v_family, "s": self.s},
            "estimate": self.estimate,
            "stderr": self.stderr,
            "M": self.n_samples,
        }


MIN_DRIFT_SAMPLES = 1000


def drift_ratio(model: TargetModel,
                spec: ProposalSpec,
                x_probe: StateVector,
                n_samples: int,
                stream: RngStream,
                s: float = 0.5) -> DriftEstimate:
    """E[V(X_1) | X_0 = x_probe] / V(x_probe) over n_samples independent transitions."""
    if n_samples < MIN_DRIFT_SAMPLES:
        raise InvalidParameterError(f"M must be >= {MIN_DRIFT_SAMPLES} for a usable estimate, got {n_samples}")
    if not 0.0 < s <= 1.0:
        raise InvalidParameterError(f"drift parameter s must lie in (0, 1], got {s}")
    if spec.d != model.d:
        raise InvalidSpecError(f"proposal dimension {spec.d} does not match target dimension {model.d}")
    x = model.check_state(x_probe)
    logp_x = model.log_pi(x)

    displacement = propose_displacement(spec, stream, size=n_samples)
    u = np.asarray(draw_uniform(stream, size=n_samples))
    with np.errstate(divide="ignore"):
        log_u = np.log(u)
    Y = x + displacement
    diff = model.log_pi(Y) - logp_x
    if not np.all(np.isfinite(diff)):
        raise NonFiniteError("log-density difference is not finite")
    accept = log_u < np.minimum(0.0, diff)
    x1_next = np.where(accept, Y[:, 0], x[0])

    # V(X_1)/V(x) = exp(s (|x1'| - |x1|)), never forming V itself
    ratio = np.exp(s * (np.abs(x1_next) - abs(x[0])))
    return DriftEstimate(
        x_probe=tuple(float(v) for v in x),
        s=float(s),
        estimate=float(np.mean(ratio)),
        stderr=float(np.std(ratio, ddof=1) / math.sqrt(n_samples)),
        n_samples=int(n_samples),
    )


@dataclass(frozen=True)
class RegularityMoments:
    """Estimates of M1 = E[(f'/f)^8] and M2 = E[(f''/f)^4] under f."""

    m1: float
    m2: float
    m1_stderr: float
    m2_stderr: float
    m1_suspect_divergent: bool
    m2_suspect_divergent: bool
    n_samples: int

    def describe(self) -> Dict[str, object]:
        return {
            "M1": self.m1,
            "M1_stderr": self.m1_stderr,
            "M2": self.m2,
            "M2_stderr": self.m2_stderr,
            "M1_finite": "suspect-divergent" if self.m1_suspect_divergent else "finite",
            "M2_finite": "suspect-divergent" if self.m2_suspect_divergent else "finite",
            "divergence_check": "heuristic: flagged if the estimate grows >20% at both doublings n/4 -> n/2 -> n",
            "M": self.n_samples,
        }


def _grows(values: np.ndarray, threshold: float = 1.2) -> bool:
    n = len(values)
    quarter, half, full = (np.mean(values[:k]) for k in (n // 4, n // 2, n))
    return bool(half > threshold * quarter and full > threshold * half)


def regularity_moments(model: TargetModel, n_samples: int, stream: RngStream) -> RegularityMoments:
    """Monte Carlo moments of the score and curvature ratio, with a divergence flag."""
    if n_samples < 4:
        raise InvalidParameterError(f"need at least 4 samples, got {n_samples}")
    component = model.component
    x = component.sample(stream, n_samples)
    t1 = component.score(x) ** 8
    t2 = component.curvature_ratio(x) ** 4
    root_n = math.sqrt(n_samples)
    return RegularityMoments(
        m1=float(np.mean(t1)),
        m2=float(np.mean(t2)),
        m1_stderr=float(np.std(t1, ddof=1) / root_n),
        m2_stderr=float(np.std(t2, ddof=1) / root_n),
        m1_suspect_divergent=_grows(t1),
        m2_suspect_divergent=_grows(t2),
        n_samples=int(n_samples),
    )


# Cost and stationarity


@dataclass(frozen=True)
class DrawCountReport:
    """Entropy used by two runs; continuous_ratio = b / a."""

    kind_a: str
    kind_b: str
    d: int
    n_iter_a: int
    n_iter_b: int
    continuous_a: int
    continuous_b: int
    sign_bits_a: int
    sign_bits_b: int
    continuous_ratio: float
    elapsed_a: float
    elapsed_b: float

    def describe(self) -> Dict[str, object]:
        return asdict(self)


def draw_count_report(run_a: ChainRun, run_b: ChainRun) -> DrawCountReport:
    """Machine-independent cost comparison (plus wall-clock seconds, not comparable across machines)."""
    if run_a.draws.continuous == 0:
        raise InvalidParameterError("run_a consumed no continuous draws")
    return DrawCountReport(
        kind_a=run_a.kind,
        kind_b=run_b.kind,
        d=run_a.d,
        n_iter_a=run_a.n_iter,
        n_iter_b=run_b.n_iter,
        continuous_a=run_a.draws.continuous,
        continuous_b=run_b.draws.continuous,
        sign_bits_a=run_a.draws.sign_bits,
        sign_bits_b=run_b.draws.sign_bits,
        continuous_ratio=run_b.draws.continuous / run_a.draws.continuous,
        elapsed_a=run_a.elapsed,
        elapsed_b=run_b.elapsed,
    )


@dataclass(frozen=True)
class StationarySummary:
    """Post burn-in moments and KS distance of one stored coordinate."""

    coord: int
    n_samples: int
    mean: float
    variance: float
    ks: float


def burn_in_summary(run: ChainRun, burn_in: int, cdf: CdfFunc, column: int = 0) -> StationarySummary:
    """Discard iterations <= burn_in and summarize one stored coordinate."""
    keep = run.iterations > burn_in
    if keep.sum() < 2:
        raise InvalidParameterError(f"fewer than two stored iterates after burn-in {burn_in}")
    values = run.trace[keep, column]
    return StationarySummary(
        coord=run.coords[column],
        n_samples=int(values.size),
        mean=float(np.mean(values)),
        variance=float(np.var(values, ddof=1)),
        ks=ks_statistic(values, cdf),
    )
