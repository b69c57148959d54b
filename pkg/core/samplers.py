"""
Samplers - Metropolis Transition Kernels

Additive transformation MCMC (one positive eps shared by every coordinate,
with independent random signs), its per-coordinate scaled variant, and the
random-walk Metropolis-Hastings baseline, plus the single-chain runner.

Both proposals are symmetric (move types are equiprobable and the eps density
does not depend on the signs), so acceptance is the bare density ratio,
evaluated in log space: accept iff log(u) < min(0, log pi(y) - log pi(x)).
"""

import math
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .errors import InvalidParameterError, InvalidSpecError, NonFiniteError
from .rng_core import (
    DrawCounts,
    RngStream,
    draw_half_normal,
    draw_signs,
    draw_std_normal_vec,
    draw_uniform,
)
from .targets import StateVector, TargetModel

KINDS = ("atmcmc", "rwmh", "atmcmc_scaled")


@dataclass(frozen=True)
class ProposalSpec:
    """Proposal family, scaling l and dimension d (c only for atmcmc_scaled)."""

    kind: str
    l: float
    d: int
    c: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpecError(f"kind must be one of {', '.join(KINDS)}, got '{self.kind}'")
        l = float(self.l)
        if not math.isfinite(l) or l <= 0.0:
            raise InvalidParameterError(f"l must be positive and finite, got {self.l}")
        object.__setattr__(self, 'l', l)
        if isinstance(self.d, bool) or not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise InvalidParameterError(f"d must be a positive integer (d >= 1), got {self.d!r}")
        object.__setattr__(self, 'd', int(self.d))

        if self.kind != "atmcmc_scaled":
            if self.c is not None:
                raise InvalidSpecError(f"per-coordinate scalars c are only valid for atmcmc_scaled, not {self.kind}")
            return
        if self.c is None:
            raise InvalidSpecError("atmcmc_scaled requires per-coordinate scalars c")
        c = tuple(float(v) for v in self.c)
        if len(c) != self.d:
            raise InvalidSpecError(f"c has length {len(c)}, expected d = {self.d}")
        if not all(math.isfinite(v) and v > 0.0 for v in c):
            raise InvalidSpecError("every entry of c must be positive and finite")
        if len(set(c)) < 2:
            raise InvalidSpecError("entries of c must not all be equal (use kind = atmcmc instead)")
        object.__setattr__(self, 'c', c)

    @property
    def sigma(self) -> float:
        """Per-coordinate proposal scale l / sqrt(d)."""
        return self.l / math.sqrt(self.d)

    @property
    def scales(self) -> np.ndarray:
        return np.asarray(self.c if self.c is not None else np.ones(self.d), dtype=float)

    def describe(self) -> Dict[str, object]:
        out = {"kernel": self.kind, "l": self.l, "d": self.d}
        if self.c is not None:
            out["c"] = list(self.c)
        return out


@dataclass(frozen=True)
class StepOutcome:
    """Result of one kernel application."""

    next: StateVector
    accepted: bool
    log_alpha: float
    draws_consumed: DrawCounts


@dataclass
class ChainRun:
    """A completed chain: thinned trace of the stored coordinates and counters."""

    kind: str
    l: float
    d: int
    seed: Optional[int]
    stream_id: Optional[int]
    n_iter: int
    thin: int
    coords: Tuple[int, ...]
    trace: np.ndarray
    accepted_cum: np.ndarray
    accept_count: int
    draws: DrawCounts
    final: StateVector
    elapsed: float = 0.0
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.trace.shape[0] != self.n_iter // self.thin:
            raise InvalidParameterError(
                f"trace has {self.trace.shape[0]} rows, expected {self.n_iter // self.thin}"
            )
        if not 0 <= self.accept_count <= self.n_iter:
            raise InvalidParameterError(f"accept_count {self.accept_count} outside [0, {self.n_iter}]")

    @property
    def iterations(self) -> np.ndarray:
        """Iteration index of each trace row."""
        return np.arange(1, self.trace.shape[0] + 1) * self.thin

    @property
    def acceptance_rate(self) -> float:
        return self.accept_count / self.n_iter


def draws_per_step(spec: ProposalSpec) -> DrawCounts:
    """Entropy one kernel step consumes, accept-test uniform included."""
    if spec.kind == "rwmh":
        return DrawCounts(spec.d + 1, 0)
    return DrawCounts(2, spec.d)


def propose_displacement(spec: ProposalSpec, stream: RngStream, size: Optional[int] = None) -> np.ndarray:
    """Draw y - x for one proposal, or for `size` independent proposals (rows)."""
    if spec.kind == "rwmh":
        return draw_std_normal_vec(stream, spec.d, spec.sigma, size)
    eps = draw_half_normal(stream, spec.sigma, size)
    signs = draw_signs(stream, spec.d, size)
    if size is not None:
        eps = np.asarray(eps)[:, None]
    if spec.kind == "atmcmc_scaled":
        return signs * spec.scales * eps
    return signs * eps


def log_uniform(u) -> float:
    """log(u) with log(0) = -inf."""
    return math.log(u) if u > 0.0 else -math.inf


def _log_alpha(logp_x: float, logp_y: float) -> float:
    diff = logp_y - logp_x
    if not math.isfinite(diff):
        raise NonFiniteError(f"log-density difference is not finite ({logp_y} - {logp_x})")
    return min(0.0, diff)


def accept_prob(model: TargetModel, x: StateVector, y: StateVector) -> float:
    """log of min{1, pi(y)/pi(x)}."""
    return _log_alpha(model.log_pi(x), model.log_pi(y))


def _advance(model: TargetModel, spec: ProposalSpec, x: np.ndarray, logp_x: float, stream: RngStream):
    displacement = propose_displacement(spec, stream)
    log_u = log_uniform(draw_uniform(stream))
    y = x + displacement
    logp_y = model.log_pi(y)
    log_alpha = _log_alpha(logp_x, logp_y)
    if log_u < log_alpha:
        return y, logp_y, True, log_alpha
    return x, logp_x, False, log_alpha


def _require(model: TargetModel, spec: ProposalSpec, kind: str):
    if spec.kind != kind:
        raise InvalidSpecError(f"{kind} kernel called with a '{spec.kind}' proposal spec")
    if spec.d != model.d:
        raise InvalidSpecError(f"proposal dimension {spec.d} does not match target dimension {model.d}")


def _step(model: TargetModel, spec: ProposalSpec, x: StateVector, stream: RngStream) -> StepOutcome:
    x = model.check_state(x)
    nxt, _, accepted, log_alpha = _advance(model, spec, x, model.log_pi(x), stream)
    # never hand back the caller's array
    return StepOutcome(next=nxt if accepted else x.copy(), accepted=accepted, log_alpha=log_alpha,
                       draws_consumed=draws_per_step(spec))


def atmcmc_step(model: TargetModel, spec: ProposalSpec, x: StateVector, stream: RngStream) -> StepOutcome:
    """One additive TMCMC move: y_i = x_i + b_i * eps with a single eps."""
    _require(model, spec, "atmcmc")
    return _step(model, spec, x, stream)


def rwmh_step(model: TargetModel, spec: ProposalSpec, x: StateVector, stream: RngStream) -> StepOutcome:
    """One random-walk move: y = x + N(0, l^2/d I)."""
    _require(model, spec, "rwmh")
    return _step(model, spec, x, stream)


def atmcmc_scaled_step(model: TargetModel, spec: ProposalSpec, x: StateVector, stream: RngStream) -> StepOutcome:
    """One scaled additive move: y_i = x_i + b_i * c_i * eps with a single eps."""
    _require(model, spec, "atmcmc_scaled")
    return _step(model, spec, x, stream)


def run_chain(model: TargetModel,
              spec: ProposalSpec,
              x0: StateVector,
              n_iter: int,
              stream: RngStream,
              thin: int = 1,
              coords: Optional[Sequence[int]] = None,
              progress: bool = False) -> ChainRun:
    """Apply spec's kernel n_iter times, storing every thin-th state."""
    _require(model, spec, spec.kind)
    if n_iter < 1:
        raise InvalidParameterError(f"n_iter must be >= 1, got {n_iter}")
    if thin < 1:
        raise InvalidParameterError(f"thin must be >= 1, got {thin}")
    coords = tuple(range(model.d)) if coords is None else tuple(int(i) for i in coords)
    if not coords or any(i < 0 or i >= model.d for i in coords):
        raise InvalidParameterError(f"coords must be non-empty indices in [0, {model.d}), got {coords}")

    x = model.check_state(x0).copy()
    logp = model.log_pi(x)
    index = np.asarray(coords)

    n_rec = n_iter // thin
    trace = np.empty((n_rec, len(coords)))
    accepted_cum = np.empty(n_rec, dtype=np.int64)
    accept_count = 0

    start = time.perf_counter()
    iterations = tqdm(range(1, n_iter + 1), disable=not progress,
                      desc=f"{spec.kind} d={spec.d} l={spec.l:g}", leave=False)
    for i in iterations:
        x, logp, accepted, _ = _advance(model, spec, x, logp, stream)
        accept_count += accepted
        if i % thin == 0:
            row = i // thin - 1
            trace[row] = x[index]
            accepted_cum[row] = accept_count
    elapsed = time.perf_counter() - start

    per_step = draws_per_step(spec)
    return ChainRun(
        kind=spec.kind,
        l=spec.l,
        d=spec.d,
        seed=getattr(stream, 'seed', None),
        stream_id=getattr(stream, 'stream_id', None),
        n_iter=n_iter,
        thin=thin,
        coords=coords,
        trace=trace,
        accepted_cum=accepted_cum,
        accept_count=int(accept_count),
        draws=DrawCounts(per_step.continuous * n_iter, per_step.sign_bits * n_iter),
        final=x,
        elapsed=elapsed,
    )
