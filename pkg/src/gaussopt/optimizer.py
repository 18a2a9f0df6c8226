"""Riemannian gradient descent over a group-parametrized manifold.

A point is a group element M; the state is J = M J0 M^-1.  Derivatives
are taken along M e^{x^mu Xi_mu} with a fixed orthonormal frame Xi_mu, so
the inverse metric is the identity and the frame never has to be rebuilt
(left invariance).  The same machinery runs over unitary groups for the
exact fermionic oracle: only the generators change.

Steps follow the descent direction F^mu = -g^{mu nu} df/dx^nu with
M_{n+1} = M_n R(s K / |K|), K = F^mu Xi_mu, where R is the Cayley
retraction and s is halved until f decreases.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateSymplecticForm, NearSingular, StepUnderflow
from .lie import TangentFrame, cayley_retract, exact_exponential, make_rng


class StopReason(str, Enum):
    GRAD_TOL = "GradTol"
    VALUE_TOL = "ValueTol"
    MAX_ITERS = "MaxIters"
    STEP_UNDERFLOW = "StepUnderflow"
    PRUNED = "Pruned"


@dataclass(frozen=True)
class OptimizerConfig:
    initial_step: float = 0.5
    min_step: float = 1e-12
    grad_tol: float = 1e-9
    value_tol: float = 1e-12
    max_iters: int = 100_000
    halvings_per_iter: int = 40
    seeds: Sequence[int] = ()
    starts: int = 1
    prune_period: int = 5
    prune_keep_fraction: float = 0.1
    retraction: str = "cayley"  # or "exp"
    record_trace: bool = True

    def __post_init__(self):
        for name in ("initial_step", "min_step", "max_iters", "halvings_per_iter", "starts", "prune_period"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.grad_tol < 0 or self.value_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if not 0.0 < self.prune_keep_fraction <= 1.0:
            raise ValueError("prune_keep_fraction must lie in (0, 1]")
        if self.retraction not in ("cayley", "exp"):
            raise ValueError("retraction must be 'cayley' or 'exp'")

    def seed_list(self) -> list:
        if self.seeds:
            seeds = list(self.seeds)
            if len(seeds) < self.starts:
                seeds += [seeds[-1] + k for k in range(1, self.starts - len(seeds) + 1)]
            return seeds[: self.starts] if self.starts <= len(seeds) else seeds
        return list(range(self.starts))


@dataclass
class Objective:
    """f(M) and its frame differential df/dx^mu at M.

    ``value(M, context)`` and ``differential(M, context)``; the
    differential is taken along M e^{x^mu Xi_mu}.
    """

    value: Callable[[np.ndarray, Any], float]
    differential: Callable[[np.ndarray, Any], np.ndarray]
    context: Any = None

    def f(self, M) -> float:
        return float(self.value(M, self.context))

    def df(self, M) -> np.ndarray:
        return np.asarray(self.differential(M, self.context), dtype=float)


@dataclass
class OptimizationRun:
    final_M: np.ndarray
    final_value: float
    stop_reason: StopReason
    seed: Optional[int] = None
    iterations: int = 0
    grad_norm: float = math.nan
    iterates: list = field(default_factory=list)  # (F_n, |K_n|, s_n)

    def trace_rows(self):
        return [(i, F, k, s) for i, (F, k, s) in enumerate(self.iterates)]


def _retract(K, s, config):
    if config.retraction == "exp":
        return exact_exponential(K, s)
    return cayley_retract(K, s)


def gradient(objective: Objective, M, frame: TangentFrame):
    """K = F^mu Xi_mu with F^mu = -G^{mu nu} df/dx^nu; returns (K, |K|_F, df)."""
    df = objective.df(M)
    ginv = frame.metric_inverse
    F = -(ginv @ df) if ginv is not None else -df
    K = np.tensordot(F, frame.generators, axes=1)
    return K, float(np.linalg.norm(K)), df


def step(M, K, F_n: float, objective: Objective, config: OptimizerConfig):
    """One line-search step along the descent direction K.

    Tries s = initial_step and halves until f(M R(s K/|K|)) < F_n.
    Raises StepUnderflow if no decrease is found.
    """
    norm = np.linalg.norm(K)
    if norm == 0:
        raise StepUnderflow("zero search direction")
    D = K / norm
    s = config.initial_step
    for _ in range(config.halvings_per_iter + 1):
        if s < config.min_step:
            break
        try:
            M_new = M @ _retract(D, s, config)
        except NearSingular:
            s *= 0.5
            continue
        F_new = objective.f(M_new)
        if F_new < F_n:
            return M_new, F_new, s
        s *= 0.5
    raise StepUnderflow(f"no decrease found down to step {s:.3e}")


class _Trajectory:
    """Resumable descent state so that multi-start can interleave runs."""

    def __init__(self, objective, frame, M_start, config, seed=None):
        self.objective = objective
        self.frame = frame
        self.config = config
        self.M = np.array(M_start)
        self.F = objective.f(self.M)
        self.seed = seed
        self.iters = 0
        self.stop = None
        self.iterates = []
        self.grad_norm = math.nan
        self._K = None

    def _gradient(self):
        K, norm, _ = gradient(self.objective, self.M, self.frame)
        self._K, self.grad_norm = K, norm
        return K, norm

    def advance(self):
        if self.stop is not None:
            return
        cfg = self.config
        K, norm = self._gradient()
        if norm < cfg.grad_tol:
            self._record(norm, 0.0)
            self.stop = StopReason.GRAD_TOL
            return
        if self.iters >= cfg.max_iters:
            self._record(norm, 0.0)
            self.stop = StopReason.MAX_ITERS
            return
        try:
            M_new, F_new, s = step(self.M, K, self.F, self.objective, cfg)
        except StepUnderflow:
            self._record(norm, 0.0)
            self.stop = StopReason.STEP_UNDERFLOW
            return
        self._record(norm, s)
        dF = self.F - F_new
        self.M, self.F = M_new, F_new
        self.iters += 1
        if dF < cfg.value_tol:
            self.stop = StopReason.VALUE_TOL

    def _record(self, norm, s):
        if self.config.record_trace:
            self.iterates.append((self.F, norm, s))

    def result(self) -> OptimizationRun:
        return OptimizationRun(
            self.M,
            self.F,
            self.stop if self.stop is not None else StopReason.MAX_ITERS,
            self.seed,
            self.iters,
            self.grad_norm,
            self.iterates,
        )


def run(objective: Objective, frame: TangentFrame, M_start, config: OptimizerConfig = OptimizerConfig(), seed=None) -> OptimizationRun:
    """Descend from M_start until a stop condition triggers."""
    t = _Trajectory(objective, frame, M_start, config, seed)
    while t.stop is None:
        t.advance()
    return t.result()


def _default_sampler(frame: TangentFrame, spread: float = 1.0):
    def sample(rng):
        x = rng.normal(scale=spread, size=frame.dim)
        return exact_exponential(frame.combine(x))

    return sample


@dataclass
class MultiStartResult:
    best: OptimizationRun
    runs: list


def multi_start(
    objective: Objective,
    frame: TangentFrame,
    config: OptimizerConfig = OptimizerConfig(),
    sampler: Optional[Callable[[np.random.Generator], np.ndarray]] = None,
) -> MultiStartResult:
    """Run ``config.starts`` trajectories in lockstep with periodic pruning.

    Every ``prune_period`` iterations the active trajectories are cut down
    to the union of the ``prune_keep_fraction`` with the lowest value and
    the same fraction with the largest gradient norm (at least one each),
    counted among the current survivors.  The result is independent of
    evaluation order: ties are broken by seed.
    """
    sampler = sampler or _default_sampler(frame)
    seeds = config.seed_list()
    trajs = [_Trajectory(objective, frame, sampler(make_rng(s)), config, s) for s in seeds]
    active = list(trajs)
    it = 0
    while active:
        for t in active:
            t.advance()
        it += 1
        active = [t for t in active if t.stop is None]
        if config.prune_keep_fraction < 1.0 and it % config.prune_period == 0 and len(active) > 1:
            keep = max(1, int(math.floor(config.prune_keep_fraction * len(active))))
            by_value = sorted(active, key=lambda t: (t.F, t.seed))[:keep]
            by_grad = sorted(active, key=lambda t: (-t.grad_norm, t.seed))[:keep]
            survivors = {id(t) for t in by_value + by_grad}
            for t in active:
                if id(t) not in survivors:
                    t.stop = StopReason.PRUNED
            active = [t for t in active if id(t) in survivors]
    results = [t.result() for t in trajs]
    finals = [r for r in results if r.stop_reason is not StopReason.PRUNED]
    best = min(finals, key=lambda r: (r.final_value, r.seed))
    return MultiStartResult(best, results)


def hamiltonian_flow_step(objective: Objective, M, frame: TangentFrame, dt: float, midpoint: bool = True):
    """Real-time flow step with X^mu = -Omega^{mu nu} df/dx^nu.

    Omega^{mu nu} is the inverse of the frame symplectic form.  The default
    uses the generator evaluated at the group midpoint, which keeps the
    energy drift at second order in dt; ``midpoint=False`` gives the plain
    first-order step.
    """
    w = frame.symplectic
    if w.size == 0:
        return np.array(M)
    if np.linalg.matrix_rank(w) < w.shape[0]:
        raise DegenerateSymplecticForm("frame symplectic form is not invertible")
    Winv = np.linalg.inv(w)

    def generator(Mx):
        X = -(Winv @ objective.df(Mx))
        return frame.combine(X)

    K = generator(M)
    if midpoint:
        K = generator(M @ exact_exponential(K, 0.5 * dt))
    return M @ exact_exponential(K, dt)
