"""First-order primal-dual solver for sequence-form zero-sum games.

Each iteration takes a proximal step in the (y, p) block, an ascent
step in the (x, q) block against the just-updated y, and then corrects
(y, p) by the observed change in (x, q). Every update is a handful of
sparse products, entrywise arithmetic, and clipping, so iterations are
cheap and the cost is dominated by the payoff matrix products.

The accumulated update vector v telescopes to the distance travelled
from the start, and ||v|| / (k * lambda) is the residual used as the
stopping certificate: when it drops below epsilon, the uniform averages
of the iterates form an approximate equilibrium of that accuracy. The
step size lambda is one over the norm of the saddle-point operator,
estimated by power iteration at initialization.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionError, DivergenceError, InitializationError
from .games import expected_value
from .sparse import build_K, spectral_norm
from .treeplex import (FeasibilityResiduals, SequenceFormGame, duality_gap,
                       feasibility_residuals, normalize_to_polytope)


@dataclass(frozen=True)
class SolverConfig:
    """Solve parameters; the defaults are sensible for small games.

    dq_uses_updated_y switches the dual step for q between reading the
    freshly updated y (default) and the pre-step y; the default is the
    variant whose convergence profile matches the reference runs.
    reclip_y_after_correction optionally re-applies the nonnegativity
    clip after the correction step.
    """

    epsilon: float = 1e-4
    max_iter: int = 100000
    lambda_override: Optional[float] = None
    trace_every: int = 0
    seed: int = 0
    dq_uses_updated_y: bool = True
    reclip_y_after_correction: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.lambda_override is not None and self.lambda_override <= 0:
            raise ValueError("lambda_override must be positive")
        if self.trace_every < 0:
            raise ValueError("trace_every must be nonnegative")


@dataclass
class SolverState:
    """Mutable iteration state; vectors are ordered (y, p, x, q)."""

    y: np.ndarray
    p: np.ndarray
    x: np.ndarray
    q: np.ndarray
    v: np.ndarray
    k: int
    lam: float
    norm_K: float
    sum_y: np.ndarray
    sum_p: np.ndarray
    sum_x: np.ndarray
    sum_q: np.ndarray
    z0: np.ndarray

    def iterate(self) -> np.ndarray:
        return np.concatenate([self.y, self.p, self.x, self.q])


class Quadruplet(NamedTuple):
    y: np.ndarray
    p: np.ndarray
    x: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class TracePoint:
    iter: int
    residual: float
    duality_gap: float
    value: float
    p0: float
    neg_q0: float
    feas_x: float
    feas_y: float
    min_x: float
    min_y: float
    elapsed: float


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    epsilon: float
    lam: float
    norm_K: float
    residual: float
    value: float
    duality_gap: float
    feas: FeasibilityResiduals
    last: Quadruplet
    ergodic: Quadruplet
    x_plan: np.ndarray
    y_plan: np.ndarray
    trace: list = field(default_factory=list)
    elapsed: float = 0.0


def init(game: SequenceFormGame, start=None, config: Optional[SolverConfig] = None) -> SolverState:
    """Validate the game, estimate the step size, and set up state.

    start may be a (y, p, x, q) quadruplet; the default is all zeros.
    """
    if config is None:
        config = SolverConfig()
    K = build_K(game)
    est = spectral_norm(K, rel_tol=1e-6, max_iter=5000, seed=config.seed)
    if config.lambda_override is not None:
        lam = config.lambda_override
    else:
        if not est.converged:
            raise InitializationError(
                f"operator norm estimation did not converge in {est.iterations} iterations")
        if est.value <= 0.0:
            raise InitializationError("operator norm estimate is not positive")
        lam = 1.0 / est.value

    shapes = (game.n2, game.l1, game.n1, game.l2)
    if start is None:
        parts = [np.zeros(n) for n in shapes]
    else:
        parts = []
        for vec, n, name in zip(start, shapes, ("y", "p", "x", "q")):
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (n,):
                raise DimensionError(f"start {name} must have length {n}, got shape {arr.shape}")
            parts.append(arr)
    y, p, x, q = parts
    z0 = np.concatenate(parts)
    return SolverState(
        y=y, p=p, x=x, q=q,
        v=np.zeros(z0.size), k=0, lam=lam, norm_K=est.value,
        sum_y=np.zeros(game.n2), sum_p=np.zeros(game.l1),
        sum_x=np.zeros(game.n1), sum_q=np.zeros(game.l2),
        z0=z0)


def step(state: SolverState, game: SequenceFormGame,
         config: Optional[SolverConfig] = None) -> SolverState:
    """Run one iteration in place and return the state."""
    if config is None:
        config = SolverConfig()
    A, E1, E2 = game.A, game.E1, game.E2
    lam = state.lam
    y0, p0, x0, q0 = state.y, state.p, state.x, state.q

    # overflow surfaces as the typed divergence error below, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        y1 = np.maximum(y0 - lam * (A.transpose_matvec(x0) + E2.transpose_matvec(q0)), 0.0)
        p1 = p0 - lam * (game.e1 - E1.matvec(x0))
        x1 = np.maximum(x0 + lam * (A.matvec(y1) - E1.transpose_matvec(p1)), 0.0)
        dx = x1 - x0
        y_for_dq = y1 if config.dq_uses_updated_y else y0
        dq = lam * (E2.matvec(y_for_dq) - game.e2)
        q1 = q0 + dq
        y2 = y1 - lam * (A.transpose_matvec(dx) + E2.transpose_matvec(dq))
        if config.reclip_y_after_correction:
            y2 = np.maximum(y2, 0.0)
        p2 = p1 + lam * E1.matvec(dx)

        state.v += np.concatenate([y2 - y0, p2 - p0, dx, dq])
        state.y, state.p, state.x, state.q = y2, p2, x1, q1
        state.k += 1
        state.sum_y += y2
        state.sum_p += p2
        state.sum_x += x1
        state.sum_q += q1
    if not (np.all(np.isfinite(y2)) and np.all(np.isfinite(p2))
            and np.all(np.isfinite(x1)) and np.all(np.isfinite(q1))):
        raise DivergenceError(
            f"non-finite value in iterate at iteration {state.k}", iteration=state.k)
    return state


def residual(state: SolverState) -> float:
    """Convergence certificate ||v|| / (k * lambda); defined for k >= 1."""
    if state.k < 1:
        raise ValueError("residual is undefined before the first iteration")
    return float(np.linalg.norm(state.v) / (state.k * state.lam))


def ergodic_average(state: SolverState) -> Quadruplet:
    """Uniform averages of the iterates seen so far."""
    if state.k < 1:
        raise ValueError("ergodic average is undefined before the first iteration")
    return Quadruplet(state.sum_y / state.k, state.sum_p / state.k,
                      state.sum_x / state.k, state.sum_q / state.k)


def _trace_point(state, game, t0) -> TracePoint:
    avg = ergodic_average(state)
    x_plan = normalize_to_polytope(game.index1, avg.x).values
    y_plan = normalize_to_polytope(game.index2, avg.y).values
    gap = duality_gap(game, x_plan, y_plan)
    value = expected_value(game, x_plan, y_plan)
    res = feasibility_residuals(game, state.x, state.y)
    return TracePoint(
        iter=state.k, residual=residual(state), duality_gap=gap, value=value,
        p0=float(state.p[0]), neg_q0=float(-state.q[0]),
        feas_x=res.feas_x, feas_y=res.feas_y, min_x=res.min_x, min_y=res.min_y,
        elapsed=time.perf_counter() - t0)


def solve(game: SequenceFormGame, config: Optional[SolverConfig] = None) -> SolveReport:
    """Iterate until the residual drops below epsilon or max_iter is hit.

    Reported value and duality gap are computed from the ergodic
    averages pushed back onto the strategy polytopes; the feasibility
    residuals describe the last iterate. With trace_every > 0 a
    TracePoint is recorded every trace_every iterations and at the
    final one.
    """
    if config is None:
        config = SolverConfig()
    t0 = time.perf_counter()
    state = init(game, None, config)
    trace: list[TracePoint] = []
    while state.k == 0 or residual(state) >= config.epsilon:
        if state.k >= config.max_iter:
            break
        step(state, game, config)
        if config.trace_every and state.k % config.trace_every == 0:
            trace.append(_trace_point(state, game, t0))
    if config.trace_every and (not trace or trace[-1].iter != state.k):
        trace.append(_trace_point(state, game, t0))

    avg = ergodic_average(state)
    x_plan = normalize_to_polytope(game.index1, avg.x).values
    y_plan = normalize_to_polytope(game.index2, avg.y).values
    final_res = residual(state)
    report = SolveReport(
        converged=final_res < config.epsilon,
        iterations=state.k,
        epsilon=config.epsilon,
        lam=state.lam,
        norm_K=state.norm_K,
        residual=final_res,
        value=expected_value(game, x_plan, y_plan),
        duality_gap=duality_gap(game, x_plan, y_plan),
        feas=feasibility_residuals(game, state.x, state.y),
        last=Quadruplet(state.y.copy(), state.p.copy(), state.x.copy(), state.q.copy()),
        ergodic=avg,
        x_plan=x_plan,
        y_plan=y_plan,
        trace=trace,
        elapsed=time.perf_counter() - t0)
    return report
