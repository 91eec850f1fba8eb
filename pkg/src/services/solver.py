"""
Solver service
Non-convex least-squares inversion of y = A M_q(x) by multi-start steepest descent
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from src.core.errors import NonFiniteObjective, ShapeMismatch
from src.schemas.experiments import SolverConfig
from src.schemas.signals import Signal
from src.services.sensing import MeasurementOperator, MeasurementVector, compose_jacobian, measure
from src.services.spectra import spectrum_jacobian


@dataclass
class StartTrace:
    """Outcome of one descent"""
    start: int
    final_objective: float
    iterations: int
    converged: bool
    stop_reason: str
    history: List[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start,
            "final_objective": self.final_objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
        }


@dataclass
class SolveResult:
    """Best-of-starts estimate"""
    estimate: Signal
    objective: float
    starts: List[StartTrace]
    best_start: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate.values.tolist(),
            "objective": self.objective,
            "starts": [trace.to_dict() for trace in self.starts],
            "best_start": self.best_start,
        }


def _check_shapes(x: Signal, op: MeasurementOperator, y: MeasurementVector):
    if x.n != op.n:
        raise ShapeMismatch(f"Operator built for N={op.n}, signal has length {x.n}")
    if y.k != op.k:
        raise ShapeMismatch(f"Operator has K={op.k} rows, measurement vector has length {y.k}")


def _residual(x: Signal, op: MeasurementOperator, y: MeasurementVector) -> np.ndarray:
    _check_shapes(x, op, y)
    return y.values - measure(op, x).values


def objective(x: Signal, op: MeasurementOperator, y: MeasurementVector) -> float:
    """||y - A M_q(x)||_2^2"""
    r = _residual(x, op, y)
    return float(np.vdot(r, r).real)


def gradient(x: Signal, op: MeasurementOperator, y: MeasurementVector) -> np.ndarray:
    """
    Gradient of the objective over the real coordinates of x

    With G = A J the composed Jacobian and r the residual, the gradient is
    -2 Re(G^H r).
    """
    if not x.is_real:
        # complex-domain gradient (Wirtinger form) is not implemented
        raise NotImplementedError("gradient is defined for real signals only")
    r = _residual(x, op, y)
    composed = compose_jacobian(op, spectrum_jacobian(x, op.q))
    return -2.0 * np.real(composed.conj().T @ r)


def _descend(
    x0: np.ndarray,
    op: MeasurementOperator,
    y: MeasurementVector,
    cfg: SolverConfig,
    start: int
) -> tuple:
    """Steepest descent with Armijo backtracking from one starting point"""
    target = cfg.objective_tol * max(1.0, float(np.vdot(y.values, y.values).real))

    x = Signal.real(x0)
    f = objective(x, op, y)
    if not np.isfinite(f):
        raise NonFiniteObjective(f"Start {start}: objective is not finite at the initial point")
    g = gradient(x, op, y)

    history = [f]
    step = cfg.initial_step
    stop_reason = "max_iters"
    iterations = 0
    # relative decrease of the last accepted step
    progress = np.inf

    for iterations in range(cfg.max_iters):
        if f <= target:
            stop_reason = "objective_tol"
            break
        slope = float(g @ g)
        # a flat gradient ends the start only once descent has stopped paying off
        if np.max(np.abs(g)) <= cfg.grad_tol and (slope == 0.0 or progress <= cfg.progress_tol):
            stop_reason = "grad_tol"
            break

        t = step
        accepted = False
        for _ in range(cfg.max_backtracks):
            candidate = Signal.real(x.values - t * g)
            f_new = objective(candidate, op, y)
            if np.isfinite(f_new) and f_new <= f - cfg.armijo_c * t * slope:
                accepted = True
                break
            t *= cfg.shrink

        if not accepted:
            stop_reason = "stalled"
            break

        progress = (f - f_new) / f if f > 0 else 0.0
        x, f = candidate, f_new
        g = gradient(x, op, y)
        if not np.all(np.isfinite(g)):
            raise NonFiniteObjective(f"Start {start}: gradient overflowed after {iterations + 1} iterations")
        history.append(f)
        step = t * cfg.step_growth
    else:
        iterations = cfg.max_iters

    trace = StartTrace(
        start=start,
        final_objective=f,
        iterations=iterations,
        converged=stop_reason in ("grad_tol", "objective_tol"),
        stop_reason=stop_reason,
        history=history,
    )
    return x, trace


def solve(
    op: MeasurementOperator,
    y: MeasurementVector,
    n: int,
    q: int,
    cfg: Optional[SolverConfig] = None,
    initial_points: Optional[Sequence[np.ndarray]] = None
) -> SolveResult:
    """
    Minimize ||y - A M_q(x)||^2 over real x from several starts

    Args:
        op: Measurement operator
        y: Observed measurements
        n: Signal length
        q: Spectrum order
        cfg: Solver configuration
        initial_points: Optional explicit starts, overriding the random draws

    Returns:
        SolveResult holding the start with the smallest final objective
    """
    cfg = cfg or SolverConfig()
    if (op.n, op.q) != (n, q):
        raise ShapeMismatch(f"Operator built for N={op.n}, q={op.q}, solver asked for N={n}, q={q}")
    if y.k != op.k:
        raise ShapeMismatch(f"Operator has K={op.k} rows, measurement vector has length {y.k}")

    if initial_points is not None:
        starts = [np.asarray(p, dtype=np.float64) for p in initial_points]
        if any(p.shape != (n,) for p in starts):
            raise ShapeMismatch(f"Initial points must have shape ({n},)")
    else:
        starts = []
        for s in range(cfg.num_starts):
            # each start owns its stream so results do not depend on execution order
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(s,)))
            starts.append(cfg.init_scale * rng.standard_normal(n))

    traces: List[StartTrace] = []
    best: Optional[Signal] = None
    best_objective = np.inf
    best_start = -1

    for s, x0 in enumerate(starts):
        try:
            estimate, trace = _descend(x0, op, y, cfg, s)
        except NonFiniteObjective as e:
            logger.warning(f"Aborting start {s}: {e}")
            traces.append(StartTrace(s, np.inf, 0, False, "diverged"))
            continue

        logger.debug(
            f"Start {s}: objective={trace.final_objective:.3e} after {trace.iterations} iterations ({trace.stop_reason})"
        )
        traces.append(trace)
        if trace.final_objective < best_objective:
            best, best_objective, best_start = estimate, trace.final_objective, s

    if best is None:
        raise NonFiniteObjective(f"All {len(starts)} starts diverged")

    return SolveResult(
        estimate=best,
        objective=objective(best, op, y),
        starts=traces,
        best_start=best_start,
    )
