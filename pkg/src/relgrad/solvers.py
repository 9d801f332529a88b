"""Runners for inexact gradient descent and inexact fast gradient descent.

Both methods take an approximate direction d_k in place of the true
gradient at each step and are judged by the smallest gradient norm among
all iterates, matching the non-monotone behavior worst-case inexactness
induces.  Runs are deterministic and record everything needed for the
rate analysis: iterates, true and inexact gradients, losses and bit costs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .oracle import (
    InexactnessModel,
    OracleKind,
    adversarial_is_degenerate,
    apply_inexactness,
    bit_cost,
)
from .schedules import StepSchedule

__all__ = [
    "Problem",
    "Trajectory",
    "RateEstimate",
    "DEFAULT_DIVERGENCE_NORM",
    "run_inexact_gd",
    "run_inexact_fgm",
    "best_gradient_iterate",
    "empirical_rate",
    "reference_minimize",
    "export_trajectory_csv",
]

# Iterate-norm bound beyond which a run is declared divergent.  Worst-case
# adversarial steps grow geometrically but slowly (|x| ~ 1.25^k at the
# canonical h=1.8, delta=0.25 instance), so the bound must be reachable
# within a few hundred iterations while staying far above anything a
# convergent run visits.
DEFAULT_DIVERGENCE_NORM = 1e50

# An oracle may be an InexactnessModel or any callable (g, x, k) -> d,
# which is how scripted worst-case directions (e.g. replayed SDP
# witnesses) are fed through the same code path.
OracleLike = InexactnessModel | Callable[[np.ndarray, np.ndarray, int], np.ndarray]


class Problem(Protocol):
    """Anything exposing a smooth objective and its gradient."""

    def value(self, x: np.ndarray) -> float: ...

    def gradient(self, x: np.ndarray) -> np.ndarray: ...


@dataclass
class Trajectory:
    """Full record of one method run.

    ``points`` holds x_0..x_n; for the fast gradient method
    ``momentum_points`` holds the y-iterates at which the oracle was
    queried and ``momentum_gradients`` the true gradients there.  When a
    non-finite or oversized iterate is produced the run stops early,
    ``divergent`` is set, and the arrays end at the last finite iterate.
    """

    points: np.ndarray
    true_gradients: np.ndarray
    inexact_gradients: np.ndarray
    losses: np.ndarray
    steps_used: np.ndarray
    degeneracy_flags: np.ndarray
    total_bits: int
    divergent: bool
    requested_iterations: int
    momentum_points: np.ndarray | None = None
    momentum_gradients: np.ndarray | None = None
    best_index: int = field(init=False)

    def __post_init__(self):
        self.best_index = int(np.argmin(self.gradient_norms_sq()))

    def gradient_norms_sq(self) -> np.ndarray:
        """Squared gradient norms at the x-iterates."""
        return np.sum(self.true_gradients**2, axis=1)

    def completed_steps(self) -> int:
        return len(self.inexact_gradients)

    def query_gradients(self) -> np.ndarray:
        """True gradients at the points where the oracle was queried."""
        if self.momentum_gradients is not None:
            return self.momentum_gradients
        return self.true_gradients[: self.completed_steps()]


@dataclass(frozen=True)
class RateEstimate:
    """Empirical counterpart of the worst-case rate: the smallest constant
    tau with (1/L) min_k ||grad f(x_k)||^2 <= tau * (f(x_0) - f_star)."""

    tau_hat: float
    f_star_estimate: float
    smoothness_L: float


def _as_direction_fn(model: OracleLike) -> Callable[[np.ndarray, np.ndarray, int], np.ndarray]:
    if isinstance(model, InexactnessModel):
        return lambda g, x, k: apply_inexactness(g, x, model)
    return model


def _degenerate_fn(model: OracleLike) -> Callable[[np.ndarray], bool]:
    if isinstance(model, InexactnessModel):
        return lambda x: adversarial_is_degenerate(x, model)
    return lambda x: False


def _is_bad(x: np.ndarray, max_norm: float) -> bool:
    return not np.all(np.isfinite(x)) or float(np.linalg.norm(x)) > max_norm


def _total_bits(model: OracleLike, steps_done: int, dimension: int) -> int:
    if isinstance(model, InexactnessModel) and model.kind is OracleKind.COMPRESSED:
        return bit_cost(steps_done, model.n_bit, dimension)
    return 0


def run_inexact_gd(
    problem: Problem,
    model: OracleLike,
    schedule: StepSchedule,
    x0: np.ndarray,
    n_iterations: int,
    smoothness: float,
    max_norm: float = DEFAULT_DIVERGENCE_NORM,
) -> Trajectory:
    """Inexact gradient descent: x_{k+1} = x_k - (h_k / L) d_k.

    ``schedule`` must provide at least ``n_iterations`` steps and
    ``smoothness`` is the constant L normalizing them.
    """
    if smoothness <= 0:
        raise ValueError("smoothness constant must be positive")
    if n_iterations > len(schedule):
        raise ValueError(
            f"schedule provides {len(schedule)} steps, {n_iterations} requested"
        )
    direction = _as_direction_fn(model)
    degenerate = _degenerate_fn(model)
    x = np.asarray(x0, dtype=np.float64).copy()
    points = [x.copy()]
    gradients = [np.asarray(problem.gradient(x), dtype=np.float64)]
    losses = [float(problem.value(x))]
    directions: list[np.ndarray] = []
    steps_used: list[float] = []
    flags: list[bool] = []
    divergent = False
    for k in range(n_iterations):
        g = gradients[-1]
        d = np.asarray(direction(g, x, k), dtype=np.float64)
        h = float(schedule.steps[k])
        x_next = x - (h / smoothness) * d
        if _is_bad(x_next, max_norm):
            divergent = True
            break
        directions.append(d)
        steps_used.append(h)
        flags.append(degenerate(x))
        x = x_next
        points.append(x.copy())
        gradients.append(np.asarray(problem.gradient(x), dtype=np.float64))
        losses.append(float(problem.value(x)))
    return Trajectory(
        points=np.array(points),
        true_gradients=np.array(gradients),
        inexact_gradients=np.array(directions).reshape(len(directions), x.size),
        losses=np.array(losses),
        steps_used=np.array(steps_used),
        degeneracy_flags=np.array(flags, dtype=bool),
        total_bits=_total_bits(model, len(directions), x.size),
        divergent=divergent,
        requested_iterations=n_iterations,
    )


def run_inexact_fgm(
    problem: Problem,
    model: OracleLike,
    h: float,
    x0: np.ndarray,
    n_iterations: int,
    smoothness: float,
    momentum_index_offset: int = 0,
    max_norm: float = DEFAULT_DIVERGENCE_NORM,
) -> Trajectory:
    """Inexact fast gradient descent with oracle queries at the momentum
    points:

        x_{k+1} = y_k - (h / L) d_k
        y_{k+1} = x_{k+1} + (k - 1) / (k + 2) * (x_{k+1} - x_k),   y_0 = x_0.

    The momentum coefficient is evaluated literally with k starting at 0,
    so the first coefficient is -1/2.  ``momentum_index_offset`` shifts k
    in the coefficient only (offset 1 gives the conventional k/(k+3)
    variant).
    """
    if smoothness <= 0:
        raise ValueError("smoothness constant must be positive")
    if h <= 0:
        raise ValueError("step must be positive")
    direction = _as_direction_fn(model)
    degenerate = _degenerate_fn(model)
    x = np.asarray(x0, dtype=np.float64).copy()
    y = x.copy()
    points = [x.copy()]
    gradients = [np.asarray(problem.gradient(x), dtype=np.float64)]
    losses = [float(problem.value(x))]
    momentum_points: list[np.ndarray] = []
    momentum_gradients: list[np.ndarray] = []
    directions: list[np.ndarray] = []
    steps_used: list[float] = []
    flags: list[bool] = []
    divergent = False
    for k in range(n_iterations):
        g_y = (
            gradients[0]
            if k == 0
            else np.asarray(problem.gradient(y), dtype=np.float64)
        )
        d = np.asarray(direction(g_y, y, k), dtype=np.float64)
        x_next = y - (h / smoothness) * d
        kk = k + momentum_index_offset
        y_next = x_next + (kk - 1.0) / (kk + 2.0) * (x_next - x)
        if _is_bad(x_next, max_norm) or _is_bad(y_next, max_norm):
            divergent = True
            break
        momentum_points.append(y.copy())
        momentum_gradients.append(g_y)
        directions.append(d)
        steps_used.append(h)
        flags.append(degenerate(y))
        x, y = x_next, y_next
        points.append(x.copy())
        gradients.append(np.asarray(problem.gradient(x), dtype=np.float64))
        losses.append(float(problem.value(x)))
    return Trajectory(
        points=np.array(points),
        true_gradients=np.array(gradients),
        inexact_gradients=np.array(directions).reshape(len(directions), x.size),
        losses=np.array(losses),
        steps_used=np.array(steps_used),
        degeneracy_flags=np.array(flags, dtype=bool),
        total_bits=_total_bits(model, len(directions), x.size),
        divergent=divergent,
        requested_iterations=n_iterations,
        momentum_points=np.array(momentum_points).reshape(len(momentum_points), x.size),
        momentum_gradients=np.array(momentum_gradients).reshape(
            len(momentum_gradients), x.size
        ),
    )


def best_gradient_iterate(trajectory: Trajectory) -> tuple[int, float]:
    """Index and value of the smallest squared gradient norm among the
    x-iterates (momentum points do not compete); ties go to the smallest
    index."""
    norms = trajectory.gradient_norms_sq()
    index = int(np.argmin(norms))
    return index, float(norms[index])


def empirical_rate(trajectory: Trajectory, f_star: float, smoothness: float) -> RateEstimate:
    """Observed rate (1/L) * min_k ||grad f(x_k)||^2 / (f(x_0) - f_star)."""
    gap = float(trajectory.losses[0]) - f_star
    if gap <= 0:
        raise ValueError("f(x_0) must exceed f_star to normalize the rate")
    _, best_sq = best_gradient_iterate(trajectory)
    return RateEstimate(
        tau_hat=best_sq / (smoothness * gap),
        f_star_estimate=f_star,
        smoothness_L=smoothness,
    )


def reference_minimize(
    problem: Problem, x0: np.ndarray, budget: int, smoothness: float
) -> tuple[np.ndarray, float]:
    """High-precision reference solve: exact fast gradient descent with
    h = 1 for ``budget`` iterations, returning the best-loss iterate.

    The returned loss is an upper bound on the true optimal value; it
    tightens as the budget grows.
    """
    if budget < 1:
        raise ValueError("budget must be at least one iteration")
    trajectory = run_inexact_fgm(
        problem, InexactnessModel.exact(), 1.0, x0, budget, smoothness
    )
    if trajectory.divergent:
        raise RuntimeError("reference run diverged; smoothness constant too small?")
    best = int(np.argmin(trajectory.losses))
    return trajectory.points[best].copy(), float(trajectory.losses[best])


def export_trajectory_csv(trajectory: Trajectory, path) -> None:
    """Write one row per x-iterate: iteration index, loss, squared gradient
    norm, step used to leave it, cumulative bits, degeneracy flag."""
    norms = trajectory.gradient_norms_sq()
    n_steps = trajectory.completed_steps()
    per_step_bits = trajectory.total_bits // n_steps if n_steps else 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["k", "loss", "grad_norm_sq", "step_used", "bits_cumulative", "degenerate_flag"]
        )
        for k in range(len(trajectory.points)):
            step = repr(float(trajectory.steps_used[k])) if k < n_steps else ""
            flag = int(trajectory.degeneracy_flags[k]) if k < n_steps else 0
            writer.writerow(
                [
                    k,
                    repr(float(trajectory.losses[k])),
                    repr(float(norms[k])),
                    step,
                    min(k, n_steps) * per_step_bits,
                    flag,
                ]
            )
