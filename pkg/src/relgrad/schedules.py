"""Step-size schedules for gradient methods, normalized by the smoothness
constant.

Four families: a constant step, the dynamic schedule driven by the running
sum of previous steps, the silver schedule built by recursive doubling
around ever-longer middle steps, and the unit step consumed by the fast
gradient method.  Any schedule can be shortened by 1/(1+delta) to counter
relative gradient inexactness.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ScheduleKind",
    "StepSchedule",
    "constant_schedule",
    "dynamic_schedule",
    "silver_schedule",
    "fgm_step_schedule",
    "shorten",
    "schedule_to_text",
    "schedule_from_text",
    "SILVER_RATIO",
]

SILVER_RATIO = 1.0 + math.sqrt(2.0)


class ScheduleKind(enum.Enum):
    CONSTANT = "constant"
    DYNAMIC = "dynamic"
    SILVER = "silver"
    FGM_STEP = "fgm_step"


@dataclass(frozen=True, eq=False)
class StepSchedule:
    """A finite sequence of positive normalized step sizes h_0..h_{N-1}.

    ``shortening_delta`` is 0 for an unshortened schedule; otherwise every
    step equals the unshortened value divided by (1 + shortening_delta).
    ``guarantee_points`` lists the iteration counts at which the silver
    schedule's worst-case guarantee holds (empty for other kinds).
    """

    kind: ScheduleKind
    steps: np.ndarray
    shortening_delta: float = 0.0
    guarantee_points: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=np.float64)
        object.__setattr__(self, "steps", steps)
        if steps.ndim != 1 or steps.size == 0:
            raise ValueError("a schedule needs at least one step")
        if not np.all(steps > 0):
            raise ValueError("all steps must be positive")
        if not 0.0 <= self.shortening_delta < 1.0:
            raise ValueError("shortening_delta must lie in [0, 1)")

    def __len__(self) -> int:
        return int(self.steps.size)

    @property
    def max_step(self) -> float:
        return float(np.max(self.steps))


def constant_schedule(h: float, n_steps: int) -> StepSchedule:
    """N copies of the step h; h = 1.5 is the one-step optimal choice."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    return StepSchedule(kind=ScheduleKind.CONSTANT, steps=np.full(n_steps, float(h)))


def dynamic_schedule(n_steps: int) -> StepSchedule:
    """h_0 = sqrt(2) and, with H the sum of all previous steps,

        h_n = (-H + sqrt(H^2 + 8(H + 1))) / 2.

    The steps increase towards 2, the optimal constant step in the
    infinite-horizon exact case.
    """
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    steps = np.empty(n_steps)
    steps[0] = math.sqrt(2.0)
    running_sum = steps[0]
    for n in range(1, n_steps):
        steps[n] = (-running_sum + math.sqrt(running_sum**2 + 8.0 * (running_sum + 1.0))) / 2.0
        running_sum += steps[n]
    return StepSchedule(kind=ScheduleKind.DYNAMIC, steps=steps)


def silver_schedule(n_steps: int) -> StepSchedule:
    """The silver schedule: starting from [sqrt(2)], a sequence of length
    2^k - 1 is extended to length 2^(k+1) - 1 as

        [seq, 1 + rho^(k-1), seq],   rho = 1 + sqrt(2).

    For N not of the form 2^k - 1, the next full level is generated and
    truncated; guarantee_points records the prefix lengths 2^j - 1 <= N at
    which the schedule's worst-case guarantee applies.
    """
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    seq = [math.sqrt(2.0)]
    level = 1
    while len(seq) < n_steps:
        seq = seq + [1.0 + SILVER_RATIO ** (level - 1)] + seq
        level += 1
    points = frozenset(2**j - 1 for j in range(1, level + 1) if 2**j - 1 <= n_steps)
    return StepSchedule(
        kind=ScheduleKind.SILVER,
        steps=np.array(seq[:n_steps]),
        guarantee_points=points,
    )


def fgm_step_schedule(n_steps: int, h: float = 1.0) -> StepSchedule:
    """The fast gradient method's constant step (h = 1 by default), kept as
    its own kind because the momentum recursion consumes it differently."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    return StepSchedule(kind=ScheduleKind.FGM_STEP, steps=np.full(n_steps, float(h)))


def shorten(schedule: StepSchedule, delta: float) -> StepSchedule:
    """Divide every step by (1 + delta), recording the factor.

    Shortening by 0 is the identity.  A schedule already shortened by a
    nonzero delta cannot be shortened again (the recorded factor would no
    longer describe the steps).
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    if delta == 0.0:
        return StepSchedule(
            kind=schedule.kind,
            steps=schedule.steps.copy(),
            shortening_delta=schedule.shortening_delta,
            guarantee_points=schedule.guarantee_points,
        )
    if schedule.shortening_delta != 0.0:
        raise ValueError("schedule is already shortened")
    return StepSchedule(
        kind=schedule.kind,
        steps=schedule.steps / (1.0 + delta),
        shortening_delta=delta,
        guarantee_points=schedule.guarantee_points,
    )


def schedule_to_text(schedule: StepSchedule) -> str:
    """One decimal step per line, 17 significant digits (lossless for
    float64)."""
    return "\n".join(f"{h:.17g}" for h in schedule.steps) + "\n"


def schedule_from_text(text: str, kind: ScheduleKind = ScheduleKind.CONSTANT) -> StepSchedule:
    steps = [float(line) for line in text.strip().splitlines() if line.strip()]
    return StepSchedule(kind=kind, steps=np.array(steps))
