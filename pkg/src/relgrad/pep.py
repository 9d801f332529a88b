"""Worst-case rate computation via performance estimation.

For a fixed method, iteration count N and inexactness level delta, the
tight worst-case rate

    tau_N = max over L-smooth convex f and admissible inexact directions
            of  (1/L) min_k ||grad f(x_k)||^2   subject to f(x_0) - f* <= 1

is the optimum of a semidefinite program: inner products of the unknown
iterates, gradients and inexact directions populate a Gram matrix, the
smooth convex class is captured exactly by its interpolation inequalities,
the inexactness bound ||d_k - g_k||^2 <= delta^2 ||g_k||^2 is linear in
the Gram variable, and the min over iterates becomes an epigraph variable.

Instances carry plain numeric constraint data, export to SDPA sparse
format for external solvers, and solve through a small conic-solver
contract (any engine certifying a duality gap qualifies); the default
implementation uses cvxpy with Clarabel.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .schedules import ScheduleKind, StepSchedule, shorten

__all__ = [
    "LinearConstraint",
    "PepInstance",
    "SolveReport",
    "PepWitness",
    "PepInvariantError",
    "SdpaProblem",
    "build_pep",
    "to_sdpa",
    "export_sdpa",
    "read_sdpa",
    "CvxpySolver",
    "solve_pep",
    "rate_sweep",
    "extract_witness",
    "verify_witness",
    "TAU_ZERO",
]

# Rate achieved by performing no iterations: with L = 1 and
# f(x_0) - f* <= 1, the extremal quadratic attains ||g_0||^2 = 2.
TAU_ZERO = 2.0

MIN_ITERATES = "min_iterates"
LAST_ITERATE = "last_iterate"


class PepInvariantError(RuntimeError):
    """A solved instance violated a structural bound (e.g. tau > tau_0)."""


@dataclass(frozen=True)
class LinearConstraint:
    """One inequality  <gram_coeff, G> + value_coeff . f + epigraph_coeff . t
    <= bound  on the Gram matrix G, function values f and epigraph t."""

    gram_coeff: np.ndarray
    value_coeff: np.ndarray
    epigraph_coeff: float
    bound: float
    label: str
    sense: str = "<="


@dataclass(frozen=True)
class PepInstance:
    """A performance-estimation SDP in Gram form.

    Base vectors, in order: x_0 - x*, the gradients at every evaluation
    point, then the inexact directions d_0..d_{N-1}.  Every iterate is an
    explicit linear combination of these (methods are linear in past
    directions); the representations are kept for witness reconstruction.
    The optimal value f* is normalized to 0 and the smoothness constant
    defaults to 1 (the rate definition is homogeneous in L).
    """

    method: str
    delta: float
    n_iterations: int
    smoothness: float
    criterion: str
    gram_dimension: int
    value_count: int
    constraints: tuple[LinearConstraint, ...]
    # representations over the base vectors:
    point_reps: np.ndarray        # evaluation points (incl. x*, last), rows
    gradient_reps: np.ndarray     # gradients at those points (x* row is 0)
    value_indices: tuple          # value-variable index per point, None for x*
    point_labels: tuple[str, ...]
    iterate_reps: np.ndarray      # x_0..x_N
    criterion_grad_reps: np.ndarray  # gradients entering the rate criterion
    direction_reps: np.ndarray    # d_0..d_{N-1}
    query_grad_reps: np.ndarray   # gradients at the oracle query points
    step_values: np.ndarray       # normalized steps consumed by the method

    def constraint_count(self, prefix: str) -> int:
        return sum(1 for c in self.constraints if c.label.startswith(prefix))


@dataclass
class SolveReport:
    """Outcome of one solve; tau is meaningful for statuses optimal and
    near_optimal only.  near_optimal is never silently promoted."""

    tau: float
    solver_status: str  # optimal | near_optimal | infeasible | unbounded | numerical_failure
    duality_gap: float
    gram: np.ndarray | None = None
    values: np.ndarray | None = None
    epigraph: float | None = None
    max_violation: float | None = None
    min_gram_eigenvalue: float | None = None
    diagnostics: str = ""


def _sym_outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return 0.5 * (np.outer(u, v) + np.outer(v, u))


def _basis(dimension: int, index: int) -> np.ndarray:
    v = np.zeros(dimension)
    v[index] = 1.0
    return v


def _assemble(
    method: str,
    delta: float,
    n_iterations: int,
    smoothness: float,
    criterion: str,
    dimension: int,
    points: list[tuple[np.ndarray, np.ndarray, int | None, str]],
    queries: list[tuple[np.ndarray, np.ndarray]],
    iterate_reps: list[np.ndarray],
    criterion_grads: list[np.ndarray],
    step_values: np.ndarray,
) -> PepInstance:
    value_count = sum(1 for _, _, idx, _ in points if idx is not None)
    L = smoothness
    constraints: list[LinearConstraint] = []

    def value_vector(index: int | None, coefficient: float) -> np.ndarray:
        v = np.zeros(value_count)
        if index is not None:
            v[index] = coefficient
        return v

    # Smooth convex interpolation over every ordered pair of evaluation
    # points (x* included, with gradient 0 and value 0):
    #   f_i >= f_j + <g_j, x_i - x_j> + 1/(2L) ||g_i - g_j||^2
    for xi, gi, vi, li in points:
        for xj, gj, vj, lj in points:
            if li == lj:
                continue
            gram = _sym_outer(gj, xi - xj) + _sym_outer(gi - gj, gi - gj) / (2.0 * L)
            values = value_vector(vj, 1.0) + value_vector(vi, -1.0)
            constraints.append(
                LinearConstraint(gram, values, 0.0, 0.0, f"interpolation({li},{lj})")
            )
    # Relative inexactness at each oracle query:
    #   ||d_k - g_k||^2 <= delta^2 ||g_k||^2
    for k, (d_rep, g_rep) in enumerate(queries):
        gram = _sym_outer(d_rep - g_rep, d_rep - g_rep) - delta**2 * _sym_outer(g_rep, g_rep)
        constraints.append(
            LinearConstraint(gram, np.zeros(value_count), 0.0, 0.0, f"inexactness({k})")
        )
    # Normalization f(x_0) - f* <= 1.
    constraints.append(
        LinearConstraint(
            np.zeros((dimension, dimension)), value_vector(0, 1.0), 0.0, 1.0, "initial"
        )
    )
    # Epigraph of the criterion: t <= (1/L) ||g_k||^2 for the measured set.
    measured = (
        list(enumerate(criterion_grads))
        if criterion == MIN_ITERATES
        else [(len(criterion_grads) - 1, criterion_grads[-1])]
    )
    for k, g_rep in measured:
        constraints.append(
            LinearConstraint(
                -_sym_outer(g_rep, g_rep) / L,
                np.zeros(value_count),
                1.0,
                0.0,
                f"epigraph({k})",
            )
        )
    return PepInstance(
        method=method,
        delta=delta,
        n_iterations=n_iterations,
        smoothness=smoothness,
        criterion=criterion,
        gram_dimension=dimension,
        value_count=value_count,
        constraints=tuple(constraints),
        point_reps=np.array([p for p, _, _, _ in points]),
        gradient_reps=np.array([g for _, g, _, _ in points]),
        value_indices=tuple(idx for _, _, idx, _ in points),
        point_labels=tuple(l for _, _, _, l in points),
        iterate_reps=np.array(iterate_reps),
        criterion_grad_reps=np.array(criterion_grads),
        direction_reps=np.array([d for d, _ in queries]).reshape(len(queries), dimension),
        query_grad_reps=np.array([g for _, g in queries]).reshape(len(queries), dimension),
        step_values=step_values,
    )


def _build_gd(
    schedule: StepSchedule,
    delta: float,
    n_iterations: int,
    smoothness: float,
    criterion: str,
) -> PepInstance:
    N = n_iterations
    n = 2 * N + 2  # x0-x*, g_0..g_N, d_0..d_{N-1}
    g = [_basis(n, 1 + k) for k in range(N + 1)]
    # at delta = 0 the inexactness constraint degenerates to d_k = g_k;
    # substituting structurally avoids the ill-conditioned ||d-g||^2 <= 0
    # row (whose feasibility slack would loosen d by sqrt(tolerance))
    d = [g[k] if delta == 0.0 else _basis(n, 2 + N + k) for k in range(N)]
    x = [_basis(n, 0)]
    for k in range(N):
        x.append(x[k] - (schedule.steps[k] / smoothness) * d[k])
    points = [(x[k], g[k], k, f"x{k}") for k in range(N + 1)]
    points.append((np.zeros(n), np.zeros(n), None, "star"))
    queries = [(d[k], g[k]) for k in range(N)]
    name = schedule.kind.value + (":shortened" if schedule.shortening_delta else "")
    return _assemble(
        name, delta, N, smoothness, criterion, n, points, queries, x, g,
        schedule.steps[:N].copy(),
    )


def _build_fgm(
    h: float,
    delta: float,
    n_iterations: int,
    smoothness: float,
    criterion: str,
    momentum_index_offset: int,
    shortened: bool,
) -> PepInstance:
    N = n_iterations
    n_momentum = max(0, N - 1)  # y_0 coincides with x_0; y_N is never queried
    n = 1 + (N + 1) + n_momentum + N
    gx = [_basis(n, 1 + k) for k in range(N + 1)]
    gy = {k: _basis(n, 1 + (N + 1) + k - 1) for k in range(1, N)}
    query = {0: gx[0], **gy}
    # same structural substitution at delta = 0 as the descent builder
    d = [
        query[k] if delta == 0.0 else _basis(n, 1 + (N + 1) + n_momentum + k)
        for k in range(N)
    ]
    x = [_basis(n, 0)]
    y = [x[0]]
    for k in range(N):
        x.append(y[k] - (h / smoothness) * d[k])
        kk = k + momentum_index_offset
        y.append(x[k + 1] + (kk - 1.0) / (kk + 2.0) * (x[k + 1] - x[k]))
    points = [(x[k], gx[k], k, f"x{k}") for k in range(N + 1)]
    points += [(y[k], gy[k], N + 1 + k - 1, f"y{k}") for k in range(1, N)]
    points.append((np.zeros(n), np.zeros(n), None, "star"))
    queries = [(d[k], query[k]) for k in range(N)]
    name = "fgm_step" + (":shortened" if shortened else "")
    return _assemble(
        name, delta, N, smoothness, criterion, n, points, queries, x, gx,
        np.full(N, h),
    )


def build_pep(
    method: StepSchedule,
    delta: float,
    n_iterations: int,
    smoothness: float = 1.0,
    criterion: str = MIN_ITERATES,
    momentum_index_offset: int = 0,
) -> PepInstance:
    """Build the SDP for one method, inexactness level and horizon.

    ``method`` is a step schedule; the FGM_STEP kind selects the momentum
    recursion (its constant step becomes h), every other kind selects plain
    inexact gradient descent.  ``criterion`` picks which gradients the rate
    measures: every x-iterate (the default, following the min in the rate
    definition) or only the last one.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    if n_iterations < 0:
        raise ValueError("number of iterations must be nonnegative")
    if smoothness <= 0:
        raise ValueError("smoothness constant must be positive")
    if criterion not in (MIN_ITERATES, LAST_ITERATE):
        raise ValueError(f"unknown criterion: {criterion}")
    if n_iterations > 0 and len(method) < n_iterations:
        raise ValueError(
            f"schedule provides {len(method)} steps, {n_iterations} requested"
        )
    if method.kind is ScheduleKind.FGM_STEP and n_iterations > 0:
        h = float(method.steps[0])
        if not np.all(method.steps[:n_iterations] == h):
            raise ValueError("the momentum method uses a single constant step")
        return _build_fgm(
            h, delta, n_iterations, smoothness, criterion,
            momentum_index_offset, method.shortening_delta != 0.0,
        )
    return _build_gd(method, delta, n_iterations, smoothness, criterion)


# ---------------------------------------------------------------------------
# SDPA sparse format


@dataclass(frozen=True)
class SdpaProblem:
    """A problem in SDPA sparse (.dat-s) terms:

        max tr(F_0 Y)  s.t.  tr(F_i Y) = c_i (i = 1..m),  Y >= 0,

    with Y block diagonal.  Block 1 is the Gram block; block 2 is a
    diagonal block holding the function values, the epigraph variable and
    one slack per inequality (all provably nonnegative at feasible points,
    so the diagonal encoding is exact).  ``entries`` hold upper-triangle
    coefficients as (matrix_no, block_no, row, col, value), 1-based, with
    matrix 0 the objective.
    """

    block_sizes: tuple[int, ...]
    rhs: tuple[float, ...]
    entries: tuple[tuple[int, int, int, int, float], ...]
    comment: str = ""

    @property
    def n_constraints(self) -> int:
        return len(self.rhs)


def to_sdpa(instance: PepInstance) -> SdpaProblem:
    """Translate an instance into SDPA data (see :class:`SdpaProblem`).

    Each inequality row gains a slack diagonal entry to become the SDPA
    equality tr(F_i Y) = c_i.  Off-diagonal Gram coefficients are written
    once (upper triangle); the format's implied symmetry restores the full
    inner product.
    """
    if not instance.constraints:
        raise ValueError("instance has no constraints; nothing to export")
    m = len(instance.constraints)
    V = instance.value_count
    t_pos = V + 1  # 1-based position of the epigraph variable in block 2
    entries: list[tuple[int, int, int, int, float]] = [(0, 2, t_pos, t_pos, 1.0)]
    rhs: list[float] = []
    for i, con in enumerate(instance.constraints, start=1):
        gram = con.gram_coeff
        for r in range(instance.gram_dimension):
            for c in range(r, instance.gram_dimension):
                if gram[r, c] != 0.0:
                    entries.append((i, 1, r + 1, c + 1, float(gram[r, c])))
        for j in range(V):
            if con.value_coeff[j] != 0.0:
                entries.append((i, 2, j + 1, j + 1, float(con.value_coeff[j])))
        if con.epigraph_coeff != 0.0:
            entries.append((i, 2, t_pos, t_pos, float(con.epigraph_coeff)))
        entries.append((i, 2, t_pos + i, t_pos + i, 1.0))  # slack
        rhs.append(float(con.bound))
    comment = (
        f"pep method={instance.method} delta={instance.delta:.17g} "
        f"N={instance.n_iterations} L={instance.smoothness:.17g} "
        f"criterion={instance.criterion}"
    )
    return SdpaProblem(
        block_sizes=(instance.gram_dimension, -(V + 1 + m)),
        rhs=tuple(rhs),
        entries=tuple(entries),
        comment=comment,
    )


def export_sdpa(instance: PepInstance, path) -> SdpaProblem:
    """Write the instance to ``path`` in SDPA sparse format; returns the
    written data for convenience."""
    problem = to_sdpa(instance)
    with open(path, "w") as handle:
        handle.write(f"* {problem.comment}\n")
        handle.write(f"{problem.n_constraints}\n")
        handle.write(f"{len(problem.block_sizes)}\n")
        handle.write(" ".join(str(s) for s in problem.block_sizes) + "\n")
        handle.write(" ".join(f"{v:.17g}" for v in problem.rhs) + "\n")
        for mat, blk, row, col, value in problem.entries:
            handle.write(f"{mat} {blk} {row} {col} {value:.17g}\n")
    return problem


def read_sdpa(path) -> SdpaProblem:
    """Parse an SDPA sparse file back into :class:`SdpaProblem` data."""
    comment_lines: list[str] = []
    data_lines: list[str] = []
    with open(path) as handle:
        for line in handle:
            stripped = line.strip()
            if not stripped:
                continue
            if stripped[0] in "*\"":
                comment_lines.append(stripped.lstrip("*\" ").rstrip())
            else:
                data_lines.append(stripped)
    if len(data_lines) < 4:
        raise ValueError("not an SDPA sparse file: missing header lines")
    m = int(data_lines[0])
    n_blocks = int(data_lines[1])
    sizes = tuple(
        int(tok) for tok in data_lines[2].replace(",", " ").strip("{}() ").split()
    )
    if len(sizes) != n_blocks:
        raise ValueError(f"expected {n_blocks} block sizes, got {len(sizes)}")
    rhs = tuple(float(tok) for tok in data_lines[3].replace(",", " ").split())
    if len(rhs) != m:
        raise ValueError(f"expected {m} right-hand sides, got {len(rhs)}")
    entries = []
    for line in data_lines[4:]:
        tokens = line.split()
        if len(tokens) != 5:
            raise ValueError(f"bad coefficient line: {line!r}")
        entries.append(
            (int(tokens[0]), int(tokens[1]), int(tokens[2]), int(tokens[3]), float(tokens[4]))
        )
    return SdpaProblem(
        block_sizes=sizes,
        rhs=rhs,
        entries=tuple(entries),
        comment=" ".join(comment_lines),
    )


# ---------------------------------------------------------------------------
# Solving


class CvxpySolver:
    """Conic solve through cvxpy.  Any engine with semidefinite support
    works; Clarabel (interior point) is the default for its accuracy.  The
    duality gap is certified from the constraint multipliers: for this
    problem the dual objective is the inner product of the multipliers
    with the constraint bounds."""

    def __init__(self, engine: str = "CLARABEL", **solver_options):
        self.engine = engine
        self.solver_options = solver_options

    def solve(self, instance: PepInstance, tol: float) -> SolveReport:
        import cvxpy as cp
        import scipy.sparse as sp

        n = instance.gram_dimension
        m = len(instance.constraints)
        gram_rows = sp.csr_matrix(
            np.stack([c.gram_coeff.reshape(-1) for c in instance.constraints])
        )
        value_rows = sp.csr_matrix(
            np.stack([c.value_coeff for c in instance.constraints])
        )
        epi_coeff = np.array([c.epigraph_coeff for c in instance.constraints])
        bounds = np.array([c.bound for c in instance.constraints])

        gram = cp.Variable((n, n), PSD=True)
        values = (
            cp.Variable(instance.value_count) if instance.value_count else None
        )
        t = cp.Variable()
        lhs = gram_rows @ cp.vec(gram, order="C") + epi_coeff * t
        if values is not None:
            lhs = lhs + value_rows @ values
        constraint = lhs <= bounds
        problem = cp.Problem(cp.Maximize(t), [constraint])
        try:
            problem.solve(solver=self.engine, **self.solver_options)
        except cp.error.SolverError as exc:
            return SolveReport(
                tau=float("nan"),
                solver_status="numerical_failure",
                duality_gap=float("inf"),
                diagnostics=str(exc),
            )
        status_map = {
            cp.OPTIMAL: "optimal",
            cp.OPTIMAL_INACCURATE: "near_optimal",
            cp.INFEASIBLE: "infeasible",
            cp.INFEASIBLE_INACCURATE: "infeasible",
            cp.UNBOUNDED: "unbounded",
            cp.UNBOUNDED_INACCURATE: "unbounded",
        }
        status = status_map.get(problem.status, "numerical_failure")
        if status not in ("optimal", "near_optimal"):
            return SolveReport(
                tau=float("nan"),
                solver_status=status,
                duality_gap=float("inf"),
                diagnostics=f"solver status: {problem.status}",
            )
        tau = float(t.value)
        multipliers = np.asarray(constraint.dual_value, dtype=np.float64)
        gap = abs(float(bounds @ multipliers) - tau)
        if status == "optimal" and gap > tol:
            status = "near_optimal"
        return SolveReport(
            tau=tau,
            solver_status=status,
            duality_gap=gap,
            gram=np.asarray(gram.value, dtype=np.float64),
            values=(
                np.asarray(values.value, dtype=np.float64)
                if values is not None
                else np.zeros(0)
            ),
            epigraph=tau,
        )


def _feasibility(instance: PepInstance, report: SolveReport) -> tuple[float, float]:
    violations = [
        float(
            np.sum(c.gram_coeff * report.gram)
            + float(c.value_coeff @ report.values)
            + c.epigraph_coeff * report.epigraph
            - c.bound
        )
        for c in instance.constraints
    ]
    eigenvalues = np.linalg.eigvalsh(report.gram)
    return max(violations), float(eigenvalues[0])


def solve_pep(
    instance: PepInstance, solver: CvxpySolver | None = None, tol: float = 1e-8
) -> SolveReport:
    """Compute tau for an instance through a conic solver.

    The report keeps the solver's own status (a near_optimal result is
    reported as such, never upgraded).  Successful solves are sanity
    checked: tiny negative optima are clamped to zero, primal feasibility
    is measured and stored, and under the min-over-iterates criterion the
    structural bound tau <= tau_0 = 2 is asserted (adding iterates can
    only shrink the min, so exceeding the zero-iteration value signals a
    broken instance or solve).
    """
    if solver is None:
        solver = CvxpySolver()
    report = solver.solve(instance, tol)
    if report.solver_status not in ("optimal", "near_optimal"):
        return report
    if -1e-9 < report.tau < 0.0:
        report.tau = 0.0
    if report.tau < 0.0:
        report.solver_status = "numerical_failure"
        report.diagnostics = f"negative rate {report.tau}"
        return report
    if report.gram is not None:
        report.max_violation, report.min_gram_eigenvalue = _feasibility(instance, report)
    if instance.criterion == MIN_ITERATES and report.tau > TAU_ZERO + 1e-5:
        raise PepInvariantError(
            f"tau={report.tau} exceeds the zero-iteration rate {TAU_ZERO} "
            f"(method={instance.method}, delta={instance.delta}, N={instance.n_iterations})"
        )
    return report


def rate_sweep(
    schedule_builder,
    deltas,
    n_iterations: int,
    solver: CvxpySolver | None = None,
    criterion: str = MIN_ITERATES,
) -> list[dict]:
    """Solve original and shortened variants of one method family over a
    delta grid.

    ``schedule_builder(n_iterations)`` must return the unshortened
    schedule.  Returns one row per (delta, variant) with keys method,
    delta, n_iterations, shortened, tau, status; solver failures are
    recorded in the row and the sweep continues.
    """
    base = schedule_builder(n_iterations)
    rows: list[dict] = []
    for delta in deltas:
        for shortened in (False, True):
            schedule = shorten(base, delta) if shortened else base
            try:
                report = solve_pep(
                    build_pep(schedule, delta, n_iterations, criterion=criterion),
                    solver=solver,
                )
                tau, status = report.tau, report.solver_status
            except PepInvariantError as exc:
                tau, status = float("nan"), f"invariant_violation: {exc}"
            rows.append(
                {
                    "method": base.kind.value,
                    "delta": float(delta),
                    "n_iterations": n_iterations,
                    "shortened": shortened,
                    "tau": tau,
                    "status": status,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# Witness reconstruction


@dataclass(frozen=True)
class PepWitness:
    """Finite-dimensional worst-case instance recovered from a solved
    Gram matrix: coordinates for every evaluation point, its gradient and
    value (the minimizer sits at the origin with value 0), plus the
    iterates and inexact directions that realize the rate."""

    points: np.ndarray
    gradients: np.ndarray
    values: np.ndarray
    labels: tuple[str, ...]
    iterates: np.ndarray
    iterate_gradients: np.ndarray
    directions: np.ndarray
    query_gradients: np.ndarray

    def min_gradient_norm_sq(self) -> float:
        return float(np.min(np.sum(self.iterate_gradients**2, axis=1)))


def extract_witness(instance: PepInstance, report: SolveReport) -> PepWitness:
    """Factor the Gram matrix and map every stored representation into
    explicit coordinates (dimension = gram_dimension, negligible
    eigenvalues clipped)."""
    if report.gram is None:
        raise ValueError("report carries no Gram matrix")
    eigenvalues, eigenvectors = np.linalg.eigh(report.gram)
    factor = np.sqrt(np.clip(eigenvalues, 0.0, None))[:, None] * eigenvectors.T
    embed = lambda reps: reps @ factor.T
    all_values = np.array(
        [0.0 if idx is None else report.values[idx] for idx in instance.value_indices]
    )
    return PepWitness(
        points=embed(instance.point_reps),
        gradients=embed(instance.gradient_reps),
        values=all_values,
        labels=instance.point_labels,
        iterates=embed(instance.iterate_reps),
        iterate_gradients=embed(instance.criterion_grad_reps),
        directions=embed(instance.direction_reps),
        query_gradients=embed(instance.query_grad_reps),
    )


def verify_witness(
    instance: PepInstance, witness: PepWitness, tol: float = 1e-6
) -> dict[str, float]:
    """Largest violation of each constraint family by the witness, in
    coordinates (positive numbers mean violated by that amount)."""
    L = instance.smoothness
    interp = 0.0
    n_points = len(witness.points)
    for i in range(n_points):
        for j in range(n_points):
            if i == j:
                continue
            xi, gi, fi = witness.points[i], witness.gradients[i], witness.values[i]
            xj, gj, fj = witness.points[j], witness.gradients[j], witness.values[j]
            residual = fj - fi + gj @ (xi - xj) + (gi - gj) @ (gi - gj) / (2.0 * L)
            interp = max(interp, float(residual))
    inexact = 0.0
    for d, g in zip(witness.directions, witness.query_gradients):
        residual = float((d - g) @ (d - g)) - instance.delta**2 * float(g @ g)
        inexact = max(inexact, residual)
    initial = float(witness.values[0]) - 1.0
    return {"interpolation": interp, "inexactness": inexact, "initial": initial}
