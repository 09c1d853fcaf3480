"""Convex-hull polyhedron and a self-contained log-barrier solver.

The convex hull of the per-antenna PSK alphabet (amplitude ``1/sqrt(M)``)
is the polyhedron ``A x_r <= b`` with one face per quantization angle and
``b = cos(pi/alpha_x)/sqrt(M)`` on every row.  The relaxed criterion
problems, and the per-node subproblems of the branch-and-bound search, are
minimized over this set (plus the nonnegative-edge-margin rows in the
union-bound case) with a damped-Newton barrier method.  Analytic gradients
and Hessians come from the objective forms, so a solve is a few dozen small
dense linear systems: cheap at the antenna counts this library targets.

All solves are deterministic: fixed iteration order, no randomized pivoting.
"""

from dataclasses import dataclass

import numpy as np

from .objectives import make_form
from .special import erf, log_norm_cdf, mills_ratio_inv

__all__ = [
    "Polyhedron",
    "SubPolyhedron",
    "SolverConfig",
    "RelaxedSolution",
    "build_polyhedron",
    "restrict_polyhedron",
    "find_strictly_feasible",
    "solve_relaxed",
    "solve_subproblem",
]


@dataclass(frozen=True)
class Polyhedron:
    """Inequality description ``A x_r <= b`` of the transmit convex hull.

    ``A`` has one block of M rows per quantization angle; the row for
    antenna ``m`` and angle index ``i`` reads
    ``cos(phi_i) Re x_m - sin(phi_i) Im x_m <= cos(pi/alpha_x)/sqrt(M)``
    with ``phi_i = 2 pi i / alpha_x``.
    """

    A: np.ndarray
    b: np.ndarray
    n_antennas: int
    alpha_x: int


@dataclass(frozen=True)
class SubPolyhedron:
    """Hull constraints restricted to the trailing free antennas."""

    A: np.ndarray
    b: np.ndarray
    n_free: int


def build_polyhedron(n_antennas: int, alpha_x: int) -> Polyhedron:
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    if alpha_x < 2:
        raise ValueError("alpha_x must be >= 2")
    ii = np.arange(1, alpha_x + 1)
    phi = 2.0 * np.pi * ii / alpha_x
    eye = np.eye(n_antennas)
    blocks = [np.kron(eye, np.array([[np.cos(p), -np.sin(p)]])) for p in phi]
    A = np.vstack(blocks)
    b = np.full(n_antennas * alpha_x, np.cos(np.pi / alpha_x) / np.sqrt(n_antennas))
    return Polyhedron(A=A, b=b, n_antennas=n_antennas, alpha_x=alpha_x)


def restrict_polyhedron(poly: Polyhedron, p: int) -> SubPolyhedron:
    """Keep the columns (and per-antenna rows) of the last ``M - p`` antennas.

    Rows touching only fixed antennas constrain nothing in the subspace and
    are dropped together with their right-hand sides.
    """
    m = poly.n_antennas
    if not 1 <= p <= m - 1:
        raise ValueError(f"layer index p must be in [1, {m - 1}], got {p}")
    antenna = np.tile(np.arange(m), poly.alpha_x)
    keep = antenna >= p
    return SubPolyhedron(
        A=poly.A[keep][:, 2 * p:],
        b=poly.b[keep],
        n_free=2 * (m - p),
    )


@dataclass
class SolverConfig:
    """Barrier-method parameters.

    ``eps_solve`` is the certified duality-gap target; reported lower bounds
    subtract it so branch-and-bound pruning stays sound under approximate
    convergence.
    """

    t_init: float = 1.0
    mu: float = 20.0
    newton_tol: float = 1e-9
    eps_solve: float = 1e-8
    max_outer: int = 50
    max_inner: int = 100
    feas_slack: float = 1e-6
    ridge: float = 1e-12
    armijo: float = 0.25
    backtrack: float = 0.5

    def __post_init__(self):
        if not self.mu > 1:
            raise ValueError("mu must be > 1")
        if min(self.newton_tol, self.eps_solve, self.feas_slack) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class RelaxedSolution:
    """Outcome of one convex solve.

    ``value`` is the objective at the returned iterate; ``lower_bound`` is
    ``value - eps_solve`` and underestimates the true constrained minimum.
    ``status`` is one of ``converged``, ``max-iter``, ``infeasible``.
    """

    x: np.ndarray | None
    value: float
    lower_bound: float
    status: str
    gap: float = np.inf
    dual: np.ndarray | None = None
    newton_steps: int = 0
    outer_rounds: int = 0
    # set by the batched solver when a node stopped refining because its
    # certified bound already crossed the caller's pruning threshold
    early_pruned: bool = False


def _newton_center(value, gradient, hessian, A, b, x, t, cfg):
    """Damped Newton on t*g + barrier from a strictly feasible ``x``."""
    n = x.shape[0]
    steps = 0
    converged = False
    for _ in range(cfg.max_inner):
        slack = b - A @ x
        inv_s = 1.0 / slack
        psi = t * value(x) - np.log(slack).sum()
        grad = t * gradient(x) + A.T @ inv_s
        hess = t * hessian(x) + (A * (inv_s * inv_s)[:, None]).T @ A
        d = _solve_direction(hess, grad, cfg, n)
        lam2 = -float(grad @ d)
        if lam2 <= 2.0 * cfg.newton_tol:
            converged = True
            break
        # line search from at most a fraction of the distance to the boundary
        ad = A @ d
        pos = ad > 0.0
        step = min(1.0, 0.99 * float(np.min(slack[pos] / ad[pos]))) if pos.any() else 1.0
        gd = float(grad @ d)
        while True:
            x_try = x + step * d
            s_try = b - A @ x_try
            if np.all(s_try > 0.0):
                psi_try = t * value(x_try) - np.log(s_try).sum()
                if np.isfinite(psi_try) and psi_try <= psi + cfg.armijo * step * gd:
                    break
            step *= cfg.backtrack
            if step < 1e-14:
                return x, True, steps  # stalled: numerically centered
        x = x_try
        steps += 1
    return x, converged, steps


def _solve_direction(hess, grad, cfg, n):
    ridge = 0.0
    scale = max(1.0, float(np.trace(hess)) / n)
    for _ in range(8):
        try:
            d = np.linalg.solve(hess + ridge * np.eye(n), -grad)
        except np.linalg.LinAlgError:
            d = None
        if d is not None and np.all(np.isfinite(d)):
            return d
        ridge = cfg.ridge * scale if ridge == 0.0 else ridge * 100.0
    raise np.linalg.LinAlgError("Newton system unsolvable even with ridge")


def _barrier_minimize(value, gradient, hessian, A, b, x0, cfg, stop=None):
    """Outer barrier loop; returns (x, status, gap, t, counters)."""
    m = A.shape[0]
    t = cfg.t_init
    x = np.asarray(x0, dtype=float).copy()
    status = "converged"
    total_steps = 0
    rounds = 0
    while True:
        x, ok, steps = _newton_center(value, gradient, hessian, A, b, x, t, cfg)
        total_steps += steps
        rounds += 1
        if not ok:
            status = "max-iter"
        if stop is not None and stop(x):
            break
        if m / t <= cfg.eps_solve:
            break
        if rounds >= cfg.max_outer:
            status = "max-iter"
            break
        t *= cfg.mu
    return x, status, m / t, t, total_steps, rounds


def find_strictly_feasible(A, b, cfg: SolverConfig | None = None):
    """Point with slack >= ``feas_slack`` on every row of ``A x <= b``, or None.

    Phase-I slack minimization: minimize the scalar ``s`` subject to
    ``A x - b <= s`` using the same barrier machinery, stopping early once
    ``s`` is comfortably negative.
    """
    cfg = cfg or SolverConfig()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    A_ext = np.hstack([A, -np.ones((A.shape[0], 1))])
    z0 = np.zeros(n + 1)
    z0[-1] = float(np.max(-b)) + 1.0
    e_last = np.zeros(n + 1)
    e_last[-1] = 1.0
    zero_h = np.zeros((n + 1, n + 1))
    deep = -max(1e-3, 2.0 * cfg.feas_slack)
    z, _, _, _, _, _ = _barrier_minimize(
        value=lambda z: float(z[-1]),
        gradient=lambda z: e_last,
        hessian=lambda z: zero_h,
        A=A_ext,
        b=b,
        x0=z0,
        cfg=cfg,
        stop=lambda z: z[-1] <= deep,
    )
    if z[-1] > -cfg.feas_slack:
        return None
    return z[:-1]


def _assemble_system(form, A, b, extra_ineq):
    if form.has_margin_constraints:
        A = np.vstack([A, -form.margin_rows])
        b = np.concatenate([b, form.margin_offsets])
    if extra_ineq is not None:
        C, d = extra_ineq
        A = np.vstack([A, np.asarray(C, dtype=float)])
        b = np.concatenate([b, np.asarray(d, dtype=float)])
    return A, b


def _solve_form(form, A, b, cfg):
    x0 = np.zeros(form.n_free)
    slack0 = b - A @ x0
    if np.min(slack0) <= cfg.feas_slack:
        x0 = find_strictly_feasible(A, b, cfg)
        if x0 is None:
            return RelaxedSolution(
                x=None, value=np.inf, lower_bound=np.inf, status="infeasible"
            )
    x, status, gap, t, steps, rounds = _barrier_minimize(
        form.value, form.gradient, form.hessian, A, b, x0, cfg
    )
    dual = 1.0 / (t * (b - A @ x))
    val = form.value(x)
    return RelaxedSolution(
        x=x,
        value=val,
        lower_bound=val - cfg.eps_solve,
        status=status,
        gap=gap,
        dual=dual,
        newton_steps=steps,
        outer_rounds=rounds,
    )


def solve_relaxed(data, poly: Polyhedron, cfg: SolverConfig | None = None, extra_ineq=None):
    """Minimize the criterion objective over the convex hull.

    For the union-bound criterion the nonnegative-edge-margin rows are part
    of the feasible set, which also keeps the objective convex and finite.
    ``extra_ineq`` optionally appends rows ``(C, d)`` meaning ``C x <= d``.
    """
    cfg = cfg or SolverConfig()
    form = make_form(data)
    A, b = _assemble_system(form, poly.A, poly.b, extra_ineq)
    return _solve_form(form, A, b, cfg)


def solve_subproblem(data, f_r, poly: Polyhedron, cfg: SolverConfig | None = None):
    """Minimize over the free tail with the leading coordinates fixed at ``f_r``.

    ``f_r`` is the interleaved real description of the fixed prefix (length
    ``2p``).  The fixed part enters the margins as constant offsets; the
    union-bound margin constraints are shifted accordingly.  With an empty
    prefix this is exactly :func:`solve_relaxed`.
    """
    cfg = cfg or SolverConfig()
    f_r = np.asarray(f_r, dtype=float)
    if f_r.shape[0] % 2 != 0:
        raise ValueError("fixed prefix must have even real length")
    p = f_r.shape[0] // 2
    if p == 0:
        return solve_relaxed(data, poly, cfg)
    form = make_form(data, f_r)
    sub = restrict_polyhedron(poly, p)
    A, b = _assemble_system(form, sub.A, sub.b, None)
    return _solve_form(form, A, b, cfg)


class _BatchQmsep:
    """Exact-criterion objective over a batch of nodes sharing row matrices."""

    margin_constraints = False

    def __init__(self, data, p, prefixes_r):
        self.w_re = data.re_rows[:, 2 * p:]
        self.w_im = data.im_rows[:, 2 * p:]
        self.off_re = prefixes_r @ data.re_rows[:, :2 * p].T
        self.off_im = prefixes_r @ data.im_rows[:, :2 * p].T

    def value(self, vs):
        m_re = vs @ self.w_re.T + self.off_re
        m_im = vs @ self.w_im.T + self.off_im
        return -(log_norm_cdf(m_re).sum(axis=1) + log_norm_cdf(m_im).sum(axis=1))

    def value_grad_hess(self, vs):
        m_re = vs @ self.w_re.T + self.off_re
        m_im = vs @ self.w_im.T + self.off_im
        val = -(log_norm_cdf(m_re).sum(axis=1) + log_norm_cdf(m_im).sum(axis=1))
        r_re = mills_ratio_inv(m_re)
        r_im = mills_ratio_inv(m_im)
        grad = -(r_re @ self.w_re + r_im @ self.w_im)
        c_re = r_re * (m_re + r_re)
        c_im = r_im * (m_im + r_im)
        hess = (self.w_re.T * c_re[:, None, :]) @ self.w_re
        hess += (self.w_im.T * c_im[:, None, :]) @ self.w_im
        return val, grad, hess


class _BatchUbmsep:
    """Union-bound objective over a batch of nodes sharing row matrices."""

    margin_constraints = True

    def __init__(self, data, p, prefixes_r):
        self.w1 = data.edge_rows_1[:, 2 * p:]
        self.w2 = data.edge_rows_2[:, 2 * p:]
        self.off1 = prefixes_r @ data.edge_rows_1[:, :2 * p].T
        self.off2 = prefixes_r @ data.edge_rows_2[:, :2 * p].T

    def _q(self, vs):
        m1 = vs @ self.w1.T + self.off1
        m2 = vs @ self.w2.T + self.off2
        return m1, m2, erf(m1) + erf(m2)

    def value(self, vs):
        _, _, q = self._q(vs)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -np.sum(np.log(np.where(q > 0.0, q, np.nan)), axis=1)
        return np.where(np.isfinite(val), val, np.inf)

    def value_grad_hess(self, vs):
        m1, m2, q = self._q(vs)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -np.sum(np.log(np.where(q > 0.0, q, np.nan)), axis=1)
        val = np.where(np.isfinite(val), val, np.inf)
        c = 2.0 / np.sqrt(np.pi)
        inv_q = 1.0 / q
        a1 = c * np.exp(-m1 * m1) * inv_q
        a2 = c * np.exp(-m2 * m2) * inv_q
        grad = -(a1 @ self.w1 + a2 @ self.w2)
        hess = (self.w1.T * (a1 * a1 + 2.0 * a1 * m1)[:, None, :]) @ self.w1
        hess += (self.w2.T * (a2 * a2 + 2.0 * a2 * m2)[:, None, :]) @ self.w2
        cross = (self.w1.T * (a1 * a2)[:, None, :]) @ self.w2
        hess += cross + np.transpose(cross, (0, 2, 1))
        return val, grad, hess


def _batch_solve_dir(hess, rhs, eye, cfg):
    # per-row ridge scaled to the matrix magnitude; the final barrier rounds
    # reach diagonals near 1/eps_solve^2 where float64 solves need help
    n = hess.shape[-1]
    scale = np.einsum("bii->b", hess) / n
    scale = np.maximum(np.abs(scale), 1.0)[:, None, None] * eye
    ridge = 0.0
    for _ in range(10):
        try:
            d = np.linalg.solve(hess + ridge * scale, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            d = None
        if d is not None and np.all(np.isfinite(d)):
            return d
        ridge = cfg.ridge if ridge == 0.0 else ridge * 100.0
    raise np.linalg.LinAlgError("batched Newton system unsolvable even with ridge")


def _batch_newton(problem, A_all, b_all, vs, t, active, cfg):
    """Vectorized damped Newton centering for all active rows of the batch."""
    n = vs.shape[1]
    eye = np.eye(n)
    at = A_all.T
    todo = active.copy()
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(cfg.max_inner):
            if not todo.any():
                break
            slack = b_all - vs @ at
            inv_s = np.where(todo[:, None], 1.0 / slack, 0.0)
            val, grad_o, hess_o = problem.value_grad_hess(vs)
            psi = t * val - np.log(np.where(slack > 0.0, slack, 1.0)).sum(axis=1)
            grad = t * grad_o + inv_s @ A_all
            hess = t * hess_o + (at * (inv_s * inv_s)[:, None, :]) @ A_all
            hess[~todo] = eye  # keep the batched solve well posed for idle rows
            grad_solve = np.where(todo[:, None], grad, 0.0)
            d = _batch_solve_dir(hess, -grad_solve, eye, cfg)
            lam2 = -np.einsum("bi,bi->b", grad_solve, d)
            todo &= ~(lam2 <= 2.0 * cfg.newton_tol)
            if not todo.any():
                break
            gd = np.einsum("bi,bi->b", grad_solve, d)
            # first trial: full step capped at the boundary fraction; after a
            # rejection, drop straight to the damped Newton length
            step_ad = d @ at
            ratios = np.where(step_ad > 0.0, slack / step_ad, np.inf)
            cap = 0.98 * ratios.min(axis=1)
            step = np.where(todo, np.minimum(1.0, cap), 0.0)
            damped = np.minimum(1.0 / (1.0 + np.sqrt(np.maximum(lam2, 0.0))), cap)
            first = True
            accepted = np.zeros_like(todo)
            for _ls in range(40):
                pending = todo & ~accepted & (step > 1e-14)
                if not pending.any():
                    break
                v_try = vs + step[:, None] * d
                s_try = b_all - v_try @ at
                feas = np.all(s_try > 0.0, axis=1)
                bar = -np.sum(np.log(np.where(s_try > 0.0, s_try, 1.0)), axis=1)
                psi_try = np.where(feas, t * problem.value(v_try) + bar, np.inf)
                ok = pending & feas & (psi_try <= psi + cfg.armijo * step * gd)
                vs = np.where(ok[:, None], v_try, vs)
                accepted |= ok
                rejected = pending & ~ok
                if first:
                    step = np.where(rejected, np.minimum(damped, cfg.backtrack * step), step)
                    first = False
                else:
                    step = np.where(rejected, step * cfg.backtrack, step)
            todo &= accepted  # rows whose line search stalled are treated as centered
    return vs


def _batch_phase1(A_all, b_all, cfg):
    """Strictly feasible starts for every row of a batched system, or flags."""
    n_rows, n = b_all.shape[0], A_all.shape[1]
    A_ext = np.hstack([A_all, -np.ones((A_all.shape[0], 1))])
    zs = np.zeros((n_rows, n + 1))
    zs[:, -1] = np.max(-b_all, axis=1) + 1.0
    deep = -max(1e-3, 2.0 * cfg.feas_slack)

    class _Linear:
        def value(self, vs):
            return vs[:, -1]

        def value_grad_hess(self, vs):
            g = np.zeros_like(vs)
            g[:, -1] = 1.0
            h = np.zeros((vs.shape[0], vs.shape[1], vs.shape[1]))
            return vs[:, -1], g, h

    lin = _Linear()
    t = cfg.t_init
    m = A_ext.shape[0]
    for _ in range(cfg.max_outer):
        active = zs[:, -1] > deep
        if not active.any():
            break
        zs = _batch_newton(lin, A_ext, b_all, zs, t, active, cfg)
        if m / t <= cfg.eps_solve:
            break
        t *= cfg.mu
    feasible = zs[:, -1] <= -cfg.feas_slack
    return zs[:, :-1], feasible


def solve_subproblems_batch(data, prefixes_r, poly: Polyhedron,
                            cfg: SolverConfig | None = None, warm_tails=None,
                            stop_bound=None, gap_floor=None):
    """Solve the conditioned subproblems of many same-length prefixes at once.

    All nodes share the restricted hull and objective rows; only the margin
    offsets differ, so the barrier iterations vectorize across nodes.
    ``warm_tails`` optionally supplies per-node starting tails.  When
    ``stop_bound`` is given, a node stops refining as soon as its certified
    bound (current value minus duality gap) reaches ``stop_bound``: such a
    node is about to be pruned by the caller, so full precision is wasted
    on it.  Its reported ``lower_bound`` stays valid and ``early_pruned``
    marks it.  Results otherwise match :func:`solve_subproblem` node for
    node up to solver tolerance.
    """
    cfg = cfg or SolverConfig()
    prefixes_r = np.asarray(prefixes_r, dtype=float)
    n_nodes, width = prefixes_r.shape
    p = width // 2
    if p == 0:
        sub = SubPolyhedron(A=poly.A, b=poly.b, n_free=2 * poly.n_antennas)
    else:
        sub = restrict_polyhedron(poly, p)
    n = sub.n_free
    if data.criterion == "qmsep":
        problem = _BatchQmsep(data, p, prefixes_r)
        A_all = sub.A
        b_all = np.tile(sub.b, (n_nodes, 1))
    else:
        problem = _BatchUbmsep(data, p, prefixes_r)
        A_all = np.vstack([sub.A, -problem.w1, -problem.w2])
        b_all = np.hstack([
            np.tile(sub.b, (n_nodes, 1)), problem.off1, problem.off2,
        ])

    vs = np.zeros((n_nodes, n))
    if warm_tails is not None:
        warm = np.asarray(warm_tails, dtype=float)
        warm_ok = np.all(b_all - warm @ A_all.T > 1e-10, axis=1)
        vs[warm_ok] = warm[warm_ok]
    else:
        warm_ok = np.zeros(n_nodes, dtype=bool)
    slack0 = b_all - vs @ A_all.T
    need_phase1 = ~warm_ok & (slack0.min(axis=1) <= cfg.feas_slack)
    feasible = np.ones(n_nodes, dtype=bool)
    if need_phase1.any():
        starts, ok = _batch_phase1(A_all, b_all[need_phase1], cfg)
        idx = np.nonzero(need_phase1)[0]
        vs[idx[ok]] = starts[ok]
        feasible[idx[~ok]] = False

    t = cfg.t_init
    m = A_all.shape[0]
    eps_target = max(cfg.eps_solve, gap_floor) if gap_floor is not None else cfg.eps_solve
    active = feasible.copy()
    frozen_bound = np.full(n_nodes, -np.inf)
    frozen_gap = np.zeros(n_nodes)
    early = np.zeros(n_nodes, dtype=bool)
    # survivors may stop at this bound resolution: pruning only needs to
    # know which side of the threshold a node's certified interval lies on
    coarse_gap = max(eps_target, 1e-3)
    while True:
        vs = _batch_newton(problem, A_all, b_all, vs, t, active, cfg)
        gap = m / t
        if stop_bound is not None and gap > eps_target and active.any():
            vals = problem.value(vs)
            cert = vals - gap
            hit_prune = active & (cert >= stop_bound)
            hit_keep = active & (vals < stop_bound) & (gap <= coarse_gap)
            hit = hit_prune | hit_keep
            if hit.any():
                frozen_bound[hit] = cert[hit]
                frozen_gap[hit] = gap
                early |= hit_prune
                active &= ~hit
        if gap <= eps_target or not active.any():
            break
        t *= cfg.mu
    values = np.where(feasible, problem.value(vs), np.inf)
    out = []
    for i in range(n_nodes):
        if not feasible[i]:
            out.append(RelaxedSolution(
                x=None, value=np.inf, lower_bound=np.inf, status="infeasible",
            ))
        elif frozen_bound[i] > -np.inf:
            out.append(RelaxedSolution(
                x=vs[i], value=float(values[i]),
                lower_bound=float(frozen_bound[i]), status="converged",
                gap=float(frozen_gap[i]), early_pruned=bool(early[i]),
            ))
        else:
            out.append(RelaxedSolution(
                x=vs[i], value=float(values[i]),
                lower_bound=float(values[i] - eps_target),
                status="converged", gap=m / t,
            ))
    return out
