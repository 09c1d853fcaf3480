"""Optimal discrete precoding by breadth-first branch-and-bound.

The feasible set (one alphabet choice per antenna) is searched layer by
layer: a node fixes the leading antennas, its convex subproblem gives a
certified lower bound for every completion, and projecting the relaxed tail
gives a feasible candidate that tightens the incumbent.  A node survives a
layer only while its bound stays below ``(1 - gamma)`` times the incumbent
value with ``gamma = delta * incumbent``; with the default ``delta`` the
retained suboptimality margin is far below the gap between distinct
alphabet vectors, so the search returns the exact optimum.

A quality-of-service variant checks the closed-form per-user SEP of every
feasible candidate it constructs and stops as soon as a target vector is
met.  Exhaustive-search baselines over the full candidate set (for both
criteria and for the worst-edge-margin rule) close the loop for testing.
"""

from dataclasses import dataclass, field

import numpy as np

from .convex import SolverConfig, build_polyhedron, solve_subproblems_batch
from .model import PrecodingInstance, to_complex, to_real
from .objectives import build_objective, objective_value, sep_for
from .projection import coordinate_objective, project_full_gs, project_partial_gs, project_uq
from .special import erf, log_norm_cdf

__all__ = [
    "BnbConfig",
    "NodeRecord",
    "Incumbent",
    "BnbOutcome",
    "solve_bnb",
    "solve_bnb_qos",
    "prune",
    "exhaustive_msep",
    "exhaustive_mmddt",
]

DEFAULT_ENUM_CAP = 2 ** 20
_MATCH_TOL = 1e-9
# absolute cap on the retained suboptimality margin inside the search, so
# near-tied discrete candidates are never traded away by the delta rule
_MARGIN_CAP = 1e-9


@dataclass
class BnbConfig:
    criterion: str = "qmsep"
    delta: float = 5e-7
    projection: str = "full-gs"
    solver: SolverConfig = field(default_factory=SolverConfig)
    node_limit: int = 1_000_000
    # skip a child whose parent bound is already prunable under the current
    # incumbent; outcome-equivalent to pruning it after the layer
    prefilter: bool = True

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.criterion not in ("qmsep", "ubmsep"):
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.projection not in ("uq", "partial-gs", "full-gs"):
            raise ValueError(f"unknown projection {self.projection!r}")


@dataclass
class NodeRecord:
    """Surviving prefix (alphabet indices) with its certified lower bound."""

    prefix: tuple
    g_lb: float
    v_lb: np.ndarray | None = None


@dataclass
class Incumbent:
    x: np.ndarray
    value: float


@dataclass
class BnbOutcome:
    """Search result and counters.

    ``nodes_expanded`` counts conditioned subproblem solves plus final-layer
    candidate evaluations; ``subproblems_solved`` counts barrier solves of
    conditioned subproblems only (the root relaxation is separate).
    """

    x: np.ndarray
    objective: float
    termination: str
    nodes_expanded: int = 0
    subproblems_solved: int = 0
    nodes_pruned: int = 0
    layers_completed: int = 0
    sep: np.ndarray | None = None


def _prune_threshold(incumbent_value: float, delta: float, margin_cap=None) -> float:
    """Survival threshold: keep a node while its bound is strictly below it.

    ``margin_cap`` bounds the retained suboptimality margin in absolute
    terms; the search uses it so that near-tied candidates (objective gaps
    below the relative margin ``delta * incumbent^2``) cannot be lost.
    """
    g = incumbent_value
    if g > 0.0:
        margin = min(delta * g, 1.0 - 1e-9) * g
    else:
        margin = delta * abs(g) + 1e-12
    if margin_cap is not None:
        margin = min(margin, margin_cap)
    return g - margin


def prune(records, incumbent: Incumbent, delta: float):
    """Keep the records whose bound beats the incumbent by the safety margin.

    Records with infinite bounds (infeasible union-bound nodes) never
    survive.
    """
    thr = _prune_threshold(incumbent.value, delta)
    return [r for r in records if r.g_lb < thr]


def _project_tail(v_lb, cfg, sweep_obj, alphabet):
    v_uq = project_uq(v_lb, alphabet)
    if cfg.projection == "uq":
        return v_uq
    if cfg.projection == "partial-gs":
        return project_partial_gs(v_uq, v_lb, sweep_obj)
    return project_full_gs(v_uq, sweep_obj)


def _solve(instance: PrecodingInstance, cfg: BnbConfig, qos=None) -> BnbOutcome:
    data = build_objective(instance, cfg.criterion)
    m_ant = instance.n_antennas
    alphabet = instance.tx_alphabet
    pts = alphabet.points
    poly = build_polyhedron(m_ant, instance.alpha_x)

    def finish(x, value, termination, **counters):
        if termination == "optimal" and cfg.criterion == "ubmsep":
            # the tree searches the margin-constrained reformulation; a raw
            # optimum placing some user outside its sector (all such
            # candidates score above the wrong-region floor) is reconciled
            # by direct enumeration at desk scale
            floor_wr = -(instance.n_users - 1) * np.log(2.0)
            if value > floor_wr and (
                instance.alpha_x ** m_ant <= DEFAULT_ENUM_CAP
            ):
                x_enum, g_enum = exhaustive_msep(instance, "ubmsep")
                if g_enum < value:
                    x, value = x_enum, g_enum
        sep = sep_for(data, x)
        return BnbOutcome(x=x, objective=value, termination=termination, sep=sep, **counters)

    def qos_met(x):
        return qos is not None and bool(np.all(sep_for(data, x) <= qos))

    root = solve_subproblems_batch(data, np.zeros((1, 0)), poly, cfg.solver)[0]
    if root.status == "infeasible":
        # union-bound margin system empty over the hull: no convex bounds
        # exist, fall back to direct enumeration
        x_opt, g_opt = exhaustive_msep(instance, cfg.criterion)
        return finish(x_opt, g_opt, "optimal")

    x_lb = to_complex(root.x)
    sweep_all = coordinate_objective(data, alphabet)
    x_ub = _project_tail(x_lb, cfg, sweep_all, alphabet)
    if qos_met(x_ub):
        return finish(x_ub, objective_value(data, to_real(x_ub)), "qos-satisfied")
    if np.max(np.abs(x_ub - x_lb)) <= _MATCH_TOL:
        # relaxed optimum already discrete: it solves the original problem
        return finish(x_ub, objective_value(data, to_real(x_ub)), "optimal")

    incumbent = Incumbent(x=x_ub, value=objective_value(data, to_real(x_ub)))
    expanded = solved = pruned = layers = 0
    parents = [NodeRecord(prefix=(), g_lb=root.lower_bound, v_lb=x_lb)]

    for p in range(1, m_ant):
        # assemble the layer: every surviving prefix extended by every symbol
        threshold = _prune_threshold(incumbent.value, cfg.delta, _MARGIN_CAP)
        children = []
        warm_tails = []
        for parent in parents:
            if cfg.prefilter and parent.g_lb >= threshold:
                pruned += instance.alpha_x
                continue
            # the parent's relaxed tail minus its first antenna stays a good
            # (often strictly feasible) start for each child's subproblem
            tail = to_real(parent.v_lb[1:]) if parent.v_lb is not None else None
            for i in range(instance.alpha_x):
                children.append(parent.prefix + (i,))
                warm_tails.append(tail)
        if not children:
            parents = []
            break
        if expanded + len(children) > cfg.node_limit:
            return finish(
                incumbent.x, incumbent.value, "budget",
                nodes_expanded=expanded, subproblems_solved=solved,
                nodes_pruned=pruned, layers_completed=layers,
            )
        prefixes_r = np.stack([to_real(pts[list(c)]) for c in children])
        warm = (
            np.stack(warm_tails)
            if all(w is not None for w in warm_tails)
            else None
        )
        sols = solve_subproblems_batch(
            data, prefixes_r, poly, cfg.solver,
            warm_tails=warm, stop_bound=threshold, gap_floor=1e-6,
        )
        expanded += len(children)
        solved += len(children)

        records = []
        for prefix, sol in zip(children, sols):
            if sol.status == "infeasible":
                records.append(NodeRecord(prefix=prefix, g_lb=np.inf))
                continue
            if sol.early_pruned:
                # certified bound already above the survival threshold: the
                # node dies at the layer prune, skip its projection
                records.append(NodeRecord(prefix=prefix, g_lb=sol.lower_bound))
                continue
            f = pts[list(prefix)]
            v_lb = to_complex(sol.x)
            sweep_obj = coordinate_objective(data, alphabet, prefix=f)
            v_ub = _project_tail(v_lb, cfg, sweep_obj, alphabet)
            cand = np.concatenate([f, v_ub])
            g_ub = objective_value(data, to_real(cand))
            if qos_met(cand):
                return finish(
                    cand, g_ub, "qos-satisfied",
                    nodes_expanded=expanded, subproblems_solved=solved,
                    nodes_pruned=pruned, layers_completed=layers,
                )
            if g_ub < incumbent.value:
                incumbent = Incumbent(x=cand, value=g_ub)
            records.append(NodeRecord(prefix=prefix, g_lb=sol.lower_bound, v_lb=v_lb))
        thr_end = _prune_threshold(incumbent.value, cfg.delta, _MARGIN_CAP)
        survivors = [r for r in records if r.g_lb < thr_end]
        pruned += len(records) - len(survivors)
        parents = survivors
        layers += 1

    # last layer: enumerate the surviving leaves directly
    best_x, best_g = incumbent.x, incumbent.value
    if parents:
        leaves = np.array(
            [par.prefix + (i,) for par in parents for i in range(instance.alpha_x)]
        )
        cand_mat = pts[leaves]
        g_leaves = _batch_objective(instance, cfg.criterion, cand_mat @ instance.H.T)
        expanded += len(leaves)
        if qos is not None:
            for j in range(len(leaves)):
                if qos_met(cand_mat[j]):
                    return finish(
                        cand_mat[j], float(g_leaves[j]), "qos-satisfied",
                        nodes_expanded=expanded, subproblems_solved=solved,
                        nodes_pruned=pruned, layers_completed=layers,
                    )
                if g_leaves[j] < best_g:
                    best_x, best_g = cand_mat[j], float(g_leaves[j])
        else:
            j = int(np.argmin(g_leaves))
            if g_leaves[j] < best_g:
                best_x, best_g = cand_mat[j], float(g_leaves[j])
    return finish(
        best_x, best_g, "optimal",
        nodes_expanded=expanded, subproblems_solved=solved,
        nodes_pruned=pruned, layers_completed=layers + 1,
    )


def solve_bnb(instance: PrecodingInstance, cfg: BnbConfig | None = None) -> BnbOutcome:
    """Exact minimum-SEP precoding vector for the configured criterion."""
    cfg = cfg or BnbConfig()
    return _solve(instance, cfg)


def solve_bnb_qos(instance: PrecodingInstance, cfg: BnbConfig | None, lam) -> BnbOutcome:
    """Branch-and-bound with early exit once per-user SEP targets are met.

    ``lam`` is a per-user vector of admissible error probabilities in
    (0, 1].  The first constructed feasible candidate whose SEP is at or
    below ``lam`` entrywise is returned with termination ``qos-satisfied``;
    if the search tree is exhausted first, the optimal solution is returned
    regardless of ``lam``.
    """
    cfg = cfg or BnbConfig()
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (instance.n_users,):
        raise ValueError(f"lambda must have length K={instance.n_users}")
    if np.any(lam <= 0.0) or np.any(lam > 1.0):
        raise ValueError("lambda entries must lie in (0, 1]")
    return _solve(instance, cfg, qos=lam)


_CAND_CACHE = {}


def _candidate_matrix(alpha_x: int, n_antennas: int, amplitude: float):
    """All alphabet vectors in lexicographic index order, cached."""
    key = (alpha_x, n_antennas, amplitude)
    cached = _CAND_CACHE.get(key)
    if cached is None:
        n = alpha_x ** n_antennas
        codes = np.arange(n)[:, None] // (alpha_x ** np.arange(n_antennas - 1, -1, -1)) % alpha_x
        angles = np.pi * (2.0 * codes + 1.0) / alpha_x
        cached = amplitude * np.exp(1j * angles)
        cached.setflags(write=False)
        _CAND_CACHE[key] = cached
    return cached


def _batch_objective(instance: PrecodingInstance, criterion: str, received: np.ndarray):
    """Objective for a batch of noiseless receive vectors (rows)."""
    s_vals = instance.s_values
    if criterion == "qmsep":
        if instance.alpha_s != 4:
            raise ValueError("the exact criterion requires alpha_s=4")
        scale = np.sqrt(2.0) / instance.sigma_w
        sr = np.sign(s_vals.real) * scale
        si = np.sign(s_vals.imag) * scale
        return -(
            log_norm_cdf(received.real * sr).sum(axis=1)
            + log_norm_cdf(received.imag * si).sum(axis=1)
        )
    theta = np.pi / instance.alpha_s
    w = received * np.conj(s_vals)
    m1 = (w.real * np.sin(theta) - w.imag * np.cos(theta)) / instance.sigma_w
    m2 = (w.real * np.sin(theta) + w.imag * np.cos(theta)) / instance.sigma_w
    q = erf(m1) + erf(m2)
    bad = np.any(q <= 0.0, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = -np.sum(np.log(np.where(q > 0.0, q, 1.0)), axis=1)
    return np.where(bad, np.inf, g)


def _enumerate(instance: PrecodingInstance, cap: int):
    n = instance.alpha_x ** instance.n_antennas
    if n > cap:
        raise ValueError(
            f"enumeration of {n} candidates exceeds the cap of {cap}"
        )
    amp = 1.0 / np.sqrt(instance.n_antennas)
    return _candidate_matrix(instance.alpha_x, instance.n_antennas, amp)


def exhaustive_msep(instance: PrecodingInstance, criterion: str, cap: int = DEFAULT_ENUM_CAP):
    """Brute-force minimum of the criterion objective over all alphabet vectors.

    Ties resolve to the lexicographically smallest index tuple.  Guarded by
    ``cap`` on the candidate count.
    """
    cand = _enumerate(instance, cap)
    best_g = np.inf
    best_x = cand[0]
    chunk = 1 << 16
    for lo in range(0, cand.shape[0], chunk):
        block = cand[lo:lo + chunk]
        g = _batch_objective(instance, criterion, block @ instance.H.T)
        j = int(np.argmin(g))
        if g[j] < best_g:
            best_g = float(g[j])
            best_x = block[j]
    return np.array(best_x), best_g


def exhaustive_mmddt(instance: PrecodingInstance, cap: int = DEFAULT_ENUM_CAP):
    """Brute-force maximizer of the worst per-user edge margin.

    Returns the optimal vector together with its worst-case margin (in
    natural units, independent of the noise level).
    """
    cand = _enumerate(instance, cap)
    theta = np.pi / instance.alpha_s
    s_conj = np.conj(instance.s_values)
    best_m = -np.inf
    best_x = cand[0]
    chunk = 1 << 16
    for lo in range(0, cand.shape[0], chunk):
        block = cand[lo:lo + chunk]
        w = (block @ instance.H.T) * s_conj
        d1 = w.real * np.sin(theta) - w.imag * np.cos(theta)
        d2 = w.real * np.sin(theta) + w.imag * np.cos(theta)
        worst = np.minimum(d1, d2).min(axis=1)
        j = int(np.argmax(worst))
        if worst[j] > best_m:
            best_m = float(worst[j])
            best_x = block[j]
    return np.array(best_x), best_m
