import numpy as np
import pytest

from msep_precoding import (
    BnbConfig,
    Incumbent,
    PrecodingInstance,
    build_qmsep,
    build_ubmsep,
    exhaustive_mmddt,
    exhaustive_msep,
    mddt,
    prune,
    sep_qmsep,
    sep_ubmsep_bound,
    solve_bnb,
    solve_bnb_qos,
)
from msep_precoding.bnb import NodeRecord
from msep_precoding.objectives import build_objective, objective_value
from msep_precoding.model import to_real

from conftest import random_instance


def test_bnb_equals_exhaustive_small(rng):
    for criterion in ("qmsep", "ubmsep"):
        for _ in range(200):
            inst = random_instance(rng, k=1, m=2)
            out = solve_bnb(inst, BnbConfig(criterion=criterion))
            _, g_opt = exhaustive_msep(inst, criterion)
            assert abs(out.objective - g_opt) <= 1e-9
            assert out.x.shape == (2,)


def test_bnb_equals_exhaustive_k2m5(rng):
    for criterion in ("qmsep", "ubmsep"):
        for _ in range(12):
            inst = random_instance(rng, k=2, m=5)
            out = solve_bnb(inst, BnbConfig(criterion=criterion))
            _, g_opt = exhaustive_msep(inst, criterion)
            assert abs(out.objective - g_opt) <= 1e-9


def test_bnb_output_in_alphabet(rng):
    inst = random_instance(rng, k=2, m=4, alpha_s=8, alpha_x=8)
    out = solve_bnb(inst, BnbConfig(criterion="ubmsep"))
    dists = np.abs(out.x[:, None] - inst.tx_alphabet.points[None, :]).min(axis=1)
    assert np.all(dists < 1e-12)


def test_bnb_init_early_exit():
    inst = PrecodingInstance(np.array([[1.0 + 0j]]), np.array([0]), 1.0, 4, 4)
    out = solve_bnb(inst, BnbConfig(criterion="qmsep"))
    assert out.termination == "optimal"
    assert out.subproblems_solved == 0
    assert out.x[0] == inst.tx_alphabet.point(0)


def test_prune_strictness():
    records = [
        NodeRecord(prefix=(0,), g_lb=0.5),
        NodeRecord(prefix=(1,), g_lb=1.0),  # equals incumbent: pruned
        NodeRecord(prefix=(2,), g_lb=np.inf),  # infeasible: pruned
        NodeRecord(prefix=(3,), g_lb=0.999999),
    ]
    incumbent = Incumbent(x=None, value=1.0)
    kept = prune(records, incumbent, delta=1e-12)
    assert [r.prefix for r in kept] == [(0,), (3,)]
    # larger delta tightens the survival threshold
    kept = prune(records, incumbent, delta=1e-3)
    assert [r.prefix for r in kept] == [(0,)]


def test_prune_negative_incumbent():
    records = [
        NodeRecord(prefix=(0,), g_lb=-2.0),
        NodeRecord(prefix=(1,), g_lb=-1.0),  # equals incumbent: pruned
        NodeRecord(prefix=(2,), g_lb=-0.5),
    ]
    incumbent = Incumbent(x=None, value=-1.0)
    kept = prune(records, incumbent, delta=1e-9)
    assert [r.prefix for r in kept] == [(0,)]


def test_prune_keeps_optimal_prefix_while_incumbent_worse(rng):
    # while the incumbent is still suboptimal by more than the solver
    # tolerance, the optimum's own prefixes always survive the prune (their
    # certified bounds cannot exceed the optimum value)
    from msep_precoding import build_polyhedron, solve_subproblem

    for _ in range(10):
        inst = random_instance(rng, k=2, m=3)
        data = build_qmsep(inst)
        poly = build_polyhedron(3, 4)
        x_opt, g_opt = exhaustive_msep(inst, "qmsep")
        records = []
        for p in (1, 2):
            sol = solve_subproblem(data, to_real(x_opt[:p]), poly)
            assert sol.lower_bound <= g_opt
            records.append(NodeRecord(prefix=tuple(range(p)), g_lb=sol.lower_bound))
        incumbent = Incumbent(x=None, value=1.05 * g_opt + 0.01)
        kept = prune(records, incumbent, delta=5e-7)
        assert len(kept) == len(records)


def test_qos_all_ones_returns_first_bound(rng):
    inst = random_instance(rng, k=2, m=4)
    out = solve_bnb_qos(inst, BnbConfig(criterion="qmsep"), np.ones(2))
    assert out.termination == "qos-satisfied"
    assert out.nodes_expanded == 0
    assert np.all(out.sep <= 1.0)


def test_qos_unreachable_target_matches_plain(rng):
    for criterion in ("qmsep", "ubmsep"):
        for _ in range(5):
            inst = random_instance(rng, k=2, m=3)
            plain = solve_bnb(inst, BnbConfig(criterion=criterion))
            lam = np.maximum(plain.sep - 1e-9, 1e-15)
            qos = solve_bnb_qos(inst, BnbConfig(criterion=criterion), lam)
            assert qos.termination in ("optimal",)
            assert abs(qos.objective - plain.objective) <= 1e-12
            assert np.array_equal(qos.x, plain.x)


def test_qos_dominance_and_feasibility(rng):
    for _ in range(20):
        inst = random_instance(rng, k=2, m=4)
        cfg = BnbConfig(criterion="qmsep")
        plain = solve_bnb(inst, cfg)
        lam = np.minimum(plain.sep * 4.0 + 1e-6, 1.0)  # achievable target
        qos = solve_bnb_qos(inst, cfg, lam)
        assert qos.nodes_expanded <= plain.nodes_expanded
        if qos.termination == "qos-satisfied":
            assert np.all(qos.sep <= lam)


def test_qos_lambda_validation(rng):
    inst = random_instance(rng, k=2, m=3)
    with pytest.raises(ValueError):
        solve_bnb_qos(inst, BnbConfig(), np.array([0.5, 1.5]))
    with pytest.raises(ValueError):
        solve_bnb_qos(inst, BnbConfig(), np.array([0.5, 0.0]))
    with pytest.raises(ValueError):
        solve_bnb_qos(inst, BnbConfig(), np.array([0.5]))


def test_node_budget_termination(rng):
    inst = random_instance(rng, k=2, m=5)
    out = solve_bnb(inst, BnbConfig(criterion="qmsep", node_limit=2))
    assert out.termination == "budget"
    # the incumbent is still a valid alphabet vector
    dists = np.abs(out.x[:, None] - inst.tx_alphabet.points[None, :]).min(axis=1)
    assert np.all(dists < 1e-12)


def test_exhaustive_single_antenna_direct_scan(rng):
    inst = random_instance(rng, k=2, m=1)
    for criterion in ("qmsep", "ubmsep"):
        data = build_objective(inst, criterion)
        x_opt, g_opt = exhaustive_msep(inst, criterion)
        vals = [
            objective_value(data, to_real(np.array([p])))
            for p in inst.tx_alphabet.points
        ]
        assert np.isclose(g_opt, min(vals), rtol=1e-12)
        assert x_opt[0] == inst.tx_alphabet.points[int(np.argmin(vals))]


def test_exhaustive_beats_random_candidates(rng):
    inst = random_instance(rng, k=2, m=4)
    data = build_qmsep(inst)
    _, g_opt = exhaustive_msep(inst, "qmsep")
    pts = inst.tx_alphabet.points
    for _ in range(1000):
        x = pts[rng.integers(0, 4, 4)]
        assert objective_value(data, to_real(x)) >= g_opt - 1e-12


def test_exhaustive_cap(rng):
    inst = random_instance(rng, k=2, m=4, alpha_s=8, alpha_x=8)
    with pytest.raises(ValueError):
        exhaustive_msep(inst, "ubmsep", cap=100)
    with pytest.raises(ValueError):
        exhaustive_mmddt(inst, cap=100)


def test_exhaustive_mmddt_single_antenna(rng):
    inst = random_instance(rng, k=1, m=1, alpha_s=8, alpha_x=8)
    data = build_ubmsep(inst)
    x_opt, margin = exhaustive_mmddt(inst)
    worsts = []
    for p in inst.tx_alphabet.points:
        d1, d2 = mddt(data, np.array([p]))
        worsts.append(min(d1.min(), d2.min()))
    assert np.isclose(margin, max(worsts), rtol=1e-12)
    assert x_opt[0] == inst.tx_alphabet.points[int(np.argmax(worsts))]


def test_mmddt_margin_dominates_msep_optimum(rng):
    for _ in range(10):
        inst = random_instance(rng, k=2, m=3, alpha_s=8, alpha_x=8)
        data = build_ubmsep(inst)
        x_mmddt, margin = exhaustive_mmddt(inst)
        x_msep, _ = exhaustive_msep(inst, "ubmsep")
        d1, d2 = mddt(data, x_msep)
        assert margin >= min(d1.min(), d2.min()) - 1e-12


def test_bnb_determinism(rng):
    inst = random_instance(rng, k=2, m=4)
    cfg = BnbConfig(criterion="ubmsep")
    one = solve_bnb(inst, cfg)
    two = solve_bnb(inst, cfg)
    assert np.array_equal(one.x, two.x)
    assert one.objective == two.objective
    assert one.nodes_expanded == two.nodes_expanded
    assert one.nodes_pruned == two.nodes_pruned


def test_bnb_sep_attached(rng):
    inst = random_instance(rng, k=2, m=3)
    out_q = solve_bnb(inst, BnbConfig(criterion="qmsep"))
    assert np.allclose(out_q.sep, sep_qmsep(build_qmsep(inst), out_q.x))
    out_u = solve_bnb(inst, BnbConfig(criterion="ubmsep"))
    assert np.allclose(out_u.sep, sep_ubmsep_bound(build_ubmsep(inst), out_u.x))


def test_bnb_config_validation():
    with pytest.raises(ValueError):
        BnbConfig(criterion="other")
    with pytest.raises(ValueError):
        BnbConfig(delta=0.0)
    with pytest.raises(ValueError):
        BnbConfig(projection="nearest")
