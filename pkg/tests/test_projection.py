import numpy as np

from msep_precoding import (
    PskAlphabet,
    coordinate_objective,
    project_full_gs,
    project_partial_gs,
    project_uq,
    to_real,
)
from msep_precoding.objectives import build_objective, objective_value

from conftest import random_instance


def uq_indices(x, alphabet):
    out = project_uq(x, alphabet)
    return np.array([int(np.argmin(np.abs(p - alphabet.points))) for p in out])


def test_uq_examples():
    qpsk = PskAlphabet(4)
    got = project_uq(np.array([0.9 * np.exp(1j * np.pi / 3)]), qpsk)
    assert got[0] == qpsk.point(0)  # exp(j*pi/4), squared distance 0.071 vs 1.34
    pts = qpsk.points
    assert np.array_equal(project_uq(pts, qpsk), pts)
    assert project_uq(np.array([0j]), qpsk)[0] == qpsk.point(0)  # tie -> lowest index


def test_uq_idempotent_and_equivariant(rng):
    for alpha in (4, 8):
        alph = PskAlphabet(alpha, 0.6)
        x = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
        once = project_uq(x, alph)
        assert np.array_equal(project_uq(once, alph), once)
        rot = np.exp(1j * 2 * np.pi / alpha)
        idx_direct = uq_indices(rot * x, alph)
        idx_shifted = (uq_indices(x, alph) + 1) % alpha
        assert np.array_equal(idx_direct, idx_shifted)


def sweep_oracle(x_start, data, instance, sweep, criterion):
    """Independent greedy reimplementation: full objective per candidate."""
    pts = instance.tx_alphabet.points
    x = np.array(x_start, dtype=complex)
    for p in sweep:
        vals = []
        for c in pts:
            trial = x.copy()
            trial[p] = c
            vals.append(objective_value(data, to_real(trial)))
        x[p] = pts[int(np.argmin(vals))]
    return x


def test_partial_gs_empty_sweep(rng):
    inst = random_instance(rng, k=2, m=3)
    data = build_objective(inst, "qmsep")
    handle = coordinate_objective(data, inst.tx_alphabet)
    x_lb = inst.tx_alphabet.points[rng.integers(0, 4, 3)]  # already discrete
    x_ub = project_uq(x_lb, inst.tx_alphabet)
    assert np.array_equal(project_partial_gs(x_ub, x_lb, handle), x_ub)


def test_partial_gs_never_increases(rng):
    for criterion in ("qmsep", "ubmsep"):
        for _ in range(10):
            inst = random_instance(rng, k=2, m=4)
            data = build_objective(inst, criterion)
            handle = coordinate_objective(data, inst.tx_alphabet)
            x_lb = 0.8 * (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / 2
            x_ub = project_uq(x_lb, inst.tx_alphabet)
            out = project_partial_gs(x_ub, x_lb, handle)
            assert objective_value(data, to_real(out)) <= objective_value(
                data, to_real(x_ub)
            ) + 1e-12


def test_partial_gs_matches_oracle(rng):
    for criterion in ("qmsep", "ubmsep"):
        for _ in range(10):
            inst = random_instance(rng, k=2, m=3)
            data = build_objective(inst, criterion)
            handle = coordinate_objective(data, inst.tx_alphabet)
            x_lb = 0.4 * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
            x_ub = project_uq(x_lb, inst.tx_alphabet)
            got = project_partial_gs(x_ub, x_lb, handle)
            # membership tolerance 1e-9: random x_lb entries are never discrete
            want = sweep_oracle(x_ub, data, inst, range(3), criterion)
            assert np.array_equal(got, want)


def test_full_gs_single_sweep_monotone(rng):
    for criterion in ("qmsep", "ubmsep"):
        for _ in range(10):
            inst = random_instance(rng, k=2, m=4)
            data = build_objective(inst, criterion)
            handle = coordinate_objective(data, inst.tx_alphabet)
            start = inst.tx_alphabet.points[rng.integers(0, 4, 4)]
            g0 = objective_value(data, to_real(start))
            once = project_full_gs(start, handle)
            g1 = objective_value(data, to_real(once))
            twice = project_full_gs(once, handle)
            g2 = objective_value(data, to_real(twice))
            assert g1 <= g0 + 1e-12
            assert g2 <= g1 + 1e-12
            # a second sweep cannot improve more than the first did
            if np.isfinite(g0) and np.isfinite(g2):
                assert (g1 - g2) <= (g0 - g1) + 1e-9


def test_full_gs_last_coordinate_conditionally_optimal(rng):
    # a single ascending sweep guarantees conditional optimality only for the
    # final coordinate (earlier ones may become improvable again); on 2
    # antennas the output also matches exhaustive search whenever the sweep
    # can reach it, which the oracle-equality test already pins down
    from msep_precoding import exhaustive_msep

    hits = 0
    for _ in range(20):
        inst = random_instance(rng, k=2, m=2)
        data = build_objective(inst, "qmsep")
        handle = coordinate_objective(data, inst.tx_alphabet)
        start = project_uq(
            0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2)),
            inst.tx_alphabet,
        )
        out = project_full_gs(start, handle)
        g_out = objective_value(data, to_real(out))
        for c in inst.tx_alphabet.points:
            trial = out.copy()
            trial[-1] = c
            assert objective_value(data, to_real(trial)) >= g_out - 1e-12
        _, g_opt = exhaustive_msep(inst, "qmsep")
        hits += int(abs(g_out - g_opt) <= 1e-9)
    assert hits >= 10  # the sweep reaches the optimum most of the time


def test_partial_gs_with_full_sweep_equals_full_gs(rng):
    inst = random_instance(rng, k=2, m=4)
    data = build_objective(inst, "qmsep")
    handle = coordinate_objective(data, inst.tx_alphabet)
    x_lb = 0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    x_ub = project_uq(x_lb, inst.tx_alphabet)
    assert np.array_equal(
        project_partial_gs(x_ub, x_lb, handle), project_full_gs(x_ub, handle)
    )


def test_gs_outputs_stay_in_alphabet(rng):
    inst = random_instance(rng, k=2, m=4, alpha_s=8, alpha_x=8)
    data = build_objective(inst, "ubmsep")
    handle = coordinate_objective(data, inst.tx_alphabet)
    x_lb = 0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    x_ub = project_uq(x_lb, inst.tx_alphabet)
    out = project_full_gs(x_ub, handle)
    dists = np.abs(out[:, None] - inst.tx_alphabet.points[None, :]).min(axis=1)
    assert np.all(dists == 0.0)


def test_gs_incremental_matches_direct_objective(rng):
    # the sweep's received-signal path must agree with the row-matrix path
    inst = random_instance(rng, k=3, m=4)
    for criterion in ("qmsep", "ubmsep"):
        data = build_objective(inst, criterion)
        handle = coordinate_objective(data, inst.tx_alphabet)
        x = inst.tx_alphabet.points[rng.integers(0, 4, 4)]
        direct = objective_value(data, to_real(x))
        via_handle = handle.value(x)
        assert np.isclose(via_handle, direct, rtol=1e-12, atol=1e-12)
