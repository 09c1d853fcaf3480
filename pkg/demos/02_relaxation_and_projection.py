"""Convex relaxation and the three projection heuristics, side by side.

Solves the hull-relaxed problem for a batch of random channels and compares
the objective reached by uniform quantization against the partial and full
greedy sweeps, with the certified relaxation bound as the yardstick.

Run:  python3 demos/02_relaxation_and_projection.py
"""

import numpy as np

from msep_precoding import (
    PrecodingInstance,
    build_polyhedron,
    build_qmsep,
    coordinate_objective,
    generate_channel,
    project_full_gs,
    project_partial_gs,
    project_uq,
    qmsep_objective,
    snr_to_sigma,
    solve_relaxed,
    to_complex,
    to_real,
)

rng = np.random.default_rng(21)
poly = build_polyhedron(5, 4)

rows = []
for _ in range(30):
    H = generate_channel(2, 5, 1.0, rng)
    s = rng.integers(0, 4, 2)
    inst = PrecodingInstance(H, s, snr_to_sigma(10.0), 4, 4)
    data = build_qmsep(inst)
    sol = solve_relaxed(data, poly)
    x_lb = to_complex(sol.x)
    handle = coordinate_objective(data, inst.tx_alphabet)
    x_uq = project_uq(x_lb, inst.tx_alphabet)
    x_pgs = project_partial_gs(x_uq, x_lb, handle)
    x_fgs = project_full_gs(x_uq, handle)
    rows.append(
        (
            sol.lower_bound,
            qmsep_objective(data, to_real(x_uq)),
            qmsep_objective(data, to_real(x_pgs)),
            qmsep_objective(data, to_real(x_fgs)),
        )
    )

rows = np.array(rows)
print("K=2, M=5, QPSK, SNR 10 dB, 30 random channels")
print(f"{'':14} {'mean objective':>15} {'worst gap to bound':>20}")
labels = ("relaxed bound", "UQ", "partial GS", "full GS")
for j, label in enumerate(labels):
    gap = (rows[:, j] - rows[:, 0]).max()
    print(f"{label:14} {rows[:, j].mean():15.4f} {gap:20.4f}")

print("\nthe greedy sweeps never do worse than plain quantization:")
print(f"  partial <= UQ on {np.mean(rows[:, 2] <= rows[:, 1] + 1e-12):.0%} of channels")
print(f"  full    <= UQ on {np.mean(rows[:, 3] <= rows[:, 1] + 1e-12):.0%} of channels")
