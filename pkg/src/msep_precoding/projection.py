"""Projections from relaxed solutions onto the discrete transmit alphabet.

Three methods are provided: elementwise nearest-point uniform quantization,
and two greedy single-sweep refinements that re-optimize coordinates one at
a time against the criterion objective.  The partial sweep only revisits
coordinates whose relaxed value was not already an alphabet point; the full
sweep revisits every coordinate.  Sweeps walk coordinates in ascending
index order, try candidates in alphabet index order, and break ties toward
the lowest index, so results are deterministic.

Candidate evaluation is incremental: changing one coordinate updates the
received vector with a single rank-one correction (O(K) per candidate)
instead of re-multiplying the channel.
"""

from dataclasses import dataclass

import numpy as np

from .model import PskAlphabet
from .special import erf, log_norm_cdf

MEMBERSHIP_TOL = 1e-9

__all__ = [
    "CoordinateObjective",
    "coordinate_objective",
    "project_uq",
    "project_partial_gs",
    "project_full_gs",
]


@dataclass(frozen=True)
class CoordinateObjective:
    """Criterion objective in received-signal form for coordinate sweeps.

    ``g(x) = g_of_received(base + columns @ x)`` where ``columns`` holds the
    channel columns of the swept coordinates and ``base`` the contribution
    of any fixed prefix.  ``g_of_received`` accepts a batch of received
    vectors (leading axis) and returns one objective value per row.
    """

    columns: np.ndarray
    base: np.ndarray
    alphabet: PskAlphabet
    g_of_received: callable

    @property
    def n_coords(self) -> int:
        return self.columns.shape[1]

    def value(self, x) -> float:
        return float(self.g_of_received(self.base + self.columns @ np.asarray(x)))


def coordinate_objective(data, alphabet: PskAlphabet, prefix=None) -> CoordinateObjective:
    """Build the sweep objective for ``data``, optionally past a fixed prefix.

    ``prefix`` is a complex vector occupying the leading antennas; the sweep
    then runs over the remaining tail coordinates only.
    """
    if data.criterion == "qmsep":
        cols = data.channel
        scale = np.sqrt(2.0) / data.sigma_w
        sr = data.sign_re * scale
        si = data.sign_im * scale

        def g_of_received(u):
            u = np.asarray(u)
            val = -(
                log_norm_cdf(u.real * sr).sum(axis=-1)
                + log_norm_cdf(u.imag * si).sum(axis=-1)
            )
            return float(val) if u.ndim == 1 else val

    else:
        cols = data.rotated_channel
        sin_t = np.sin(data.theta) / data.sigma_w
        cos_t = np.cos(data.theta) / data.sigma_w

        def g_of_received(u):
            u = np.asarray(u)
            m1 = u.real * sin_t - u.imag * cos_t
            m2 = u.real * sin_t + u.imag * cos_t
            q = erf(m1) + erf(m2)
            bad = np.any(q <= 0.0, axis=-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = -np.sum(np.log(np.where(q > 0.0, q, 1.0)), axis=-1)
            val = np.where(bad, np.inf, val)
            return float(val) if u.ndim == 1 else val

    if prefix is not None:
        prefix = np.asarray(prefix, dtype=complex)
        p = prefix.shape[0]
        base = cols[:, :p] @ prefix
        cols = cols[:, p:]
    else:
        base = np.zeros(cols.shape[0], dtype=complex)
    return CoordinateObjective(
        columns=cols, base=base, alphabet=alphabet, g_of_received=g_of_received
    )


def project_uq(x, alphabet: PskAlphabet) -> np.ndarray:
    """Elementwise nearest alphabet point; ties go to the lowest index."""
    x = np.asarray(x, dtype=complex)
    dist = np.abs(x[:, None] - alphabet.points[None, :])
    return alphabet.points[np.argmin(dist, axis=1)]


def _sweep(x_start, objective: CoordinateObjective, sweep_indices) -> np.ndarray:
    pts = objective.alphabet.points
    x = np.array(x_start, dtype=complex)
    u = objective.base + objective.columns @ x
    for p in sweep_indices:
        col = objective.columns[:, p]
        trial_u = u[None, :] + np.outer(pts - x[p], col)
        g = objective.g_of_received(trial_u)
        best = int(np.argmin(g))
        if pts[best] != x[p]:
            u = u + col * (pts[best] - x[p])
            x[p] = pts[best]
    return x


def project_partial_gs(x_ub, x_lb, objective: CoordinateObjective) -> np.ndarray:
    """Greedy sweep over the coordinates where ``x_lb`` left the alphabet.

    ``x_ub`` must already lie in the alphabet (typically ``project_uq(x_lb)``).
    Membership of a relaxed entry is tested with tolerance 1e-9 on the
    distance to its nearest alphabet point.
    """
    x_lb = np.asarray(x_lb, dtype=complex)
    dist = np.abs(x_lb[:, None] - objective.alphabet.points[None, :]).min(axis=1)
    sweep = np.nonzero(dist > MEMBERSHIP_TOL)[0]
    return _sweep(x_ub, objective, sweep)


def project_full_gs(x_ub, objective: CoordinateObjective) -> np.ndarray:
    """One greedy sweep over every coordinate of ``x_ub``."""
    return _sweep(x_ub, objective, range(objective.n_coords))
