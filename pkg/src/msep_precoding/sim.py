"""Monte Carlo symbol-error-rate experiments over Rayleigh fading.

For every SNR point the harness draws channels, uniform data vectors, and
noise, computes the transmit vector with the configured precoding method,
and accumulates hard-detection symbol errors.  All randomness derives from
``default_rng([seed, point_index, channel_index])`` so results are
bit-identical across reruns and independent of how channels are split
across worker processes.  Comparing several methods reuses the same
channel, symbol, and noise streams (common random numbers), which the
per-point stream checksum makes verifiable.
"""

import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bnb import BnbConfig, exhaustive_mmddt, exhaustive_msep, solve_bnb, solve_bnb_qos
from .convex import SolverConfig, build_polyhedron, solve_relaxed
from .model import PrecodingInstance, generate_channel, hard_detect, to_complex
from .objectives import build_objective
from .projection import coordinate_objective, project_full_gs, project_partial_gs, project_uq

METHODS = (
    "QMSEP-BnB",
    "UBMSEP-BnB",
    "QMSEP-UQ",
    "UBMSEP-UQ",
    "QMSEP-PartialGS",
    "QMSEP-FullGS",
    "UBMSEP-PartialGS",
    "UBMSEP-FullGS",
    "MSEP-Exhaustive",
    "MMDDT-Exhaustive",
    "Random",
)

__all__ = [
    "METHODS",
    "ExperimentConfig",
    "SerPoint",
    "PrecoderFailure",
    "snr_to_sigma",
    "run_ser",
    "compare_methods",
]


class PrecoderFailure(RuntimeError):
    """A precoding method could not produce a vector for an instance."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Scale and scenario of one SER experiment.

    ``trials`` counts independent channel realizations; each channel serves
    ``symbols_per_channel`` uniform data vectors, and every data vector is
    observed under ``noise_draws_per_symbol`` independent noise draws (the
    precoder runs once per data vector, so extra noise draws are cheap).
    """

    n_users: int
    n_antennas: int
    alpha_s: int
    alpha_x: int
    snr_grid_db: tuple
    trials: int = 500
    symbols_per_channel: int = 20
    noise_draws_per_symbol: int = 1
    seed: int = 0
    method: str = "QMSEP-BnB"
    qos: tuple | None = None
    threads: int = 1

    def __post_init__(self):
        if min(self.trials, self.symbols_per_channel, self.noise_draws_per_symbol) < 1:
            raise ValueError("all trial counts must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "snr_grid_db", tuple(float(v) for v in self.snr_grid_db))
        if not all(np.isfinite(v) for v in self.snr_grid_db):
            raise ValueError("SNR grid must be finite")

    @property
    def decisions_per_point(self) -> int:
        return (
            self.trials
            * self.symbols_per_channel
            * self.noise_draws_per_symbol
            * self.n_users
        )


@dataclass
class SerPoint:
    """One (method, SNR) cell of the results table."""

    method: str
    snr_db: float
    ser: float
    std_err: float
    error_count: int
    decision_count: int
    wall_time: float = 0.0
    skipped_instances: int = 0
    stream_checksum: int = 0


def snr_to_sigma(snr_db: float) -> float:
    """Noise standard deviation for a unit-power transmit vector."""
    return 10.0 ** (-snr_db / 20.0)


def _bnb_config(criterion: str) -> BnbConfig:
    return BnbConfig(criterion=criterion, projection="full-gs", solver=SolverConfig())


def _natural_criterion(alpha_s: int) -> str:
    return "qmsep" if alpha_s == 4 else "ubmsep"


def _projection_precoder(instance, criterion, kind, poly):
    data = build_objective(instance, criterion)
    root = solve_relaxed(data, poly)
    if root.status == "infeasible":
        raise PrecoderFailure(f"relaxation infeasible for criterion {criterion}")
    x_lb = to_complex(root.x)
    alphabet = instance.tx_alphabet
    x = project_uq(x_lb, alphabet)
    if kind == "uq":
        return x
    handle = coordinate_objective(data, alphabet)
    if kind == "partial":
        return project_partial_gs(x, x_lb, handle)
    return project_full_gs(x, handle)


def _precode(method, instance, poly, qos, aux_rng):
    if method == "QMSEP-BnB":
        if qos is not None:
            return solve_bnb_qos(instance, _bnb_config("qmsep"), qos).x
        return solve_bnb(instance, _bnb_config("qmsep")).x
    if method == "UBMSEP-BnB":
        if qos is not None:
            return solve_bnb_qos(instance, _bnb_config("ubmsep"), qos).x
        return solve_bnb(instance, _bnb_config("ubmsep")).x
    if method == "MSEP-Exhaustive":
        return exhaustive_msep(instance, _natural_criterion(instance.alpha_s))[0]
    if method == "MMDDT-Exhaustive":
        return exhaustive_mmddt(instance)[0]
    if method == "Random":
        idx = aux_rng.integers(0, instance.alpha_x, instance.n_antennas)
        return instance.tx_alphabet.points[idx]
    crit, _, kind = method.partition("-")
    return _projection_precoder(
        instance,
        crit.lower(),
        {"UQ": "uq", "PartialGS": "partial", "FullGS": "full"}[kind],
        poly,
    )


def _run_channels(config: ExperimentConfig, methods, point_idx, snr_db, chan_range):
    """Accumulate error counts for a block of channel indices (one worker)."""
    sigma_w = snr_to_sigma(snr_db)
    k, m = config.n_users, config.n_antennas
    poly = build_polyhedron(m, config.alpha_x)
    qos = None if config.qos is None else np.asarray(config.qos, dtype=float)
    errors = {meth: 0 for meth in methods}
    skipped = {meth: 0 for meth in methods}
    decisions = {meth: 0 for meth in methods}
    checksum = 0  # integer CRC sum: exactly schedule-independent
    noise_scale = sigma_w / np.sqrt(2.0)
    for chan_idx in chan_range:
        rng = np.random.default_rng([config.seed, point_idx, chan_idx])
        H = generate_channel(k, m, 1.0, rng)
        checksum += zlib.crc32(H.tobytes())
        for sym_idx in range(config.symbols_per_channel):
            s = rng.integers(0, config.alpha_s, k)
            w = noise_scale * (
                rng.standard_normal((config.noise_draws_per_symbol, k))
                + 1j * rng.standard_normal((config.noise_draws_per_symbol, k))
            )
            checksum += zlib.crc32(s.tobytes()) + zlib.crc32(w.tobytes())
            instance = PrecodingInstance(H, s, sigma_w, config.alpha_s, config.alpha_x)
            alphabet = instance.data_alphabet
            aux_rng = np.random.default_rng(
                [config.seed, point_idx, chan_idx, sym_idx, 7]
            )
            for meth in methods:
                try:
                    x = _precode(meth, instance, poly, qos, aux_rng)
                except PrecoderFailure:
                    skipped[meth] += 1
                    continue
                z = (H @ x)[None, :] + w
                errors[meth] += int(np.count_nonzero(hard_detect(z, alphabet) != s))
                decisions[meth] += config.noise_draws_per_symbol * k
    return errors, decisions, skipped, checksum


def _point_worker(args):
    return _run_channels(*args)


def _run_point(config: ExperimentConfig, methods, point_idx, snr_db):
    start = time.perf_counter()
    if config.threads > 1 and config.trials > 1:
        n_blocks = min(config.trials, config.threads * 4)
        bounds = np.linspace(0, config.trials, n_blocks + 1).astype(int)
        tasks = [
            (config, methods, point_idx, snr_db, range(bounds[i], bounds[i + 1]))
            for i in range(n_blocks)
            if bounds[i] < bounds[i + 1]
        ]
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            parts = list(pool.map(_point_worker, tasks))
    else:
        parts = [_run_channels(config, methods, point_idx, snr_db, range(config.trials))]

    elapsed = time.perf_counter() - start
    points = {}
    for meth in methods:
        err = sum(p[0][meth] for p in parts)
        dec = sum(p[1][meth] for p in parts)
        skip = sum(p[2][meth] for p in parts)
        crc = sum(p[3] for p in parts)
        ser = err / dec if dec else 0.0
        se = np.sqrt(ser * (1.0 - ser) / dec) if dec else 0.0
        points[meth] = SerPoint(
            method=meth,
            snr_db=snr_db,
            ser=ser,
            std_err=float(se),
            error_count=err,
            decision_count=dec,
            wall_time=elapsed,
            skipped_instances=skip,
            stream_checksum=crc,
        )
    return points


def compare_methods(config: ExperimentConfig, methods=None):
    """SER table for several methods under common random numbers.

    Returns a dict keyed by ``(method, snr_db)``.  Every method at a given
    point sees the identical channel, data, and noise stream.
    """
    methods = tuple(methods) if methods is not None else (config.method,)
    for meth in methods:
        if meth not in METHODS:
            raise ValueError(f"unknown method {meth!r}")
    table = {}
    for point_idx, snr_db in enumerate(config.snr_grid_db):
        for meth, pt in _run_point(config, methods, point_idx, snr_db).items():
            table[(meth, snr_db)] = pt
    return table


def run_ser(config: ExperimentConfig):
    """SER sweep for the configured method; one point per grid entry."""
    table = compare_methods(config, (config.method,))
    return [table[(config.method, snr)] for snr in config.snr_grid_db]
