"""Command-line front end: experiment runner, verifier, figure reproduction.

Three subcommands:

``run <config.json>``
    Execute the SER experiment described by a JSON config file and write a
    CSV table.  Unknown or ill-typed keys are rejected before any
    computation with a line-anchored message (exit 2); runtime failures
    exit 1; success exits 0.

``verify <suite>``
    Run one of the built-in property suites (``gradients``, ``hessians``,
    ``bounds``, ``bnb-vs-exhaustive``, ``sep-vs-mc``) with fixed seeds and
    print one PASS/FAIL line per property.  Any failure serializes a
    counterexample instance and exits 1.

``figure <name>``
    Re-run one of the bundled K=2, M=5 benchmark figures
    (``fig-qpsk-k2m5``, ``fig-8psk-k2m5``), write its CSV, and compare the
    gated cells against the bundled reference values within their
    tolerance bands.  The comparison is skipped (with a note) when the run
    is below the calibrated sample size.

The CSV schema is ``method,snr_db,ser,std_err,errors,decisions,seed``.
All randomness flows from the single ``seed`` value, so reruns with the
same config are byte-identical.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import bnb as bnb_mod
from . import convex as convex_mod
from . import objectives as obj_mod
from .model import PrecodingInstance, generate_channel, hard_detect, to_real
from .reference import FIGURE_GATES, MIN_DECISIONS_FOR_COMPARISON
from .sim import METHODS, ExperimentConfig, compare_methods, snr_to_sigma

CSV_HEADER = "method,snr_db,ser,std_err,errors,decisions,seed"

_CONFIG_KEYS = {
    "k": (int, True),
    "m": (int, True),
    "alpha_s": (int, True),
    "alpha_x": (int, True),
    "snr_grid_db": (list, True),
    "methods": (list, True),
    "out": (str, True),
    "trials": (int, False),
    "symbols_per_channel": (int, False),
    "noise_draws_per_symbol": (int, False),
    "seed": (int, False),
    "qos": (list, False),
    "threads": (int, False),
    "format": (str, False),
    "verbosity": (int, False),
}


class ConfigError(Exception):
    pass


def _key_line(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return i
    return 1


def _load_config(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: config must be a JSON object")
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{_key_line(text, key)}: unknown config key \"{key}\"")
    for key, (typ, required) in _CONFIG_KEYS.items():
        if key in raw:
            value = raw[key]
            if value is None and not required:
                continue
            if typ is int and isinstance(value, bool):
                raise ConfigError(f"{path}:{_key_line(text, key)}: key \"{key}\" must be {typ.__name__}")
            if not isinstance(value, typ) and not (typ is int and isinstance(value, int)):
                raise ConfigError(f"{path}:{_key_line(text, key)}: key \"{key}\" must be {typ.__name__}")
        elif required:
            raise ConfigError(f"{path}:1: missing required config key \"{key}\"")
    for meth in raw["methods"]:
        if meth not in METHODS:
            raise ConfigError(
                f"{path}:{_key_line(text, 'methods')}: unknown method \"{meth}\" "
                f"(choose from {', '.join(METHODS)})"
            )
    if raw.get("format", "csv") != "csv":
        raise ConfigError(f"{path}:{_key_line(text, 'format')}: only csv output is supported")
    return raw


def _write_csv(path: str, table, methods, snr_grid, seed: int) -> None:
    lines = [CSV_HEADER]
    for meth in methods:
        for snr in snr_grid:
            pt = table[(meth, snr)]
            lines.append(
                f"{meth},{snr:.10g},{pt.ser:.10g},{pt.std_err:.10g},"
                f"{pt.error_count},{pt.decision_count},{seed}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_run(config_path: str, seed=None, trials=None, threads=None, out=None) -> int:
    """Execute a config-driven experiment; returns the process exit code."""
    try:
        raw = _load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    verbosity = raw.get("verbosity", 1)
    try:
        config = ExperimentConfig(
            n_users=raw["k"],
            n_antennas=raw["m"],
            alpha_s=raw["alpha_s"],
            alpha_x=raw["alpha_x"],
            snr_grid_db=tuple(raw["snr_grid_db"]),
            trials=trials if trials is not None else raw.get("trials", 500),
            symbols_per_channel=raw.get("symbols_per_channel", 20),
            noise_draws_per_symbol=raw.get("noise_draws_per_symbol", 1),
            seed=seed if seed is not None else raw.get("seed", 0),
            qos=tuple(raw["qos"]) if raw.get("qos") is not None else None,
            threads=threads if threads is not None else raw.get("threads", 1),
            method=raw["methods"][0],
        )
    except (ValueError, TypeError) as exc:
        print(f"error: {config_path}: {exc}", file=sys.stderr)
        return 2
    out_path = out if out is not None else raw["out"]
    methods = tuple(raw["methods"])
    try:
        start = time.perf_counter()
        table = compare_methods(config, methods)
        _write_csv(out_path, table, methods, config.snr_grid_db, config.seed)
    except Exception as exc:  # runtime failure, not a config problem
        print(f"error: run failed: {exc}", file=sys.stderr)
        return 1
    if verbosity >= 1:
        for meth in methods:
            for snr in config.snr_grid_db:
                pt = table[(meth, snr)]
                print(
                    f"{meth} @ {snr:g} dB: SER {pt.ser:.6g} +/- {pt.std_err:.2g} "
                    f"({pt.error_count}/{pt.decision_count})"
                    + (f" [skipped {pt.skipped_instances}]" if pt.skipped_instances else "")
                )
        print(f"wrote {out_path} in {time.perf_counter() - start:.1f} s")
    return 0


def _serialize_instance(instance: PrecodingInstance, extra=None):
    payload = {
        "H_re": instance.H.real.tolist(),
        "H_im": instance.H.imag.tolist(),
        "s": instance.s.tolist(),
        "sigma_w": instance.sigma_w,
        "alpha_s": instance.alpha_s,
        "alpha_x": instance.alpha_x,
    }
    if extra:
        payload.update(extra)
    return json.dumps(payload)


def _random_instance(rng, k, m, alpha_s, alpha_x, snr_db=10.0):
    H = generate_channel(k, m, 1.0, rng)
    s = rng.integers(0, alpha_s, k)
    return PrecodingInstance(H, s, snr_to_sigma(snr_db), alpha_s, alpha_x)


def _interior_point(rng, instance):
    """Random point strictly inside the hull (a convex mix of alphabet points)."""
    pts = instance.tx_alphabet.points
    weights = rng.dirichlet(np.ones(instance.alpha_x), size=instance.n_antennas)
    return to_real(0.9 * (weights @ pts))


def _fd_gradient(func, x, h=1e-6):
    out = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        out[j] = (func(x + e) - func(x - e)) / (2.0 * h)
    return out


def _suite_gradients():
    rng = np.random.default_rng(101)
    failures = []
    for criterion in ("qmsep", "ubmsep"):
        worst = 0.0
        for _ in range(100):
            instance = _random_instance(rng, 2, 3, 4, 4)
            data = obj_mod.build_objective(instance, criterion)
            x_r = _interior_point(rng, instance)
            if criterion == "ubmsep":
                m1 = data.edge_rows_1 @ x_r
                m2 = data.edge_rows_2 @ x_r
                if min(m1.min(), m2.min()) < 0.05:
                    continue
                grad = obj_mod.ubmsep_gradient(data, x_r)
                fd = _fd_gradient(lambda v: obj_mod.ubmsep_objective(data, v), x_r)
            else:
                grad = obj_mod.qmsep_gradient(data, x_r)
                fd = _fd_gradient(lambda v: obj_mod.qmsep_objective(data, v), x_r)
            rel = np.linalg.norm(fd - grad) / max(1.0, np.linalg.norm(grad))
            worst = max(worst, rel)
            if rel > 1e-6:
                failures.append(_serialize_instance(instance, {"x_r": x_r.tolist(), "rel_err": rel}))
                break
        _report(f"gradient[{criterion}] matches central differences", not failures, f"max rel err {worst:.2e}")
        if failures:
            break
    return failures


def _suite_hessians():
    rng = np.random.default_rng(202)
    failures = []
    for criterion in ("qmsep", "ubmsep"):
        worst = 0.0
        for _ in range(40):
            instance = _random_instance(rng, 2, 3, 4, 4)
            data = obj_mod.build_objective(instance, criterion)
            x_r = _interior_point(rng, instance)
            if criterion == "ubmsep":
                m1 = data.edge_rows_1 @ x_r
                m2 = data.edge_rows_2 @ x_r
                if min(m1.min(), m2.min()) < 0.05:
                    continue
                hess = obj_mod.ubmsep_hessian(data, x_r)
                grad_fn = lambda v: obj_mod.ubmsep_gradient(data, v)
            else:
                hess = obj_mod.qmsep_hessian(data, x_r)
                grad_fn = lambda v: obj_mod.qmsep_gradient(data, v)
            n = x_r.size
            fd = np.empty((n, n))
            h = 1e-6
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                fd[:, j] = (grad_fn(x_r + e) - grad_fn(x_r - e)) / (2.0 * h)
            rel = np.linalg.norm(fd - hess) / max(1.0, np.linalg.norm(hess))
            worst = max(worst, rel)
            sym = np.linalg.norm(hess - hess.T)
            mineig = np.linalg.eigvalsh(hess).min()
            norm = np.linalg.norm(hess, 2)
            if rel > 1e-5 or sym != 0.0 or mineig < -1e-8 * max(1.0, norm):
                failures.append(_serialize_instance(instance, {"x_r": x_r.tolist(), "rel_err": rel}))
                break
        _report(f"hessian[{criterion}] FD match, symmetry, PSD", not failures, f"max rel err {worst:.2e}")
        if failures:
            break
    return failures


def _suite_bounds():
    rng = np.random.default_rng(303)
    failures = []
    checked = 0
    for criterion in ("qmsep", "ubmsep"):
        for _ in range(15):
            instance = _random_instance(rng, 2, 4, 4, 4)
            data = obj_mod.build_objective(instance, criterion)
            poly = convex_mod.build_polyhedron(4, 4)
            pts = instance.tx_alphabet.points
            p = int(rng.integers(1, 4))
            prefix = rng.integers(0, 4, p)
            f = pts[prefix]
            sol = convex_mod.solve_subproblem(data, to_real(f), poly, convex_mod.SolverConfig())
            best = np.inf
            tail = bnb_mod._candidate_matrix(4, 4 - p, pts[0].__abs__())
            for v in tail:
                x_r = to_real(np.concatenate([f, v]))
                if criterion == "ubmsep":
                    if (data.edge_rows_1 @ x_r).min() < 0 or (data.edge_rows_2 @ x_r).min() < 0:
                        continue
                best = min(best, obj_mod.objective_value(data, x_r))
            checked += 1
            if sol.lower_bound > best + 1e-12:
                failures.append(_serialize_instance(instance, {"prefix": prefix.tolist()}))
                break
    _report("subproblem bounds underestimate all completions", not failures, f"{checked} prefixes")
    return failures


def _suite_bnb_vs_exhaustive():
    rng = np.random.default_rng(404)
    failures = []
    worst = 0.0
    for trial in range(100):
        k, m, ax = [(1, 2, 4), (2, 3, 4), (2, 2, 8)][trial % 3]
        instance = _random_instance(rng, k, m, 4, ax)
        for criterion in ("qmsep", "ubmsep"):
            out = bnb_mod.solve_bnb(instance, bnb_mod.BnbConfig(criterion=criterion))
            _, g_opt = bnb_mod.exhaustive_msep(instance, criterion)
            gap = abs(out.objective - g_opt)
            worst = max(worst, gap)
            if gap > 1e-9:
                failures.append(_serialize_instance(instance, {"criterion": criterion, "gap": gap}))
                break
        if failures:
            break
    _report("branch-and-bound equals exhaustive search", not failures, f"max gap {worst:.2e}")
    return failures


def _suite_sep_vs_mc():
    rng = np.random.default_rng(505)
    failures = []
    n_draws = 200_000
    for _ in range(5):
        instance = _random_instance(rng, 2, 3, 4, 4, snr_db=5.0)
        x = instance.tx_alphabet.points[rng.integers(0, 4, 3)]
        qdata = obj_mod.build_qmsep(instance)
        udata = obj_mod.build_ubmsep(instance)
        sep = obj_mod.sep_qmsep(qdata, x)
        bound = obj_mod.sep_ubmsep_bound(udata, x)
        y = instance.H @ x
        w = (instance.sigma_w / np.sqrt(2.0)) * (
            rng.standard_normal((n_draws, 2)) + 1j * rng.standard_normal((n_draws, 2))
        )
        det = hard_detect(y[None, :] + w, instance.data_alphabet)
        rate = (det != instance.s[None, :]).mean(axis=0)
        var = np.maximum(np.maximum(rate * (1 - rate), sep * (1 - sep)), 1e-12)
        se = np.sqrt(var / n_draws)
        if np.any(np.abs(rate - sep) > 3.0 * se) or np.any(bound < rate - 3.0 * se):
            failures.append(_serialize_instance(instance, {"x_re": x.real.tolist(), "x_im": x.imag.tolist()}))
            break
    _report("closed-form SEP matches Monte Carlo within 3 SE", not failures, f"{n_draws} draws/triple")
    return failures


def _report(name: str, passed: bool, detail: str = "") -> None:
    tag = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{tag}] {name}{suffix}")


_SUITES = {
    "gradients": _suite_gradients,
    "hessians": _suite_hessians,
    "bounds": _suite_bounds,
    "bnb-vs-exhaustive": _suite_bnb_vs_exhaustive,
    "sep-vs-mc": _suite_sep_vs_mc,
}


def cmd_verify(suite: str) -> int:
    """Run one named property suite; exit 0 only if every property passes."""
    if suite not in _SUITES:
        print(
            f"error: unknown suite \"{suite}\" (choose from {', '.join(_SUITES)})",
            file=sys.stderr,
        )
        return 2
    failures = _SUITES[suite]()
    for payload in failures:
        print(f"counterexample: {payload}", file=sys.stderr)
    return 0 if not failures else 1


def cmd_figure(name: str, trials=None, seed=None, threads=None, out=None) -> int:
    """Reproduce a bundled benchmark figure and gate it against references."""
    if name not in FIGURE_GATES:
        print(
            f"error: unknown figure \"{name}\" (choose from {', '.join(FIGURE_GATES)})",
            file=sys.stderr,
        )
        return 2
    reference, (alpha_s, alpha_x), gates = FIGURE_GATES[name]
    methods = tuple(dict.fromkeys(meth for meth, _, _ in gates))
    grid = tuple(sorted({snr for _, snr, _ in gates}))
    config = ExperimentConfig(
        n_users=2,
        n_antennas=5,
        alpha_s=alpha_s,
        alpha_x=alpha_x,
        snr_grid_db=grid,
        trials=trials if trials is not None else 2500,
        symbols_per_channel=2,
        noise_draws_per_symbol=20,
        seed=seed if seed is not None else 20240,
        threads=threads if threads is not None else 1,
        method=methods[0],
    )
    out_path = out if out is not None else f"{name}.csv"
    start = time.perf_counter()
    table = compare_methods(config, methods)
    _write_csv(out_path, table, methods, grid, config.seed)
    print(f"wrote {out_path} in {time.perf_counter() - start:.1f} s")

    skipped = sum(table[(m, s)].skipped_instances for m in methods for s in grid)
    if skipped:
        print(f"error: {skipped} instances skipped by precoder failures", file=sys.stderr)
        return 1
    if config.decisions_per_point < MIN_DECISIONS_FOR_COMPARISON:
        print(
            f"reference comparison: insufficient samples, skipped "
            f"({config.decisions_per_point} < {MIN_DECISIONS_FOR_COMPARISON} decisions/point)"
        )
        return 0
    bad = []
    for meth, snr, tol in gates:
        ref = reference[meth][snr]
        got = table[(meth, snr)].ser
        rel = abs(got - ref) / ref
        ok = rel <= tol
        print(
            f"{'PASS' if ok else 'FAIL'} {meth} @ {snr:g} dB: "
            f"got {got:.6g}, reference {ref:.6g}, rel dev {rel:.3f} (band {tol:.2f})"
        )
        if not ok:
            bad.append((meth, snr))
    if bad:
        cells = ", ".join(f"({m}, {s:g} dB)" for m, s in bad)
        print(f"error: out-of-band cells: {cells}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="msep-precode",
        description="Minimum-SEP precoding experiments for phase-quantized MU-MIMO",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--trials", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=None)
    p_run.add_argument("--out", default=None)

    p_verify = sub.add_parser("verify", help="run a built-in property suite")
    p_verify.add_argument("suite")

    p_fig = sub.add_parser("figure", help="reproduce a bundled benchmark figure")
    p_fig.add_argument("name")
    p_fig.add_argument("--trials", type=int, default=None)
    p_fig.add_argument("--seed", type=int, default=None)
    p_fig.add_argument("--threads", type=int, default=None)
    p_fig.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, seed=args.seed, trials=args.trials,
                       threads=args.threads, out=args.out)
    if args.command == "verify":
        return cmd_verify(args.suite)
    return cmd_figure(args.name, trials=args.trials, seed=args.seed,
                      threads=args.threads, out=args.out)


if __name__ == "__main__":
    sys.exit(main())
