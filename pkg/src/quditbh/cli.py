"""Command-line front end.

Subcommands: verify (identity suites), bh (ratio campaigns), learn (sampled
learning runs), eigen (generator/eigensystem report), noise (second-moment
checks).  Exit codes: 0 all checks pass, 1 usage/configuration error, 2 a
verification check failed.  QBH_THREADS caps worker threads for campaigns.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from quditbh import bh, gm, hw, learn, report, verify
from quditbh.errors import QbhError
from quditbh.rng import CounterRng

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

MAX_OPERATOR_DIM = 4096


def _threads() -> int:
    raw = os.environ.get("QBH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _validate_common(args) -> None:
    if not 2 <= args.K <= 8:
        raise ValueError(f"--K must be in 2..8, got {args.K}")
    n = getattr(args, "n", None)
    if n is not None:
        if not 1 <= n <= 4:
            raise ValueError(f"--n must be in 1..4, got {n}")
        if args.K**n > MAX_OPERATOR_DIM:
            raise ValueError(f"K^n = {args.K ** n} exceeds the {MAX_OPERATOR_DIM} cap")
    d = getattr(args, "d", None)
    if d is not None and n is not None:
        basis = getattr(args, "basis", "gm")
        if basis == "gm":
            if not 1 <= d <= n:
                raise ValueError(f"GM degree must satisfy 1 <= d <= n, got {d}")
        else:
            if not 1 <= d <= 2 * (args.K - 1) * n:
                raise ValueError(f"HW degree must satisfy 1 <= d <= 2(K-1)n, got {d}")
    for name in ("epsilon", "delta"):
        value = getattr(args, name, None)
        if value is not None and not 0.0 < value < 1.0:
            raise ValueError(f"--{name} must lie in (0, 1), got {value}")
    trials = getattr(args, "trials", None)
    if trials is not None and trials < 1:
        raise ValueError("--trials must be >= 1")


def _emit(args, payload: dict, csv_header: list[str], csv_rows: list[list]) -> None:
    if args.format == "json":
        report.write_text(args.out, report.dumps(payload))
    else:
        report.write_text(args.out, report.csv_lines(csv_header, csv_rows))


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    checks = verify.full_suite(args.K, seed=args.seed, samples=args.samples)
    payload = {
        "schema": 1,
        "command": "verify",
        "K": args.K,
        "seed": args.seed,
        "samples": args.samples,
        "checks": [c.to_json_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }
    rows = [[c.name, c.max_error, c.tol, c.passed] for c in checks]
    _emit(args, payload, ["name", "max_error", "tol", "passed"], rows)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


# ---------------------------------------------------------------------------
# bh


def cmd_bh(args) -> int:
    result = bh.bh_campaign(
        args.basis,
        args.K,
        args.n,
        args.d,
        args.trials,
        args.seed,
        threads=_threads(),
    )
    payload = result.to_json_dict()
    payload["command"] = "bh"
    rows = [[r.seed, r.d, r.ratio, r.bound] for r in result.records]
    _emit(args, payload, ["seed", "d", "ratio", "bound"], rows)
    return EXIT_OK if not result.flagged else EXIT_FAILED


# ---------------------------------------------------------------------------
# learn


def cmd_learn(args) -> int:
    root = CounterRng(args.seed)
    reps = []
    failures = 0
    for idx in range(args.trials):
        stream = root.spawn(idx)
        child_seed = int(stream.seed)
        if args.mode == "low":
            target = learn.random_sparse_target(args.K, args.n, args.d, stream)
            cfg = learn.LearningConfig(
                K=args.K,
                n=args.n,
                d=args.d,
                epsilon=args.epsilon,
                delta=args.delta,
                seed=child_seed,
            )
            run = learn.learn_low_degree(target, cfg)
            doc = run.to_json_dict()
            error = run.l2_sq_error
        else:
            target = learn.random_sparse_target(args.K, args.n, args.n, stream, terms=6)
            run = learn.learn_arbitrary(
                target, args.epsilon, args.delta, child_seed
            )
            doc = run.to_json_dict()
            error = run.haar_product_mse
        ok = error <= args.epsilon
        failures += 0 if ok else 1
        doc["rep"] = idx
        doc["error"] = error
        doc["ok"] = bool(ok)
        reps.append(doc)
    failure_fraction = failures / args.trials
    passed = failure_fraction <= args.delta
    payload = {
        "schema": 1,
        "command": "learn",
        "mode": args.mode,
        "K": args.K,
        "n": args.n,
        "d": args.d,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "seed": args.seed,
        "trials": args.trials,
        "failure_fraction": failure_fraction,
        "passed": bool(passed),
        "reps": reps,
    }
    rows = [[doc["rep"], doc["error"], doc["ok"]] for doc in reps]
    _emit(args, payload, ["rep", "error", "ok"], rows)
    return EXIT_OK if passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# eigen


def cmd_eigen(args) -> int:
    gens = hw.generator_set(args.K)
    systems = [hw.hw_eigensystem(args.K, ell, m) for ell, m in gens.members]
    checks = verify.eigen_suite(args.K)
    payload = {
        "schema": 1,
        "command": "eigen",
        "K": args.K,
        "generators": gens.to_json_dict(),
        "eigensystems": [s.to_json_dict() for s in systems],
        "checks": [c.to_json_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }
    rows = [
        [s.ell, s.m, "plus" if s.plus else "minus", s.max_residual] for s in systems
    ]
    _emit(args, payload, ["ell", "m", "class", "max_residual"], rows)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


# ---------------------------------------------------------------------------
# noise


def cmd_noise(args) -> int:
    K, n = args.K, args.n
    rng = CounterRng(args.seed)
    checks = []

    sym = gm.gm_matrix(K, ("sym", 1, 2))
    asym = gm.gm_matrix(K, ("asym", 1, 2))
    pairs = (("equal_pair", sym, sym, 11), ("orthogonal_pair", sym, asym, 12))
    for name, left, right, stream_id in pairs:
        exact = learn.haar_moment_channel(K, left, right).output
        mc, stderr = learn.haar_moment_mc(K, left, right, args.samples, rng.spawn(stream_id))
        margin = 5.0 * stderr + 1e-12
        ok = bool(np.all(np.abs(mc - exact) <= margin))
        checks.append(
            {
                "name": f"moment_channel.{name}",
                "max_deviation": float(np.max(np.abs(mc - exact))),
                "max_allowed": float(np.max(margin)),
                "passed": ok,
            }
        )

    single = gm.GmCoeffs.zeros(K, 1)
    single.tensor[gm.label_index(K, ("sym", 1, 2))] = 1.0
    est, se = learn.l2di_expectation(single, "haar_product_pure", args.samples, args.seed + 1)
    expected = 1.0 / (K + 1.0)
    checks.append(
        {
            "name": "haar_product_closed_form",
            "estimate": est,
            "expected": expected,
            "stderr": se,
            "passed": bool(abs(est - expected) <= 5.0 * se + 1e-12),
        }
    )

    trunc_d = max(1, n - 1)
    for trial in range(args.trials):
        stream = rng.spawn(100 + trial)
        coeffs = gm.random_observable(K, n, n, stream)
        bound = learn.noise_stability_bound(coeffs)
        for ensemble in learn.ENSEMBLES:
            est, se = learn.l2di_expectation(
                coeffs, ensemble, args.samples, int(stream.seed) % (2**32) + trial
            )
            checks.append(
                {
                    "name": f"stability_bound.{ensemble}.trial{trial}",
                    "estimate": est,
                    "bound": bound,
                    "stderr": se,
                    "passed": bool(est <= bound + 3.0 * se),
                }
            )
        tail = coeffs.copy()
        tail.tensor = coeffs.tensor - learn.truncate(coeffs, trunc_d).tensor
        est, se = learn.l2di_expectation(
            tail, "haar_product_pure", args.samples, int(stream.seed) % (2**32) + 7
        )
        cap = (K / (K * K - 1.0)) ** trunc_d * coeffs.l2_sq()
        checks.append(
            {
                "name": f"truncation_tail.trial{trial}",
                "estimate": est,
                "bound": cap,
                "stderr": se,
                "passed": bool(est <= cap + 3.0 * se),
            }
        )

    payload = {
        "schema": 1,
        "command": "noise",
        "K": K,
        "n": n,
        "seed": args.seed,
        "samples": args.samples,
        "trials": args.trials,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    rows = [[c["name"], c.get("estimate", c.get("max_deviation")), c["passed"]] for c in checks]
    _emit(args, payload, ["name", "value", "passed"], rows)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbh",
        description="Qudit operator Fourier analysis: identity suites, "
        "coefficient-norm campaigns, learning simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, n_default=None, d_default=None):
        p.add_argument("--K", type=int, required=True, help="local dimension (2..8)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=str, default=None, help="output path (stdout if omitted)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if n_default is not None:
            p.add_argument("--n", type=int, default=n_default, help="number of sites (1..4)")
        if d_default is not None:
            p.add_argument("--d", type=int, default=d_default, help="degree")

    p_verify = sub.add_parser("verify", help="run the identity suites for one K")
    common(p_verify)
    p_verify.add_argument("--samples", type=int, default=10_000)
    p_verify.set_defaults(func=cmd_verify)

    p_bh = sub.add_parser("bh", help="random-observable ratio campaign")
    common(p_bh, n_default=1, d_default=1)
    p_bh.add_argument("--basis", choices=("gm", "hw"), default="gm")
    p_bh.add_argument("--trials", type=int, default=100)
    p_bh.set_defaults(func=cmd_bh)

    p_learn = sub.add_parser("learn", help="sampled learning repetitions")
    common(p_learn, n_default=2, d_default=1)
    p_learn.add_argument("--mode", choices=("low", "arbitrary"), default="low")
    p_learn.add_argument("--epsilon", type=float, default=0.1)
    p_learn.add_argument("--delta", type=float, default=0.1)
    p_learn.add_argument("--trials", type=int, default=20)
    p_learn.set_defaults(func=cmd_learn)

    p_eigen = sub.add_parser("eigen", help="generator set and eigensystem report")
    common(p_eigen)
    p_eigen.set_defaults(func=cmd_eigen)

    p_noise = sub.add_parser("noise", help="second-moment and stability checks")
    common(p_noise, n_default=2)
    p_noise.add_argument("--samples", type=int, default=4000)
    p_noise.add_argument("--trials", type=int, default=5)
    p_noise.set_defaults(func=cmd_noise)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        _validate_common(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except QbhError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
