"""Command-line surface: pool, verify, bench, demo-train.

All machine-readable output is JSON, one object per line. Exit codes:
0 success, 1 validation/config error, 2 numeric failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import ctypes
import json
import os
import sys
import time

import numpy as np
from threadpoolctl import threadpool_limits

from .aggregate import FeatureBatch, augment, cooc_matrix, rectify_center
from .demo import DemoConfig, demo_train
from .elementwise import KINDS, PNConfig, pn_fwd, sigme_fwd
from .errors import NumericError, SopoolError, TensorFileError, ValidationError
from .kernelmap import encode_grid, make_pivots
from .linalg import sym_eig
from .spectral import SPECTRAL_KINDS, SpectralPlan, spectral_fwd
from .tensorfile import read_tensor, write_tensor
from .verify import run_suites

BENCH_DIM_LO = 16
BENCH_DIM_HI = 4096


def _add_pn_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", default="Average", choices=KINDS)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=20.0)
    p.add_argument("--eta-prime", dest="eta_prime", type=float, default=20.0)
    p.add_argument("--gamma-prime", dest="gamma_prime", type=float, default=10.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-6)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=1e-3)
    p.add_argument("--Z", type=int, default=5)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--spectral", action="store_true",
                   help="pool through the eigenvalue path instead of element-wise")
    p.add_argument("--trace-comp", action="store_true")
    p.add_argument("--residual", action="store_true")


def _pn_config(args: argparse.Namespace) -> PNConfig:
    return PNConfig(
        kind=args.kind,
        gamma=args.gamma,
        eta=args.eta,
        gammaP=args.gamma_prime,
        etaP=args.eta_prime,
        lam=args.lam,
        beta=args.beta,
        kappa=args.kappa,
        trace_comp=args.trace_comp,
        residual=args.residual,
    )


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors (exit 1), not argparse's default 2
    def error(self, message: str):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sopool",
        description="Second-order pooling with element-wise and spectral power normalization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pool = sub.add_parser("pool", help="pool a feature tensor file")
    p_pool.add_argument("input", help="input tensor file (rank 3 d x H x W, or rank 2 with --grid)")
    p_pool.add_argument("--output", "-o", default=None, help="output tensor file for the pooled matrix")
    p_pool.add_argument("--grid", nargs=2, type=int, metavar=("W", "H"), default=None)
    _add_pn_flags(p_pool)

    p_verify = sub.add_parser("verify", help="run the property suites")
    p_verify.add_argument("--suite", default=None, help="run only suites whose name starts with this")
    p_verify.add_argument("--break-sign", action="store_true",
                          help="fault injection: flip the MaxExp backward sign (must fail)")

    p_bench = sub.add_parser("bench", help="element-wise vs spectral forward timings")
    p_bench.add_argument("--dims", type=int, nargs="+", default=[64, 128, 256, 512])
    p_bench.add_argument("--reps", type=int, default=11)
    p_bench.add_argument("--seed", type=int, default=0)

    p_demo = sub.add_parser("demo-train", help="synthetic end-to-end training demo")
    p_demo.add_argument("--epochs", type=int, default=50)
    p_demo.add_argument("--classes", type=int, default=3)
    p_demo.add_argument("--samples", type=int, default=200, help="samples per class")
    p_demo.add_argument("--lr", type=float, default=0.01)
    p_demo.add_argument("--seed", type=int, default=0)
    _add_pn_flags(p_demo)
    p_demo.set_defaults(kind="SigmE")

    return parser


def cmd_pool(args: argparse.Namespace) -> int:
    t0 = time.perf_counter_ns()
    data = read_tensor(args.input)
    if data.ndim == 3:
        d, H, W = data.shape
        Phi = data.reshape(d, H * W).astype(np.float64)
    else:
        if args.grid is None:
            raise ValidationError("rank-2 input needs --grid W H to define the feature map layout")
        W, H = args.grid
        d = data.shape[0]
        if data.shape[1] != W * H:
            raise ValidationError(
                f"--grid {W} {H} implies {W * H} columns, file has {data.shape[1]}"
            )
        Phi = data.astype(np.float64)

    cfg = _pn_config(args)
    grid = make_pivots(args.Z, args.sigma)
    batch = rectify_center(FeatureBatch(Phi=Phi), cfg.beta)
    if args.alpha == 0.0:
        codes = np.zeros((2 * grid.Z, Phi.shape[1]))
    else:
        codes = encode_grid(W, H, args.alpha, grid)
    aug = augment(batch, codes)
    M = cooc_matrix(aug)
    t_pool = time.perf_counter_ns()

    if args.spectral:
        plan = SpectralPlan(kind=args.kind, path="eigen", params=cfg)
        Psi = spectral_fwd(M, plan)
    else:
        Psi = pn_fwd(M, cfg)
    t_pn = time.perf_counter_ns()

    if args.output:
        write_tensor(args.output, Psi)
    pair = sym_eig(Psi)
    summary = {
        "kind": args.kind,
        "spectral": bool(args.spectral),
        "dim": int(Psi.shape[0]),
        "trace": float(np.trace(Psi)),
        "min_eigenvalue": float(pair.values[-1]),
        "max_eigenvalue": float(pair.values[0]),
        "timings_ns": {
            "aggregate": t_pool - t0,
            "normalize": t_pn - t_pool,
            "total": time.perf_counter_ns() - t0,
        },
        "output": args.output,
    }
    print(json.dumps(summary))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    results, ok = run_suites(suite=args.suite, break_sign=args.break_sign)
    for r in results:
        print(json.dumps(r))
    return 0 if ok else 2


def _bench_threads() -> int:
    raw = os.environ.get("SOPOOL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"SOPOOL_THREADS must be an integer, got {raw!r}") from None


def _quiet_allocator() -> None:
    """Keep large temporaries out of per-call mmap during timing.

    Without this, every matrix-sized allocation round-trips through mmap
    and its page faults dominate the medians at large dims. Process-wide
    and glibc-only; elsewhere it is a no-op and timings just get noisier.
    """
    try:
        libc = ctypes.CDLL(None)
        libc.mallopt(-3, 256 * 1024 * 1024)  # -3 = M_MMAP_THRESHOLD
    except (OSError, AttributeError, TypeError):
        pass


def bench_rows(dims: list[int], reps: int, seed: int = 0) -> list[dict]:
    """Median forward times for element-wise vs spectral SigmE per dim.

    BLAS pools are capped at SOPOOL_THREADS (default 1) while timing;
    multi-threaded eigensolves make the medians load-dependent.
    """
    if any(d < BENCH_DIM_LO or d > BENCH_DIM_HI for d in dims):
        raise ValidationError(
            f"bench dims must lie in [{BENCH_DIM_LO}, {BENCH_DIM_HI}], got {dims}"
        )
    if reps < 1:
        raise ValidationError(f"bench reps must be >= 1, got {reps}")
    rng = np.random.default_rng(seed)
    rows = []
    _quiet_allocator()
    with threadpool_limits(limits=_bench_threads()):
        for dim in dims:
            X = rng.standard_normal((dim, 2 * dim))
            M = X @ X.T / (2 * dim)
            M = 0.5 * (M + M.T)
            cfg = PNConfig(kind="SigmE")
            plan = SpectralPlan(kind="SigmE", path="eigen", params=cfg)

            sigme_fwd(M, cfg)  # warm up
            times_ew = []
            for _ in range(reps):
                t0 = time.perf_counter_ns()
                sigme_fwd(M, cfg)
                times_ew.append(time.perf_counter_ns() - t0)

            spectral_fwd(M, plan)  # warm up
            times_sp = []
            for _ in range(reps):
                t0 = time.perf_counter_ns()
                spectral_fwd(M, plan)
                times_sp.append(time.perf_counter_ns() - t0)

            med_ew = float(np.median(times_ew))
            med_sp = float(np.median(times_sp))
            rows.append({"dim": dim, "kind": "SigmE", "path": "elementwise",
                         "median_ns": med_ew, "reps": reps})
            rows.append({"dim": dim, "kind": "SigmE", "path": "spectral",
                         "median_ns": med_sp, "reps": reps})
            rows.append({"dim": dim, "kind": "SigmE", "path": "ratio",
                         "median_ns": med_sp / med_ew, "reps": reps})
    return rows


def cmd_bench(args: argparse.Namespace) -> int:
    for row in bench_rows(args.dims, args.reps, args.seed):
        print(json.dumps(row))
    return 0


def cmd_demo_train(args: argparse.Namespace) -> int:
    cfg = DemoConfig(
        pn=_pn_config(args),
        classes=args.classes,
        samples_per_class=args.samples,
        epochs=args.epochs,
        lr=args.lr,
        alpha=args.alpha,
        Z=args.Z,
        sigma=args.sigma,
        seed=args.seed,
        spectral=args.spectral,
    )
    print(json.dumps(demo_train(cfg)))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    handlers = {
        "pool": cmd_pool,
        "verify": cmd_verify,
        "bench": cmd_bench,
        "demo-train": cmd_demo_train,
    }
    try:
        args = parser.parse_args(argv)
        return handlers[args.command](args)
    except TensorFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SopoolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
