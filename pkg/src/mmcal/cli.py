"""Command-line harness.

Subcommands: measure, match, calibrate, recover, exp, precision, convert.
Global flags --seed, --precision {32,64}, --out DIR apply everywhere; a
--config JSON file, when given, overrides flag values. Exit codes:
0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
Errors also emit one machine-readable line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as mio
from . import linalg, phantoms, rng
from .backend import active_backend
from .calibration import MatrixOracle, calibrate_mspace, calibrate_ndim_grouped
from .config import DEFAULT_SEED, ExperimentConfig, PMImage
from .errors import (
    DegenerateDenominatorError,
    DimensionError,
    MmcalError,
    ParseError,
    RankDeficientError,
    SingularMatrixError,
)
from .experiments import EXPERIMENT_NAMES, run_experiment
from .matched import ImageOracle, algorithm1, algorithm2
from .measurement import NoiseModel, measure, residual_error
from .precision import Precision
from .recovery import RecoveryConfig, fista_l1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_NUMERICAL_ERRORS = (
    SingularMatrixError,
    RankDeficientError,
    DegenerateDenominatorError,
)


def _error_line(code: int, exc: BaseException) -> None:
    payload = {"code": code, "error": type(exc).__name__, "message": str(exc)}
    print("MMCAL-ERROR " + json.dumps(payload, sort_keys=True), file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed")
    common.add_argument("--precision", choices=("32", "64"), default="64",
                        help="working precision in bits")
    common.add_argument("--out", default="out", help="output directory")

    parser = argparse.ArgumentParser(prog="mmcal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"mmcal 0.1.0 ({active_backend} backend)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common],
                       help="measure an image under a matrix with Gaussian noise")
    p.add_argument("--matrix", required=True, help="MMCAL1/CSV matrix file")
    p.add_argument("--image", required=True, help="PGM or MMCAL1 image file")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out-file", default=None, help="output path (.mmc or .csv)")

    p = sub.add_parser("match", parents=[common],
                       help="build a matched replacement matrix for one hidden image")
    p.add_argument("--alg", choices=("1", "2"), default="1")
    p.add_argument("--matrix", default=None, help="known matrix (generated when omitted)")
    p.add_argument("--unknown-matrix", default=None,
                   help="hidden matrix (generated when omitted)")
    p.add_argument("--image", default=None, help="hidden image (bundled phantom when omitted)")
    p.add_argument("--pm", default="constant:0.5",
                   help="pre-measurement image spec (constant:L | phantom:NAME | file:PATH)")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.0,
                   help="correlation of generated unknown matrix with the known one")
    p.add_argument("--m", type=int, default=120)
    p.add_argument("--n", type=int, default=256)

    p = sub.add_parser("calibrate", parents=[common],
                       help="calibrate an unknown matrix from basis-image measurements")
    p.add_argument("--scheme", choices=("mspace", "grouped"), default="mspace")
    p.add_argument("--matrix", default=None)
    p.add_argument("--unknown-matrix", default=None)
    p.add_argument("--embed", default="",
                   help="comma-separated phantom names or PGM paths to embed in the basis")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--m", type=int, default=120)
    p.add_argument("--n", type=int, default=256)

    p = sub.add_parser("recover", parents=[common],
                       help="sparse recovery from a (measurement, matrix) pair")
    p.add_argument("--matrix", required=True)
    p.add_argument("--measurement", required=True)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--width", type=int, default=None, help="image width for the PGM output")

    p = sub.add_parser("exp", parents=[common], help="run a named experiment")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    p.add_argument("--config", default=None,
                   help="JSON config file; overrides flag values")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--h", type=int, default=None)
    p.add_argument("--w", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--pm", default=None)
    p.add_argument("--rho", type=float, default=0.0)

    p = sub.add_parser("precision", parents=[common],
                       help="shorthand for 'exp precision'")
    p.add_argument("--config", default=None,
                   help="JSON config file; overrides flag values")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--h", type=int, default=None)
    p.add_argument("--w", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--rho", type=float, default=0.0)

    p = sub.add_parser("convert", help="convert between .mmc, .csv and .pgm files")
    p.add_argument("src")
    p.add_argument("dst")

    return parser


def _read_any_matrix(path: str) -> np.ndarray:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return mio.read_matrix_csv(path)
    return mio.read_matrix(path)


def _read_image(path: str, precision: Precision) -> np.ndarray:
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        img = mio.read_pgm(path)
        return np.ascontiguousarray(img.reshape(-1), dtype=precision.dtype)
    vec = mio.read_vector(path) if suffix == ".mmc" else mio.read_matrix_csv(path).reshape(-1)
    return np.ascontiguousarray(vec, dtype=precision.dtype)


def _load_or_generate(args, precision: Precision):
    """Known/unknown matrices from files, or generated from the seed."""
    dt = precision.dtype
    if args.matrix:
        a = np.ascontiguousarray(_read_any_matrix(args.matrix), dtype=dt)
    else:
        a = rng.gaussian_matrix(args.m, args.n, rng.seed_from_label(args.seed, "known-matrix"), dt)
    if args.unknown_matrix:
        a_u = np.ascontiguousarray(_read_any_matrix(args.unknown_matrix), dtype=dt)
    else:
        g = rng.gaussian_matrix(a.shape[0], a.shape[1],
                                rng.seed_from_label(args.seed, "unknown-matrix"), dt)
        rho = getattr(args, "rho", 0.0)
        if rho:
            a_u = np.ascontiguousarray(rho * a + float(np.sqrt(1.0 - rho * rho)) * g)
        else:
            a_u = g
    if a.shape != a_u.shape:
        raise DimensionError(f"matrix shapes differ: {a.shape} vs {a_u.shape}")
    return a, a_u


def _cmd_measure(args) -> int:
    precision = Precision.parse(args.precision)
    a = np.ascontiguousarray(_read_any_matrix(args.matrix), dtype=precision.dtype)
    x = _read_image(args.image, precision)
    noise = NoiseModel(args.sigma, args.seed)
    y = measure(a, x, noise)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_file = Path(args.out_file) if args.out_file else out_dir / "y.mmc"
    if out_file.suffix.lower() == ".csv":
        mio.write_matrix_csv(out_file, y.reshape(1, -1))
    else:
        mio.write_vector(out_file, y)
    print(f"seed: {args.seed}")
    print(f"wrote {out_file}")
    return EXIT_OK


def _cmd_match(args) -> int:
    precision = Precision.parse(args.precision)
    a, a_u = _load_or_generate(args, precision)
    m, n = a.shape
    side = int(round(np.sqrt(n)))
    h, w = (side, n // side) if side * (n // side) == n else (1, n)
    if args.image:
        x_prime = _read_image(args.image, precision)
    else:
        x_prime = phantoms.phantom("blobs", h, w, precision)
    pm = PMImage.parse(args.pm).render(h, w, precision)
    noise = NoiseModel(args.sigma, rng.seed_from_label(args.seed, "match/oracle"))
    y_prime = measure(a_u, x_prime, NoiseModel(args.sigma, rng.seed_from_label(args.seed, "match/y-prime")))
    oracle = ImageOracle(x_prime, noise)
    fn = algorithm1 if args.alg == "1" else algorithm2
    result = fn(y_prime, oracle, a, pm, epochs=args.epochs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    mio.write_matrix(out_dir / "a_recv.mmc", result.a_recv)
    mio.write_curve_csv(out_dir / "match_curve.csv", result.trace.errors)
    print(f"seed: {args.seed}")
    print(f"final error: {result.trace.errors[-1]:.6e}")
    print(f"decay estimate: {result.k_eps_estimate:.6f}")
    print(f"measurements: {result.measure_calls}")
    print(f"non-convergence flag: {result.non_convergence}")
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    precision = Precision.parse(args.precision)
    a, a_u = _load_or_generate(args, precision)
    noise = NoiseModel(args.sigma, rng.seed_from_label(args.seed, "calibrate/oracle"))
    oracle = MatrixOracle(a_u, noise)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.scheme == "mspace":
        embeds = []
        side = int(round(np.sqrt(a.shape[1])))
        h, w = (side, a.shape[1] // side) if side * (a.shape[1] // side) == a.shape[1] else (1, a.shape[1])
        for token in filter(None, (t.strip() for t in args.embed.split(","))):
            if token in phantoms.PHANTOM_NAMES:
                embeds.append(phantoms.phantom(token, h, w, precision))
            else:
                embeds.append(_read_image(token, precision))
        result = calibrate_mspace(a, oracle, images_in_span=embeds)
        mio.write_matrix(out_dir / "sigma.mmc", result.sigma)
        mio.write_matrix(out_dir / "basis_q.mmc", result.basis.q)
    else:
        result = calibrate_ndim_grouped(a, oracle)
    mio.write_matrix(out_dir / "a_recv.mmc", result.a_recv)
    check = residual_error(linalg.matvec(a_u, np.full(a.shape[1], precision.dtype.type(0.5))),
                           linalg.matvec(result.a_recv, np.full(a.shape[1], precision.dtype.type(0.5))))
    print(f"seed: {args.seed}")
    print(f"unknown measurements: {result.unknown_measure_count}")
    print(f"constant-image residual vs hidden matrix: {check:.6e}")
    return EXIT_OK


def _cmd_recover(args) -> int:
    precision = Precision.parse(args.precision)
    a = np.ascontiguousarray(_read_any_matrix(args.matrix), dtype=precision.dtype)
    y_file = Path(args.measurement)
    y = np.ascontiguousarray(
        mio.read_vector(y_file) if y_file.suffix.lower() == ".mmc"
        else mio.read_matrix_csv(y_file).reshape(-1),
        dtype=precision.dtype)
    cfg = RecoveryConfig(tau=args.tau, max_iters=args.max_iters, rel_tol=args.rel_tol)
    x_hat = fista_l1(y, a, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    mio.write_vector(out_dir / "x_hat.mmc", x_hat)
    n = x_hat.shape[0]
    w = args.width or int(round(np.sqrt(n)))
    if w > 0 and n % w == 0:
        mio.write_pgm(out_dir / "x_hat.pgm", np.clip(x_hat, 0, 1).reshape(n // w, w))
    print(f"seed: {args.seed}")
    print(f"wrote {out_dir / 'x_hat.mmc'}")
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    overrides = {}
    if args.m is not None:
        overrides["m"] = args.m
    if args.n is not None:
        overrides["n"] = args.n
    if getattr(args, "h", None) is not None:
        overrides["h"] = args.h
    if getattr(args, "w", None) is not None:
        overrides["w"] = args.w
    if getattr(args, "sigma", None) is not None:
        overrides["sigma_noise"] = args.sigma
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if getattr(args, "pm", None):
        overrides["pm"] = PMImage.parse(args.pm)
    overrides["seed"] = args.seed
    overrides["precision"] = Precision.parse(args.precision)
    overrides["output_dir"] = args.out
    cfg = cfg.override(**overrides)
    if args.config:
        # The config file wins over flags.
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        cfg = ExperimentConfig.from_json_dict({**cfg.to_json_dict(), **file_cfg})
    return cfg


def _cmd_exp(args, name=None) -> int:
    cfg = _experiment_config(args)
    outcome = run_experiment(name or args.name, cfg, rho=args.rho)
    print(f"wrote {len(outcome.paths)} artifacts under {outcome.out_dir}")
    return EXIT_OK


def _cmd_convert(args) -> int:
    src, dst = Path(args.src), Path(args.dst)
    s_ext, d_ext = src.suffix.lower(), dst.suffix.lower()
    if s_ext == ".pgm":
        data = mio.read_pgm(src)
    elif s_ext == ".csv":
        data = mio.read_matrix_csv(src)
    elif s_ext == ".mmc":
        data = mio.read_matrix(src)
    else:
        raise ValueError(f"unknown source format {s_ext!r} (use .mmc, .csv or .pgm)")
    if d_ext == ".pgm":
        mio.write_pgm(dst, np.clip(np.asarray(data, dtype=np.float64), 0.0, 1.0))
    elif d_ext == ".csv":
        mio.write_matrix_csv(dst, data)
    elif d_ext == ".mmc":
        mio.write_matrix(dst, np.asarray(data))
    else:
        raise ValueError(f"unknown destination format {d_ext!r} (use .mmc, .csv or .pgm)")
    print(f"wrote {dst}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "measure":
            return _cmd_measure(args)
        if args.command == "match":
            return _cmd_match(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        if args.command == "recover":
            return _cmd_recover(args)
        if args.command == "exp":
            return _cmd_exp(args)
        if args.command == "precision":
            return _cmd_exp(args, name="precision")
        if args.command == "convert":
            return _cmd_convert(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (ParseError, OSError) as exc:
        _error_line(EXIT_IO, exc)
        return EXIT_IO
    except _NUMERICAL_ERRORS as exc:
        _error_line(EXIT_NUMERICAL, exc)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, MmcalError) as exc:
        _error_line(EXIT_CONFIG, exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
