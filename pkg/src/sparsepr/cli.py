"""Command-line front end.

Subcommands: phantom, forward, retrieve, sweep, metrics. All outputs are
deterministic for a fixed flag set (seeds are explicit); the only
wall-clock value in any report is the timing field. Exit codes: 0 ok,
1 usage error, 2 data/file error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import experiment, fourier, retrieval
from .fieldfile import FieldFileError, read_field_file, write_field_file
from .grids import as_mask
from .sparsity import PenaltySpec, select_delta, huber_value, tv_value

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def write_pgm(path, values: np.ndarray) -> None:
    """Write an 8-bit grayscale P5 (binary) PGM."""
    v = np.clip(np.round(values), 0, 255).astype(np.uint8)
    h, w = v.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(v.tobytes())


def phase_preview(field: np.ndarray) -> np.ndarray:
    """Map phase in [-pi, pi) affinely to [0, 255]."""
    phase = np.angle(field)
    phase[phase >= np.pi] = -np.pi  # np.angle returns (-pi, pi]
    return (phase + np.pi) / (2.0 * np.pi) * 255.0


def magnitude_preview(mag: np.ndarray) -> np.ndarray:
    """Display rule |G|^0.25, normalized, fftshifted for viewing."""
    shifted = np.fft.fftshift(mag)
    peak = shifted.max()
    if peak == 0:
        return np.zeros_like(shifted)
    return np.round(255.0 * (shifted / peak) ** 0.25)


def _dump_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_field(path) -> np.ndarray:
    if not Path(path).exists():
        raise FieldFileError(f"no such file: {path}")
    return read_field_file(path)


def _load_mask(path) -> np.ndarray:
    return as_mask(_load_field(path).real != 0)


# ---------------------------------------------------------------- phantom

def _phantom_spec_from_args(args) -> experiment.PhantomSpec:
    kwargs = dict(
        image_size=args.size,
        support_size=args.support,
        kind=args.kind,
        pattern_seed=args.seed,
    )
    if args.step is not None:
        kwargs["phase_step"] = args.step
    if args.range is not None:
        kwargs["phase_range"] = args.range
    try:
        return experiment.PhantomSpec(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_phantom(args) -> int:
    spec = _phantom_spec_from_args(args)
    if spec.kind == "binary":
        truth = experiment.binary_phase_phantom(spec)
    else:
        truth = experiment.gray_phase_phantom(spec)
    mask = experiment.make_support(spec.image_size, spec.support_size)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_field_file(truth, out / "truth.prf1")
    write_field_file(mask.astype(np.float64), out / "support.prf1")
    write_pgm(out / "truth_phase.pgm", phase_preview(truth))
    _dump_json(out / "phantom.json", asdict(spec))
    print(f"wrote truth.prf1, support.prf1, truth_phase.pgm, phantom.json to {out}")
    return 0


# ---------------------------------------------------------------- forward

def cmd_forward(args) -> int:
    truth = _load_field(args.truth)
    mag = fourier.magnitude_of(fourier.forward_transform(truth))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_field_file(mag, out / "magnitude.prf1")
    write_pgm(out / "magnitude.pgm", magnitude_preview(mag))
    print(f"wrote magnitude.prf1, magnitude.pgm to {out}")
    return 0


# ---------------------------------------------------------------- retrieve

ALGORITHMS = ("hio", "hio-tv", "hio-huber")


def _penalty_from_args(alg: str, args) -> PenaltySpec:
    if alg == "hio":
        if args.ntv is not None:
            print("warning: --ntv ignored for --alg hio (no penalty)", file=sys.stderr)
        return PenaltySpec(kind="none")
    kind = "tv" if alg == "hio-tv" else "huber"
    kwargs = dict(kind=kind)
    if args.ntv is not None:
        kwargs["n_inner_steps"] = args.ntv
    if args.eps is not None:
        kwargs["epsilon"] = args.eps
    if args.delta is not None:
        kwargs["delta_rule"] = "median" if args.delta == "median" else float(args.delta)
    if args.tinit is not None:
        kwargs["t_init"] = args.tinit
    try:
        return PenaltySpec(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _retrieval_config(alg: str, args) -> retrieval.RetrievalConfig:
    try:
        return retrieval.RetrievalConfig(
            beta=args.beta,
            n_iterations=args.iters,
            seed=args.seed,
            penalty=_penalty_from_args(alg, args),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _config_echo(alg: str, config: retrieval.RetrievalConfig) -> dict:
    echo = {
        "algorithm": alg,
        "beta": config.beta,
        "n_iterations": config.n_iterations,
        "seed": config.seed,
    }
    if config.penalty.kind != "none":
        echo.update(
            penalty=config.penalty.kind,
            n_inner_steps=config.penalty.n_inner_steps,
            epsilon=config.penalty.epsilon,
            delta_rule=config.penalty.delta_rule,
            ls_alpha=config.penalty.ls_alpha,
            ls_shrink=config.penalty.ls_shrink,
            t_init=config.penalty.t_init,
        )
    return echo


def _run_algorithm(alg, magnitude, mask, config) -> retrieval.RunReport:
    if alg == "hio":
        return retrieval.run_hio(magnitude, mask, config)
    return retrieval.run_sparse_hio(magnitude, mask, config)


def cmd_retrieve(args) -> int:
    if args.alg not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {args.alg!r}")
    config = _retrieval_config(args.alg, args)
    magnitude = _load_field(args.magnitude).real
    mask = _load_mask(args.mask)
    report = _run_algorithm(args.alg, magnitude, mask, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_field_file(report.final_field, out / "recon.prf1")
    write_pgm(out / "recon_phase.pgm", phase_preview(report.final_field))
    _dump_json(
        out / "report.json",
        {
            "config": _config_echo(args.alg, config),
            "inputs": {"magnitude": str(args.magnitude), "mask": str(args.mask)},
            "penalty_trace": report.penalty_trace.tolist(),
            "fourier_residual_trace": report.fourier_residual_trace.tolist(),
            "wall_time_s": report.wall_time,
        },
    )
    print(f"wrote recon.prf1, recon_phase.pgm, report.json to {out}")
    return 0


# ---------------------------------------------------------------- sweep

def _sweep_cell(payload):
    """One (algorithm, seed) cell; runs in a worker process."""
    alg, seed, magnitude, mask, base, out_dir = payload
    config = retrieval.RetrievalConfig(
        beta=base["beta"],
        n_iterations=base["n_iterations"],
        seed=seed,
        penalty=_sweep_penalty(alg, base),
    )
    report = _run_algorithm(alg, magnitude, mask, config)
    stem = f"recon_{alg}_{seed:08d}"
    write_field_file(report.final_field, Path(out_dir) / f"{stem}.prf1")
    _dump_json(
        Path(out_dir) / f"{stem}.json",
        {
            "config": _config_echo(alg, config),
            "final_penalty": report.penalty_trace[-1],
            "final_fourier_residual": report.fourier_residual_trace[-1],
            "wall_time_s": report.wall_time,
        },
    )
    return alg, seed, report


def _sweep_penalty(alg: str, base: dict) -> PenaltySpec:
    if alg == "hio":
        return PenaltySpec(kind="none")
    kind = "tv" if alg == "hio-tv" else "huber"
    delta = base.get("delta", "median")
    spec = PenaltySpec()
    return PenaltySpec(
        kind=kind,
        n_inner_steps=base.get("n_inner_steps", spec.n_inner_steps),
        epsilon=base.get("epsilon", spec.epsilon),
        delta_rule=delta if delta == "median" else float(delta),
        t_init=base.get("t_init", spec.t_init),
    )


def cmd_sweep(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise FieldFileError(f"cannot read sweep config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid sweep config JSON: {exc}") from exc

    try:
        seeds = [int(s) for s in cfg["seeds"]]
        algorithms = list(cfg["algorithms"])
        phantom = experiment.PhantomSpec(**cfg["phantom"])
        base = dict(cfg.get("retrieval", {}))
        out_dir = Path(args.out or cfg["output_dir"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid sweep config: {exc}") from exc
    if not seeds or len(set(seeds)) != len(seeds):
        raise UsageError("seeds must be nonempty and distinct")
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {alg!r}")
    base.setdefault("beta", 0.9)
    base.setdefault("n_iterations", 500)

    out_dir.mkdir(parents=True, exist_ok=True)
    if phantom.kind == "binary":
        truth = experiment.binary_phase_phantom(phantom)
    else:
        truth = experiment.gray_phase_phantom(phantom)
    mask = experiment.make_support(phantom.image_size, phantom.support_size)
    magnitude = fourier.magnitude_of(fourier.forward_transform(truth))
    write_field_file(truth, out_dir / "truth.prf1")
    write_field_file(mask.astype(np.float64), out_dir / "support.prf1")
    write_field_file(magnitude, out_dir / "magnitude.prf1")

    cells = [
        (alg, seed, magnitude, mask, base, str(out_dir))
        for alg in algorithms
        for seed in seeds
    ]
    results = {}
    failures = {}
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {pool.submit(_sweep_cell, cell): cell for cell in cells}
            for fut, cell in futures.items():
                try:
                    alg, seed, report = fut.result()
                    results[(alg, seed)] = report
                except Exception as exc:  # noqa: BLE001 - per-cell isolation
                    failures[(cell[0], cell[1])] = str(exc)
    else:
        for cell in cells:
            try:
                alg, seed, report = _sweep_cell(cell)
                results[(alg, seed)] = report
            except Exception as exc:  # noqa: BLE001 - per-cell isolation
                failures[(cell[0], cell[1])] = str(exc)

    aggregate = {"phantom": asdict(phantom), "algorithms": {}, "failures": [
        {"algorithm": a, "seed": s, "error": msg}
        for (a, s), msg in sorted(failures.items())
    ]}
    for alg in algorithms:
        reports = [results[(alg, s)] for s in sorted(seeds) if (alg, s) in results]
        if not reports:
            continue
        kind = "huber" if alg == "hio-huber" else "tv"
        summary = experiment.run_statistics(
            reports, truth, mask,
            twin_threshold=args.twin_threshold, penalty_kind=kind,
        )
        aggregate["algorithms"][alg] = asdict(summary)
    _dump_json(out_dir / "aggregate.json", aggregate)
    print(f"sweep complete: {len(results)} cells ok, {len(failures)} failed; "
          f"aggregate.json in {out_dir}")
    return 0


# ---------------------------------------------------------------- metrics

def cmd_metrics(args) -> int:
    recon = _load_field(args.recon)
    truth = _load_field(args.truth)
    mask = _load_mask(args.mask)
    metrics = experiment.twin_correlations(recon, truth, mask, args.twin_threshold)
    delta = select_delta(recon, mask)
    payload = {
        "c_up": metrics.c_up,
        "c_twin": metrics.c_twin,
        "twin_present": metrics.twin_present,
        "phase_rmse": experiment.phase_rmse(recon, truth, mask),
        "tv_in_support": tv_value(recon, mask),
        "huber_in_support": huber_value(recon, delta, mask),
        "huber_delta": delta,
    }
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsepr",
                     description="Sparsity-assisted phase retrieval toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a pure-phase test object")
    p.add_argument("--kind", choices=("binary", "gray"), default="binary")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--support", type=int, default=60)
    p.add_argument("--step", type=float, default=None,
                   help="binary phase step in radians (default 2*pi/3)")
    p.add_argument("--range", type=float, default=None,
                   help="gray phase range in radians (default 5*pi/6)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("forward", help="synthesize Fourier magnitude data")
    p.add_argument("--truth", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("retrieve", help="run a phase-retrieval engine")
    p.add_argument("--magnitude", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--alg", choices=ALGORITHMS, default="hio-tv")
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--beta", type=float, default=0.9)
    p.add_argument("--ntv", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--delta", default=None, help="'median' or a fixed value")
    p.add_argument("--tinit", type=float, default=None,
                   help="line-search initial trial step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("sweep", help="run a seeded (algorithm x seed) grid")
    p.add_argument("--config", required=True, help="SweepConfig JSON file")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="override config output_dir")
    p.add_argument("--twin-threshold", type=float,
                   default=experiment.DEFAULT_TWIN_THRESHOLD)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="twin metrics for a reconstruction")
    p.add_argument("--recon", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--twin-threshold", type=float,
                   default=experiment.DEFAULT_TWIN_THRESHOLD)
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FieldFileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
