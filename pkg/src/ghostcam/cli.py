"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 I/O or file-format error,
4 numeric/degenerate error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateError, FileFormatError
from .forward import read_trace, write_trace
from .metrics import RegionMask, compute_snr, mask_from_object
from .patterns import FillMode, load_patterns, save_patterns
from .pipeline import accumulate_trace
from .reconstruct import (
    CorrelationAccumulator,
    finalize_g2,
    read_image_csv,
    write_display_pgm,
    write_image_csv,
)
from . import pgm
from .scenarios import (
    SCENARIOS,
    ScenarioConfig,
    build_object,
    build_scenario,
    load_config,
    resolution_sweep,
    run_convergence,
    run_scenario,
)

log = logging.getLogger("ghostcam")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


def _int_list(text):
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="scenario config file (INI)")
    parser.add_argument("--seed", type=int, default=default, help="pattern seed")
    parser.add_argument("--noise-seed", type=int, default=default, help="channel noise seed")
    parser.add_argument("--frames", type=int, default=default, help="number of patterns")
    parser.add_argument("--out", type=Path, default=default, help="output file or directory")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghostcam", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-patterns", help="write a pattern file")
    _global_flags(p, suppress=True)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--fill-ratio", type=float)
    p.add_argument("--fill-mode", choices=[m.value for m in FillMode])

    p = sub.add_parser("simulate", help="simulate a detector trace")
    _global_flags(p, suppress=True)
    p.add_argument("--scenario", choices=SCENARIOS)

    p = sub.add_parser("reconstruct", help="correlate a trace with its patterns")
    _global_flags(p, suppress=True)
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--patterns", type=Path, help="pattern file; default regenerates from the config")
    p.add_argument("--snapshot", action="store_true", help="also write accumulator.npz")

    p = sub.add_parser("snr", help="SNR of an image CSV")
    _global_flags(p, suppress=True)
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--mask", type=Path, help="P5 mask: >= threshold is signal; default uses the config object")
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("run", help="run a named scenario and write a bundle")
    _global_flags(p, suppress=True)
    p.add_argument("--scenario", choices=SCENARIOS)

    p = sub.add_parser("converge", help="SNR against number of patterns")
    _global_flags(p, suppress=True)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--n-grid", type=_int_list)
    p.add_argument("--seeds", type=_int_list)

    p = sub.add_parser("sweep-resolution", help="rerun at integer multiples of the grid size")
    _global_flags(p, suppress=True)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--scales", type=_int_list, default=[1, 2])
    return parser


def _config(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if getattr(args, "scenario", None):
        changes["scenario_id"] = args.scenario
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.noise_seed is not None:
        changes["noise_seed"] = args.noise_seed
    if args.frames is not None:
        changes["frames"] = args.frames
    if args.out is not None:
        changes["out"] = str(args.out)
    for key in ("width", "height", "fill_ratio", "fill_mode"):
        value = getattr(args, key, None)
        if value is not None:
            changes[key] = value
    return config.replace(**changes) if changes else config


def _require_out(args, default):
    return Path(args.out) if args.out is not None else Path(default)


def cmd_generate_patterns(args):
    config = _config(args)
    path = _require_out(args, "patterns.pat")
    save_patterns(path, config.pattern_spec(), config.n_frames)
    print(f"wrote {config.n_frames} patterns to {path}")


def cmd_simulate(args):
    config = _config(args)
    trace = build_scenario(config).simulate(config.n_frames, threads=args.threads)
    path = _require_out(args, "trace.csv")
    write_trace(path, trace)
    print(f"wrote {len(trace)} samples to {path}")


def cmd_reconstruct(args):
    config = _config(args)
    trace = read_trace(args.trace)
    out = _require_out(args, "reconstruction")
    out.mkdir(parents=True, exist_ok=True)
    if args.patterns:
        stored = load_patterns(args.patterns)
        if stored.count < len(trace):
            raise FileFormatError(f"{args.patterns}: {stored.count} frames for a {len(trace)}-sample trace")
        acc = CorrelationAccumulator(*stored.spec.shape, fingerprint=trace.spec_fingerprint)
        acc.ingest_block(stored.frames[: len(trace)], trace.samples)
    else:
        spec = config.pattern_spec()
        if "patterns" in trace.metadata:
            spec = spec.replace(**trace.metadata["patterns"])
        acc = accumulate_trace(spec, trace.samples, threads=args.threads, fingerprint=trace.spec_fingerprint)
    image = finalize_g2(acc)
    write_image_csv(out / "g2.csv", image.g2)
    write_image_csv(out / "fluct.csv", image.fluct)
    display = write_display_pgm(out / "g2.pgm", image.g2)
    write_display_pgm(out / "fluct.pgm", image.fluct)
    if args.snapshot:
        acc.save(out / "accumulator.npz")
    print(f"reconstructed {image.n} frames into {out} ({display.n_undefined} undefined g2 pixels)")


def cmd_snr(args):
    config = _config(args)
    image = read_image_csv(args.image)
    threshold = args.threshold if args.threshold is not None else config.threshold
    if args.mask:
        pixels, maxval = pgm.read_pgm(args.mask)
        signal = pixels.astype(np.float64) / maxval >= threshold
        mask = RegionMask(signal, ~signal)
    else:
        mask = mask_from_object(build_object(config.replace(width=image.shape[1], height=image.shape[0])), threshold)
    report = compute_snr(image, mask)
    sys.stdout.write(report.to_text())
    if args.out is not None:
        Path(args.out).write_text(report.to_csv())


def cmd_run(args):
    config = _config(args)
    result = run_scenario(config, out=_require_out(args, f"runs/{config.scenario_id}"), threads=args.threads)
    db = result.snr.snr_db
    print(f"{config.scenario_id}: snr_db={'undefined' if db is None else f'{db:.2f}'} "
          f"fidelity={result.fidelity:.4f} -> {result.out_dir}")


def cmd_converge(args):
    config = _config(args)
    curves = run_convergence(
        config,
        out=_require_out(args, f"runs/{config.scenario_id}_convergence"),
        n_grid=args.n_grid,
        seeds=args.seeds,
        threads=args.threads,
    )
    for name, curve in curves.items():
        pts = ", ".join(f"{n}:{m:.2f}" for n, m in curve.points)
        print(f"{name}: {pts}")


def cmd_sweep(args):
    config = _config(args)
    results = resolution_sweep(config, args.scales, out=_require_out(args, f"runs/{config.scenario_id}_sweep"),
                               threads=args.threads)
    for s, r in zip(args.scales, results):
        print(f"x{s}: snr_db={r.snr.snr_db} fidelity={r.fidelity:.4f}")


COMMANDS = {
    "generate-patterns": cmd_generate_patterns,
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "snr": cmd_snr,
    "run": cmd_run,
    "converge": cmd_converge,
    "sweep-resolution": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except DegenerateError as exc:
        print(f"ghostcam: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FileFormatError, OSError) as exc:
        print(f"ghostcam: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"ghostcam: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
