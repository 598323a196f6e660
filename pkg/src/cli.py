"""tonebif command line: analyze, fit, simulate, verify and run."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from src.artifacts import (
    SpectralArtifact,
    read_json,
    write_json,
    write_lines,
    write_trace,
)
from src.audio.wav import read_wav, write_wav
from src.config import get_default_sample_rate, get_log_level, get_partial_count
from src.errors import ToneBifError
from src.models import ControllerModel
from src.stages import analyze_stage, envelope_stage, fit_stage, simulate_stage, verify_stage

log = logging.getLogger("tonebif")


def _sibling(path: Path, name: str) -> Path:
    return path.parent / name


def partial_count(value: str) -> Optional[int]:
    """argparse type for --partials: a positive count, or "auto" for threshold detection."""
    if value == "auto":
        return None
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {value!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"partial count must be at least 1, got {n}")
    return n


def cmd_analyze(args: argparse.Namespace) -> int:
    buffer = read_wav(args.input)
    artifact = analyze_stage(buffer, n=args.partials, source=args.input)
    write_json(artifact, args.out)
    for peak in artifact.peaks:
        print(f"  partial {peak.index}: {peak.frequency:10.3f} Hz  d={peak.amplitude:.6f}")
    print(f"  d0={artifact.d0:.6f}  rho_sum={artifact.spectral.rho_sum:.6f}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    buffer = read_wav(args.input)
    if args.spectral:
        spectral = read_json(args.spectral, SpectralArtifact)
    else:
        spectral = analyze_stage(buffer, n=args.partials, source=args.input)
    envelope = envelope_stage(
        buffer, args.np, fundamental=spectral.peaks[0].frequency, source=args.input
    )
    model = fit_stage(spectral, envelope, epsilon=args.epsilon)

    out = Path(args.out)
    write_json(model, out)
    fitted = envelope.model_copy(update={"plan": model.plan})
    write_json(fitted, args.envelope or _sibling(out, "envelope.json"))

    print(f"  (alpha, a, b) = ({model.alpha:.6g}, {model.a}, {model.b:.6g})  rho0={model.rho0:.6g}")
    print(f"  {'t [s]':>12}  {'mu':>14}")
    for step in model.schedule.steps:
        print(f"  {step.t:12.6f}  {step.mu:14.6g}")
    print(f"  {len(model.schedule.steps)} schedule steps")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    model = read_json(args.model, ControllerModel)
    rate = args.rate or get_default_sample_rate()
    result = simulate_stage(model, rate, full=args.full)

    out = Path(args.out)
    write_wav(result.buffer, out)
    if args.trace:
        write_trace(
            args.trace, series=result.series, trajectory=result.trajectory, spectral=model.spectral
        )
    report_path = Path(args.report) if args.report else _sibling(out, "report.json")
    write_json(result.report, report_path)
    write_lines(result.report.lines, report_path.with_suffix(".txt"))

    for line in result.report.lines:
        print(f"  {line}")
    if result.leaf_residual is not None:
        print(f"  leaf residual {result.leaf_residual:.3e}")
    if result.report.hysteresis.found:
        print("  hysteresis cycle detected")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    original = read_wav(args.original)
    synthesized = read_wav(args.synthesized)
    model = read_json(args.model, ControllerModel) if args.model else None
    report = verify_stage(original, synthesized, args.partials, model=model)
    write_json(report, args.out)

    print(f"  {'i':>3}  {'original':>10}  {'synth':>10}  {'delta':>10}")
    for i, (a, b, d) in enumerate(
        zip(report.ratios_original, report.ratios_synthesized, report.deltas), start=1
    ):
        print(f"  {i:>3}  {a:10.4f}  {b:10.4f}  {d:+10.4f}")
    if report.warning:
        print(f"  ⚠️ {report.warning}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    from src.graphs.tone_pipeline import run_tone_pipeline

    state = run_tone_pipeline(
        args.input,
        args.outdir,
        partials=args.partials,
        np_samples=args.np,
        epsilon=args.epsilon,
        full=args.full,
        sample_rate=args.rate,
    )
    if state.error:
        print(f"❌ {state.error}", file=sys.stderr)
    return state.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tonebif", description="Tone coloring with Eulerian Hopf bifurcation control."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Partial peaks and d0 of a recorded note.")
    p.add_argument("input")
    p.add_argument(
        "--partials",
        type=partial_count,
        default=get_partial_count(),
        help="Partial count, or 'auto' to keep every partial above the threshold.",
    )
    p.add_argument("--out", default="spectral.json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="Fit constants and the mu schedule to a note.")
    p.add_argument("input")
    p.add_argument("--partials", type=partial_count, default=get_partial_count())
    p.add_argument("--spectral", default=None, help="Reuse a spectral.json from analyze.")
    p.add_argument("--np", type=int, default=None, help="Envelope peak distance in samples.")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--out", default="model.json")
    p.add_argument("--envelope", default=None, help="Envelope artifact path (next to --out by default).")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="Integrate a model and write the synthesized note.")
    p.add_argument("model")
    p.add_argument("--rate", type=int, default=None)
    p.add_argument("--full", action="store_true", help="Integrate all 2(n+1) coordinates.")
    p.add_argument("--out", default="out.wav")
    p.add_argument("--trace", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="Compare partial ratios of two notes.")
    p.add_argument("original")
    p.add_argument("synthesized")
    p.add_argument("--partials", type=int, default=get_partial_count())
    p.add_argument("--model", default=None, help="Also check the envelope and modulation bound.")
    p.add_argument("--out", default="verify.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="analyze -> fit -> simulate -> verify in one go.")
    p.add_argument("input")
    p.add_argument("--outdir", required=True)
    p.add_argument("--partials", type=partial_count, default=get_partial_count())
    p.add_argument("--np", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--rate", type=int, default=None)
    p.add_argument("--full", action="store_true")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else get_log_level(),
        format="%(asctime)s %(levelname)s %(name)s - %(message)s",
    )
    try:
        return args.func(args)
    except ToneBifError as e:
        log.error("❌ %s", e)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
