"""
Command-line front end for the Schmidt witness toolkit.

Commands:
    frames   build and verify a SIC or MUB frame file
    certify  certify the Schmidt number of a state file
    sweep    isotropic-state sweep as a CSV table
    probe    sampled k-positivity check of a frame map

Exit codes: 0 success, 1 state validation failure, 2 construction or
coverage failure, 3 I/O or parse failure.

Run from project root: python -m api.cli <command> ...
"""

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

# Add project root to path for imports
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from api.models.report_models import CertificationStrategy, MatrixFile, SweepRow
from api.services import certify, frames, kmaps
from api.services.errors import (
    DimensionMismatch,
    FrameError,
    FrameFileError,
    FramesUnavailable,
    NotHermitian,
    ParameterOutOfRange,
    SearchFailed,
    StateValidationError,
)
from api.services.frame_store import FrameStore
from api.services.settings import get_settings

EXIT_OK = 0
EXIT_STATE = 1
EXIT_CONSTRUCTION = 2
EXIT_IO = 3

SWEEP_COLUMNS = list(SweepRow.model_fields.keys())


# ============================================================================
# Input helpers
# ============================================================================

def read_matrix_file(path: str) -> MatrixFile:
    """
    Parse a MatrixFile document.

    Raises:
        FrameFileError: If the file cannot be read or does not match the schema
    """
    try:
        return MatrixFile.model_validate_json(Path(path).read_text())
    except OSError as e:
        raise FrameFileError(f"cannot read matrix file: {e}", path)
    except ValidationError as e:
        raise FrameFileError(f"malformed matrix file: {e.errors()[0]['msg']}", path)


def read_state(path: str) -> np.ndarray:
    """Bipartite density matrix from a MatrixFile (validated later by certification)."""
    document = read_matrix_file(path)
    if document.space != 'bipartite':
        raise FrameFileError("state files must declare space 'bipartite'", path)
    return document.to_matrix()


def resolve_frames(spec: Sequence[str], d: int, kind: Optional[str] = None) -> List[frames.Frame]:
    """
    Frames from `--frames`: 'auto' provisions through the cache, anything else is a frame file.

    Without a forced kind, 'auto' yields every kind available for d (MUBs for
    prime d, SIC search for d <= 8).

    Raises:
        FramesUnavailable: If auto provisioning has no frame for d, or a frame file
            is for another dimension
        FrameFileError / OverlapViolation: If a frame file is bad
    """
    if list(spec) == ['auto']:
        store = FrameStore()
        return store.provide_all(d) if kind is None else [store.provide(d, kind)]
    loaded = [frames.load_frame(path) for path in spec]
    for path, frame in zip(spec, loaded):
        if frame.d != d:
            raise FramesUnavailable(f"Frame file {path} is for d={frame.d}, expected d={d}")
    if kind is not None:
        loaded = [frame for frame in loaded if frame.kind == kind]
        if not loaded:
            raise FramesUnavailable(f"No {kind} frame among the supplied files")
    return loaded


def seed_list(count: int) -> List[int]:
    """Identity rotations plus `count` random rotation seeds."""
    return [0] + list(range(1, count + 1))


def parse_grid(args: argparse.Namespace) -> List[float]:
    if args.grid:
        try:
            return [float(x) for x in args.grid.split(',') if x.strip()]
        except ValueError as e:
            raise ParameterOutOfRange(f"bad --grid: {e}")
    if args.steps < 1:
        raise ParameterOutOfRange(f"--steps must be >= 1 (got {args.steps})")
    return [float(p) for p in np.linspace(args.p_min, args.p_max, args.steps)]


def write_output(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    print(f"✓ Wrote {out}")


# ============================================================================
# Commands
# ============================================================================

def cmd_frames(args: argparse.Namespace) -> int:
    """Build, verify and write a frame file."""
    settings = get_settings()
    if args.kind == 'mub':
        frame = frames.mub_prime(args.d)
    else:
        restarts = args.restarts or settings.sic_restarts
        print(f"Searching SIC fiducial for d={args.d} ({restarts} restarts)...")
        try:
            fiducial = frames.find_sic_fiducial(args.d, seed=args.seed, restarts=restarts)
        except SearchFailed as e:
            print(f"✗ Search failed, best residual {e.best_residual:.3e}")
            raise
        frame = frames.wh_sic_from_fiducial(fiducial)

    diagnostics = frames.verify_frames(frame)
    for name, value in diagnostics.deviations.items():
        mark = '✓' if value <= diagnostics.tol else '✗'
        print(f"  {mark} {name}: {value:.3e}")
    if not diagnostics.passed:
        print(f"✗ {frame.kind} frame for d={args.d} failed verification")
        return EXIT_CONSTRUCTION

    out = Path(args.out or f"{frame.kind}-d{frame.d}.json")
    frames.save_frame(frame, out)
    print(f"✓ Wrote {frame.kind} frame (d={frame.d}, size {diagnostics.size}) to {out}")
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    """Certify the Schmidt number of a state file and emit the report."""
    rho = read_state(args.state)
    d = certify.local_dimension(rho)
    strategy = CertificationStrategy(
        rotation_seeds=seed_list(args.seeds if args.seeds is not None else get_settings().rotation_seeds),
        frames=resolve_frames(args.frames, d),
        upper_samples=args.upper_samples,
        sampler_seed=args.sampler_seed,
    )
    report = certify.certify_schmidt_number(rho, args.max_k, strategy)

    certified = [e for e in report.evidence if e.certified]
    print(f"{'✓' if certified else '✗'} {report.verdict} "
          f"({len(certified)} of {len(report.evidence)} evidence cells certify)", file=sys.stderr)
    write_output(report.model_dump_json(indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Isotropic sweep as CSV."""
    frame = resolve_frames(args.frames, args.d, args.kind)[0]
    rows = certify.isotropic_sweep(
        args.d, args.k, parse_grid(args), frame, seed_list(args.seeds)
    )

    handle = open(args.out, 'w', newline='') if args.out else sys.stdout
    try:
        writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: repr(v) if isinstance(v, float) else v
                             for key, v in row.model_dump().items()})
    finally:
        if args.out:
            handle.close()
            print(f"✓ Wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_probe(args: argparse.Namespace) -> int:
    """Sampled k-positivity check of a frame map."""
    frame = resolve_frames(args.frames, args.d, args.kind)[0]
    map_ = kmaps.build_map(frame, args.k, args.rotation_seed)
    result = kmaps.probe_k_positivity(map_, args.k, args.trials, args.seed)

    print(f"{'✓' if result.positive else '✗'} min eigenvalue: {result.min_eigenvalue:.6e}")
    print(f"{'✓' if result.purity_ok else '✗'} max purity: {result.max_purity:.12f} "
          f"(bound {result.purity_bound:.12f})")
    return EXIT_OK if result.passed else EXIT_CONSTRUCTION


# ============================================================================
# Entry point
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snwit",
        description="k-positive maps and Schmidt-number witnesses from SIC-POVMs and MUBs"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("frames", help="build and verify a frame file")
    p.add_argument("--kind", choices=["sic", "mub"], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="fiducial search seed")
    p.add_argument("--restarts", type=int, default=None, help="fiducial search restart budget")
    p.add_argument("--out", default=None, help="output path (default <kind>-d<d>.json)")
    p.set_defaults(handler=cmd_frames)

    p = commands.add_parser("certify", help="certify the Schmidt number of a state file")
    p.add_argument("--state", required=True, help="MatrixFile with a bipartite density matrix")
    p.add_argument("--max-k", type=int, default=None, help="largest order tested (default d-1)")
    p.add_argument("--frames", nargs="+", default=["auto"], help="'auto' or frame files")
    p.add_argument("--seeds", type=int, default=None, help="random rotation seeds besides identity")
    p.add_argument("--upper-samples", type=int, default=0, help="S_k samples for the distance upper bound")
    p.add_argument("--sampler-seed", type=int, default=1)
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(handler=cmd_certify)

    p = commands.add_parser("sweep", help="isotropic-state sweep as CSV")
    p.add_argument("--family", choices=["isotropic"], default="isotropic")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", choices=["sic", "mub"], default="mub", help="witness kind")
    p.add_argument("--frames", nargs="+", default=["auto"], help="'auto' or frame files")
    p.add_argument("--grid", default=None, help="comma-separated p values")
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--seeds", type=int, default=0, help="random rotation seeds besides identity")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(handler=cmd_sweep)

    p = commands.add_parser("probe", help="sampled k-positivity check")
    p.add_argument("--kind", choices=["sic", "mub"], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--rotation-seed", type=int, default=0)
    p.add_argument("--seed", type=int, default=1, help="probe sampling seed")
    p.add_argument("--frames", nargs="+", default=["auto"], help="'auto' or frame files")
    p.set_defaults(handler=cmd_probe)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=get_settings().log_level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.handler(args)
    except StateValidationError as e:
        print(f"✗ Invalid state ({e.invariant}): {e}", file=sys.stderr)
        return EXIT_STATE
    except NotHermitian as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_STATE
    except (FrameFileError, OSError) as e:
        print(f"✗ I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except DimensionMismatch as e:
        print(f"✗ Dimension mismatch: {e}", file=sys.stderr)
        return EXIT_STATE
    except (FrameError, ParameterOutOfRange) as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
