"""
retrolift: command-line front end.

    python main.py check WORKSPACE
    python main.py conc WORKSPACE LATTICE
    python main.py unfold WORKSPACE DIAGRAM --depth N [--retraction boolean|declared]
    python main.py replay BUNDLE [--functor id|conc --lift PACKAGE]
    python main.py gen-corpus --seed S --max-size K

Exit codes: 0 clean, 1 verification failures, 2 input errors.
"""

import argparse
import logging
import sys
from typing import List, Optional

import settings
from diagram import DiagramError
from lattice import LatticeError
from lifting import FUNCTORS, LiftingError, NotWellDefined, WitnessFailure
from modules import EXIT_FAILED, EXIT_INPUT
from monoid import MonoidError
from semilattice import SemilatticeError
from workspace import WorkspaceError

logger = logging.getLogger("retrolift")

VERIFICATION_ERRORS = (WitnessFailure, NotWellDefined)
INPUT_ERRORS = (WorkspaceError, LiftingError, DiagramError, LatticeError, MonoidError, SemilatticeError)


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--pdf", metavar="PATH", help="also write the ledger as a PDF table")
    p.add_argument("--out", metavar="DIR", help="directory for bundle and ledger files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retrolift", description="Finite semilattice lifting workbench")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate every object of a workspace")
    p.add_argument("workspace")
    p.add_argument("--threads", type=int, default=settings.THREADS)
    p.add_argument("--format", choices=["text", "structured"], default="text")

    p = sub.add_parser("conc", help="compute the congruence semilattice of a named lattice")
    p.add_argument("workspace")
    p.add_argument("lattice")
    p.add_argument("--max-size", type=int, default=settings.INPUT_LIMIT)
    p.add_argument("--format", choices=["text", "structured"], default="text")

    p = sub.add_parser("unfold", help="unfold a diagram and verify the unfolding")
    p.add_argument("workspace")
    p.add_argument("diagram")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--retraction", choices=["boolean", "declared"], default="boolean")
    p.add_argument("--budget", type=int, default=settings.ELEMENT_BUDGET)
    _add_output_flags(p)

    p = sub.add_parser("replay", help="replay the lifting construction over a bundle")
    p.add_argument("bundle")
    p.add_argument("--functor", choices=sorted(FUNCTORS), default="id")
    p.add_argument("--lift", metavar="PACKAGE", help="lift package, required for --functor conc")
    _add_output_flags(p)

    p = sub.add_parser("gen-corpus", help="write a deterministic corpus workspace")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--depth", type=int, default=3, help="depth of the bundled chain-tower fixture")
    p.add_argument("--out", metavar="DIR", default="corpus")
    return parser


def dispatch(args) -> int:
    if args.command == "check":
        import modules.check as check_module
        return check_module.app(args)
    if args.command == "conc":
        import modules.conc as conc_module
        return conc_module.app(args)
    if args.command == "unfold":
        import modules.unfold as unfold_module
        return unfold_module.app(args)
    if args.command == "replay":
        import modules.replay as replay_module
        return replay_module.app(args)
    import modules.gen_corpus as corpus_module
    return corpus_module.app(args)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return dispatch(args)
    except VERIFICATION_ERRORS as exc:
        print(f"verification failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except INPUT_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
