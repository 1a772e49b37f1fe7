"""unfold: build the unfolding of a diagram, write its bundle file and verify every identity."""

import logging
from pathlib import Path

import report_generator
import settings
from diagram import BudgetExceeded, unfold, unfolded_arrows_are_embeddings, verify_unfolding
from modules import EXIT_CLEAN, EXIT_FAILED
from workspace import load_workspace, resolve_retracted, write_bundle

logger = logging.getLogger(__name__)


def app(args) -> int:
    if args.depth > settings.MAX_DEPTH:
        raise BudgetExceeded(f"depth {args.depth} is above the maximum of {settings.MAX_DEPTH}", witness=(args.depth,))
    ws = load_workspace(args.workspace)
    rd = resolve_retracted(ws, args.diagram, args.retraction)
    bundle = unfold(rd, args.depth, args.budget)
    ledger = verify_unfolding(bundle)

    out = Path(args.out or ".")
    bundle_path = write_bundle(bundle, args.workspace, args.diagram, args.retraction, args.budget, out / f"{args.diagram}.bundle.json")
    ledger_path = report_generator.write_ledger_csv(ledger, out / f"{args.diagram}.unfold.csv")
    payload = {
        "diagram": args.diagram,
        "depth": bundle.depth,
        "retraction": args.retraction,
        "sizes": {f"node {X}": sizes for X, sizes in bundle.sizes().items()},
        "unfolded_embeddings": unfolded_arrows_are_embeddings(bundle),
        "fingerprint": bundle.fingerprint(),
        "bundle": bundle_path.as_posix(),
        "ledger_file": ledger_path.as_posix(),
    }
    if args.pdf:
        report_generator.write_ledger_pdf(ledger, args.pdf, title=f"Unfolding of {args.diagram} to depth {bundle.depth}")
    print(report_generator.render(payload, ledger, args.format))
    return EXIT_CLEAN if ledger.ok else EXIT_FAILED
