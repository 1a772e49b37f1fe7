import logging

import report_generator
import settings
from modules import EXIT_CLEAN, EXIT_FAILED
from monoid import refinement_counterexample
from semilattice import distributivity_counterexample
from workspace import load_workspace

logger = logging.getLogger(__name__)


def app(args) -> int:
    ws = load_workspace(args.workspace)
    payload = {"workspace": args.workspace, "counts": ws.counts()}

    distributive = {}
    for name, S in sorted(ws.semilattices.items()):
        w = distributivity_counterexample(S)
        distributive[name] = "yes" if w is None else f"no, witness {w}"
    refinement = {}
    for name, M in sorted(ws.monoids.items()):
        if M.size > settings.INPUT_LIMIT:
            refinement[name] = "skipped, too large"
            continue
        w = refinement_counterexample(M, workers=args.threads)
        refinement[name] = "yes" if w is None else f"no, witness {w}"
    if distributive:
        payload["distributive"] = distributive
    if refinement:
        payload["refinement"] = refinement

    payload["issues"] = [str(issue) for issue in ws.issues]
    payload["status"] = "clean" if ws.ok else f"{len(ws.issues)} issue(s)"
    print(report_generator.render(payload, fmt=args.format))
    return EXIT_CLEAN if ws.ok else EXIT_FAILED
