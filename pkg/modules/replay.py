"""replay: run the lifting construction over a bundle and report whether F R ~ D is certified."""

import logging
from pathlib import Path

import report_generator
from lifting import LiftPackageInvalid, identity_lift, replay
from modules import EXIT_CLEAN, EXIT_FAILED
from workspace import load_lift_package, rebuild_bundle

logger = logging.getLogger(__name__)


def app(args) -> int:
    bundle = rebuild_bundle(args.bundle)
    if args.functor == "conc":
        if not args.lift:
            raise LiftPackageInvalid("a conc replay needs a lift package (--lift)")
        lifted = load_lift_package(args.lift, bundle)
    else:
        lifted = identity_lift(bundle)
    run = replay(lifted)
    ledger = run.ledger

    if run.certified:
        result = "certified: F R is isomorphic to the diagram"
    elif ledger.ok:
        result = f"relative to depth {run.depth}: the tower did not stabilize"
    else:
        result = f"failed: {len(ledger.failures())} ledger row(s)"
    payload = {
        "bundle": args.bundle,
        "functor": args.functor,
        "depth": run.depth,
        "stabilized": run.stabilized,
        "stabilization": {f"node {X}": n0 for X, n0 in sorted(run.n0.items())},
        "scope": run.scope,
        "result": result,
    }
    if args.out:
        stem = Path(args.bundle).name.split(".")[0]
        path = report_generator.write_ledger_csv(ledger, Path(args.out) / f"{stem}.replay-{args.functor}.csv")
        payload["ledger_file"] = path.as_posix()
    if args.pdf:
        report_generator.write_ledger_pdf(ledger, args.pdf, title=f"Replay through {args.functor}", notes=[result])
    print(report_generator.render(payload, ledger, args.format))
    return EXIT_CLEAN if ledger.ok else EXIT_FAILED
