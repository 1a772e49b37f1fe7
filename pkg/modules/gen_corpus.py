"""gen-corpus: write a seeded corpus workspace plus a ready-to-replay chain-tower fixture."""

import logging
from pathlib import Path

import report_generator
import settings
from corpus import chain_tower_package, generate_corpus
from diagram import unfold
from modules import EXIT_CLEAN
from workspace import dump_json, lift_package_document, parse_workspace, resolve_retracted, write_bundle

logger = logging.getLogger(__name__)


def app(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = dump_json(generate_corpus(args.seed, args.max_size))
    ws_path = out / "corpus.json"
    ws_path.write_text(text, encoding="utf-8")

    ws = parse_workspace(text, ws_path)
    ws.require_clean()
    bundle = unfold(resolve_retracted(ws, "tower", "boolean"), args.depth)
    bundle_path = write_bundle(bundle, ws_path, "tower", "boolean", settings.ELEMENT_BUDGET, out / "tower.bundle.json")
    lift_path = out / "tower.lift.json"
    lift_path.write_text(dump_json(lift_package_document(chain_tower_package(bundle))), encoding="utf-8")

    payload = {
        "seed": args.seed,
        "max_size": args.max_size,
        "counts": ws.counts(),
        "files": [p.as_posix() for p in (ws_path, bundle_path, lift_path)],
    }
    print(report_generator.render(payload))
    return EXIT_CLEAN
