import json

import pytest

from corpus import chain_tower_package
from diagram import promote_to_retracted, unfold
from lifting import LiftPackageInvalid, replay
from workspace import (
    BundleMismatch,
    ParseError,
    ValidationError,
    WorkspaceError,
    dump_json,
    lift_package_document,
    load_lift_package,
    load_workspace,
    parse_workspace,
    rebuild_bundle,
    resolve_retracted,
    write_bundle,
)


def test_valid_workspace_parses_clean(workspace_doc):
    ws = parse_workspace(json.dumps(workspace_doc))
    assert ws.ok, [str(i) for i in ws.issues]
    assert ws.counts() == {
        "semilattices": 3,
        "lattices": 3,
        "monoids": 1,
        "homs": 4,
        "diagrams": 4,
        "retracted_diagrams": 1,
    }
    assert ws.get("semilattices", "chain3").size == 3


def test_bad_json_reports_position():
    with pytest.raises(ParseError) as info:
        parse_workspace('{\n  "semilattices": {,}\n}')
    assert info.value.lineno == 2


def test_unknown_section_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_workspace('{"posets": {}}')


def test_dangling_reference_is_a_parse_error(workspace_doc):
    workspace_doc["homs"]["f"]["target"] = "bool3"
    with pytest.raises(ParseError, match="bool3"):
        parse_workspace(json.dumps(workspace_doc))


def test_broken_join_becomes_an_issue(workspace_doc):
    workspace_doc["semilattices"]["bad"] = {"size": 3, "zero": 0, "join": [[0, 1, 2], [1, 1, 0], [2, 0, 2]]}
    ws = parse_workspace(json.dumps(workspace_doc))
    assert not ws.ok
    (issue,) = ws.issues
    assert issue.section == "semilattices" and issue.name == "bad"
    assert "NotAssociative" in issue.message
    with pytest.raises(ValidationError):
        ws.get("semilattices", "bad")
    with pytest.raises(ValidationError):
        ws.require_clean()


def test_hom_between_different_kinds_becomes_an_issue(workspace_doc):
    workspace_doc["homs"]["mixed"] = {"source": "chain2", "target": "L3", "map": [0, 2]}
    ws = parse_workspace(json.dumps(workspace_doc))
    assert [i.name for i in ws.issues] == ["mixed"]


def test_unknown_name_is_a_workspace_error(workspace_doc):
    ws = parse_workspace(json.dumps(workspace_doc))
    with pytest.raises(WorkspaceError):
        ws.get("diagrams", "nope")


def test_declared_retraction(workspace_doc):
    ws = parse_workspace(json.dumps(workspace_doc))
    rd = resolve_retracted(ws, "r3", "declared")
    assert rd.mu[0].map.tolist() == [0, 1, 2, 2]
    assert resolve_retracted(ws, "c3").hat.objects[0].size == 4


def test_bundle_file_rebuilds(workspace_file, tmp_path):
    ws = load_workspace(workspace_file)
    bundle = unfold(resolve_retracted(ws, "c3"), 2)
    path = write_bundle(bundle, workspace_file, "c3", "boolean", 1024, tmp_path / "out" / "c3.bundle.json")
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["recipe"]["workspace"] == "../ws.json"
    assert rebuild_bundle(path).fingerprint() == bundle.fingerprint()

    doc["fingerprint"] = "0" * 64
    path.write_text(dump_json(doc), encoding="utf-8")
    with pytest.raises(BundleMismatch):
        rebuild_bundle(path)


def test_lift_package_loads_and_replays(two_chain_diagram, tmp_path):
    bundle = unfold(promote_to_retracted(two_chain_diagram), 3)
    path = tmp_path / "tower.lift.json"
    path.write_text(dump_json(lift_package_document(chain_tower_package(bundle))), encoding="utf-8")
    run = replay(load_lift_package(path, bundle))
    assert run.certified


def test_incomplete_lift_package(two_chain_diagram, tmp_path):
    bundle = unfold(promote_to_retracted(two_chain_diagram), 2)
    doc = lift_package_document(chain_tower_package(bundle))
    del doc["lift"]["eta"]
    path = tmp_path / "broken.lift.json"
    path.write_text(dump_json(doc), encoding="utf-8")
    with pytest.raises(LiftPackageInvalid):
        load_lift_package(path, bundle)
