"""
JSON workspaces: named algebras, homomorphisms and diagrams in one file.

Sections:
  semilattices        {"size": k, "zero": i, "unit": i|null, "join": [[...]]}
  lattices            {"size": k, "join": [[...]], "meet": [[...]]}
  monoids             {"size": k, "zero": i, "add": [[...]]}
  homs                {"source": name, "target": name, "map": [...]}
  diagrams            {"poset": {"nodes": k, "covers": [[i, j], ...]},
                       "objects": {"0": name, ...}, "arrows": {"0->1": hom, ...}}
  retracted_diagrams  {"base": diagram, "hat": diagram, "eps": {"0": hom}, "mu": {"0": hom}}

Unresolvable names are parse errors. Objects that fail their axioms are
collected as issues so one check run reports all of them.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from diagram import (
    DiagramError,
    IndexPoset,
    RetractedDiagram,
    SemilatticeDiagram,
    UnfoldingBundle,
    promote_to_retracted,
    unfold,
    validate_diagram,
)
from lattice import FiniteLattice, LatticeError, LatticeHom, con_lattice
from lifting import ConcFunctor, LiftedUnfolding, LiftPackageInvalid
from monoid import FiniteCommutativeMonoid, MonoidError, MonoidHom
from semilattice import FiniteJoinSemilattice, SemilatticeError, SemilatticeHom, boolean_retraction

logger = logging.getLogger(__name__)

SECTIONS = ("semilattices", "lattices", "monoids", "homs", "diagrams", "retracted_diagrams")
ALGEBRA_SECTIONS = ("semilattices", "lattices", "monoids")
BUILD_ERRORS = (SemilatticeError, LatticeError, MonoidError, DiagramError, ValueError, TypeError, KeyError)


class WorkspaceError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParseError(WorkspaceError):
    def __init__(self, message, lineno: Optional[int] = None, colno: Optional[int] = None):
        where = f" (line {lineno}, column {colno})" if lineno is not None else ""
        super().__init__(message + where, witness=(lineno, colno))
        self.lineno = lineno
        self.colno = colno


class ValidationError(WorkspaceError):
    def __init__(self, message, section: str, name: str):
        super().__init__(f"{section} {name!r}: {message}", witness=(section, name))
        self.section = section
        self.name = name


class BundleMismatch(WorkspaceError):
    pass


@dataclass(frozen=True)
class WorkspaceIssue:
    section: str
    name: str
    message: str

    def __str__(self):
        return f"{self.section} {self.name!r}: {self.message}"


@dataclass
class Workspace:
    path: Optional[Path] = None
    semilattices: Dict[str, FiniteJoinSemilattice] = field(default_factory=dict)
    lattices: Dict[str, FiniteLattice] = field(default_factory=dict)
    monoids: Dict[str, FiniteCommutativeMonoid] = field(default_factory=dict)
    homs: Dict[str, object] = field(default_factory=dict)
    diagrams: Dict[str, SemilatticeDiagram] = field(default_factory=dict)
    retracted_diagrams: Dict[str, RetractedDiagram] = field(default_factory=dict)
    issues: List[WorkspaceIssue] = field(default_factory=list)
    declared: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.issues

    def counts(self) -> Dict[str, int]:
        return {section: len(self.declared.get(section, [])) for section in SECTIONS}

    def require_clean(self):
        if self.issues:
            first = self.issues[0]
            raise ValidationError(first.message, first.section, first.name)

    def get(self, section: str, name: str):
        table = getattr(self, section)
        if name not in table:
            if name in self.declared.get(section, []):
                broken = next(i for i in self.issues if i.section == section and i.name == name)
                raise ValidationError(broken.message, section, name)
            raise WorkspaceError(f"no {section[:-1].replace('_', ' ')} named {name!r}")
        return table[name]


# --- parsing ---


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return _loads(text)


def _loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    return doc


def edge_key(key: str):
    try:
        i, j = key.split("->")
        return int(i), int(j)
    except ValueError:
        raise ParseError(f"arrow key {key!r} is not of the form 'i->j'") from None


def _node_table(entry, field_name: str, owner: str) -> Dict[int, str]:
    raw = entry.get(field_name, {})
    if isinstance(raw, list):
        return dict(enumerate(raw))
    try:
        return {int(k): v for k, v in raw.items()}
    except (AttributeError, ValueError):
        raise ParseError(f"{owner}: {field_name} must map node numbers to names") from None


def _resolve_references(doc: dict):
    names: Dict[str, str] = {}
    for section in SECTIONS:
        for name in doc.get(section, {}):
            if name in names:
                raise ParseError(f"name {name!r} is declared in both {names[name]} and {section}")
            names[name] = section

    def need(owner, ref, sections):
        if not isinstance(ref, str) or names.get(ref) not in sections:
            wanted = " or ".join(s[:-1] for s in sections)
            raise ParseError(f"{owner} refers to {ref!r}, which is not a declared {wanted}")

    for name, entry in doc.get("homs", {}).items():
        need(f"hom {name!r}", entry.get("source"), ALGEBRA_SECTIONS)
        need(f"hom {name!r}", entry.get("target"), ALGEBRA_SECTIONS)
    for name, entry in doc.get("diagrams", {}).items():
        for ref in _node_table(entry, "objects", f"diagram {name!r}").values():
            need(f"diagram {name!r}", ref, ALGEBRA_SECTIONS)
        for key, ref in entry.get("arrows", {}).items():
            edge_key(key)
            need(f"diagram {name!r}", ref, ("homs",))
    for name, entry in doc.get("retracted_diagrams", {}).items():
        need(f"retracted diagram {name!r}", entry.get("base"), ("diagrams",))
        need(f"retracted diagram {name!r}", entry.get("hat"), ("diagrams",))
        for part in ("eps", "mu"):
            for ref in _node_table(entry, part, f"retracted diagram {name!r}").values():
                need(f"retracted diagram {name!r}", ref, ("homs",))


def parse_workspace(text: str, path: Optional[Path] = None) -> Workspace:
    doc = _loads(text)
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise ParseError(f"unknown section {unknown[0]!r}")
    _resolve_references(doc)
    ws = Workspace(path=path, declared={section: list(doc.get(section, {})) for section in SECTIONS})

    def attempt(section, name, build):
        try:
            return build()
        except BUILD_ERRORS as exc:
            ws.issues.append(WorkspaceIssue(section, name, f"{type(exc).__name__}: {exc}"))
            return None

    for name, e in doc.get("semilattices", {}).items():
        S = attempt("semilattices", name, lambda: _semilattice(e, name))
        if S is not None:
            ws.semilattices[name] = S
    for name, e in doc.get("lattices", {}).items():
        L = attempt("lattices", name, lambda: _lattice(e, name))
        if L is not None:
            ws.lattices[name] = L
    for name, e in doc.get("monoids", {}).items():
        M = attempt("monoids", name, lambda: _monoid(e, name))
        if M is not None:
            ws.monoids[name] = M

    for name, e in doc.get("homs", {}).items():
        h = attempt("homs", name, lambda: _hom(ws, e))
        if h is not None:
            ws.homs[name] = h

    for name, e in doc.get("diagrams", {}).items():
        d = attempt("diagrams", name, lambda: _diagram(ws, e, name))
        if d is None:
            continue
        report = validate_diagram(d)
        for issue in report.issues:
            ws.issues.append(WorkspaceIssue("diagrams", name, f"{issue.kind} at {issue.location}: {issue.detail}"))
        if report.ok:
            ws.diagrams[name] = d

    for name, e in doc.get("retracted_diagrams", {}).items():
        rd = attempt("retracted_diagrams", name, lambda: _retracted(ws, e, name))
        if rd is None:
            continue
        problems = rd.violations()
        for issue in problems:
            ws.issues.append(WorkspaceIssue("retracted_diagrams", name, f"{issue.kind} at {issue.location}: {issue.detail}"))
        if not problems:
            ws.retracted_diagrams[name] = rd
    logger.debug("parsed workspace %s with %d issue(s)", path, len(ws.issues))
    return ws


def load_workspace(path) -> Workspace:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_workspace(text, path)


def _sized_table(entry, key: str, name: str):
    table = entry[key]
    size = entry.get("size", len(table))
    if len(table) != size:
        raise ValueError(f"{key} table has {len(table)} rows, size says {size}")
    return table


def _semilattice(e, name) -> FiniteJoinSemilattice:
    return FiniteJoinSemilattice(_sized_table(e, "join", name), e["zero"], e.get("unit"), name=name)


def _lattice(e, name) -> FiniteLattice:
    return FiniteLattice(_sized_table(e, "join", name), _sized_table(e, "meet", name), name=name)


def _monoid(e, name) -> FiniteCommutativeMonoid:
    return FiniteCommutativeMonoid(_sized_table(e, "add", name), e["zero"], name=name)


def _algebra(ws: Workspace, name: str):
    for section in ALGEBRA_SECTIONS:
        table = getattr(ws, section)
        if name in table:
            return section, table[name]
    raise ValueError(f"depends on {name!r}, which failed validation")


def _hom(ws: Workspace, e):
    s_kind, source = _algebra(ws, e["source"])
    t_kind, target = _algebra(ws, e["target"])
    if s_kind != t_kind:
        raise ValueError(f"source is in {s_kind} but target is in {t_kind}")
    cls = {"semilattices": SemilatticeHom, "lattices": LatticeHom, "monoids": MonoidHom}[s_kind]
    return cls(source, target, e["map"])


def _diagram(ws: Workspace, e, name) -> SemilatticeDiagram:
    poset = e["poset"]
    index = IndexPoset(poset["nodes"], [tuple(c) for c in poset.get("covers", [])])
    objects = _node_table(e, "objects", name)
    if sorted(objects) != list(range(index.nodes)):
        raise ValueError(f"objects must be given for nodes 0..{index.nodes - 1}")
    edges = {}
    for key, ref in e.get("arrows", {}).items():
        if ref not in ws.homs:
            raise ValueError(f"depends on {ref!r}, which failed validation")
        edges[edge_key(key)] = ws.homs[ref]
    return SemilatticeDiagram(index, [_algebra(ws, objects[X])[1] for X in range(index.nodes)], edges, name=name)


def _retracted(ws: Workspace, e, name) -> RetractedDiagram:
    for ref in (e["base"], e["hat"]):
        if ref not in ws.diagrams:
            raise ValueError(f"depends on {ref!r}, which failed validation")
    base, hat = ws.diagrams[e["base"]], ws.diagrams[e["hat"]]
    parts = {}
    for part in ("eps", "mu"):
        table = _node_table(e, part, name)
        if sorted(table) != list(range(base.index.nodes)):
            raise ValueError(f"{part} must be given for nodes 0..{base.index.nodes - 1}")
        for ref in table.values():
            if ref not in ws.homs:
                raise ValueError(f"depends on {ref!r}, which failed validation")
        parts[part] = tuple(ws.homs[table[X]] for X in range(base.index.nodes))
    return RetractedDiagram(base, hat, parts["eps"], parts["mu"])


def resolve_retracted(ws: Workspace, name: str, retraction: str = "boolean") -> RetractedDiagram:
    """A retracted diagram by name: declared in the workspace, or promoted through the Boolean retraction."""
    if retraction == "declared":
        return ws.get("retracted_diagrams", name)
    if retraction == "boolean":
        return promote_to_retracted(ws.get("diagrams", name), boolean_retraction)
    raise WorkspaceError(f"unknown retraction provider {retraction!r}")


# --- serialization ---


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def semilattice_to_json(S: FiniteJoinSemilattice) -> dict:
    return {"size": S.size, "zero": S.zero, "unit": S.unit, "join": S.join.tolist()}


def lattice_to_json(L: FiniteLattice) -> dict:
    return {"size": L.size, "join": L.join.tolist(), "meet": L.meet.tolist()}


def monoid_to_json(M: FiniteCommutativeMonoid) -> dict:
    return {"size": M.size, "zero": M.zero, "add": M.add.tolist()}


def hom_to_json(source: str, target: str, h) -> dict:
    return {"source": source, "target": target, "map": h.map.tolist()}


def conc_to_json(conc) -> dict:
    doc = semilattice_to_json(conc)
    doc["congruences"] = [[list(block) for block in theta.blocks] for theta in conc.congruences]
    return doc


def diagram_to_json(index: IndexPoset, objects: List[str], arrows: Dict[tuple, str]) -> dict:
    return {
        "poset": {"nodes": index.nodes, "covers": [list(c) for c in index.covers]},
        "objects": {str(X): name for X, name in enumerate(objects)},
        "arrows": {f"{i}->{j}": name for (i, j), name in sorted(arrows.items())},
    }


# --- bundle files ---


def bundle_document(bundle: UnfoldingBundle, recipe: dict) -> dict:
    return {
        "recipe": recipe,
        "depth": bundle.depth,
        "sizes": {str(X): sizes for X, sizes in bundle.sizes().items()},
        "fingerprint": bundle.fingerprint(),
    }


def write_bundle(bundle: UnfoldingBundle, workspace_path, diagram: str, retraction: str, budget: int, path) -> Path:
    """Write a bundle file recording how to rebuild the bundle and what it must hash to."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    recipe = {
        "workspace": Path(os.path.relpath(Path(workspace_path).resolve(), path.parent.resolve())).as_posix(),
        "diagram": diagram,
        "depth": bundle.depth,
        "retraction": retraction,
        "budget": budget,
    }
    path.write_text(dump_json(bundle_document(bundle, recipe)), encoding="utf-8")
    return path


def rebuild_bundle(path) -> UnfoldingBundle:
    """Recompute the bundle a bundle file describes; refuse it when the fingerprint differs."""
    path = Path(path)
    doc = _read_json(path)
    try:
        recipe = doc["recipe"]
        ws = load_workspace(path.parent / recipe["workspace"])
        ws.require_clean()
        rd = resolve_retracted(ws, recipe["diagram"], recipe["retraction"])
        bundle = unfold(rd, int(recipe["depth"]), int(recipe["budget"]))
    except KeyError as exc:
        raise ParseError(f"bundle file lacks {exc.args[0]!r}") from None
    if bundle.fingerprint() != doc.get("fingerprint"):
        raise BundleMismatch(f"{path} does not match the bundle its recipe rebuilds")
    return bundle


# --- lift packages ---


def lift_package_document(lifted: LiftedUnfolding) -> dict:
    names = [f"E{u}" for u in range(len(lifted.diagram.objects))]
    return {
        "lattices": {name: lattice_to_json(L) for name, L in zip(names, lifted.diagram.objects)},
        "lift": {
            "objects": names,
            "edges": {f"{i}->{j}": h.map.tolist() for (i, j), h in sorted(lifted.diagram.edges.items())},
            "eta": [eta.map.tolist() for eta in lifted.eta],
        },
    }


def load_lift_package(path, bundle: UnfoldingBundle) -> LiftedUnfolding:
    """A Conc lift of ``bundle``: lattices on every unfolded node, lattice homs on its covers, eta tables."""
    doc = _read_json(path)
    try:
        lattices = {name: _lattice(e, name) for name, e in doc.get("lattices", {}).items()}
        lift = doc["lift"]
        objects = [lattices[name] for name in lift["objects"]]
        U = bundle.unfolded
        if len(objects) != U.index.nodes:
            raise LiftPackageInvalid(f"lift has {len(objects)} objects, the unfolding has {U.index.nodes} nodes")
        edges = {}
        for key, mapping in lift["edges"].items():
            i, j = edge_key(key)
            edges[(i, j)] = LatticeHom(objects[i], objects[j], mapping)
        E = SemilatticeDiagram(U.index, objects, edges)
        eta = tuple(SemilatticeHom(con_lattice(objects[u]), U.objects[u], m) for u, m in enumerate(lift["eta"]))
    except (KeyError, IndexError) as exc:
        raise LiftPackageInvalid(f"lift package is incomplete: missing {exc}") from None
    except (LatticeError, SemilatticeError, DiagramError, ValueError) as exc:
        raise LiftPackageInvalid(f"lift package is malformed: {exc}") from exc
    return LiftedUnfolding(bundle, ConcFunctor(), E, eta)
