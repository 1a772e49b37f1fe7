import json

import pytest

from diagram import IndexPoset, SemilatticeDiagram, promote_to_retracted
from lattice import m3_lattice
from semilattice import SemilatticeHom, boolean_semilattice, chain_semilattice
from workspace import lattice_to_json

CHAIN2 = {"size": 2, "zero": 0, "unit": 1, "join": [[0, 1], [1, 1]]}
CHAIN3 = {"size": 3, "zero": 0, "unit": 2, "join": [[0, 1, 2], [1, 1, 2], [2, 2, 2]]}
BOOL2 = {"size": 4, "zero": 0, "unit": 3, "join": [[0, 1, 2, 3], [1, 1, 3, 3], [2, 3, 2, 3], [3, 3, 3, 3]]}


@pytest.fixture
def chain3():
    return chain_semilattice(3)


@pytest.fixture
def three_chain_diagram():
    """One node carrying the 3-chain."""
    return SemilatticeDiagram(IndexPoset(1), [chain_semilattice(3)], {}, name="c3")


@pytest.fixture
def two_chain_diagram():
    return SemilatticeDiagram(IndexPoset(1), [chain_semilattice(2)], {}, name="tower")


@pytest.fixture
def pair_diagram():
    """2-chain -> 4-element Boolean, sending the top to an atom."""
    C, B = chain_semilattice(2), boolean_semilattice(2)
    return SemilatticeDiagram(IndexPoset(2, [(0, 1)]), [C, B], {(0, 1): SemilatticeHom(C, B, [0, 1])}, name="pair")


@pytest.fixture
def pair_retracted(pair_diagram):
    return promote_to_retracted(pair_diagram)


@pytest.fixture
def workspace_doc():
    return {
        "semilattices": {"chain2": CHAIN2, "chain3": CHAIN3, "bool2": BOOL2},
        "lattices": {
            "L1": {"size": 1, "join": [[0]], "meet": [[0]]},
            "L3": {"size": 3, "join": CHAIN3["join"], "meet": [[0, 0, 0], [0, 1, 1], [0, 1, 2]]},
            "M3": lattice_to_json(m3_lattice()),
        },
        "monoids": {"Z2": {"size": 2, "zero": 0, "add": [[0, 1], [1, 0]]}},
        "homs": {
            "f": {"source": "chain2", "target": "bool2", "map": [0, 1]},
            "squash": {"source": "chain2", "target": "chain2", "map": [0, 0]},
            "eps3": {"source": "chain3", "target": "bool2", "map": [0, 1, 3]},
            "mu3": {"source": "bool2", "target": "chain3", "map": [0, 1, 2, 2]},
        },
        "diagrams": {
            "c3": {"poset": {"nodes": 1, "covers": []}, "objects": {"0": "chain3"}, "arrows": {}},
            "c3hat": {"poset": {"nodes": 1, "covers": []}, "objects": {"0": "bool2"}, "arrows": {}},
            "pair": {"poset": {"nodes": 2, "covers": [[0, 1]]}, "objects": {"0": "chain2", "1": "bool2"}, "arrows": {"0->1": "f"}},
            "flat": {"poset": {"nodes": 2, "covers": [[0, 1]]}, "objects": {"0": "chain2", "1": "chain2"}, "arrows": {"0->1": "squash"}},
        },
        "retracted_diagrams": {"r3": {"base": "c3", "hat": "c3hat", "eps": {"0": "eps3"}, "mu": {"0": "mu3"}}},
    }


@pytest.fixture
def workspace_file(tmp_path, workspace_doc):
    path = tmp_path / "ws.json"
    path.write_text(json.dumps(workspace_doc, indent=2), encoding="utf-8")
    return path
