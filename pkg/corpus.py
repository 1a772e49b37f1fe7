"""
Deterministic pseudo-random corpora for the property suites and gen-corpus.

Every generator takes a ``numpy.random.Generator``; the same seed always
yields the same objects in the same order.
"""

import logging
from typing import Dict, Iterator, List, Tuple

import numpy as np

from diagram import IndexPoset, SemilatticeDiagram, UnfoldingBundle
from lattice import LatticeHom, chain_lattice, con_lattice, lattice_from_semilattice, product_lattice
from lifting import ConcFunctor, LiftedUnfolding, LiftPackageInvalid
from monoid import cyclic_group, semilattice_as_monoid, truncated_sum
from semilattice import FiniteJoinSemilattice, SemilatticeHom, chain_semilattice, m3_semilattice
from workspace import diagram_to_json, hom_to_json, lattice_to_json, monoid_to_json, semilattice_to_json

logger = logging.getLogger(__name__)

SHAPES = {
    "chain": (2, [(0, 1)]),
    "square": (4, [(0, 1), (0, 2), (1, 3), (2, 3)]),
}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def set_family_semilattice(masks, name=None) -> FiniteJoinSemilattice:
    """The union-closed family ``masks`` (containing 0) ordered by inclusion."""
    members = sorted(set(int(m) for m in masks))
    where = {m: i for i, m in enumerate(members)}
    arr = np.array(members, dtype=np.int64)
    join = np.vectorize(where.__getitem__, otypes=[np.int64])(np.bitwise_or.outer(arr, arr))
    return FiniteJoinSemilattice(join, where[0], where[int(np.bitwise_or.reduce(arr))], name=name)


def _close(family: set, intersections: bool) -> set:
    closed = set(family)
    frontier = list(closed)
    while frontier:
        a = frontier.pop()
        for b in list(closed):
            fresh = [a | b] + ([a & b] if intersections else [])
            for c in fresh:
                if c not in closed:
                    closed.add(c)
                    frontier.append(c)
    return closed


def _random_family(rng: np.random.Generator, max_size: int, points: int, intersections: bool) -> set:
    family = {0}
    for m in rng.integers(1, 1 << points, size=3 * points):
        grown = _close(family | {int(m)}, intersections)
        if len(grown) <= max_size:
            family = grown
    return family


def random_union_closed(rng: np.random.Generator, max_size: int, points: int = 4, name=None) -> FiniteJoinSemilattice:
    return set_family_semilattice(_random_family(rng, max_size, points, False), name=name)


def random_ring_of_sets(rng: np.random.Generator, max_size: int, points: int = 4, name=None) -> FiniteJoinSemilattice:
    """Closed under union and intersection, hence distributive."""
    return set_family_semilattice(_random_family(rng, max_size, points, True), name=name)


def semilattice_stream(seed: int, count: int, max_size: int, distributive: bool = False) -> Iterator[FiniteJoinSemilattice]:
    rng = make_rng(seed)
    build = random_ring_of_sets if distributive else random_union_closed
    for k in range(count):
        yield build(rng, max_size, name=f"s{k}")


def random_poset(rng: np.random.Generator, points: int) -> np.ndarray:
    """A random partial order on ``points`` elements as a boolean leq matrix."""
    order = np.eye(points, dtype=bool) | np.triu(rng.random((points, points)) < 0.4, k=1)
    for k in range(points):
        order |= order[:, k : k + 1] & order[k : k + 1, :]
    return order


def down_sets(order: np.ndarray) -> List[int]:
    points = order.shape[0]
    below = [sum(1 << p for p in range(points) if order[p, q]) for q in range(points)]
    return [m for m in range(1 << points) if all(below[q] & ~m == 0 for q in range(points) if m >> q & 1)]


def downset_diagram(rng: np.random.Generator, points: int = 3, shape: str = "chain", name=None) -> SemilatticeDiagram:
    """Down-set lattices of nested down-sets of a random poset, joined by inclusions."""
    nodes, covers = SHAPES[shape]
    ideals = down_sets(random_poset(rng, points))
    if shape == "chain":
        tops = [ideals[int(rng.integers(0, len(ideals)))], ideals[-1]]
    else:
        left, right = (ideals[int(i)] for i in rng.integers(0, len(ideals), size=2))
        tops = [left & right, left, right, left | right]
    members = [[d for d in ideals if d & ~u == 0] for u in tops]
    objects = [set_family_semilattice(m, name=f"{name}.{X}" if name else None) for X, m in enumerate(members)]
    edges = {}
    for i, j in covers:
        where = {m: k for k, m in enumerate(members[j])}
        edges[(i, j)] = SemilatticeHom(objects[i], objects[j], [where[m] for m in members[i]])
    return SemilatticeDiagram(IndexPoset(nodes, covers), objects, edges, name=name)


def chain_tower_package(bundle: UnfoldingBundle) -> LiftedUnfolding:
    """
    A Conc lift of a one-node unfolding whose hat has two elements and rho = id.

    Node n carries the (n+1)-element chain. The step to n+1 fixes 0..n-1 and
    sends n to n+1, and eta sends a congruence to the bitmask of the covers it
    collapses, which is how the n-th power of the two-element hat is encoded.
    """
    if bundle.index.nodes != 1 or bundle.power(0, 1).size != 2:
        raise LiftPackageInvalid("chain towers lift only one-node unfoldings of a two-element hat")
    if not (bundle.rho[0].map == np.arange(2)).all():
        raise LiftPackageInvalid("chain towers need rho = id")
    N = bundle.depth
    chains = [chain_lattice(n + 1) for n in range(1, N + 1)]
    edges = {}
    for n in range(1, N):
        step = list(range(n)) + [n + 1]
        edges[(n - 1, n)] = LatticeHom(chains[n - 1], chains[n], step)
    E = SemilatticeDiagram(bundle.unfolded.index, chains, edges, name="chain tower")
    eta = []
    for n, L in enumerate(chains, start=1):
        C = con_lattice(L)
        masks = [sum(1 << k for k in range(n) if C.congruence(i).relates(k, k + 1)) for i in range(C.size)]
        eta.append(SemilatticeHom(C, bundle.power(0, n), masks))
    return LiftedUnfolding(bundle, ConcFunctor(), E, tuple(eta))


def cube_tower_package(bundle: UnfoldingBundle) -> LiftedUnfolding:
    """
    A Conc lift of a one-node unfolding whose hat is the Boolean cube 2^k with rho = id.

    Node n carries the n-th power of the k-cube lattice, coded as a k*n bit mask
    with the newest factor in the high bits. Con of each node is again a cube and
    eta reads a congruence off the atoms it collapses.
    """
    hat = bundle.power(0, 1)
    k = hat.size.bit_length() - 1
    if bundle.index.nodes != 1 or k < 1 or hat.size != 1 << k:
        raise LiftPackageInvalid("cube towers lift only one-node unfoldings of a Boolean hat")
    idx = np.arange(hat.size)
    if not np.array_equal(hat.join, np.bitwise_or.outer(idx, idx)):
        raise LiftPackageInvalid("cube towers need the hat coded by bit masks")
    if not (bundle.rho[0].map == idx).all():
        raise LiftPackageInvalid("cube towers need rho = id")
    N = bundle.depth
    cube = chain_lattice(2)
    for _ in range(k - 1):
        cube = product_lattice(chain_lattice(2), cube)
    powers = [cube]
    for _ in range(1, N):
        powers.append(product_lattice(cube, powers[-1]))
    edges = {}
    for n in range(1, N):
        width = powers[n - 1].size
        step = [(e >> (k * (n - 1))) * width + e for e in range(width)]
        edges[(n - 1, n)] = LatticeHom(powers[n - 1], powers[n], step)
    E = SemilatticeDiagram(bundle.unfolded.index, powers, edges, name="cube tower")
    eta = []
    for n, L in enumerate(powers, start=1):
        C = con_lattice(L)
        masks = [sum(1 << c for c in range(k * n) if C.congruence(i).relates(0, 1 << c)) for i in range(C.size)]
        eta.append(SemilatticeHom(C, bundle.power(0, n), masks))
    return LiftedUnfolding(bundle, ConcFunctor(), E, tuple(eta))


def _diagram_entries(doc: Dict[str, dict], d: SemilatticeDiagram, name: str):
    names = []
    for X, S in enumerate(d.objects):
        names.append(f"{name}.{X}")
        doc["semilattices"][names[-1]] = semilattice_to_json(S)
    arrows = {}
    for (i, j), h in d.edges.items():
        arrows[(i, j)] = f"{name}.{i}->{j}"
        doc["homs"][arrows[(i, j)]] = hom_to_json(names[i], names[j], h)
    doc["diagrams"][name] = diagram_to_json(d.index, names, arrows)


def generate_corpus(seed: int, max_size: int) -> Dict[str, dict]:
    """A workspace document with random and named objects, every one of which validates."""
    rng = make_rng(seed)
    doc = {"semilattices": {}, "lattices": {}, "monoids": {}, "homs": {}, "diagrams": {}}
    semilattices: List[Tuple[str, FiniteJoinSemilattice]] = []
    for k in range(4):
        semilattices.append((f"union{k}", random_union_closed(rng, max_size)))
    for k in range(4):
        semilattices.append((f"ring{k}", random_ring_of_sets(rng, max_size)))
    if max_size >= 5:
        semilattices.append(("M3", m3_semilattice()))
    for name, S in semilattices:
        doc["semilattices"][name] = semilattice_to_json(S)
        doc["lattices"][f"L.{name}"] = lattice_to_json(lattice_from_semilattice(S))
        doc["monoids"][f"M.{name}"] = monoid_to_json(semilattice_as_monoid(S))
    for n in range(1, min(max_size, 6) + 1):
        doc["monoids"][f"Z{n}"] = monoid_to_json(cyclic_group(n))
    for k in range(1, min(max_size, 4)):
        doc["monoids"][f"trunc{k}"] = monoid_to_json(truncated_sum(k))

    for name, n in (("tower", 2), ("chain3", 3)):
        _diagram_entries(doc, SemilatticeDiagram(IndexPoset(1), [chain_semilattice(n)], {}), name)
    _diagram_entries(doc, downset_diagram(rng, 3, "chain", name="down_chain"), "down_chain")
    _diagram_entries(doc, downset_diagram(rng, 3, "square", name="down_square"), "down_square")
    logger.info("generated corpus for seed %d with %d semilattices", seed, len(doc["semilattices"]))
    return doc
