"""
Poset-indexed diagrams of finite join-semilattices, retracted diagrams, and
their unfolding into towers of iterated products.

A diagram stores homomorphisms on covering edges only; arrows between other
comparable nodes are composed along a canonical path and cached. The
unfolding of a retracted diagram lives over the product of its index with a
finite chain 0 < 1 < ... < N-1: node (X, m) carries the power D̂^(m+1)(X).
"""

import hashlib
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import settings
import tables
from ledger import VerificationLedger
from semilattice import (
    FiniteJoinSemilattice,
    NotDistributive,
    ProductDecomposition,
    Retraction,
    SemilatticeHom,
    boolean_retraction,
    iter_retraction_morphisms,
    pair_hom,
    parallel_hom,
    product,
    retraction_morphism_squares,
)

logger = logging.getLogger(__name__)


class DiagramError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotDistributiveNode(DiagramError):
    def __init__(self, message, node: int, witness=None):
        super().__init__(message, witness)
        self.node = node


class ArrowLiftNotFound(DiagramError):
    def __init__(self, message, edges, partial=None):
        super().__init__(message, witness=tuple(edges))
        self.edges = tuple(edges)
        # retractions and the lifts that were found, for inspection
        self.partial = partial


class ArrowNotEmbedding(DiagramError):
    def __init__(self, message, edge):
        super().__init__(message, witness=edge)
        self.edge = edge


class BudgetExceeded(DiagramError):
    pass


# --- index posets ---


class IndexPoset:
    def __init__(self, nodes: int, covers: Sequence[Tuple[int, int]] = ()):
        self.nodes = int(nodes)
        if self.nodes < 1:
            raise DiagramError("an index poset needs at least one node")
        self.covers = tuple(sorted({(int(i), int(j)) for i, j in covers}))
        order = np.eye(self.nodes, dtype=bool)
        for i, j in self.covers:
            tables.check_index(i, self.nodes, "node")
            tables.check_index(j, self.nodes, "node")
            if i == j:
                raise DiagramError(f"cover {i}->{j} is a loop", witness=(i, j))
            order[i, j] = True
        for k in range(self.nodes):
            order |= order[:, k : k + 1] & order[k : k + 1, :]
        cycle = np.argwhere(order & order.T & ~np.eye(self.nodes, dtype=bool))
        if cycle.size:
            i, j = (int(v) for v in cycle[0])
            raise DiagramError(f"covering relation has a cycle through {i} and {j}", witness=(i, j))
        order.flags.writeable = False
        self.order = order

    def __eq__(self, other):
        return isinstance(other, IndexPoset) and self.nodes == other.nodes and self.covers == other.covers

    def __hash__(self):
        return hash((self.nodes, self.covers))

    def __repr__(self):
        return f"IndexPoset({self.nodes}, {list(self.covers)})"

    def leq(self, i: int, j: int) -> bool:
        return bool(self.order[i, j])

    def successors(self, i: int) -> List[int]:
        return [j for a, j in self.covers if a == i]

    def less_pairs(self) -> List[Tuple[int, int]]:
        return [(int(i), int(j)) for i, j in np.argwhere(self.order) if i != j]

    def triples(self) -> List[Tuple[int, int, int]]:
        """Every i < k < j."""
        return [(i, k, j) for i, k in self.less_pairs() for j in range(self.nodes) if k != j and self.order[k, j]]

    def topological(self) -> List[int]:
        return sorted(range(self.nodes), key=lambda i: (int(self.order[:, i].sum()), i))

    def is_lattice(self) -> bool:
        """Whether every pair of nodes has a least upper and a greatest lower bound."""
        for i in range(self.nodes):
            for j in range(i + 1, self.nodes):
                for rel in (self.order, self.order.T):
                    bounds = np.flatnonzero(rel[i] & rel[j])
                    if not any(rel[b, bounds].all() for b in bounds):
                        return False
        return True

    def times_chain(self, length: int) -> "IndexPoset":
        """I x {0 < ... < length-1}; node (X, m) is X * length + m."""
        covers = [(x * length + m, x * length + m + 1) for x in range(self.nodes) for m in range(length - 1)]
        covers += [(x * length + m, y * length + m) for x, y in self.covers for m in range(length)]
        return IndexPoset(self.nodes * length, covers)


# --- diagrams ---


class SemilatticeDiagram:
    """
    A functor from an index poset, given by one object per node and one
    homomorphism per covering edge.

    Objects need ``identity()``; arrows need ``source``, ``target``, ``map``,
    ``law_violation()`` and ``@``, so lattice diagrams work the same way.
    """

    def __init__(self, index: IndexPoset, objects: Sequence, edges: Dict[Tuple[int, int], object], *, name: Optional[str] = None):
        if len(objects) != index.nodes:
            raise DiagramError(f"{len(objects)} objects for {index.nodes} nodes")
        mismatch = sorted(set(index.covers) ^ set(edges))
        if mismatch:
            raise DiagramError(f"arrow data must sit exactly on the covering edges, mismatch at {mismatch[0]}", witness=mismatch[0])
        self.index = index
        self.objects = tuple(objects)
        self.edges = {e: edges[e] for e in index.covers}
        self.name = name
        self._arrows: Dict[Tuple[int, int], object] = {}

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"SemilatticeDiagram({label}{self.index!r})"

    def edge(self, i: int, j: int):
        return self.edges[(i, j)]

    def arrow(self, i: int, j: int):
        if not self.index.leq(i, j):
            raise DiagramError(f"{i} is not below {j}", witness=(i, j))
        if i == j:
            return self.objects[i].identity()
        if (i, j) not in self._arrows:
            k = next(k for k in self.index.successors(i) if self.index.leq(k, j))
            self._arrows[(i, j)] = self.arrow(k, j) @ self.edges[(i, k)]
        return self._arrows[(i, j)]

    def with_edge(self, edge: Tuple[int, int], hom) -> "SemilatticeDiagram":
        edges = dict(self.edges)
        edges[edge] = hom
        return SemilatticeDiagram(self.index, self.objects, edges, name=self.name)


@dataclass(frozen=True)
class DiagramIssue:
    kind: str
    location: str
    detail: str


@dataclass
class DiagramReport:
    issues: List[DiagramIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


def validate_diagram(d: SemilatticeDiagram) -> DiagramReport:
    """Every failed hom law or non-commuting pair of paths; empty means d is a functor."""
    report = DiagramReport()
    for (i, j), h in d.edges.items():
        if h.source != d.objects[i] or h.target != d.objects[j]:
            report.issues.append(DiagramIssue("endpoint", f"{i}->{j}", "arrow endpoints differ from the node objects"))
            continue
        w = h.law_violation()
        if w is not None:
            report.issues.append(DiagramIssue("hom-law", f"{i}->{j}", f"law fails at {w}"))
    if report.issues:
        return report
    for (i, k) in d.index.covers:
        for j in range(d.index.nodes):
            if j == k or not d.index.leq(k, j):
                continue
            lhs = d.arrow(k, j).map[d.edges[(i, k)].map]
            rhs = d.arrow(i, j).map
            bad = np.flatnonzero(lhs != rhs)
            if bad.size:
                x = int(bad[0])
                report.issues.append(
                    DiagramIssue("path", f"{i}->{k}->{j}", f"paths to {j} disagree at {x}: {int(lhs[x])} != {int(rhs[x])}")
                )
    return report


# --- retracted diagrams ---


@dataclass(frozen=True)
class RetractedDiagram:
    base: SemilatticeDiagram
    hat: SemilatticeDiagram
    eps: Tuple[SemilatticeHom, ...]
    mu: Tuple[SemilatticeHom, ...]

    def __post_init__(self):
        if self.base.index != self.hat.index:
            raise DiagramError("base and hat diagrams must share their index")
        n = self.base.index.nodes
        if len(self.eps) != n or len(self.mu) != n:
            raise DiagramError(f"need eps and mu at each of the {n} nodes")
        for X in range(n):
            D, H = self.base.objects[X], self.hat.objects[X]
            if self.eps[X].source != D or self.eps[X].target != H:
                raise DiagramError(f"eps at node {X} must map D({X}) into its hat", witness=(X,))
            if self.mu[X].source != H or self.mu[X].target != D:
                raise DiagramError(f"mu at node {X} must map the hat onto D({X})", witness=(X,))

    @property
    def index(self) -> IndexPoset:
        return self.base.index

    def retraction(self, X: int) -> Retraction:
        return Retraction(self.base.objects[X], self.hat.objects[X], self.eps[X], self.mu[X])

    def rho(self, X: int) -> SemilatticeHom:
        return self.eps[X] @ self.mu[X]

    def project(self) -> SemilatticeDiagram:
        return self.base

    def with_mu(self, X: int, mu: SemilatticeHom) -> "RetractedDiagram":
        mus = list(self.mu)
        mus[X] = mu
        return replace(self, mu=tuple(mus))

    def violations(self) -> List[DiagramIssue]:
        issues = [replace(i, location=f"base {i.location}") for i in validate_diagram(self.base).issues]
        issues += [replace(i, location=f"hat {i.location}") for i in validate_diagram(self.hat).issues]
        if issues:
            return issues
        for X in range(self.index.nodes):
            x = self.retraction(X).identity_violation()
            if x is not None:
                issues.append(DiagramIssue("retraction", f"node {X}", f"mu(eps({x})) != {x}"))
        for X, Y in self.index.less_pairs():
            bad = retraction_morphism_squares(self.base.arrow(X, Y), self.hat.arrow(X, Y), self.retraction(X), self.retraction(Y))
            if bad is not None:
                issues.append(DiagramIssue("square", f"{X}->{Y}", f"{bad[0]} square fails at {bad[1]}"))
        return issues


def _path_conflict(index: IndexPoset, assigned: Dict[Tuple[int, int], SemilatticeHom]) -> Optional[Tuple[int, int]]:
    """First (i, j) reached by two assigned paths with different composites."""
    reach: Dict[int, Dict[int, set]] = {}
    for i in reversed(index.topological()):
        here: Dict[int, set] = {}
        for (a, k), h in assigned.items():
            if a != i:
                continue
            here.setdefault(k, set()).add(tuple(h.map.tolist()))
            for j, maps in reach[k].items():
                for m in maps:
                    here.setdefault(j, set()).add(tuple(np.array(m)[h.map].tolist()))
        for j, maps in here.items():
            if len(maps) > 1:
                return i, j
        reach[i] = here
    return None


def _functorial_choice(index: IndexPoset, options: List[List[SemilatticeHom]]) -> Optional[List[SemilatticeHom]]:
    covers = index.covers
    chosen: Dict[Tuple[int, int], SemilatticeHom] = {}

    def assign(level) -> bool:
        if level == len(covers):
            return True
        for g in options[level]:
            chosen[covers[level]] = g
            if _path_conflict(index, chosen) is None and assign(level + 1):
                return True
        del chosen[covers[level]]
        return False

    return [chosen[e] for e in covers] if assign(0) else None


def promote_to_retracted(
    d: SemilatticeDiagram,
    provider: Callable[[FiniteJoinSemilattice], Retraction] = boolean_retraction,
    *,
    prefer_embeddings: bool = True,
    require_embeddings: Optional[bool] = None,
) -> RetractedDiagram:
    """
    Retract every node through ``provider`` and lift every arrow to the hats.

    Lifts are chosen jointly so that the hat diagram stays a functor,
    embeddings first when the base arrow is one.
    """
    if require_embeddings is None:
        require_embeddings = provider is boolean_retraction
    retractions: List[Retraction] = []
    for X, D in enumerate(d.objects):
        try:
            r = provider(D)
        except NotDistributive as exc:
            raise NotDistributiveNode(f"node {X} is not distributive: {exc}", node=X, witness=exc.witness) from exc
        if r.base != D:
            raise DiagramError(f"retraction provider returned data for another object at node {X}", witness=(X,))
        retractions.append(r)
    covers = d.index.covers
    if require_embeddings:
        for e in covers:
            if not d.edges[e].is_embedding:
                raise ArrowNotEmbedding(f"arrow {e[0]}->{e[1]} is not an embedding", edge=e)

    lifts = None
    if prefer_embeddings and all(d.edges[e].is_embedding for e in covers):
        options = [list(iter_retraction_morphisms(d.edges[e], retractions[e[0]], retractions[e[1]], embeddings_only=True)) for e in covers]
        if all(options):
            lifts = _functorial_choice(d.index, options)
        if lifts is None:
            logger.info("no functorial family of embedding lifts, falling back to any commuting lift")
    if lifts is None:
        options = [list(iter_retraction_morphisms(d.edges[e], retractions[e[0]], retractions[e[1]])) for e in covers]
        failed = [e for e, opts in zip(covers, options) if not opts]
        if failed:
            found = {e: opts[0] for e, opts in zip(covers, options) if opts}
            raise ArrowLiftNotFound(
                f"no lift satisfies both retraction squares on {len(failed)} arrow(s), first {failed[0]}",
                edges=failed,
                partial={"retractions": retractions, "lifts": found},
            )
        lifts = _functorial_choice(d.index, options)
        if lifts is None:
            raise ArrowLiftNotFound("no combination of lifts keeps the hat diagram functorial", edges=covers, partial={"retractions": retractions})

    hat = SemilatticeDiagram(d.index, [r.hat for r in retractions], dict(zip(covers, lifts)))
    rd = RetractedDiagram(d, hat, tuple(r.eps for r in retractions), tuple(r.mu for r in retractions))
    issues = rd.violations()
    if issues:
        raise DiagramError(f"promoted diagram fails validation: {issues[0]}", witness=issues[0])
    logger.debug("promoted %r with %d lifted arrows", d, len(covers))
    return rd


def derived_rho(rd: RetractedDiagram, X: int) -> SemilatticeHom:
    rho = rd.rho(X)
    bad = np.flatnonzero(rho.map[rho.map] != rho.map)
    if bad.size:
        raise DiagramError(f"rho at node {X} is not idempotent at {int(bad[0])}", witness=(X, int(bad[0])))
    return rho


def check_rho_naturality(rd: RetractedDiagram, X: int, Y: int) -> bool:
    h = rd.hat.arrow(X, Y)
    return bool(np.array_equal(h.map[rd.rho(X).map], rd.rho(Y).map[h.map]))


# --- unfolding ---


@dataclass(frozen=True, eq=False)
class UnfoldingBundle:
    source: RetractedDiagram
    depth: int
    rho: Tuple[SemilatticeHom, ...]
    powers: Tuple[Dict[int, FiniteJoinSemilattice], ...]
    decompositions: Tuple[Dict[int, ProductDecomposition], ...]
    alpha: Tuple[Dict[int, SemilatticeHom], ...]
    pi: Tuple[Dict[int, SemilatticeHom], ...]
    sigma: Tuple[Dict[int, SemilatticeHom], ...]
    power_arrows: Dict[Tuple[int, int, int], SemilatticeHom]
    unfolded: SemilatticeDiagram

    @property
    def index(self) -> IndexPoset:
        return self.source.index

    def node(self, X: int, n: int) -> int:
        """Unfolded node carrying the n-th power of the hat at X (1 <= n <= depth)."""
        return X * self.depth + (n - 1)

    def power(self, X: int, n: int) -> FiniteJoinSemilattice:
        return self.powers[X][n]

    def power_arrow(self, X: int, Y: int, n: int) -> SemilatticeHom:
        if X == Y:
            return self.powers[X][n].identity()
        return self.power_arrows[(X, Y, n)]

    def sigma_chain(self, X: int, lo: int, hi: int) -> np.ndarray:
        """Map of sigma_hi o ... o sigma_(lo+1), from power lo+1 to power hi+1."""
        m = np.arange(self.powers[X][lo + 1].size)
        for k in range(lo + 1, hi + 1):
            m = self.sigma[X][k].map[m]
        return m

    def sizes(self) -> Dict[int, List[int]]:
        return {X: [self.powers[X][n].size for n in range(1, self.depth + 1)] for X in range(self.index.nodes)}

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(tables.table_key(self.depth, self.index.nodes, self.index.covers))
        for X in range(self.index.nodes):
            digest.update(tables.table_key(self.rho[X].map))
            for n in range(1, self.depth + 1):
                digest.update(tables.table_key(self.powers[X][n].join))
            for n in range(1, self.depth):
                digest.update(tables.table_key(self.sigma[X][n].map))
        for key in sorted(self.power_arrows):
            digest.update(tables.table_key(key, self.power_arrows[key].map))
        return digest.hexdigest()


def unfold(rd: RetractedDiagram, depth: int, budget: Optional[int] = None) -> UnfoldingBundle:
    if depth < 1:
        raise DiagramError(f"unfolding depth must be at least 1, got {depth}")
    limit = settings.ELEMENT_BUDGET if budget is None else budget
    nodes = rd.index.nodes
    for X in range(nodes):
        size = rd.hat.objects[X].size ** depth
        if size > limit:
            raise BudgetExceeded(f"node {X} would need {size} elements at depth {depth}, budget is {limit}", witness=(X, size))

    rho = tuple(derived_rho(rd, X) for X in range(nodes))
    powers, decs, alpha, pi, sigma = [], [], [], [], []
    for X in range(nodes):
        H = rd.hat.objects[X]
        pw, dc, al, pr = {1: H}, {}, {1: H.identity()}, {}
        for n in range(2, depth + 1):
            dec = product(H, pw[n - 1])
            dc[n], pw[n], al[n], pr[n] = dec, dec.product, dec.left_proj, dec.right_proj
        sg = {n: pair_hom(rho[X] @ al[n], pw[n].identity(), dc[n + 1]) for n in range(1, depth)}
        powers.append(pw)
        decs.append(dc)
        alpha.append(al)
        pi.append(pr)
        sigma.append(sg)

    arrows: Dict[Tuple[int, int, int], SemilatticeHom] = {}
    for X, Y in rd.index.less_pairs():
        h = rd.hat.arrow(X, Y)
        arrows[(X, Y, 1)] = h
        for n in range(2, depth + 1):
            arrows[(X, Y, n)] = parallel_hom(h, arrows[(X, Y, n - 1)], decs[X][n], decs[Y][n])

    index = rd.index.times_chain(depth)
    objects = [powers[X][m + 1] for X in range(nodes) for m in range(depth)]
    edges = {}
    for X in range(nodes):
        for m in range(depth - 1):
            edges[(X * depth + m, X * depth + m + 1)] = sigma[X][m + 1]
    for X, Y in rd.index.covers:
        for m in range(depth):
            edges[(X * depth + m, Y * depth + m)] = arrows[(X, Y, m + 1)]
    unfolded = SemilatticeDiagram(index, objects, edges)
    logger.info("unfolded %d node(s) to depth %d, largest power has %d elements", nodes, depth, max(o.size for o in objects))
    return UnfoldingBundle(rd, depth, rho, tuple(powers), tuple(decs), tuple(alpha), tuple(pi), tuple(sigma), arrows, unfolded)


def _unfolded_label(bundle: UnfoldingBundle, u: int) -> str:
    X, m = divmod(u, bundle.depth)
    return f"({X},{m})"


def verify_unfolding(bundle: UnfoldingBundle) -> VerificationLedger:
    """Check every identity of the retracted diagram and its unfolding as an exact table equality."""
    rd, N = bundle.source, bundle.depth
    nodes = rd.index.nodes
    ledger = VerificationLedger("unfold")

    for X in range(nodes):
        ledger.check_maps("retraction-identity", f"node {X}", rd.mu[X] @ rd.eps[X], rd.base.objects[X].identity())
    for X, Y in rd.index.less_pairs():
        f, g = rd.base.arrow(X, Y), rd.hat.arrow(X, Y)
        ledger.check_maps("retraction-square", f"{X}->{Y} eps", g.map[rd.eps[X].map], rd.eps[Y].map[f.map])
        ledger.check_maps("retraction-square", f"{X}->{Y} mu", rd.mu[Y].map[g.map], f.map[rd.mu[X].map])
    for X in range(nodes):
        r = bundle.rho[X]
        ledger.check_maps("rho-idempotent", f"node {X}", r.map[r.map], r.map)
    for X, Y in rd.index.less_pairs():
        h = rd.hat.arrow(X, Y)
        ledger.check_maps("rho-naturality", f"{X}->{Y}", h.map[bundle.rho[X].map], bundle.rho[Y].map[h.map])

    for X in range(nodes):
        for n in range(2, N + 1):
            dec = bundle.decompositions[X][n]
            ledger.check_maps(
                "product-decomposition", f"node {X} n={n}", pair_hom(bundle.alpha[X][n], bundle.pi[X][n], dec), dec.product.identity()
            )
        for n in range(1, N):
            s = bundle.sigma[X][n]
            ledger.check_maps("sigma-alpha", f"node {X} n={n}", bundle.alpha[X][n + 1].map[s.map], bundle.rho[X].map[bundle.alpha[X][n].map])
            ledger.check_maps("sigma-section", f"node {X} n={n}", bundle.pi[X][n + 1].map[s.map], np.arange(bundle.powers[X][n].size))

    for X, Y in rd.index.less_pairs():
        h = rd.hat.arrow(X, Y)
        for n in range(1, N + 1):
            p = bundle.power_arrow(X, Y, n)
            ledger.check_maps("alpha-naturality", f"{X}->{Y} n={n}", bundle.alpha[Y][n].map[p.map], h.map[bundle.alpha[X][n].map])
        for n in range(1, N):
            lhs = bundle.power_arrow(X, Y, n + 1).map[bundle.sigma[X][n].map]
            rhs = bundle.sigma[Y][n].map[bundle.power_arrow(X, Y, n).map]
            ledger.check_maps("sigma-naturality", f"{X}->{Y} n={n}", lhs, rhs)

    comparable = [(X, X) for X in range(nodes)] + rd.index.less_pairs()
    for X, Y in sorted(comparable):
        for m in range(N):
            for n in range(m, N):
                if X == Y and m == n:
                    continue
                direct = bundle.unfolded.arrow(bundle.node(X, m + 1), bundle.node(Y, n + 1)).map
                for i in range(m, n + 1):
                    via = bundle.sigma_chain(Y, i, n)[bundle.power_arrow(X, Y, i + 1).map[bundle.sigma_chain(X, m, i)]]
                    ledger.check_maps("unfold-factorization", f"({X},{m})->({Y},{n}) via {i}", direct, via)

    U = bundle.unfolded
    for a, b, c in U.index.triples():
        ledger.check_maps(
            "unfold-functoriality",
            f"{_unfolded_label(bundle, a)}->{_unfolded_label(bundle, b)}->{_unfolded_label(bundle, c)}",
            U.arrow(b, c).map[U.arrow(a, b).map],
            U.arrow(a, c).map,
        )

    if all(g.is_embedding for g in rd.hat.edges.values()):
        for (a, b), h in U.edges.items():
            ledger.record("embedding", f"{_unfolded_label(bundle, a)}->{_unfolded_label(bundle, b)}", h.is_embedding)
    logger.info("unfold ledger: %d rows, %d failed", len(ledger), len(ledger.failures()))
    return ledger


def unfolded_arrows_are_embeddings(bundle: UnfoldingBundle) -> bool:
    for X in range(bundle.index.nodes):
        for n in range(1, bundle.depth):
            if not np.array_equal(bundle.pi[X][n + 1].map[bundle.sigma[X][n].map], np.arange(bundle.powers[X][n].size)):
                return False
    U = bundle.unfolded
    return all(U.arrow(a, b).is_embedding for a, b in U.index.less_pairs())
