"""
Replaying a lift of an unfolded diagram through a concrete functor.

Given an unfolding of a retracted diagram and a lift E of it along a functor
F (objects E(X, n) with isomorphisms eta: F E(X, n) -> D̂^n(X)), the replay

 1. takes projectability witnesses (a, zeta) of alpha o eta at every (X, n),
 2. transports the chain maps and diagram arrows to the quotient objects Q^n,
 3. detects where the Q-chain stabilizes and splits it into R(X),
 4. builds delta: F R(X) -> D(X) and checks that it is a natural isomorphism.

Every identity is recorded as a ledger row. Morphisms derived from witnesses
are built by transport along surjections and checked for well-definedness.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

import settings
from diagram import SemilatticeDiagram, UnfoldingBundle, validate_diagram
from lattice import (
    FiniteLattice,
    LatticeError,
    LatticeHom,
    con_lattice,
    conc_hom,
    conc_projectability_witness,
    iter_lattice_homs,
    small_lattices,
    sublattice,
)
from ledger import ABSOLUTE, VerificationLedger
from semilattice import (
    FiniteJoinSemilattice,
    NotIdempotent,
    SemilatticeError,
    SemilatticeHom,
    ShapeMismatch,
    chain_semilattice,
    corestrict,
    image,
    iter_homs,
    pair_hom,
    small_semilattices,
    sub_semilattice,
    zero_hom,
)

logger = logging.getLogger(__name__)


class LiftingError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotAProjection(LiftingError):
    pass


class WitnessFailure(LiftingError):
    def __init__(self, message, node: int, level: int, clause: str):
        super().__init__(message, witness=(node, level, clause))
        self.node = node
        self.level = level
        self.clause = clause


class NotWellDefined(LiftingError):
    def __init__(self, message, q: int, x1: int, x2: int):
        super().__init__(message, witness=(q, x1, x2))
        self.q, self.x1, self.x2 = q, x1, x2


class LiftPackageInvalid(LiftingError):
    pass


def transport(epic, values, size: int) -> np.ndarray:
    """The map g on 0..size-1 with g[epic[x]] = values[x]; epic must be onto."""
    epic = np.asarray(epic, dtype=np.int64)
    values = np.asarray(values, dtype=np.int64)
    hit, first = np.unique(epic, return_index=True)
    if hit.size != size:
        missing = int(np.setdiff1d(np.arange(size), hit)[0])
        raise LiftingError(f"transport needs a surjection, {missing} has no preimage", witness=(missing,))
    g = np.empty(size, dtype=np.int64)
    g[hit] = values[first]
    bad = np.flatnonzero(values != g[epic])
    if bad.size:
        x2 = int(bad[0])
        q = int(epic[x2])
        x1 = int(first[np.searchsorted(hit, q)])
        raise NotWellDefined(f"preimages {x1} and {x2} of {q} have different images", q=q, x1=x1, x2=x2)
    return g


class ProjectabilityWitness(NamedTuple):
    epic: object
    iso: SemilatticeHom


# --- concrete functors ---


class ConcreteFunctor:
    """A functor into finite <v,0>-semilattices with a projectability witness procedure."""

    tag = ""

    def __repr__(self):
        return f"{type(self).__name__}()"

    def apply_object(self, A) -> FiniteJoinSemilattice:
        raise NotImplementedError

    def apply_arrow(self, h) -> SemilatticeHom:
        raise NotImplementedError

    def witness(self, A, phi: SemilatticeHom, complement: Optional[SemilatticeHom] = None) -> ProjectabilityWitness:
        raise NotImplementedError

    def make_hom(self, source, target, mapping, check: bool = True):
        raise NotImplementedError

    def iter_homs(self, A, B):
        raise NotImplementedError

    def subobject(self, A, elements):
        raise NotImplementedError

    def small_targets(self) -> list:
        raise NotImplementedError


class IdentityFunctor(ConcreteFunctor):
    tag = "id"

    def apply_object(self, A):
        return A

    def apply_arrow(self, h):
        return h

    def witness(self, A, phi, complement=None):
        return identity_functor_witness(phi, complement)

    def make_hom(self, source, target, mapping, check=True):
        return SemilatticeHom(source, target, mapping, check=check)

    def iter_homs(self, A, B):
        return iter_homs(A, B)

    def subobject(self, A, elements):
        return sub_semilattice(A, elements)

    def small_targets(self):
        return small_semilattices(settings.UNIQUENESS_BOUND)


class ConcFunctor(ConcreteFunctor):
    """Conc on finite lattices."""

    tag = "conc"

    def apply_object(self, A: FiniteLattice):
        return con_lattice(A)

    def apply_arrow(self, h: LatticeHom):
        return conc_hom(h)

    def witness(self, A, phi, complement=None):
        w = conc_projectability_witness(A, phi)
        return ProjectabilityWitness(w.epic, w.iso)

    def make_hom(self, source, target, mapping, check=True):
        return LatticeHom(source, target, mapping, check=check)

    def iter_homs(self, A, B):
        return iter_lattice_homs(A, B)

    def subobject(self, A, elements):
        return sublattice(A, elements)

    def small_targets(self):
        return small_lattices(settings.LATTICE_TARGET_BOUND)


FUNCTORS = {"id": IdentityFunctor, "conc": ConcFunctor}


def identity_functor_witness(phi: SemilatticeHom, complement: Optional[SemilatticeHom] = None) -> ProjectabilityWitness:
    """
    Witness for the identity functor: the projection itself, with the identity iso.

    ``phi`` must be one leg of a product decomposition. Without a complement
    hint, a second leg is searched among the maps onto the zero fiber of phi.
    """
    if not phi.is_surjective:
        raise NotAProjection(f"{phi!r} is not surjective")
    if complement is None:
        fiber, _ = sub_semilattice(phi.source, np.flatnonzero(phi.map == phi.target.zero))
        complement = next((psi for psi in iter_homs(phi.source, fiber) if pair_hom(phi, psi).is_isomorphism), None)
        if complement is None:
            raise NotAProjection(f"{phi!r} has no complementary projection")
    elif complement.source != phi.source or not pair_hom(phi, complement).is_isomorphism:
        raise NotAProjection("the given complement does not split the source as a product")
    return ProjectabilityWitness(phi, phi.target.identity())


def universal_violation(functor: ConcreteFunctor, A, a) -> Optional[tuple]:
    """
    First failure of the factorization property of a surjective witness epic.

    For every f: A -> T into a small target and every h with F(f) = h o F(a)
    there must be exactly one g with f = g o a and F(g) = h. Since a and F(a)
    are onto, h and g are both forced by transport, so uniqueness is automatic
    and only existence is checked.
    """
    Fa = functor.apply_arrow(a)
    for T in functor.small_targets():
        for f in functor.iter_homs(A, T):
            try:
                h = transport(Fa.map, functor.apply_arrow(f).map, Fa.target.size)
            except NotWellDefined:
                continue
            try:
                g_map = transport(a.map, f.map, a.target.size)
            except NotWellDefined:
                return T.name, f.map.tolist(), "f does not factor through the epic"
            g = functor.make_hom(a.target, T, g_map, check=False)
            if g.law_violation() is not None:
                return T.name, f.map.tolist(), "factor is not a homomorphism"
            if not np.array_equal(functor.apply_arrow(g).map, h):
                return T.name, f.map.tolist(), "F of the factor differs from the given map"
    return None


# --- lifted unfoldings ---


@dataclass(frozen=True, eq=False)
class LiftedUnfolding:
    bundle: UnfoldingBundle
    functor: ConcreteFunctor
    diagram: SemilatticeDiagram
    eta: Tuple[SemilatticeHom, ...]

    def __post_init__(self):
        U = self.bundle.unfolded
        if self.diagram.index != U.index:
            raise LiftPackageInvalid("lift diagram is not indexed by the unfolded poset")
        if len(self.eta) != U.index.nodes:
            raise LiftPackageInvalid(f"need one eta per unfolded node, got {len(self.eta)}")
        for u, eta in enumerate(self.eta):
            F = self.functor.apply_object(self.diagram.objects[u])
            if eta.source != F or eta.target != U.objects[u]:
                raise LiftPackageInvalid(f"eta at unfolded node {u} has the wrong endpoints", witness=(u,))
            if eta.law_violation() is not None:
                raise LiftPackageInvalid(f"eta at unfolded node {u} is not a homomorphism", witness=(u,))
            if not eta.is_isomorphism:
                raise LiftPackageInvalid(f"eta at unfolded node {u} is not an isomorphism", witness=(u,))
        report = validate_diagram(self.diagram)
        if not report.ok:
            raise LiftPackageInvalid(f"lift diagram is not a functor: {report.issues[0]}", witness=report.issues[0])

    def E(self, X: int, n: int):
        return self.diagram.objects[self.bundle.node(X, n)]

    def s(self, X: int, n: int):
        return self.diagram.edge(self.bundle.node(X, n), self.bundle.node(X, n + 1))

    def E_arrow(self, X: int, Y: int, n: int):
        return self.diagram.arrow(self.bundle.node(X, n), self.bundle.node(Y, n))

    def eta_at(self, X: int, n: int) -> SemilatticeHom:
        return self.eta[self.bundle.node(X, n)]


def identity_lift(bundle: UnfoldingBundle) -> LiftedUnfolding:
    """The unfolding lifted along the identity functor by itself."""
    U = bundle.unfolded
    return LiftedUnfolding(bundle, IdentityFunctor(), U, tuple(o.identity() for o in U.objects))


@dataclass(eq=False)
class LiftReplay:
    lifted: LiftedUnfolding
    ledger: VerificationLedger = field(default_factory=lambda: VerificationLedger("replay"))
    witnesses: Dict[Tuple[int, int], ProjectabilityWitness] = field(default_factory=dict)
    sbar: Dict[Tuple[int, int], object] = field(default_factory=dict)
    q_arrows: Dict[Tuple[int, int, int], object] = field(default_factory=dict)
    images: Dict[int, Dict[int, np.ndarray]] = field(default_factory=dict)
    n0: Dict[int, Optional[int]] = field(default_factory=dict)
    stabilized: bool = False
    top: int = 0
    R: Dict[int, object] = field(default_factory=dict)
    R_inclusion: Dict[int, object] = field(default_factory=dict)
    t: Dict[Tuple[int, int], object] = field(default_factory=dict)
    r_arrows: Dict[Tuple[int, int], object] = field(default_factory=dict)
    delta: Dict[int, SemilatticeHom] = field(default_factory=dict)

    @property
    def bundle(self) -> UnfoldingBundle:
        return self.lifted.bundle

    @property
    def functor(self) -> ConcreteFunctor:
        return self.lifted.functor

    @property
    def depth(self) -> int:
        return self.bundle.depth

    @property
    def scope(self) -> str:
        return ABSOLUTE if self.stabilized else f"depth {self.depth}"

    @property
    def certified(self) -> bool:
        return self.stabilized and self.ledger.ok

    def Q(self, X: int, n: int):
        return self.witnesses[(X, n)].epic.target


def verify_lift(replay: LiftReplay):
    lifted, bundle, F = replay.lifted, replay.bundle, replay.functor
    N, ledger = bundle.depth, replay.ledger
    for X in range(bundle.index.nodes):
        for n in range(1, N + 1):
            ledger.record("eta-iso", f"node {X} n={n}", lifted.eta_at(X, n).is_isomorphism)
    for X, Y in bundle.index.less_pairs():
        for n in range(1, N + 1):
            lhs = lifted.eta_at(Y, n).map[F.apply_arrow(lifted.E_arrow(X, Y, n)).map]
            rhs = bundle.power_arrow(X, Y, n).map[lifted.eta_at(X, n).map]
            ledger.check_maps("eta-naturality", f"{X}->{Y} n={n}", lhs, rhs)
    for X in range(bundle.index.nodes):
        for n in range(1, N):
            lhs = lifted.eta_at(X, n + 1).map[F.apply_arrow(lifted.s(X, n)).map]
            rhs = bundle.sigma[X][n].map[lifted.eta_at(X, n).map]
            ledger.check_maps("eta-shift", f"node {X} n={n}", lhs, rhs)


def build_witnesses(replay: LiftReplay) -> Dict[Tuple[int, int], ProjectabilityWitness]:
    lifted, bundle, F = replay.lifted, replay.bundle, replay.functor
    ledger = replay.ledger
    for X in range(bundle.index.nodes):
        for n in range(1, bundle.depth + 1):
            A = lifted.E(X, n)
            eta = lifted.eta_at(X, n)
            phi = bundle.alpha[X][n] @ eta
            if n == 1:
                complement = zero_hom(phi.source, chain_semilattice(1))
            else:
                complement = bundle.pi[X][n] @ eta
            try:
                w = F.witness(A, phi, complement)
            except (LiftingError, LatticeError, SemilatticeError) as exc:
                raise WitnessFailure(f"no projectability witness at node {X} n={n}: {exc}", X, n, "projection") from exc
            where = f"node {X} n={n}"
            clauses = [
                ledger.record("witness-clause-1", where, w.epic.is_surjective),
                ledger.record("witness-clause-2", where, w.iso.is_isomorphism),
                ledger.check_maps("witness-clause-3", where, w.iso.map[F.apply_arrow(w.epic).map], phi.map),
            ]
            for number, ok in enumerate(clauses, start=1):
                if not ok:
                    raise WitnessFailure(f"witness clause {number} fails at node {X} n={n}", X, n, f"clause-{number}")
            if A.size <= settings.UNIVERSAL_CHECK_SOURCE_LIMIT:
                bad = universal_violation(F, A, w.epic)
                ledger.record("witness-clause-4", where, bad is None, bad)
            replay.witnesses[(X, n)] = w
    logger.debug("built %d witnesses", len(replay.witnesses))
    return replay.witnesses


def _count_matching(functor: ConcreteFunctor, source, target, condition) -> int:
    return sum(1 for g in functor.iter_homs(source, target) if condition(g))


def _derived_hom(replay: "LiftReplay", label: str, source, target, values, scope: str = ABSOLUTE):
    """A transported map; a broken homomorphism law becomes a failing ledger row."""
    h = replay.functor.make_hom(source, target, values, check=False)
    w = h.law_violation()
    replay.ledger.record("hom-law", label, w is None, w, scope=scope)
    return h


def build_sbar(replay: LiftReplay, X: int, n: int):
    """The map Q^n(X) -> Q^(n+1)(X) induced by the chain map s_n."""
    F, rho = replay.functor, replay.bundle.rho[X]
    a0, z0 = replay.witnesses[(X, n)]
    a1, z1 = replay.witnesses[(X, n + 1)]
    s = replay.lifted.s(X, n)
    Q0, Q1 = a0.target, a1.target
    sbar = _derived_hom(replay, f"sbar node {X} n={n}", Q0, Q1, transport(a0.map, a1.map[s.map], Q0.size))
    where = f"node {X} n={n}"
    ledger = replay.ledger
    ledger.check_maps("sbar-epic-square", where, sbar.map[a0.map], a1.map[s.map])
    ledger.check_maps("sbar-rho-square", where, z1.map[F.apply_arrow(sbar).map], rho.map[z0.map])
    if Q1.size <= settings.UNIQUENESS_BOUND:

        def both_squares(g):
            return np.array_equal(g.map[a0.map], a1.map[s.map]) and np.array_equal(
                z1.map[F.apply_arrow(g).map], rho.map[z0.map]
            )

        count = _count_matching(F, Q0, Q1, both_squares)
        ledger.record("sbar-unique", where, count == 1, f"{count} candidates")
    replay.sbar[(X, n)] = sbar
    return sbar


def build_Qn_arrow(replay: LiftReplay, X: int, Y: int, n: int):
    """Q^n of the arrow X -> Y, by transport of E^n(X -> Y) along the witness epics."""
    F, lifted = replay.functor, replay.lifted
    aX, zX = replay.witnesses[(X, n)]
    aY, zY = replay.witnesses[(Y, n)]
    Ef = lifted.E_arrow(X, Y, n)
    q = _derived_hom(replay, f"q {X}->{Y} n={n}", aX.target, aY.target, transport(aX.map, aY.map[Ef.map], aX.target.size))
    hat_f = replay.bundle.source.hat.arrow(X, Y)
    where = f"{X}->{Y} n={n}"
    ledger = replay.ledger
    if X == Y:
        ledger.check_maps("q-identity", f"node {X} n={n}", q.map, np.arange(aX.target.size))
    else:
        ledger.check_maps("q-epic-square", where, q.map[aX.map], aY.map[Ef.map])
        ledger.check_maps("q-zeta-square", where, zY.map[F.apply_arrow(q).map], hat_f.map[zX.map])
        if aY.target.size <= settings.UNIQUENESS_BOUND:

            def both_squares(g):
                return np.array_equal(g.map[aX.map], aY.map[Ef.map]) and np.array_equal(
                    zY.map[F.apply_arrow(g).map], hat_f.map[zX.map]
                )

            count = _count_matching(F, aX.target, aY.target, both_squares)
            ledger.record("q-unique", where, count == 1, f"{count} candidates")
    replay.q_arrows[(X, Y, n)] = q
    return q


def build_tower(replay: LiftReplay):
    index, N = replay.bundle.index, replay.depth
    for X in range(index.nodes):
        for n in range(1, N):
            build_sbar(replay, X, n)
    pairs = [(X, X) for X in range(index.nodes)] + index.less_pairs()
    for X, Y in sorted(pairs):
        for n in range(1, N + 1):
            build_Qn_arrow(replay, X, Y, n)
    ledger, q = replay.ledger, replay.q_arrows
    for X, Y, Z in index.triples():
        for n in range(1, N + 1):
            ledger.check_maps("q-functoriality", f"{X}->{Y}->{Z} n={n}", q[(Y, Z, n)].map[q[(X, Y, n)].map], q[(X, Z, n)].map)
    # read with Q^(n+1) applied to the arrow
    for X, Y in index.less_pairs():
        for n in range(1, N):
            lhs = q[(X, Y, n + 1)].map[replay.sbar[(X, n)].map]
            rhs = replay.sbar[(Y, n)].map[q[(X, Y, n)].map]
            ledger.check_maps("q-shift-square", f"{X}->{Y} n={n}", lhs, rhs)


# --- stabilization and the colimit ---


def _restricts_bijectively(replay: LiftReplay, X: int, n: int) -> bool:
    here, there = replay.images[X][n], replay.images[X][n + 1]
    values = np.unique(replay.sbar[(X, n)].map[here])
    return values.size == here.size and np.array_equal(values, there)


def _idempotent_tail(replay: LiftReplay, X: int) -> bool:
    """Every observed chain map is one idempotent endomorphism of the same object."""
    N = replay.depth
    if not isinstance(replay.functor, IdentityFunctor) or N < 2:
        return False
    e = replay.sbar[(X, 1)]
    if e.source != e.target or not np.array_equal(e.map[e.map], e.map):
        return False
    return all(replay.sbar[(X, n)] == e for n in range(2, N))


def stabilization_index(replay: LiftReplay, X: int) -> Optional[int]:
    """
    Least n0 such that every later chain map is a bijection between consecutive images.

    For the identity functor a chain that is one idempotent e repeated settles
    on im e right after the last observed map, so n0 = N there.
    """
    N = replay.depth
    images = {1: np.arange(replay.Q(X, 1).size)}
    for n in range(1, N):
        images[n + 1] = np.unique(replay.sbar[(X, n)].map)
    replay.images[X] = images
    n0 = None
    for n in range(N - 1, 0, -1):
        if not _restricts_bijectively(replay, X, n):
            break
        n0 = n
    if n0 is None and _idempotent_tail(replay, X):
        replay.ledger.record("sbar-idempotent", f"node {X}", True, f"image of {images[N].size} elements")
        n0 = N
    return n0


def detect_stabilization(replay: LiftReplay) -> bool:
    for X in range(replay.bundle.index.nodes):
        replay.n0[X] = stabilization_index(replay, X)
    replay.stabilized = replay.depth >= 2 and all(n0 is not None for n0 in replay.n0.values())
    replay.top = replay.depth - 1 if replay.stabilized else replay.depth
    if not replay.stabilized:
        logger.info("the chain did not stabilize on every node, results are relative to depth %d", replay.depth)
    return replay.stabilized


def build_R(replay: LiftReplay, X: int):
    """R(X) with its cocone t_n: Q^n(X) -> R(X) for n <= replay.top."""
    F, N = replay.functor, replay.depth
    t = {}
    if replay.stabilized:
        n0 = replay.n0[X]
        images = replay.images[X]
        Qn0 = replay.Q(X, n0)
        R, inclusion = F.subobject(Qn0, images[n0])
        # rank of each element of the image at level n inside R
        rank = {n0: np.full(Qn0.size, -1, dtype=np.int64)}
        rank[n0][images[n0]] = np.arange(images[n0].size)
        for n in range(n0, N):
            nxt = np.full(replay.Q(X, n + 1).size, -1, dtype=np.int64)
            nxt[replay.sbar[(X, n)].map[images[n]]] = rank[n][images[n]]
            rank[n + 1] = nxt
        if n0 == N:
            e = replay.sbar[(X, N - 1)].map
            t[N] = _derived_hom(replay, f"t node {X} n={N}", replay.Q(X, N), R, rank[N][e], replay.scope)
        for n in range(N - 1, 0, -1):
            sbar = replay.sbar[(X, n)].map
            values = rank[n + 1][sbar] if n >= n0 else t[n + 1].map[sbar]
            t[n] = _derived_hom(replay, f"t node {X} n={n}", replay.Q(X, n), R, values, replay.scope)
    else:
        R = replay.Q(X, N)
        inclusion = R.identity()
        t[N] = R.identity()
        for n in range(N - 1, 0, -1):
            t[n] = _derived_hom(replay, f"t node {X} n={n}", replay.Q(X, n), R, t[n + 1].map[replay.sbar[(X, n)].map], replay.scope)
    replay.R[X], replay.R_inclusion[X] = R, inclusion
    for n, tn in t.items():
        replay.t[(X, n)] = tn
    for n in range(1, replay.top):
        lhs = t[n + 1].map[replay.sbar[(X, n)].map]
        replay.ledger.check_maps("r-cocone", f"node {X} n={n}", t[n].map, lhs, scope=replay.scope)
    return R, t, replay.stabilized


def build_R_arrow(replay: LiftReplay, X: int, Y: int):
    top = replay.top
    tX, tY = replay.t[(X, top)], replay.t[(Y, top)]
    values = tY.map[replay.q_arrows[(X, Y, top)].map]
    r = _derived_hom(replay, f"r {X}->{Y}", replay.R[X], replay.R[Y], transport(tX.map, values, replay.R[X].size), replay.scope)
    replay.r_arrows[(X, Y)] = r
    return r


class ChainColimit(NamedTuple):
    obj: FiniteJoinSemilattice
    mu: SemilatticeHom
    factor: Optional[SemilatticeHom]


def idempotent_chain_colimit(B: FiniteJoinSemilattice, rho: SemilatticeHom, mu_target: Optional[SemilatticeHom] = None) -> ChainColimit:
    """
    Colimit of B -> B -> B -> ... with every map the idempotent rho.

    The colimit is the image of rho with the corestriction as limiting map.
    A cocone ``mu_target`` (with mu_target o rho = mu_target) is factored
    through it.
    """
    if rho.source != B or rho.target != B:
        raise ShapeMismatch("rho must be an endomorphism of B")
    bad = np.flatnonzero(rho.map[rho.map] != rho.map)
    if bad.size:
        x = int(bad[0])
        raise NotIdempotent(f"rho(rho({x})) != rho({x})", witness=(x,))
    A, inclusion = image(rho)
    mu = corestrict(rho, inclusion)
    factor = None
    if mu_target is not None:
        if not np.array_equal(mu_target.map[rho.map], mu_target.map):
            raise LiftingError("the given map is not a cocone over the idempotent chain")
        factor = SemilatticeHom(A, mu_target.target, mu_target.map[inclusion.map])
    return ChainColimit(A, mu, factor)


def colimit_universal_violation(B: FiniteJoinSemilattice, rho: SemilatticeHom, colimit: ChainColimit, targets=None) -> Optional[tuple]:
    """Check that every cocone into a small target factors uniquely through the colimit."""
    for T in targets or small_semilattices(settings.UNIQUENESS_BOUND):
        for phi in iter_homs(B, T):
            if not np.array_equal(phi.map[rho.map], phi.map):
                continue
            count = sum(1 for psi in iter_homs(colimit.obj, T) if np.array_equal(psi.map[colimit.mu.map], phi.map))
            if count != 1:
                return T.name, phi.map.tolist(), count
    return None


# --- delta ---


def build_delta_and_verify(replay: LiftReplay) -> VerificationLedger:
    rd, F = replay.bundle.source, replay.functor
    index, top, scope = replay.bundle.index, replay.top, replay.scope
    ledger = replay.ledger
    for X in range(index.nodes):
        R, tX = replay.R[X], replay.t[(X, top)]
        zeta = replay.witnesses[(X, top)].iso
        FR = F.apply_object(R)
        values = rd.mu[X].map[zeta.map]
        delta = SemilatticeHom(FR, rd.base.objects[X], transport(F.apply_arrow(tX).map, values, FR.size), check=False)
        replay.delta[X] = delta
        for n in range(1, top + 1):
            lhs = delta.map[F.apply_arrow(replay.t[(X, n)]).map]
            rhs = rd.mu[X].map[replay.witnesses[(X, n)].iso.map]
            ledger.check_maps("delta-triangle", f"node {X} n={n}", lhs, rhs, scope=scope)
        if replay.stabilized:
            ledger.record("delta-iso", f"node {X}", delta.law_violation() is None and delta.is_isomorphism)
        else:
            # F Q^N(X) only covers D(X) when the chain has not settled
            ledger.record("delta-onto", f"node {X}", delta.law_violation() is None and delta.is_surjective, scope=scope)
        D = rd.base.objects[X]
        if D.size <= settings.UNIQUENESS_BOUND:
            Ft = F.apply_arrow(tX).map
            count = sum(1 for h in iter_homs(FR, D) if np.array_equal(h.map[Ft], values))
            ledger.record("delta-unique", f"node {X}", count == 1, f"{count} candidates", scope=scope)

    for X in range(index.nodes):
        r = build_R_arrow(replay, X, X)
        ledger.check_maps("r-identity", f"node {X}", r.map, np.arange(replay.R[X].size), scope=scope)
    for X, Y in index.less_pairs():
        r = build_R_arrow(replay, X, Y)
        for n in range(1, top + 1):
            lhs = r.map[replay.t[(X, n)].map]
            rhs = replay.t[(Y, n)].map[replay.q_arrows[(X, Y, n)].map]
            ledger.check_maps("r-arrow-square", f"{X}->{Y} n={n}", lhs, rhs, scope=scope)
    for X, Y, Z in index.triples():
        ra = replay.r_arrows
        ledger.check_maps("r-functoriality", f"{X}->{Y}->{Z}", ra[(Y, Z)].map[ra[(X, Y)].map], ra[(X, Z)].map, scope=scope)

    for X, Y in index.less_pairs():
        Df, hat_f = rd.base.arrow(X, Y), rd.hat.arrow(X, Y)
        FRf = F.apply_arrow(replay.r_arrows[(X, Y)]).map
        dX, dY = replay.delta[X].map, replay.delta[Y].map
        for n in range(1, top + 1):
            FtX = F.apply_arrow(replay.t[(X, n)]).map
            FtY = F.apply_arrow(replay.t[(Y, n)]).map
            FQf = F.apply_arrow(replay.q_arrows[(X, Y, n)]).map
            zX = replay.witnesses[(X, n)].iso.map
            zY = replay.witnesses[(Y, n)].iso.map
            chain = [
                dY[FRf[FtX]],
                dY[FtY[FQf]],
                rd.mu[Y].map[zY[FQf]],
                rd.mu[Y].map[hat_f.map[zX]],
                Df.map[rd.mu[X].map[zX]],
                Df.map[dX[FtX]],
            ]
            for step in range(1, len(chain)):
                ledger.check_maps(f"delta-naturality/step-{step}", f"{X}->{Y} n={n}", chain[step - 1], chain[step], scope=scope)
        ledger.check_maps("delta-naturality", f"{X}->{Y}", dY[FRf], Df.map[dX], scope=scope)

    if isinstance(F, IdentityFunctor) and replay.stabilized:
        for X in range(index.nodes):
            rho = replay.bundle.rho[X]
            colimit = idempotent_chain_colimit(rd.hat.objects[X], rho)
            same = np.array_equal(replay.R_inclusion[X].map, np.unique(rho.map)) and np.array_equal(
                replay.t[(X, top)].map, colimit.mu.map
            )
            ledger.record("colimit-cross-check", f"node {X}", same)
    return ledger


def replay(lifted: LiftedUnfolding) -> LiftReplay:
    """Run the full replay and return it with its ledger."""
    run = LiftReplay(lifted)
    verify_lift(run)
    build_witnesses(run)
    build_tower(run)
    detect_stabilization(run)
    for X in range(run.bundle.index.nodes):
        build_R(run, X)
    build_delta_and_verify(run)
    logger.info(
        "replay through %s: %d rows, %d failed, %s",
        run.functor.tag,
        len(run.ledger),
        len(run.ledger.failures()),
        "stabilized" if run.stabilized else f"relative to depth {run.depth}",
    )
    return run
