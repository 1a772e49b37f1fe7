"""
Finite lattices, their congruences, and the congruence semilattice functor.

Congruences are stored by their canonical block signature (sorted tuple of
sorted blocks), the same identity scheme FinEquiv-style partition classes use.
Every congruence of a finite lattice is compact, so ``con_lattice`` enumerates
Con L outright and presents it as a <v,0>-semilattice.
"""

import logging
from collections import deque
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

import monoid
import settings
import tables
from semilattice import FiniteJoinSemilattice, SemilatticeHom

logger = logging.getLogger(__name__)


class LatticeError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotALattice(LatticeError):
    pass


class NotALatticeHom(LatticeError):
    pass


class NotACongruence(LatticeError):
    pass


class TooLarge(LatticeError):
    pass


class NotIdealInduced(LatticeError):
    pass


class WitnessClaimFailed(LatticeError):
    pass


class FiniteLattice:
    def __init__(self, join, meet, *, name: Optional[str] = None, check: bool = True):
        self.join = tables.frozen_table(join, "join")
        self.meet = tables.frozen_table(meet, "meet")
        if self.join.shape != self.meet.shape:
            raise NotALattice("join and meet tables differ in size")
        self.size = int(self.join.shape[0])
        self.name = name
        if check:
            self._validate()

    def _validate(self):
        for label, t in (("join", self.join), ("meet", self.meet)):
            for axiom, finder in (
                ("idempotent", tables.idempotence_violation),
                ("commutative", tables.commutativity_violation),
                ("associative", tables.associativity_violation),
            ):
                w = finder(t)
                if w is not None:
                    raise NotALattice(f"{label} is not {axiom} at {w}", witness=(label, axiom) + w)
        idx = np.arange(self.size)
        # x v (x ^ y) = x and x ^ (x v y) = x
        bad = np.argwhere(self.join[idx[:, None], self.meet] != idx[:, None])
        if bad.size:
            x, y = (int(v) for v in bad[0])
            raise NotALattice(f"absorption fails: {x} v ({x} ^ {y}) != {x}", witness=("absorption", x, y))
        bad = np.argwhere(self.meet[idx[:, None], self.join] != idx[:, None])
        if bad.size:
            x, y = (int(v) for v in bad[0])
            raise NotALattice(f"absorption fails: {x} ^ ({x} v {y}) != {x}", witness=("absorption", x, y))

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"FiniteLattice({label}size={self.size})"

    @cached_property
    def _key(self) -> bytes:
        return tables.table_key(self.join, self.meet)

    def __eq__(self, other):
        return self is other or (isinstance(other, FiniteLattice) and self._key == other._key)

    def __hash__(self):
        return hash(self._key)

    @cached_property
    def leq_matrix(self) -> np.ndarray:
        m = self.join == np.arange(self.size)[None, :]
        m.flags.writeable = False
        return m

    @cached_property
    def bottom(self) -> int:
        return int(np.flatnonzero(self.leq_matrix.all(axis=1))[0])

    @cached_property
    def top(self) -> int:
        return int(np.flatnonzero(self.leq_matrix.all(axis=0))[0])

    def as_semilattice(self) -> FiniteJoinSemilattice:
        return FiniteJoinSemilattice(self.join, self.bottom, self.top, name=self.name, check=False)

    def identity(self) -> "LatticeHom":
        return LatticeHom(self, self, np.arange(self.size), check=False)


class LatticeHom:
    def __init__(self, source: FiniteLattice, target: FiniteLattice, mapping, *, check: bool = True):
        self.source = source
        self.target = target
        self.map = tables.frozen_vector(mapping, target.size)
        if self.map.size != source.size:
            raise NotALatticeHom(f"map has {self.map.size} entries, source has {source.size} elements")
        if check:
            w = self.law_violation()
            if w is not None:
                raise NotALatticeHom(f"lattice homomorphism law fails: {w}", witness=w)

    def law_violation(self) -> Optional[tuple]:
        w = tables.homomorphism_violation(self.map, self.source.join, self.target.join)
        if w is not None:
            return ("join",) + w
        w = tables.homomorphism_violation(self.map, self.source.meet, self.target.meet)
        if w is not None:
            return ("meet",) + w
        return None

    def __call__(self, x: int) -> int:
        return int(self.map[x])

    def __repr__(self):
        return f"LatticeHom({self.source.size}->{self.target.size}, {self.map.tolist()})"

    def __eq__(self, other):
        return (
            isinstance(other, LatticeHom)
            and self.source == other.source
            and self.target == other.target
            and np.array_equal(self.map, other.map)
        )

    def __hash__(self):
        return hash((self.source, self.target, self.map.tobytes()))

    def __matmul__(self, other: "LatticeHom") -> "LatticeHom":
        if other.target != self.source:
            raise NotALatticeHom(f"cannot compose {self!r} after {other!r}")
        return LatticeHom(other.source, self.target, self.map[other.map], check=False)

    @cached_property
    def is_injective(self) -> bool:
        return np.unique(self.map).size == self.source.size

    @cached_property
    def is_surjective(self) -> bool:
        return np.unique(self.map).size == self.target.size


# --- constructors ---


def lattice_from_leq(order, name: Optional[str] = None) -> FiniteLattice:
    """Join and meet tables from a boolean order matrix (least upper / greatest lower bounds)."""
    order = np.array(order, dtype=bool)
    n = order.shape[0]
    join = np.empty((n, n), dtype=np.int64)
    meet = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            upper = np.flatnonzero(order[x] & order[y])
            lower = np.flatnonzero(order[:, x] & order[:, y])
            lub = [u for u in upper if order[u, upper].all()]
            glb = [d for d in lower if order[lower, d].all()]
            if not lub or not glb:
                raise NotALattice(f"elements {x} and {y} lack a join or a meet", witness=(x, y))
            join[x, y], meet[x, y] = lub[0], glb[0]
    return FiniteLattice(join, meet, name=name)


def lattice_from_semilattice(S: FiniteJoinSemilattice, name: Optional[str] = None) -> FiniteLattice:
    return FiniteLattice(S.join, S.meet_table, name=name or S.name)


def chain_lattice(n: int) -> FiniteLattice:
    idx = np.arange(n)
    return FiniteLattice(np.maximum.outer(idx, idx), np.minimum.outer(idx, idx), name=f"chain{n}", check=False)


def _covers_to_order(n: int, covers) -> np.ndarray:
    order = np.eye(n, dtype=bool)
    for lo, hi in covers:
        order[lo, hi] = True
    for k in range(n):
        order |= order[:, k][:, None] & order[k][None, :]
    return order


def lattice_from_covers(n: int, covers, name: Optional[str] = None) -> FiniteLattice:
    return lattice_from_leq(_covers_to_order(n, covers), name=name)


def m3_lattice() -> FiniteLattice:
    return lattice_from_covers(5, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)], name="M3")


def n5_lattice() -> FiniteLattice:
    return lattice_from_covers(5, [(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)], name="N5")


def small_lattices(max_size: int = 5) -> List[FiniteLattice]:
    """Every lattice with at most ``max_size`` (<= 5) elements, up to isomorphism."""
    shapes = [chain_lattice(n) for n in range(1, 6)]
    shapes += [
        lattice_from_covers(4, [(0, 1), (0, 2), (1, 3), (2, 3)], name="square"),
        lattice_from_covers(5, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)], name="square+top"),
        lattice_from_covers(5, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)], name="square+bottom"),
        m3_lattice(),
        n5_lattice(),
    ]
    return sorted((L for L in shapes if L.size <= max_size), key=lambda L: L.size)


def product_lattice(A: FiniteLattice, B: FiniteLattice) -> FiniteLattice:
    n, m = A.size, B.size
    join = (A.join[:, None, :, None] * m + B.join[None, :, None, :]).reshape(n * m, n * m)
    meet = (A.meet[:, None, :, None] * m + B.meet[None, :, None, :]).reshape(n * m, n * m)
    return FiniteLattice(join, meet, check=False)


def sublattice(L: FiniteLattice, elements: Iterable[int]) -> Tuple[FiniteLattice, LatticeHom]:
    elems = np.array(sorted({int(e) for e in elements}), dtype=np.int64)
    lookup = np.full(L.size, -1, dtype=np.int64)
    lookup[elems] = np.arange(elems.size)
    join = lookup[L.join[np.ix_(elems, elems)]]
    meet = lookup[L.meet[np.ix_(elems, elems)]]
    if (join < 0).any() or (meet < 0).any():
        raise NotALattice("subset is not closed under join and meet")
    sub = FiniteLattice(join, meet, check=False)
    return sub, LatticeHom(sub, L, elems, check=False)


def iter_lattice_homs(L: FiniteLattice, X: FiniteLattice) -> Iterator[LatticeHom]:
    """All lattice homomorphisms L -> X, backtracking over elements in index order."""
    n = L.size
    img = np.full(n, -1, dtype=np.int64)

    def consistent(x) -> bool:
        # every pair among assigned elements whose result is assigned, once x is placed
        known = np.flatnonzero(img >= 0)
        for table, target in ((L.join, X.join), (L.meet, X.meet)):
            z = table[x, known]
            hit = img[z] >= 0
            if (img[z[hit]] != target[img[x], img[known[hit]]]).any():
                return False
            a, b = np.nonzero(table[np.ix_(known, known)] == x)
            if (target[img[known[a]], img[known[b]]] != img[x]).any():
                return False
        return True

    def assign(x):
        if x == n:
            h = LatticeHom(L, X, img.copy(), check=False)
            if h.law_violation() is None:
                yield h
            return
        for v in range(X.size):
            img[x] = v
            if consistent(x):
                yield from assign(x + 1)
        img[x] = -1

    yield from assign(0)


# --- congruences ---


def _canonical_blocks(blocks) -> Tuple[Tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(int(x) for x in b)) for b in blocks if len(b)))


class Congruence:
    """A partition of a lattice's elements compatible with join and meet."""

    def __init__(self, lattice: FiniteLattice, blocks, *, check: bool = True):
        self.lattice = lattice
        self.blocks = _canonical_blocks(blocks)
        labels = np.full(lattice.size, -1, dtype=np.int64)
        for i, block in enumerate(self.blocks):
            if (labels[list(block)] >= 0).any():
                raise NotACongruence("blocks overlap")
            labels[list(block)] = i
        if (labels < 0).any():
            raise NotACongruence(f"element {int(np.flatnonzero(labels < 0)[0])} is in no block")
        labels.flags.writeable = False
        self.labels = labels
        if check:
            w = self.compatibility_violation()
            if w is not None:
                raise NotACongruence(f"partition is not compatible: {w}", witness=w)

    @property
    def signature(self) -> Tuple[Tuple[int, ...], ...]:
        return self.blocks

    def compatibility_violation(self) -> Optional[tuple]:
        lab = self.labels
        same = lab[:, None] == lab[None, :]
        for label, table in (("join", self.lattice.join), ("meet", self.lattice.meet)):
            # translated[x, y, z] compares x.z with y.z for every related x, y
            moved = lab[table]
            bad = np.argwhere(same[:, :, None] & (moved[:, None, :] != moved[None, :, :]))
            if bad.size:
                return (label,) + tuple(int(v) for v in bad[0])
        return None

    def relates(self, x: int, y: int) -> bool:
        return bool(self.labels[x] == self.labels[y])

    def __le__(self, other: "Congruence") -> bool:
        return all(len({int(other.labels[x]) for x in block}) == 1 for block in self.blocks)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.lattice == other.lattice and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"Congruence({[list(b) for b in self.blocks]})"

    def pairs(self) -> Iterator[Tuple[int, int]]:
        """Consecutive pairs inside each block; they generate the congruence as an equivalence."""
        for block in self.blocks:
            yield from zip(block, block[1:])


def diagonal(L: FiniteLattice) -> Congruence:
    return Congruence(L, [[x] for x in range(L.size)], check=False)


def full_congruence(L: FiniteLattice) -> Congruence:
    return Congruence(L, [list(range(L.size))], check=False)


def _blocks_from_parents(parent: List[int]) -> List[List[int]]:
    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    groups = {}
    for x in range(len(parent)):
        groups.setdefault(find(x), []).append(x)
    return list(groups.values())


def generate_congruence(L: FiniteLattice, pairs: Iterable[Tuple[int, int]]) -> Congruence:
    """Least congruence containing the pairs: merge, then saturate under translations."""
    parent = list(range(L.size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    work = deque((int(u), int(v)) for u, v in pairs)
    while work:
        u, v = work.popleft()
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        parent[max(ru, rv)] = min(ru, rv)
        for z in range(L.size):
            work.append((int(L.join[u, z]), int(L.join[v, z])))
            work.append((int(L.meet[u, z]), int(L.meet[v, z])))
    return Congruence(L, _blocks_from_parents(parent), check=False)


def principal_congruence(L: FiniteLattice, x: int, y: int) -> Congruence:
    tables.check_index(x, L.size)
    tables.check_index(y, L.size)
    return generate_congruence(L, [(x, y)])


def join_congruences(a: Congruence, b: Congruence) -> Congruence:
    """Join in Con L is the equivalence join of the two partitions."""
    parent = list(range(a.lattice.size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in list(a.pairs()) + list(b.pairs()):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    return Congruence(a.lattice, _blocks_from_parents(parent), check=False)


def all_partitions(n: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    if n == 0:
        yield ()
        return
    x = (n - 1,)
    for rest in all_partitions(n - 1):
        yield rest + (x,)
        for i, block in enumerate(rest):
            yield rest[:i] + (block + x,) + rest[i + 1:]


def congruences_by_partitions(L: FiniteLattice) -> List[Congruence]:
    found = []
    for blocks in all_partitions(L.size):
        theta = Congruence(L, blocks, check=False)
        if theta.compatibility_violation() is None:
            found.append(theta)
    return sorted(found, key=lambda c: c.signature)


def congruences_by_closure(L: FiniteLattice) -> List[Congruence]:
    """Close the principal congruences under joins."""
    principal = {principal_congruence(L, x, y) for x in range(L.size) for y in range(x + 1, L.size)}
    seen = {diagonal(L)} | principal
    frontier = list(seen)
    while frontier:
        fresh = []
        for a in frontier:
            for b in principal:
                c = join_congruences(a, b)
                if c not in seen:
                    seen.add(c)
                    fresh.append(c)
        frontier = fresh
    return sorted(seen, key=lambda c: c.signature)


class ConcSemilattice(FiniteJoinSemilattice):
    """Con L as a <v,0>-semilattice; element i is ``congruences[i]``, element 0 is the diagonal."""

    def __init__(self, lattice: FiniteLattice, congruences: Sequence[Congruence]):
        self.lattice = lattice
        self.congruences = tuple(congruences)
        self._index = {c.signature: i for i, c in enumerate(self.congruences)}
        k = len(self.congruences)
        join = np.empty((k, k), dtype=np.int64)
        for i in range(k):
            for j in range(i, k):
                join[i, j] = join[j, i] = self._index[join_congruences(self.congruences[i], self.congruences[j]).signature]
        unit = self._index[full_congruence(lattice).signature]
        super().__init__(join, 0, unit, name=f"Conc {lattice.name}" if lattice.name else None, check=False)

    def index_of(self, theta: Congruence) -> int:
        return self._index[theta.signature]

    def congruence(self, i: int) -> Congruence:
        return self.congruences[i]


@lru_cache(maxsize=512)
def con_lattice(L: FiniteLattice, limit: Optional[int] = None) -> ConcSemilattice:
    bound = settings.INPUT_LIMIT if limit is None else limit
    if L.size > bound:
        raise TooLarge(f"lattice has {L.size} elements, congruence enumeration is bounded at {bound}")
    if L.size <= settings.PARTITION_FILTER_LIMIT:
        congruences = congruences_by_partitions(L)
    else:
        congruences = congruences_by_closure(L)
    logger.debug("Con of %r has %d congruences", L, len(congruences))
    return ConcSemilattice(L, congruences)


@lru_cache(maxsize=512)
def principal_index(L: FiniteLattice) -> np.ndarray:
    """principal_index(L)[x, y] is the index of Θ(x, y) in con_lattice(L)."""
    conc = con_lattice(L)
    out = np.zeros((L.size, L.size), dtype=np.int64)
    for x in range(L.size):
        for y in range(x + 1, L.size):
            out[x, y] = out[y, x] = conc.index_of(principal_congruence(L, x, y))
    out.flags.writeable = False
    return out


@lru_cache(maxsize=1024)
def conc_hom(f: LatticeHom) -> SemilatticeHom:
    source, target = con_lattice(f.source), con_lattice(f.target)
    images = [
        target.index_of(generate_congruence(f.target, [(f.map[x], f.map[y]) for x, y in theta.pairs()]))
        for theta in source.congruences
    ]
    return SemilatticeHom(source, target, images)


def quotient_lattice(L: FiniteLattice, theta: Congruence) -> Tuple[FiniteLattice, LatticeHom]:
    reps = np.array([block[0] for block in theta.blocks], dtype=np.int64)
    lab = theta.labels
    join = lab[L.join[np.ix_(reps, reps)]]
    meet = lab[L.meet[np.ix_(reps, reps)]]
    Q = FiniteLattice(join, meet, check=False)
    return Q, LatticeHom(L, Q, lab, check=False)


# --- projectability witness for Conc ---


class ConcWitness(NamedTuple):
    epic: LatticeHom
    iso: SemilatticeHom
    kernel: Congruence


def kernel_congruence(L: FiniteLattice, phi: SemilatticeHom) -> Congruence:
    """The congruence of pairs (x, y) with phi(Θ(x, y)) = 0, checked to be a congruence."""
    killed = phi.map[principal_index(L)] == phi.target.zero
    steps = killed.astype(np.int64)
    broken = ((steps @ steps) > 0) & ~killed
    if broken.any():
        x, y = (int(v) for v in np.argwhere(broken)[0])
        raise WitnessClaimFailed(f"kernel relation is not transitive at ({x},{y})", witness=(x, y))
    seen = np.zeros(L.size, dtype=bool)
    blocks = []
    for x in range(L.size):
        if not seen[x]:
            block = np.flatnonzero(killed[x])
            seen[block] = True
            blocks.append(block.tolist())
    try:
        return Congruence(L, blocks)
    except NotACongruence as exc:
        raise WitnessClaimFailed(f"kernel relation is not a congruence: {exc}", witness=exc.witness) from exc


def conc_projectability_witness(L: FiniteLattice, phi: SemilatticeHom) -> ConcWitness:
    conc = con_lattice(L)
    if phi.source != conc:
        raise LatticeError("phi must be defined on Conc L")
    if not monoid.is_ideal_induced(monoid.hom_as_monoid_hom(phi)):
        raise NotIdealInduced(f"{phi!r} is not ideal-induced")
    kernel = kernel_congruence(L, phi)
    for i, u in enumerate(conc.congruences):
        if (phi.map[i] == phi.target.zero) != (u <= kernel):
            raise WitnessClaimFailed(f"phi({u!r}) = 0 disagrees with containment in the kernel", witness=(i,))
    quotient, p = quotient_lattice(L, kernel)
    conc_p = conc_hom(p)
    eps_map = np.full(conc_p.target.size, -1, dtype=np.int64)
    for i, v in enumerate(conc_p.map):
        value = int(phi.map[i])
        if eps_map[v] < 0:
            eps_map[v] = value
        elif eps_map[v] != value:
            raise WitnessClaimFailed(f"phi does not factor through Conc p at congruence {i}", witness=(i,))
    if (eps_map < 0).any():
        raise WitnessClaimFailed("Conc p is not surjective")
    eps = SemilatticeHom(conc_p.target, phi.target, eps_map)
    if not eps.is_isomorphism:
        raise WitnessClaimFailed("induced map Conc(L/a) -> S is not an isomorphism")
    logger.debug("conc witness for %r collapses to %d blocks", L, len(kernel.blocks))
    return ConcWitness(p, eps, kernel)
