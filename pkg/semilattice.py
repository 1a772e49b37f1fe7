"""
Finite join-semilattices with zero, their homomorphisms and binary products.

Elements are dense indices ``0..size-1``. Each semilattice carries its join
table as a read-only numpy array, and all structure is derived from that
table:

 - the order ``x <= y`` iff ``join[x, y] == y``
 - distributivity and the Boolean test, both checked exhaustively
 - join-irreducibles and the canonical Boolean retraction of a distributive
   semilattice onto the powerset of its join-irreducibles
 - the backtracking search for morphisms between retraction data
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

import tables

logger = logging.getLogger(__name__)


class SemilatticeError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotIdempotent(SemilatticeError):
    pass


class NotCommutative(SemilatticeError):
    pass


class NotAssociative(SemilatticeError):
    pass


class ZeroNotNeutral(SemilatticeError):
    pass


class UnitNotAbsorbing(SemilatticeError):
    pass


class NotAHomomorphism(SemilatticeError):
    pass


class SourceMismatch(SemilatticeError):
    pass


class ShapeMismatch(SemilatticeError):
    pass


class NotDistributive(SemilatticeError):
    pass


class NotFound(SemilatticeError):
    pass


class FiniteJoinSemilattice:
    """A finite <v,0>-semilattice given by its join table."""

    def __init__(self, join, zero: int, unit: Optional[int] = None, *, name: Optional[str] = None, check: bool = True):
        self.join = tables.frozen_table(join, "join")
        self.size = int(self.join.shape[0])
        tables.check_index(zero, self.size, "zero")
        if unit is not None:
            tables.check_index(unit, self.size, "unit")
        self.zero = int(zero)
        self.unit = None if unit is None else int(unit)
        self.name = name
        if check:
            self._validate()

    def _validate(self):
        t = self.join
        w = tables.idempotence_violation(t)
        if w is not None:
            x = w[0]
            raise NotIdempotent(f"join({x},{x}) = {t[x, x]}, expected {x}", witness=(x, x, int(t[x, x])))
        w = tables.commutativity_violation(t)
        if w is not None:
            x, y = w
            raise NotCommutative(
                f"join({x},{y}) = {t[x, y]} but join({y},{x}) = {t[y, x]}", witness=(x, y, int(t[x, y]))
            )
        w = tables.associativity_violation(t)
        if w is not None:
            x, y, z = w
            raise NotAssociative(f"join is not associative on ({x},{y},{z})", witness=(x, y, z))
        w = tables.neutral_violation(t, self.zero)
        if w is not None:
            x = w[0]
            raise ZeroNotNeutral(
                f"join({self.zero},{x}) = {t[self.zero, x]}, expected {x}",
                witness=(self.zero, x, int(t[self.zero, x])),
            )
        if self.unit is not None:
            w = tables.absorbing_violation(t, self.unit)
            if w is not None:
                x = w[0]
                raise UnitNotAbsorbing(
                    f"join({self.unit},{x}) = {t[self.unit, x]}, expected {self.unit}",
                    witness=(self.unit, x, int(t[self.unit, x])),
                )

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"FiniteJoinSemilattice({label}size={self.size}, zero={self.zero}, unit={self.unit})"

    @cached_property
    def _key(self) -> bytes:
        return tables.table_key(self.join, self.zero, self.unit)

    def __eq__(self, other):
        return self is other or (isinstance(other, FiniteJoinSemilattice) and self._key == other._key)

    def __hash__(self):
        return hash(self._key)

    @property
    def elements(self) -> range:
        return range(self.size)

    @cached_property
    def leq_matrix(self) -> np.ndarray:
        """leq_matrix[x, y] is True iff x <= y."""
        m = self.join == np.arange(self.size)[None, :]
        m.flags.writeable = False
        return m

    def leq(self, x: int, y: int) -> bool:
        return bool(self.join[x, y] == y)

    def join_all(self, elements: Iterable[int]) -> int:
        acc = self.zero
        for x in elements:
            acc = int(self.join[acc, x])
        return acc

    @cached_property
    def top(self) -> int:
        return self.join_all(range(self.size))

    @cached_property
    def down_sets(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.flatnonzero(self.leq_matrix[:, x]) for x in range(self.size))

    @cached_property
    def meet_table(self) -> np.ndarray:
        """Greatest lower bounds; a finite join-semilattice with zero is a lattice."""
        n = self.size
        meet = np.empty((n, n), dtype=np.int64)
        for x in range(n):
            for y in range(x, n):
                lower = np.flatnonzero(self.leq_matrix[:, x] & self.leq_matrix[:, y])
                meet[x, y] = meet[y, x] = self.join_all(lower)
        meet.flags.writeable = False
        return meet

    def identity(self) -> "SemilatticeHom":
        return SemilatticeHom(self, self, np.arange(self.size), check=False)


class SemilatticeHom:
    """A <v,0>-homomorphism, stored as the table of images."""

    def __init__(self, source: FiniteJoinSemilattice, target: FiniteJoinSemilattice, mapping, *, check: bool = True):
        self.source = source
        self.target = target
        self.map = tables.frozen_vector(mapping, target.size)
        if self.map.size != source.size:
            raise ShapeMismatch(f"map has {self.map.size} entries, source has {source.size} elements")
        if check:
            w = self.law_violation()
            if w is not None:
                raise NotAHomomorphism(f"homomorphism law fails: {w}", witness=w)

    def law_violation(self) -> Optional[tuple]:
        if self.map[self.source.zero] != self.target.zero:
            return ("zero", self.source.zero, int(self.map[self.source.zero]))
        w = tables.homomorphism_violation(self.map, self.source.join, self.target.join)
        return None if w is None else ("join",) + w

    def __call__(self, x: int) -> int:
        return int(self.map[x])

    def __repr__(self):
        return f"SemilatticeHom({self.source.size}->{self.target.size}, {self.map.tolist()})"

    def __eq__(self, other):
        return (
            isinstance(other, SemilatticeHom)
            and self.source == other.source
            and self.target == other.target
            and np.array_equal(self.map, other.map)
        )

    def __hash__(self):
        return hash((self.source, self.target, self.map.tobytes()))

    def __matmul__(self, other: "SemilatticeHom") -> "SemilatticeHom":
        """self @ other is the composite 'self after other'."""
        if other.target != self.source:
            raise SourceMismatch(f"cannot compose {self!r} after {other!r}")
        return SemilatticeHom(other.source, self.target, self.map[other.map], check=False)

    @cached_property
    def is_injective(self) -> bool:
        return np.unique(self.map).size == self.source.size

    @cached_property
    def is_surjective(self) -> bool:
        return np.unique(self.map).size == self.target.size

    @cached_property
    def is_order_reflecting(self) -> bool:
        image_order = self.target.leq_matrix[np.ix_(self.map, self.map)]
        return not bool((image_order & ~self.source.leq_matrix).any())

    @property
    def is_embedding(self) -> bool:
        return self.is_injective and self.is_order_reflecting

    @property
    def is_isomorphism(self) -> bool:
        return self.is_injective and self.is_surjective

    def preserves_unit(self) -> bool:
        if self.source.unit is None or self.target.unit is None:
            return False
        return int(self.map[self.source.unit]) == self.target.unit

    def is_unital_embedding(self) -> bool:
        """A <v,0,1>-embedding."""
        return self.is_embedding and self.preserves_unit()

    def inverse(self) -> "SemilatticeHom":
        if not self.is_isomorphism:
            raise SemilatticeError(f"{self!r} is not an isomorphism")
        inv = np.empty(self.target.size, dtype=np.int64)
        inv[self.map] = np.arange(self.source.size)
        return SemilatticeHom(self.target, self.source, inv, check=False)


# --- construction helpers ---


def make_semilattice(join_table, zero: int, unit: Optional[int] = None, name: Optional[str] = None) -> FiniteJoinSemilattice:
    return FiniteJoinSemilattice(join_table, zero, unit, name=name)


def leq(S: FiniteJoinSemilattice, x: int, y: int) -> bool:
    tables.check_index(x, S.size)
    tables.check_index(y, S.size)
    return S.leq(x, y)


def identity(S: FiniteJoinSemilattice) -> SemilatticeHom:
    return S.identity()


def zero_hom(S: FiniteJoinSemilattice, T: FiniteJoinSemilattice) -> SemilatticeHom:
    return SemilatticeHom(S, T, np.full(S.size, T.zero), check=False)


def semilattice_from_leq(order, name: Optional[str] = None) -> FiniteJoinSemilattice:
    """Build the join table of a finite poset given as a boolean leq matrix."""
    order = np.array(order, dtype=bool)
    n = order.shape[0]
    join = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            upper = np.flatnonzero(order[x] & order[y])
            least = [u for u in upper if order[u, upper].all()]
            if not least:
                raise SemilatticeError(f"elements {x} and {y} have no least upper bound", witness=(x, y))
            join[x, y] = least[0]
    bottoms = [z for z in range(n) if order[z].all()]
    if not bottoms:
        raise SemilatticeError("order has no least element")
    tops = [u for u in range(n) if order[:, u].all()]
    return FiniteJoinSemilattice(join, bottoms[0], tops[0] if tops else None, name=name)


def chain_semilattice(n: int) -> FiniteJoinSemilattice:
    idx = np.arange(n)
    return FiniteJoinSemilattice(np.maximum.outer(idx, idx), 0, n - 1, name=f"chain{n}")


def boolean_semilattice(k: int) -> FiniteJoinSemilattice:
    """Powerset of a k-element set; element index = bitmask."""
    idx = np.arange(1 << k)
    return FiniteJoinSemilattice(np.bitwise_or.outer(idx, idx), 0, (1 << k) - 1, name=f"boolean{k}", check=False)


def small_semilattices(max_size: int = 4) -> List[FiniteJoinSemilattice]:
    """One representative per isomorphism class with at most ``max_size`` (<= 4) elements."""
    shapes = [chain_semilattice(n) for n in range(1, min(max_size, 4) + 1)]
    if max_size >= 4:
        shapes.append(boolean_semilattice(2))
    return shapes


def _order_from_covers(n: int, covers) -> np.ndarray:
    order = np.eye(n, dtype=bool)
    for lo, hi in covers:
        order[lo, hi] = True
    for k in range(n):
        order |= order[:, k][:, None] & order[k][None, :]
    return order


def m3_semilattice() -> FiniteJoinSemilattice:
    """0 < a, b, c < 1 with three pairwise incomparable atoms."""
    covers = [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]
    return semilattice_from_leq(_order_from_covers(5, covers), name="M3")


def n5_semilattice() -> FiniteJoinSemilattice:
    """The pentagon 0 < a < b < 1, 0 < c < 1."""
    covers = [(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]
    return semilattice_from_leq(_order_from_covers(5, covers), name="N5")


# --- products ---


@dataclass(frozen=True)
class ProductDecomposition:
    """A Π B with projections; element (i, j) is stored at index i * |B| + j."""

    left: FiniteJoinSemilattice
    right: FiniteJoinSemilattice
    product: FiniteJoinSemilattice
    left_proj: SemilatticeHom
    right_proj: SemilatticeHom

    def encode(self, i: int, j: int) -> int:
        return i * self.right.size + j

    def decode(self, k: int) -> Tuple[int, int]:
        i, j = divmod(k, self.right.size)
        return int(i), int(j)

    @property
    def pair_encoding(self) -> np.ndarray:
        idx = np.arange(self.product.size)
        return np.stack(np.divmod(idx, self.right.size), axis=1)


def product(A: FiniteJoinSemilattice, B: FiniteJoinSemilattice) -> ProductDecomposition:
    n, m = A.size, B.size
    join = (A.join[:, None, :, None] * m + B.join[None, :, None, :]).reshape(n * m, n * m)
    unit = A.unit * m + B.unit if A.unit is not None and B.unit is not None else None
    P = FiniteJoinSemilattice(join, A.zero * m + B.zero, unit, check=False)
    idx = np.arange(n * m)
    left = SemilatticeHom(P, A, idx // m, check=False)
    right = SemilatticeHom(P, B, idx % m, check=False)
    return ProductDecomposition(A, B, P, left, right)


def pair_hom(f: SemilatticeHom, g: SemilatticeHom, decomposition: Optional[ProductDecomposition] = None) -> SemilatticeHom:
    """The morphism f x g into the product of the targets."""
    if f.source != g.source:
        raise SourceMismatch("pair_hom needs homomorphisms with a common source")
    dec = decomposition if decomposition is not None else product(f.target, g.target)
    if dec.left != f.target or dec.right != g.target:
        raise ShapeMismatch("decomposition factors do not match the targets")
    return SemilatticeHom(f.source, dec.product, f.map * dec.right.size + g.map, check=False)


def parallel_hom(
    f: SemilatticeHom, g: SemilatticeHom, source_dec: ProductDecomposition, target_dec: ProductDecomposition
) -> SemilatticeHom:
    """f Π g = (f o left) x (g o right)."""
    if f.source != source_dec.left or g.source != source_dec.right:
        raise ShapeMismatch("source decomposition does not match the sources of f and g")
    if f.target != target_dec.left or g.target != target_dec.right:
        raise ShapeMismatch("target decomposition does not match the targets of f and g")
    return pair_hom(f @ source_dec.left_proj, g @ source_dec.right_proj, target_dec)


# --- subobjects ---


def sub_semilattice(S: FiniteJoinSemilattice, elements: Iterable[int]) -> Tuple[FiniteJoinSemilattice, SemilatticeHom]:
    """The sub-semilattice on a join-closed set containing zero, with its inclusion."""
    elems = np.array(sorted({int(e) for e in elements}), dtype=np.int64)
    lookup = np.full(S.size, -1, dtype=np.int64)
    lookup[elems] = np.arange(elems.size)
    if lookup[S.zero] < 0:
        raise SemilatticeError("a sub-semilattice must contain zero")
    table = lookup[S.join[np.ix_(elems, elems)]]
    if (table < 0).any():
        i, j = np.argwhere(table < 0)[0]
        raise SemilatticeError(f"{elems[i]} v {elems[j]} leaves the subset", witness=(int(elems[i]), int(elems[j])))
    unit = int(lookup[S.unit]) if S.unit is not None and lookup[S.unit] >= 0 else None
    sub = FiniteJoinSemilattice(table, int(lookup[S.zero]), unit, check=False)
    return sub, SemilatticeHom(sub, S, elems, check=False)


def image(h: SemilatticeHom) -> Tuple[FiniteJoinSemilattice, SemilatticeHom]:
    return sub_semilattice(h.target, np.unique(h.map))


def corestrict(h: SemilatticeHom, inclusion: SemilatticeHom) -> SemilatticeHom:
    """Factor h through an inclusion whose image contains h's image."""
    lookup = np.full(inclusion.target.size, -1, dtype=np.int64)
    lookup[inclusion.map] = np.arange(inclusion.source.size)
    values = lookup[h.map]
    if (values < 0).any():
        x = int(np.flatnonzero(values < 0)[0])
        raise SemilatticeError(f"h({x}) lies outside the subobject", witness=(x,))
    return SemilatticeHom(h.source, inclusion.source, values, check=False)


# --- structural predicates ---


def distributivity_counterexample(S: FiniteJoinSemilattice) -> Optional[Tuple[int, int, int]]:
    """Least (a, b, c) with c <= a v b that does not split as a' v b', a' <= a, b' <= b."""
    order = S.leq_matrix
    downs = S.down_sets
    for a in range(S.size):
        for b in range(a, S.size):
            reach = np.zeros(S.size, dtype=bool)
            reach[S.join[np.ix_(downs[a], downs[b])].ravel()] = True
            missing = np.flatnonzero(order[:, S.join[a, b]] & ~reach)
            if missing.size:
                return a, b, int(missing[0])
    return None


def is_distributive(S: FiniteJoinSemilattice) -> bool:
    return distributivity_counterexample(S) is None


def is_boolean(S: FiniteJoinSemilattice) -> bool:
    if S.size == 1:
        return True
    if not is_distributive(S):
        return False
    top = S.top
    meet = S.meet_table
    for x in range(S.size):
        if not np.any((S.join[x] == top) & (meet[x] == S.zero)):
            logger.debug("element %d has no complement", x)
            return False
    return True


def join_irreducibles(S: FiniteJoinSemilattice) -> List[int]:
    result = []
    for j in range(S.size):
        if j == S.zero:
            continue
        splits = S.join == j
        splits[j, :] = False
        splits[:, j] = False
        if not splits.any():
            result.append(j)
    return result


# --- retractions ---


@dataclass(frozen=True)
class Retraction:
    """Retraction data (B, eps, mu) of a base semilattice D: mu o eps = id_D."""

    base: FiniteJoinSemilattice
    hat: FiniteJoinSemilattice
    eps: SemilatticeHom
    mu: SemilatticeHom

    @property
    def rho(self) -> SemilatticeHom:
        return self.eps @ self.mu

    def identity_violation(self) -> Optional[int]:
        bad = np.flatnonzero(self.mu.map[self.eps.map] != np.arange(self.base.size))
        return int(bad[0]) if bad.size else None

    def validate(self):
        if self.eps.source != self.base or self.eps.target != self.hat:
            raise ShapeMismatch("eps must map the base into the hat")
        if self.mu.source != self.hat or self.mu.target != self.base:
            raise ShapeMismatch("mu must map the hat onto the base")
        x = self.identity_violation()
        if x is not None:
            raise SemilatticeError(f"mu(eps({x})) = {self.mu(self.eps(x))}, expected {x}", witness=(x,))

    def is_valid(self) -> bool:
        try:
            self.validate()
        except SemilatticeError:
            return False
        return True


def boolean_retraction(D: FiniteJoinSemilattice) -> Retraction:
    """Retract D onto the powerset of its join-irreducibles (bitmask-coded)."""
    witness = distributivity_counterexample(D)
    if witness is not None:
        raise NotDistributive(f"{D!r} is not distributive at {witness}", witness=witness)
    irreducibles = join_irreducibles(D)
    k = len(irreducibles)
    hat = boolean_semilattice(k)
    bits = 1 << np.arange(k, dtype=np.int64)
    eps_map = (D.leq_matrix[irreducibles, :].T * bits).sum(axis=1) if k else np.zeros(D.size, dtype=np.int64)
    mu_map = np.empty(hat.size, dtype=np.int64)
    mu_map[0] = D.zero
    for mask in range(1, hat.size):
        low = mask & -mask
        mu_map[mask] = D.join[mu_map[mask ^ low], irreducibles[low.bit_length() - 1]]
    eps = SemilatticeHom(D, hat, eps_map)
    mu = SemilatticeHom(hat, D, mu_map)
    retraction = Retraction(D, hat, eps, mu)
    retraction.validate()
    logger.debug("boolean retraction of %r through %d join-irreducibles", D, k)
    return retraction


def retraction_morphism_squares(
    f: SemilatticeHom, g: SemilatticeHom, rx: Retraction, ry: Retraction
) -> Optional[Tuple[str, int]]:
    """First failure of g o eps_X = eps_Y o f or mu_Y o g = f o mu_X, as (square, element)."""
    bad = np.flatnonzero(g.map[rx.eps.map] != ry.eps.map[f.map])
    if bad.size:
        return "eps", int(bad[0])
    bad = np.flatnonzero(ry.mu.map[g.map] != f.map[rx.mu.map])
    if bad.size:
        return "mu", int(bad[0])
    return None


def compose_retraction_morphisms(
    first: Tuple[SemilatticeHom, SemilatticeHom], second: Tuple[SemilatticeHom, SemilatticeHom]
) -> Tuple[SemilatticeHom, SemilatticeHom]:
    """Componentwise composite 'second after first' of (base, hat) morphism pairs."""
    return second[0] @ first[0], second[1] @ first[1]


# --- homomorphism search ---


def iter_homs(
    A: FiniteJoinSemilattice,
    B: FiniteJoinSemilattice,
    candidates: Optional[Callable[[int, int], Iterable[int]]] = None,
    prune: Optional[Callable[[int, Dict[int, int]], bool]] = None,
) -> Iterator[SemilatticeHom]:
    """
    Enumerate every homomorphism A -> B.

    A homomorphism is determined by the images of the join-irreducibles of A,
    which are assigned in ascending index order, trying candidate values in
    ascending order. Once every generator below an element is assigned, the
    element's image is final; ``prune(level, fresh_images)`` may reject the
    partial assignment at that point.
    """
    gens = join_irreducibles(A)
    k = len(gens)
    below = A.leq_matrix[gens, :] if k else np.zeros((0, A.size), dtype=bool)
    level_of = np.full(A.size, -1, dtype=np.int64)
    for p in range(k):
        level_of[below[p]] = p
    completed_at = [np.flatnonzero(level_of == p) for p in range(k)]
    img = np.full(A.size, -1, dtype=np.int64)
    img[level_of == -1] = B.zero
    values = [B.zero] * k

    def consistent(fresh) -> bool:
        known = np.flatnonzero(img >= 0)
        for x in fresh:
            z = A.join[x, known]
            hit = img[z] >= 0
            if (img[z[hit]] != B.join[img[x], img[known[hit]]]).any():
                return False
        return True

    def assign(level):
        if level == k:
            h = SemilatticeHom(A, B, img.copy(), check=False)
            if h.law_violation() is None:
                yield h
            return
        gen = gens[level]
        options = range(B.size) if candidates is None else candidates(level, gen)
        for v in options:
            if any(below[p, gen] and not B.leq(values[p], v) for p in range(level)):
                continue
            values[level] = int(v)
            fresh = completed_at[level]
            for x in fresh:
                img[x] = B.join_all(values[p] for p in range(level + 1) if below[p, x])
            if consistent(fresh) and (prune is None or prune(level, {int(x): int(img[x]) for x in fresh})):
                yield from assign(level + 1)
        img[completed_at[level]] = -1

    yield from assign(0)


def iter_retraction_morphisms(
    f: SemilatticeHom, rx: Retraction, ry: Retraction, embeddings_only: bool = False
) -> Iterator[SemilatticeHom]:
    """Every g: B_X -> B_Y with g o eps_X = eps_Y o f and mu_Y o g = f o mu_X."""
    if f.source != rx.base or f.target != ry.base:
        raise ShapeMismatch("retraction data do not match the endpoints of f")
    required: Dict[int, int] = {}
    for x in range(rx.base.size):
        e, v = int(rx.eps.map[x]), int(ry.eps.map[f.map[x]])
        if required.setdefault(e, v) != v:
            logger.debug("eps square is contradictory at %d", x)
            return
    mu_target = f.map[rx.mu.map]

    def candidates(level, gen):
        ok = np.flatnonzero(ry.mu.map == mu_target[gen])
        for e, v in required.items():
            if rx.hat.leq(gen, e):
                ok = ok[ry.hat.leq_matrix[ok, v]]
        return ok.tolist()

    def prune(level, fresh):
        return all(required.get(x, v) == v and ry.mu.map[v] == mu_target[x] for x, v in fresh.items())

    for g in iter_homs(rx.hat, ry.hat, candidates=candidates, prune=prune):
        if retraction_morphism_squares(f, g, rx, ry) is None and (not embeddings_only or g.is_embedding):
            yield g


def search_retraction_morphism(f: SemilatticeHom, rx: Retraction, ry: Retraction) -> SemilatticeHom:
    for g in iter_retraction_morphisms(f, rx, ry):
        return g
    raise NotFound("no homomorphism in the generator search space satisfies both retraction squares")
