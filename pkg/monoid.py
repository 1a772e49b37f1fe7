"""
Finite commutative monoids by Cayley table.

Houses the monoid vocabulary the semilattice side relies on: the algebraic
quasi-ordering, refinement, conical monoids, order-units, o-ideals with their
congruences and quotients, and ideal-induced homomorphisms.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import cached_property
from typing import Iterable, List, Optional, Tuple

import numpy as np

import settings
import tables
from semilattice import FiniteJoinSemilattice, SemilatticeHom

logger = logging.getLogger(__name__)


class MonoidError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotAMonoid(MonoidError):
    pass


class NotAMonoidHom(MonoidError):
    pass


class NotAnOIdeal(MonoidError):
    pass


class TooLarge(MonoidError):
    pass


class FiniteCommutativeMonoid:
    def __init__(self, add, zero: int, *, name: Optional[str] = None, check: bool = True, allow_large: bool = False):
        self.add = tables.frozen_table(add, "add")
        self.size = int(self.add.shape[0])
        if self.size > settings.INPUT_LIMIT and not allow_large:
            raise TooLarge(f"monoid has {self.size} elements, limit is {settings.INPUT_LIMIT}")
        tables.check_index(zero, self.size, "zero")
        self.zero = int(zero)
        self.name = name
        if check:
            self._validate()

    def _validate(self):
        w = tables.commutativity_violation(self.add)
        if w is not None:
            raise NotAMonoid(f"addition is not commutative at {w}", witness=("commutative",) + w)
        w = tables.associativity_violation(self.add)
        if w is not None:
            raise NotAMonoid(f"addition is not associative at {w}", witness=("associative",) + w)
        w = tables.neutral_violation(self.add, self.zero)
        if w is not None:
            raise NotAMonoid(f"{self.zero} is not neutral for {w[0]}", witness=("zero", self.zero) + w)

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"FiniteCommutativeMonoid({label}size={self.size}, zero={self.zero})"

    @cached_property
    def _key(self) -> bytes:
        return tables.table_key(self.add, self.zero)

    def __eq__(self, other):
        return self is other or (isinstance(other, FiniteCommutativeMonoid) and self._key == other._key)

    def __hash__(self):
        return hash(self._key)

    @cached_property
    def alg_leq_matrix(self) -> np.ndarray:
        """[x, y] is True iff x + z = y for some z."""
        reach = np.zeros((self.size, self.size), dtype=bool)
        for x in range(self.size):
            reach[x, self.add[x]] = True
        reach.flags.writeable = False
        return reach

    @cached_property
    def decompositions(self) -> Tuple[np.ndarray, ...]:
        """decompositions[a] lists every (c, d) with c + d = a."""
        return tuple(np.argwhere(self.add == a) for a in range(self.size))

    def identity(self) -> "MonoidHom":
        return MonoidHom(self, self, np.arange(self.size), check=False)


class MonoidHom:
    def __init__(self, source: FiniteCommutativeMonoid, target: FiniteCommutativeMonoid, mapping, *, check: bool = True):
        self.source = source
        self.target = target
        self.map = tables.frozen_vector(mapping, target.size)
        if self.map.size != source.size:
            raise NotAMonoidHom(f"map has {self.map.size} entries, source has {source.size} elements")
        if check:
            w = self.law_violation()
            if w is not None:
                raise NotAMonoidHom(f"monoid homomorphism law fails: {w}", witness=w)

    def law_violation(self) -> Optional[tuple]:
        if self.map[self.source.zero] != self.target.zero:
            return ("zero", self.source.zero)
        w = tables.homomorphism_violation(self.map, self.source.add, self.target.add)
        return None if w is None else ("add",) + w

    def __repr__(self):
        return f"MonoidHom({self.source.size}->{self.target.size}, {self.map.tolist()})"

    def __matmul__(self, other: "MonoidHom") -> "MonoidHom":
        if other.target != self.source:
            raise NotAMonoidHom(f"cannot compose {self!r} after {other!r}")
        return MonoidHom(other.source, self.target, self.map[other.map], check=False)

    @cached_property
    def is_injective(self) -> bool:
        return np.unique(self.map).size == self.source.size

    @cached_property
    def is_surjective(self) -> bool:
        return np.unique(self.map).size == self.target.size


# --- named monoids ---


def cyclic_group(n: int) -> FiniteCommutativeMonoid:
    idx = np.arange(n)
    return FiniteCommutativeMonoid(np.add.outer(idx, idx) % n, 0, name=f"Z/{n}")


def truncated_sum(k: int) -> FiniteCommutativeMonoid:
    """{0, 1, ..., k} with x + y capped at the absorbing element k."""
    idx = np.arange(k + 1)
    return FiniteCommutativeMonoid(np.minimum(np.add.outer(idx, idx), k), 0, name=f"trunc{k}")


def semilattice_as_monoid(S: FiniteJoinSemilattice) -> FiniteCommutativeMonoid:
    return FiniteCommutativeMonoid(S.join, S.zero, name=S.name, check=False, allow_large=True)


def hom_as_monoid_hom(phi: SemilatticeHom) -> MonoidHom:
    return MonoidHom(semilattice_as_monoid(phi.source), semilattice_as_monoid(phi.target), phi.map, check=False)


# --- order and refinement ---


def alg_leq(M: FiniteCommutativeMonoid, x: int, y: int) -> bool:
    tables.check_index(x, M.size)
    tables.check_index(y, M.size)
    return bool(M.alg_leq_matrix[x, y])


def _refines(M: FiniteCommutativeMonoid, a0: int, a1: int, b0: int, b1: int) -> bool:
    add = M.add
    for c00, c01 in M.decompositions[a0]:
        c10 = np.flatnonzero(add[c00] == b0)
        c11 = np.flatnonzero(add[c01] == b1)
        if c10.size and c11.size and (add[np.ix_(c10, c11)] == a1).any():
            return True
    return False


def _scan(M: FiniteCommutativeMonoid, first: range) -> Optional[Tuple[int, int, int, int]]:
    add = M.add
    for a0 in first:
        for a1 in range(M.size):
            total = add[a0, a1]
            for b0 in range(M.size):
                for b1 in np.flatnonzero(add[b0] == total):
                    if not _refines(M, a0, a1, b0, int(b1)):
                        return a0, a1, b0, int(b1)
    return None


def refinement_counterexample(M: FiniteCommutativeMonoid, workers: Optional[int] = None) -> Optional[Tuple[int, int, int, int]]:
    """Lexicographically least (a0, a1, b0, b1) with a0+a1 = b0+b1 admitting no refinement matrix."""
    workers = settings.THREADS if workers is None else max(1, workers)
    if workers == 1 or M.size < 2:
        return _scan(M, range(M.size))
    bounds = np.linspace(0, M.size, min(workers, M.size) + 1).astype(int)
    chunks = [range(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        found = [w for w in pool.map(lambda chunk: _scan(M, chunk), chunks) if w is not None]
    return min(found) if found else None


def is_refinement(M: FiniteCommutativeMonoid, workers: Optional[int] = None) -> bool:
    return refinement_counterexample(M, workers) is None


def is_conical(M: FiniteCommutativeMonoid) -> bool:
    hits = np.argwhere(M.add == M.zero)
    return bool((hits == M.zero).all())


def has_order_unit(M: FiniteCommutativeMonoid) -> Optional[int]:
    """Least u such that every x satisfies x <= n*u for some 1 <= n <= size."""
    order = M.alg_leq_matrix
    for u in range(M.size):
        covered = np.zeros(M.size, dtype=bool)
        multiple = u
        for _ in range(M.size):
            covered |= order[:, multiple]
            multiple = int(M.add[multiple, u])
        if covered.all():
            return u
    return None


# --- o-ideals ---


class OIdeal:
    def __init__(self, monoid: FiniteCommutativeMonoid, members: Iterable[int], *, check: bool = True):
        self.monoid = monoid
        self.members = frozenset(int(x) for x in members)
        if check:
            w = self.violation()
            if w is not None:
                raise NotAnOIdeal(f"not an o-ideal: {w}", witness=w)

    @property
    def mask(self) -> np.ndarray:
        inside = np.zeros(self.monoid.size, dtype=bool)
        inside[sorted(self.members)] = True
        return inside

    def sorted_members(self) -> List[int]:
        return sorted(self.members)

    def violation(self) -> Optional[tuple]:
        if self.monoid.zero not in self.members:
            return ("zero", self.monoid.zero)
        inside = self.mask
        bad = np.argwhere(inside[self.monoid.add] != (inside[:, None] & inside[None, :]))
        if bad.size:
            return ("sum",) + tuple(int(v) for v in bad[0])
        return None

    def __eq__(self, other):
        return isinstance(other, OIdeal) and self.monoid == other.monoid and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"OIdeal({self.sorted_members()})"


def generated_o_ideal(M: FiniteCommutativeMonoid, seeds: Iterable[int]) -> OIdeal:
    """Least o-ideal containing the seeds: close under summands and sums."""
    inside = np.zeros(M.size, dtype=bool)
    inside[M.zero] = True
    inside[list(seeds)] = True
    while True:
        grown = inside | M.alg_leq_matrix[:, inside].any(axis=1)
        idx = np.flatnonzero(grown)
        grown[M.add[np.ix_(idx, idx)].ravel()] = True
        if np.array_equal(grown, inside):
            break
        inside = grown
    return OIdeal(M, np.flatnonzero(inside), check=False)


def o_ideals(M: FiniteCommutativeMonoid) -> List[OIdeal]:
    start = generated_o_ideal(M, [])
    seen = {start}
    frontier = [start]
    while frontier:
        fresh = []
        for ideal in frontier:
            for x in range(M.size):
                if x not in ideal.members:
                    bigger = generated_o_ideal(M, ideal.sorted_members() + [x])
                    if bigger not in seen:
                        seen.add(bigger)
                        fresh.append(bigger)
        frontier = fresh
    return sorted(seen, key=lambda ideal: (len(ideal.members), ideal.sorted_members()))


def ideal_equivalence(M: FiniteCommutativeMonoid, ideal: OIdeal) -> np.ndarray:
    """[x, y] is True iff x + u = y + v for some u, v in the ideal."""
    members = np.array(ideal.sorted_members(), dtype=np.int64)
    reach = np.zeros((M.size, M.size), dtype=np.int64)
    for x in range(M.size):
        reach[x, M.add[x, members]] = 1
    return (reach @ reach.T) > 0


def quotient_by_ideal(M: FiniteCommutativeMonoid, ideal) -> Tuple[FiniteCommutativeMonoid, MonoidHom]:
    if not isinstance(ideal, OIdeal):
        ideal = OIdeal(M, ideal)
    else:
        w = ideal.violation()
        if w is not None:
            raise NotAnOIdeal(f"not an o-ideal: {w}", witness=w)
    equiv = ideal_equivalence(M, ideal)
    steps = equiv.astype(np.int64)
    broken = ((steps @ steps) > 0) & ~equiv
    if broken.any():
        raise MonoidError("ideal relation is not transitive", witness=tuple(int(v) for v in np.argwhere(broken)[0]))
    labels = np.full(M.size, -1, dtype=np.int64)
    reps = []
    for x in range(M.size):
        if labels[x] < 0:
            labels[equiv[x]] = len(reps)
            reps.append(x)
    moved = labels[M.add]
    bad = np.argwhere(equiv[:, :, None] & (moved[:, None, :] != moved[None, :, :]))
    if bad.size:
        raise MonoidError("ideal relation is not a congruence", witness=tuple(int(v) for v in bad[0]))
    reps = np.array(reps, dtype=np.int64)
    Q = FiniteCommutativeMonoid(labels[M.add[np.ix_(reps, reps)]], int(labels[M.zero]), check=False, allow_large=True)
    return Q, MonoidHom(M, Q, labels, check=False)


def is_ideal_induced(f: MonoidHom) -> bool:
    if not f.is_surjective:
        return False
    kernel = OIdeal(f.source, np.flatnonzero(f.map == f.target.zero), check=False)
    if kernel.violation() is not None:
        return False
    return bool(np.array_equal(ideal_equivalence(f.source, kernel), f.map[:, None] == f.map[None, :]))


def embedding_counterexample(f: MonoidHom) -> Optional[tuple]:
    same = f.map[:, None] == f.map[None, :]
    np.fill_diagonal(same, False)
    hits = np.argwhere(same)
    if hits.size:
        return ("injective",) + tuple(int(v) for v in hits[0])
    image_order = f.target.alg_leq_matrix[np.ix_(f.map, f.map)]
    hits = np.argwhere(image_order != f.source.alg_leq_matrix)
    if hits.size:
        return ("order",) + tuple(int(v) for v in hits[0])
    return None


def is_monoid_embedding(f: MonoidHom) -> bool:
    return embedding_counterexample(f) is None
