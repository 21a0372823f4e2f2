"""Finite quotients: low-index enumeration, subgroups of finite index,
separability searches and the Centralizer Condition check.

A finite quotient is a permutation action, one permutation per generator.
Low-index enumeration completes coset tables by backtracking; each complete
table is the action on the cosets of a subgroup of index at most the bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

from . import perms
from .dehn import are_equal, is_trivial
from .errors import (
    BudgetExceeded,
    ImmediateFailure,
    IncompatibleQuotients,
    SubgroupTooLarge,
)
from .perms import Perm
from .words import Word

log = logging.getLogger(__name__)

__all__ = [
    "Budget",
    "FiniteQuotient",
    "FiniteIndexSubgroup",
    "CCWitness",
    "enumerate_low_index",
    "evaluate",
    "finite_conjugacy_test",
    "schreier_generators",
    "product_quotient",
    "trivial_quotient",
    "separate_conjugacy_class",
    "separate_torsion_from_subgroup_conjugates",
    "verify_cc",
    "find_cc_quotient",
]


@dataclass(frozen=True)
class Budget:
    """Search bounds.  Defaults are engineering choices, not derived bounds."""

    max_index: int = 12
    max_conjugator_len: int = 12
    closure_order_bound: int = 10**6
    node_limit: int = 20_000_000
    max_products: int = 8
    cc_image_bound: int = 1000

    def __post_init__(self):
        for name in ("max_index", "max_conjugator_len", "closure_order_bound", "node_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class FiniteQuotient:
    degree: int
    images: tuple
    presentation_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(tuple(g) for g in self.images))
        for g in self.images:
            if len(g) != self.degree or sorted(g) != list(range(self.degree)):
                raise ValueError("images must be permutations of the stated degree")

    @cached_property
    def _inverses(self) -> tuple:
        return tuple(perms.inv(g) for g in self.images)

    def evaluate(self, w: Sequence[int]) -> Perm:
        imgs = self.images
        invs = self._inverses
        arr = list(range(self.degree))
        for x in w:
            g = imgs[x - 1] if x > 0 else invs[-x - 1]
            arr = [g[a] for a in arr]
        return tuple(arr)

    def satisfies(self, relators: Iterable[Sequence[int]]) -> bool:
        return all(perms.is_identity(self.evaluate(r)) for r in relators)

    def image_elements(self, bound: int = perms.DEFAULT_ORDER_BOUND) -> list:
        return perms.closure(self.images, self.degree, bound)

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "images": [list(g) for g in self.images],
            "presentation_hash": self.presentation_hash,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteQuotient":
        return cls(int(data["degree"]), tuple(tuple(g) for g in data["images"]), data["presentation_hash"])


def evaluate(q: FiniteQuotient, w: Sequence[int]) -> Perm:
    return q.evaluate(w)


def trivial_quotient(pres) -> FiniteQuotient:
    return FiniteQuotient(1, tuple((0,) for _ in pres.generator_names), pres.hash)


def product_quotient(q1: FiniteQuotient, q2: FiniteQuotient) -> FiniteQuotient:
    """Disjoint-union action; its kernel is the intersection of the kernels."""
    images = tuple(perms.disjoint_union(g, h) for g, h in zip(q1.images, q2.images))
    return FiniteQuotient(q1.degree + q2.degree, images, q1.presentation_hash)


# --------------------------------------------------------------------------
# low-index subgroups
# --------------------------------------------------------------------------


def _columns(w: Sequence[int]) -> list:
    return [2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1 for x in w]


class _LowIndex:
    """Backtracking completion of coset tables in standard form.

    Entries are filled in row-major order and new cosets only appear at the
    first undefined entry, so every subgroup yields exactly one table.
    """

    def __init__(self, ngens: int, relators: Sequence[Sequence[int]], node_limit: int):
        self.ncols = 2 * ngens
        self.node_limit = node_limit
        self.nodes = 0
        by_col = [[] for _ in range(self.ncols)]
        seen = set()
        for r in relators:
            for cols in (_columns(r), _columns(Word(r).inverse())):
                for k in range(len(cols)):
                    rot = tuple(cols[k:] + cols[:k])
                    if rot not in seen:
                        seen.add(rot)
                        by_col[rot[0]].append(rot)
        self.by_col = by_col

    def run(self, degree: int) -> Iterator[list]:
        ncols = self.ncols
        self.table = [[-1] * ncols for _ in range(degree)]
        self.trail: list = []
        self.n = 1
        self.degree = degree
        yield from self._search(0)

    def _define(self, c, col, d, queue):
        t = self.table
        t[c][col] = d
        t[d][col ^ 1] = c
        self.trail.append((c, col))
        self.trail.append((d, col ^ 1))
        queue.append((c, col))
        queue.append((d, col ^ 1))

    def _undo(self, mark):
        t = self.table
        trail = self.trail
        while len(trail) > mark:
            c, col = trail.pop()
            t[c][col] = -1

    def _deduce(self, queue) -> bool:
        t = self.table
        by_col = self.by_col
        while queue:
            c, col = queue.pop()
            for rel in by_col[col]:
                L = len(rel)
                f = c
                i = 0
                while i < L:
                    nx = t[f][rel[i]]
                    if nx < 0:
                        break
                    f = nx
                    i += 1
                if i == L:
                    if f != c:
                        return False
                    continue
                b = c
                j = L - 1
                while j > i:
                    nx = t[b][rel[j] ^ 1]
                    if nx < 0:
                        break
                    b = nx
                    j -= 1
                if j == i:
                    col_i = rel[i]
                    if t[b][col_i ^ 1] >= 0:
                        return False
                    self._define(f, col_i, b, queue)
        return True

    def _search(self, start: int) -> Iterator[list]:
        t = self.table
        ncols = self.ncols
        pos = start
        total = self.n * ncols
        while pos < total and t[pos // ncols][pos % ncols] >= 0:
            pos += 1
        if pos >= total:
            if self.n == self.degree:
                yield [row[:] for row in t[: self.n]]
            return
        c, col = divmod(pos, ncols)
        choices = [d for d in range(self.n) if t[d][col ^ 1] < 0]
        if self.n < self.degree:
            choices.append(self.n)
        for d in choices:
            self.nodes += 1
            if self.nodes > self.node_limit:
                raise BudgetExceeded(f"low-index search exceeded {self.node_limit} nodes")
            mark = len(self.trail)
            grew = d == self.n
            if grew:
                self.n += 1
            queue: list = []
            self._define(c, col, d, queue)
            if self._deduce(queue):
                yield from self._search(pos + 1)
            self._undo(mark)
            if grew:
                self.n -= 1


def enumerate_low_index(pres, max_index: int, node_limit: int = Budget.node_limit, degrees=None) -> Iterator[FiniteQuotient]:
    """Coset actions of all subgroups of index at most ``max_index``.

    ``pres`` is anything with ``generator_names``, ``relators`` and ``hash``.
    Output is degree-major, then lexicographic in the flattened table.
    """
    if max_index < 1:
        raise ValueError("max_index must be at least 1")
    ngens = len(pres.generator_names)
    relators = [Word(r) for r in pres.relators]
    engine = _LowIndex(ngens, relators, node_limit)
    h = pres.hash
    for degree in degrees or range(1, max_index + 1):
        for table in engine.run(degree):
            images = tuple(tuple(row[2 * j] for row in table) for j in range(ngens))
            q = FiniteQuotient(degree, images, h)
            if not q.satisfies(relators):
                raise AssertionError("emitted coset table violates a relator")
            yield q


# --------------------------------------------------------------------------
# subgroups of finite index
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteIndexSubgroup:
    """The preimage ``psi^-1(Q0)`` of a subgroup ``Q0`` of the image group."""

    quotient: FiniteQuotient
    q0_generators: tuple = ()
    bound: int = field(default=perms.DEFAULT_ORDER_BOUND, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q0_generators", tuple(tuple(g) for g in self.q0_generators))
        if self.q0_generators and any(g not in set(self.image_elements) for g in self.q0_generators):
            raise ValueError("Q0 generators must lie in the image group")

    @classmethod
    def kernel(cls, q: FiniteQuotient) -> "FiniteIndexSubgroup":
        return cls(q, ())

    @classmethod
    def whole(cls, q: FiniteQuotient) -> "FiniteIndexSubgroup":
        return cls(q, q.images)

    @classmethod
    def point_stabilizer(cls, q: FiniteQuotient, point: int = 0) -> "FiniteIndexSubgroup":
        gens = tuple(g for g in q.image_elements() if g[point] == point)
        return cls(q, gens)

    @cached_property
    def image_elements(self) -> list:
        return self.quotient.image_elements(self.bound)

    @cached_property
    def elements(self) -> frozenset:
        return frozenset(perms.closure(self.q0_generators, self.quotient.degree, self.bound))

    @property
    def index(self) -> int:
        return len(self.image_elements) // len(self.elements)

    def member_test(self, w: Sequence[int]) -> bool:
        return self.quotient.evaluate(w) in self.elements

    def is_normal(self) -> bool:
        q0 = self.elements
        return all(perms.conj(h, g) in q0 for g in self.quotient.images for h in self.q0_generators)

    def to_json(self) -> dict:
        return {"quotient": self.quotient.to_json(), "q0": [list(g) for g in self.q0_generators]}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteIndexSubgroup":
        return cls(FiniteQuotient.from_json(data["quotient"]), tuple(tuple(g) for g in data["q0"]))


def _right_coset_key(q0: frozenset, g: Perm) -> Perm:
    if len(q0) == 1:
        return g
    return min(perms.mul(h, g) for h in q0)


def schreier_generators(h1: FiniteIndexSubgroup, bound: int = perms.DEFAULT_ORDER_BOUND) -> list:
    """Schreier generators of ``psi^-1(Q0)`` from the action on ``psi(G)/Q0``.

    Raises SubgroupTooLarge when the index exceeds ``bound``.
    """
    q = h1.quotient
    q0 = h1.elements
    ngens = len(q.images)
    e = perms.identity(q.degree)
    start = _right_coset_key(q0, e)
    reps = {start: (Word(), e)}
    order = [start]
    gens: list = []
    seen = set()
    i = 0
    while i < len(order):
        key = order[i]
        u, g = reps[key]
        i += 1
        for j in range(ngens):
            x = Word.gen(j)
            g2 = perms.mul(g, q.images[j])
            k2 = _right_coset_key(q0, g2)
            if k2 not in reps:
                reps[k2] = (u * x, g2)
                order.append(k2)
                if len(order) > bound:
                    raise SubgroupTooLarge(f"index exceeds {bound}")
                continue
            s = u * x * ~reps[k2][0]
            if s and s not in seen:
                seen.add(s)
                gens.append(s)
    return gens


# --------------------------------------------------------------------------
# conjugacy inside finite images
# --------------------------------------------------------------------------


def finite_conjugacy_test(
    q: Optional[FiniteQuotient],
    g: Perm,
    h: Perm,
    within: Optional[Sequence[Perm]] = None,
    bound: int = perms.DEFAULT_ORDER_BOUND,
) -> Optional[Perm]:
    """A ``c`` in ``<within>`` with ``c g c^-1 = h``, or None.

    ``within`` defaults to the image group of ``q``.
    """
    gens = tuple(within) if within is not None else q.images
    if perms.cycle_type(g) != perms.cycle_type(h):
        return None
    if g == h:
        return perms.identity(len(g))
    try:
        orbit = perms.conjugacy_orbit(g, gens, bound)
    except SubgroupTooLarge:
        if perms.is_full_symmetric(gens, len(g)):
            return perms.symmetric_conjugator(g, h)
        raise
    return orbit.get(h)


def _images_separate(q: FiniteQuotient, x: Sequence[int], y: Sequence[int], bound: int, within=None) -> bool:
    gx = q.evaluate(x)
    gy = q.evaluate(y)
    if perms.cycle_type(gx) != perms.cycle_type(gy):
        return True
    if gx == gy and within is None:
        return False
    try:
        return finite_conjugacy_test(q, gx, gy, within, bound) is None
    except SubgroupTooLarge:
        return False


def _quotient_stream(p, budget: Budget, cache=None, degrees=None) -> Iterator[FiniteQuotient]:
    if cache is not None:
        yield from cache.stream(p, budget.max_index, budget.node_limit, degrees)
    else:
        yield from enumerate_low_index(p, budget.max_index, budget.node_limit, degrees)


def separate_conjugacy_class(
    p,
    x: Sequence[int],
    y: Sequence[int],
    budget: Budget = Budget(),
    cache=None,
    degrees=None,
    pending: Optional[list] = None,
) -> FiniteQuotient:
    """Search for a finite quotient in which the images of ``x`` and ``y``
    are not conjugate.  Raises BudgetExceeded when none is found.

    ``pending`` carries quotients kept for product refinement between calls.
    """
    x, y = Word(x), Word(y)
    if x == y or (hasattr(p, "root") and are_equal(x, y, p)):
        raise BudgetExceeded("x and y are equal; no separating quotient exists")
    if pending is None:
        pending = []
    bound = budget.closure_order_bound
    for q in _quotient_stream(p, budget, cache, degrees):
        if _images_separate(q, x, y, bound):
            return q
        if q.evaluate(x) != q.evaluate(y) and len(pending) < budget.max_products:
            for other in pending:
                prod = product_quotient(other, q)
                if _images_separate(prod, x, y, bound):
                    return prod
            pending.append(q)
    raise BudgetExceeded("no separating quotient within budget")


def separate_torsion_from_subgroup_conjugates(
    p,
    g: Sequence[int],
    f_gens: Sequence[Sequence[int]],
    budget: Budget = Budget(),
    cache=None,
) -> FiniteQuotient:
    """A quotient where the image of ``g`` is not conjugate into ``<psi(F)>``."""
    g = Word(g)
    f_gens = [Word(f) for f in f_gens]
    if not g or (hasattr(p, "root") and is_trivial(g, p)):
        raise ImmediateFailure("the identity lies in every subgroup")
    singles = {abs(f[0]) - 1 for f in f_gens if len(f) == 1}
    if singles >= set(range(len(p.generator_names))):
        raise ImmediateFailure("F contains every generator, so psi(F) is always the whole image")
    bound = budget.closure_order_bound
    always_full = True
    for q in _quotient_stream(p, budget, cache):
        if not separates_torsion(q, g, f_gens, bound):
            fimg = [q.evaluate(f) for f in f_gens]
            try:
                fset = set(perms.closure(fimg, q.degree, bound))
            except SubgroupTooLarge:
                continue
            if not all(im in fset for im in q.images):
                always_full = False
            continue
        return q
    if always_full:
        raise ImmediateFailure("psi(F) was the whole image in every quotient searched")
    raise BudgetExceeded("no separating quotient within budget")


def separates_torsion(q: FiniteQuotient, g: Sequence[int], f_gens, bound: int) -> bool:
    """Brute-force check that ``psi(g)`` is not conjugate into ``<psi(F)>``."""
    pg = q.evaluate(g)
    if perms.is_identity(pg):
        return False
    try:
        fset = set(perms.closure([q.evaluate(f) for f in f_gens], q.degree, bound))
    except SubgroupTooLarge:
        return False
    ct = perms.cycle_type(pg)
    if not any(perms.cycle_type(z) == ct for z in fset):
        return True
    try:
        orbit = perms.conjugacy_orbit(pg, q.images, bound)
    except SubgroupTooLarge:
        return False
    return not any(z in fset for z in orbit)


# --------------------------------------------------------------------------
# the Centralizer Condition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CCWitness:
    """One instance of the Centralizer Condition.

    ``n`` is a finite quotient whose kernel lies in the normal subgroup ``p``;
    the claim is that the centralizer of ``psi(x)`` in the image of ``n`` is
    covered by ``psi(<centralizer_gens> P)``.
    """

    presentation: object
    x: Word
    centralizer_gens: tuple
    p: FiniteIndexSubgroup
    n: FiniteQuotient
    check_passed: bool = False


def _kernel_inside(n: FiniteQuotient, p: FiniteIndexSubgroup, bound: int) -> bool:
    """Whether ``ker(n)`` lies in ``p``.

    Walks the image of ``n`` and evaluates each Schreier generator of the
    kernel directly as a pair of permutations, never spelling it as a word.
    """
    q0 = p.elements
    psi = p.quotient
    e_n = perms.identity(n.degree)
    e_p = perms.identity(psi.degree)
    seen = {e_n: e_p}
    queue = [e_n]
    i = 0
    while i < len(queue):
        g = queue[i]
        i += 1
        h = seen[g]
        for s_n, s_p in zip(n.images, psi.images):
            g2 = perms.mul(g, s_n)
            h2 = perms.mul(h, s_p)
            old = seen.get(g2)
            if old is None:
                seen[g2] = h2
                queue.append(g2)
                if len(queue) > bound:
                    raise SubgroupTooLarge(f"image exceeds {bound} elements")
            elif old != h2 and perms.mul(h2, perms.inv(old)) not in q0:
                return False
    return True


def verify_cc(w: CCWitness, bound: int = perms.DEFAULT_ORDER_BOUND) -> bool:
    """True certifies the instance; False is inconclusive."""
    pres = w.presentation
    x = Word(w.x)
    for c in w.centralizer_gens:
        c = Word(c)
        if not is_trivial(c * x * ~c * ~x, pres):
            return False
    if not w.p.is_normal():
        return False
    if not _kernel_inside(w.n, w.p, bound):
        raise IncompatibleQuotients("ker(n) is not contained in P")
    n = w.n
    img = n.image_elements(bound)
    px = n.evaluate(x)
    cent = [g for g in img if perms.mul(g, px) == perms.mul(px, g)]
    if is_trivial(x, pres):
        c_gens = list(n.images)
    else:
        c_gens = [n.evaluate(c) for c in w.centralizer_gens]
    c_img = perms.closure(c_gens, n.degree, bound)
    p_img = set(perms.closure([n.evaluate(s) for s in schreier_generators(w.p, bound)], n.degree, bound))
    c_inv = [perms.inv(a) for a in c_img]
    return all(any(perms.mul(a, g) in p_img for a in c_inv) for g in cent)


def find_cc_quotient(
    pres,
    x: Sequence[int],
    centralizer_gens: Sequence[Sequence[int]],
    P: FiniteIndexSubgroup,
    budget: Budget = Budget(),
    cache=None,
) -> FiniteQuotient:
    """Search quotients with kernel inside ``P`` until the CC check passes."""
    x = Word(x)
    cgens = tuple(Word(c) for c in centralizer_gens)
    bound = min(budget.closure_order_bound, budget.cc_image_bound)

    def candidates():
        yield P.quotient
        for q in _quotient_stream(pres, budget, cache):
            # a factor that kills x cannot shrink the centralizer of its image
            if q.degree > 1 and not perms.is_identity(q.evaluate(x)):
                yield product_quotient(P.quotient, q)

    for n in candidates():
        try:
            if verify_cc(CCWitness(pres, x, cgens, P, n), bound):
                return n
        except SubgroupTooLarge:
            continue
    raise BudgetExceeded("no CC quotient within budget")
