"""Permutations as image tuples acting on the right.

``mul(g, h)`` applies ``g`` first, so evaluating a word letter by letter is a
homomorphism.  Conjugation is ``conj(g, c) = c g c^-1``.
"""

from __future__ import annotations

from collections import deque
from math import factorial, lcm
from typing import Iterable, Optional, Sequence

from .errors import SubgroupTooLarge

Perm = tuple

DEFAULT_ORDER_BOUND = 10**6


def identity(n: int) -> Perm:
    return tuple(range(n))


def mul(g: Perm, h: Perm) -> Perm:
    return tuple([h[i] for i in g])


def inv(g: Perm) -> Perm:
    out = [0] * len(g)
    for i, j in enumerate(g):
        out[j] = i
    return tuple(out)


def conj(g: Perm, c: Perm) -> Perm:
    """``c g c^-1``."""
    return mul(mul(c, g), inv(c))


def power(g: Perm, k: int) -> Perm:
    if k < 0:
        g, k = inv(g), -k
    out = identity(len(g))
    while k:
        if k & 1:
            out = mul(out, g)
        g = mul(g, g)
        k >>= 1
    return out


def cycles(g: Perm) -> list:
    seen = [False] * len(g)
    out = []
    for i in range(len(g)):
        if seen[i]:
            continue
        cyc = []
        j = i
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = g[j]
        out.append(tuple(cyc))
    return out


def cycle_type(g: Perm) -> tuple:
    return tuple(sorted(len(c) for c in cycles(g)))


def order(g: Perm) -> int:
    return lcm(*cycle_type(g)) if g else 1


def is_identity(g: Perm) -> bool:
    return all(i == j for i, j in enumerate(g))


def format_cycles(g: Perm) -> str:
    cs = [c for c in cycles(g) if len(c) > 1]
    if not cs:
        return "()"
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cs)


def parse_cycles(text: str, degree: int) -> Perm:
    """Parse ``"(0 1 2)(3 4)"``; ``"()"`` is the identity."""
    img = list(range(degree))
    text = text.strip()
    for chunk in text.replace(")", ")\n").split("\n"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise ValueError(f"bad cycle {chunk!r}")
        pts = [int(s) for s in chunk[1:-1].replace(",", " ").split()]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a] = b
    if sorted(img) != list(range(degree)):
        raise ValueError(f"{text!r} is not a permutation of degree {degree}")
    return tuple(img)


def closure(gens: Iterable[Perm], degree: int, bound: int = DEFAULT_ORDER_BOUND) -> list:
    """All elements of the group generated by ``gens``, in BFS order."""
    gens = [g for g in dict.fromkeys(gens) if not is_identity(g)]
    e = identity(degree)
    seen = {e}
    out = [e]
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = mul(x, s)
            if y not in seen:
                seen.add(y)
                out.append(y)
                if len(out) > bound:
                    raise SubgroupTooLarge(f"closure exceeds {bound} elements")
                queue.append(y)
    return out


def conjugacy_orbit(g: Perm, gens: Sequence[Perm], bound: int = DEFAULT_ORDER_BOUND) -> dict:
    """Conjugacy class of ``g`` under ``<gens>``, mapping ``z -> c`` with ``z = c g c^-1``."""
    degree = len(g)
    orbit = {g: identity(degree)}
    queue = deque([g])
    invs = [inv(s) for s in gens]
    while queue:
        z = queue.popleft()
        c = orbit[z]
        for s, si in zip(gens, invs):
            z2 = mul(mul(s, z), si)
            if z2 not in orbit:
                orbit[z2] = mul(s, c)
                if len(orbit) > bound:
                    raise SubgroupTooLarge(f"conjugacy class exceeds {bound} elements")
                queue.append(z2)
    return orbit


def symmetric_conjugator(g: Perm, h: Perm) -> Optional[Perm]:
    """A ``c`` in the full symmetric group with ``c g c^-1 = h``, if any."""
    if cycle_type(g) != cycle_type(h):
        return None
    cg = sorted(cycles(g), key=len)
    ch = sorted(cycles(h), key=len)
    c = [0] * len(g)
    # c(h^k(i)) = g^k(j): map each h-cycle onto a g-cycle of the same length
    for a, b in zip(ch, cg):
        for i, j in zip(a, b):
            c[i] = j
    return tuple(c)


def group_order(gens: Sequence[Perm], degree: int) -> int:
    """Order via Schreier-Sims (delegated to sympy)."""
    from sympy.combinatorics import Permutation, PermutationGroup

    gens = [g for g in gens if not is_identity(g)]
    if not gens:
        return 1
    return int(PermutationGroup([Permutation(list(g)) for g in gens]).order())


def is_full_symmetric(gens: Sequence[Perm], degree: int) -> bool:
    return group_order(gens, degree) == factorial(degree)


def disjoint_union(g: Perm, h: Perm) -> Perm:
    n = len(g)
    return tuple(g) + tuple(n + j for j in h)


def simultaneous_conjugator(gs: Sequence[Perm], hs: Sequence[Perm], degree: int) -> Optional[Perm]:
    """A ``c`` in the full symmetric group with ``c g_j c^-1 = h_j`` for all j.

    Backtracks on the image of one point per orbit of ``<hs>``; the relation
    ``c(h(i)) = g(c(i))`` then forces the rest of that orbit.
    """
    gs = [tuple(g) for g in gs]
    hs = [tuple(h) for h in hs]
    c = [-1] * degree
    used = [False] * degree

    def assign(i: int, v: int, trail: list) -> bool:
        stack = [(i, v)]
        while stack:
            a, b = stack.pop()
            if c[a] >= 0:
                if c[a] != b:
                    return False
                continue
            if used[b]:
                return False
            c[a] = b
            used[b] = True
            trail.append(a)
            for g, h in zip(gs, hs):
                stack.append((h[a], g[b]))
        return True

    def undo(trail: list) -> None:
        for a in trail:
            used[c[a]] = False
            c[a] = -1

    def search() -> bool:
        try:
            i = c.index(-1)
        except ValueError:
            return True
        for v in range(degree):
            if used[v]:
                continue
            trail: list = []
            if assign(i, v, trail) and search():
                return True
            undo(trail)
        return False

    return tuple(c) if search() else None
