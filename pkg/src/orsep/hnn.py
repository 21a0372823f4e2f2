"""HNN extensions with a finite base group.

The base ``A`` is a permutation group; the associated subgroups ``m1`` and
``m2`` are element sets and ``alpha_bar: m1 -> m2`` is an isomorphism, with
``t g t^-1 = alpha_bar(g)``.  Elements are alternating words
``b0 t^e1 b1 ... t^ek bk`` and Britton's lemma gives normal forms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from . import perms
from .dehn import reduce_in
from .errors import AlphaInconsistent, CannotNormalize
from .perms import Perm
from .quotients import FiniteQuotient
from .words import Word

__all__ = [
    "FiniteBaseHnn",
    "HnnWord",
    "Verdict",
    "CriterionResult",
    "britton_reduce",
    "hnn_normal_form",
    "hnn_equal",
    "conjugate_into_base",
    "hnn_nonconjugacy_criterion",
    "hnn_centralizer_base",
    "build_quotient_hnn",
    "find_stable_image",
    "syntactic_britton_reduce",
]


@dataclass(frozen=True)
class FiniteBaseHnn:
    degree: int
    base_gens: tuple
    m1: frozenset
    m2: frozenset
    alpha_bar: dict = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "base_gens", tuple(tuple(g) for g in self.base_gens))
        base = self.elements
        if not (self.m1 <= base and self.m2 <= base):
            raise ValueError("associated subgroups must lie in the base")
        if len(self.m1) != len(self.m2):
            raise ValueError("associated subgroups differ in order")
        if set(self.alpha_bar) != set(self.m1) or set(self.alpha_bar.values()) != set(self.m2):
            raise ValueError("alpha_bar must be a bijection m1 -> m2")
        for g in self.m1:
            for h in self.m1:
                if self.alpha_bar[perms.mul(g, h)] != perms.mul(self.alpha_bar[g], self.alpha_bar[h]):
                    raise AlphaInconsistent("alpha_bar is not multiplicative")

    @classmethod
    def from_generators(cls, base_gens, m1_gens, m2_images, degree: Optional[int] = None) -> "FiniteBaseHnn":
        """Extend ``m1_gens[j] -> m2_images[j]`` to an isomorphism, or raise."""
        base_gens = [tuple(g) for g in base_gens]
        degree = degree if degree is not None else len((base_gens or list(m1_gens) or [()])[0])
        e = perms.identity(degree)
        alpha = {e: e}
        queue = [e]
        pairs = list(zip(map(tuple, m1_gens), map(tuple, m2_images)))
        while queue:
            g = queue.pop()
            for s, t in pairs:
                g2 = perms.mul(g, s)
                h2 = perms.mul(alpha[g], t)
                if g2 in alpha:
                    if alpha[g2] != h2:
                        raise AlphaInconsistent("generator assignment does not extend to a homomorphism")
                    continue
                alpha[g2] = h2
                queue.append(g2)
        if len(set(alpha.values())) != len(alpha):
            raise AlphaInconsistent("generator assignment is not injective")
        return cls(degree, tuple(base_gens), frozenset(alpha), frozenset(alpha.values()), alpha)

    @cached_property
    def elements(self) -> frozenset:
        return frozenset(perms.closure(self.base_gens, self.degree))

    @cached_property
    def identity(self) -> Perm:
        return perms.identity(self.degree)

    @cached_property
    def alpha_inverse(self) -> dict:
        return {v: k for k, v in self.alpha_bar.items()}

    @cached_property
    def _coset_rep(self) -> dict:
        """Right-coset representatives: sign -> {g: (m, r)} with g = m r."""
        out = {}
        for sign, sub in ((1, self.m1), (-1, self.m2)):
            table = {}
            for g in self.elements:
                if g in table:
                    continue
                coset = [perms.mul(m, g) for m in sub]
                r = min(coset)
                r_inv = perms.inv(r)
                for h in coset:
                    table[h] = (perms.mul(h, r_inv), r)
            out[sign] = table
        return out

    def split(self, sign: int, g: Perm) -> tuple:
        """``g = m r`` with ``m`` in the subgroup pinched after ``t^sign``."""
        return self._coset_rep[sign][g]

    def conjugacy_class(self, x: Perm) -> dict:
        return perms.conjugacy_orbit(x, self.base_gens or (self.identity,), len(self.elements) + 1)

    def centralizer(self, x: Perm) -> frozenset:
        return frozenset(g for g in self.elements if perms.mul(g, x) == perms.mul(x, g))

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "base_gens": [list(g) for g in self.base_gens],
            "m1": sorted(list(g) for g in self.m1),
            "m2": sorted(list(g) for g in self.m2),
            "alpha_bar": sorted([list(g), list(h)] for g, h in self.alpha_bar.items()),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteBaseHnn":
        alpha = {tuple(g): tuple(h) for g, h in data["alpha_bar"]}
        return cls(
            int(data["degree"]),
            tuple(tuple(g) for g in data["base_gens"]),
            frozenset(tuple(g) for g in data["m1"]),
            frozenset(tuple(g) for g in data["m2"]),
            alpha,
        )


@dataclass(frozen=True)
class HnnWord:
    """``bases[0] t^signs[0] bases[1] ... t^signs[-1] bases[-1]``."""

    bases: tuple
    signs: tuple = ()

    def __post_init__(self):
        if len(self.bases) != len(self.signs) + 1:
            raise ValueError("need exactly one more base letter than stable letters")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("stable letter exponents must be +-1")

    @classmethod
    def base(cls, g: Perm) -> "HnnWord":
        return cls((tuple(g),))

    @classmethod
    def stable(cls, degree: int, sign: int = 1) -> "HnnWord":
        e = perms.identity(degree)
        return cls((e, e), (sign,))

    @property
    def t_length(self) -> int:
        return len(self.signs)

    def __mul__(self, other: "HnnWord") -> "HnnWord":
        mid = perms.mul(self.bases[-1], other.bases[0])
        return HnnWord(self.bases[:-1] + (mid,) + other.bases[1:], self.signs + other.signs)

    def inverse(self) -> "HnnWord":
        return HnnWord(tuple(perms.inv(b) for b in reversed(self.bases)), tuple(-s for s in reversed(self.signs)))

    __invert__ = inverse

    def rotate(self) -> tuple:
        """Move the first syllable ``b0 t^e1`` to the end; returns (word, c) with word = c^-1 self c."""
        if not self.signs:
            return self, HnnWord.base(perms.identity(len(self.bases[0])))
        c = HnnWord(self.bases[:1] + (perms.identity(len(self.bases[0])),), self.signs[:1])
        return c.inverse() * self * c, c

    def to_json(self) -> dict:
        return {"bases": [list(b) for b in self.bases], "signs": list(self.signs)}

    @classmethod
    def from_json(cls, data: dict) -> "HnnWord":
        return cls(tuple(tuple(b) for b in data["bases"]), tuple(data["signs"]))


def britton_reduce(w: HnnWord, h: FiniteBaseHnn) -> HnnWord:
    """Remove every pinch ``t g t^-1`` (g in m1) and ``t^-1 g t`` (g in m2)."""
    out_b = [w.bases[0]]
    out_s: list = []
    for e, b in zip(w.signs, w.bases[1:]):
        if out_s and out_s[-1] == -e:
            g = out_b[-1]
            prev = out_s[-1]
            if (prev == 1 and g in h.m1) or (prev == -1 and g in h.m2):
                out_b.pop()
                out_s.pop()
                r = h.alpha_bar[g] if prev == 1 else h.alpha_inverse[g]
                out_b[-1] = perms.mul(perms.mul(out_b[-1], r), b)
                continue
        out_s.append(e)
        out_b.append(b)
    return HnnWord(tuple(out_b), tuple(out_s))


def hnn_normal_form(w: HnnWord, h: FiniteBaseHnn) -> HnnWord:
    """Unique representative: after ``t^+1`` a coset rep of ``m1``, after ``t^-1`` of ``m2``."""
    w = britton_reduce(w, h)
    bases = list(w.bases)
    for i in range(len(w.signs), 0, -1):
        sign = w.signs[i - 1]
        m, r = h.split(sign, bases[i])
        bases[i] = r
        pushed = h.alpha_bar[m] if sign == 1 else h.alpha_inverse[m]
        bases[i - 1] = perms.mul(bases[i - 1], pushed)
    return HnnWord(tuple(bases), w.signs)


def hnn_equal(u: HnnWord, v: HnnWord, h: FiniteBaseHnn) -> bool:
    return hnn_normal_form(u, h) == hnn_normal_form(v, h)


def conjugate_into_base(w: HnnWord, h: FiniteBaseHnn) -> Optional[tuple]:
    """``(b, c)`` with ``b = c^-1 w c`` a base element, or None if ``w`` is
    cyclically reduced with positive t-length."""
    conj = HnnWord.base(h.identity)
    w = britton_reduce(w, h)
    while w.t_length:
        k = w.t_length
        for _ in range(k):
            w2, c = w.rotate()
            conj = conj * c
            w = britton_reduce(w2, h)
            if w.t_length < k:
                break
        else:
            return None
    return w.bases[0], conj


class Verdict(enum.Enum):
    NON_CONJUGATE = "NonConjugate"
    CONJUGATE_IN_BASE = "ConjugateInBase"
    INAPPLICABLE = "Inapplicable"


@dataclass(frozen=True)
class CriterionResult:
    verdict: Verdict
    conjugator: Optional[Perm] = None


def _meets_subgroup_conjugates(h: FiniteBaseHnn, x: Perm, sub: frozenset) -> bool:
    return any(z in sub for z in h.conjugacy_class(x))


def hnn_nonconjugacy_criterion(h: FiniteBaseHnn, x: Perm, y: Perm) -> CriterionResult:
    """Decide what the finite base alone says about ``x ~ y`` in the HNN group."""
    x, y = tuple(x), tuple(y)
    cls = h.conjugacy_class(x)
    if y in cls:
        return CriterionResult(Verdict.CONJUGATE_IN_BASE, cls[y])
    if not _meets_subgroup_conjugates(h, x, h.m1) and not _meets_subgroup_conjugates(h, x, h.m2):
        return CriterionResult(Verdict.NON_CONJUGATE)
    return CriterionResult(Verdict.INAPPLICABLE)


def hnn_centralizer_base(h: FiniteBaseHnn, x: Perm) -> tuple:
    """``(C_A(x), exact)``; ``exact`` means it is the whole HNN centralizer."""
    x = tuple(x)
    exact = not _meets_subgroup_conjugates(h, x, h.m1) and not _meets_subgroup_conjugates(h, x, h.m2)
    return h.centralizer(x), exact


# --------------------------------------------------------------------------
# quotient HNN from a hierarchy step
# --------------------------------------------------------------------------


def find_stable_image(hd, xi: FiniteQuotient) -> Optional[Perm]:
    """A permutation ``pi`` with ``pi xi(u) pi^-1 = xi(alpha(u))`` for u in u1."""
    src = [xi.images[u] for u in hd.u1]
    dst = [xi.images[v] for v in hd.u2]
    return perms.simultaneous_conjugator(src, dst, xi.degree)


def build_quotient_hnn(hd, theta: FiniteQuotient) -> tuple:
    """``(FiniteBaseHnn, eta)`` from a quotient ``theta`` of the HNN group.

    ``theta`` has one image per base generator followed by the image of t.
    ``eta`` sends a word over the HNN generators to an ``HnnWord``.
    """
    nb = len(hd.base.all_generators)
    if len(theta.images) != nb + 1:
        raise ValueError("theta must assign an image to every base generator and to t")
    images = theta.images
    pt = images[nb]
    for u, v in zip(hd.u1, hd.u2):
        if perms.conj(images[u], pt) != images[v]:
            raise AlphaInconsistent(f"stable relation fails for {hd.hnn_generator_names[u]}")
    degree = theta.degree
    base_gens = tuple(images[:nb])
    m1 = frozenset(perms.closure([images[u] for u in hd.u1], degree))
    m2 = frozenset(perms.closure([images[v] for v in hd.u2], degree))
    alpha = {g: perms.conj(g, pt) for g in m1}
    fb = FiniteBaseHnn(degree, base_gens, m1, m2, alpha)

    def eta(w: Sequence[int]) -> HnnWord:
        out = HnnWord.base(fb.identity)
        for x in w:
            j = abs(x) - 1
            if j == nb:
                out = out * HnnWord.stable(degree, 1 if x > 0 else -1)
            else:
                out = out * HnnWord.base(images[j] if x > 0 else perms.inv(images[j]))
        return out

    return fb, eta


def quotient_hnn_checks(hd, theta: FiniteQuotient) -> dict:
    """Recomputable facts about ``theta`` as a quotient of the HNN group."""
    nb = len(hd.base.all_generators)
    pt = theta.images[nb]
    base_q = FiniteQuotient(theta.degree, theta.images[:nb])
    return {
        "base_relator": perms.is_identity(base_q.evaluate(hd.base.relator)),
        "stable_relations": all(
            perms.conj(theta.images[u], pt) == theta.images[v] for u, v in zip(hd.u1, hd.u2)
        ),
    }


# --------------------------------------------------------------------------
# symbolic reduction over the infinite base
# --------------------------------------------------------------------------


def syntactic_britton_reduce(hd, w: Sequence[int]) -> Word:
    """Britton reduction in ``H`` detecting pinches only syntactically.

    A pinch ``t v t^-1`` is applied when ``v``, after Dehn reduction in the
    base, is spelled in ``u1`` letters (dually ``u2`` for ``t^-1 v t``).
    If a would-be pinch cannot be settled this way, CannotNormalize is raised.
    """
    nb = len(hd.base.all_generators)
    t = nb + 1
    alpha = dict(zip(hd.u1, hd.u2))
    alpha_inv = dict(zip(hd.u2, hd.u1))
    letters = list(Word(w))
    changed = True
    while changed:
        changed = False
        pos = [i for i, x in enumerate(letters) if abs(x) == t]
        for a, b in zip(pos, pos[1:]):
            if letters[a] != -letters[b]:
                continue
            mid = reduce_in(hd.base, letters[a + 1 : b])
            table = alpha if letters[a] > 0 else alpha_inv
            if all(abs(x) - 1 in table for x in mid):
                img = [(table[abs(x) - 1] + 1) * (1 if x > 0 else -1) for x in mid]
                letters = list(Word(letters[:a] + img + letters[b + 1 :]))
                changed = True
                break
            raise CannotNormalize("pinch candidate needs Magnus subgroup membership")
    return Word(letters)
