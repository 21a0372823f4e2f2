"""Repetition complexity, the RC = 0 splitting, and the hierarchy step.

The hierarchy step realizes ``H = G * <t>`` as an HNN extension of a
one-relator group ``K`` of smaller repetition complexity.  It twists two
letters by powers of the new letter ``t`` so that ``t`` has exponent sum
zero in the relator, then rewrites the relator in the conjugates
``x_i = t^-i x t^i``.  With this convention ``t x_i t^-1 = x_(i-1)``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import gcd
from typing import Optional, Sequence

from .errors import RCNotZero, RCZero, SearchExhausted
from .words import CyclicWord, Presentation, Word, exponent_sums, format_word

log = logging.getLogger(__name__)

__all__ = [
    "compute_rc",
    "FreeProductDecomposition",
    "decompose_rc_zero",
    "SubscriptedGenerator",
    "HnnData",
    "apply_twist",
    "hierarchy_step",
    "hierarchy_chain",
    "verify_magnus_condition",
    "check_hnn_data",
]


def compute_rc(c) -> int:
    """Length of ``c`` minus the number of distinct generators in it."""
    w = c.representative if isinstance(c, CyclicWord) else Word(c)
    return len(w) - len(w.generators())


# --------------------------------------------------------------------------
# RC = 0: free product of a free group and a finite cyclic group
# --------------------------------------------------------------------------


def _fresh(name: str, taken) -> str:
    if name not in taken:
        return name
    for i in itertools.count(1):
        if f"{name}{i}" not in taken:
            return f"{name}{i}"


@dataclass(frozen=True)
class FreeProductDecomposition:
    """``G = F_m * Z/n`` obtained by a Tietze move.

    The last letter of the root is eliminated; the new basis consists of the
    remaining generators, the free factors and a torsion generator standing
    for the root itself.
    """

    presentation: Presentation
    free_rank: int
    order: int
    basis: tuple
    torsion_generator: str
    eliminated: int
    substitution: tuple

    @property
    def torsion_index(self) -> int:
        return len(self.basis) - 1

    def to_basis(self, w: Sequence[int]) -> Word:
        out = Word()
        for x in w:
            img = self.substitution[abs(x) - 1]
            out = out * (img if x > 0 else ~img)
        return out

    def normal_form(self, w: Sequence[int]) -> tuple:
        """Syllable normal form: free letters and torsion powers in ``[1, n)``."""
        c = self.torsion_index + 1
        n = self.order
        stack: list = []
        for x in self.to_basis(w):
            if abs(x) == c:
                e = 1 if x > 0 else -1
                if stack and stack[-1][0] == "c":
                    e = (stack[-1][1] + e) % n
                    stack.pop()
                    if e:
                        stack.append(("c", e))
                else:
                    stack.append(("c", e % n))
            elif stack and stack[-1] == ("f", -x):
                stack.pop()
            else:
                stack.append(("f", x))
        return tuple(stack)

    def is_trivial(self, w: Sequence[int]) -> bool:
        return not self.normal_form(w)


def decompose_rc_zero(p: Presentation) -> FreeProductDecomposition:
    if compute_rc(p.root) != 0:
        raise RCNotZero(f"RC = {compute_rc(p.root)}")
    names = p.all_generators
    root = p.root
    last = root[-1]
    k = abs(last) - 1
    prefix = root.slice(0, len(root) - 1)
    torsion = _fresh("c", names)
    basis = tuple(n for i, n in enumerate(names) if i != k) + (torsion,)
    new_index = {}
    for i in range(len(names)):
        if i != k:
            new_index[i] = len(new_index)
    c = Word.gen(len(basis) - 1)

    def relabel(w):
        return Word._trusted((new_index[abs(x) - 1] + 1) * (1 if x > 0 else -1) for x in w)

    subst = []
    for i in range(len(names)):
        if i == k:
            img = ~relabel(prefix) * c
            subst.append(img if last > 0 else ~img)
        else:
            subst.append(Word.gen(new_index[i]))
    return FreeProductDecomposition(
        presentation=p,
        free_rank=len(names) - 1,
        order=p.exponent,
        basis=basis,
        torsion_generator=torsion,
        eliminated=k,
        substitution=tuple(subst),
    )


# --------------------------------------------------------------------------
# the hierarchy step
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SubscriptedGenerator:
    base: str
    base_index: int
    height: int

    @property
    def name(self) -> str:
        h = f"m{-self.height}" if self.height < 0 else str(self.height)
        return f"{self.base}_{h}"


@dataclass(frozen=True)
class HnnData:
    """``H = <K, t | t u t^-1 = alpha(u), u in u1>``.

    ``source`` is ``G``; ``ambient`` is ``<S, t | phi(W)^n>``, isomorphic to
    ``G * <t>`` through the twisting automorphism ``phi: x -> x t^twist[x]``.
    ``embedding[j]`` is the ambient word ``t^-i x t^i`` of base generator
    ``j = x_i``.  Indices in ``u1``/``u2`` refer to ``base.all_generators``
    and ``alpha`` sends ``u1[j]`` to ``u2[j]``.
    """

    source: Presentation
    twist: tuple
    stable: str
    twisted_root: Word
    ambient: Presentation
    base: Presentation
    subscripts: tuple
    u1: tuple
    u2: tuple
    embedding: tuple

    @property
    def stable_index(self) -> int:
        return self.source.rank

    @property
    def alpha(self) -> dict:
        return dict(zip(self.u1, self.u2))

    @property
    def hnn_generator_names(self) -> tuple:
        return self.base.all_generators + (self.stable,)

    def hnn_presentation(self):
        """Finite presentation of ``H`` on base generators and ``t``."""
        from .words import FpPresentation

        t = Word.gen(len(self.base.all_generators))
        rels = [self.base.relator]
        for u, v in zip(self.u1, self.u2):
            rels.append(t * Word.gen(u) * ~t * ~Word.gen(v))
        return FpPresentation(self.hnn_generator_names, tuple(rels))

    def embed(self, w: Sequence[int]) -> Word:
        """Map a word over base generators and ``t`` into the ambient group."""
        t = Word.gen(self.stable_index)
        nb = len(self.base.all_generators)
        out = Word()
        for x in w:
            j = abs(x) - 1
            img = t if j == nb else self.embedding[j]
            out = out * (img if x > 0 else ~img)
        return out

    def untwist(self, w: Sequence[int]) -> Word:
        """Apply ``phi^-1``: an ambient word as a word in ``G * <t>``."""
        t = Word.gen(self.stable_index)
        out = Word()
        for x in w:
            j = abs(x) - 1
            img = Word.gen(j)
            if j < len(self.twist) and self.twist[j]:
                img = img * t ** (-self.twist[j])
            out = out * (img if x > 0 else ~img)
        return out

    def to_json(self) -> dict:
        names = self.hnn_generator_names
        amb = self.ambient.all_generators
        return {
            "source": self.source.to_json(),
            "twist": {n: k for n, k in zip(self.source.all_generators, self.twist) if k},
            "stable": self.stable,
            "generators": [
                {"name": s.name, "base": s.base, "height": s.height} for s in self.subscripts
            ],
            "relator": format_word(self.base.root, self.base.all_generators),
            "exponent": self.base.exponent,
            "u1": [names[i] for i in self.u1],
            "u2": [names[i] for i in self.u2],
            "alpha": [[i, j] for i, j in zip(self.u1, self.u2)],
            "embedding": {
                s.name: format_word(e, amb) for s, e in zip(self.subscripts, self.embedding)
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "HnnData":
        """Rebuild from source and twist, then insist the stored fields agree."""
        source = Presentation.from_json(data["source"])
        twist = tuple(int(data["twist"].get(n, 0)) for n in source.all_generators)
        h = apply_twist(source, twist, data["stable"])
        if h is None or h.to_json() != data:
            raise ValueError("HNN data does not match its recorded twist")
        return h


def _rewrite(root: Word, twist: Sequence[int]):
    """Heights of the letters of ``phi(root)``; None unless t-exponent sum is 0."""
    s = 0
    out = []
    for x in root:
        j = abs(x) - 1
        if x > 0:
            out.append((j, -s, 1))
            s += twist[j]
        else:
            s -= twist[j]
            out.append((j, -s, -1))
    if s != 0:
        return None
    return out


def apply_twist(p: Presentation, twist: Sequence[int], stable: Optional[str] = None) -> Optional[HnnData]:
    """Run the rewriting for a given twist vector; None if ``sigma_t != 0``."""
    twist = tuple(twist)
    names = p.all_generators
    if len(twist) != len(names):
        raise ValueError("twist length must match the generator count")
    stable = stable or _fresh("t", names)
    letters = _rewrite(p.root, twist)
    if letters is None:
        return None
    windows: dict = {}
    for j, h, _ in letters:
        lo, hi = windows.get(j, (h, h))
        windows[j] = (min(lo, h), max(hi, h))
    subs = []
    for j in sorted(windows):
        lo, hi = windows[j]
        subs.extend(SubscriptedGenerator(names[j], j, h) for h in range(lo, hi + 1))
    # free factors of G ride along at height 0
    for j in range(len(p.generators), len(names)):
        subs.append(SubscriptedGenerator(names[j], j, 0))
    pos = {(s.base_index, s.height): i for i, s in enumerate(subs)}
    rel = Word._trusted((pos[(j, h)] + 1) * e for j, h, e in letters)
    base = Presentation.normalized([s.name for s in subs], rel, p.exponent)
    order = {n: i for i, n in enumerate(base.all_generators)}
    subs = sorted(subs, key=lambda s: order[s.name])
    pos = {(s.base_index, s.height): i for i, s in enumerate(subs)}

    t = len(names)
    tw = Word.gen(t)
    phi_root = Word()
    for x in p.root:
        j = abs(x) - 1
        img = Word.gen(j) * tw ** twist[j]
        phi_root = phi_root * (img if x > 0 else ~img)
    try:
        ambient = Presentation.normalized(names + (stable,), phi_root, p.exponent)
    except Exception:
        return None
    if ambient.all_generators != names + (stable,):
        return None

    u1, u2 = [], []
    for s in sorted(subs, key=lambda s: (s.base_index, s.height)):
        if s.base_index >= len(p.generators):
            continue
        lo, _ = windows[s.base_index]
        if s.height > lo:
            u1.append(pos[(s.base_index, s.height)])
            u2.append(pos[(s.base_index, s.height - 1)])
    embedding = tuple(tw ** (-s.height) * Word.gen(s.base_index) * tw ** s.height for s in subs)
    return HnnData(
        source=p,
        twist=twist,
        stable=stable,
        twisted_root=phi_root,
        ambient=ambient,
        base=base,
        subscripts=tuple(subs),
        u1=tuple(u1),
        u2=tuple(u2),
        embedding=embedding,
    )


def verify_magnus_condition(h: HnnData) -> bool:
    """Both associated generator sets omit a letter of the base relator."""
    used = h.base.root.generators()
    return bool(used - set(h.u1)) and bool(used - set(h.u2))


def check_hnn_data(h: HnnData) -> dict:
    """Evaluate every checkable invariant; maps invariant name to bool."""
    base_names = h.base.all_generators
    t = Word.gen(h.stable_index)
    alpha_ok = len(h.u1) == len(h.u2) and all(
        h.subscripts[u].base_index == h.subscripts[v].base_index
        and h.subscripts[u].height - 1 == h.subscripts[v].height
        for u, v in zip(h.u1, h.u2)
    )
    embed_ok = all(
        e == t ** (-s.height) * Word.gen(s.base_index) * t ** s.height
        for s, e in zip(h.subscripts, h.embedding)
    ) and len(h.embedding) == len(base_names)
    stable_ok = all(
        not (t * h.embedding[u] * ~t * ~h.embedding[v]) for u, v in zip(h.u1, h.u2)
    )
    relator_ok = h.embed(h.base.root) == h.twisted_root or _conjugate_free(
        h.embed(h.base.root), h.twisted_root
    )
    return {
        "alpha_is_height_shift": alpha_ok,
        "magnus_condition": verify_magnus_condition(h),
        "rc_decreases": compute_rc(h.base.root) < compute_rc(h.source.root),
        "embedding_words": embed_ok,
        "stable_relations_free": stable_ok,
        "relator_image": relator_ok,
        "length_preserved": len(h.base.root) == len(h.source.root),
    }


def _conjugate_free(u: Word, v: Word) -> bool:
    from .words import cyclic_reduce

    return cyclic_reduce(u)[0] == cyclic_reduce(v)[0]


def _candidate_twists(p: Presentation, bound: int = 3):
    names = p.all_generators
    rank = len(names)
    sig = exponent_sums(p.root, rank)
    counts = {j: 0 for j in range(len(p.generators))}
    for x in p.root:
        counts[abs(x) - 1] += 1
    letters = sorted(counts, key=lambda j: (counts[j] < 2, j))
    seen = set()

    def emit(assign):
        v = [0] * rank
        for j, k in assign.items():
            v[j] = k
        v = tuple(v)
        if any(v) and v not in seen:
            seen.add(v)
            return v
        return None

    for a in letters:
        if sig[a] == 0:
            v = emit({a: 1})
            if v:
                yield v
    for a, b in itertools.permutations(letters, 2):
        if sig[a] == 0 and sig[b] == 0:
            continue
        g = gcd(sig[a], sig[b])
        v = emit({a: sig[b] // g, b: -sig[a] // g})
        if v:
            yield v
    for a, b in itertools.permutations(letters, 2):
        for pa, pb in itertools.product(range(-bound, bound + 1), repeat=2):
            if pa * sig[a] + pb * sig[b] == 0:
                v = emit({a: pa, b: pb})
                if v:
                    yield v


def hierarchy_step(p: Presentation, bound: int = 3) -> HnnData:
    """Split ``G * <t>`` as an HNN extension of a base with smaller RC."""
    core = p.core()
    rc = compute_rc(core.root)
    if rc == 0:
        raise RCZero("RC(W) = 0; use decompose_rc_zero")
    tried = 0
    for twist in _candidate_twists(core, bound):
        tried += 1
        h = apply_twist(core, twist)
        if h is None:
            continue
        checks = check_hnn_data(h)
        if all(checks.values()):
            return h
        log.debug("twist %s rejected: %s", twist, checks)
    raise SearchExhausted(f"no twist among {tried} candidates decreased RC")


def hierarchy_chain(p: Presentation, bound: int = 3) -> list:
    """Iterate the hierarchy step until the base has RC = 0."""
    chain = []
    current = p.core()
    while compute_rc(current.root) > 0:
        h = hierarchy_step(current, bound)
        chain.append(h)
        current = h.base.core()
    return chain
