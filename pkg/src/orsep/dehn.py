"""Word problem for one-relator groups with torsion via Dehn's algorithm.

For ``<S | W^n>`` with ``n >= 2`` every nonempty freely reduced word that is
trivial in the group contains more than half of a cyclic permutation of
``W^{+-n}`` (Newman's spelling theorem), so greedy replacement of such pieces
by their shorter complements decides triviality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .words import Presentation, Word, _reduce, cyclic_reduce

__all__ = [
    "PieceIndex",
    "build_piece_index",
    "dehn_reduce",
    "cyclic_dehn_reduce",
    "is_trivial",
    "are_equal",
]


@dataclass(frozen=True)
class PieceIndex:
    """Subwords of the cyclic relators longer than half of ``|W^n|``.

    ``pieces`` maps each such subword ``s`` to its complement ``t``, where
    ``s t^-1`` is a cyclic permutation of ``W^n`` or of its inverse.
    """

    relator_length: int
    threshold: int
    pieces: dict
    prefixes: frozenset

    def rotations(self) -> list:
        return sorted(s for s in self.pieces if len(s) == self.relator_length)


def build_piece_index(p: Presentation) -> PieceIndex:
    rel = p.relator
    L = len(rel)
    threshold = L // 2 + 1
    pieces: dict = {}
    for r in (rel, ~rel):
        for j in range(L):
            rot = r.rotate(j)
            for k in range(threshold, L + 1):
                s = tuple(rot[:k])
                if s not in pieces:
                    pieces[s] = tuple(-x for x in reversed(rot[k:]))
    prefixes = frozenset(s[:threshold] for s in pieces)
    return PieceIndex(L, threshold, pieces, prefixes)


@lru_cache(maxsize=64)
def _index_for(p: Presentation) -> PieceIndex:
    return build_piece_index(p)


def _find_piece(w: list, start: int, idx: PieceIndex):
    """Leftmost-longest piece of ``w`` starting at or after ``start``."""
    thr = idx.threshold
    L = idx.relator_length
    pieces = idx.pieces
    prefixes = idx.prefixes
    n = len(w)
    for i in range(start, n - thr + 1):
        if tuple(w[i : i + thr]) not in prefixes:
            continue
        for k in range(min(L, n - i), thr - 1, -1):
            t = pieces.get(tuple(w[i : i + k]))
            if t is not None:
                return i, k, t
    return None


def dehn_reduce(w: Sequence[int], idx: PieceIndex) -> Word:
    """Apply Dehn replacements until no piece remains.

    Each replacement strictly shortens the word, so at most ``|w|`` steps run.
    """
    w = _reduce(w)
    start = 0
    L = idx.relator_length
    while True:
        hit = _find_piece(w, start, idx)
        if hit is None:
            return Word._trusted(w)
        i, k, t = hit
        new = _reduce(w[:i] + list(t) + w[i + k :])
        keep = 0
        while keep < len(new) and keep < i and new[keep] == w[keep]:
            keep += 1
        w = new
        start = max(0, keep - L + 1)


def cyclic_dehn_reduce(w: Sequence[int], idx: PieceIndex) -> tuple:
    """Return ``(c, u)`` with ``w = u c u^-1`` in the group.

    ``c`` is cyclically reduced and no cyclic permutation of it contains a
    piece of length at most ``|c|``.
    """
    c, u = cyclic_reduce(dehn_reduce(w, idx))
    c = c.representative
    while True:
        n = len(c)
        if n < idx.threshold:
            return c, u
        doubled = list(c) + list(c)
        hit = None
        for i in range(n):
            seg = doubled[i : i + n]
            found = _find_piece(seg, 0, idx)
            if found is not None and found[0] == 0:
                hit = (i, found[1], found[2])
                break
        if hit is None:
            return c, u
        i, k, t = hit
        u = u * c.slice(0, i)
        rotated = c.rotate(i)
        reduced = dehn_reduce(list(t) + list(rotated[k:]), idx)
        cc, v = cyclic_reduce(reduced)
        u = u * v
        c = cc.representative


def is_trivial(w: Sequence[int], p: Presentation) -> bool:
    """Decide ``w = 1`` in ``p``."""
    return not dehn_reduce(w, _index_for(p))


def are_equal(u: Sequence[int], v: Sequence[int], p: Presentation) -> bool:
    return is_trivial(Word(u) * ~Word(v), p)


def reduce_in(p: Presentation, w: Sequence[int]) -> Word:
    return dehn_reduce(w, _index_for(p))


def piece_index(p: Presentation) -> PieceIndex:
    return _index_for(p)
