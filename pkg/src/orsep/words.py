"""Free group words, cyclic words and one-relator presentations.

A letter is a nonzero integer: ``i + 1`` stands for the generator with index
``i`` and ``-(i + 1)`` for its inverse.  Words are always freely reduced.

Concrete syntax for presentations::

    < a, b | (a b A B)^2 >

Uppercase single letters are inverses of their lowercase twins, and ``^-k``
exponents are accepted everywhere.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import EmptyRelator, PresentationSyntaxError, TorsionRequired

__all__ = [
    "Word",
    "CyclicWord",
    "Presentation",
    "FpPresentation",
    "free_reduce",
    "cyclic_reduce",
    "is_proper_power",
    "exponent_sums",
    "parse_presentation",
    "parse_word",
    "format_word",
]


class Word(tuple):
    """A freely reduced word, stored as a tuple of signed letters.

    ``u * v`` is the reduced product, ``~u`` the inverse and ``u ** k`` the
    ``k``-th power.  Equality is plain tuple equality.
    """

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        return tuple.__new__(cls, _reduce(letters))

    @classmethod
    def _trusted(cls, letters: Iterable[int]) -> "Word":
        # caller guarantees the sequence is already freely reduced
        return tuple.__new__(cls, letters)

    @classmethod
    def gen(cls, index: int, sign: int = 1) -> "Word":
        return cls._trusted((sign * (index + 1),))

    def __mul__(self, other):
        if not isinstance(other, tuple):
            return NotImplemented
        if not isinstance(other, Word):
            other = Word(other)
        i = 0
        n = len(self)
        m = len(other)
        while i < n and i < m and self[n - 1 - i] == -other[i]:
            i += 1
        return Word._trusted(tuple.__add__(self[: n - i], other[i:]))

    def __rmul__(self, other):
        if not isinstance(other, tuple):
            return NotImplemented
        return Word(other) * self

    def __invert__(self) -> "Word":
        return Word._trusted(-x for x in reversed(self))

    inverse = __invert__

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return (~self) ** (-k)
        result = Word()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def slice(self, start: int, stop: Optional[int] = None) -> "Word":
        # a subword of a reduced word is reduced
        return Word._trusted(self[start:stop])

    def rotate(self, k: int) -> "Word":
        """Cyclic rotation (only meaningful for cyclically reduced words)."""
        if not self:
            return self
        k %= len(self)
        return Word._trusted(tuple.__add__(self[k:], self[:k]))

    def generators(self) -> frozenset:
        return frozenset(abs(x) - 1 for x in self)

    def is_cyclically_reduced(self) -> bool:
        return len(self) < 2 or self[0] != -self[-1]

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


def _reduce(letters: Iterable[int]) -> list:
    out: list = []
    for x in letters:
        if not x:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def free_reduce(letters: Iterable[int]) -> Word:
    """Return the freely reduced form of a raw letter sequence."""
    return Word(letters)


def cyclic_reduce(w: Sequence[int]) -> tuple["CyclicWord", Word]:
    """Split ``w`` as ``u c u^-1`` with ``c`` cyclically reduced.

    Returns ``(CyclicWord(c), u)``.
    """
    w = Word(w)
    i = 0
    n = len(w)
    while 2 * i + 1 < n and w[i] == -w[n - 1 - i]:
        i += 1
    return CyclicWord(w.slice(i, n - i)), w.slice(0, i)


def is_proper_power(c) -> Optional[tuple["CyclicWord", int]]:
    """Return ``(root, k)`` with ``c = root^k`` and ``k >= 2`` maximal, else None."""
    w = c.representative if isinstance(c, CyclicWord) else Word(c)
    n = len(w)
    for d in range(1, n // 2 + 1):
        if n % d == 0 and all(w[i] == w[i + d] for i in range(n - d)):
            return CyclicWord(w.slice(0, d)), n // d
    return None


def exponent_sums(w: Sequence[int], rank: int) -> tuple:
    sums = [0] * rank
    for x in w:
        sums[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(sums)


@dataclass(frozen=True, eq=False)
class CyclicWord:
    """A cyclically reduced word up to rotation."""

    representative: Word

    def __post_init__(self):
        if not isinstance(self.representative, Word):
            object.__setattr__(self, "representative", Word(self.representative))
        if not self.representative.is_cyclically_reduced():
            raise ValueError("cyclic words must be cyclically reduced")

    def canonical(self) -> Word:
        w = self.representative
        if not w:
            return w
        return min(w.rotate(k) for k in range(len(w)))

    def rotations(self) -> list:
        w = self.representative
        return [w.rotate(k) for k in range(len(w))] or [w]

    def __eq__(self, other):
        if not isinstance(other, CyclicWord):
            return NotImplemented
        return len(self) == len(other) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __len__(self):
        return len(self.representative)

    def __iter__(self):
        return iter(self.representative)


# --------------------------------------------------------------------------
# formatting and parsing
# --------------------------------------------------------------------------

_NAME = re.compile(r"[a-z][a-z0-9_]*\Z")


def _single_letter(names: Sequence[str]) -> bool:
    return all(len(s) == 1 for s in names)


def format_word(w: Sequence[int], names: Optional[Sequence[str]] = None) -> str:
    """Render a word; ``"1"`` is the empty word."""
    if not w:
        return "1"
    if names is None:
        names = [chr(ord("a") + i) for i in range(26)]
        if max(abs(x) for x in w) > 26:
            names = [f"x{i}" for i in range(max(abs(x) for x in w))]
    if _single_letter(names):
        return "".join(names[x - 1] if x > 0 else names[-x - 1].upper() for x in w)
    # run-length encode for readability
    parts = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        k = (j - i) * (1 if w[i] > 0 else -1)
        name = names[abs(w[i]) - 1]
        parts.append(name if k == 1 else f"{name}^{k}")
        i = j
    return " ".join(parts)


class _Parser:
    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.pos = 0
        self.names = sorted(((n, i) for i, n in enumerate(names)), key=lambda t: -len(t[0]))
        self.single = {n: i for i, n in enumerate(names) if len(n) == 1}

    def error(self, msg: str):
        raise PresentationSyntaxError(f"{msg} at position {self.pos} in {self.text!r}")

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def integer(self) -> int:
        self.skip()
        m = re.compile(r"-?\s*\d+").match(self.text, self.pos)
        if not m:
            self.error("expected an integer")
        self.pos = m.end()
        return int(m.group().replace(" ", ""))

    def exponent(self) -> int:
        if self.peek() == "^":
            self.pos += 1
            return self.integer()
        return 1

    def word(self, stop: str = "") -> list:
        letters: list = []
        while True:
            ch = self.peek()
            if not ch or ch in stop:
                return letters
            if ch == "(":
                self.pos += 1
                inner = self.word(")")
                self.expect(")")
                k = self.exponent()
                block = inner if k >= 0 else [-x for x in reversed(inner)]
                letters.extend(block * abs(k))
                continue
            if ch == "1" and not letters:
                self.pos += 1
                continue
            letter = self.letter()
            k = self.exponent()
            letters.extend([letter if k > 0 else -letter] * abs(k))

    def letter(self) -> int:
        for name, i in self.names:
            if self.text.startswith(name, self.pos):
                self.pos += len(name)
                return i + 1
        ch = self.text[self.pos]
        if ch.isupper() and ch.lower() in self.single:
            self.pos += 1
            return -(self.single[ch.lower()] + 1)
        self.error(f"unknown generator {ch!r}")


def parse_word(text: str, names: Sequence[str]) -> Word:
    """Parse a word over the given generator names."""
    p = _Parser(text, names)
    letters = p.word()
    if p.peek():
        p.error("unexpected character")
    return Word(letters)


@dataclass(frozen=True)
class FpPresentation:
    """A plain finite presentation: generator names and relator words."""

    generator_names: tuple
    relators: tuple

    @property
    def rank(self) -> int:
        return len(self.generator_names)

    def format_word(self, w: Sequence[int]) -> str:
        return format_word(w, self.generator_names)

    def parse_word(self, text: str) -> Word:
        return parse_word(text, self.generator_names)

    @property
    def hash(self) -> str:
        text = ",".join(self.generator_names) + "|" + ";".join(
            format_word(r, self.generator_names) for r in self.relators
        )
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Presentation:
    """``< generators, free_factors | root^exponent >``.

    ``generators`` are the letters occurring in ``root``; ``free_factors``
    are declared generators absent from the relator, so the group is the
    one-relator core free-producted with a free group on them.  Word letters
    index into ``generators + free_factors``.
    """

    generators: tuple
    root: Word
    exponent: int
    free_factors: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "free_factors", tuple(self.free_factors))
        if not isinstance(self.root, Word):
            object.__setattr__(self, "root", Word(self.root))
        names = self.all_generators
        if len(set(names)) != len(names):
            raise ValueError("generator names must be distinct")
        if self.exponent < 2:
            raise TorsionRequired(f"exponent {self.exponent} < 2")
        if not self.root:
            raise EmptyRelator("relator root is empty")
        if not self.root.is_cyclically_reduced():
            raise ValueError("relator root must be cyclically reduced")
        if is_proper_power(self.root) is not None:
            raise ValueError("relator root must not be a proper power")
        if self.root.generators() != frozenset(range(len(self.generators))):
            raise ValueError("every core generator must occur in the root")

    @classmethod
    def normalized(cls, names: Sequence[str], relator: Sequence[int], exponent: int = 1) -> "Presentation":
        """Build a presentation from an arbitrary relator ``relator^exponent``.

        Reduces the relator cyclically, extracts a primitive root (folding its
        power into the exponent), and splits unused generators off as free
        factors.
        """
        names = tuple(names)
        if exponent < 0:
            relator, exponent = ~Word(relator), -exponent
        c, _ = cyclic_reduce(relator)
        if not c.representative or exponent == 0:
            raise EmptyRelator("relator is trivial in the free group")
        root = c.representative
        pp = is_proper_power(c)
        if pp is not None:
            root, k = pp[0].representative, pp[1]
            exponent *= k
        if exponent < 2:
            raise TorsionRequired("effective relator exponent is 1")
        used = root.generators()
        core = [i for i in range(len(names)) if i in used]
        free = [i for i in range(len(names)) if i not in used]
        remap = {old: new for new, old in enumerate(core + free)}
        root = Word._trusted((remap[abs(x) - 1] + 1) * (1 if x > 0 else -1) for x in root)
        return cls(
            tuple(names[i] for i in core), root, exponent, tuple(names[i] for i in free)
        )

    @property
    def all_generators(self) -> tuple:
        return self.generators + self.free_factors

    generator_names = all_generators

    @property
    def rank(self) -> int:
        return len(self.generators) + len(self.free_factors)

    @property
    def relator(self) -> Word:
        return self.root ** self.exponent

    @property
    def relators(self) -> tuple:
        return (self.relator,)

    @property
    def root_cyclic(self) -> CyclicWord:
        return CyclicWord(self.root)

    def core(self) -> "Presentation":
        return Presentation(self.generators, self.root, self.exponent)

    def format_word(self, w: Sequence[int]) -> str:
        return format_word(w, self.all_generators)

    def parse_word(self, text: str) -> Word:
        return parse_word(text, self.all_generators)

    def as_fp(self) -> FpPresentation:
        return FpPresentation(self.all_generators, self.relators)

    @property
    def hash(self) -> str:
        return hashlib.sha256(str(self).encode()).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "generators": list(self.all_generators),
            "relator": self.format_word(self.root),
            "exponent": self.exponent,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Presentation":
        names = tuple(data["generators"])
        return cls.normalized(names, parse_word(data["relator"], names), int(data["exponent"]))

    def __str__(self) -> str:
        return "< {} | ({})^{} >".format(
            ", ".join(self.all_generators), self.format_word(self.root), self.exponent
        )


def parse_presentation(text: str) -> Presentation:
    """Parse ``< gen, ... | relator >`` into a normalized presentation."""
    m = re.fullmatch(r"\s*<(.*)\|(.*)>\s*", text, re.S)
    if not m:
        raise PresentationSyntaxError(f"expected '< gens | relator >', got {text!r}")
    names = [s.strip() for s in m.group(1).split(",")]
    if names == [""]:
        raise PresentationSyntaxError("no generators declared")
    for s in names:
        if not _NAME.match(s):
            raise PresentationSyntaxError(f"bad generator name {s!r}")
    if len(set(names)) != len(names):
        raise PresentationSyntaxError("duplicate generator names")
    relator = parse_word(m.group(2), names)
    return Presentation.normalized(names, relator, 1)
