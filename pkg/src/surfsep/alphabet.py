"""Words over a surface-group basis.

The group is free of rank 2g + b - 1 with positive letters
a1, b1, ..., ag, bg, x1, ..., x_{b-1}.  The b boundary classes are the
letters x1 ... x_{b-1} together with the long product

    x_b = [a1, b1] ... [ag, bg] x1 ... x_{b-1}.

This module provides the letter/word types, free and cyclic reduction,
the boundary words, the peripheral-element test, and the text format
(tokens ``a1 b2' x3`` separated by single spaces, apostrophe = inverse).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple


class WordParseError(ValueError):
    """A word token is malformed or names a letter outside the basis."""


_KIND_ORDER = {"a": 0, "b": 1, "x": 2}
_TOKEN_RE = re.compile(r"^([abx])([1-9][0-9]*)(')?$")


@dataclass(frozen=True)
class Letter:
    """A signed basis letter, e.g. a2 or x1' (sign -1 for the inverse)."""

    kind: str
    index: int
    sign: int = 1

    def __post_init__(self) -> None:
        if self.kind not in _KIND_ORDER:
            raise ValueError(f"letter kind must be one of a, b, x: {self.kind!r}")
        if self.index < 1:
            raise ValueError(f"letter index must be >= 1: {self.index}")
        if self.sign not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1: {self.sign}")

    def inverse(self) -> "Letter":
        return Letter(self.kind, self.index, -self.sign)

    @property
    def positive(self) -> "Letter":
        return self if self.sign == 1 else Letter(self.kind, self.index, 1)

    def __str__(self) -> str:
        return f"{self.kind}{self.index}" + ("'" if self.sign < 0 else "")


@dataclass(frozen=True)
class Word:
    """A finite sequence of letters; not automatically reduced."""

    letters: Tuple[Letter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, k: int) -> "Word":
        if k >= 0:
            return Word(self.letters * k)
        return self.inverse() ** (-k)

    def inverse(self) -> "Word":
        return Word(tuple(l.inverse() for l in reversed(self.letters)))

    def __str__(self) -> str:
        return format_word(self)


_LETTER_TABLE_CACHE: dict = {}


@dataclass(frozen=True)
class SurfaceBasis:
    """A compact orientable surface with genus g and b >= 1 boundary circles.

    The fundamental group must be non-cyclic, which excludes g = 0 with
    b <= 2.
    """

    genus: int
    boundary: int

    def __post_init__(self) -> None:
        if self.genus < 0:
            raise ValueError(f"genus must be >= 0: {self.genus}")
        if self.boundary < 1:
            raise ValueError(f"boundary count must be >= 1: {self.boundary}")
        if self.genus == 0 and self.boundary <= 2:
            raise ValueError("need genus > 0 or boundary > 2 (non-cyclic group)")

    @property
    def letter_count(self) -> int:
        """Number of positive letters, 2g + b - 1."""
        return 2 * self.genus + self.boundary - 1

    def positive_letters(self) -> Tuple[Letter, ...]:
        """Positive letters in canonical order a1, b1, ..., ag, bg, x1, ..."""
        letters = []
        for i in range(1, self.genus + 1):
            letters.append(Letter("a", i))
            letters.append(Letter("b", i))
        for i in range(1, self.boundary):
            letters.append(Letter("x", i))
        return tuple(letters)

    def letter_id(self, letter: Letter) -> int:
        """Canonical 0-based id of the positive version of a letter."""
        if letter.kind in ("a", "b"):
            if not 1 <= letter.index <= self.genus:
                raise WordParseError(f"letter {letter.positive} outside basis")
            return 2 * (letter.index - 1) + (0 if letter.kind == "a" else 1)
        if not 1 <= letter.index <= self.boundary - 1:
            raise WordParseError(f"letter {letter.positive} outside basis")
        return 2 * self.genus + letter.index - 1

    def _letter_tables(self) -> Tuple[Tuple[Letter, ...], Tuple[Letter, ...]]:
        key = (self.genus, self.boundary)
        tables = _LETTER_TABLE_CACHE.get(key)
        if tables is None:
            pos = []
            for lid in range(self.letter_count):
                if lid < 2 * self.genus:
                    pos.append(Letter("a" if lid % 2 == 0 else "b", lid // 2 + 1))
                else:
                    pos.append(Letter("x", lid - 2 * self.genus + 1))
            tables = (tuple(pos), tuple(l.inverse() for l in pos))
            _LETTER_TABLE_CACHE[key] = tables
        return tables

    def letter_from_id(self, lid: int) -> Letter:
        if not 0 <= lid < self.letter_count:
            raise ValueError(f"letter id out of range: {lid}")
        return self._letter_tables()[0][lid]

    def encode_letter(self, letter: Letter) -> int:
        """Signed id: +(id+1) for positive letters, -(id+1) for inverses."""
        return letter.sign * (self.letter_id(letter) + 1)

    def decode_letter(self, code: int) -> Letter:
        if code == 0:
            raise ValueError("letter code 0 is invalid")
        lid = abs(code) - 1
        if not 0 <= lid < self.letter_count:
            raise ValueError(f"letter id out of range: {lid}")
        tables = self._letter_tables()
        return tables[0][lid] if code > 0 else tables[1][lid]

    def encode(self, word: Word) -> Tuple[int, ...]:
        return tuple(self.encode_letter(l) for l in word)

    def decode(self, codes) -> Word:
        return Word(tuple(self.decode_letter(c) for c in codes))


def free_reduce(w: Word) -> Word:
    """The unique reduced word freely equal to w (idempotent)."""
    stack: list[Letter] = []
    for letter in w:
        if stack and stack[-1] == letter.inverse():
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack))


def cyclic_reduce(w: Word) -> Tuple[Word, Word]:
    """Split w as conjugator * core * conjugator^-1 with core cyclically reduced."""
    core = list(free_reduce(w).letters)
    conj: list[Letter] = []
    while len(core) >= 2 and core[0] == core[-1].inverse():
        conj.append(core[0])
        core = core[1:-1]
    return Word(tuple(core)), Word(tuple(conj))


def boundary_word(basis: SurfaceBasis, i: int) -> Word:
    """The i-th boundary class as a cyclically reduced word.

    For i < b this is the letter x_i; for i = b it is the long product of
    commutators followed by x1 ... x_{b-1}.
    """
    if not 1 <= i <= basis.boundary:
        raise ValueError(f"boundary index out of range: {i}")
    if i < basis.boundary:
        return Word((Letter("x", i),))
    letters: list[Letter] = []
    for j in range(1, basis.genus + 1):
        a, b = Letter("a", j), Letter("b", j)
        letters.extend([a, b, a.inverse(), b.inverse()])
    for j in range(1, basis.boundary):
        letters.append(Letter("x", j))
    return Word(tuple(letters))


def _is_rotation(target: Tuple[int, ...], source: Tuple[int, ...]) -> bool:
    if len(target) != len(source):
        return False
    doubled = source + source
    n = len(source)
    return any(doubled[j : j + n] == target for j in range(n))


def is_peripheral(basis: SurfaceBasis, w: Word) -> Optional[Tuple[int, int]]:
    """Witness (i, k) when w is conjugate to boundary_word(i)^k, k != 0.

    The identity is classified non-peripheral.  Ties are broken by smallest
    i, then smallest |k|, then positive k.
    """
    core, _ = cyclic_reduce(w)
    if len(core) == 0:
        return None
    enc = basis.encode(core)
    for i in range(1, basis.boundary + 1):
        base = basis.encode(boundary_word(basis, i))
        if len(enc) % len(base) != 0:
            continue
        k = len(enc) // len(base)
        if _is_rotation(enc, base * k):
            return (i, k)
        inv = tuple(-c for c in reversed(base))
        if _is_rotation(enc, inv * k):
            return (i, -k)
    return None


def parse_word(basis: SurfaceBasis, text: str) -> Word:
    """Parse space-separated tokens; does not reduce. Empty text = identity."""
    letters = []
    for token in text.split():
        match = _TOKEN_RE.match(token)
        if match is None:
            raise WordParseError(f"malformed word token: {token!r}")
        kind, index, prime = match.group(1), int(match.group(2)), match.group(3)
        letter = Letter(kind, index, -1 if prime else 1)
        basis.letter_id(letter)
        letters.append(letter)
    return Word(tuple(letters))


def format_word(w: Word) -> str:
    return " ".join(str(l) for l in w)
