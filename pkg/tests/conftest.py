"""Shared helpers for the test suite: seeded word and instance generators."""
from __future__ import annotations

import random
from typing import List, Optional, Tuple

from hypothesis import strategies as st

from surfsep.alphabet import Letter, SurfaceBasis, Word, free_reduce


def basis_letters(basis: SurfaceBasis) -> List[Letter]:
    """The positive letters of the basis as a list."""
    return list(basis.positive_letters())


def random_word(rng: random.Random, basis: SurfaceBasis, max_len: int = 10) -> Word:
    """A random word without immediate cancellations, possibly empty."""
    letters = basis_letters(basis)
    out: List[Letter] = []
    for _ in range(rng.randint(1, max_len)):
        letter = rng.choice(letters)
        if rng.random() < 0.5:
            letter = letter.inverse()
        if out and out[-1] == letter.inverse():
            continue
        out.append(letter)
    return Word(tuple(out))


def random_raw_word(rng: random.Random, basis: SurfaceBasis, max_len: int = 10) -> Word:
    """A random word that may contain cancelling adjacent pairs."""
    letters = basis_letters(basis)
    out = []
    for _ in range(rng.randint(0, max_len)):
        letter = rng.choice(letters)
        if rng.random() < 0.5:
            letter = letter.inverse()
        out.append(letter)
    return Word(tuple(out))


def random_basis(rng: random.Random, max_genus: int = 2, max_boundary: int = 3) -> SurfaceBasis:
    """A random basis with at least two positive letters."""
    while True:
        g = rng.randint(0, max_genus)
        b = rng.randint(1, max_boundary)
        if 2 * g + b - 1 >= 2:
            return SurfaceBasis(g, b)


def word_strategy(basis: SurfaceBasis, max_len: int = 64):
    """Hypothesis strategy for words over the basis, cancellations allowed."""
    signed = [l for base in basis.positive_letters() for l in (base, base.inverse())]
    return st.lists(st.sampled_from(signed), max_size=max_len).map(
        lambda letters: Word(tuple(letters))
    )


def basis_strategy(max_genus: int = 2, max_boundary: int = 3):
    """Hypothesis strategy for a basis accepted by the constructor."""
    return st.tuples(
        st.integers(0, max_genus), st.integers(1, max_boundary)
    ).filter(lambda gb: gb[0] > 0 or gb[1] > 2).map(lambda gb: SurfaceBasis(*gb))


def random_subgroup_instance(
    rng: random.Random,
    max_generators: int = 4,
    max_excluded: int = 3,
    max_len: int = 10,
    boundary: Optional[int] = None,
) -> Tuple[SurfaceBasis, List[Word], List[Word]]:
    """A random (basis, generators, excluded) triple with nonempty words."""
    while True:
        basis = random_basis(rng)
        if boundary is not None and basis.boundary != boundary:
            continue
        gens = [random_word(rng, basis, max_len) for _ in range(rng.randint(1, max_generators))]
        gens = [w for w in gens if len(free_reduce(w)) > 0]
        if not gens:
            continue
        excluded = [random_word(rng, basis, max_len) for _ in range(rng.randint(0, max_excluded))]
        excluded = [w for w in excluded if len(free_reduce(w)) > 0]
        return basis, gens, excluded
