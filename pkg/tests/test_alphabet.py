"""Tests for letters, words, reduction, boundary classes, peripherality."""
from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import basis_strategy, random_raw_word, word_strategy
from surfsep.alphabet import (
    Letter,
    SurfaceBasis,
    Word,
    WordParseError,
    boundary_word,
    cyclic_reduce,
    format_word,
    free_reduce,
    is_peripheral,
    parse_word,
)

B11 = SurfaceBasis(1, 1)
B03 = SurfaceBasis(0, 3)
B12 = SurfaceBasis(1, 2)


def abelianized(basis: SurfaceBasis, w: Word) -> Counter:
    """Image of w in the free abelianization, one axis per positive letter."""
    out: Counter = Counter()
    for letter in w:
        out[basis.letter_id(letter.positive)] += letter.sign
    return Counter({k: v for k, v in out.items() if v != 0})


class TestLetterAndWord:
    def test_letter_str_forms(self):
        assert str(Letter("a", 1)) == "a1"
        assert str(Letter("x", 2, -1)) == "x2'"

    def test_letter_inverse_is_involution(self):
        letter = Letter("b", 3, -1)
        assert letter.inverse().inverse() == letter

    def test_letter_rejects_bad_kind_index_sign(self):
        with pytest.raises(ValueError):
            Letter("c", 1)
        with pytest.raises(ValueError):
            Letter("a", 0)
        with pytest.raises(ValueError):
            Letter("a", 1, 2)

    def test_word_product_and_power(self):
        w = parse_word(B11, "a1 b1")
        assert format_word(w * w) == "a1 b1 a1 b1"
        assert format_word(w ** 2) == "a1 b1 a1 b1"
        assert format_word(w ** -1) == "b1' a1'"
        assert len(w ** 0) == 0

    def test_word_inverse_reverses_and_flips(self):
        w = parse_word(B12, "a1 x1 b1'")
        assert format_word(w.inverse()) == "b1 x1' a1'"


class TestBasis:
    def test_letter_count_formula(self):
        assert B11.letter_count == 2
        assert B03.letter_count == 2
        assert SurfaceBasis(2, 3).letter_count == 6

    def test_rejects_cyclic_groups(self):
        with pytest.raises(ValueError):
            SurfaceBasis(0, 1)
        with pytest.raises(ValueError):
            SurfaceBasis(0, 2)
        with pytest.raises(ValueError):
            SurfaceBasis(-1, 1)

    def test_positive_letter_order(self):
        letters = SurfaceBasis(2, 3).positive_letters()
        assert [str(l) for l in letters] == ["a1", "b1", "a2", "b2", "x1", "x2"]

    def test_letter_id_round_trip(self):
        basis = SurfaceBasis(2, 3)
        for lid in range(basis.letter_count):
            assert basis.letter_id(basis.letter_from_id(lid)) == lid

    def test_letter_id_rejects_foreign_letters(self):
        with pytest.raises(WordParseError):
            B11.letter_id(Letter("x", 1))
        with pytest.raises(WordParseError):
            B11.letter_id(Letter("a", 2))

    def test_encode_decode_round_trip(self):
        w = parse_word(B12, "a1 b1' x1 a1'")
        assert B12.decode(B12.encode(w)) == w

    def test_signed_codes_negate_on_inverse(self):
        letter = Letter("b", 1)
        assert B11.encode_letter(letter) == -B11.encode_letter(letter.inverse())
        assert B11.decode_letter(B11.encode_letter(letter)) == letter


class TestParseFormat:
    def test_parse_simple_word(self):
        w = parse_word(B12, "a1 b1' x1")
        assert [str(l) for l in w] == ["a1", "b1'", "x1"]

    def test_parse_empty_text_is_identity(self):
        assert len(parse_word(B11, "")) == 0
        assert len(parse_word(B11, "   ")) == 0

    def test_parse_rejects_malformed_tokens(self):
        for bad in ("a", "1a", "a1''", "q2", "a-1", "a1 '"):
            with pytest.raises(WordParseError):
                parse_word(B11, bad)

    def test_parse_rejects_letters_outside_basis(self):
        with pytest.raises(WordParseError):
            parse_word(B11, "x1")
        with pytest.raises(WordParseError):
            parse_word(B03, "x3")
        with pytest.raises(WordParseError):
            parse_word(B03, "a1")

    def test_format_parse_round_trip(self):
        rng = random.Random(7)
        for _ in range(50):
            w = random_raw_word(rng, B12, 12)
            assert parse_word(B12, format_word(w)) == w


class TestFreeReduce:
    def test_cancels_adjacent_inverses(self):
        assert format_word(free_reduce(parse_word(B11, "a1 a1' b1"))) == "b1"

    def test_cascading_cancellation(self):
        w = parse_word(B11, "a1 b1 b1' a1' a1 b1")
        assert format_word(free_reduce(w)) == "a1 b1"

    def test_reduces_to_identity(self):
        assert len(free_reduce(parse_word(B11, "a1 b1 b1' a1'"))) == 0

    @settings(max_examples=150, deadline=None)
    @given(data=st.data())
    def test_idempotent_and_length_non_increasing(self, data):
        basis = data.draw(basis_strategy())
        w = data.draw(word_strategy(basis, 64))
        reduced = free_reduce(w)
        assert len(reduced) <= len(w)
        assert free_reduce(reduced) == reduced

    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_no_adjacent_inverse_pairs_remain(self, data):
        basis = data.draw(basis_strategy())
        w = data.draw(word_strategy(basis, 64))
        reduced = free_reduce(w)
        for u, v in zip(reduced, reduced[1:]):
            assert u != v.inverse()

    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_preserves_abelianization(self, data):
        basis = data.draw(basis_strategy())
        w = data.draw(word_strategy(basis, 64))
        assert abelianized(basis, free_reduce(w)) == abelianized(basis, w)


class TestCyclicReduce:
    def test_strips_conjugation(self):
        core, conj = cyclic_reduce(parse_word(B11, "a1 b1 a1'"))
        assert format_word(core) == "b1"
        assert format_word(conj) == "a1"

    def test_already_cyclically_reduced(self):
        core, conj = cyclic_reduce(parse_word(B11, "a1 b1"))
        assert format_word(core) == "a1 b1"
        assert len(conj) == 0

    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_conjugator_recovers_word(self, data):
        basis = data.draw(basis_strategy())
        w = data.draw(word_strategy(basis, 32))
        core, conj = cyclic_reduce(w)
        assert free_reduce(conj * core * conj.inverse()) == free_reduce(w)
        if len(core) >= 2:
            assert core[0] != core[-1].inverse()


class TestBoundaryWord:
    def test_short_classes_are_single_letters(self):
        assert format_word(boundary_word(B03, 1)) == "x1"
        assert format_word(boundary_word(B03, 2)) == "x2"
        assert format_word(boundary_word(B12, 1)) == "x1"

    def test_long_class_one_boundary_is_commutator(self):
        assert format_word(boundary_word(B11, 1)) == "a1 b1 a1' b1'"

    def test_long_class_planar_three_boundary(self):
        assert format_word(boundary_word(B03, 3)) == "x1 x2"

    def test_long_class_mixes_commutators_and_short_letters(self):
        assert format_word(boundary_word(B12, 2)) == "a1 b1 a1' b1' x1"
        assert format_word(boundary_word(SurfaceBasis(2, 2), 2)) == (
            "a1 b1 a1' b1' a2 b2 a2' b2' x1"
        )

    def test_long_class_length_formula(self):
        for g in range(0, 3):
            for b in range(1, 4):
                if g == 0 and b <= 2:
                    continue
                basis = SurfaceBasis(g, b)
                assert len(boundary_word(basis, b)) == 4 * g + b - 1

    def test_rejects_out_of_range_index(self):
        with pytest.raises(ValueError):
            boundary_word(B11, 0)
        with pytest.raises(ValueError):
            boundary_word(B11, 2)

    def test_long_class_abelianization_is_short_letter_sum(self):
        basis = SurfaceBasis(2, 3)
        expected = Counter(
            {basis.letter_id(Letter("x", 1)): 1, basis.letter_id(Letter("x", 2)): 1}
        )
        assert abelianized(basis, boundary_word(basis, 3)) == expected


class TestIsPeripheral:
    def test_boundary_words_and_powers_are_peripheral(self):
        for basis in (B11, B03, B12, SurfaceBasis(2, 3)):
            for i in range(1, basis.boundary + 1):
                w = boundary_word(basis, i)
                for k in list(range(-5, 0)) + list(range(1, 6)):
                    assert is_peripheral(basis, w ** k) == (i, k)

    def test_identity_is_not_peripheral(self):
        assert is_peripheral(B11, Word(())) is None
        assert is_peripheral(B11, parse_word(B11, "a1 a1'")) is None

    def test_genus_letter_is_not_peripheral(self):
        # The commutator a1 b1 a1' b1' and all its powers abelianize to
        # zero while a1 does not, so no witness pair can exist.
        assert is_peripheral(B11, parse_word(B11, "a1")) is None

    def test_rotated_long_class_is_peripheral(self):
        assert is_peripheral(B03, parse_word(B03, "x2 x1")) == (3, 1)

    def test_conjugated_power_is_peripheral(self):
        w = parse_word(B12, "a1 b1") * boundary_word(B12, 2) ** 3 * parse_word(B12, "b1' a1'")
        assert is_peripheral(B12, w) == (2, 3)

    def test_inverse_power_witness_sign(self):
        w = boundary_word(B03, 3).inverse()
        assert is_peripheral(B03, w) == (3, -1)

    def test_near_miss_words_are_rejected(self):
        assert is_peripheral(B11, parse_word(B11, "a1 b1 a1' b1")) is None
        assert is_peripheral(B03, parse_word(B03, "x1 x2'")) is None
        assert is_peripheral(B12, parse_word(B12, "x1 x1 b1")) is None

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_invariant_under_conjugation_and_reduction(self, data):
        basis = data.draw(basis_strategy())
        w = data.draw(word_strategy(basis, 24))
        conj = data.draw(word_strategy(basis, 8))
        before = is_peripheral(basis, w)
        assert is_peripheral(basis, free_reduce(w)) == before
        assert is_peripheral(basis, conj * w * conj.inverse()) == before

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_witness_matches_abelianization(self, data):
        basis = data.draw(basis_strategy())
        w = data.draw(word_strategy(basis, 24))
        witness = is_peripheral(basis, w)
        if witness is None:
            return
        i, k = witness
        assert k != 0
        expected = Counter()
        for letter, count in abelianized(basis, boundary_word(basis, i)).items():
            expected[letter] = count * k
        expected = Counter({l: c for l, c in expected.items() if c != 0})
        assert abelianized(basis, w) == expected
