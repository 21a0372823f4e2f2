import pytest
from hypothesis import given, strategies as st

from orsep.errors import EmptyRelator, PresentationSyntaxError, TorsionRequired
from orsep.words import (
    CyclicWord,
    Presentation,
    Word,
    cyclic_reduce,
    exponent_sums,
    format_word,
    free_reduce,
    is_proper_power,
    parse_presentation,
    parse_word,
)

letters = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=30)


def naive_reduce(seq):
    # repeatedly delete the leftmost cancelling pair
    seq = list(seq)
    changed = True
    while changed:
        changed = False
        for i in range(len(seq) - 1):
            if seq[i] == -seq[i + 1]:
                del seq[i : i + 2]
                changed = True
                break
    return tuple(seq)


@given(letters)
def test_reduction_matches_naive(seq):
    assert tuple(Word(seq)) == naive_reduce(seq)


@given(letters, letters)
def test_product_and_inverse(u, v):
    u, v = Word(u), Word(v)
    assert u * ~u == Word()
    assert ~(u * v) == ~v * ~u
    assert tuple(u * v) == naive_reduce(tuple(u) + tuple(v))


@given(letters)
def test_cyclic_reduce_conjugates_back(seq):
    w = Word(seq)
    c, u = cyclic_reduce(w)
    assert u * c.representative * ~u == w
    assert c.representative.is_cyclically_reduced()


def test_free_reduce_and_powers():
    assert free_reduce([1, 2, -2, -1, 1]) == Word([1])
    assert Word([1, 2]) ** 3 == Word([1, 2, 1, 2, 1, 2])
    assert Word([1, 2]) ** -1 == Word([-2, -1])
    assert Word([1, 2]) ** 0 == Word()


def test_cyclic_word_equality_is_rotation():
    assert CyclicWord(Word([1, 2, -1, -2])) == CyclicWord(Word([-1, -2, 1, 2]))
    assert CyclicWord(Word([1, 2, -1, -2])) != CyclicWord(Word([1, -2, -1, 2]))
    assert len({CyclicWord(Word([1, 2, 2])), CyclicWord(Word([2, 1, 2]))}) == 1


def test_proper_power_detection():
    root, k = is_proper_power(Word([1, 2, 1, 2, 1, 2]))
    assert k == 3 and root == CyclicWord(Word([1, 2]))
    assert is_proper_power(Word([1, 2, -1, -2])) is None


def test_exponent_sums():
    w = parse_word("abbAc^-3", ["a", "b", "c"])
    assert exponent_sums(w, 3) == (0, 2, -3)


def test_parse_syntax_variants():
    names = ["a", "b"]
    assert parse_word("a b A B", names) == parse_word("abAB", names)
    assert parse_word("a^-1", names) == parse_word("A", names)
    assert parse_word("(ab)^-2", names) == Word([-2, -1, -2, -1])
    assert parse_word("1", names) == Word()
    multi = ["x1", "x2"]
    w = parse_word("x1 x2^-1 x1^3", multi)
    assert format_word(w, multi) == "x1 x2^-1 x1^3"


def test_parse_presentation_normalizes():
    p = parse_presentation("< a, b | (a b a B)^2 >")
    assert p.exponent == 2 and p.generators == ("a", "b")
    # a written proper power folds into the exponent
    assert parse_presentation("< a | (a a)^2 >").exponent == 4
    # cyclic reduction of the written relator
    q = parse_presentation("< a, b | b (a b a B)^2 B >")
    assert q.root == p.root
    # unused generators become free factors
    r = parse_presentation("< a, b, c | (b a B)^3 >")
    assert r.generators == ("a",) and r.free_factors == ("b", "c")


def test_parse_errors():
    with pytest.raises(TorsionRequired):
        parse_presentation("< a, b | (a b)^1 >")
    with pytest.raises(TorsionRequired):
        parse_presentation("< a, b | a b A B >")
    with pytest.raises(EmptyRelator):
        parse_presentation("< a, b | (a A)^2 >")
    for bad in ["a, b | ab", "< a, a | (ab)^2 >", "< a, b | (a c)^2 >", "< A | a^2 >", "< a | (a^2 >"]:
        with pytest.raises(PresentationSyntaxError):
            parse_presentation(bad)


def test_presentation_round_trip():
    for text in ["< a, b | (a b a B)^2 >", "< x1, x2 | (x1 x2 x1^-1 x2^-1)^3 >", "< a, b, c | (a b b A c^-3)^2 >"]:
        p = parse_presentation(text)
        assert parse_presentation(str(p)) == p
        assert Presentation.from_json(p.to_json()) == p


def test_presentation_invariants():
    with pytest.raises(ValueError):
        Presentation(("a", "b"), Word([1, 2, 1, 2]), 2)
    with pytest.raises(ValueError):
        Presentation(("a", "b"), Word([1, 1]), 2)
