import itertools
import math

import pytest

from orsep import perms
from orsep.errors import BudgetExceeded, ImmediateFailure, IncompatibleQuotients
from orsep.quotients import (
    Budget,
    CCWitness,
    FiniteIndexSubgroup,
    FiniteQuotient,
    enumerate_low_index,
    evaluate,
    find_cc_quotient,
    finite_conjugacy_test,
    product_quotient,
    schreier_generators,
    separate_conjugacy_class,
    separate_torsion_from_subgroup_conjugates,
    separates_torsion,
    trivial_quotient,
    verify_cc,
)
from orsep.words import Word, parse_presentation, parse_word

from conftest import CORPUS, random_word

SMALL = Budget(max_index=6)


def is_transitive(images, n):
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for g in images:
            if g[i] not in seen:
                seen.add(g[i])
                stack.append(g[i])
    return len(seen) == n


def brute_force_count(p, n):
    """Subgroups of index n = transitive homs into S_n divided by (n-1)!."""
    rel = p.relator
    count = 0
    for images in itertools.product(itertools.permutations(range(n)), repeat=p.rank):
        q = FiniteQuotient(n, images)
        if perms.is_identity(q.evaluate(rel)) and is_transitive(images, n):
            count += 1
    return count // math.factorial(n - 1)


@pytest.mark.parametrize("text", ["< a | a^5 >", "< a, b | (a b)^2 >", "< a, b | (a b a B)^2 >"])
def test_counts_match_brute_force(text):
    p = parse_presentation(text)
    found = list(enumerate_low_index(p, 4))
    for n in range(1, 5):
        assert sum(q.degree == n for q in found) == brute_force_count(p, n)


def test_low_index_examples():
    p = parse_presentation("< a | a^5 >")
    found = list(enumerate_low_index(p, 5))
    assert any(q.degree == 5 and perms.cycle_type(q.images[0]) == (5,) for q in found)
    for text in CORPUS:
        assert [q.images for q in enumerate_low_index(parse_presentation(text), 1)] == [
            tuple((0,) for _ in parse_presentation(text).generators)
        ]
    p = parse_presentation("< a, b | (a b)^2 >")
    assert ((1, 0), (1, 0)) in [q.images for q in enumerate_low_index(p, 2)]


def test_enumeration_is_deterministic_and_relator_respecting(g_aba):
    a = [q.images for q in enumerate_low_index(g_aba, 5)]
    b = [q.images for q in enumerate_low_index(g_aba, 5)]
    assert a == b
    assert len(set(a)) == len(a)
    for q in enumerate_low_index(g_aba, 5):
        assert perms.is_identity(evaluate(q, g_aba.relator))


def test_node_limit():
    with pytest.raises(BudgetExceeded):
        list(enumerate_low_index(parse_presentation("< a, b | (a b a B)^2 >"), 8, node_limit=50))


def test_homomorphism_law(rng, g_aba):
    qs = list(enumerate_low_index(g_aba, 5))
    assert evaluate(qs[3], Word()) == perms.identity(qs[3].degree)
    for i in range(1000):
        q = qs[i % len(qs)]
        u, v = random_word(rng, 2, 10), random_word(rng, 2, 10)
        assert q.evaluate(u * v) == perms.mul(q.evaluate(u), q.evaluate(v))


def test_finite_conjugacy_test_examples():
    s3 = [(1, 0, 2), (1, 2, 0)]
    assert finite_conjugacy_test(None, (1, 0, 2), (1, 0, 2), s3) == (0, 1, 2)
    assert finite_conjugacy_test(None, (1, 0, 2), (1, 2, 0), s3) is None
    c = finite_conjugacy_test(None, (1, 0, 2), (2, 1, 0), s3)
    assert c is not None and perms.conj((1, 0, 2), c) == (2, 1, 0)
    # within the 3-cycle subgroup only, a transposition is still conjugate to another one
    a3 = [(1, 2, 0)]
    c = finite_conjugacy_test(None, (1, 0, 2), (2, 1, 0), a3)
    assert c in perms.closure(a3, 3)


def test_schreier_generators(rng, g_aba):
    p = parse_presentation("< a, b | (a b)^2 >")
    q = FiniteQuotient(2, ((1, 0), (1, 0)), p.hash)
    k = FiniteIndexSubgroup.kernel(q)
    gens = schreier_generators(k)
    assert all(k.member_test(s) for s in gens)
    assert k.index == 2
    whole = FiniteIndexSubgroup.whole(q)
    assert sorted(schreier_generators(whole)) == sorted([Word.gen(0), Word.gen(1)])
    t = FiniteIndexSubgroup.kernel(trivial_quotient(p))
    assert sorted(schreier_generators(t)) == sorted([Word.gen(0), Word.gen(1)])
    for q in list(enumerate_low_index(g_aba, 4))[:15]:
        for h in (FiniteIndexSubgroup.kernel(q), FiniteIndexSubgroup.point_stabilizer(q)):
            gens = schreier_generators(h)
            assert all(h.member_test(s) for s in gens)
            assert set(perms.closure([q.evaluate(s) for s in gens], q.degree)) == h.elements


def test_subgroup_json_round_trip(g_aba):
    q = list(enumerate_low_index(g_aba, 3))[-1]
    h = FiniteIndexSubgroup.point_stabilizer(q)
    assert FiniteIndexSubgroup.from_json(h.to_json()) == h
    assert FiniteQuotient.from_json(q.to_json()) == q


def test_separate_examples(g_aba):
    a, b = Word.gen(0), Word.gen(1)
    with pytest.raises(BudgetExceeded):
        separate_conjugacy_class(g_aba, a, a, SMALL)
    q = separate_conjugacy_class(g_aba, a, b, SMALL)
    # fresh re-check with an independent closure
    img = perms.closure(q.images, q.degree)
    qa, qb = q.evaluate(a), q.evaluate(b)
    assert all(perms.conj(qa, c) != qb for c in img)
    # a and b a B have equal images up to conjugacy in every quotient
    with pytest.raises(BudgetExceeded):
        separate_conjugacy_class(g_aba, a, b * a * ~b, Budget(max_index=4))


def test_product_quotient_kernel_is_intersection(rng, g_aba):
    qs = list(enumerate_low_index(g_aba, 3))
    q = product_quotient(qs[1], qs[-1])
    for _ in range(200):
        w = random_word(rng, 2, 10)
        trivial = perms.is_identity(q.evaluate(w))
        assert trivial == (perms.is_identity(qs[1].evaluate(w)) and perms.is_identity(qs[-1].evaluate(w)))


def test_separate_torsion(g_aba):
    W = g_aba.root
    a = Word.gen(0)
    with pytest.raises(ImmediateFailure):
        separate_torsion_from_subgroup_conjugates(g_aba, Word(), [a], SMALL)
    with pytest.raises(ImmediateFailure):
        separate_torsion_from_subgroup_conjugates(g_aba, W, [a, Word.gen(1)], SMALL)
    q = separate_torsion_from_subgroup_conjugates(g_aba, W, [a], Budget(max_index=8))
    assert separates_torsion(q, W, [a], 10**6)
    fset = set(perms.closure([q.evaluate(a)], q.degree))
    img = perms.closure(q.images, q.degree)
    assert not any(perms.conj(q.evaluate(W), c) in fset for c in img)


def s3_setup():
    p = parse_presentation("< a, b | (a b)^2 >")
    # S3 with a a transposition and b a 3-cycle, so ab is a transposition
    q = FiniteQuotient(3, ((1, 0, 2), (1, 2, 0)), p.hash)
    assert q.satisfies([p.relator])
    return p, q


def test_verify_cc_examples():
    p, q = s3_setup()
    whole = FiniteIndexSubgroup.whole(q)
    assert verify_cc(CCWitness(p, Word(), (), whole, q))
    ker = FiniteIndexSubgroup.kernel(q)
    assert verify_cc(CCWitness(p, Word(), (), ker, q))
    # abelian image, Q0 everything
    ab = FiniteQuotient(2, ((1, 0), (1, 0)), p.hash)
    x = parse_word("a", "ab")
    assert verify_cc(CCWitness(p, x, (x,), FiniteIndexSubgroup.whole(ab), ab))


def test_verify_cc_inconclusive_case():
    # x = ab has order 2 in G, its image is a transposition whose S3-centralizer
    # has order 2; with P = kernel and the product with a Z/2 action, the image
    # centralizer is larger than <x> P
    p, q = s3_setup()
    z2 = FiniteQuotient(2, ((1, 0), (1, 0)), p.hash)
    n = product_quotient(q, z2)
    x = parse_word("ab", "ab")
    ker = FiniteIndexSubgroup.kernel(n)
    img = n.image_elements()
    px = n.evaluate(x)
    cent = [g for g in img if perms.mul(g, px) == perms.mul(px, g)]
    assert len(cent) > len(perms.closure([px], n.degree))
    assert verify_cc(CCWitness(p, x, (x,), ker, n)) is False


def test_verify_cc_incompatible():
    p, q = s3_setup()
    triv = trivial_quotient(p)
    with pytest.raises(IncompatibleQuotients):
        verify_cc(CCWitness(p, parse_word("a", "ab"), (), FiniteIndexSubgroup.kernel(q), triv))


def test_find_cc_quotient(g_aba):
    W = g_aba.root
    P0 = FiniteIndexSubgroup.whole(trivial_quotient(g_aba))
    n = find_cc_quotient(g_aba, Word(), (), P0, SMALL)
    assert n == P0.quotient
    n = find_cc_quotient(g_aba, W, (W,), P0, SMALL)
    assert n == P0.quotient
    z2 = FiniteQuotient(2, ((1, 0), (0, 1)), g_aba.hash)
    P = FiniteIndexSubgroup.kernel(z2)
    n = find_cc_quotient(g_aba, W, (W,), P, Budget(max_index=8))
    assert verify_cc(CCWitness(g_aba, W, (W,), P, n))
    # independent brute-force recomputation of both sides
    img = perms.closure(n.images, n.degree)
    pw = n.evaluate(W)
    cent = {g for g in img if perms.mul(g, pw) == perms.mul(pw, g)}
    # elements of n's image mapping into P under the shared generators
    pairs = {perms.identity(n.degree): perms.identity(2)}
    stack = [perms.identity(n.degree)]
    while stack:
        g = stack.pop()
        for sn, sp in zip(n.images, z2.images):
            g2 = perms.mul(g, sn)
            if g2 not in pairs:
                pairs[g2] = perms.mul(pairs[g], sp)
                stack.append(g2)
    p_img = {g for g, h in pairs.items() if perms.is_identity(h)}
    w_img = set(perms.closure([pw], n.degree))
    covered = {perms.mul(a, b) for a in w_img for b in p_img}
    assert cent <= covered
