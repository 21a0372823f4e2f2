import json
import random

import pytest

from orsep.conjugacy import (
    Certificate,
    abelianization_check,
    certify_cc,
    certify_separation,
    decide_conjugacy,
    decide_conjugacy_in_subgroup,
    enumerate_conjugators,
    torsion_power,
    verify_certificate,
)
from orsep.dehn import are_equal
from orsep.cache import QuotientCache
from orsep.errors import BudgetExceeded, NotInSubgroup
from orsep.quotients import Budget, FiniteIndexSubgroup, FiniteQuotient, trivial_quotient
from orsep.words import Word, parse_presentation

from conftest import random_word, tamper

SMALL = Budget(max_index=6, max_conjugator_len=4)


def w(p, s):
    return p.parse_word(s)


def test_abelianization_examples(g_aba):
    assert abelianization_check(g_aba, w(g_aba, "a"), w(g_aba, "b")) == "NonConjugate"
    assert abelianization_check(g_aba, w(g_aba, "a"), w(g_aba, "A")) == "NonConjugate"
    assert abelianization_check(g_aba, w(g_aba, "a"), w(g_aba, "b a B")) == "Indeterminate"
    assert abelianization_check(g_aba, w(g_aba, "a"), w(g_aba, "a^5")) == "Indeterminate"


def test_enumerate_conjugators_examples(g_aba):
    a = w(g_aba, "a")
    assert enumerate_conjugators(g_aba, a, a, 3) == Word()
    y = w(g_aba, "a b a B A")
    u = enumerate_conjugators(g_aba, a, y, 3)
    assert u is not None and len(u) <= 2 and are_equal(u * a * ~u, y, g_aba)
    assert enumerate_conjugators(g_aba, a, w(g_aba, "b"), 4) is None


def test_torsion_power(g_aba):
    W = g_aba.root
    v = w(g_aba, "b a")
    i, c = torsion_power(g_aba, v * W * ~v)
    assert i == 1 and are_equal(c * W * ~c, v * W * ~v, g_aba)
    assert torsion_power(g_aba, w(g_aba, "a")) is None
    assert torsion_power(g_aba, W ** 2)[0] == 0


def test_decide_examples(g_aba):
    a, b = w(g_aba, "a"), w(g_aba, "b")
    u = w(g_aba, "a b")
    c = decide_conjugacy(g_aba, a, u * a * ~u)
    assert c.kind == "Conjugacy" and len(w(g_aba, c.witness["conjugator"])) <= 2
    c = decide_conjugacy(g_aba, a, b)
    assert c.kind == "NonConjugacy" and verify_certificate(c)
    c = decide_conjugacy(g_aba, a, a * g_aba.relator)
    assert c.kind == "Conjugacy" and c.witness["conjugator"] == "1"
    assert verify_certificate(c)


def test_hnn_fast_path():
    p = parse_presentation("< a, b | (a b A B)^3 >")
    W = p.root
    c = decide_conjugacy(p, W, W ** 2)
    assert c.kind == "HnnNonConjugacy"
    assert verify_certificate(c)
    assert all(c.checks[k] for k in ("x_avoids_associated", "y_outside_base_class"))


def test_budget_exceeded_is_not_a_verdict(g_aba):
    # a and a^5 agree in the abelianization; a tiny budget cannot separate them
    with pytest.raises(BudgetExceeded):
        decide_conjugacy(g_aba, w(g_aba, "a"), w(g_aba, "a^5"), Budget(max_index=1, max_conjugator_len=1))


def test_never_contradiction():
    rng = random.Random(11)
    for text in ["< a, b | (a b a B)^2 >", "< a, b | (a b A B)^3 >"]:
        p = parse_presentation(text)
        for _ in range(200):
            x = random_word(rng, 2, 4)
            y = random_word(rng, 2, 4)
            u = enumerate_conjugators(p, x, y, 2)
            try:
                c = decide_conjugacy(p, x, y, Budget(max_index=4, max_conjugator_len=2))
            except BudgetExceeded:
                continue
            assert verify_certificate(c)
            if u is not None:
                assert c.kind == "Conjugacy"
            if c.kind != "Conjugacy":
                assert u is None


def test_determinism(g_aba):
    a, b = w(g_aba, "a"), w(g_aba, "b")
    one = decide_conjugacy(g_aba, a, b).dumps()
    two = decide_conjugacy(g_aba, a, b).dumps()
    assert one == two
    p = parse_presentation("< a, b | (a b A B)^3 >")
    assert decide_conjugacy(p, p.root, p.root ** 2).dumps() == decide_conjugacy(p, p.root, p.root ** 2).dumps()


def index_two(p):
    q = FiniteQuotient(2, ((1, 0), (0, 1)), p.hash)
    return FiniteIndexSubgroup.kernel(q)


def test_subgroup_examples(g_aba):
    h1 = index_two(g_aba)
    b = w(g_aba, "b")
    c = decide_conjugacy_in_subgroup(g_aba, h1, b, b)
    assert c.kind == "Conjugacy" and c.witness["conjugator"] == "1"
    with pytest.raises(NotInSubgroup):
        decide_conjugacy_in_subgroup(g_aba, h1, w(g_aba, "a"), b)
    c = decide_conjugacy_in_subgroup(g_aba, h1, b, w(g_aba, "a a b A A"), SMALL)
    assert verify_certificate(c)
    if c.kind == "Conjugacy":
        assert h1.member_test(w(g_aba, c.witness["conjugator"]))


def test_subgroup_whole_group_matches_plain(g_aba):
    whole = FiniteIndexSubgroup.whole(trivial_quotient(g_aba))
    a, b = w(g_aba, "a"), w(g_aba, "b")
    assert decide_conjugacy_in_subgroup(g_aba, whole, a, b).kind == "NonConjugacy"
    assert decide_conjugacy_in_subgroup(g_aba, whole, a, w(g_aba, "b a B")).kind == "Conjugacy"


def test_conjugate_only_outside_subgroup(g_aba):
    # b and a b A are conjugate by a, which lies outside the kernel of a -> (0 1)
    h1 = index_two(g_aba)
    b, y = w(g_aba, "b"), w(g_aba, "a b A")
    assert h1.member_test(y) and not h1.member_test(w(g_aba, "a"))
    try:
        c = decide_conjugacy_in_subgroup(g_aba, h1, b, y, SMALL)
    except BudgetExceeded:
        return
    assert verify_certificate(c)
    if c.kind == "Conjugacy":
        assert h1.member_test(w(g_aba, c.witness["conjugator"]))


def test_certify_separation_and_cc(g_aba):
    W = g_aba.root
    c = certify_separation(g_aba, W, [w(g_aba, "a")], Budget(max_index=8))
    assert c.kind == "Separation" and verify_certificate(c)
    P = index_two(g_aba)
    c = certify_cc(g_aba, W, [W], P, Budget(max_index=8))
    assert c.kind == "CCInstance" and verify_certificate(c)


def test_json_round_trip_and_field_order(g_aba):
    c = decide_conjugacy(g_aba, w(g_aba, "a"), w(g_aba, "b"))
    data = json.loads(c.dumps())
    assert list(data) == ["kind", "presentation", "x", "y", "witness", "checks", "tool_version"]
    assert verify_certificate(data)
    assert verify_certificate(c.dumps())
    assert Certificate.from_json(data).to_json() == data


def test_tampered_certificates_rejected(g_aba):
    certs = [
        decide_conjugacy(g_aba, w(g_aba, "a"), w(g_aba, "b")),
        decide_conjugacy(g_aba, w(g_aba, "b"), w(g_aba, "a b A")),
    ]
    rng = random.Random(3)
    for _ in range(50):
        data = certs[rng.randrange(2)].to_json()
        assert not verify_certificate(tamper(data, rng))


def test_specific_tampers(g_aba):
    c = decide_conjugacy(g_aba, w(g_aba, "a"), w(g_aba, "b")).to_json()
    img = c["witness"]["quotient"]["images"][0]
    i = next(k for k in range(len(img) - 1) if img[k] != img[k + 1])
    img[i], img[i + 1] = img[i + 1], img[i]
    assert not verify_certificate(c)
    rng = random.Random(5)
    c0 = decide_conjugacy(g_aba, w(g_aba, "b"), w(g_aba, "a b A")).to_json()
    rejected = 0
    for _ in range(100):
        c = json.loads(json.dumps(c0))
        c["witness"]["conjugator"] = g_aba.format_word(random_word(rng, 2, 6))
        rejected += not verify_certificate(c)
    assert rejected >= 90
    assert not verify_certificate({"kind": "Conjugacy"})
    assert not verify_certificate("not json")


def test_cache_is_reused(tmp_path, g_aba):
    cache = QuotientCache(tmp_path / "c")
    a, b = w(g_aba, "a"), w(g_aba, "b a B")
    first = list(cache.stream(g_aba, 4, 10**6))
    assert cache.complete_through(g_aba.hash) == 4
    second = list(cache.stream(g_aba, 4, 10**6))
    assert first == second
    with pytest.raises(BudgetExceeded):
        decide_conjugacy(g_aba, a, w(g_aba, "a^5"), Budget(max_index=2, max_conjugator_len=1), cache)
    c = decide_conjugacy(g_aba, a, b, Budget(max_index=4), cache)
    assert c.kind == "Conjugacy"


def test_unwritable_cache_is_disabled(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cache = QuotientCache(blocker / "sub")
    assert not cache.enabled
    p = parse_presentation("< a | a^5 >")
    assert len(list(cache.stream(p, 3, 1000))) >= 1


def reseal(data):
    """Recompute the digest so only the semantic checks can catch a tamper."""
    from orsep.conjugacy import _digest

    data["checks"]["digest"] = _digest(Certificate.from_json(data))
    return data


def test_semantic_checks_catch_resealed_tampers(g_aba):
    c = decide_conjugacy(g_aba, w(g_aba, "a"), w(g_aba, "b")).to_json()
    img = c["witness"]["quotient"]["images"][1]
    img[0], img[1] = img[1], img[0]
    assert not verify_certificate(reseal(c))
    rng = random.Random(5)
    c0 = decide_conjugacy(g_aba, w(g_aba, "b"), w(g_aba, "a b A")).to_json()
    rejected = 0
    for _ in range(100):
        c = json.loads(json.dumps(c0))
        c["witness"]["conjugator"] = g_aba.format_word(random_word(rng, 2, 6))
        rejected += not verify_certificate(reseal(c))
    assert rejected >= 90
    p = parse_presentation("< a, b | (a b A B)^3 >")
    c = decide_conjugacy(p, p.root, p.root ** 2).to_json()
    c["witness"]["y_power"] = c["witness"]["x_power"]
    assert not verify_certificate(reseal(c))
