import random

import pytest

from orsep.words import Word, parse_presentation

# relators with RC > 0 used across the suite
CORPUS = [
    "< a, b | (a b a B)^2 >",
    "< a, b | (a b A B)^3 >",
    "< a, b | (a a b b)^2 >",
    "< a, b, c | (a b b A c^-3)^2 >",
    "< a, b | (a b A B)^2 >",
    "< a, b | (a a b)^3 >",
    "< a, b | (a b b b)^2 >",
    "< a, b | (a b a b B)^2 >",
    "< a, b, c | (a b c A B C)^2 >",
    "< a, b | (a a B a b)^4 >",
    "< a, b, c | (a b a c)^3 >",
    "< a, b | (a b a a B)^2 >",
]


def random_word(rng: random.Random, rank: int, max_len: int) -> Word:
    n = rng.randint(0, max_len)
    letters = []
    while len(letters) < n:
        x = rng.randint(1, rank) * rng.choice((1, -1))
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return Word(letters)


def random_trivial_word(rng: random.Random, p, max_conjugator: int = 4) -> Word:
    """A product of conjugates of relator rotations, scrambled by free insertions."""
    w = Word()
    rel = p.relator
    for _ in range(rng.randint(1, 2)):
        u = random_word(rng, p.rank, max_conjugator)
        r = rel.rotate(rng.randrange(len(rel)))
        if rng.random() < 0.5:
            r = ~r
        w = w * u * r * ~u
    return w


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def g_aba():
    return parse_presentation("< a, b | (a b a B)^2 >")


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("ORSEP_CACHE_DIR", str(tmp_path / "cache"))


def random_finite_hnn(rng: random.Random, max_order: int = 24, max_work: int = 4000):
    """A random HNN extension of a permutation group of order <= max_order.

    Instances are rejected until |A| * (2 * [A:M1])^2 <= max_work, which keeps
    the bounded conjugator search below cheap.
    """
    from orsep import perms
    from orsep.errors import AlphaInconsistent
    from orsep.hnn import FiniteBaseHnn

    while True:
        n = rng.randint(2, 5)
        gens = [tuple(rng.sample(range(n), n)) for _ in range(rng.randint(1, 2))]
        try:
            base = perms.closure(gens, n, max_order)
        except Exception:
            continue
        if len(base) < 3:
            continue
        m1_gens = [rng.choice(base)]
        m2_gens = [rng.choice(base)]
        if rng.random() < 0.25:
            c = rng.choice(base)
            m2_gens = [perms.conj(m1_gens[0], c)]
        try:
            h = FiniteBaseHnn.from_generators(gens, m1_gens, m2_gens, n)
        except (AlphaInconsistent, ValueError):
            continue
        index = len(base) // len(h.m1)
        if len(base) * (2 * index) ** 2 <= max_work:
            return h


def normal_forms_up_to(h, t_len: int) -> list:
    """Every element of t-length <= t_len, once, as a normal-form HnnWord."""
    from orsep.hnn import HnnWord

    identity = h.identity
    reps = {s: sorted({h.split(s, g)[1] for g in h.elements}) for s in (1, -1)}
    out = [HnnWord((b,)) for b in sorted(h.elements)]
    frontier = out
    for _ in range(t_len):
        nxt = []
        for w in frontier:
            for s in (1, -1):
                for r in reps[s]:
                    if w.signs and w.signs[-1] == -s and w.bases[-1] == identity:
                        continue
                    nxt.append(HnnWord(w.bases + (r,), w.signs + (s,)))
        out = out + nxt
        frontier = nxt
    return out


def _leaves(obj, path=()):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _leaves(v, path + (k,))
    elif isinstance(obj, list) and obj and not all(isinstance(v, int) and not isinstance(v, bool) for v in obj):
        for i, v in enumerate(obj):
            yield from _leaves(v, path + (i,))
    else:
        yield path, obj


def tamper(data: dict, rng: random.Random) -> dict:
    """Copy of a certificate's JSON with exactly one leaf changed."""
    import copy

    out = copy.deepcopy(data)
    leaves = [(p, v) for p, v in _leaves(out) if p and p[0] != "tool_version" or rng.random() < 0.05]
    path, value = rng.choice(leaves)
    if isinstance(value, bool):
        new = not value
    elif isinstance(value, int):
        new = value + rng.choice((1, -1, 2))
    elif isinstance(value, list) and len(value) >= 2:
        i, j = rng.sample(range(len(value)), 2)
        new = list(value)
        new[i], new[j] = new[j], new[i]
    elif isinstance(value, list):
        new = value + [len(value)]
    elif isinstance(value, str):
        new = value + " a" if value not in ("1", "") else "a"
    elif value is None:
        new = "a"
    else:
        new = [value]
    target = out
    for k in path[:-1]:
        target = target[k]
    target[path[-1]] = new
    return out
