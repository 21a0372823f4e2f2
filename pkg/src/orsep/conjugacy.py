"""Conjugacy deciders and self-contained certificates.

The decider runs two semi-decisions side by side: a search for a conjugator
verified with Dehn's algorithm, and a search for a finite quotient in which
the images are not conjugate.  Conjugacy separability of one-relator groups
with torsion guarantees that one of the two eventually answers.

Every answer is a ``Certificate``.  Its ``checks`` record values that the
verifier recomputes from the witness; verification never searches.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional, Sequence

from . import __version__, perms
from .dehn import are_equal, cyclic_dehn_reduce, is_trivial, piece_index, reduce_in
from .errors import (
    BudgetExceeded,
    NotInSubgroup,
    RCZero,
    SearchExhausted,
    SubgroupTooLarge,
)
from .hierarchy import HnnData, hierarchy_step, verify_magnus_condition
from .hnn import (
    Verdict,
    build_quotient_hnn,
    find_stable_image,
    hnn_nonconjugacy_criterion,
    quotient_hnn_checks,
)
from .quotients import (
    Budget,
    CCWitness,
    FiniteIndexSubgroup,
    FiniteQuotient,
    _quotient_stream,
    enumerate_low_index,
    find_cc_quotient,
    finite_conjugacy_test,
    product_quotient,
    schreier_generators,
    separate_conjugacy_class,
    separate_torsion_from_subgroup_conjugates,
    separates_torsion,
    verify_cc,
)
from .words import Presentation, Word, exponent_sums

log = logging.getLogger(__name__)

TOOL_VERSION = __version__

KINDS = ("Conjugacy", "NonConjugacy", "HnnNonConjugacy", "Separation", "CCInstance")

__all__ = [
    "Certificate",
    "TOOL_VERSION",
    "abelianization_check",
    "enumerate_conjugators",
    "decide_conjugacy",
    "decide_conjugacy_in_subgroup",
    "verify_certificate",
    "certify_separation",
    "certify_cc",
    "torsion_power",
]


@dataclass
class Certificate:
    kind: str
    presentation: Presentation
    x: Word
    y: Optional[Word]
    witness: dict
    checks: dict = field(default_factory=dict)
    tool_version: str = TOOL_VERSION

    def to_json(self) -> dict:
        p = self.presentation
        return {
            "kind": self.kind,
            "presentation": p.to_json(),
            "x": p.format_word(self.x),
            "y": None if self.y is None else p.format_word(self.y),
            "witness": self.witness,
            "checks": self.checks,
            "tool_version": self.tool_version,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data) -> "Certificate":
        if isinstance(data, str):
            data = json.loads(data)
        if list(data) != ["kind", "presentation", "x", "y", "witness", "checks", "tool_version"]:
            raise ValueError("certificate fields missing or out of order")
        p = Presentation.from_json(data["presentation"])
        y = None if data["y"] is None else p.parse_word(data["y"])
        return cls(
            data["kind"],
            p,
            p.parse_word(data["x"]),
            y,
            data["witness"],
            data["checks"],
            data["tool_version"],
        )

    @property
    def verdict(self) -> str:
        return {
            "Conjugacy": "conjugate",
            "NonConjugacy": "not conjugate",
            "HnnNonConjugacy": "not conjugate",
            "Separation": "separated",
            "CCInstance": "centralizer condition holds",
        }[self.kind]


# --------------------------------------------------------------------------
# abelianization
# --------------------------------------------------------------------------


def _abelian_difference(p: Presentation, x: Sequence[int], y: Sequence[int]) -> tuple:
    r = p.rank
    v = [p.exponent * s for s in exponent_sums(p.root, r)]
    d = [a - b for a, b in zip(exponent_sums(x, r), exponent_sums(y, r))]
    return v, d


def abelianization_check(p: Presentation, x: Sequence[int], y: Sequence[int]) -> str:
    """``"NonConjugate"`` when the abelianized images differ, else ``"Indeterminate"``."""
    v, d = _abelian_difference(p, x, y)
    if not any(d):
        return "Indeterminate"
    if not any(v):
        return "NonConjugate"
    # d must be an integer multiple of v
    k = None
    for vi, di in zip(v, d):
        if vi == 0:
            if di != 0:
                return "NonConjugate"
            continue
        if di % vi:
            return "NonConjugate"
        if k is None:
            k = di // vi
        elif k != di // vi:
            return "NonConjugate"
    return "Indeterminate"


def _cyclic_quotient(p: Presentation, x, y, max_index: int) -> Optional[FiniteQuotient]:
    """A regular cyclic action separating the abelianized images of ``x`` and ``y``."""
    v, d = _abelian_difference(p, x, y)
    r = p.rank
    for m in range(2, max_index + 1):
        for c in product(range(m), repeat=r):
            if sum(ci * vi for ci, vi in zip(c, v)) % m == 0 and sum(ci * di for ci, di in zip(c, d)) % m:
                images = tuple(tuple((i + ci) % m for i in range(m)) for ci in c)
                return FiniteQuotient(m, images, p.hash)
    return None


# --------------------------------------------------------------------------
# conjugator enumeration
# --------------------------------------------------------------------------


def _letters(rank: int) -> list:
    out = []
    for j in range(rank):
        out.extend((j + 1, -(j + 1)))
    return out


def _words_of_length(rank: int, n: int) -> Iterator[Word]:
    letters = _letters(rank)
    if n == 0:
        yield Word()
        return

    def rec(prefix):
        if len(prefix) == n:
            yield Word._trusted(prefix)
            return
        for a in letters:
            if prefix and a == -prefix[-1]:
                continue
            prefix.append(a)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


def enumerate_conjugators(
    p: Presentation,
    x: Sequence[int],
    y: Sequence[int],
    max_len: int,
    min_len: int = 0,
    member=None,
) -> Optional[Word]:
    """First ``u`` in length-lex order with ``u x u^-1 = y``.

    Letters are ordered ``a < A < b < B < ...``.  ``member`` filters
    candidates, e.g. to a finite-index subgroup.
    """
    x = reduce_in(p, x)
    y_inv = ~reduce_in(p, y)
    for n in range(min_len, max_len + 1):
        for u in _words_of_length(p.rank, n):
            if member is not None and not member(u):
                continue
            if not reduce_in(p, u * x * ~u * y_inv):
                return u
    return None


def _cyclic_conjugator(p: Presentation, x: Word, y: Word) -> Optional[Word]:
    """Conjugator read off from Dehn-reduced cyclic forms, when they are rotations."""
    idx = piece_index(p)
    cx, ux = cyclic_dehn_reduce(x, idx)
    cy, uy = cyclic_dehn_reduce(y, idx)
    if len(cx) != len(cy):
        return None
    for j in range(max(1, len(cx))):
        if cx.rotate(j) == cy:
            s = cx.slice(0, j)
            u = uy * ~s * ~ux
            if are_equal(u * x * ~u, y, p):
                return u
    return None


# --------------------------------------------------------------------------
# torsion normalization and the HNN fast path
# --------------------------------------------------------------------------


def torsion_power(p: Presentation, w: Sequence[int]) -> Optional[tuple]:
    """``(i, v)`` with ``w = v W^i v^-1`` and ``0 <= i < n``, when Dehn reduction
    exhibits ``w`` syntactically as a conjugate of a power of the root."""
    c, u = cyclic_dehn_reduce(w, piece_index(p))
    if not c:
        return 0, Word()
    L = len(p.root)
    if len(c) % L:
        return None
    k = len(c) // L
    for sign in (1, -1):
        R = p.root ** (sign * k)
        for j in range(len(R)):
            if R.rotate(j) == c:
                v = u * ~R.slice(0, j)
                i = (sign * k) % p.exponent
                if are_equal(v * p.root ** i * ~v, w, p):
                    return i, v
    return None


def _base_quotient_candidates(hd, budget: Budget) -> Iterator[FiniteQuotient]:
    """Small quotients of the base: transitive ones, then disjoint unions of pairs."""
    small = []
    try:
        for i, xi in enumerate(enumerate_low_index(hd.base, min(budget.max_index, 5), node_limit=200_000)):
            if i >= 3000:
                break
            if xi.degree > 1:
                yield xi
                if xi.degree <= 3:
                    small.append(xi)
    except BudgetExceeded:
        pass
    for i, q1 in enumerate(small):
        for q2 in small[i:]:
            yield product_quotient(q1, q2)


def _hnn_certificate(p, x, y, tx, ty, budget: Budget) -> Optional["Certificate"]:
    if p.free_factors:
        return None
    try:
        hd = hierarchy_step(p)
    except (RCZero, SearchExhausted):
        return None
    i, vx = tx
    j, vy = ty
    wbar = hd.base.root
    h_hash = hd.hnn_presentation().hash
    for xi in _base_quotient_candidates(hd, budget):
        gx = xi.evaluate(wbar ** i)
        gy = xi.evaluate(wbar ** j)
        if perms.is_identity(gx) or gx == gy:
            continue
        pi = find_stable_image(hd, xi)
        if pi is None:
            continue
        theta = FiniteQuotient(xi.degree, xi.images + (pi,), h_hash)
        fb, _ = build_quotient_hnn(hd, theta)
        if hnn_nonconjugacy_criterion(fb, gx, gy).verdict is Verdict.NON_CONJUGATE:
            witness = {
                "hnn": hd.to_json(),
                "theta": theta.to_json(),
                "x_power": i,
                "y_power": j,
                "x_conjugator": p.format_word(vx),
                "y_conjugator": p.format_word(vy),
            }
            return _finish(Certificate("HnnNonConjugacy", p, x, y, witness))
    return None


def _hnn_checks(cert: Certificate) -> dict:
    p = cert.presentation
    w = cert.witness
    hd = HnnData.from_json(w["hnn"])
    if hd.source.to_json() != p.to_json():
        raise ValueError("HNN data belongs to another presentation")
    i, j = int(w["x_power"]), int(w["y_power"])
    vx = p.parse_word(w["x_conjugator"])
    vy = p.parse_word(w["y_conjugator"])
    theta = FiniteQuotient.from_json(w["theta"])
    fb, _ = build_quotient_hnn(hd, theta)
    nb = len(hd.base.all_generators)
    xi = FiniteQuotient(theta.degree, theta.images[:nb])
    gx = xi.evaluate(hd.base.root ** i)
    gy = xi.evaluate(hd.base.root ** j)
    cls = fb.conjugacy_class(gx)
    qc = quotient_hnn_checks(hd, theta)
    return {
        "presentation_hash": p.hash,
        "x_is_root_power": are_equal(vx * p.root ** i * ~vx, cert.x, p),
        "y_is_root_power": are_equal(vy * p.root ** j * ~vy, cert.y, p),
        "magnus_condition": verify_magnus_condition(hd),
        "embedding": hd.embed(hd.base.root) == hd.twisted_root and hd.untwist(hd.twisted_root) == p.root,
        "base_relator": qc["base_relator"],
        "stable_relations": qc["stable_relations"],
        "base_order": len(fb.elements),
        "x_image": perms.format_cycles(gx),
        "y_image": perms.format_cycles(gy),
        "y_outside_base_class": gy not in cls,
        "x_avoids_associated": not any(z in fb.m1 or z in fb.m2 for z in cls),
    }


# --------------------------------------------------------------------------
# quotient-based certificates
# --------------------------------------------------------------------------


def _nonconj_checks(cert: Certificate) -> dict:
    p = cert.presentation
    q = FiniteQuotient.from_json(cert.witness["quotient"])
    if q.presentation_hash != p.hash:
        raise ValueError("quotient belongs to another presentation")
    gx, gy = q.evaluate(cert.x), q.evaluate(cert.y)
    out = {
        "presentation_hash": p.hash,
        "relator_trivial": q.satisfies(p.relators),
        "image_order": len(q.image_elements()),
        "x_image": perms.format_cycles(gx),
        "y_image": perms.format_cycles(gy),
    }
    sub = cert.witness.get("subgroup")
    if sub is None:
        out["non_conjugate"] = finite_conjugacy_test(q, gx, gy) is None
        return out
    h1 = FiniteIndexSubgroup.from_json(sub)
    if h1.quotient.presentation_hash != p.hash:
        raise ValueError("subgroup belongs to another presentation")
    within = [q.evaluate(s) for s in schreier_generators(h1)] or [perms.identity(q.degree)]
    out["x_in_subgroup"] = h1.member_test(cert.x)
    out["y_in_subgroup"] = h1.member_test(cert.y)
    out["subgroup_index"] = h1.index
    out["subgroup_image_order"] = len(perms.closure(within, q.degree))
    out["non_conjugate"] = finite_conjugacy_test(q, gx, gy, within) is None
    return out


def _conj_checks(cert: Certificate) -> dict:
    p = cert.presentation
    u = p.parse_word(cert.witness["conjugator"])
    residue = reduce_in(p, u * cert.x * ~u * ~cert.y)
    out = {"presentation_hash": p.hash, "residue": p.format_word(residue)}
    sub = cert.witness.get("subgroup")
    if sub is not None:
        h1 = FiniteIndexSubgroup.from_json(sub)
        if h1.quotient.presentation_hash != p.hash:
            raise ValueError("subgroup belongs to another presentation")
        out["conjugator_in_subgroup"] = h1.member_test(u)
        out["x_in_subgroup"] = h1.member_test(cert.x)
        out["y_in_subgroup"] = h1.member_test(cert.y)
    return out


def _separation_checks(cert: Certificate) -> dict:
    p = cert.presentation
    q = FiniteQuotient.from_json(cert.witness["quotient"])
    if q.presentation_hash != p.hash:
        raise ValueError("quotient belongs to another presentation")
    f_gens = [p.parse_word(f) for f in cert.witness["f_gens"]]
    fimg = perms.closure([q.evaluate(f) for f in f_gens], q.degree)
    return {
        "presentation_hash": p.hash,
        "relator_trivial": q.satisfies(p.relators),
        "g_image": perms.format_cycles(q.evaluate(cert.x)),
        "f_image_order": len(fimg),
        "separated": separates_torsion(q, cert.x, f_gens, perms.DEFAULT_ORDER_BOUND),
    }


def _cc_checks(cert: Certificate) -> dict:
    p = cert.presentation
    w = cert.witness
    n = FiniteQuotient.from_json(w["n"])
    P = FiniteIndexSubgroup.from_json(w["p"])
    if n.presentation_hash != p.hash or P.quotient.presentation_hash != p.hash:
        raise ValueError("quotients belong to another presentation")
    cgens = tuple(p.parse_word(c) for c in w["centralizer_gens"])
    x = cert.x
    return {
        "presentation_hash": p.hash,
        "relator_trivial": n.satisfies(p.relators) and P.quotient.satisfies(p.relators),
        "commuting": all(is_trivial(c * x * ~c * ~x, p) for c in cgens),
        "p_normal": P.is_normal(),
        "p_index": P.index,
        "n_image_order": len(n.image_elements()),
        "check_passed": verify_cc(CCWitness(p, x, cgens, P, n)),
    }


_CHECKERS = {
    "Conjugacy": _conj_checks,
    "NonConjugacy": _nonconj_checks,
    "HnnNonConjugacy": _hnn_checks,
    "Separation": _separation_checks,
    "CCInstance": _cc_checks,
}

_REQUIRED_TRUE = {
    "Conjugacy": ("conjugator_in_subgroup", "x_in_subgroup", "y_in_subgroup"),
    "NonConjugacy": ("relator_trivial", "non_conjugate", "x_in_subgroup", "y_in_subgroup"),
    "HnnNonConjugacy": (
        "x_is_root_power",
        "y_is_root_power",
        "magnus_condition",
        "embedding",
        "base_relator",
        "stable_relations",
        "y_outside_base_class",
        "x_avoids_associated",
    ),
    "Separation": ("relator_trivial", "separated"),
    "CCInstance": ("relator_trivial", "commuting", "p_normal", "check_passed"),
}


def _digest(cert: Certificate) -> str:
    """Binds the recorded checks to the exact claim and witness."""
    data = cert.to_json()
    body = {k: data[k] for k in ("kind", "presentation", "x", "y", "witness")}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def _compute_checks(cert: Certificate) -> dict:
    checks = _CHECKERS[cert.kind](cert)
    checks["digest"] = _digest(cert)
    return checks


def _finish(cert: Certificate) -> Certificate:
    cert.checks = _compute_checks(cert)
    if not _sound(cert.kind, cert.checks):
        raise AssertionError(f"refusing to emit an unverifiable {cert.kind} certificate")
    return cert


def _sound(kind: str, checks: dict) -> bool:
    if kind == "Conjugacy" and checks.get("residue") != "1":
        return False
    return all(checks[k] is True for k in _REQUIRED_TRUE[kind] if k in checks)


def verify_certificate(cert) -> bool:
    """Recompute every recorded check from the witness; False on any mismatch."""
    try:
        if not isinstance(cert, Certificate):
            cert = Certificate.from_json(cert)
        if cert.tool_version != TOOL_VERSION or cert.kind not in KINDS:
            return False
        if cert.kind != "Separation" and cert.kind != "CCInstance" and cert.y is None:
            return False
        fresh = _compute_checks(cert)
        return fresh == cert.checks and _sound(cert.kind, fresh)
    except Exception as exc:  # malformed input of any shape is a rejection
        log.debug("certificate rejected: %s", exc)
        return False


# --------------------------------------------------------------------------
# deciders
# --------------------------------------------------------------------------


def _conjugacy_cert(p, x, y, u, subgroup=None) -> Certificate:
    witness = {"conjugator": p.format_word(u)}
    if subgroup is not None:
        witness["subgroup"] = subgroup.to_json()
    return _finish(Certificate("Conjugacy", p, x, y, witness))


def _nonconj_cert(p, x, y, q, subgroup=None) -> Certificate:
    witness = {"quotient": q.to_json()}
    if subgroup is not None:
        witness["subgroup"] = subgroup.to_json()
    return _finish(Certificate("NonConjugacy", p, x, y, witness))


def _schedule(budget: Budget) -> Iterator[tuple]:
    """Rounds of (conjugator lengths, quotient degrees), each side growing."""
    prev_len, prev_idx = -1, 0
    length, index = 2, 2
    while prev_len < budget.max_conjugator_len or prev_idx < budget.max_index:
        L = min(length, budget.max_conjugator_len)
        I = min(index, budget.max_index)
        yield range(prev_len + 1, L + 1), range(prev_idx + 1, I + 1)
        prev_len, prev_idx = L, I
        length += 2
        index *= 2


def decide_conjugacy(
    p: Presentation,
    x: Sequence[int],
    y: Sequence[int],
    budget: Budget = Budget(),
    cache=None,
) -> Certificate:
    """Certificate that ``x`` and ``y`` are, or are not, conjugate in ``p``.

    Raises BudgetExceeded when neither search answers within ``budget``.
    """
    x, y = Word(x), Word(y)
    if are_equal(x, y, p):
        return _conjugacy_cert(p, x, y, Word())
    u = _cyclic_conjugator(p, x, y)
    if u is not None:
        short = enumerate_conjugators(p, x, y, min(len(u) - 1, 2)) if u else None
        return _conjugacy_cert(p, x, y, short if short is not None else u)
    if abelianization_check(p, x, y) == "NonConjugate":
        q = _cyclic_quotient(p, x, y, budget.max_index)
        if q is not None:
            return _nonconj_cert(p, x, y, q)
    tx, ty = torsion_power(p, x), torsion_power(p, y)
    if tx is not None and ty is not None:
        if tx[0] == ty[0]:
            u = ty[1] * ~tx[1]
            return _conjugacy_cert(p, x, y, u)
        if tx[0] and ty[0]:
            cert = _hnn_certificate(p, x, y, tx, ty, budget)
            if cert is not None:
                return cert
    pending: list = []
    for lengths, degrees in _schedule(budget):
        if lengths:
            u = enumerate_conjugators(p, x, y, lengths[-1], lengths[0])
            if u is not None:
                return _conjugacy_cert(p, x, y, u)
        if degrees:
            b = Budget(degrees[-1], budget.max_conjugator_len, budget.closure_order_bound, budget.node_limit)
            try:
                q = separate_conjugacy_class(p, x, y, b, cache, degrees, pending)
                return _nonconj_cert(p, x, y, q)
            except BudgetExceeded:
                pass
    raise BudgetExceeded(
        f"undecided within conjugator length {budget.max_conjugator_len} and index {budget.max_index}"
    )


def _subgroup_separates(q: FiniteQuotient, x, y, h_gens, bound: int) -> bool:
    gx, gy = q.evaluate(x), q.evaluate(y)
    within = [q.evaluate(s) for s in h_gens] or [perms.identity(q.degree)]
    try:
        return finite_conjugacy_test(q, gx, gy, within, bound) is None
    except SubgroupTooLarge:
        return False


def decide_conjugacy_in_subgroup(
    p: Presentation,
    h1: FiniteIndexSubgroup,
    x: Sequence[int],
    y: Sequence[int],
    budget: Budget = Budget(),
    cache=None,
) -> Certificate:
    """Like ``decide_conjugacy`` but conjugators must lie in ``h1``."""
    x, y = Word(x), Word(y)
    if h1.quotient.presentation_hash != p.hash:
        raise ValueError("subgroup belongs to another presentation")
    for w, name in ((x, "x"), (y, "y")):
        if not h1.member_test(w):
            raise NotInSubgroup(f"{name} = {p.format_word(w)} is not in the subgroup")
    if are_equal(x, y, p):
        return _conjugacy_cert(p, x, y, Word(), h1)
    h_gens = schreier_generators(h1)
    bound = budget.closure_order_bound
    if _subgroup_separates(h1.quotient, x, y, h_gens, bound):
        return _nonconj_cert(p, x, y, h1.quotient, h1)
    for lengths, degrees in _schedule(budget):
        if lengths:
            u = enumerate_conjugators(p, x, y, lengths[-1], lengths[0], h1.member_test)
            if u is not None:
                return _conjugacy_cert(p, x, y, u, h1)
        if degrees:
            b = Budget(degrees[-1], budget.max_conjugator_len, bound, budget.node_limit)
            for q in _quotient_stream(p, b, cache, degrees):
                for cand in (q, product_quotient(h1.quotient, q)):
                    if _subgroup_separates(cand, x, y, h_gens, bound):
                        return _nonconj_cert(p, x, y, cand, h1)
    raise BudgetExceeded("undecided within budget")


def certify_separation(p: Presentation, g, f_gens, budget: Budget = Budget(), cache=None) -> Certificate:
    """Certificate that ``g`` is not conjugate into ``<f_gens>`` in some finite quotient."""
    g = Word(g)
    q = separate_torsion_from_subgroup_conjugates(p, g, f_gens, budget, cache)
    witness = {"quotient": q.to_json(), "f_gens": [p.format_word(f) for f in f_gens]}
    return _finish(Certificate("Separation", p, g, None, witness))


def certify_cc(p: Presentation, x, centralizer_gens, P: FiniteIndexSubgroup, budget: Budget = Budget(), cache=None) -> Certificate:
    """Certificate for one instance of the Centralizer Condition."""
    x = Word(x)
    n = find_cc_quotient(p, x, centralizer_gens, P, budget, cache)
    witness = {
        "centralizer_gens": [p.format_word(c) for c in centralizer_gens],
        "p": P.to_json(),
        "n": n.to_json(),
    }
    return _finish(Certificate("CCInstance", p, x, None, witness))
