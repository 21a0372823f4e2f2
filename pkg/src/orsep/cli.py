"""Command-line interface: ``orsep <command> ...``.

Exit status is 0 when a question is decided or a certificate verifies,
2 when a search runs out of budget, and 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import __version__, perms
from .cache import QuotientCache, default_cache_dir
from .conjugacy import (
    Certificate,
    certify_cc,
    certify_separation,
    decide_conjugacy,
    decide_conjugacy_in_subgroup,
    verify_certificate,
)
from .dehn import is_trivial, reduce_in
from .errors import BudgetExceeded, OrsepError
from .hierarchy import check_hnn_data, compute_rc, decompose_rc_zero, hierarchy_chain
from .quotients import Budget, FiniteIndexSubgroup, FiniteQuotient
from .words import format_word, parse_presentation

log = logging.getLogger("orsep")

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


@dataclass(frozen=True)
class Config:
    max_index: int = 12
    max_conjugator_len: int = 12
    closure_order_bound: int = 10**6
    cache_dir: Optional[Path] = None
    output: str = "human"

    def __post_init__(self):
        for name in ("max_index", "max_conjugator_len", "closure_order_bound"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.output not in ("human", "json"):
            raise ValueError("output must be 'human' or 'json'")

    @property
    def budget(self) -> Budget:
        return Budget(self.max_index, self.max_conjugator_len, self.closure_order_bound)


def _emit(cfg: Config, human: str, data) -> None:
    if cfg.output == "json":
        print(json.dumps(data, indent=2))
    else:
        print(human)


def _cache(cfg: Config, args) -> Optional[QuotientCache]:
    if getattr(args, "no_cache", False):
        return None
    cache = QuotientCache(cfg.cache_dir or default_cache_dir())
    return cache if cache.enabled else None


def _quotient_from_args(p, images: list, degree: Optional[int]) -> FiniteQuotient:
    """Build a quotient from ``name=(cycles)`` strings; unnamed generators map to the identity."""
    table = {}
    for item in images:
        name, _, cyc = item.partition("=")
        name = name.strip()
        if name not in p.all_generators:
            raise ValueError(f"unknown generator {name!r} in --images")
        table[name] = cyc.strip() or "()"
    if degree is None:
        points = [int(s) for v in table.values() for s in v.replace("(", " ").replace(")", " ").split()]
        degree = max(points, default=0) + 1
    imgs = tuple(perms.parse_cycles(table.get(n, "()"), degree) for n in p.all_generators)
    q = FiniteQuotient(degree, imgs, p.hash)
    if not q.satisfies(p.relators):
        raise ValueError("the given images do not satisfy the relator")
    return q


def _subgroup_from_args(p, args) -> FiniteIndexSubgroup:
    q = _quotient_from_args(p, args.images, args.degree)
    q0 = tuple(perms.parse_cycles(c, q.degree) for c in (args.q0 or []))
    return FiniteIndexSubgroup(q, q0)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_parse(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    _emit(cfg, str(p), {**p.to_json(), "free_factors": list(p.free_factors), "hash": p.hash})
    return EXIT_OK


def cmd_wp(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    w = p.parse_word(args.word)
    trivial = is_trivial(w, p)
    red = reduce_in(p, w)
    verdict = "trivial" if trivial else "nontrivial"
    _emit(cfg, verdict if trivial else f"{verdict} (reduced form {p.format_word(red)})",
          {"word": p.format_word(w), "trivial": trivial, "reduced": p.format_word(red)})
    return EXIT_OK


def cmd_rc(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    rc = compute_rc(p.root_cyclic)
    _emit(cfg, str(rc), {"root": p.format_word(p.root), "rc": rc})
    return EXIT_OK


def cmd_decompose(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    d = decompose_rc_zero(p)
    names = d.basis
    subs = {g: format_word(s, names) for g, s in zip(p.all_generators, d.substitution)}
    human = [
        f"free rank {d.free_rank}, torsion order {d.order}",
        f"basis: {', '.join(names)} ({d.torsion_generator} has order {d.order})",
    ] + [f"  {g} -> {s}" for g, s in subs.items()]
    _emit(cfg, "\n".join(human), {
        "free_rank": d.free_rank,
        "order": d.order,
        "basis": list(names),
        "torsion_generator": d.torsion_generator,
        "substitution": subs,
    })
    return EXIT_OK


def cmd_hierarchy(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    chain = hierarchy_chain(p)
    steps = []
    lines = [f"RC {compute_rc(p.root_cyclic)}: {p}"]
    for h in chain:
        checks = check_hnn_data(h)
        steps.append({"hnn": h.to_json(), "rc": compute_rc(h.base.root_cyclic), "checks": checks})
        names = h.hnn_generator_names
        lines.append(
            f"RC {compute_rc(h.base.root_cyclic)}: {h.base}  "
            f"[{', '.join(f'{h.stable} {names[u]} {h.stable}^-1 = {names[v]}' for u, v in zip(h.u1, h.u2))}]"
        )
        if not all(checks.values()):
            lines.append(f"  failed checks: {[k for k, v in checks.items() if not v]}")
    _emit(cfg, "\n".join(lines), {"presentation": p.to_json(), "steps": steps})
    return EXIT_OK


def cmd_quotients(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    cache = _cache(cfg, args)
    b = cfg.budget
    if cache is not None:
        stream = cache.stream(p, b.max_index, b.node_limit)
    else:
        from .quotients import enumerate_low_index

        stream = enumerate_low_index(p, b.max_index, b.node_limit)
    rows = []
    for q in stream:
        rows.append(q)
        if cfg.output == "human":
            imgs = ", ".join(f"{n} -> {perms.format_cycles(g)}" for n, g in zip(p.all_generators, q.images))
            print(f"[{q.degree}] {imgs}")
    if cfg.output == "json":
        print(json.dumps([q.to_json() for q in rows], indent=2))
    else:
        print(f"{len(rows)} quotients of index <= {b.max_index}")
    return EXIT_OK


def _print_cert(cfg, cert: Certificate, args) -> int:
    text = cert.dumps()
    if getattr(args, "output_file", None):
        Path(args.output_file).write_text(text + "\n")
    if cfg.output == "human":
        extra = ""
        if cert.kind == "Conjugacy":
            extra = f" by {cert.witness['conjugator']}"
        print(f"{cert.verdict}{extra} [{cert.kind} certificate]")
    else:
        print(text)
    return EXIT_OK


def cmd_conj(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    cert = decide_conjugacy(p, p.parse_word(args.x), p.parse_word(args.y), cfg.budget, _cache(cfg, args))
    return _print_cert(cfg, cert, args)


def cmd_conj_sub(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    h1 = _subgroup_from_args(p, args)
    cert = decide_conjugacy_in_subgroup(p, h1, p.parse_word(args.x), p.parse_word(args.y), cfg.budget, _cache(cfg, args))
    return _print_cert(cfg, cert, args)


def cmd_certify(cfg, args) -> int:
    p = parse_presentation(args.presentation)
    g = p.parse_word(args.element)
    if args.what == "separation":
        f_gens = [p.parse_word(f) for f in args.subgroup]
        cert = certify_separation(p, g, f_gens, cfg.budget, _cache(cfg, args))
    else:
        P = _subgroup_from_args(p, args)
        cgens = [p.parse_word(c) for c in (args.centralizer or [args.element])]
        cert = certify_cc(p, g, cgens, P, cfg.budget, _cache(cfg, args))
    return _print_cert(cfg, cert, args)


def cmd_verify(cfg, args) -> int:
    text = sys.stdin.read() if args.file == "-" else Path(args.file).read_text()
    ok = verify_certificate(text)
    _emit(cfg, "valid" if ok else "invalid", {"valid": ok})
    return EXIT_OK if ok else EXIT_ERROR


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json"), default=None, help="output format")
    common.add_argument("--json", action="store_true", help="shorthand for --format json")
    common.add_argument("--max-index", type=int, default=None, help="largest quotient degree searched")
    common.add_argument("--max-len", type=int, default=None, help="longest conjugator searched")
    common.add_argument("--order-bound", type=int, default=None, help="largest finite group enumerated")
    common.add_argument("--cache-dir", default=None, help="quotient cache directory (default $ORSEP_CACHE_DIR)")
    common.add_argument("--no-cache", action="store_true", help="do not read or write the quotient cache")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="orsep", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"orsep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, default_format="human"):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn, default_format=default_format)
        sp.add_argument("presentation", help="e.g. '< a, b | (a b a B)^2 >'")
        return sp

    add("parse", cmd_parse, "normalize a presentation")
    sp = add("wp", cmd_wp, "decide whether a word is trivial")
    sp.add_argument("word")
    add("rc", cmd_rc, "repetition complexity of the relator root")
    add("decompose", cmd_decompose, "free product splitting when RC = 0")
    add("hierarchy", cmd_hierarchy, "iterate the RC-reducing HNN step")
    add("quotients", cmd_quotients, "list low-index quotients")

    def subgroup_args(sp):
        sp.add_argument("--images", action="append", default=[], metavar="GEN=CYCLES",
                        help="image of a generator, e.g. 'a=(0 1)'; repeatable")
        sp.add_argument("--degree", type=int, default=None)
        sp.add_argument("--q0", action="append", metavar="CYCLES",
                        help="generator of Q0 in the image group (default: trivial, giving the kernel)")

    for name, fn in (("conj", cmd_conj), ("conj-sub", cmd_conj_sub)):
        sp = add(name, fn, "decide conjugacy" + (" inside a finite-index subgroup" if name == "conj-sub" else ""), "json")
        sp.add_argument("x")
        sp.add_argument("y")
        sp.add_argument("-o", "--output-file", default=None, help="also write the certificate here")
        if name == "conj-sub":
            subgroup_args(sp)

    sp = sub.add_parser("certify", parents=[common], help="produce a separation or centralizer-condition certificate")
    sp.set_defaults(fn=cmd_certify, default_format="json")
    sp.add_argument("what", choices=("separation", "cc"))
    sp.add_argument("presentation")
    sp.add_argument("element")
    sp.add_argument("--subgroup", action="append", default=[], metavar="WORD",
                    help="generator of F (separation); repeatable")
    sp.add_argument("--centralizer", action="append", metavar="WORD",
                    help="element commuting with the subject (cc); default the subject itself")
    sp.add_argument("-o", "--output-file", default=None)
    subgroup_args(sp)

    sp = sub.add_parser("verify", parents=[common], help="check a certificate file ('-' for stdin)")
    sp.set_defaults(fn=cmd_verify, default_format="human")
    sp.add_argument("file")
    return ap


def _config(args) -> Config:
    fmt = "json" if args.json else (args.format or args.default_format)
    d = Config()
    return Config(
        max_index=args.max_index if args.max_index is not None else d.max_index,
        max_conjugator_len=args.max_len if args.max_len is not None else d.max_conjugator_len,
        closure_order_bound=args.order_bound if args.order_bound is not None else d.closure_order_bound,
        cache_dir=Path(args.cache_dir) if args.cache_dir else None,
        output=fmt,
    )


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = _config(args)
        if args.no_cache is False and args.cache_dir is None and os.environ.get("ORSEP_CACHE_DIR") is None:
            log.debug("using default cache directory %s", default_cache_dir())
        return args.fn(cfg, args)
    except BudgetExceeded as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OrsepError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # last resort: never show a traceback
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
