"""Append-only JSON-lines cache of low-index quotients, keyed by presentation hash.

One file per presentation.  The first line is a header recording the index
through which the enumeration is complete; every later line is one quotient.
Writers take a file lock; readers never block.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Iterator, Optional

from filelock import FileLock

from .quotients import FiniteQuotient, enumerate_low_index

log = logging.getLogger(__name__)


def default_cache_dir() -> Path:
    env = os.environ.get("ORSEP_CACHE_DIR")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "orsep"


class QuotientCache:
    def __init__(self, directory: Optional[os.PathLike] = None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.enabled = True
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            probe = self.directory / ".probe"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            log.warning("quotient cache disabled: %s", exc)
            self.enabled = False

    def _path(self, h: str) -> Path:
        return self.directory / f"{h}.jsonl"

    def complete_through(self, h: str) -> int:
        path = self._path(h)
        if not self.enabled or not path.exists():
            return 0
        with path.open() as fh:
            first = fh.readline()
        try:
            return int(json.loads(first)["complete_through"])
        except (ValueError, KeyError, TypeError):
            return 0

    def load(self, h: str, max_index: int) -> list:
        path = self._path(h)
        out = []
        with path.open() as fh:
            fh.readline()
            for line in fh:
                q = FiniteQuotient.from_json(json.loads(line))
                if q.degree <= max_index:
                    out.append(q)
        return out

    def store(self, h: str, max_index: int, quotients: list) -> None:
        if not self.enabled:
            return
        path = self._path(h)
        with FileLock(str(path) + ".lock"):
            if self.complete_through(h) >= max_index:
                return
            tmp = path.with_suffix(".tmp")
            with tmp.open("w") as fh:
                fh.write(json.dumps({"complete_through": max_index}) + "\n")
                for q in quotients:
                    fh.write(json.dumps(q.to_json()) + "\n")
            os.replace(tmp, path)

    def stream(self, pres, max_index: int, node_limit: int, degrees=None) -> Iterator[FiniteQuotient]:
        """Quotients in enumeration order, served from disk when available."""
        h = pres.hash
        wanted = set(degrees) if degrees is not None else None
        if self.enabled and self.complete_through(h) >= max_index:
            for q in self.load(h, max_index):
                if wanted is None or q.degree in wanted:
                    yield q
            return
        if wanted is not None:
            yield from enumerate_low_index(pres, max_index, node_limit, degrees)
            return
        found = []
        for q in enumerate_low_index(pres, max_index, node_limit):
            found.append(q)
            yield q
        self.store(h, max_index, found)
