"""Helpers shared by the syntax modules: fresh names and cached hashing."""

from __future__ import annotations

from collections.abc import Iterable


def fresh(base: str, avoid: Iterable[str]) -> str:
    """Return a variant of `base` not in `avoid`.

    The choice depends only on `base` and `avoid`, so substituting into equal
    terms always produces equal results. Projection relies on this: a body
    renamed during projection must match the same body renamed at run time.
    """
    taken = set(avoid)
    stem = base.rstrip("0123456789'") or base
    n = 1
    while True:
        candidate = f"{stem}{n}"
        if candidate not in taken:
            return candidate
        n += 1


def memo_hash(*classes: type) -> None:
    """Cache each instance's hash; syntax trees are immutable and hashed very often."""
    for cls in classes:
        compute = cls.__hash__

        def cached(self, compute=compute) -> int:
            try:
                return self.__dict__["_hash"]
            except KeyError:
                h = compute(self)
                object.__setattr__(self, "_hash", h)
                return h

        cls.__hash__ = cached
