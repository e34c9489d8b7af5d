"""Locations, symbolic location sets, and the modal relations between them.

A location expression is a concrete `Loc` or a type variable. A location set
is a variable, a singleton `{l}` or a union. Nothing is ever normalised: every
relation below is a derivation search over the raw syntax.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Union as TypingUnion

from .names import memo_hash


class Kind(enum.Enum):
    STAR = "*"
    LOC = "loc"
    LOCSET = "locset"
    LOCAL = "ty"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TVar:
    """A type variable; its kind comes from the context that binds it."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Loc:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Sng:
    elem: LocExpr

    def __str__(self) -> str:
        return show_locset(self)


@dataclass(frozen=True)
class Union:
    left: LocSet
    right: LocSet

    def __str__(self) -> str:
        return show_locset(self)


LocExpr = TypingUnion[Loc, TVar]
LocSet = TypingUnion[TVar, Sng, Union]
memo_hash(Sng, Union)


def sng_chain(rho: LocSet) -> list[LocExpr] | None:
    """Elements of a right-nested union of singletons, or None for any other shape."""
    match rho:
        case Sng(e):
            return [e]
        case Union(Sng(e), rest):
            tail = sng_chain(rest)
            return None if tail is None else [e, *tail]
        case _:
            return None


def show_locset(rho: LocSet) -> str:
    elems = sng_chain(rho)
    if elems is not None:
        return "{" + ",".join(str(e) for e in elems) + "}"
    match rho:
        case TVar(n):
            return n
        case Union(a, b):
            left = show_locset(a)
            right = show_locset(b)
            if isinstance(b, Union) and sng_chain(b) is None:
                right = f"({right})"
            return f"{left} \\/ {right}"
    raise TypeError(f"not a location set: {rho!r}")


def set_of(*elems: LocExpr | str) -> LocSet:
    """Build `{e1,...,en}` as a right-nested union; strings become concrete locations."""
    if not elems:
        raise ValueError("location sets are non-empty")
    items = [Loc(e) if isinstance(e, str) else e for e in elems]
    out: LocSet = Sng(items[-1])
    for e in reversed(items[:-1]):
        out = Union(Sng(e), out)
    return out


def union(a: LocSet, b: LocSet) -> LocSet:
    return Union(a, b)


def nec_in(loc: LocExpr, rho: LocSet) -> bool:
    """Necessary membership: `loc` is in `rho` under every instantiation."""
    match rho:
        case Sng(e):
            return e == loc
        case Union(a, b):
            return nec_in(loc, a) or nec_in(loc, b)
        case _:
            return False


def poss_in(loc: LocExpr, rho: LocSet) -> bool:
    """Possible membership: some instantiation puts `loc` in `rho`."""
    match rho:
        case TVar():
            return True
        case Sng(TVar()):
            return True
        case Sng(Loc() as l):
            return l == loc
        case Union(a, b):
            return poss_in(loc, a) or poss_in(loc, b)
    raise TypeError(f"not a location set: {rho!r}")


def subset(a: LocSet, b: LocSet) -> bool:
    """The inductive subset relation; deliberately not the pointwise one."""
    if a == b:
        return True
    if isinstance(b, Union) and (subset(a, b.left) or subset(a, b.right)):
        return True
    match a:
        case Sng(e):
            return nec_in(e, b)
        case Union(l, r):
            return subset(l, b) and subset(r, b)
    return False


def set_equiv(a: LocSet, b: LocSet) -> bool:
    return subset(a, b) and subset(b, a)


def named_locs(rho: LocSet | LocExpr) -> frozenset[str]:
    match rho:
        case Loc(n):
            return frozenset({n})
        case TVar():
            return frozenset()
        case Sng(e):
            return named_locs(e)
        case Union(a, b):
            return named_locs(a) | named_locs(b)
    raise TypeError(f"not a location set: {rho!r}")


def fv_set(rho: LocSet | LocExpr) -> frozenset[str]:
    match rho:
        case Loc():
            return frozenset()
        case TVar(n):
            return frozenset({n})
        case Sng(e):
            return fv_set(e)
        case Union(a, b):
            return fv_set(a) | fv_set(b)
    raise TypeError(f"not a location set: {rho!r}")


def ground_set(rho: LocSet) -> frozenset[str] | None:
    """The concrete locations denoted by `rho`, or None if it mentions a variable."""
    if fv_set(rho):
        return None
    return named_locs(rho)


# A fresh witness never named by any program: it stands for "every other location".
_ANY = Loc("\0any")


def disjoint(a: LocSet, b: LocSet) -> bool:
    """No location is possibly in both sets."""
    witnesses = [Loc(n) for n in named_locs(a) | named_locs(b)] + [_ANY]
    witnesses += [TVar(n) for n in fv_set(a) | fv_set(b)]
    return not any(poss_in(w, a) and poss_in(w, b) for w in witnesses)


def ground(names) -> LocSet:
    """Canonical right-nested set for a collection of concrete names (sorted)."""
    return set_of(*sorted(names))


def loc_kinded(gamma: Mapping[str, Kind], loc: LocExpr) -> bool:
    match loc:
        case Loc():
            return True
        case TVar(n):
            return gamma.get(n) is Kind.LOC
    return False


def locset_kinded(gamma: Mapping[str, Kind], rho) -> bool:
    match rho:
        case TVar(n):
            return gamma.get(n) is Kind.LOCSET
        case Sng(e):
            return loc_kinded(gamma, e)
        case Union(a, b):
            return locset_kinded(gamma, a) and locset_kinded(gamma, b)
    return False


def canonical(rho: LocSet) -> LocSet:
    """Rewrite every ground part of `rho` into the sorted canonical set it denotes."""
    names = ground_set(rho)
    if names is not None:
        return ground(names)
    if isinstance(rho, Union):
        return Union(canonical(rho.left), canonical(rho.right))
    return rho
