"""Choreographies, their types, and the substitutions between them.

Local variables live in per-location namespaces: `rho.x` names the variable x
held by every location in `rho`, and `let rho.x := ...` binds x for exactly the
locations of `rho`. An occurrence of x inside `rho2.e` refers to the nearest
enclosing binder whose set contains `rho2`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union as TypingUnion

from . import local as lc
from .locsets import (
    Kind,
    Loc,
    LocExpr,
    LocSet,
    Sng,
    TVar,
    Union,
    disjoint,
    fv_set,
    named_locs as ls_named_locs,
    show_locset,
    sng_chain,
    subset,
)
from .names import fresh, memo_hash


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class At:
    """A local value of type `local` held by every location in `rho`."""

    local: lc.LType
    rho: LocSet


@dataclass(frozen=True)
class Arrow:
    dom: ChorType
    cod: ChorType


@dataclass(frozen=True)
class Forall:
    var: str
    kind: Kind
    body: ChorType


@dataclass(frozen=True)
class Prod:
    left: ChorType
    right: ChorType


@dataclass(frozen=True)
class Sum:
    left: ChorType
    right: ChorType


@dataclass(frozen=True)
class Mu:
    var: str
    body: ChorType


ChorType = TypingUnion[At, Arrow, Forall, Prod, Sum, Mu, TVar, Loc, Sng, Union, lc.LType]
CHOR_TYPES = (At, Arrow, Forall, Prod, Sum, Mu)
SET_SHAPES = (Sng, Union)


# ---------------------------------------------------------------- choreographies


@dataclass(frozen=True)
class ChorVar:
    name: str


@dataclass(frozen=True)
class Done:
    """`rho.e`: every location in `rho` runs the local program `e`."""

    rho: LocSet
    expr: lc.Term


@dataclass(frozen=True)
class ChorFun:
    """Recursive function; `cod` may be omitted when `fname` is not used in `body`."""

    fname: str
    param: str
    dom: ChorType
    cod: ChorType | None
    body: Chor


@dataclass(frozen=True)
class ChorApp:
    fn: Chor
    arg: Chor


@dataclass(frozen=True)
class TyAbs:
    var: str
    kind: Kind
    body: Chor


@dataclass(frozen=True)
class TyApp:
    fn: Chor
    ty: ChorType


@dataclass(frozen=True)
class Fold:
    ty: ChorType
    body: Chor


@dataclass(frozen=True)
class Unfold:
    body: Chor


@dataclass(frozen=True)
class Pair:
    left: Chor
    right: Chor


@dataclass(frozen=True)
class Fst:
    body: Chor


@dataclass(frozen=True)
class Snd:
    body: Chor


@dataclass(frozen=True)
class Inl:
    ty: ChorType
    body: Chor


@dataclass(frozen=True)
class Inr:
    ty: ChorType
    body: Chor


@dataclass(frozen=True)
class Case:
    scrut: Chor
    lvar: str
    left: Chor
    rvar: str
    right: Chor


@dataclass(frozen=True)
class Send:
    """`body ~>[sender] dest`: the sender multicasts the value of `body` to `dest`."""

    body: Chor
    sender: LocExpr
    dest: LocSet


@dataclass(frozen=True)
class Sync:
    """`sync sender[label] ~> dest; body` with label "L" or "R"."""

    sender: LocExpr
    label: str
    dest: LocSet
    body: Chor


@dataclass(frozen=True)
class Ite:
    """Conditional decided by the locations in `rho`."""

    rho: LocSet
    cond: Chor
    then: Chor
    orelse: Chor


@dataclass(frozen=True)
class LetLocal:
    rho: LocSet
    var: str
    ty: lc.LType
    bound: Chor
    body: Chor


@dataclass(frozen=True)
class LetType:
    rho: LocSet
    var: str
    kind: Kind
    bound: Chor
    body: Chor


Chor = TypingUnion[
    ChorVar, Done, ChorFun, ChorApp, TyAbs, TyApp, Fold, Unfold, Pair, Fst, Snd, Inl, Inr,
    Case, Send, Sync, Ite, LetLocal, LetType,
]

CHOR_NODES = (ChorVar, Done, ChorFun, ChorApp, TyAbs, TyApp, Fold, Unfold, Pair, Fst, Snd,
              Inl, Inr, Case, Send, Sync, Ite, LetLocal, LetType)

memo_hash(*CHOR_NODES, *CHOR_TYPES)
for _cls in CHOR_NODES:
    _cls.__str__ = lambda self: show_chor(self)  # type: ignore[method-assign]
for _cls in CHOR_TYPES:
    _cls.__str__ = lambda self: show_type(self)  # type: ignore[method-assign]


def is_chor_value(c: Chor) -> bool:
    match c:
        case Done(_, e):
            return lc.is_lvalue(e)
        case ChorFun() | TyAbs():
            return True
        case Pair(a, b):
            return is_chor_value(a) and is_chor_value(b)
        case Inl(_, b) | Inr(_, b) | Fold(_, b):
            return is_chor_value(b)
    return False


# ---------------------------------------------------------------- printing


def show_rho(rho: LocSet) -> str:
    """Location set in surface syntax; a concrete singleton prints as its bare name."""
    if isinstance(rho, Sng) and isinstance(rho.elem, Loc):
        return rho.elem.name
    return show_locset(rho)


def _show_rho_atom(rho: LocSet) -> str:
    if isinstance(rho, (Sng, TVar)) or sng_chain(rho) is not None:
        return show_rho(rho)
    return f"({show_locset(rho)})"


KIND_NAMES = {Kind.STAR: "*", Kind.LOC: "loc", Kind.LOCSET: "locset", Kind.LOCAL: "ty"}


def show_type(t: ChorType, prec: int = 0) -> str:
    def paren(s: str, level: int) -> str:
        return f"({s})" if prec > level else s

    match t:
        case At(te, rho):
            return paren(f"{lc.show_ltype(te, 2)} @ {_show_rho_atom(rho)}", 3)
        case Arrow(a, b):
            return paren(f"{show_type(a, 1)} -> {show_type(b, 0)}", 0)
        case Forall(v, k, b):
            return paren(f"forall {v} :: {KIND_NAMES[k]}. {show_type(b, 0)}", 0)
        case Mu(v, b):
            return paren(f"mu {v}. {show_type(b, 0)}", 0)
        case Sum(a, b):
            return paren(f"{show_type(a, 1)} + {show_type(b, 2)}", 1)
        case Prod(a, b):
            return paren(f"{show_type(a, 2)} * {show_type(b, 3)}", 2)
        case Loc(n):
            return n
        case Sng() | Union():
            text = show_locset(t)
            return f"({text})" if prec > 0 and sng_chain(t) is None else text
        case TVar(n):
            return n
    if isinstance(t, lc.LOCAL_TYPES):
        return paren(lc.show_ltype(t), 3)
    raise TypeError(f"not a choreography type: {t!r}")


def _show_loc(l: LocExpr) -> str:
    return l.name


def show_chor(c: Chor, prec: int = 0) -> str:
    """Surface syntax. Levels: 0 binders, 1 sends, 2 application, 3 prefix ops, 4 atoms."""

    def paren(s: str, level: int) -> str:
        return f"({s})" if prec > level else s

    match c:
        case ChorVar(n):
            return n
        case Done(rho, e):
            return f"{_show_rho_atom(rho)}.{lc.show_term(e, 5)}"
        case Pair(a, b):
            return f"({show_chor(a)}, {show_chor(b)})"
        case Fst(b):
            return paren(f"fst {show_chor(b, 3)}", 3)
        case Snd(b):
            return paren(f"snd {show_chor(b, 3)}", 3)
        case Unfold(b):
            return paren(f"unfold {show_chor(b, 3)}", 3)
        case Fold(t, b):
            return paren(f"fold[{show_type(t)}] {show_chor(b, 3)}", 3)
        case Inl(t, b):
            return paren(f"inl[{show_type(t)}] {show_chor(b, 3)}", 3)
        case Inr(t, b):
            return paren(f"inr[{show_type(t)}] {show_chor(b, 3)}", 3)
        case ChorApp(f, a):
            return paren(f"{show_chor(f, 2)} {show_chor(a, 3)}", 2)
        case TyApp(f, t):
            return paren(f"{show_chor(f, 2)} [{show_type(t)}]", 2)
        case Send(b, sender, dest):
            if isinstance(b, Done) and b.rho == Sng(sender):
                arrow = "~>"
            else:
                arrow = f"~>[{_show_loc(sender)}]"
            return paren(f"{show_chor(b, 1)} {arrow} {_show_rho_atom(dest)}", 1)
        case ChorFun(f, x, a, b, body):
            cod = "" if b is None else f": {show_type(b)}"
            return paren(f"fun {f}({x}: {show_type(a)}){cod} = {show_chor(body)}", 0)
        case TyAbs(v, k, body):
            return paren(f"tyfun {v} :: {KIND_NAMES[k]} => {show_chor(body)}", 0)
        case Case(s, x, l, y, r):
            return paren(
                f"case {show_chor(s, 1)} of inl {x} => {show_chor(l, 1)} | inr {y} => {show_chor(r)}",
                0,
            )
        case Sync(sender, d, dest, body):
            label = "left" if d == "L" else "right"
            return paren(
                f"sync {_show_loc(sender)}[{label}] ~> {_show_rho_atom(dest)}; {show_chor(body)}", 0
            )
        case Ite(rho, cond, a, b):
            return paren(
                f"if {show_chor(cond, 1)} @ {_show_rho_atom(rho)} then {show_chor(a)} "
                f"else {show_chor(b)}",
                0,
            )
        case LetLocal(rho, x, t, c1, c2):
            return paren(
                f"let {_show_rho_atom(rho)}.{x} : {lc.show_ltype(t)} := {show_chor(c1)} "
                f"in {show_chor(c2)}",
                0,
            )
        case LetType(rho, a, k, c1, c2):
            return paren(
                f"let {_show_rho_atom(rho)}.{a} :: {KIND_NAMES[k]} := {show_chor(c1)} "
                f"in {show_chor(c2)}",
                0,
            )
    raise TypeError(f"not a choreography: {c!r}")


# ---------------------------------------------------------------- generic traversal


def children(c: Chor) -> tuple[Chor, ...]:
    match c:
        case ChorVar() | Done():
            return ()
        case ChorFun(_, _, _, _, b) | TyAbs(_, _, b) | TyApp(b, _) | Fold(_, b) | Unfold(b):
            return (b,)
        case Fst(b) | Snd(b) | Inl(_, b) | Inr(_, b) | Send(b, _, _) | Sync(_, _, _, b):
            return (b,)
        case ChorApp(a, b) | Pair(a, b):
            return (a, b)
        case Case(s, _, l, _, r):
            return (s, l, r)
        case Ite(_, cond, a, b):
            return (cond, a, b)
        case LetLocal(_, _, _, a, b) | LetType(_, _, _, a, b):
            return (a, b)
    raise TypeError(f"not a choreography: {c!r}")


def with_children(c: Chor, kids: tuple[Chor, ...]) -> Chor:
    """`c` with its immediate sub-choreographies replaced, in `children` order."""
    match c:
        case ChorVar() | Done():
            return c
        case ChorFun(f, x, a, b, _):
            return ChorFun(f, x, a, b, kids[0])
        case TyAbs(v, k, _):
            return TyAbs(v, k, kids[0])
        case TyApp(_, t):
            return TyApp(kids[0], t)
        case Fold(t, _):
            return Fold(t, kids[0])
        case Unfold():
            return Unfold(kids[0])
        case Fst():
            return Fst(kids[0])
        case Snd():
            return Snd(kids[0])
        case Inl(t, _):
            return Inl(t, kids[0])
        case Inr(t, _):
            return Inr(t, kids[0])
        case Send(_, s, d):
            return Send(kids[0], s, d)
        case Sync(s, l, d, _):
            return Sync(s, l, d, kids[0])
        case ChorApp():
            return ChorApp(*kids)
        case Pair():
            return Pair(*kids)
        case Case(_, x, _, y, _):
            return Case(kids[0], x, kids[1], y, kids[2])
        case Ite(rho=rho):
            return Ite(rho, *kids)
        case LetLocal(rho, x, t, _, _):
            return LetLocal(rho, x, t, *kids)
        case LetType(rho, v, k, _, _):
            return LetType(rho, v, k, *kids)
    raise TypeError(f"not a choreography: {c!r}")


def size(c: Chor) -> int:
    return 1 + sum(size(k) for k in children(c))


# ---------------------------------------------------------------- free variables


def ftv_type(t: ChorType) -> frozenset[str]:
    match t:
        case At(te, rho):
            return lc.ftv_ltype(te) | fv_set(rho)
        case Arrow(a, b) | Prod(a, b) | Sum(a, b):
            return ftv_type(a) | ftv_type(b)
        case Forall(v, _, b) | Mu(v, b):
            return ftv_type(b) - {v}
        case TVar(n):
            return frozenset({n})
        case Loc() | Sng() | Union():
            return fv_set(t)
    if isinstance(t, lc.LOCAL_TYPES):
        return lc.ftv_ltype(t)
    raise TypeError(f"not a choreography type: {t!r}")


def ftv_chor(c: Chor) -> frozenset[str]:
    match c:
        case ChorVar():
            return frozenset()
        case Done(rho, e):
            return fv_set(rho) | lc.ftv_term(e)
        case ChorFun(_, _, a, b, body):
            out = ftv_type(a) | ftv_chor(body)
            return out if b is None else out | ftv_type(b)
        case TyAbs(v, _, body):
            return ftv_chor(body) - {v}
        case TyApp(f, t):
            return ftv_chor(f) | ftv_type(t)
        case Fold(t, b) | Inl(t, b) | Inr(t, b):
            return ftv_type(t) | ftv_chor(b)
        case Send(b, sender, dest):
            return ftv_chor(b) | fv_set(sender) | fv_set(dest)
        case Sync(sender, _, dest, b):
            return ftv_chor(b) | fv_set(sender) | fv_set(dest)
        case Ite(rho, cond, a, b):
            return fv_set(rho) | ftv_chor(cond) | ftv_chor(a) | ftv_chor(b)
        case LetLocal(rho, _, t, c1, c2):
            return fv_set(rho) | lc.ftv_ltype(t) | ftv_chor(c1) | ftv_chor(c2)
        case LetType(rho, v, _, c1, c2):
            return fv_set(rho) | ftv_chor(c1) | (ftv_chor(c2) - {v})
    return frozenset().union(*(ftv_chor(k) for k in children(c)))


def fv_chor(c: Chor) -> frozenset[str]:
    """Free choreography variables."""
    match c:
        case ChorVar(n):
            return frozenset({n})
        case ChorFun(f, x, _, _, body):
            return fv_chor(body) - {f, x}
        case Case(s, x, l, y, r):
            return fv_chor(s) | (fv_chor(l) - {x}) | (fv_chor(r) - {y})
    return frozenset().union(*(fv_chor(k) for k in children(c)))


def local_occurrences(c: Chor) -> frozenset[tuple[LocSet, str]]:
    """Free local-variable occurrences as (namespace, name) pairs."""
    match c:
        case Done(rho, e):
            return frozenset((rho, x) for x in lc.fv_term(e))
        case LetLocal(rho, x, _, c1, c2):
            inner = {(r, y) for (r, y) in local_occurrences(c2) if not (y == x and subset(r, rho))}
            return local_occurrences(c1) | inner
    return frozenset().union(*(local_occurrences(k) for k in children(c)))


def fv_rho(c: Chor, rho: LocSet) -> frozenset[str]:
    """Local variables free in `c` within a namespace that may overlap `rho`."""
    return frozenset(x for (r, x) in local_occurrences(c) if not disjoint(r, rho))


def local_names(c: Chor) -> frozenset[str]:
    """Every local-variable name appearing anywhere in `c`."""
    match c:
        case Done(_, e):
            return lc.names_in_term(e)
        case LetLocal(_, x, _, c1, c2):
            return local_names(c1) | local_names(c2) | {x}
    return frozenset().union(*(local_names(k) for k in children(c)))


def named_locs_type(t: ChorType) -> frozenset[str]:
    match t:
        case At(_, rho):
            return ls_named_locs(rho)
        case Arrow(a, b) | Prod(a, b) | Sum(a, b):
            return named_locs_type(a) | named_locs_type(b)
        case Forall(_, _, b) | Mu(_, b):
            return named_locs_type(b)
        case TVar():
            return frozenset()
        case Loc() | Sng() | Union():
            return ls_named_locs(t)
    return frozenset()


def named_locs(c: Chor) -> frozenset[str]:
    """Concrete locations mentioned by a choreography (the LN function)."""
    match c:
        case ChorVar():
            return frozenset()
        case Done(rho, _):
            return ls_named_locs(rho)
        case TyApp(f, t):
            return named_locs(f) | named_locs_type(t)
        case Send(b, sender, dest):
            return ls_named_locs(sender) | ls_named_locs(dest) | named_locs(b)
        case Sync(sender, _, dest, b):
            return ls_named_locs(sender) | ls_named_locs(dest) | named_locs(b)
        case Ite(rho=rho) | LetLocal(rho=rho) | LetType(rho=rho):
            return ls_named_locs(rho).union(*(named_locs(k) for k in children(c)))
    return frozenset().union(*(named_locs(k) for k in children(c)))


# ---------------------------------------------------------------- type substitution


def subst_in_type(t: ChorType, var: str, s) -> ChorType:
    """`t[var := s]`, capture-avoiding."""
    match t:
        case At(te, rho):
            return At(lc.lsubst_ltype(te, var, s), lc.subst_locset(rho, var, s))
        case Arrow(a, b):
            return Arrow(subst_in_type(a, var, s), subst_in_type(b, var, s))
        case Prod(a, b):
            return Prod(subst_in_type(a, var, s), subst_in_type(b, var, s))
        case Sum(a, b):
            return Sum(subst_in_type(a, var, s), subst_in_type(b, var, s))
        case Forall(v, k, b):
            if v == var:
                return t
            v, b = _freshen_type_binder(v, b, var, s)
            return Forall(v, k, subst_in_type(b, var, s))
        case Mu(v, b):
            if v == var:
                return t
            v, b = _freshen_type_binder(v, b, var, s)
            return Mu(v, subst_in_type(b, var, s))
        case TVar(n):
            return s if n == var else t
        case Loc():
            return t
        case Sng() | Union():
            return lc.subst_locset(t, var, s)
    if isinstance(t, lc.LOCAL_TYPES):
        return lc.lsubst_ltype(t, var, s)
    raise TypeError(f"not a choreography type: {t!r}")


def ftv_any(s) -> frozenset[str]:
    return ftv_type(s)


def _freshen_type_binder(v: str, body: ChorType, var: str, s):
    if v not in ftv_any(s):
        return v, body
    v2 = fresh(v, ftv_type(body) | ftv_any(s) | {var, v})
    return v2, subst_in_type(body, v, TVar(v2))


def _as_locset(s) -> LocSet | None:
    """The namespace a substituted location or set occupies; None for other sorts."""
    match s:
        case Loc():
            return Sng(s)
        case TVar() | Sng() | Union():
            return s
    return None


def _var_within(var: str, rho: LocSet) -> bool:
    return subset(TVar(var), rho) or subset(Sng(TVar(var)), rho)


def subst_type(c: Chor, var: str, s) -> Chor:
    """`c[var := s]` for a type, location or location set `s`.

    Type binders are renamed when they would capture. A local-let binder is
    renamed when substituting a location into its namespace could capture an
    occurrence of the same name that belongs to a different namespace.
    """
    if var not in ftv_chor(c):
        return c

    def go(x: Chor) -> Chor:
        return subst_type(x, var, s)

    def ty(t: ChorType) -> ChorType:
        return subst_in_type(t, var, s)

    def rs(rho: LocSet) -> LocSet:
        return lc.subst_locset(rho, var, s)

    match c:
        case ChorVar():
            return c
        case Done(rho, e):
            return Done(rs(rho), lc.lsubst_type(e, var, s))
        case ChorFun(f, x, a, b, body):
            return ChorFun(f, x, ty(a), None if b is None else ty(b), go(body))
        case ChorApp(f, a):
            return ChorApp(go(f), go(a))
        case TyAbs(v, k, body):
            if v == var:
                return c
            v, body = _freshen_chor_binder(v, body, var, s)
            return TyAbs(v, k, go(body))
        case TyApp(f, t):
            return TyApp(go(f), ty(t))
        case Fold(t, b):
            return Fold(ty(t), go(b))
        case Unfold(b):
            return Unfold(go(b))
        case Pair(a, b):
            return Pair(go(a), go(b))
        case Fst(b):
            return Fst(go(b))
        case Snd(b):
            return Snd(go(b))
        case Inl(t, b):
            return Inl(ty(t), go(b))
        case Inr(t, b):
            return Inr(ty(t), go(b))
        case Case(sc, x, l, y, r):
            return Case(go(sc), x, go(l), y, go(r))
        case Send(b, sender, dest):
            return Send(go(b), lc.subst_loc(sender, var, s), rs(dest))
        case Sync(sender, d, dest, b):
            return Sync(lc.subst_loc(sender, var, s), d, rs(dest), go(b))
        case Ite(rho, cond, a, b):
            return Ite(rs(rho), go(cond), go(a), go(b))
        case LetType(rho, v, k, c1, c2):
            if v == var:
                return LetType(rs(rho), v, k, go(c1), c2)
            v, c2 = _freshen_chor_binder(v, c2, var, s)
            return LetType(rs(rho), v, k, go(c1), go(c2))
        case LetLocal(rho, x, t, c1, c2):
            if _needs_local_rename(rho, x, c2, var, s):
                y = fresh(x, local_names(c2) | local_names(c1) | {x})
                c2 = rename_local(c2, rho, x, y)
                x = y
            return LetLocal(rs(rho), x, lc.lsubst_ltype(t, var, s), go(c1), go(c2))
    raise TypeError(f"not a choreography: {c!r}")


def _freshen_chor_binder(v: str, body: Chor, var: str, s):
    if v not in ftv_any(s):
        return v, body
    v2 = fresh(v, ftv_chor(body) | ftv_any(s) | {var, v})
    return v2, subst_type(body, v, TVar(v2))


def _needs_local_rename(rho: LocSet, x: str, body: Chor, var: str, s) -> bool:
    """Decide whether `let rho.x` must rename x before `[var := s]` passes through it.

    Only occurrences of x in `body` that this binder does not already own can be
    captured. When `var` is part of the binder, an outside occurrence is at risk
    if its namespace overlaps the incoming set. Otherwise the binder is fixed and
    an outside occurrence is at risk if its own namespace mentions `var` and the
    incoming set meets the binder.
    """
    sigma = _as_locset(s)
    if sigma is None:
        return False
    outside = [r for (r, y) in local_occurrences(body) if y == x and not subset(r, rho)]
    if not outside:
        return False
    if _var_within(var, rho):
        return any(not disjoint(r, sigma) for r in outside)
    if disjoint(sigma, rho):
        return False
    return any(var in fv_set(r) for r in outside)


# ---------------------------------------------------------------- local substitution


class PartialSubstitution(Exception):
    """A substitution would cover only part of a multiply-located variable's namespace."""


def subst_local(c: Chor, rho: LocSet, x: str, v: lc.Term) -> Chor | None:
    """`c[x |->rho v]`: replace x in the namespace of `rho`, or None on a partial cover."""
    try:
        return _subst_local(c, rho, x, v, (), strict=True)
    except PartialSubstitution:
        return None


def rename_local(c: Chor, rho: LocSet, x: str, y: str) -> Chor:
    """Rename the occurrences of x owned by a binder at `rho` to y."""
    return _subst_local(c, rho, x, lc.Var(y), (), strict=False)


def _subst_local(c: Chor, rho: LocSet, x: str, v: lc.Term, shadows: tuple[LocSet, ...],
                 strict: bool) -> Chor:
    def go(k: Chor, sh: tuple[LocSet, ...] = shadows) -> Chor:
        return _subst_local(k, rho, x, v, sh, strict)

    match c:
        case Done(r, e):
            if x not in lc.fv_term(e) or any(subset(r, sh) for sh in shadows):
                return c
            if subset(r, rho):
                return Done(r, lc.lsubst_term(e, x, v))
            if strict and not disjoint(r, rho):
                raise PartialSubstitution(f"{show_locset(r)}.{x} is only partly covered")
            return c
        case LetLocal(r, y, t, c1, c2):
            inner = (*shadows, r) if y == x else shadows
            return LetLocal(r, y, t, go(c1), go(c2, inner))
        case ChorVar():
            return c
        case ChorFun(f, p, a, b, body):
            return ChorFun(f, p, a, b, go(body))
        case ChorApp(f, a):
            return ChorApp(go(f), go(a))
        case TyAbs(a, k, body):
            a, body = _avoid_type_capture(a, body, v)
            return TyAbs(a, k, go(body))
        case TyApp(f, t):
            return TyApp(go(f), t)
        case Fold(t, b):
            return Fold(t, go(b))
        case Unfold(b):
            return Unfold(go(b))
        case Pair(a, b):
            return Pair(go(a), go(b))
        case Fst(b):
            return Fst(go(b))
        case Snd(b):
            return Snd(go(b))
        case Inl(t, b):
            return Inl(t, go(b))
        case Inr(t, b):
            return Inr(t, go(b))
        case Case(s, p, l, q, r):
            return Case(go(s), p, go(l), q, go(r))
        case Send(b, sender, dest):
            return Send(go(b), sender, dest)
        case Sync(sender, d, dest, b):
            return Sync(sender, d, dest, go(b))
        case Ite(r, cond, a, b):
            return Ite(r, go(cond), go(a), go(b))
        case LetType(r, a, k, c1, c2):
            a2, c2 = _avoid_type_capture(a, c2, v)
            return LetType(r, a2, k, go(c1), go(c2))
    raise TypeError(f"not a choreography: {c!r}")


def _avoid_type_capture(a: str, body: Chor, v: lc.Term):
    if a not in lc.ftv_term(v):
        return a, body
    a2 = fresh(a, ftv_chor(body) | lc.ftv_term(v) | {a})
    return a2, subst_type(body, a, TVar(a2))


# ---------------------------------------------------------------- choreography substitution


def subst_chor(c: Chor, x: str, v: Chor) -> Chor:
    """Capture-avoiding `c[x := v]` for choreography variables."""
    if x not in fv_chor(c):
        return c

    def go(k: Chor) -> Chor:
        return subst_chor(k, x, v)

    match c:
        case ChorVar(n):
            return v if n == x else c
        case ChorFun(f, p, a, b, body):
            if x in (f, p):
                return c
            fv_v = fv_chor(v)
            avoid = fv_v | fv_chor(body) | {x, f, p}
            if f in fv_v:
                f2 = fresh(f, avoid)
                body = subst_chor(body, f, ChorVar(f2))
                avoid |= {f2}
                f = f2
            if p in fv_v:
                p2 = fresh(p, avoid)
                body = subst_chor(body, p, ChorVar(p2))
                p = p2
            return ChorFun(f, p, a, b, go(body))
        case Case(s, p, l, q, r):
            fv_v = fv_chor(v)
            if p != x and p in fv_v:
                p2 = fresh(p, fv_v | fv_chor(l) | {x})
                l = subst_chor(l, p, ChorVar(p2))
                p = p2
            if q != x and q in fv_v:
                q2 = fresh(q, fv_v | fv_chor(r) | {x})
                r = subst_chor(r, q, ChorVar(q2))
                q = q2
            return Case(go(s), p, l if p == x else go(l), q, r if q == x else go(r))
        case TyAbs(a, k, body):
            a, body = _avoid_chor_type_capture(a, body, v)
            return TyAbs(a, k, go(body))
        case LetType(r, a, k, c1, c2):
            a2, c2b = _avoid_chor_type_capture(a, c2, v)
            return LetType(r, a2, k, go(c1), go(c2b))
        case Done():
            return c
        case ChorApp(f, a):
            return ChorApp(go(f), go(a))
        case TyApp(f, t):
            return TyApp(go(f), t)
        case Fold(t, b):
            return Fold(t, go(b))
        case Unfold(b):
            return Unfold(go(b))
        case Pair(a, b):
            return Pair(go(a), go(b))
        case Fst(b):
            return Fst(go(b))
        case Snd(b):
            return Snd(go(b))
        case Inl(t, b):
            return Inl(t, go(b))
        case Inr(t, b):
            return Inr(t, go(b))
        case Send(b, sender, dest):
            return Send(go(b), sender, dest)
        case Sync(sender, d, dest, b):
            return Sync(sender, d, dest, go(b))
        case Ite(r, cond, a, b):
            return Ite(r, go(cond), go(a), go(b))
        case LetLocal(r, y, t, c1, c2):
            return LetLocal(r, y, t, go(c1), go(c2))
    raise TypeError(f"not a choreography: {c!r}")


def _avoid_chor_type_capture(a: str, body: Chor, v: Chor):
    if a not in ftv_chor(v):
        return a, body
    a2 = fresh(a, ftv_chor(body) | ftv_chor(v) | {a})
    return a2, subst_type(body, a, TVar(a2))
