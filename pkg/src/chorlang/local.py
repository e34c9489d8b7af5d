"""The bundled local language: call-by-value System F with integers, booleans,
lists and type representations.

Integers double as location representations and integer lists as location-set
representations; a `LocationTable` says which location each integer denotes.

Typing is bidirectional. Checking mode is needed because `0` is an `int` but
also a `loc{A,B}` whenever 0 codes for A. The ascription `(e : t)` turns a
checked term into a synthesising one, and an ascribed value stays ascribed
until its annotation becomes redundant, so reduction never changes the
synthesised type of a term.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union as TypingUnion

from .locsets import (
    Kind,
    Loc,
    LocSet,
    Sng,
    TVar,
    Union,
    fv_set,
    locset_kinded,
    nec_in,
    set_equiv,
    show_locset,
    sng_chain,
)
from .names import fresh, memo_hash


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TInt:
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class TBool:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class TRep:
    """Type of local-type representations."""

    def __str__(self) -> str:
        return "tyrep"


@dataclass(frozen=True)
class TList:
    elem: LType

    def __str__(self) -> str:
        return show_ltype(self)


@dataclass(frozen=True)
class TLoc:
    """Representations of a single location drawn from `rho`."""

    rho: LocSet

    def __str__(self) -> str:
        return show_ltype(self)


@dataclass(frozen=True)
class TLocSet:
    """Representations of a set of locations drawn from `rho`."""

    rho: LocSet

    def __str__(self) -> str:
        return show_ltype(self)


@dataclass(frozen=True)
class TArrow:
    dom: LType
    cod: LType

    def __str__(self) -> str:
        return show_ltype(self)


@dataclass(frozen=True)
class TForall:
    var: str
    body: LType

    def __str__(self) -> str:
        return show_ltype(self)


LType = TypingUnion[TVar, TInt, TBool, TRep, TList, TLoc, TLocSet, TArrow, TForall]
LOCAL_TYPES = (TInt, TBool, TRep, TList, TLoc, TLocSet, TArrow, TForall)


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Fun:
    """Recursive function `fun f(x: dom): cod = body`; `f` is bound in `body`."""

    fname: str
    param: str
    dom: LType
    cod: LType
    body: Term


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term


@dataclass(frozen=True)
class TAbs:
    var: str
    body: Term


@dataclass(frozen=True)
class TApp:
    fn: Term
    ty: LType


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Add:
    left: Term
    right: Term


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Lt:
    left: Term
    right: Term


@dataclass(frozen=True)
class If:
    cond: Term
    then: Term
    orelse: Term


@dataclass(frozen=True)
class Nil:
    elem: LType


@dataclass(frozen=True)
class Cons:
    head: Term
    tail: Term


@dataclass(frozen=True)
class ListCase:
    """`case scrut of nil => if_nil | hd :: tl => if_cons`."""

    scrut: Term
    if_nil: Term
    hd: str
    tl: str
    if_cons: Term


@dataclass(frozen=True)
class RepInt:
    pass


@dataclass(frozen=True)
class RepBool:
    pass


@dataclass(frozen=True)
class RepArrow:
    dom: Term
    cod: Term


@dataclass(frozen=True)
class Ann:
    """Type ascription `(e : ty)`."""

    expr: Term
    ty: LType


Term = TypingUnion[
    Var, Fun, App, TAbs, TApp, Int, Bool, Add, Eq, Lt, If, Nil, Cons, ListCase,
    RepInt, RepBool, RepArrow, Ann,
]

memo_hash(Var, Fun, App, TAbs, TApp, Int, Bool, Add, Eq, Lt, If, Nil, Cons, ListCase,
          RepInt, RepBool, RepArrow, Ann, TList, TLoc, TLocSet, TArrow, TForall)
for _cls in (Var, Fun, App, TAbs, TApp, Int, Bool, Add, Eq, Lt, If, Nil, Cons,
             ListCase, RepInt, RepBool, RepArrow, Ann):
    _cls.__str__ = lambda self: show_term(self)  # type: ignore[method-assign]


# ---------------------------------------------------------------- location table


@dataclass(frozen=True)
class LocationTable:
    """Total map from integers to location names."""

    codes: tuple[tuple[int, str], ...]
    default: str
    extra: tuple[str, ...] = field(default=())

    @staticmethod
    def of(names: Sequence[str], default: str | None = None) -> LocationTable:
        """Code the i-th name as i; unmapped integers go to `default` (or the last name)."""
        names = list(names)
        if not names:
            raise ValueError("a location table needs at least one location")
        if default is None:
            default = names[-1]
        return LocationTable(tuple(enumerate(names)), default)

    def resolve(self, n: int) -> str:
        for code, name in self.codes:
            if code == n:
                return name
        return self.default

    def code_of(self, name: str) -> int | None:
        for code, loc in self.codes:
            if loc == name:
                return code
        if name == self.default:
            used = {c for c, _ in self.codes}
            n = 0
            while n in used:
                n += 1
            return n
        return None

    @property
    def locations(self) -> tuple[str, ...]:
        out: list[str] = []
        for _, name in self.codes:
            if name not in out:
                out.append(name)
        for name in (self.default, *self.extra):
            if name not in out:
                out.append(name)
        return tuple(out)


# ---------------------------------------------------------------- printing


def _show_set_suffix(prefix: str, rho: LocSet) -> str:
    if sng_chain(rho) is not None:
        return prefix + show_locset(rho)
    return f"{prefix}({show_locset(rho)})"


def show_ltype(t: LType, prec: int = 0) -> str:
    match t:
        case TVar(n):
            return n
        case TInt() | TBool() | TRep():
            return str(t)
        case TLoc(rho):
            return _show_set_suffix("loc", rho)
        case TLocSet(rho):
            return _show_set_suffix("locset", rho)
        case TList(a):
            s = "list " + show_ltype(a, 2)
            return f"({s})" if prec > 1 else s
        case TArrow(a, b):
            s = f"{show_ltype(a, 1)} -> {show_ltype(b, 0)}"
            return f"({s})" if prec > 0 else s
        case TForall(v, b):
            s = f"forall {v}. {show_ltype(b, 0)}"
            return f"({s})" if prec > 0 else s
    raise TypeError(f"not a local type: {t!r}")


def show_term(e: Term, prec: int = 0) -> str:
    def paren(s: str, level: int) -> str:
        return f"({s})" if prec > level else s

    match e:
        case Var(n):
            return n
        case Int(n):
            return str(n)
        case Bool(b):
            return "true" if b else "false"
        case Nil(t):
            return f"nil[{show_ltype(t)}]"
        case RepInt():
            return "rint"
        case RepBool():
            return "rbool"
        case RepArrow(a, b):
            return f"rarrow({show_term(a)}, {show_term(b)})"
        case Ann(x, t):
            return f"({show_term(x)} : {show_ltype(t)})"
        case Fun(f, x, a, b, body):
            return paren(f"fun {f}({x}: {show_ltype(a)}): {show_ltype(b)} = {show_term(body)}", 0)
        case TAbs(v, body):
            return paren(f"tfun {v} => {show_term(body)}", 0)
        case If(c, a, b):
            return paren(f"if {show_term(c)} then {show_term(a)} else {show_term(b)}", 0)
        case ListCase(s, n, h, t, c):
            return paren(
                f"case {show_term(s)} of nil => {show_term(n)} | {h} :: {t} => {show_term(c)}", 0
            )
        case Eq(a, b):
            return paren(f"{show_term(a, 2)} == {show_term(b, 2)}", 1)
        case Lt(a, b):
            return paren(f"{show_term(a, 2)} < {show_term(b, 2)}", 1)
        case Cons(a, b):
            return paren(f"{show_term(a, 3)} :: {show_term(b, 2)}", 2)
        case Add(a, b):
            return paren(f"{show_term(a, 3)} + {show_term(b, 4)}", 3)
        case App(f, a):
            return paren(f"{show_term(f, 4)} {show_term(a, 5)}", 4)
        case TApp(f, t):
            return paren(f"{show_term(f, 4)} [{show_ltype(t)}]", 4)
    raise TypeError(f"not a local term: {e!r}")


# ---------------------------------------------------------------- free variables


def ftv_ltype(t: LType) -> frozenset[str]:
    match t:
        case TVar(n):
            return frozenset({n})
        case TInt() | TBool() | TRep():
            return frozenset()
        case TLoc(rho) | TLocSet(rho):
            return fv_set(rho)
        case TList(a):
            return ftv_ltype(a)
        case TArrow(a, b):
            return ftv_ltype(a) | ftv_ltype(b)
        case TForall(v, b):
            return ftv_ltype(b) - {v}
    raise TypeError(f"not a local type: {t!r}")


def fv_term(e: Term) -> frozenset[str]:
    """Free local (term) variables."""
    match e:
        case Var(n):
            return frozenset({n})
        case Int() | Bool() | Nil() | RepInt() | RepBool():
            return frozenset()
        case Fun(f, x, _, _, body):
            return fv_term(body) - {f, x}
        case TAbs(_, body) | TApp(body, _) | Ann(body, _):
            return fv_term(body)
        case App(a, b) | Add(a, b) | Eq(a, b) | Lt(a, b) | Cons(a, b) | RepArrow(a, b):
            return fv_term(a) | fv_term(b)
        case If(c, a, b):
            return fv_term(c) | fv_term(a) | fv_term(b)
        case ListCase(s, n, h, t, c):
            return fv_term(s) | fv_term(n) | (fv_term(c) - {h, t})
    raise TypeError(f"not a local term: {e!r}")


def ftv_term(e: Term) -> frozenset[str]:
    """Free type variables, including those in location annotations."""
    match e:
        case Var() | Int() | Bool() | RepInt() | RepBool():
            return frozenset()
        case Nil(t):
            return ftv_ltype(t)
        case Fun(_, _, a, b, body):
            return ftv_ltype(a) | ftv_ltype(b) | ftv_term(body)
        case TAbs(v, body):
            return ftv_term(body) - {v}
        case TApp(body, t) | Ann(body, t):
            return ftv_term(body) | ftv_ltype(t)
        case App(a, b) | Add(a, b) | Eq(a, b) | Lt(a, b) | Cons(a, b) | RepArrow(a, b):
            return ftv_term(a) | ftv_term(b)
        case If(c, a, b):
            return ftv_term(c) | ftv_term(a) | ftv_term(b)
        case ListCase(s, n, _, _, c):
            return ftv_term(s) | ftv_term(n) | ftv_term(c)
    raise TypeError(f"not a local term: {e!r}")


def names_in_term(e: Term) -> frozenset[str]:
    """Every term-variable name occurring in `e`, bound or free."""
    match e:
        case Var(n):
            return frozenset({n})
        case Fun(f, x, _, _, body):
            return names_in_term(body) | {f, x}
        case ListCase(s, n, h, t, c):
            return names_in_term(s) | names_in_term(n) | names_in_term(c) | {h, t}
        case _:
            return fv_term(e) | frozenset().union(*(names_in_term(c) for c in _children(e)))


def _children(e: Term) -> tuple[Term, ...]:
    match e:
        case TAbs(_, b) | TApp(b, _) | Ann(b, _):
            return (b,)
        case App(a, b) | Add(a, b) | Eq(a, b) | Lt(a, b) | Cons(a, b) | RepArrow(a, b):
            return (a, b)
        case If(c, a, b):
            return (c, a, b)
        case Fun(_, _, _, _, b):
            return (b,)
        case ListCase(s, n, _, _, c):
            return (s, n, c)
    return ()


# ---------------------------------------------------------------- substitution


def subst_locset(rho: LocSet, var: str, t) -> LocSet:
    """Replace variable `var` inside a location set by a location or location set.

    `{var}` with a location becomes `{t}`; `{var}` with a set collapses to the set.
    """
    match rho:
        case TVar(n):
            if n != var:
                return rho
            return Sng(t) if isinstance(t, Loc) else t
        case Sng(TVar(n)) if n == var:
            return Sng(t) if isinstance(t, (Loc, TVar)) else t
        case Sng():
            return rho
        case Union(a, b):
            return Union(subst_locset(a, var, t), subst_locset(b, var, t))
    raise TypeError(f"not a location set: {rho!r}")


def subst_loc(loc, var: str, t):
    """Substitute into a location expression (sender positions and the like)."""
    if isinstance(loc, TVar) and loc.name == var:
        return t
    return loc


def lsubst_ltype(t: LType, var: str, s) -> LType:
    """`t[var := s]` for a local type, a location or a location set `s`."""
    match t:
        case TVar(n):
            return s if n == var else t
        case TInt() | TBool() | TRep():
            return t
        case TLoc(rho):
            return TLoc(subst_locset(rho, var, s))
        case TLocSet(rho):
            return TLocSet(subst_locset(rho, var, s))
        case TList(a):
            return TList(lsubst_ltype(a, var, s))
        case TArrow(a, b):
            return TArrow(lsubst_ltype(a, var, s), lsubst_ltype(b, var, s))
        case TForall(v, b):
            if v == var:
                return t
            if v in _ftv_any(s):
                v2 = fresh(v, ftv_ltype(b) | _ftv_any(s) | {var})
                b = lsubst_ltype(b, v, TVar(v2))
                v = v2
            return TForall(v, lsubst_ltype(b, var, s))
    raise TypeError(f"not a local type: {t!r}")


def _ftv_any(s) -> frozenset[str]:
    if isinstance(s, LOCAL_TYPES) or isinstance(s, TVar):
        return ftv_ltype(s)
    return fv_set(s)


def lsubst_type(e: Term, var: str, s) -> Term:
    """Substitute a type (or location, or location set) for `var` throughout a term."""

    def go(x: Term) -> Term:
        return lsubst_type(x, var, s)

    def ty(t: LType) -> LType:
        return lsubst_ltype(t, var, s)

    match e:
        case Var() | Int() | Bool() | RepInt() | RepBool():
            return e
        case Nil(t):
            return Nil(ty(t))
        case Fun(f, x, a, b, body):
            return Fun(f, x, ty(a), ty(b), go(body))
        case TAbs(v, body):
            if v == var:
                return e
            if v in _ftv_any(s):
                v2 = fresh(v, ftv_term(body) | _ftv_any(s) | {var})
                body = lsubst_type(body, v, TVar(v2))
                v = v2
            return TAbs(v, go(body))
        case TApp(f, t):
            return TApp(go(f), ty(t))
        case Ann(x, t):
            return Ann(go(x), ty(t))
        case App(a, b):
            return App(go(a), go(b))
        case Add(a, b):
            return Add(go(a), go(b))
        case Eq(a, b):
            return Eq(go(a), go(b))
        case Lt(a, b):
            return Lt(go(a), go(b))
        case Cons(a, b):
            return Cons(go(a), go(b))
        case RepArrow(a, b):
            return RepArrow(go(a), go(b))
        case If(c, a, b):
            return If(go(c), go(a), go(b))
        case ListCase(sc, n, h, t, c):
            return ListCase(go(sc), go(n), h, t, go(c))
    raise TypeError(f"not a local term: {e!r}")


def lsubst_term(e: Term, x: str, v: Term) -> Term:
    """Capture-avoiding `e[x := v]`."""
    if x not in fv_term(e):
        return e

    def go(t: Term) -> Term:
        return lsubst_term(t, x, v)

    match e:
        case Var(n):
            return v if n == x else e
        case Fun(f, p, a, b, body):
            if x in (f, p):
                return e
            fv_v = fv_term(v)
            avoid = fv_v | names_in_term(body) | {x}
            if f in fv_v:
                f2 = fresh(f, avoid | {p})
                body = lsubst_term(body, f, Var(f2))
                avoid |= {f2}
                f = f2
            if p in fv_v:
                p2 = fresh(p, avoid | {f})
                body = lsubst_term(body, p, Var(p2))
                p = p2
            return Fun(f, p, a, b, go(body))
        case ListCase(s, n, h, t, c):
            if x in (h, t):
                return ListCase(go(s), go(n), h, t, c)
            fv_v = fv_term(v)
            avoid = fv_v | names_in_term(c) | {x}
            if h in fv_v:
                h2 = fresh(h, avoid | {t})
                c = lsubst_term(c, h, Var(h2))
                avoid |= {h2}
                h = h2
            if t in fv_v:
                t2 = fresh(t, avoid | {h})
                c = lsubst_term(c, t, Var(t2))
                t = t2
            return ListCase(go(s), go(n), h, t, go(c))
        case TAbs(a, body):
            return TAbs(a, go(body))
        case TApp(f, t):
            return TApp(go(f), t)
        case Ann(y, t):
            return Ann(go(y), t)
        case App(a, b):
            return App(go(a), go(b))
        case Add(a, b):
            return Add(go(a), go(b))
        case Eq(a, b):
            return Eq(go(a), go(b))
        case Lt(a, b):
            return Lt(go(a), go(b))
        case Cons(a, b):
            return Cons(go(a), go(b))
        case RepArrow(a, b):
            return RepArrow(go(a), go(b))
        case If(c, a, b):
            return If(go(c), go(a), go(b))
    raise TypeError(f"not a local term: {e!r}")


# ---------------------------------------------------------------- kinding and type equality


def lkind(gamma: Mapping[str, Kind], t: LType) -> bool:
    match t:
        case TVar(n):
            return gamma.get(n) is Kind.LOCAL
        case TInt() | TBool() | TRep():
            return True
        case TLoc(rho) | TLocSet(rho):
            return locset_kinded(gamma, rho)
        case TList(a):
            return lkind(gamma, a)
        case TArrow(a, b):
            return lkind(gamma, a) and lkind(gamma, b)
        case TForall(v, b):
            return lkind({**gamma, v: Kind.LOCAL}, b)
    return False


def ltype_eq(a: LType, b: LType) -> bool:
    """Structural equality up to renaming of `forall` binders and set equivalence."""
    match a, b:
        case TVar(x), TVar(y):
            return x == y
        case TInt(), TInt():
            return True
        case TBool(), TBool():
            return True
        case TRep(), TRep():
            return True
        case TLoc(r1), TLoc(r2):
            return set_equiv(r1, r2)
        case TLocSet(r1), TLocSet(r2):
            return set_equiv(r1, r2)
        case TList(x), TList(y):
            return ltype_eq(x, y)
        case TArrow(a1, b1), TArrow(a2, b2):
            return ltype_eq(a1, a2) and ltype_eq(b1, b2)
        case TForall(v1, b1), TForall(v2, b2):
            if v1 == v2:
                return ltype_eq(b1, b2)
            v = fresh(v1, ftv_ltype(b1) | ftv_ltype(b2) | {v1, v2})
            return ltype_eq(lsubst_ltype(b1, v1, TVar(v)), lsubst_ltype(b2, v2, TVar(v)))
    return False


# ---------------------------------------------------------------- typing


class LocalTypeError(Exception):
    pass


LocalCtx = tuple[tuple[str, LType], ...]


def _lookup(sigma: Sequence[tuple[str, LType]], x: str) -> LType:
    for name, t in reversed(sigma):
        if name == x:
            return t
    raise LocalTypeError(f"unbound local variable {x}")


def _need_kind(gamma: Mapping[str, Kind], t: LType) -> None:
    if not lkind(gamma, t):
        raise LocalTypeError(f"ill-formed local type {show_ltype(t)}")


def infer(gamma: Mapping[str, Kind], sigma: Sequence[tuple[str, LType]], e: Term,
          table: LocationTable) -> LType:
    """Synthesise the type of `e`; raises LocalTypeError."""
    match e:
        case Var(x):
            return _lookup(sigma, x)
        case Int():
            return TInt()
        case Bool():
            return TBool()
        case RepInt() | RepBool():
            return TRep()
        case RepArrow(a, b):
            check(gamma, sigma, a, TRep(), table)
            check(gamma, sigma, b, TRep(), table)
            return TRep()
        case Nil(t):
            _need_kind(gamma, t)
            return TList(t)
        case Cons(h, tl):
            th = infer(gamma, sigma, h, table)
            check(gamma, sigma, tl, TList(th), table)
            return TList(th)
        case Add(a, b):
            check(gamma, sigma, a, TInt(), table)
            check(gamma, sigma, b, TInt(), table)
            return TInt()
        case Lt(a, b):
            check(gamma, sigma, a, TInt(), table)
            check(gamma, sigma, b, TInt(), table)
            return TBool()
        case Eq(a, b):
            ta = infer(gamma, sigma, a, table)
            if not isinstance(ta, (TInt, TBool)):
                raise LocalTypeError(f"equality on {show_ltype(ta)}")
            check(gamma, sigma, b, ta, table)
            return TBool()
        case If(c, a, b):
            check(gamma, sigma, c, TBool(), table)
            ta = infer(gamma, sigma, a, table)
            check(gamma, sigma, b, ta, table)
            return ta
        case ListCase(s, n, h, t, c):
            ts = infer(gamma, sigma, s, table)
            if not isinstance(ts, TList):
                raise LocalTypeError(f"list case on {show_ltype(ts)}")
            tn = infer(gamma, sigma, n, table)
            check(gamma, (*sigma, (h, ts.elem), (t, ts)), c, tn, table)
            return tn
        case Fun(f, x, a, b, body):
            _need_kind(gamma, a)
            _need_kind(gamma, b)
            ft = TArrow(a, b)
            check(gamma, (*sigma, (f, ft), (x, a)), body, b, table)
            return ft
        case App(f, a):
            tf = infer(gamma, sigma, f, table)
            if not isinstance(tf, TArrow):
                raise LocalTypeError(f"applying a non-function of type {show_ltype(tf)}")
            check(gamma, sigma, a, tf.dom, table)
            return tf.cod
        case TAbs(v, body):
            return TForall(v, infer({**gamma, v: Kind.LOCAL}, sigma, body, table))
        case TApp(f, t):
            tf = infer(gamma, sigma, f, table)
            if not isinstance(tf, TForall):
                raise LocalTypeError(f"type application of {show_ltype(tf)}")
            _need_kind(gamma, t)
            return lsubst_ltype(tf.body, tf.var, t)
        case Ann(x, t):
            _need_kind(gamma, t)
            check(gamma, sigma, x, t, table)
            return t
    raise LocalTypeError(f"not a local term: {e!r}")


def check(gamma: Mapping[str, Kind], sigma: Sequence[tuple[str, LType]], e: Term,
          t: LType, table: LocationTable) -> None:
    """Check `e` against `t`; raises LocalTypeError."""
    match e, t:
        case Int(n), TLoc(rho):
            if not nec_in(Loc(table.resolve(n)), rho):
                raise LocalTypeError(
                    f"{n} represents {table.resolve(n)}, which is not in {show_locset(rho)}"
                )
            return
        case Cons(h, tl), TLocSet(rho):
            check(gamma, sigma, h, TLoc(rho), table)
            if isinstance(tl, Nil):
                _need_kind(gamma, tl.elem)
            else:
                check(gamma, sigma, tl, t, table)
            return
        case Cons(h, tl), TList(el):
            check(gamma, sigma, h, el, table)
            check(gamma, sigma, tl, t, table)
            return
        case If(c, a, b), _:
            check(gamma, sigma, c, TBool(), table)
            check(gamma, sigma, a, t, table)
            check(gamma, sigma, b, t, table)
            return
        case ListCase(s, n, h, tv, c), _:
            ts = infer(gamma, sigma, s, table)
            if not isinstance(ts, TList):
                raise LocalTypeError(f"list case on {show_ltype(ts)}")
            check(gamma, sigma, n, t, table)
            check(gamma, (*sigma, (h, ts.elem), (tv, ts)), c, t, table)
            return
    got = infer(gamma, sigma, e, table)
    if not ltype_eq(got, t):
        raise LocalTypeError(f"expected {show_ltype(t)} but {show_term(e)} has type {show_ltype(got)}")


def ltype(gamma: Mapping[str, Kind], sigma: Sequence[tuple[str, LType]], e: Term,
          table: LocationTable, expected: LType | None = None) -> LType | None:
    """The type of `e` (checked against `expected` when given), or None if ill-typed."""
    try:
        if expected is None:
            return infer(gamma, sigma, e, table)
        check(gamma, sigma, e, expected, table)
        return expected
    except LocalTypeError:
        return None


# ---------------------------------------------------------------- values and reduction


def value_type(v: Term) -> LType | None:
    """Type a value synthesises by its shape alone (None when that needs more context)."""
    match v:
        case Int():
            return TInt()
        case Bool():
            return TBool()
        case RepInt() | RepBool() | RepArrow():
            return TRep()
        case Nil(t):
            return TList(t)
        case Cons(h, tl):
            th, tt = value_type(h), value_type(tl)
            if th is not None and tt is not None and ltype_eq(tt, TList(th)):
                return tt
            return None
        case Fun(_, _, a, b, _):
            return TArrow(a, b)
        case Ann(_, t):
            return t
    return None


def _redundant(v: Term, t: LType) -> bool:
    vt = value_type(v)
    return vt is not None and ltype_eq(vt, t)


def is_lvalue(e: Term) -> bool:
    match e:
        case Int() | Bool() | Nil() | Fun() | TAbs() | RepInt() | RepBool():
            return True
        case Cons(h, t) | RepArrow(h, t):
            return is_lvalue(h) and is_lvalue(t)
        case Ann(x, t):
            return is_lvalue(x) and not _redundant(x, t)
    return False


def wrap(v: Term, t: LType) -> Term:
    """Ascribe `v` with `t` unless it already synthesises `t`."""
    return v if _redundant(v, t) else Ann(v, t)


def strip(v: Term) -> Term:
    while isinstance(v, Ann):
        v = v.expr
    return v


def lstep(e: Term) -> Term | None:
    """One call-by-value, left-to-right step, or None for values and stuck terms."""

    def binary(a: Term, b: Term, rebuild, delta) -> Term | None:
        if not is_lvalue(a):
            a2 = lstep(a)
            return None if a2 is None else rebuild(a2, b)
        if not is_lvalue(b):
            b2 = lstep(b)
            return None if b2 is None else rebuild(a, b2)
        return delta(strip(a), strip(b))

    match e:
        case Var() | Int() | Bool() | Nil() | Fun() | TAbs() | RepInt() | RepBool():
            return None
        case Add(a, b):
            def add(x, y):
                if isinstance(x, Int) and isinstance(y, Int):
                    return Int(x.value + y.value)
                return None
            return binary(a, b, Add, add)
        case Lt(a, b):
            def lt(x, y):
                if isinstance(x, Int) and isinstance(y, Int):
                    return Bool(x.value < y.value)
                return None
            return binary(a, b, Lt, lt)
        case Eq(a, b):
            def eq(x, y):
                if type(x) is type(y) and isinstance(x, (Int, Bool)):
                    return Bool(x.value == y.value)
                return None
            return binary(a, b, Eq, eq)
        case Cons(a, b):
            return binary(a, b, Cons, lambda x, y: None)
        case RepArrow(a, b):
            return binary(a, b, RepArrow, lambda x, y: None)
        case App(f, a):
            def beta(fn, arg):
                if not isinstance(fn, Fun):
                    return None
                body = lsubst_term(fn.body, fn.fname, fn)
                body = lsubst_term(body, fn.param, wrap(arg, fn.dom))
                return Ann(body, fn.cod)
            if not is_lvalue(f):
                f2 = lstep(f)
                return None if f2 is None else App(f2, a)
            if not is_lvalue(a):
                a2 = lstep(a)
                return None if a2 is None else App(f, a2)
            return beta(strip(f), a)
        case TApp(f, t):
            if not is_lvalue(f):
                f2 = lstep(f)
                return None if f2 is None else TApp(f2, t)
            fn = strip(f)
            if isinstance(fn, TAbs):
                return lsubst_type(fn.body, fn.var, t)
            return None
        case If(c, a, b):
            if not is_lvalue(c):
                c2 = lstep(c)
                return None if c2 is None else If(c2, a, b)
            cv = strip(c)
            if isinstance(cv, Bool):
                return a if cv.value else b
            return None
        case ListCase(s, n, h, t, c):
            if not is_lvalue(s):
                s2 = lstep(s)
                return None if s2 is None else ListCase(s2, n, h, t, c)
            sv = strip(s)
            if isinstance(sv, Nil):
                return n
            if isinstance(sv, Cons):
                hd, tl = sv.head, sv.tail
                if isinstance(s, Ann) and isinstance(s.ty, TList):
                    hd, tl = wrap(hd, s.ty.elem), wrap(tl, s.ty)
                return lsubst_term(lsubst_term(c, h, hd), t, tl)
            return None
        case Ann(x, t):
            if isinstance(x, Ann) and ltype_eq(x.ty, t):
                return x
            if not is_lvalue(x):
                x2 = lstep(x)
                return None if x2 is None else Ann(x2, t)
            return x if _redundant(x, t) else None
    return None


# ---------------------------------------------------------------- reification


class ReificationError(Exception):
    """A value did not have the shape its type promised (an internal soundness bug)."""


def reify_bool(v: Term) -> bool:
    v = strip(v)
    if isinstance(v, Bool):
        return v.value
    raise ReificationError(f"not a boolean value: {show_term(v)}")


def reify_loc(v: Term, table: LocationTable) -> str:
    v = strip(v)
    if isinstance(v, Int):
        return table.resolve(v.value)
    raise ReificationError(f"not a location representation: {show_term(v)}")


def reify_locset(v: Term, table: LocationTable) -> tuple[str, ...]:
    """Locations coded by a non-empty list, in first-occurrence order."""
    out: list[str] = []
    v = strip(v)
    while isinstance(v, Cons):
        name = reify_loc(v.head, table)
        if name not in out:
            out.append(name)
        v = strip(v.tail)
    if not isinstance(v, Nil) or not out:
        raise ReificationError("not a non-empty list of location representations")
    return tuple(out)


def reify_tyrep(v: Term) -> LType:
    v = strip(v)
    match v:
        case RepInt():
            return TInt()
        case RepBool():
            return TBool()
        case RepArrow(a, b):
            return TArrow(reify_tyrep(a), reify_tyrep(b))
    raise ReificationError(f"not a type representation: {show_term(v)}")


def run_local(e: Term, fuel: int = 1000) -> tuple[Term, int]:
    """Step `e` until it stops or `fuel` runs out; returns the final term and steps taken."""
    n = 0
    while n < fuel:
        nxt = lstep(e)
        if nxt is None:
            break
        e = nxt
        n += 1
    return e, n


# ---------------------------------------------------------------- set rewriting


def map_ltype_sets(t: LType, f) -> LType:
    """Apply `f` to every location set inside a local type."""
    match t:
        case TLoc(rho):
            return TLoc(f(rho))
        case TLocSet(rho):
            return TLocSet(f(rho))
        case TList(a):
            return TList(map_ltype_sets(a, f))
        case TArrow(a, b):
            return TArrow(map_ltype_sets(a, f), map_ltype_sets(b, f))
        case TForall(v, b):
            return TForall(v, map_ltype_sets(b, f))
    return t


def map_term_sets(e: Term, f) -> Term:
    """Apply `f` to every location set inside the type annotations of a term."""

    def go(x: Term) -> Term:
        return map_term_sets(x, f)

    def ty(t: LType) -> LType:
        return map_ltype_sets(t, f)

    match e:
        case Var() | Int() | Bool() | RepInt() | RepBool():
            return e
        case Nil(t):
            return Nil(ty(t))
        case Fun(g, x, a, b, body):
            return Fun(g, x, ty(a), ty(b), go(body))
        case TAbs(v, body):
            return TAbs(v, go(body))
        case TApp(g, t):
            return TApp(go(g), ty(t))
        case Ann(x, t):
            return Ann(go(x), ty(t))
        case App(a, b):
            return App(go(a), go(b))
        case Add(a, b):
            return Add(go(a), go(b))
        case Eq(a, b):
            return Eq(go(a), go(b))
        case Lt(a, b):
            return Lt(go(a), go(b))
        case Cons(a, b):
            return Cons(go(a), go(b))
        case RepArrow(a, b):
            return RepArrow(go(a), go(b))
        case If(c, a, b):
            return If(go(c), go(a), go(b))
        case ListCase(s, n, h, t, c):
            return ListCase(go(s), go(n), h, t, go(c))
    raise TypeError(f"not a local term: {e!r}")
