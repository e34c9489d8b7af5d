"""Endpoint projection, merging of branch projections, and the `leq` ordering.

`leq(E1, E2)` holds when E2 may still contain code E1 has already discarded:
finished prefixes (`V; E`) and choice branches nobody will select.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import local as lc
from .chor import (
    At, Arrow, Case, Chor, ChorApp, ChorFun, ChorType, ChorVar, Done, Fold, Forall, Fst, Inl,
    Inr, Ite, LetLocal, LetType, Mu, Pair, Prod, Send, Snd, Sum, Sync, TyAbs, TyApp, Unfold,
    local_occurrences, named_locs, subst_type,
)
from .locsets import Kind, Loc, LocSet, Sng, TVar, Union, canonical, nec_in, subset
from .network import (
    NAllow, NAmIIn, NApp, NCase, NChoose, NFold, NFst, NFun, NIf, NInl, NInr, NLet, NLetType,
    NPair, NRecv, NRet, NSendTo, NSeq, NSnd, NTyAbs, NTyApp, NUnfold, NUnit, NVar, Net, System,
    ftv_net, fv_net_local, is_net_value, net_map,
)

MERGE_UNDEFINED = "merge-undefined"
FREE_TYPEVAR = "free-typevar-in-body"
NAMESPACE_UNRESOLVED = "namespace-variable-unresolved"


class ProjectionFailure(Exception):
    """Projection is undefined; `path` lists child indices from the root to the failing node."""

    def __init__(self, reason: str, path: tuple[int, ...] = (), detail: str = "") -> None:
        where = "/".join(map(str, path)) or "root"
        super().__init__(f"{reason} at {where}" + (f": {detail}" if detail else ""))
        self.reason = reason
        self.path = path
        self.detail = detail

    def under(self, index: int) -> ProjectionFailure:
        return ProjectionFailure(self.reason, (index, *self.path), self.detail)


# ---------------------------------------------------------------- merge and sequencing


def seq_collapse(first: Net, second: Net) -> Net:
    """`first; second`, dropping a first half that has nothing left to do."""
    return second if is_net_value(first) else NSeq(first, second)


def merge(a: Net, b: Net) -> Net | None:
    """Combine the projections of two branches, or None when they disagree."""
    try:
        return _merge(a, b)
    except _Mismatch:
        return None


class _Mismatch(Exception):
    pass


def _merge_opt(a: Net | None, b: Net | None) -> Net | None:
    if a is None:
        return b
    if b is None:
        return a
    return _merge(a, b)


def _merge(a: Net, b: Net) -> Net:
    m = _merge
    match a, b:
        case NVar(x), NVar(y) if x == y:
            return a
        case NUnit(), NUnit():
            return a
        case NRet(x), NRet(y) if x == y:
            return a
        case NRecv(x), NRecv(y) if x == y:
            return a
        case NSeq(a1, a2), NSeq(b1, b2):
            return NSeq(m(a1, b1), m(a2, b2))
        case NFun(f, x, a1), NFun(g, y, b1) if (f, x) == (g, y):
            return NFun(f, x, m(a1, b1))
        case NApp(a1, a2), NApp(b1, b2):
            return NApp(m(a1, b1), m(a2, b2))
        case NTyAbs(v, k, a1), NTyAbs(w, j, b1) if (v, k) == (w, j):
            return NTyAbs(v, k, m(a1, b1))
        case NTyApp(a1, t), NTyApp(b1, s) if t == s:
            return NTyApp(m(a1, b1), t)
        case NFold(a1), NFold(b1):
            return NFold(m(a1, b1))
        case NUnfold(a1), NUnfold(b1):
            return NUnfold(m(a1, b1))
        case NPair(a1, a2), NPair(b1, b2):
            return NPair(m(a1, b1), m(a2, b2))
        case NFst(a1), NFst(b1):
            return NFst(m(a1, b1))
        case NSnd(a1), NSnd(b1):
            return NSnd(m(a1, b1))
        case NInl(a1), NInl(b1):
            return NInl(m(a1, b1))
        case NInr(a1), NInr(b1):
            return NInr(m(a1, b1))
        case NCase(s1, x, l1, y, r1), NCase(s2, x2, l2, y2, r2) if (x, y) == (x2, y2):
            return NCase(m(s1, s2), x, m(l1, l2), y, m(r1, r2))
        case NLet(x, t, a1, a2), NLet(y, s, b1, b2) if (x, t) == (y, s):
            return NLet(x, t, m(a1, b1), m(a2, b2))
        case NLetType(v, k, a1, a2), NLetType(w, j, b1, b2) if (v, k) == (w, j):
            return NLetType(v, k, m(a1, b1), m(a2, b2))
        case NSendTo(a1, r), NSendTo(b1, s) if r == s:
            return NSendTo(m(a1, b1), r)
        case NChoose(d, r, a1), NChoose(e, s, b1) if (d, r) == (e, s):
            return NChoose(d, r, m(a1, b1))
        case NAllow(l, a1, a2), NAllow(k, b1, b2) if l == k:
            return NAllow(l, _merge_opt(a1, b1), _merge_opt(a2, b2))
        case NIf(c1, a1, a2), NIf(c2, b1, b2):
            return NIf(m(c1, c2), m(a1, b1), m(a2, b2))
        case NAmIIn(r, a1, a2), NAmIIn(s, b1, b2) if r == s:
            return NAmIIn(r, m(a1, b1), m(a2, b2))
    raise _Mismatch


# ---------------------------------------------------------------- projection


def project(c: Chor, loc: str) -> Net:
    """The program location `loc` runs for choreography `c`; raises ProjectionFailure."""
    return _project(c, loc)


def try_project(c: Chor, loc: str) -> Net | None:
    try:
        return _project(c, loc)
    except ProjectionFailure:
        return None


def project_system(c: Chor, locations) -> System:
    """Project onto every location; raises ValueError for an empty location list."""
    locs = tuple(locations)
    if not locs:
        raise ValueError("a system needs at least one location")
    return tuple((l, _project(c, l)) for l in locs)


def _member(loc: str, rho: LocSet) -> bool:
    return nec_in(Loc(loc), rho)


def _with_loc(var: str, loc: str, body: Chor, kind: Kind) -> Chor:
    """The body as seen by `loc` once it knows it belongs to the bound location or set."""
    if kind is Kind.LOC:
        return subst_type(body, var, Loc(loc))
    return subst_type(body, var, Union(Sng(Loc(loc)), TVar(var)))


def _am_i(var: str, kind: Kind, yes: Net, no: Net) -> Net:
    return NAmIIn(Sng(TVar(var)) if kind is Kind.LOC else TVar(var), yes, no)


@lru_cache(maxsize=100_000)
def _project(c: Chor, loc: str) -> Net:
    def sub(i: int, x: Chor) -> Net:
        try:
            return _project(x, loc)
        except ProjectionFailure as err:
            raise err.under(i) from None

    match c:
        case ChorVar(n):
            return NVar(n)
        case Done(rho, e):
            return NRet(e) if _member(loc, rho) else NUnit()
        case ChorFun(f, x, _, _, body):
            return NFun(f, x, sub(0, body))
        case ChorApp(f, a):
            return NApp(sub(0, f), sub(1, a))
        case TyAbs(v, k, body):
            if k in (Kind.LOC, Kind.LOCSET):
                yes = sub(0, _with_loc(v, loc, body, k))
                return NTyAbs(v, k, _am_i(v, k, yes, sub(0, body)))
            return NTyAbs(v, k, sub(0, body))
        case TyApp(f, t):
            return NTyApp(sub(0, f), t)
        case Fold(_, b):
            return NFold(sub(0, b))
        case Unfold(b):
            return NUnfold(sub(0, b))
        case Pair(a, b):
            return NPair(sub(0, a), sub(1, b))
        case Fst(b):
            return NFst(sub(0, b))
        case Snd(b):
            return NSnd(sub(0, b))
        case Inl(_, b):
            return NInl(sub(0, b))
        case Inr(_, b):
            return NInr(sub(0, b))
        case Case(s, x, l, y, r):
            return NCase(sub(0, s), x, sub(1, l), y, sub(2, r))
        case Send(b, sender, dest):
            inner = sub(0, b)
            if sender == Loc(loc):
                return NSendTo(inner, dest)
            if _member(loc, dest):
                return seq_collapse(inner, NRecv(sender))
            return inner
        case Sync(sender, d, dest, b):
            inner = sub(0, b)
            if sender == Loc(loc):
                return NChoose(d, dest, inner)
            if _member(loc, dest):
                return NAllow(sender, inner, None) if d == "L" else NAllow(sender, None, inner)
            return inner
        case Ite(rho, cond, then, orelse):
            pc, p1, p2 = sub(0, cond), sub(1, then), sub(2, orelse)
            if _member(loc, rho):
                return NIf(pc, p1, p2)
            joined = merge(p1, p2)
            if joined is None:
                raise ProjectionFailure(MERGE_UNDEFINED, (), f"branches differ at {loc}")
            return seq_collapse(pc, joined)
        case LetLocal(rho, x, t, bound, body):
            pb, pbody = sub(0, bound), sub(1, body)
            if _member(loc, rho):
                for r, y in local_occurrences(body):
                    if y == x and not subset(r, rho) and _member(loc, r):
                        raise ProjectionFailure(
                            NAMESPACE_UNRESOLVED, (1,),
                            f"{x} at {loc} would refer to the inner binding",
                        )
                return NLet(x, t, pb, pbody)
            if x in fv_net_local(pbody):
                raise ProjectionFailure(NAMESPACE_UNRESOLVED, (1,),
                                        f"{loc} uses {x} without binding it")
            return seq_collapse(pb, pbody)
        case LetType(rho, v, k, bound, body):
            pb = sub(0, bound)
            if _member(loc, rho):
                if k is Kind.LOCAL:
                    return NLetType(v, k, pb, sub(1, body))
                yes = sub(1, _with_loc(v, loc, body, k))
                return NLetType(v, k, pb, _am_i(v, k, yes, sub(1, body)))
            pbody = sub(1, body)
            if v in ftv_net(pbody):
                raise ProjectionFailure(FREE_TYPEVAR, (1,),
                                        f"{loc} needs {v} but does not bind it")
            return seq_collapse(pb, pbody)
    raise TypeError(f"not a choreography: {c!r}")


# ---------------------------------------------------------------- the leq ordering


def canon_type(t: ChorType) -> ChorType:
    match t:
        case At(te, rho):
            return At(lc.map_ltype_sets(te, canonical), canonical(rho))
        case Arrow(a, b):
            return Arrow(canon_type(a), canon_type(b))
        case Prod(a, b):
            return Prod(canon_type(a), canon_type(b))
        case Sum(a, b):
            return Sum(canon_type(a), canon_type(b))
        case Forall(v, k, b):
            return Forall(v, k, canon_type(b))
        case Mu(v, b):
            return Mu(v, canon_type(b))
        case Sng() | Union():
            return canonical(t)
    if isinstance(t, lc.LOCAL_TYPES):
        return lc.map_ltype_sets(t, canonical)
    return t


@lru_cache(maxsize=200_000)
def canon_net(e: Net | None) -> Net | None:
    """Rewrite ground location sets everywhere into canonical sorted form."""
    match e:
        case None:
            return None
        case NRet(x):
            return NRet(lc.map_term_sets(x, canonical))
        case NTyApp(f, t):
            return NTyApp(canon_net(f), canon_type(t))
        case NSendTo(b, rho):
            return NSendTo(canon_net(b), canonical(rho))
        case NChoose(d, rho, b):
            return NChoose(d, canonical(rho), canon_net(b))
        case NAmIIn(rho, a, b):
            return NAmIIn(canonical(rho), canon_net(a), canon_net(b))
        case NLet(x, t, a, b):
            return NLet(x, lc.map_ltype_sets(t, canonical), canon_net(a), canon_net(b))
    return net_map(e, canon_net)


def leq(a: Net | None, b: Net | None) -> bool:
    """`a` is `b` with some finished prefixes or unselectable branches removed."""
    return _leq(canon_net(a), canon_net(b))


@lru_cache(maxsize=200_000)
def _leq(a: Net | None, b: Net | None) -> bool:
    if a is None:
        return True
    if b is None:
        return False
    if isinstance(b, NSeq) and is_net_value(b.first) and _leq(a, b.second):
        return True
    match a, b:
        case NVar(x), NVar(y):
            return x == y
        case NUnit(), NUnit():
            return True
        case NRet(x), NRet(y):
            return x == y
        case NRecv(x), NRecv(y):
            return x == y
        case NSeq(a1, a2), NSeq(b1, b2):
            return _leq(a1, b1) and _leq(a2, b2)
        case NFun(f, x, a1), NFun(g, y, b1):
            return (f, x) == (g, y) and _leq(a1, b1)
        case NApp(a1, a2), NApp(b1, b2):
            return _leq(a1, b1) and _leq(a2, b2)
        case NTyAbs(v, k, a1), NTyAbs(w, j, b1):
            return (v, k) == (w, j) and _leq(a1, b1)
        case NTyApp(a1, t), NTyApp(b1, s):
            return t == s and _leq(a1, b1)
        case (NFold(a1), NFold(b1)) | (NUnfold(a1), NUnfold(b1)) | (NFst(a1), NFst(b1)):
            return _leq(a1, b1)
        case (NSnd(a1), NSnd(b1)) | (NInl(a1), NInl(b1)) | (NInr(a1), NInr(b1)):
            return _leq(a1, b1)
        case NPair(a1, a2), NPair(b1, b2):
            return _leq(a1, b1) and _leq(a2, b2)
        case NCase(s1, x, l1, y, r1), NCase(s2, x2, l2, y2, r2):
            return (x, y) == (x2, y2) and _leq(s1, s2) and _leq(l1, l2) and _leq(r1, r2)
        case NLet(x, t, a1, a2), NLet(y, s, b1, b2):
            return (x, t) == (y, s) and _leq(a1, b1) and _leq(a2, b2)
        case NLetType(v, k, a1, a2), NLetType(w, j, b1, b2):
            return (v, k) == (w, j) and _leq(a1, b1) and _leq(a2, b2)
        case NSendTo(a1, r), NSendTo(b1, s):
            return r == s and _leq(a1, b1)
        case NChoose(d, r, a1), NChoose(e, s, b1):
            return (d, r) == (e, s) and _leq(a1, b1)
        case NAllow(l, a1, a2), NAllow(k, b1, b2):
            return l == k and _leq(a1, b1) and _leq(a2, b2)
        case NIf(c1, a1, a2), NIf(c2, b1, b2):
            return _leq(c1, c2) and _leq(a1, b1) and _leq(a2, b2)
        case NAmIIn(r, a1, a2), NAmIIn(s, b1, b2):
            return r == s and _leq(a1, b1) and _leq(a2, b2)
    return False


def leq_system(a: System, b: System) -> bool:
    return [l for l, _ in a] == [l for l, _ in b] and all(
        leq(x, y) for (_, x), (_, y) in zip(a, b)
    )


def located_everywhere(c: Chor, locations) -> bool:
    """Every location the choreography names is part of the system."""
    return named_locs(c) <= set(locations)
