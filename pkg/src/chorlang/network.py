"""Per-location network programs, their labelled transitions, and whole systems.

A receive cannot know its message in advance, so a receiving step is offered
symbolically: `RecvOffer` carries a function from the incoming message to the
continuation, and only the system layer (the Comm rule) supplies the message.
"""

from __future__ import annotations

import random
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Union as TypingUnion

from . import local as lc
from .chor import KIND_NAMES, ChorType, ftv_type, show_type, subst_in_type
from .locsets import Kind, Loc, LocSet, Sng, TVar, fv_set, named_locs, show_locset
from .names import fresh, memo_hash
from .semantics import reify

# ---------------------------------------------------------------- syntax


@dataclass(frozen=True)
class NVar:
    name: str


@dataclass(frozen=True)
class NUnit:
    pass


@dataclass(frozen=True)
class NRet:
    expr: lc.Term


@dataclass(frozen=True)
class NSeq:
    first: Net
    second: Net


@dataclass(frozen=True)
class NFun:
    fname: str
    param: str
    body: Net


@dataclass(frozen=True)
class NApp:
    fn: Net
    arg: Net


@dataclass(frozen=True)
class NTyAbs:
    var: str
    kind: Kind
    body: Net


@dataclass(frozen=True)
class NTyApp:
    fn: Net
    ty: ChorType


@dataclass(frozen=True)
class NPair:
    left: Net
    right: Net


@dataclass(frozen=True)
class NFst:
    body: Net


@dataclass(frozen=True)
class NSnd:
    body: Net


@dataclass(frozen=True)
class NInl:
    body: Net


@dataclass(frozen=True)
class NInr:
    body: Net


@dataclass(frozen=True)
class NCase:
    scrut: Net
    lvar: str
    left: Net
    rvar: str
    right: Net


@dataclass(frozen=True)
class NFold:
    body: Net


@dataclass(frozen=True)
class NUnfold:
    body: Net


@dataclass(frozen=True)
class NSendTo:
    body: Net
    rho: LocSet


@dataclass(frozen=True)
class NRecv:
    sender: Loc | TVar


@dataclass(frozen=True)
class NLet:
    """`let x := bound in body`; `ty` is the local type the bound value is ascribed with."""

    var: str
    ty: lc.LType
    bound: Net
    body: Net


@dataclass(frozen=True)
class NLetType:
    var: str
    kind: Kind
    bound: Net
    body: Net


@dataclass(frozen=True)
class NChoose:
    label: str
    rho: LocSet
    body: Net


@dataclass(frozen=True)
class NAllow:
    """Wait for `sender` to pick a branch; a missing branch is None."""

    sender: Loc | TVar
    left: Net | None
    right: Net | None


@dataclass(frozen=True)
class NIf:
    cond: Net
    then: Net
    orelse: Net


@dataclass(frozen=True)
class NAmIIn:
    rho: LocSet
    then: Net
    orelse: Net


Net = TypingUnion[NVar, NUnit, NRet, NSeq, NFun, NApp, NTyAbs, NTyApp, NPair, NFst, NSnd, NInl,
                  NInr, NCase, NFold, NUnfold, NSendTo, NRecv, NLet, NLetType, NChoose, NAllow,
                  NIf, NAmIIn]

NET_NODES = (NVar, NUnit, NRet, NSeq, NFun, NApp, NTyAbs, NTyApp, NPair, NFst, NSnd, NInl, NInr,
             NCase, NFold, NUnfold, NSendTo, NRecv, NLet, NLetType, NChoose, NAllow, NIf, NAmIIn)

memo_hash(*NET_NODES)
for _cls in NET_NODES:
    _cls.__str__ = lambda self: show_net(self)  # type: ignore[method-assign]


def is_net_value(e: Net) -> bool:
    match e:
        case NUnit() | NFun() | NTyAbs():
            return True
        case NRet(x):
            return lc.is_lvalue(x)
        case NPair(a, b):
            return is_net_value(a) and is_net_value(b)
        case NInl(b) | NInr(b) | NFold(b):
            return is_net_value(b)
    return False


# ---------------------------------------------------------------- printing


def _rho(rho: LocSet) -> str:
    if isinstance(rho, Sng) and isinstance(rho.elem, Loc):
        return rho.elem.name
    return show_locset(rho)


def show_net(e: Net | None, prec: int = 0) -> str:
    """Readable text; levels are 0 for binders and sequences, 1 application, 2 atoms."""

    def paren(s: str, level: int) -> str:
        return f"({s})" if prec > level else s

    match e:
        case None:
            return "_"
        case NVar(n):
            return n
        case NUnit():
            return "()"
        case NRet(x):
            return paren(f"ret {lc.show_term(x, 5)}", 1)
        case NRecv(l):
            return paren(f"recv {l.name}", 1)
        case NPair(a, b):
            return f"({show_net(a)}, {show_net(b)})"
        case NFst(b) | NSnd(b) | NInl(b) | NInr(b) | NFold(b) | NUnfold(b):
            word = type(e).__name__[1:].lower()
            return paren(f"{word} {show_net(b, 2)}", 1)
        case NApp(f, a):
            return paren(f"{show_net(f, 1)} {show_net(a, 2)}", 1)
        case NTyApp(f, t):
            return paren(f"{show_net(f, 1)} [{show_type(t)}]", 1)
        case NSendTo(b, rho):
            return paren(f"send {show_net(b, 2)} to {_rho(rho)}", 1)
        case NSeq(a, b):
            return paren(f"{show_net(a, 1)}; {show_net(b)}", 0)
        case NFun(f, x, body):
            return paren(f"fun {f}({x}) = {show_net(body)}", 0)
        case NTyAbs(v, k, body):
            return paren(f"tyfun {v} :: {KIND_NAMES[k]} => {show_net(body)}", 0)
        case NCase(s, x, l, y, r):
            return paren(
                f"case {show_net(s, 1)} of inl {x} => {show_net(l, 1)} | inr {y} => {show_net(r)}",
                0,
            )
        case NLet(x, _, a, b):
            return paren(f"let {x} := {show_net(a)} in {show_net(b)}", 0)
        case NLetType(v, k, a, b):
            return paren(f"let {v} :: {KIND_NAMES[k]} := {show_net(a)} in {show_net(b)}", 0)
        case NChoose(d, rho, b):
            word = "left" if d == "L" else "right"
            return paren(f"choose {word} for {_rho(rho)}; {show_net(b)}", 0)
        case NAllow(l, a, b):
            arms = []
            if a is not None:
                arms.append(f"left => {show_net(a)}")
            if b is not None:
                arms.append(f"right => {show_net(b)}")
            return f"allow {l.name} {{ {' | '.join(arms)} }}"
        case NIf(c, a, b):
            return paren(f"if {show_net(c, 1)} then {show_net(a)} else {show_net(b)}", 0)
        case NAmIIn(rho, a, b):
            return paren(f"am_i_in {_rho(rho)} then {show_net(a)} else {show_net(b)}", 0)
    raise TypeError(f"not a network program: {e!r}")


def show_system(system: System) -> str:
    return " || ".join(f"{loc} |> {show_net(e)}" for loc, e in system)


# ---------------------------------------------------------------- traversal and substitution


def net_children(e: Net) -> tuple[Net, ...]:
    match e:
        case NVar() | NUnit() | NRet() | NRecv():
            return ()
        case NSeq(a, b) | NApp(a, b) | NPair(a, b):
            return (a, b)
        case NFun(_, _, b) | NTyAbs(_, _, b) | NTyApp(b, _) | NFst(b) | NSnd(b) | NInl(b):
            return (b,)
        case NInr(b) | NFold(b) | NUnfold(b) | NSendTo(b, _) | NChoose(_, _, b):
            return (b,)
        case NCase(s, _, l, _, r):
            return (s, l, r)
        case NLet(_, _, a, b) | NLetType(_, _, a, b):
            return (a, b)
        case NAllow(_, a, b):
            return tuple(x for x in (a, b) if x is not None)
        case NIf(c, a, b):
            return (c, a, b)
        case NAmIIn(_, a, b):
            return (a, b)
    raise TypeError(f"not a network program: {e!r}")


def net_size(e: Net) -> int:
    return 1 + sum(net_size(k) for k in net_children(e))


def fv_net_local(e: Net) -> frozenset[str]:
    """Free local variables."""
    match e:
        case NRet(x):
            return lc.fv_term(x)
        case NLet(x, _, a, b):
            return fv_net_local(a) | (fv_net_local(b) - {x})
    return frozenset().union(*(fv_net_local(k) for k in net_children(e)))


def fv_net_chor(e: Net) -> frozenset[str]:
    """Free program variables (bound by functions and case)."""
    match e:
        case NVar(n):
            return frozenset({n})
        case NFun(f, x, b):
            return fv_net_chor(b) - {f, x}
        case NCase(s, x, l, y, r):
            return fv_net_chor(s) | (fv_net_chor(l) - {x}) | (fv_net_chor(r) - {y})
    return frozenset().union(*(fv_net_chor(k) for k in net_children(e)))


def ftv_net(e: Net) -> frozenset[str]:
    """Free type variables, including location variables."""
    match e:
        case NRet(x):
            return lc.ftv_term(x)
        case NTyAbs(v, _, b):
            return ftv_net(b) - {v}
        case NTyApp(f, t):
            return ftv_net(f) | ftv_type(t)
        case NSendTo(b, rho) | NChoose(_, rho, b):
            return ftv_net(b) | fv_set(rho)
        case NRecv(l):
            return fv_set(l)
        case NAllow(l, _, _):
            return fv_set(l).union(*(ftv_net(k) for k in net_children(e)))
        case NAmIIn(rho, a, b):
            return fv_set(rho) | ftv_net(a) | ftv_net(b)
        case NLet(_, t, a, b):
            return lc.ftv_ltype(t) | ftv_net(a) | ftv_net(b)
        case NLetType(v, _, a, b):
            return ftv_net(a) | (ftv_net(b) - {v})
    return frozenset().union(*(ftv_net(k) for k in net_children(e)))


def fv_net(e: Net) -> frozenset[str]:
    """Every free name of any sort."""
    return fv_net_local(e) | fv_net_chor(e) | ftv_net(e)


def net_map(e: Net, f: Callable[[Net], Net]) -> Net:
    """Rebuild `e` with `f` applied to each immediate child (binders untouched)."""
    match e:
        case NVar() | NUnit() | NRet() | NRecv():
            return e
        case NSeq(a, b):
            return NSeq(f(a), f(b))
        case NApp(a, b):
            return NApp(f(a), f(b))
        case NPair(a, b):
            return NPair(f(a), f(b))
        case NFun(g, x, b):
            return NFun(g, x, f(b))
        case NTyAbs(v, k, b):
            return NTyAbs(v, k, f(b))
        case NTyApp(b, t):
            return NTyApp(f(b), t)
        case NFst(b):
            return NFst(f(b))
        case NSnd(b):
            return NSnd(f(b))
        case NInl(b):
            return NInl(f(b))
        case NInr(b):
            return NInr(f(b))
        case NFold(b):
            return NFold(f(b))
        case NUnfold(b):
            return NUnfold(f(b))
        case NSendTo(b, rho):
            return NSendTo(f(b), rho)
        case NChoose(d, rho, b):
            return NChoose(d, rho, f(b))
        case NCase(s, x, l, y, r):
            return NCase(f(s), x, f(l), y, f(r))
        case NLet(x, t, a, b):
            return NLet(x, t, f(a), f(b))
        case NLetType(v, k, a, b):
            return NLetType(v, k, f(a), f(b))
        case NAllow(l, a, b):
            return NAllow(l, None if a is None else f(a), None if b is None else f(b))
        case NIf(c, a, b):
            return NIf(f(c), f(a), f(b))
        case NAmIIn(rho, a, b):
            return NAmIIn(rho, f(a), f(b))
    raise TypeError(f"not a network program: {e!r}")


def nsubst_local(e: Net, x: str, v: lc.Term) -> Net:
    """Replace the local variable x by the value v."""
    if x not in fv_net_local(e):
        return e
    match e:
        case NRet(t):
            return NRet(lc.lsubst_term(t, x, v))
        case NLet(y, t, a, b):
            a2 = nsubst_local(a, x, v)
            if y == x:
                return NLet(y, t, a2, b)
            if y in lc.fv_term(v):
                y2 = fresh(y, fv_net_local(b) | lc.fv_term(v) | {x})
                b = nsubst_local(b, y, lc.Var(y2))
                y = y2
            return NLet(y, t, a2, nsubst_local(b, x, v))
    return net_map(e, lambda k: nsubst_local(k, x, v))


def nsubst_chor(e: Net, x: str, v: Net) -> Net:
    """Capture-avoiding replacement of the program variable x."""
    if x not in fv_net_chor(e):
        return e
    match e:
        case NVar(n):
            return v if n == x else e
        case NFun(f, p, b):
            if x in (f, p):
                return e
            fvv = fv_net_chor(v)
            for old in (f, p):
                if old in fvv:
                    new = fresh(old, fvv | fv_net_chor(b) | {x, f, p})
                    b = nsubst_chor(b, old, NVar(new))
                    f, p = (new, p) if old == f else (f, new)
            return NFun(f, p, nsubst_chor(b, x, v))
        case NCase(s, p, l, q, r):
            fvv = fv_net_chor(v)
            if p != x and p in fvv:
                p2 = fresh(p, fvv | fv_net_chor(l) | {x})
                l, p = nsubst_chor(l, p, NVar(p2)), p2
            if q != x and q in fvv:
                q2 = fresh(q, fvv | fv_net_chor(r) | {x})
                r, q = nsubst_chor(r, q, NVar(q2)), q2
            return NCase(nsubst_chor(s, x, v), p, l if p == x else nsubst_chor(l, x, v),
                         q, r if q == x else nsubst_chor(r, x, v))
    return net_map(e, lambda k: nsubst_chor(k, x, v))


def nsubst_type(e: Net, var: str, s) -> Net:
    """Replace a type, location or location-set variable."""
    if var not in ftv_net(e):
        return e

    def go(k: Net) -> Net:
        return nsubst_type(k, var, s)

    def rs(rho: LocSet) -> LocSet:
        return lc.subst_locset(rho, var, s)

    match e:
        case NRet(t):
            return NRet(lc.lsubst_type(t, var, s))
        case NTyApp(f, t):
            return NTyApp(go(f), subst_in_type(t, var, s))
        case NSendTo(b, rho):
            return NSendTo(go(b), rs(rho))
        case NChoose(d, rho, b):
            return NChoose(d, rs(rho), go(b))
        case NRecv(l):
            return NRecv(lc.subst_loc(l, var, s))
        case NAllow(l, a, b):
            return NAllow(lc.subst_loc(l, var, s), None if a is None else go(a),
                          None if b is None else go(b))
        case NAmIIn(rho, a, b):
            return NAmIIn(rs(rho), go(a), go(b))
        case NLet(x, t, a, b):
            return NLet(x, lc.lsubst_ltype(t, var, s), go(a), go(b))
        case NTyAbs(v, k, b):
            if v == var:
                return e
            v, b = _freshen(v, b, var, s)
            return NTyAbs(v, k, go(b))
        case NLetType(v, k, a, b):
            if v == var:
                return NLetType(v, k, go(a), b)
            v, b = _freshen(v, b, var, s)
            return NLetType(v, k, go(a), go(b))
    return net_map(e, go)


def _freshen(v: str, body: Net, var: str, s):
    if v not in ftv_type(s):
        return v, body
    v2 = fresh(v, ftv_net(body) | ftv_type(s) | {var, v})
    return v2, nsubst_type(body, v, TVar(v2))


# ---------------------------------------------------------------- labels


@dataclass(frozen=True)
class Iota:
    pass


@dataclass(frozen=True)
class IotaSync:
    pass


@dataclass(frozen=True)
class SendLabel:
    """Outgoing message; `to` excludes the sender itself."""

    msg: lc.Term | str
    to: frozenset[str]


@dataclass(frozen=True)
class RecvOffer:
    """Willingness to receive from `sender`; `accept` maps a message to a continuation."""

    sender: str
    accept: Callable[[lc.Term | str], Net | None]


Label = TypingUnion[Iota, IotaSync, SendLabel, RecvOffer]
IOTA, IOTA_SYNC = Iota(), IotaSync()


def show_label(l: Label) -> str:
    match l:
        case Iota():
            return "iota"
        case IotaSync():
            return "iota_sync"
        case SendLabel(m, to):
            msg = m if isinstance(m, str) else lc.show_term(m)
            return f"send({msg}, {{{','.join(sorted(to))}}})"
        case RecvOffer(s, _):
            return f"recv({s}, ?)"
    raise TypeError(f"not a label: {l!r}")


# ---------------------------------------------------------------- per-location steps


def _ground_names(rho: LocSet) -> frozenset[str] | None:
    return None if fv_set(rho) else named_locs(rho)


def net_steps(loc: str, e: Net, table: lc.LocationTable) -> tuple[tuple[Label, Net], ...]:
    """Every transition location `loc` can take from `e`; receives are symbolic offers."""
    return _net_steps(loc, e, table)


def _under(steps, rebuild: Callable[[Net], Net]):
    """Close steps under a one-hole context, threading symbolic receives through."""
    out = []
    for label, nxt in steps:
        if isinstance(label, RecvOffer):
            inner = label.accept
            label = RecvOffer(label.sender, _compose(inner, rebuild))
        else:
            nxt = rebuild(nxt)
        out.append((label, nxt))
    return out


def _compose(accept, rebuild):
    def go(m):
        r = accept(m)
        return None if r is None else rebuild(r)

    return go


@lru_cache(maxsize=200_000)
def _net_steps(loc: str, e: Net, table: lc.LocationTable) -> tuple[tuple[Label, Net], ...]:
    def sub(x: Net):
        return _net_steps(loc, x, table)

    out: list = []
    match e:
        case NRet(x):
            x2 = lc.lstep(x)
            if x2 is not None:
                out.append((IOTA, NRet(x2)))
        case NSeq(a, b):
            out += _under(sub(a), lambda k: NSeq(k, b))
            if is_net_value(a):
                out.append((IOTA, b))
        case NApp(f, a):
            out += _under(sub(f), lambda k: NApp(k, a))
            if is_net_value(f):
                out += _under(sub(a), lambda k: NApp(f, k))
                if is_net_value(a) and isinstance(f, NFun):
                    body = nsubst_chor(f.body, f.fname, f) if f.fname != f.param else f.body
                    out.append((IOTA_SYNC, nsubst_chor(body, f.param, a)))
        case NTyApp(f, t):
            out += _under(sub(f), lambda k: NTyApp(k, t))
            if isinstance(f, NTyAbs):
                out.append((IOTA_SYNC, nsubst_type(f.body, f.var, t)))
        case NFold(b):
            out += _under(sub(b), NFold)
        case NUnfold(b):
            out += _under(sub(b), NUnfold)
            if isinstance(b, NFold) and is_net_value(b):
                out.append((IOTA_SYNC, b.body))
        case NPair(a, b):
            out += _under(sub(a), lambda k: NPair(k, b))
            if is_net_value(a):
                out += _under(sub(b), lambda k: NPair(a, k))
        case NFst(b):
            out += _under(sub(b), NFst)
            if isinstance(b, NPair) and is_net_value(b):
                out.append((IOTA_SYNC, b.left))
        case NSnd(b):
            out += _under(sub(b), NSnd)
            if isinstance(b, NPair) and is_net_value(b):
                out.append((IOTA_SYNC, b.right))
        case NInl(b):
            out += _under(sub(b), NInl)
        case NInr(b):
            out += _under(sub(b), NInr)
        case NCase(s, x, l, y, r):
            out += _under(sub(s), lambda k: NCase(k, x, l, y, r))
            if is_net_value(s):
                if isinstance(s, NInl):
                    out.append((IOTA_SYNC, nsubst_chor(l, x, s.body)))
                elif isinstance(s, NInr):
                    out.append((IOTA_SYNC, nsubst_chor(r, y, s.body)))
        case NSendTo(b, rho):
            out += _under(sub(b), lambda k: NSendTo(k, rho))
            names = _ground_names(rho)
            if isinstance(b, NRet) and lc.is_lvalue(b.expr) and names is not None:
                out.append((SendLabel(b.expr, names - {loc}), b))
        case NRecv(Loc(sender)):
            out.append((RecvOffer(sender, _accept_value), NUnit()))
        case NLet(x, t, a, b):
            out += _under(sub(a), lambda k: NLet(x, t, k, b))
            if isinstance(a, NRet) and lc.is_lvalue(a.expr):
                out.append((IOTA, nsubst_local(b, x, lc.wrap(a.expr, t))))
        case NLetType(v, k, a, b):
            out += _under(sub(a), lambda n: NLetType(v, k, n, b))
            if isinstance(a, NRet) and lc.is_lvalue(a.expr):
                try:
                    out.append((IOTA, nsubst_type(b, v, reify(a.expr, k, table))))
                except lc.ReificationError:
                    pass
        case NChoose(d, rho, b):
            names = _ground_names(rho)
            if names is not None:
                out.append((SendLabel(d, names - {loc}), b))
        case NAllow(Loc(sender), a, b):
            out.append((RecvOffer(sender, _accept_choice(a, b)), NUnit()))
        case NIf(c, a, b):
            out += _under(sub(c), lambda k: NIf(k, a, b))
            if isinstance(c, NRet) and lc.is_lvalue(c.expr):
                out.append((IOTA, a if lc.reify_bool(c.expr) else b))
        case NAmIIn(rho, a, b):
            names = _ground_names(rho)
            if names is not None:
                out.append((IOTA, a if loc in names else b))
    return tuple(out)


def _accept_value(m) -> Net | None:
    return NRet(m) if not isinstance(m, str) else None


def _accept_choice(left: Net | None, right: Net | None):
    def go(m):
        return left if m == "L" else right if m == "R" else None

    return go


# ---------------------------------------------------------------- systems

System = tuple[tuple[str, Net], ...]


@dataclass(frozen=True)
class SysInternal:
    loc: str


@dataclass(frozen=True)
class SysSync:
    pass


@dataclass(frozen=True)
class SysComm:
    sender: str
    msg: lc.Term | str
    to: tuple[str, ...]


SysLabel = TypingUnion[SysInternal, SysSync, SysComm]


def show_sys_label(l: SysLabel) -> str:
    match l:
        case SysInternal(loc):
            return f"iota@{loc}"
        case SysSync():
            return "iota_sync"
        case SysComm(s, m, to):
            msg = m if isinstance(m, str) else lc.show_term(m)
            return f"{s}.{msg} ~> {{{','.join(to)}}}"
    raise TypeError(f"not a system label: {l!r}")


def sys_label_json(l: SysLabel) -> dict:
    match l:
        case SysInternal(loc):
            return {"kind": "iota", "location": loc}
        case SysSync():
            return {"kind": "iota_sync"}
        case SysComm(s, m, to):
            msg = m if isinstance(m, str) else lc.show_term(m)
            return {"kind": "comm", "sender": s, "message": msg, "recipients": list(to)}
    raise TypeError(f"not a system label: {l!r}")


def system_steps(system: System, table: lc.LocationTable) -> tuple[tuple[SysLabel, System], ...]:
    return _system_steps(system, table)


@lru_cache(maxsize=100_000)
def _system_steps(system: System, table: lc.LocationTable):
    index = {loc: i for i, (loc, _) in enumerate(system)}
    local = [net_steps(loc, e, table) for loc, e in system]
    out: list = []

    for i, (loc, _) in enumerate(system):
        for label, nxt in local[i]:
            if isinstance(label, Iota):
                out.append((SysInternal(loc), _replace(system, {i: nxt})))

    syncs = [[n for l, n in steps if isinstance(l, IotaSync)] for steps in local]
    if system and all(syncs):
        for choice in product(*syncs):
            out.append((SysSync(), tuple((loc, e) for (loc, _), e in zip(system, choice))))

    for i, (loc, _) in enumerate(system):
        for label, nxt in local[i]:
            if not isinstance(label, SendLabel):
                continue
            to = sorted(label.to, key=lambda n: index.get(n, len(system)))
            if any(n not in index for n in to):
                continue
            options = []
            for r in to:
                conts = []
                for l2, _ in local[index[r]]:
                    if isinstance(l2, RecvOffer) and l2.sender == loc:
                        k = l2.accept(label.msg)
                        if k is not None:
                            conts.append(k)
                options.append(conts)
            for choice in product(*options):
                changes = {i: nxt, **{index[r]: k for r, k in zip(to, choice)}}
                out.append((SysComm(loc, label.msg, tuple(to)), _replace(system, changes)))
    return tuple(out)


def _replace(system: System, changes: dict[int, Net]) -> System:
    return tuple((loc, changes.get(i, e)) for i, (loc, e) in enumerate(system))


def is_terminal_values(system: System) -> bool:
    return all(is_net_value(e) for _, e in system)


@dataclass(frozen=True)
class SimReport:
    """Outcome of a single scheduled run: status is values, deadlock or fuel."""

    status: str
    final: System
    trace: tuple[tuple[SysLabel, System], ...]


def simulate(system: System, table: lc.LocationTable, fuel: int = 1000,
             seed: int | None = None) -> SimReport:
    """Run one schedule: the first enabled step, or a seeded uniform choice."""
    rng = random.Random(seed) if seed is not None else None
    trace = []
    for _ in range(fuel):
        succ = system_steps(system, table)
        if not succ:
            break
        label, system = succ[0] if rng is None else rng.choice(succ)
        trace.append((label, system))
    if is_terminal_values(system):
        status = "values"
    elif system_steps(system, table):
        status = "fuel"
    else:
        status = "deadlock"
    return SimReport(status, system, tuple(trace))


@dataclass(frozen=True)
class Exploration:
    """Reachable systems within a depth bound, with terminal classification."""

    states: tuple[System, ...]
    edges: tuple[tuple[int, str, int], ...]
    all_values: frozenset[int]
    deadlocked: frozenset[int]
    frontier: frozenset[int]

    def graph_json(self) -> dict:
        def tag(i: int) -> str | None:
            if i in self.all_values:
                return "all-values"
            if i in self.deadlocked:
                return "deadlocked"
            if i in self.frontier:
                return "frontier"
            return None

        return {
            "states": [{"id": i, "system": show_system(s), "terminal": tag(i)}
                       for i, s in enumerate(self.states)],
            "edges": [{"from": a, "label": l, "to": b} for a, l, b in self.edges],
        }


def explore(system: System, table: lc.LocationTable, depth: int) -> Exploration:
    ids = {system: 0}
    states = [system]
    edges = []
    values, dead, frontier = set(), set(), set()
    queue = deque([(system, 0)])
    while queue:
        s, d = queue.popleft()
        i = ids[s]
        succ = system_steps(s, table)
        if not succ:
            (values if is_terminal_values(s) else dead).add(i)
            continue
        if d >= depth:
            frontier.add(i)
            continue
        for label, t in succ:
            if t not in ids:
                ids[t] = len(states)
                states.append(t)
                queue.append((t, d + 1))
            edges.append((i, show_sys_label(label), ids[t]))
    return Exploration(tuple(states), tuple(edges), frozenset(values), frozenset(dead),
                       frozenset(frontier))
