"""Labelled small-step semantics of choreographies.

Every step carries a redex label. A step may happen out of program order when
the locations it involves are disjoint from the locations of the code it
overtakes; `rloc` and `cloc` compute those location footprints.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union as TypingUnion

from . import local as lc
from .chor import (
    Case, Chor, ChorApp, ChorFun, ChorVar, Done, Fold, Fst, Inl, Inr, Ite, LetLocal, LetType,
    Pair, Send, Snd, Sync, TyAbs, TyApp, Unfold, is_chor_value, show_chor, subst_chor,
    subst_local, subst_type, show_type,
)
from .locsets import (
    Kind, Loc, LocSet, Sng, Union, disjoint, fv_set, nec_in, set_of, show_locset,
)


# ---------------------------------------------------------------- redex labels


@dataclass(frozen=True)
class RDone:
    rho: LocSet
    before: lc.Term
    after: lc.Term


@dataclass(frozen=True)
class RFun:
    inner: Redex


@dataclass(frozen=True)
class RArg:
    inner: Redex


@dataclass(frozen=True)
class RPairL:
    inner: Redex


@dataclass(frozen=True)
class RPairR:
    inner: Redex


@dataclass(frozen=True)
class RApp:
    pass


@dataclass(frozen=True)
class RTApp:
    pass


@dataclass(frozen=True)
class RUnfoldFold:
    pass


@dataclass(frozen=True)
class RFstPair:
    pass


@dataclass(frozen=True)
class RSndPair:
    pass


@dataclass(frozen=True)
class RCaseInl:
    pass


@dataclass(frozen=True)
class RCaseInr:
    pass


@dataclass(frozen=True)
class RLetV:
    rho: LocSet
    value: lc.Term


@dataclass(frozen=True)
class RLetTy:
    rho: LocSet
    ty: object


@dataclass(frozen=True)
class RSend:
    """A value or a selection label ("L"/"R") travelling from `sender` to `rho`."""

    sender: Loc
    msg: lc.Term | str
    rho: LocSet


@dataclass(frozen=True)
class RIfTrue:
    rho: LocSet


@dataclass(frozen=True)
class RIfFalse:
    rho: LocSet


Redex = TypingUnion[RDone, RFun, RArg, RPairL, RPairR, RApp, RTApp, RUnfoldFold, RFstPair,
                    RSndPair, RCaseInl, RCaseInr, RLetV, RLetTy, RSend, RIfTrue, RIfFalse]


def show_redex(r: Redex) -> str:
    match r:
        case RDone(rho, a, b):
            return f"Done({show_locset(rho)}, {lc.show_term(a)}, {lc.show_term(b)})"
        case RFun(i) | RArg(i) | RPairL(i) | RPairR(i):
            return f"{type(r).__name__[1:]}({show_redex(i)})"
        case RLetV(rho, v):
            return f"LetV({show_locset(rho)}, {lc.show_term(v)})"
        case RLetTy(rho, t):
            return f"LetTy({show_locset(rho)}, {show_type(t)})"
        case RSend(l, m, rho):
            msg = m if isinstance(m, str) else lc.show_term(m)
            return f"Send({l.name}, {msg}, {show_locset(rho)})"
        case RIfTrue(rho) | RIfFalse(rho):
            return f"{type(r).__name__[1:]}({show_locset(rho)})"
    return type(r).__name__[1:]


# ---------------------------------------------------------------- footprints


class _Everywhere:
    """Every location at once: the footprint of steps all participants take together."""

    def __repr__(self) -> str:
        return "EVERYWHERE"


EVERYWHERE = _Everywhere()
Footprint = TypingUnion[tuple[LocSet, ...], _Everywhere]


def _join(*parts: Footprint) -> Footprint:
    if any(p is EVERYWHERE for p in parts):
        return EVERYWHERE
    return tuple(x for p in parts for x in p)  # type: ignore[union-attr]


def footprints_disjoint(a: Footprint, b: Footprint) -> bool:
    if a is EVERYWHERE:
        return b == ()
    if b is EVERYWHERE:
        return a == ()
    return all(disjoint(x, y) for x in a for y in b)  # type: ignore[union-attr]


def rloc(r: Redex) -> Footprint:
    """Locations involved in performing a redex."""
    match r:
        case RDone(rho, _, _) | RLetV(rho, _) | RLetTy(rho, _) | RIfTrue(rho) | RIfFalse(rho):
            return (rho,)
        case RFun(i) | RArg(i) | RPairL(i) | RPairR(i):
            return rloc(i)
        case RSend(l, _, rho):
            return (Sng(l), rho)
    return EVERYWHERE


def cloc(c: Chor) -> Footprint:
    """Locations that may still act in a choreography."""
    match c:
        case ChorVar() | ChorFun() | TyAbs():
            return ()
        case Done(rho, _):
            return (rho,)
        case ChorApp() | TyApp() | Unfold() | Fst() | Snd() | Case():
            return EVERYWHERE
        case Fold(_, b) | Inl(_, b) | Inr(_, b):
            return cloc(b)
        case Pair(a, b):
            return _join(cloc(a), cloc(b))
        case LetLocal(rho, _, _, a, b) | LetType(rho, _, _, a, b):
            return _join((rho,), cloc(a), cloc(b))
        case Send(b, l, rho):
            return _join((Sng(l), rho), cloc(b))
        case Sync(l, _, rho, b):
            return _join((Sng(l), rho), cloc(b))
        case Ite(rho, cond, a, b):
            return _join((rho,), cloc(cond), cloc(a), cloc(b))
    raise TypeError(f"not a choreography: {c!r}")


# ---------------------------------------------------------------- stepping


def _ground(rho: LocSet) -> bool:
    return not fv_set(rho)


def reify(v: lc.Term, kind: Kind, table: lc.LocationTable):
    """Turn a representation value into the location, set or local type it denotes."""
    match kind:
        case Kind.LOC:
            return Loc(lc.reify_loc(v, table))
        case Kind.LOCSET:
            return set_of(*lc.reify_locset(v, table))
        case Kind.LOCAL:
            return lc.reify_tyrep(v)
    raise lc.ReificationError(f"cannot reify at kind {kind}")


Step = tuple[Redex, Chor]


def enabled_steps(c: Chor, table: lc.LocationTable) -> tuple[Step, ...]:
    """Every one-step successor with its redex; in-order steps come first."""
    return _steps(c, table)


@lru_cache(maxsize=200_000)
def _steps(c: Chor, table: lc.LocationTable) -> tuple[Step, ...]:
    out: list[Step] = []

    def sub(x: Chor) -> tuple[Step, ...]:
        return _steps(x, table)

    match c:
        case Done(rho, e):
            if _ground(rho):
                e2 = lc.lstep(e)
                if e2 is not None:
                    out.append((RDone(rho, e, e2), Done(rho, e2)))

        case ChorApp(f, a):
            out += [(RFun(r), ChorApp(f2, a)) for r, f2 in sub(f)]
            if is_chor_value(f):
                out += [(RArg(r), ChorApp(f, a2)) for r, a2 in sub(a)]
                if is_chor_value(a) and isinstance(f, ChorFun):
                    body = subst_chor(f.body, f.fname, f) if f.fname != f.param else f.body
                    out.append((RApp(), subst_chor(body, f.param, a)))
            else:
                blocked = cloc(f)
                out += [(RArg(r), ChorApp(f, a2)) for r, a2 in sub(a)
                        if footprints_disjoint(rloc(r), blocked)]

        case TyApp(f, t):
            out += [(r, TyApp(f2, t)) for r, f2 in sub(f)]
            if isinstance(f, TyAbs):
                out.append((RTApp(), subst_type(f.body, f.var, t)))

        case Fold(t, b):
            out += [(r, Fold(t, b2)) for r, b2 in sub(b)]

        case Unfold(b):
            out += [(r, Unfold(b2)) for r, b2 in sub(b)]
            if isinstance(b, Fold) and is_chor_value(b):
                out.append((RUnfoldFold(), b.body))

        case Pair(a, b):
            out += [(RPairL(r), Pair(a2, b)) for r, a2 in sub(a)]
            if is_chor_value(a):
                out += [(RPairR(r), Pair(a, b2)) for r, b2 in sub(b)]
            else:
                blocked = cloc(a)
                out += [(RPairR(r), Pair(a, b2)) for r, b2 in sub(b)
                        if footprints_disjoint(rloc(r), blocked)]

        case Fst(b):
            out += [(r, Fst(b2)) for r, b2 in sub(b)]
            if isinstance(b, Pair) and is_chor_value(b):
                out.append((RFstPair(), b.left))

        case Snd(b):
            out += [(r, Snd(b2)) for r, b2 in sub(b)]
            if isinstance(b, Pair) and is_chor_value(b):
                out.append((RSndPair(), b.right))

        case Inl(t, b):
            out += [(r, Inl(t, b2)) for r, b2 in sub(b)]

        case Inr(t, b):
            out += [(r, Inr(t, b2)) for r, b2 in sub(b)]

        case Case(s, x, left, y, right):
            out += [(r, Case(s2, x, left, y, right)) for r, s2 in sub(s)]
            if is_chor_value(s):
                if isinstance(s, Inl):
                    out.append((RCaseInl(), subst_chor(left, x, s.body)))
                elif isinstance(s, Inr):
                    out.append((RCaseInr(), subst_chor(right, y, s.body)))

        case Send(b, l, rho2):
            out += [(r, Send(b2, l, rho2)) for r, b2 in sub(b)]
            if (isinstance(b, Done) and lc.is_lvalue(b.expr) and isinstance(l, Loc)
                    and _ground(b.rho) and _ground(rho2)):
                if nec_in(l, b.rho):
                    out.append((RSend(l, b.expr, rho2), Done(Union(b.rho, rho2), b.expr)))

        case Sync(l, d, rho, b):
            if isinstance(l, Loc) and _ground(rho):
                out.append((RSend(l, d, rho), b))
            here = (Sng(l), rho)
            out += [(r, Sync(l, d, rho, b2)) for r, b2 in sub(b)
                    if footprints_disjoint(rloc(r), here)]

        case Ite(rho, cond, then, orelse):
            out += [(r, Ite(rho, c2, then, orelse)) for r, c2 in sub(cond)]
            if isinstance(cond, Done) and lc.is_lvalue(cond.expr) and _ground(rho):
                if lc.reify_bool(cond.expr):
                    out.append((RIfTrue(rho), then))
                else:
                    out.append((RIfFalse(rho), orelse))
            blocked = _join((rho,), cloc(cond))
            right = sub(orelse)
            for r, t2 in sub(then):
                if not footprints_disjoint(rloc(r), blocked):
                    continue
                out += [(r, Ite(rho, cond, t2, e2)) for r2, e2 in right if r2 == r]

        case LetLocal(rho, x, t, bound, body):
            out += [(r, LetLocal(rho, x, t, b2, body)) for r, b2 in sub(bound)]
            if isinstance(bound, Done) and lc.is_lvalue(bound.expr) and _ground(rho):
                result = subst_local(body, rho, x, lc.wrap(bound.expr, t))
                if result is not None:
                    out.append((RLetV(rho, bound.expr), result))
            blocked = _join((rho,), cloc(bound))
            out += [(r, LetLocal(rho, x, t, bound, b2)) for r, b2 in sub(body)
                    if footprints_disjoint(rloc(r), blocked)]

        case LetType(rho, a, k, bound, body):
            out += [(r, LetType(rho, a, k, b2, body)) for r, b2 in sub(bound)]
            if isinstance(bound, Done) and lc.is_lvalue(bound.expr) and _ground(rho):
                try:
                    t = reify(bound.expr, k, table)
                except lc.ReificationError:
                    t = None
                if t is not None:
                    out.append((RLetTy(rho, t), subst_type(body, a, t)))
            blocked = _join((rho,), cloc(bound))
            out += [(r, LetType(rho, a, k, bound, b2)) for r, b2 in sub(body)
                    if footprints_disjoint(rloc(r), blocked)]

    return tuple(out)


class UnknownRedex(Exception):
    """The requested redex is not enabled."""


def step_with(c: Chor, r: Redex, table: lc.LocationTable) -> Chor:
    for r2, c2 in enabled_steps(c, table):
        if r2 == r:
            return c2
    raise UnknownRedex(f"{show_redex(r)} is not enabled in {show_chor(c)}")


# ---------------------------------------------------------------- driving


@dataclass(frozen=True)
class RunReport:
    """Outcome of driving a choreography: `status` is value, stuck or fuel."""

    status: str
    final: Chor
    trace: tuple[Step, ...] = ()
    terminals: frozenset[Chor] = field(default=frozenset())


def run(c: Chor, table: lc.LocationTable, fuel: int = 1000, strategy: str = "leftmost",
        seed: int = 0) -> RunReport:
    """Drive `c` with the leftmost or a seeded random strategy, or explore exhaustively."""
    if strategy == "exhaustive":
        return _run_exhaustive(c, table, fuel)
    rng = random.Random(seed)
    trace: list[Step] = []
    for _ in range(fuel):
        succ = enabled_steps(c, table)
        if not succ:
            status = "value" if is_chor_value(c) else "stuck"
            return RunReport(status, c, tuple(trace))
        r, c = succ[0] if strategy == "leftmost" else rng.choice(succ)
        trace.append((r, c))
    status = "value" if is_chor_value(c) else "fuel"
    if status == "fuel" and not enabled_steps(c, table):
        status = "stuck"
    return RunReport(status, c, tuple(trace))


def _run_exhaustive(c: Chor, table: lc.LocationTable, fuel: int) -> RunReport:
    seen = {c}
    queue = deque([c])
    terminals: set[Chor] = set()
    status = "value"
    while queue:
        if len(seen) > fuel:
            status = "fuel"
            break
        x = queue.popleft()
        succ = enabled_steps(x, table)
        if not succ:
            terminals.add(x)
            if not is_chor_value(x):
                status = "stuck"
        for _, y in succ:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    final = next(iter(terminals)) if len(terminals) == 1 else c
    return RunReport(status, final, (), frozenset(terminals))
