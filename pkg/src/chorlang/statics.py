"""Kinding and typing for choreographies."""

from __future__ import annotations

from collections.abc import Mapping, Sequence

from . import local as lc
from .chor import (
    At, Arrow, Case, Chor, ChorApp, ChorFun, ChorType, ChorVar, Done, Fold, Forall, Fst, Inl,
    Inr, Ite, LetLocal, LetType, Mu, Pair, Prod, Send, Snd, Sum, Sync, TyAbs, TyApp, Unfold,
    ftv_chor, ftv_type, fv_chor, show_chor, show_type, subst_in_type, subst_type,
)
from .locsets import (
    Kind, Loc, LocSet, Sng, TVar, Union, loc_kinded, locset_kinded, nec_in, set_equiv,
    show_locset, subset,
)
from .names import fresh

KindCtx = Mapping[str, Kind]
ChorCtx = Sequence[tuple[str, ChorType]]
LocalCtx = Sequence[tuple[LocSet, str, lc.LType]]


class ChorTypeError(Exception):
    """A failed typing or kinding premise, tagged with the rule that failed."""

    def __init__(self, rule: str, message: str) -> None:
        super().__init__(f"{rule}: {message}")
        self.rule = rule
        self.message = message


# ---------------------------------------------------------------- kinding


def kind_of(gamma: KindCtx, t: ChorType) -> Kind | None:
    match t:
        case TVar(n):
            return gamma.get(n)
        case Loc():
            return Kind.LOC
        case Sng(e):
            return Kind.LOCSET if loc_kinded(gamma, e) else None
        case Union(a, b):
            ok = kind_of(gamma, a) is Kind.LOCSET and kind_of(gamma, b) is Kind.LOCSET
            return Kind.LOCSET if ok else None
        case At(te, rho):
            ok = lc.lkind(gamma, te) and locset_kinded(gamma, rho)
            return Kind.STAR if ok else None
        case Arrow(a, b) | Prod(a, b) | Sum(a, b):
            ok = kind_of(gamma, a) is Kind.STAR and kind_of(gamma, b) is Kind.STAR
            return Kind.STAR if ok else None
        case Forall(v, k, b):
            return Kind.STAR if kind_of({**gamma, v: k}, b) is Kind.STAR else None
        case Mu(v, b):
            return Kind.STAR if kind_of({**gamma, v: Kind.STAR}, b) is Kind.STAR else None
    if isinstance(t, lc.LOCAL_TYPES):
        return Kind.LOCAL if lc.lkind(gamma, t) else None
    return None


def type_eq(a: ChorType, b: ChorType) -> bool:
    """Structural equality up to renaming of bound variables; sets compare by mutual inclusion."""
    match a, b:
        case At(t1, r1), At(t2, r2):
            return lc.ltype_eq(t1, t2) and set_equiv(r1, r2)
        case Arrow(a1, b1), Arrow(a2, b2):
            return type_eq(a1, a2) and type_eq(b1, b2)
        case Prod(a1, b1), Prod(a2, b2):
            return type_eq(a1, a2) and type_eq(b1, b2)
        case Sum(a1, b1), Sum(a2, b2):
            return type_eq(a1, a2) and type_eq(b1, b2)
        case Forall(v1, k1, b1), Forall(v2, k2, b2):
            if k1 is not k2:
                return False
            return _binder_eq(v1, b1, v2, b2)
        case Mu(v1, b1), Mu(v2, b2):
            return _binder_eq(v1, b1, v2, b2)
        case TVar(x), TVar(y):
            return x == y
        case Loc(x), Loc(y):
            return x == y
        case (Sng() | Union() | TVar()), (Sng() | Union() | TVar()):
            return set_equiv(a, b)
    if isinstance(a, lc.LOCAL_TYPES) and isinstance(b, lc.LOCAL_TYPES):
        return lc.ltype_eq(a, b)
    return False


def _binder_eq(v1: str, b1: ChorType, v2: str, b2: ChorType) -> bool:
    if v1 == v2:
        return type_eq(b1, b2)
    v = fresh(v1, ftv_type(b1) | ftv_type(b2) | {v1, v2})
    return type_eq(subst_in_type(b1, v1, TVar(v)), subst_in_type(b2, v2, TVar(v)))


# ---------------------------------------------------------------- contexts


def sigma_project(sigma: LocalCtx, rho: LocSet) -> tuple[tuple[str, lc.LType], ...]:
    """The local variables every location of `rho` can see, as a flat local context."""
    return tuple((x, t) for (r, x, t) in sigma if subset(rho, r))


def ctx_wf(gamma: KindCtx, delta: ChorCtx, sigma: LocalCtx) -> bool:
    return all(kind_of(gamma, t) is Kind.STAR for _, t in delta) and all(
        lc.lkind(gamma, t) and locset_kinded(gamma, r) for r, _, t in sigma
    )


# ---------------------------------------------------------------- typing


def type_of(gamma: KindCtx, delta: ChorCtx, sigma: LocalCtx, c: Chor,
            table: lc.LocationTable) -> ChorType | None:
    """The type of `c`, or None when it is ill-typed."""
    try:
        return infer_type(gamma, delta, sigma, c, table)
    except ChorTypeError:
        return None


def check_program(c: Chor, table: lc.LocationTable, expected: ChorType | None = None) -> ChorType:
    """Type a closed choreography, optionally against a declared type; raises ChorTypeError."""
    t = infer_type({}, (), (), c, table, _local_hint(expected))
    if expected is not None:
        if kind_of({}, expected) is not Kind.STAR:
            raise ChorTypeError("T-Main", f"declared type {show_type(expected)} is ill-kinded")
        if not type_eq(t, expected):
            raise ChorTypeError(
                "T-Main", f"declared {show_type(expected)} but the program has {show_type(t)}"
            )
    return t


def _local_hint(t: ChorType | None) -> lc.LType | None:
    return t.local if isinstance(t, At) else None


def _need(ok: bool, rule: str, message: str) -> None:
    if not ok:
        raise ChorTypeError(rule, message)


def _need_star(gamma: KindCtx, t: ChorType, rule: str) -> None:
    _need(kind_of(gamma, t) is Kind.STAR, rule, f"{show_type(t)} is not a well-kinded type")


def _need_locset(gamma: KindCtx, rho: LocSet, rule: str) -> None:
    _need(locset_kinded(gamma, rho), rule, f"{show_locset(rho)} is not a location set here")


def _expect(t: ChorType, cls, rule: str, what: str):
    if not isinstance(t, cls):
        raise ChorTypeError(rule, f"{what} has type {show_type(t)}")
    return t


def infer_type(gamma: KindCtx, delta: ChorCtx, sigma: LocalCtx, c: Chor,
               table: lc.LocationTable, hint: lc.LType | None = None) -> ChorType:
    """Syntax-directed typing; raises ChorTypeError naming the failed rule.

    `hint` is an expected local type pushed down to local computations so that
    integer literals can be checked as location representations.
    """

    def go(x: Chor, d: ChorCtx = delta, s: LocalCtx = sigma, g: KindCtx = gamma,
           h: lc.LType | None = None) -> ChorType:
        return infer_type(g, d, s, x, table, h)

    match c:
        case ChorVar(n):
            for name, t in reversed(delta):
                if name == n:
                    return t
            raise ChorTypeError("T-Var", f"unbound choreography variable {n}")

        case Done(rho, e):
            _need_locset(gamma, rho, "T-Done")
            local_ctx = sigma_project(sigma, rho)
            te = None if hint is None else lc.ltype(gamma, local_ctx, e, table, hint)
            if te is None:
                try:
                    te = lc.infer(gamma, local_ctx, e, table)
                except lc.LocalTypeError as err:
                    raise ChorTypeError("T-Done", str(err)) from None
            return At(te, rho)

        case ChorFun(f, x, dom, cod, body):
            _need_star(gamma, dom, "T-Fun")
            if cod is None:
                _need(f not in fv_chor(body), "T-Fun", f"recursive {f} needs a return type")
                return Arrow(dom, go(body, (*delta, (x, dom))))
            _need_star(gamma, cod, "T-Fun")
            got = go(body, (*delta, (f, Arrow(dom, cod)), (x, dom)), h=_local_hint(cod))
            _need(type_eq(got, cod), "T-Fun",
                  f"body has type {show_type(got)}, expected {show_type(cod)}")
            return Arrow(dom, cod)

        case ChorApp(fn, arg):
            tf = _expect(go(fn), Arrow, "T-App", show_chor(fn))
            ta = go(arg, h=_local_hint(tf.dom))
            _need(type_eq(ta, tf.dom), "T-App",
                  f"argument has type {show_type(ta)}, expected {show_type(tf.dom)}")
            return tf.cod

        case TyAbs(v, k, body):
            if v in gamma:
                v2 = fresh(v, set(gamma) | ftv_chor(body) | _ctx_ftv(delta, sigma))
                body = subst_type(body, v, TVar(v2))
                v = v2
            return Forall(v, k, go(body, g={**gamma, v: k}))

        case TyApp(fn, t):
            tf = _expect(go(fn), Forall, "T-TApp", show_chor(fn))
            _need(kind_of(gamma, t) is tf.kind, "T-TApp",
                  f"{show_type(t)} does not have kind {tf.kind}")
            return subst_in_type(tf.body, tf.var, t)

        case Fold(t, body):
            mu = _expect(t, Mu, "T-Fold", "the fold annotation")
            _need_star(gamma, mu, "T-Fold")
            want = subst_in_type(mu.body, mu.var, mu)
            got = go(body, h=_local_hint(want))
            _need(type_eq(got, want), "T-Fold",
                  f"body has type {show_type(got)}, expected {show_type(want)}")
            return mu

        case Unfold(body):
            mu = _expect(go(body), Mu, "T-Unfold", show_chor(body))
            return subst_in_type(mu.body, mu.var, mu)

        case Pair(a, b):
            return Prod(go(a), go(b))

        case Fst(body):
            return _expect(go(body), Prod, "T-Fst", show_chor(body)).left

        case Snd(body):
            return _expect(go(body), Prod, "T-Snd", show_chor(body)).right

        case Inl(t, body) | Inr(t, body):
            rule = "T-Inl" if isinstance(c, Inl) else "T-Inr"
            s = _expect(t, Sum, rule, "the injection annotation")
            _need_star(gamma, s, rule)
            want = s.left if isinstance(c, Inl) else s.right
            got = go(body, h=_local_hint(want))
            _need(type_eq(got, want), rule,
                  f"payload has type {show_type(got)}, expected {show_type(want)}")
            return s

        case Case(scrut, x, left, y, right):
            s = _expect(go(scrut), Sum, "T-Case", show_chor(scrut))
            tl = go(left, (*delta, (x, s.left)), h=hint)
            tr = go(right, (*delta, (y, s.right)), h=hint if hint is not None else _local_hint(tl))
            _need(type_eq(tl, tr), "T-Case",
                  f"branches disagree: {show_type(tl)} and {show_type(tr)}")
            return tl

        case Send(body, sender, dest):
            _need(loc_kinded(gamma, sender), "T-Send", f"{sender} is not a location")
            _need_locset(gamma, dest, "T-Send")
            t = _expect(go(body, h=hint), At, "T-Send", show_chor(body))
            _need(nec_in(sender, t.rho), "T-Send",
                  f"sender {sender} does not hold the value, which lives at {show_locset(t.rho)}")
            return At(t.local, Union(t.rho, dest))

        case Sync(sender, _, dest, body):
            _need(loc_kinded(gamma, sender), "T-Sync", f"{sender} is not a location")
            _need_locset(gamma, dest, "T-Sync")
            return go(body, h=hint)

        case Ite(rho, cond, then, orelse):
            _need_locset(gamma, rho, "T-If")
            tc = _expect(go(cond, h=lc.TBool()), At, "T-If", show_chor(cond))
            _need(isinstance(tc.local, lc.TBool), "T-If",
                  f"condition has type {show_type(tc)}")
            _need(subset(rho, tc.rho), "T-If",
                  f"{show_locset(rho)} does not all know the condition held at {show_locset(tc.rho)}")
            t1 = go(then, h=hint)
            t2 = go(orelse, h=hint if hint is not None else _local_hint(t1))
            _need(type_eq(t1, t2), "T-If", f"branches disagree: {show_type(t1)} and {show_type(t2)}")
            return t1

        case LetLocal(rho1, x, te, bound, body):
            _need_locset(gamma, rho1, "T-LetLocal")
            _need(lc.lkind(gamma, te), "T-LetLocal", f"ill-kinded local type {lc.show_ltype(te)}")
            t1 = _expect(go(bound, h=te), At, "T-LetLocal", show_chor(bound))
            _need(lc.ltype_eq(t1.local, te), "T-LetLocal",
                  f"bound value has type {lc.show_ltype(t1.local)}, expected {lc.show_ltype(te)}")
            _need(subset(rho1, t1.rho), "T-LetLocal",
                  f"{show_locset(rho1)} do not all hold the value at {show_locset(t1.rho)}")
            return go(body, s=(*sigma, (rho1, x, te)), h=hint)

        case LetType(rho2, v, k, bound, body):
            rule = {Kind.LOC: "T-LetLoc", Kind.LOCSET: "T-LetLocSet",
                    Kind.LOCAL: "T-LetLocalTy"}.get(k)
            _need(rule is not None, "T-LetType", "type-let cannot bind kind *")
            _need_locset(gamma, rho2, rule)
            want = {Kind.LOC: lc.TLoc(rho2), Kind.LOCSET: lc.TLocSet(rho2),
                    Kind.LOCAL: lc.TRep()}[k]
            t1 = _expect(go(bound, h=want), At, rule, show_chor(bound))
            rho3 = t1.rho
            _need(type(t1.local) is type(want), rule, f"bound value has type {show_type(t1)}")
            if k is not Kind.LOCAL:
                rho1 = t1.local.rho
                _need(subset(rho1, rho2), rule,
                      f"the value may name {show_locset(rho1)}, which is not within "
                      f"{show_locset(rho2)}")
            _need(subset(rho2, rho3), rule,
                  f"{show_locset(rho2)} do not all know the value held at {show_locset(rho3)}")
            if v in gamma:
                v2 = fresh(v, set(gamma) | ftv_chor(body) | _ctx_ftv(delta, sigma))
                body = subst_type(body, v, TVar(v2))
                v = v2
            t = go(body, g={**gamma, v: k}, h=hint)
            _need(v not in ftv_type(t) and kind_of(gamma, t) is Kind.STAR, rule,
                  f"the body's type {show_type(t)} mentions the bound variable {v}")
            return t

    raise ChorTypeError("T-?", f"not a choreography: {c!r}")


def _ctx_ftv(delta: ChorCtx, sigma: LocalCtx) -> frozenset[str]:
    out: set[str] = set()
    for _, t in delta:
        out |= ftv_type(t)
    for r, _, t in sigma:
        out |= ftv_type(r) | lc.ftv_ltype(t)
    return frozenset(out)
