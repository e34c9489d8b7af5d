"""Small reference choreographies used by the tests, the CLI and the conformance suites."""

from __future__ import annotations

from . import local as lc
from .chor import (
    At, Chor, ChorApp, ChorFun, ChorVar, Done, Ite, LetLocal, LetType, Send, Sync,
)
from .locsets import Kind, Loc, Sng, TVar, set_of

S = set_of
ALPHA = Sng(TVar("alpha"))


def table(*names: str) -> lc.LocationTable:
    return lc.LocationTable.of(names)


def multicast() -> Chor:
    """`A.3 ~> {B,C}`."""
    return Send(Done(S("A"), lc.Int(3)), Loc("A"), S("B", "C"))


def remote_sum() -> Chor:
    """`A.(2 + 3) ~> B`."""
    return Send(Done(S("A"), lc.Add(lc.Int(2), lc.Int(3))), Loc("A"), S("B"))


def shared_sum() -> Chor:
    """`{A,B}.(2 + 3)`: both locations compute the same sum independently."""
    return Done(S("A", "B"), lc.Add(lc.Int(2), lc.Int(3)))


def if_sync(cond: bool = True) -> Chor:
    """A decides, tells B which branch was taken, and B returns 1 or 2."""
    return Ite(
        S("A"), Done(S("A"), lc.Bool(cond)),
        Sync(Loc("A"), "L", S("B"), Done(S("B"), lc.Int(1))),
        Sync(Loc("A"), "R", S("B"), Done(S("B"), lc.Int(2))),
    )


def _pick_worker() -> lc.Term:
    # Stubbed task counts: A is less busy than B.
    return lc.If(lc.Lt(lc.Int(1), lc.Int(2)), lc.Int(LB_CODES["A"]), lc.Int(LB_CODES["B"]))


LB_LOCATIONS = ("M", "A", "B", "C")
LB_CODES = {name: i for i, name in enumerate(LB_LOCATIONS)}
LB_WORK = lc.Add(lc.Int(20), lc.Int(22))


def load_balancer_raw() -> Chor:
    """The manager M picks a worker and the worker's result goes to the client C."""
    return LetType(
        S(*LB_LOCATIONS), "alpha", Kind.LOC,
        Send(Done(S("M"), _pick_worker()), Loc("M"), S("A", "B", "C")),
        Send(Done(ALPHA, LB_WORK), TVar("alpha"), S("C")),
    )


def load_balancer() -> Chor:
    """The load balancer with the result bound at C, so the program type avoids alpha."""
    return LetType(
        S(*LB_LOCATIONS), "alpha", Kind.LOC,
        Send(Done(S("M"), _pick_worker()), Loc("M"), S("A", "B", "C")),
        LetLocal(S("C"), "res", lc.TInt(),
                 Send(Done(ALPHA, LB_WORK), TVar("alpha"), S("C")),
                 Done(S("C"), lc.Var("res"))),
    )


def run_at_worker() -> Chor:
    """C ships a function and its argument to W, which runs it and returns the result."""
    inc = lc.Fun("inc", "n", lc.TInt(), lc.TInt(), lc.Add(lc.Var("n"), lc.Int(1)))
    body = LetLocal(
        S("W"), "f", lc.TArrow(lc.TInt(), lc.TInt()), Send(ChorVar("F"), Loc("C"), S("W")),
        LetLocal(S("W"), "x", lc.TInt(), Send(ChorVar("X"), Loc("C"), S("W")),
                 Send(Done(S("W"), lc.App(lc.Var("f"), lc.Var("x"))), Loc("W"), S("C"))),
    )
    run = ChorFun("runAtW", "F", At(lc.TArrow(lc.TInt(), lc.TInt()), S("C")), None,
                  ChorFun("runAtW2", "X", At(lc.TInt(), S("C")), None, body))
    call = ChorApp(ChorApp(run, Done(S("C"), inc)), Done(S("C"), lc.Int(41)))
    return LetLocal(S("C"), "r", lc.TInt(), call, Done(S("C"), lc.Var("r")))


def escaping_location() -> Chor:
    """`let A.alpha := A.repr(A) in alpha.(1 + 1)`: the body type mentions alpha."""
    return LetType(S("A"), "alpha", Kind.LOC, Done(S("A"), lc.Int(0)),
                   Done(ALPHA, lc.Add(lc.Int(1), lc.Int(1))))


def relayed_location() -> Chor:
    """Both A and B learn alpha; B receives alpha's sum, so the type is int @ B."""
    return LetType(
        S("A", "B"), "alpha", Kind.LOC, Done(S("A", "B"), lc.Int(0)),
        LetLocal(S("B"), "x", lc.TInt(),
                 Send(Done(ALPHA, lc.Add(lc.Int(1), lc.Int(1))), TVar("alpha"), S("B")),
                 Done(S("B"), lc.Var("x"))),
    )


def uninformed_worker() -> Chor:
    """M tells only B and C which of A or B works: the chosen location may not know."""
    return LetType(
        S("M", "B", "C"), "alpha", Kind.LOC,
        Send(Done(S("M"), lc.Ann(lc.Int(LB_CODES["A"]), lc.TLoc(S("A", "B")))), Loc("M"),
             S("B", "C")),
        Done(S("C"), lc.Int(0)),
    )


def capture() -> Chor:
    """A location variable that, once instantiated, would capture L's x without renaming."""
    a = Sng(TVar("alpha"))
    return LetLocal(
        a, "x", lc.TInt(), Done(a, lc.Int(2)),
        LetLocal(S("L"), "x", lc.TInt(), Done(S("L"), lc.Int(3)),
                 LetLocal(a, "y", lc.TInt(), Send(Done(S("L"), lc.Var("x")), Loc("L"), a),
                          Done(a, lc.Add(lc.Var("x"), lc.Var("y"))))),
    )


def substituted_function() -> Chor:
    """A shared let whose body is a function that uses the bound value only at A."""
    body = ChorFun("F", "X", At(lc.TInt(), S("A")), None,
                   LetLocal(S("A"), "y", lc.TInt(), Done(S("A", "B"), lc.Var("x")),
                            Done(S("A"), lc.Int(2))))
    return LetLocal(S("A", "B"), "x", lc.TInt(), Done(S("A", "B"), lc.Int(1)), body)


def local_loop() -> lc.Term:
    """`(fun f(x: int): int = f x) 0`, which never terminates."""
    f = lc.Fun("f", "x", lc.TInt(), lc.TInt(), lc.App(lc.Var("f"), lc.Var("x")))
    return lc.App(f, lc.Int(0))


def loop_then_sum() -> Chor:
    """`let A.x := A.loop in {A,B}.(1 + 1)`."""
    return LetLocal(S("A"), "x", lc.TInt(), Done(S("A"), local_loop()),
                    Done(S("A", "B"), lc.Add(lc.Int(1), lc.Int(1))))
