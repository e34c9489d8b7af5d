import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chorlang import local as lc
from chorlang import samples
from chorlang.chor import ChorFun, ChorVar, Done, is_chor_value, show_chor
from chorlang.conformance import GenConfig, gen_well_typed
from chorlang.locsets import Loc, set_of
from chorlang.parser import parse_chor
from chorlang.semantics import (
    EVERYWHERE, RApp, RDone, RSend, UnknownRedex, cloc, enabled_steps, rloc, run, show_redex,
    step_with,
)

S = set_of
AB = samples.table("A", "B")


def test_redex_footprints() -> None:
    assert rloc(RSend(Loc("A"), lc.Int(1), S("B"))) == (S("A"), S("B"))
    assert rloc(RApp()) is EVERYWHERE
    assert rloc(RDone(S("A"), lc.Int(1), lc.Int(1))) == (S("A"),)


def test_choreography_footprints() -> None:
    assert cloc(ChorVar("X")) == ()
    assert cloc(samples.remote_sum()) == (S("A"), S("B"), S("A"))
    assert cloc(ChorFun("F", "X", lc.TInt(), None, ChorVar("X"))) == ()


def test_multicast_collects_every_recipient() -> None:
    [(redex, after)] = enabled_steps(samples.multicast(), samples.table("A", "B", "C"))
    assert show_redex(redex) == "Send(A, 3, {B,C})"
    assert after == Done(S("A", "B", "C"), lc.Int(3))
    assert show_chor(after) == "{A,B,C}.3"


def test_load_balancer_displayed_steps() -> None:
    table = samples.table(*samples.LB_LOCATIONS)
    c = samples.load_balancer_raw()
    while not lc.is_lvalue(c.bound.body.expr):
        (_, c), *_ = enabled_steps(c, table)
    assert show_chor(c.bound) == "M.1 ~> {A,B,C}"
    lines = []
    for _ in range(2):
        (r, c), *_ = enabled_steps(c, table)
        lines.append(f"{show_redex(r)} => {show_chor(c)}")
    assert lines == [
        "Send(M, 1, {A,B,C}) => let {M,A,B,C}.alpha :: loc := {M,A,B,C}.1 in "
        "{alpha}.(20 + 22) ~> C",
        "LetTy({M,A,B,C}, A) => A.(20 + 22) ~> C",
    ]


def test_independent_branches_step_together() -> None:
    c = parse_chor("if A.(1 < 2) @ A then B.(2+3) else B.(2+3)")
    after = {show_chor(x) for _, x in enabled_steps(c, AB)}
    assert "if A.(1 < 2) @ A then B.5 else B.5" in after


def test_branches_do_not_overtake_a_condition_that_involves_them() -> None:
    c = parse_chor("if B.true ~> A @ A then B.(2+3) else B.(2+3)")
    steps = enabled_steps(c, AB)
    assert [show_redex(r) for r, _ in steps] == ["Send(B, true, {A})"]


def test_runs() -> None:
    assert run(samples.remote_sum(), AB, 10).final == Done(S("A", "B"), lc.Int(5))
    lb = run(samples.load_balancer(), samples.table(*samples.LB_LOCATIONS), 100)
    assert lb.status == "value" and lb.final == Done(S("C"), lc.Int(42))
    worker = run(samples.run_at_worker(), samples.table("C", "W"), 100, "exhaustive")
    assert worker.terminals == {Done(S("C"), lc.Int(42))}


def test_values_have_no_redex() -> None:
    value = Done(S("A"), lc.Int(5))
    assert enabled_steps(value, AB) == ()
    with pytest.raises(UnknownRedex):
        step_with(value, RDone(S("A"), lc.Int(5), lc.Int(5)), AB)


def test_stepping_with_a_listed_redex_reproduces_the_successor() -> None:
    c = samples.load_balancer()
    table = samples.table(*samples.LB_LOCATIONS)
    for r, nxt in enabled_steps(c, table):
        assert step_with(c, r, table) == nxt


TABLE = GenConfig().table
programs = st.builds(lambda seed: gen_well_typed(GenConfig(seed=seed, max_depth=3))[0],
                     st.integers(0, 10**6))


@settings(max_examples=150, deadline=None)
@given(programs)
def test_every_schedule_reaches_the_leftmost_value(c) -> None:
    leftmost = run(c, TABLE, 500)
    assert leftmost.status == "value"
    every = run(c, TABLE, 5000, "exhaustive")
    if every.status == "value":
        assert every.terminals == {leftmost.final}


def footprint_of(r, loc: str) -> bool:
    fp = rloc(r)
    return fp is EVERYWHERE or any(loc in {e.name for e in _names(rho)} for rho in fp)


def _names(rho):
    from chorlang.locsets import Sng, Union
    match rho:
        case Sng(e):
            return [e]
        case Union(a, b):
            return _names(a) + _names(b)
    return []


@settings(max_examples=150, deadline=None)
@given(programs, st.integers(0, 10**6))
def test_each_location_sees_its_redices_in_program_order(c, seed) -> None:
    leftmost = run(c, TABLE, 500)
    shuffled = run(c, TABLE, 500, "random", seed)
    assert shuffled.final == leftmost.final
    for loc in GenConfig().locations:
        mine = [show_redex(r) for r, _ in leftmost.trace if footprint_of(r, loc)]
        theirs = [show_redex(r) for r, _ in shuffled.trace if footprint_of(r, loc)]
        assert mine == theirs


@settings(max_examples=150, deadline=None)
@given(programs)
def test_values_are_exactly_the_states_without_steps_for_typed_programs(c) -> None:
    rng = random.Random(0)
    for _ in range(200):
        succ = enabled_steps(c, TABLE)
        if is_chor_value(c):
            assert succ == ()
            return
        assert succ
        _, c = rng.choice(succ)
