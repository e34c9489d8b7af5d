from hypothesis import example, given, settings
from hypothesis import strategies as st

from chorlang import local as lc
from chorlang import samples
from chorlang.chor import (
    ChorFun, ChorVar, Done, LetLocal, LetType, Send, TyAbs, TyApp, children, fv_chor, fv_rho,
    is_chor_value, local_occurrences, named_locs, show_chor, subst_chor, subst_in_type,
    subst_local, subst_type,
)
from chorlang.conformance import GenConfig, gen_well_typed
from chorlang.locsets import Kind, Loc, Sng, TVar, fv_set, set_of
from chorlang.semantics import run

S = set_of
A5 = Done(S("A"), lc.Int(5))
INT_A = lc.TInt()


def test_choreography_variables_are_replaced_unless_shadowed() -> None:
    assert subst_chor(ChorVar("X"), "X", A5) == A5
    ident = ChorFun("F", "X", INT_A, None, ChorVar("X"))
    assert subst_chor(ident, "X", A5) == ident


def test_choreography_substitution_renames_a_capturing_parameter() -> None:
    fn = ChorFun("F", "Y", INT_A, None, ChorVar("X"))
    out = subst_chor(fn, "X", ChorVar("Y"))
    assert isinstance(out, ChorFun) and out.param != "Y"
    assert out.body == ChorVar("Y")
    assert "Y" in fv_chor(out)


def test_local_substitution_respects_namespaces() -> None:
    x_at = lambda *locs: Done(S(*locs), lc.Var("x"))  # noqa: E731
    assert subst_local(x_at("A", "B"), S("A", "B"), "x", lc.Int(1)) == Done(S("A", "B"),
                                                                           lc.Int(1))
    assert subst_local(x_at("A", "B"), S("A"), "x", lc.Int(1)) is None
    assert subst_local(x_at("A"), S("B"), "x", lc.Int(1)) == x_at("A")


def test_type_substitution_into_sends_and_namespaces() -> None:
    send = Send(Done(S("A"), lc.Add(lc.Int(1), lc.Int(1))), Loc("A"), Sng(TVar("alpha")))
    assert subst_type(send, "alpha", Loc("B")) == Send(send.body, Loc("A"), S("B"))
    at_alpha = Sng(TVar("alpha"))
    let = LetLocal(at_alpha, "x", INT_A, Done(at_alpha, lc.Int(1)), Done(at_alpha, lc.Var("x")))
    assert subst_type(let, "alpha", Loc("A")) == LetLocal(
        S("A"), "x", INT_A, Done(S("A"), lc.Int(1)), Done(S("A"), lc.Var("x")))


def test_instantiating_a_location_never_captures_a_local_binder() -> None:
    c = samples.capture()
    out = subst_type(c, "alpha", Loc("L"))
    assert run(out, samples.table("L"), 50).final == Done(S("L"), lc.Int(5))
    poly = TyApp(TyAbs("alpha", Kind.LOC, c), Loc("L"))
    assert run(poly, samples.table("L"), 50).final == Done(S("L"), lc.Int(5))


def test_named_locations() -> None:
    assert named_locs(ChorVar("X")) == frozenset()
    assert named_locs(samples.remote_sum()) == {"A", "B"}
    assert {"M", "A", "B", "C"} <= named_locs(samples.load_balancer())


def test_free_local_variables_per_namespace() -> None:
    ax = Done(S("A"), lc.Var("x"))
    assert fv_rho(ax, S("A")) == {"x"}
    assert fv_rho(ax, S("B")) == frozenset()
    bound = LetLocal(S("A"), "x", INT_A, Done(S("A"), lc.Int(1)), ax)
    assert fv_rho(bound, S("A")) == frozenset()


def test_value_grammar() -> None:
    assert is_chor_value(A5)
    assert not is_chor_value(samples.remote_sum())
    assert is_chor_value(ChorFun("F", "X", INT_A, None, ChorVar("X")))
    assert not is_chor_value(Done(S("A"), lc.Add(lc.Int(1), lc.Int(1))))


def test_printer() -> None:
    assert show_chor(samples.remote_sum()) == "A.(2 + 3) ~> B"
    assert show_chor(samples.multicast()) == "A.3 ~> {B,C}"
    assert show_chor(samples.if_sync()) == (
        "if A.true @ A then sync A[left] ~> B; B.1 else sync A[right] ~> B; B.2")


programs = st.builds(lambda seed, depth: gen_well_typed(GenConfig(seed=seed, max_depth=depth))[0],
                     st.integers(0, 10**6), st.integers(1, 4))


@settings(max_examples=150, deadline=None)
@given(programs)
def test_substituting_an_absent_variable_changes_nothing(c) -> None:
    assert subst_chor(c, "Unused", A5) == c
    assert subst_type(c, "unused", Loc("A")) == c


def _binders(c):
    if isinstance(c, (LetType, TyAbs)) and c.kind is Kind.LOC:
        yield c.var, c.body
    for k in children(c):
        yield from _binders(k)


@settings(max_examples=200, deadline=None)
@given(programs, st.sampled_from("ABCD"))
@example(gen_well_typed(GenConfig(seed=932, max_depth=4))[0], "B")
def test_type_substitution_keeps_free_locals_free(c, name) -> None:
    for v, body in _binders(c):
        out = subst_type(body, v, Loc(name))
        assert named_locs(out) <= named_locs(body) | {name}
        moved = {(subst_in_type(r, v, Loc(name)), x)
                 for r, x in local_occurrences(body) if v in fv_set(r)}
        assert moved <= local_occurrences(out)


def test_the_capture_example_keeps_its_free_variable_free() -> None:
    body = samples.capture().body
    out = subst_type(body, "alpha", Loc("L"))
    assert fv_rho(body, Sng(TVar("alpha"))) == {"x"}
    assert fv_rho(out, S("L")) == {"x"}
