from hypothesis import given, settings
from hypothesis import strategies as st

from chorlang import local as lc
from chorlang.conformance import gen_local_typed
from chorlang.locsets import Kind, Loc, Sng, TVar, set_of

TABLE = lc.LocationTable(((0, "A"), (1, "B")), "C")
AB = set_of("A", "B")


def run(e: lc.Term) -> lc.Term:
    v, _ = lc.run_local(e, 1000)
    return lc.strip(v)


def test_arithmetic_and_conditionals_step() -> None:
    assert lc.lstep(lc.Add(lc.Int(2), lc.Int(3))) == lc.Int(5)
    assert lc.lstep(lc.If(lc.Bool(True), lc.Int(0), lc.Int(1))) == lc.Int(0)


def test_stubbed_task_counts_compare_in_finitely_many_steps() -> None:
    tasks = lc.Fun("tasks", "l", lc.TInt(), lc.TInt(),
                   lc.If(lc.Eq(lc.Var("l"), lc.Int(0)), lc.Int(1), lc.Int(2)))
    e = lc.Lt(lc.App(tasks, lc.Int(0)), lc.App(tasks, lc.Int(1)))
    path = [e]
    while (nxt := lc.lstep(path[-1])) is not None:
        assert reducts(path[-1]) == {nxt}
        path.append(nxt)
    assert path[-1] == lc.Bool(True)
    assert len(path) < 20


def test_value_grammar() -> None:
    assert lc.is_lvalue(lc.Int(5))
    assert not lc.is_lvalue(lc.Add(lc.Int(2), lc.Int(3)))
    assert lc.is_lvalue(lc.Cons(lc.Int(1), lc.Nil(lc.TInt())))
    assert lc.is_lvalue(lc.RepArrow(lc.RepInt(), lc.RepBool()))
    assert not lc.is_lvalue(lc.Var("x"))


def test_location_representations_are_checked_against_annotations() -> None:
    assert lc.ltype({}, (), lc.Int(0), TABLE, lc.TLoc(AB)) == lc.TLoc(AB)
    pick = lc.If(lc.Var("e"), lc.Int(0), lc.Int(1))
    assert lc.ltype({}, (("e", lc.TBool()),), pick, TABLE, lc.TLoc(AB)) == lc.TLoc(AB)
    assert lc.ltype({}, (), lc.Int(2), TABLE, lc.TLoc(AB)) is None


def test_local_kinding() -> None:
    assert lc.lkind({}, lc.TArrow(lc.TInt(), lc.TBool()))
    assert not lc.lkind({}, TVar("a"))
    assert lc.lkind({"a": Kind.LOCAL}, TVar("a"))
    assert not lc.lkind({}, lc.TLoc(Sng(TVar("a"))))
    assert lc.lkind({"a": Kind.LOC}, lc.TLoc(Sng(TVar("a"))))


def test_reification() -> None:
    assert lc.reify_loc(lc.Int(0), TABLE) == "A"
    assert lc.reify_loc(lc.Int(7), TABLE) == "C"
    codes = lc.Cons(lc.Int(0), lc.Cons(lc.Int(1), lc.Cons(lc.Int(0), lc.Nil(lc.TInt()))))
    assert set(lc.reify_locset(codes, TABLE)) == {"A", "B"}
    assert lc.reify_tyrep(lc.RepArrow(lc.RepInt(), lc.RepBool())) == lc.TArrow(lc.TInt(),
                                                                              lc.TBool())
    assert lc.reify_bool(lc.Bool(False)) is False


def test_every_location_round_trips_through_its_code() -> None:
    for table in (TABLE, lc.LocationTable.of("MABC")):
        for name in table.locations:
            assert lc.reify_loc(lc.Int(table.code_of(name)), table) == name


def test_substitution_avoids_capture() -> None:
    e = lc.Add(lc.Var("x"), lc.Int(1))
    assert lc.lsubst_term(e, "x", lc.Int(4)) == lc.Add(lc.Int(4), lc.Int(1))
    fn = lc.Fun("f", "y", lc.TInt(), lc.TInt(), lc.Var("x"))
    out = lc.lsubst_term(fn, "x", lc.Var("y"))
    assert isinstance(out, lc.Fun) and out.param != "y" and out.body == lc.Var("y")
    tabs = lc.TAbs("a", lc.Nil(TVar("b")))
    out = lc.lsubst_type(tabs, "b", TVar("a"))
    assert out.var != "a" and out.body == lc.Nil(TVar("a"))
    assert "a" in lc.ftv_term(out)


def test_recursive_functions_unroll() -> None:
    body = lc.If(lc.Lt(lc.Var("n"), lc.Int(1)), lc.Int(0),
                 lc.Add(lc.Var("n"), lc.App(lc.Var("sum"), lc.Add(lc.Var("n"), lc.Int(-1)))))
    total = lc.Fun("sum", "n", lc.TInt(), lc.TInt(), body)
    assert run(lc.App(total, lc.Int(4))) == lc.Int(10)


def test_polymorphic_identity() -> None:
    ident = lc.TAbs("a", lc.Fun("id", "x", TVar("a"), TVar("a"), lc.Var("x")))
    e = lc.App(lc.TApp(ident, lc.TBool()), lc.Bool(True))
    assert lc.ltype({}, (), e, TABLE) == lc.TBool()
    assert run(e) == lc.Bool(True)


def test_list_case_and_locations_keep_their_types() -> None:
    codes = lc.Ann(lc.Cons(lc.Int(0), lc.Nil(lc.TLoc(AB))), lc.TList(lc.TLoc(AB)))
    e = lc.ListCase(codes, lc.Int(1), "h", "t", lc.Var("h"))
    assert lc.ltype({}, (), e, TABLE, lc.TLoc(AB)) == lc.TLoc(AB)
    assert run(e) == lc.Int(0)


def test_ascriptions_collapse_instead_of_piling_up() -> None:
    loop = lc.Fun("f", "x", lc.TInt(), lc.TInt(), lc.App(lc.Var("f"), lc.Var("x")))
    e = lc.App(loop, lc.Int(0))
    for _ in range(300):
        e = lc.lstep(e)
    assert len(lc.show_term(e)) < 200


# ---------------------------------------------------------------- independent step relation


def reducts(e: lc.Term) -> set[lc.Term]:
    """Every term the call-by-value rules allow `e` to step to, gathered rule by rule."""
    V = lc.is_lvalue
    out: set = set()

    def congruence(parts, rebuild):
        for i, p in enumerate(parts):
            if all(V(q) for q in parts[:i]) and not V(p):
                for p2 in reducts(p):
                    out.add(rebuild(*parts[:i], p2, *parts[i + 1:]))

    match e:
        case lc.Add(a, b) | lc.Lt(a, b) | lc.Eq(a, b) | lc.Cons(a, b) | lc.RepArrow(a, b):
            congruence((a, b), type(e))
            x, y = lc.strip(a), lc.strip(b)
            if V(a) and V(b) and isinstance(x, lc.Int) and isinstance(y, lc.Int):
                if isinstance(e, lc.Add):
                    out.add(lc.Int(x.value + y.value))
                if isinstance(e, lc.Lt):
                    out.add(lc.Bool(x.value < y.value))
            if isinstance(e, lc.Eq) and V(a) and V(b) and type(x) is type(y) \
                    and isinstance(x, (lc.Int, lc.Bool)):
                out.add(lc.Bool(x.value == y.value))
        case lc.App(f, a):
            congruence((f, a), lc.App)
            fn = lc.strip(f)
            if V(f) and V(a) and isinstance(fn, lc.Fun):
                body = lc.lsubst_term(fn.body, fn.fname, fn)
                out.add(lc.Ann(lc.lsubst_term(body, fn.param, lc.wrap(a, fn.dom)), fn.cod))
        case lc.TApp(f, t):
            congruence((f,), lambda k: lc.TApp(k, t))
            fn = lc.strip(f)
            if V(f) and isinstance(fn, lc.TAbs):
                out.add(lc.lsubst_type(fn.body, fn.var, t))
        case lc.If(c, a, b):
            congruence((c,), lambda k: lc.If(k, a, b))
            if V(c) and lc.strip(c) == lc.Bool(True):
                out.add(a)
            if V(c) and lc.strip(c) == lc.Bool(False):
                out.add(b)
        case lc.ListCase(s, n, h, t, c):
            congruence((s,), lambda k: lc.ListCase(k, n, h, t, c))
            sv = lc.strip(s)
            if V(s) and isinstance(sv, lc.Nil):
                out.add(n)
            if V(s) and isinstance(sv, lc.Cons):
                hd, tl = sv.head, sv.tail
                if isinstance(s, lc.Ann) and isinstance(s.ty, lc.TList):
                    hd, tl = lc.wrap(hd, s.ty.elem), lc.wrap(tl, s.ty)
                out.add(lc.lsubst_term(lc.lsubst_term(c, h, hd), t, tl))
        case lc.Ann(x, t):
            if isinstance(x, lc.Ann) and lc.ltype_eq(x.ty, t):
                out.add(x)
            else:
                congruence((x,), lambda k: lc.Ann(k, t))
                if V(x) and lc.value_type(x) is not None and lc.ltype_eq(lc.value_type(x), t):
                    out.add(x)
    return out


def raw_terms() -> st.SearchStrategy[lc.Term]:
    leaves = st.one_of(
        st.integers(-3, 3).map(lc.Int), st.booleans().map(lc.Bool),
        st.just(lc.Nil(lc.TInt())), st.just(lc.Var("x")), st.just(lc.RepInt()),
    )

    def grow(sub):
        return st.one_of(
            st.builds(lc.Add, sub, sub), st.builds(lc.Lt, sub, sub), st.builds(lc.Eq, sub, sub),
            st.builds(lc.Cons, sub, sub), st.builds(lc.If, sub, sub, sub),
            st.builds(lambda b: lc.Fun("f", "x", lc.TInt(), lc.TInt(), b), sub),
            st.builds(lc.App, sub, sub), st.builds(lambda a: lc.Ann(a, lc.TInt()), sub),
            st.builds(lambda s, n, c: lc.ListCase(s, n, "h", "t", c), sub, sub, sub),
            st.builds(lambda b: lc.TApp(lc.TAbs("a", b), lc.TBool()), sub),
        )

    return st.recursive(leaves, grow, max_leaves=12)


@settings(max_examples=1000, deadline=None)
@given(raw_terms())
def test_lstep_is_the_unique_reduct(e) -> None:
    found = reducts(e)
    assert len(found) <= 1
    assert lc.lstep(e) == (next(iter(found)) if found else None)
    if lc.is_lvalue(e):
        assert lc.lstep(e) is None


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_local_progress_and_preservation(seed) -> None:
    e, t = gen_local_typed(seed, 3)
    for _ in range(200):
        assert lc.ltype({}, (), e, TABLE, t) is not None, lc.show_term(e)
        nxt = lc.lstep(e)
        if nxt is None:
            assert lc.is_lvalue(e), lc.show_term(e)
            return
        assert reducts(e) == {nxt}
        e = nxt


def test_printer_shows_local_syntax() -> None:
    e = lc.Cons(lc.Add(lc.Int(1), lc.Int(2)), lc.Nil(lc.TLoc(Sng(Loc("A")))))
    assert lc.show_term(e) == "1 + 2 :: nil[loc{A}]"
    assert lc.show_ltype(lc.TArrow(lc.TArrow(lc.TInt(), lc.TInt()), lc.TList(lc.TBool()))) \
        == "(int -> int) -> list bool"
