from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chorlang import local as lc
from chorlang import samples
from chorlang.chor import Ite, Sync, children, is_chor_value
from chorlang.conformance import GenConfig, gen_well_typed
from chorlang.locsets import Loc, set_of
from chorlang.network import (
    NAllow, NRecv, NRet, NSendTo, NSeq, NUnit, is_net_value, show_net,
)
from chorlang.parser import parse_chor
from chorlang.projection import (
    FREE_TYPEVAR, ProjectionFailure, canon_net, leq, leq_system, merge, project,
    project_system, seq_collapse,
)
from chorlang.semantics import run

from oracles import programs_to_depth

S = set_of
ONE, TWO, FIVE = NRet(lc.Int(1)), NRet(lc.Int(2)), NRet(lc.Int(5))
SUM = NRet(lc.Add(lc.Int(2), lc.Int(3)))
A = Loc("A")


def test_merging_one_sided_allows() -> None:
    merged = merge(NAllow(A, ONE, None), NAllow(A, None, TWO))
    assert merged == NAllow(A, ONE, TWO)
    assert show_net(merged) == "allow A { left => ret 1 | right => ret 2 }"
    assert merge(ONE, TWO) is None
    assert merge(SUM, SUM) == SUM


def test_sequencing_collapses_finished_prefixes() -> None:
    assert seq_collapse(NUnit(), FIVE) == FIVE
    assert seq_collapse(NUnit(), NRet(lc.Int(3))) == NRet(lc.Int(3))
    assert seq_collapse(SUM, NRecv(A)) == NSeq(SUM, NRecv(A))


def test_remote_sum_projections() -> None:
    c = samples.remote_sum()
    assert show_net(project(c, "A")) == "send (ret (2 + 3)) to B"
    assert show_net(project(c, "B")) == "recv A"
    assert project_system(c, ["A", "B"]) == (("A", NSendTo(SUM, S("B"))), ("B", NRecv(A)))


def test_unused_bindings_project_away() -> None:
    c = parse_chor("let A.x : int := A.(1 + 1) in B.(2 + 3)")
    assert project(c, "B") == SUM


def test_selections_merge_into_one_allow() -> None:
    assert project(samples.if_sync(), "B") == NAllow(A, ONE, TWO)


def test_a_location_outside_the_binders_cannot_use_the_bound_location() -> None:
    c = parse_chor("let B.alpha :: loc := B.0 in A.1 ~> {alpha}")
    with pytest.raises(ProjectionFailure) as err:
        project(c, "A")
    assert err.value.reason == FREE_TYPEVAR and err.value.path == (1,)


def test_system_projection_needs_locations_and_idles_bystanders() -> None:
    with pytest.raises(ValueError):
        project_system(samples.remote_sum(), [])
    system = project_system(samples.remote_sum(), ["A", "B", "C"])
    assert dict(system)["C"] == NUnit()


def test_leq_examples() -> None:
    assert leq(NAllow(A, ONE, None), NAllow(A, ONE, TWO))
    assert not leq(NAllow(A, ONE, TWO), NAllow(A, ONE, None))
    assert leq(FIVE, NSeq(NUnit(), FIVE))
    assert leq(SUM, SUM)


# ---------------------------------------------------------------- bounded enumeration


DEPTH2 = programs_to_depth(2)
DEPTH3 = programs_to_depth(3)


def test_leq_is_reflexive_at_depth_three() -> None:
    assert all(leq(e, e) for e in DEPTH3)


def test_leq_is_antisymmetric_and_transitive_at_depth_two() -> None:
    for a, b in product(DEPTH2, repeat=2):
        if leq(a, b) and leq(b, a):
            assert canon_net(a) == canon_net(b)
    for a, b, c in product(DEPTH2, repeat=3):
        if leq(a, b) and leq(b, c):
            assert leq(a, c)


@settings(max_examples=3000, deadline=None)
@given(st.sampled_from(DEPTH3), st.sampled_from(DEPTH3), st.sampled_from(DEPTH3))
def test_leq_laws_at_depth_three(a, b, c) -> None:
    if leq(a, b) and leq(b, a):
        assert canon_net(a) == canon_net(b)
    if leq(a, b) and leq(b, c):
        assert leq(a, c)


@settings(max_examples=3000, deadline=None)
@given(st.sampled_from(DEPTH3), st.sampled_from(DEPTH3), st.sampled_from(DEPTH2))
def test_merge_laws(a, b, c) -> None:
    assert merge(a, a) == a
    ab = merge(a, b)
    assert ab == merge(b, a)
    if ab is not None:
        assert leq(a, ab) and leq(b, ab)
        bc = merge(b, c)
        if bc is not None:
            left, right = merge(ab, c), merge(a, bc)
            assert left == right


# ---------------------------------------------------------------- generated programs


TABLE = GenConfig().table
LOCS = GenConfig().locations
generated = st.builds(lambda seed, depth: gen_well_typed(GenConfig(seed=seed, max_depth=depth))[0],
                      st.integers(0, 10**6), st.integers(1, 4))


def _mentions(c, kinds) -> bool:
    return isinstance(c, kinds) or any(_mentions(k, kinds) for k in children(c))


@settings(max_examples=200, deadline=None)
@given(generated)
def test_projections_merge_with_themselves(c) -> None:
    for loc in LOCS:
        e = project(c, loc)
        assert merge(e, e) == e


@settings(max_examples=200, deadline=None)
@given(generated)
def test_values_project_to_values(c) -> None:
    v = run(c, TABLE, 500).final
    assert is_chor_value(v)
    for loc in LOCS:
        e = project(v, loc)
        assert is_net_value(e), show_net(e)


@settings(max_examples=200, deadline=None)
@given(generated)
def test_projection_is_total_without_choices(c) -> None:
    if not _mentions(c, (Ite, Sync)):
        assert len(project_system(c, LOCS)) == len(LOCS)


@settings(max_examples=100, deadline=None)
@given(generated)
def test_projected_system_is_below_itself(c) -> None:
    system = project_system(c, LOCS)
    assert leq_system(system, system)
