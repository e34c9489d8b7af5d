import random

from hypothesis import given, settings
from hypothesis import strategies as st

from chorlang import local as lc
from chorlang import samples
from chorlang.conformance import GenConfig, gen_well_typed, mutual_receive
from chorlang.locsets import Loc, set_of
from chorlang.network import (
    IOTA, NAllow, NAmIIn, NRecv, NRet, NSendTo, NUnit, RecvOffer, SendLabel, SysComm,
    SysInternal, SysSync, explore, is_terminal_values, net_steps, show_system, simulate,
    system_steps,
)
from chorlang.projection import project_system

S = set_of
AB = samples.table("A", "B")
FIVE = NRet(lc.Int(5))
SUM = NRet(lc.Add(lc.Int(2), lc.Int(3)))


def test_local_steps() -> None:
    assert net_steps("L", SUM, AB) == ((IOTA, FIVE),)
    assert net_steps("L", NSendTo(FIVE, S("B")), AB) == (
        (SendLabel(lc.Int(5), frozenset({"B"})), FIVE),)
    assert net_steps("A", NAmIIn(S("A", "B"), FIVE, NUnit()), AB) == ((IOTA, FIVE),)
    assert net_steps("C", NAmIIn(S("A", "B"), FIVE, NUnit()), AB) == ((IOTA, NUnit()),)


def test_allow_offers_both_labels() -> None:
    allow = NAllow(Loc("A"), NRet(lc.Int(1)), NRet(lc.Int(2)))
    [(label, _)] = net_steps("B", allow, AB)
    assert isinstance(label, RecvOffer) and label.sender == "A"
    assert label.accept("L") == NRet(lc.Int(1))
    assert label.accept("R") == NRet(lc.Int(2))
    assert label.accept(lc.Int(3)) is None


def test_independent_locations_step_separately() -> None:
    system = (("A", SUM), ("B", SUM))
    steps = system_steps(system, AB)
    assert [label for label, _ in steps] == [SysInternal("A"), SysInternal("B")]
    assert steps[0][1] == (("A", FIVE), ("B", SUM))


def test_communication_delivers_the_value() -> None:
    system = (("A", NSendTo(FIVE, S("B"))), ("B", NRecv(Loc("A"))))
    [(label, after)] = system_steps(system, AB)
    assert label == SysComm("A", lc.Int(5), ("B",))
    assert after == (("A", FIVE), ("B", FIVE))


def test_synchronised_steps_wait_for_everyone() -> None:
    c = samples.run_at_worker()
    system = project_system(c, ["C", "W"])
    labels = [label for label, _ in system_steps(system, samples.table("C", "W"))]
    assert SysSync() in labels
    lagging = ((system[0][0], system[0][1]), ("W", NRet(lc.Add(lc.Int(1), lc.Int(1)))))
    assert SysSync() not in [l for l, _ in system_steps(lagging, samples.table("C", "W"))]


def test_remote_sum_explores_to_one_terminal() -> None:
    ex = explore(project_system(samples.remote_sum(), ["A", "B"]), AB, 10)
    assert len(ex.all_values) == 1 and not ex.deadlocked and not ex.frontier
    [done] = ex.all_values
    assert ex.states[done] == (("A", FIVE), ("B", FIVE))
    assert ex.edges == ((0, "iota@A", 1), (1, "A.5 ~> {B}", 2))


def test_terminal_classification() -> None:
    assert not is_terminal_values((("A", FIVE), ("B", NRecv(Loc("A")))))
    ex = explore(mutual_receive(), AB, 5)
    assert ex.deadlocked == {0}


def test_seeded_simulation_is_reproducible() -> None:
    system = project_system(samples.load_balancer(), samples.LB_LOCATIONS)
    table = samples.table(*samples.LB_LOCATIONS)
    a, b = simulate(system, table, 200, 7), simulate(system, table, 200, 7)
    assert a == b and a.status == "values"
    assert show_system(a.final) == "M |> () || A |> () || B |> () || C |> ret 42"


TABLE = GenConfig().table
LOCS = GenConfig().locations
systems = st.builds(
    lambda seed: project_system(gen_well_typed(GenConfig(seed=seed, max_depth=3))[0], LOCS),
    st.integers(0, 10**6))


@settings(max_examples=100, deadline=None)
@given(systems, st.integers(0, 1000))
def test_labels_change_only_their_participants(system, seed) -> None:
    rng = random.Random(seed)
    for _ in range(60):
        steps = system_steps(system, TABLE)
        if not steps:
            assert is_terminal_values(system)
            return
        for label, after in steps:
            changed = {l for (l, e), (_, e2) in zip(system, after) if e != e2}
            match label:
                case SysInternal(loc):
                    assert changed <= {loc}
                case SysComm(sender, msg, to):
                    assert changed <= {sender, *to}
                    offered = net_steps(sender, dict(system)[sender], TABLE)
                    assert any(isinstance(l, SendLabel) and l.msg == msg and l.to == set(to)
                               for l, _ in offered)
        _, system = rng.choice(steps)
