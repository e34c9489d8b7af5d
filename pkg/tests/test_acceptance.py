"""Acceptance run: one test per criterion, each printing a PASS or FAIL line.

Run with `pytest tests/test_acceptance.py -v` (the lines are repeated in the
terminal summary) or directly with `python tests/test_acceptance.py`.
"""

import random
import sys
import time
from itertools import product

from chorlang import conformance as qc
from chorlang import local as lc
from chorlang import samples
from chorlang.chor import Done, show_chor, show_type, subst_local, subst_type
from chorlang.locsets import (
    Loc, disjoint, fv_set, ground_set, nec_in, poss_in, set_of, subset,
)
from chorlang.network import show_net
from chorlang.projection import canon_net, leq, merge, project, project_system
from chorlang.semantics import enabled_steps, run, show_redex
from chorlang.statics import ChorTypeError, check_program

from oracles import (
    OUTSIDE, UNIVERSE, denote, expressions, instantiations, meaning_mask, programs_to_depth,
)

SEED = 0
S = set_of
LINES: list[str] = []


def record(number: int, title: str, checks: dict[str, bool], started: float) -> None:
    """Print and keep the verdict line, then fail the test if any check failed."""
    ok = all(checks.values())
    failed = [name for name, good in checks.items() if not good]
    detail = f"{len(checks)} checks" if ok else "failed: " + "; ".join(failed)
    line = (f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} "
            f"({detail}, {time.perf_counter() - started:.1f}s)")
    LINES.append(line)
    print(line)
    assert ok, line


def _raises_rule(build, table, rule: str) -> bool:
    try:
        check_program(build(), table)
    except ChorTypeError as err:
        return err.rule == rule
    return False


def test_criterion_1_worked_examples() -> None:
    started = time.perf_counter()
    checks: dict[str, bool] = {}

    [(redex, after)] = enabled_steps(samples.multicast(), samples.table("A", "B", "C"))
    checks["A.3 ~> {B,C} steps to {A,B,C}.3"] = (
        show_redex(redex) == "Send(A, 3, {B,C})" and show_chor(after) == "{A,B,C}.3")

    table = samples.table(*samples.LB_LOCATIONS)
    c = samples.load_balancer_raw()
    while not lc.is_lvalue(c.bound.body.expr):
        (_, c), *_ = enabled_steps(c, table)
    shown = []
    for _ in range(2):
        (r, c), *_ = enabled_steps(c, table)
        shown.append(show_chor(c))
    checks["load balancer displayed steps"] = shown == [
        "let {M,A,B,C}.alpha :: loc := {M,A,B,C}.1 in {alpha}.(20 + 22) ~> C",
        "A.(20 + 22) ~> C",
    ]

    sent = samples.remote_sum()
    checks["A.(2+3) ~> B projections"] = (
        show_net(project(sent, "A")) == "send (ret (2 + 3)) to B"
        and show_net(project(sent, "B")) == "recv A")

    checks["merged selection at B"] = (
        show_net(project(samples.if_sync(), "B")) == "allow A { left => ret 1 | right => ret 2 }")

    ab = samples.table("A", "B")
    checks["relayed location has int @ B"] = (
        show_type(check_program(samples.relayed_location(), ab)) == "int @ B")
    checks["escaping location rejected"] = _raises_rule(
        samples.escaping_location, samples.table("A"), "T-LetLoc")
    checks["uninformed worker rejected"] = _raises_rule(
        samples.uninformed_worker, table, "T-LetLoc")
    record(1, "worked examples reproduce exactly", checks, started)


def test_criterion_2_metatheory_suites() -> None:
    started = time.perf_counter()
    cfg = qc.GenConfig()
    progs = qc.corpus(SEED, 500, max_depth=6)
    pres = qc.combine("preservation", [qc.check_preservation(c, t, cfg.table, depth=6)
                                       for _, c, t in progs])
    prog = qc.combine("progress", [qc.check_progress(c, t, cfg.table, depth=6)
                                   for _, c, t in progs])
    local = qc.check_local(SEED, 500)
    det = qc.check_local_determinism(SEED, 10**4)
    checks = {f"{r.theorem} over {len(progs)} choreographies": r.ok for r in (pres, prog)}
    checks.update({f"{r.theorem} over 500 local terms": r.ok for r in local})
    checks["lstep determinism on 10^4 random terms"] = det.ok and det.cases == 10**4
    checks["corpus size"] = len(progs) >= 500
    record(2, "preservation, progress and local-language suites", checks, started)


def projectable_programs() -> list:
    """The shared corpus for completeness, soundness and confluence."""
    plain = qc.projectable_corpus(SEED + 1000, 120, max_depth=4)
    recursive = qc.projectable_corpus(SEED + 2000, 60, max_depth=4, recursion=True)
    return [c for _, c, _ in plain + recursive]


CORPUS = projectable_programs()
CFG = qc.GenConfig()


def test_criterion_3_completeness() -> None:
    started = time.perf_counter()
    reports = [qc.check_completeness(c, CFG.locations, CFG.table, n=4) for c in CORPUS]
    checks = {"at least 100 projectable programs": len(CORPUS) >= 100,
              "every reduct within 4 steps is matched within 2n+8 system steps":
                  all(r.ok for r in reports)}
    record(3, f"completeness on {len(CORPUS)} projectable programs", checks, started)


def test_criterion_4_soundness() -> None:
    started = time.perf_counter()
    kept = [c for c in CORPUS if qc.locally_terminating(c, CFG.table)]
    reports = [qc.check_soundness(c, CFG.locations, CFG.table, depth=6) for c in kept]
    checks = {"every system state within depth 6 rejoins a projection": all(r.ok for r in reports),
              "the looping example is excluded by the fuel scan":
                  not qc.locally_terminating(samples.loop_then_sum(), samples.table("A", "B")),
              "a terminating example is kept":
                  qc.locally_terminating(samples.shared_sum(), samples.table("A", "B"))}
    record(4, f"soundness on {len(kept)} locally terminating programs", checks, started)


def test_criterion_5_confluence() -> None:
    started = time.perf_counter()
    reports = [qc.check_confluence(project_system(c, CFG.locations), CFG.table, depth=5)
               for c in CORPUS]
    checks = {"every reachable pair within depth 5 joins": all(r.ok for r in reports)}
    record(5, f"system confluence on {len(CORPUS)} projected programs", checks, started)


def test_criterion_6_deadlock_freedom() -> None:
    started = time.perf_counter()
    checks = {}
    examples = [("load balancer", samples.load_balancer(), samples.LB_LOCATIONS),
                ("run at worker", samples.run_at_worker(), ("C", "W")),
                ("if/sync taking left", samples.if_sync(True), ("A", "B")),
                ("if/sync taking right", samples.if_sync(False), ("A", "B"))]
    for name, c, locs in examples:
        report = qc.check_deadlock_freedom(c, locs, samples.table(*locs), depth=40)
        checks[f"{name} reaches only all-values terminals"] = report.ok
    ab = samples.table("A", "B")
    system = project_system(samples.if_sync(True), ("A", "B"))
    def flagged(label: str) -> bool:
        dropped = qc.drop_sync_branch(system, "B", label)
        return not qc.check_deadlock_freedom(None, ("A", "B"), ab, system=dropped).ok

    checks["dropping the chosen branch is flagged as deadlocked"] = flagged("L")
    checks["dropping the unused branch is not flagged"] = not flagged("R")
    record(6, "deadlock freedom and the corrupted-projection control", checks, started)


def test_criterion_7_substitution() -> None:
    started = time.perf_counter()
    instantiated = subst_type(samples.capture(), "alpha", Loc("L"))
    final = run(instantiated, samples.table("L"), 100).final
    partial = subst_local(Done(S("A", "B"), lc.Var("x")), S("A"), "x", lc.Int(1))
    checks = {"capture example evaluates to L.5": final == Done(S("L"), lc.Int(5)),
              "never L.6": final != Done(S("L"), lc.Int(6)),
              "partial substitution is a fault": partial is None}
    record(7, "capture-avoiding substitution", checks, started)


def _locset_checks() -> dict[str, bool]:
    pool = (*UNIVERSE, OUTSIDE)
    envs = instantiations()
    checks = {}

    exprs = expressions(UNIVERSE, True, 3)
    member = True
    for rho in exprs:
        envs_here = envs if fv_set(rho) else envs[:1]
        for name in pool:
            meanings = [name in denote(rho, env) for env in envs_here]
            member &= nec_in(Loc(name), rho) == all(meanings)
            member &= poss_in(Loc(name), rho) == any(meanings)
    checks[f"membership on {len(exprs)} expressions"] = member

    ground = expressions(UNIVERSE, False, 3)
    sets = {e: ground_set(e) for e in ground}
    checks[f"ground subset/disjoint on {len(ground) ** 2} pairs"] = all(
        subset(a, b) == (sets[a] <= sets[b]) and disjoint(a, b) == (not sets[a] & sets[b])
        for a, b in product(ground, repeat=2))

    def symbolic_ok(pairs, masks) -> bool:
        good = True
        for a, b in pairs:
            ma, mb = masks[a], masks[b]
            if subset(a, b):
                good &= ma & ~mb == 0
            good &= disjoint(a, b) == (ma & mb == 0)
        return good

    small = expressions(UNIVERSE[:2], True, 3)
    masks = {e: meaning_mask(e, envs, pool) for e in small}
    checks[f"symbolic relations, two locations, {len(small) ** 2} pairs"] = symbolic_ok(
        product(small, repeat=2), masks)
    shallow = expressions(UNIVERSE, True, 2)
    masks = {e: meaning_mask(e, envs, pool) for e in shallow + exprs}
    checks[f"symbolic relations, four locations depth 2, {len(shallow) ** 2} pairs"] = (
        symbolic_ok(product(shallow, repeat=2), masks))
    rng = random.Random(SEED)
    sampled = [(rng.choice(exprs), rng.choice(exprs)) for _ in range(20000)]
    checks["symbolic relations, four locations depth 3, 20000 sampled pairs"] = symbolic_ok(
        sampled, masks)
    return checks


def test_criterion_8_relation_laws() -> None:
    started = time.perf_counter()
    checks = {}
    nets = [e for _, c, _ in qc.corpus(SEED + 3000, 1000)
            for _, e in project_system(c, CFG.locations)]
    checks[f"merge idempotent on projections of 1000 programs ({len(nets)} nets)"] = all(
        merge(e, e) == e for e in nets)

    depth2, depth3 = programs_to_depth(2), programs_to_depth(3)
    checks[f"leq reflexive on {len(depth3)} nets to depth 3"] = all(leq(e, e) for e in depth3)
    antisym = trans = True
    for a, b in product(depth2, repeat=2):
        if leq(a, b) and leq(b, a):
            antisym &= canon_net(a) == canon_net(b)
    for a, b, c in product(depth2, repeat=3):
        if leq(a, b) and leq(b, c):
            trans &= leq(a, c)
    rng = random.Random(SEED)
    for _ in range(20000):
        a, b, c = rng.choice(depth3), rng.choice(depth3), rng.choice(depth3)
        if leq(a, b) and leq(b, a):
            antisym &= canon_net(a) == canon_net(b)
        if leq(a, b) and leq(b, c):
            trans &= leq(a, c)
    checks["leq antisymmetric (exhaustive depth 2, sampled depth 3)"] = antisym
    checks["leq transitive (exhaustive depth 2, sampled depth 3)"] = trans
    checks.update(_locset_checks())
    record(8, "merge, leq and location-set laws", checks, started)


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
