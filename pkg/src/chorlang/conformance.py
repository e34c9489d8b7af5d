"""Random well-typed choreographies and bounded checks of the metatheory.

Each check returns a TheoremReport. A failure records the seed that generated
the program, so `gen_well_typed(GenConfig(seed=...))` replays it exactly.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace

from . import local as lc
from .chor import (
    At, Case, Chor, ChorApp, ChorFun, ChorType, ChorVar, Done, Fold, Fst, Inl, Inr, Ite,
    LetLocal, LetType, Mu, Pair, Send, Snd, Sum, Sync, TyAbs, TyApp, Unfold, children,
    is_chor_value, show_chor,
)
from .locsets import Kind, Loc, LocSet, Sng, TVar, set_of
from .network import (
    NAllow, NRecv, System, explore, is_terminal_values, show_system, system_steps,
)
from .projection import ProjectionFailure, leq_system, project_system
from .semantics import enabled_steps, show_redex
from .statics import ChorTypeError, check_program
from . import samples

THEOREMS = ("preservation", "progress", "completeness", "soundness", "confluence",
            "deadlock-freedom", "local-preservation", "local-progress", "local-determinism")
LOCATION_NAMES = ("A", "B", "C", "D", "E", "F")
LOCAL_FUEL = 1000


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 3
    universe: int = 3
    recursion: bool = False
    local_depth: int = 2

    def __post_init__(self) -> None:
        if not 1 <= self.universe <= len(LOCATION_NAMES):
            raise ValueError(f"universe size must be between 1 and {len(LOCATION_NAMES)}")

    @property
    def locations(self) -> tuple[str, ...]:
        return LOCATION_NAMES[: self.universe]

    @property
    def table(self) -> lc.LocationTable:
        return lc.LocationTable.of(self.locations)


@dataclass(frozen=True)
class Failure:
    seed: int | None
    program: str
    witness: str
    kind: str = "counterexample"

    def to_json(self) -> dict:
        return {"seed": self.seed, "program": self.program, "witness": self.witness,
                "kind": self.kind}


@dataclass(frozen=True)
class TheoremReport:
    theorem: str
    cases: int
    failures: tuple[Failure, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        verdict = "PASS" if self.ok else f"FAIL ({len(self.failures)} failures)"
        return f"{self.theorem}: {self.cases} cases, {verdict}"

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "cases": self.cases, "ok": self.ok,
                "failures": [f.to_json() for f in self.failures], "notes": list(self.notes)}


def combine(theorem: str, reports: list[TheoremReport]) -> TheoremReport:
    return TheoremReport(
        theorem, sum(r.cases for r in reports),
        tuple(f for r in reports for f in r.failures),
        tuple(n for r in reports for n in r.notes),
    )


def _with_seed(report: TheoremReport, seed: int | None) -> TheoremReport:
    return replace(report, failures=tuple(replace(f, seed=seed) for f in report.failures))


# ---------------------------------------------------------------- local term generator


class GenerationExhausted(Exception):
    """No well-typed term was produced within the retry budget."""


INT, BOOL = lc.TInt(), lc.TBool()
LIST_INT = lc.TList(INT)
INT_TO_INT = lc.TArrow(INT, INT)
LOCAL_SHAPES = (INT, BOOL, LIST_INT, INT_TO_INT)


@dataclass
class _Names:
    count: int = 0

    def __call__(self, stem: str) -> str:
        self.count += 1
        return f"{stem}{self.count}"


def gen_local(rng: random.Random, t: lc.LType, depth: int,
              scope: tuple[tuple[str, lc.LType], ...] = (), names: _Names | None = None,
              recursion: bool = False) -> lc.Term:
    """A closed-under-`scope` local term of type `t` (int, bool, list int or int -> int)."""
    names = names or _Names()

    def go(t: lc.LType, d: int, scope) -> lc.Term:
        vars_ = [x for x, s in scope if lc.ltype_eq(s, t)]
        if d <= 0 or rng.random() < 0.25:
            if vars_ and rng.random() < 0.5:
                return lc.Var(rng.choice(vars_))
            return leaf(t, scope)
        choice = rng.randrange(6)
        if choice == 0:
            return lc.If(go(BOOL, d - 1, scope), go(t, d - 1, scope), go(t, d - 1, scope))
        if choice == 1:
            a = rng.choice((INT, BOOL))
            f, x = names("f"), names("x")
            fn = lc.Fun(f, x, a, t, go(t, d - 1, (*scope, (x, a))))
            return lc.App(fn, go(a, d - 1, scope))
        if choice == 2:
            h, tl = names("h"), names("t")
            return lc.ListCase(go(LIST_INT, d - 1, scope), go(t, d - 1, scope), h, tl,
                               go(t, d - 1, (*scope, (h, INT), (tl, LIST_INT))))
        if choice == 3:
            v, f, x = names("a"), names("f"), names("x")
            ident = lc.TAbs(v, lc.Fun(f, x, lc.TVar(v), lc.TVar(v), lc.Var(x)))
            return lc.App(lc.TApp(ident, t), go(t, d - 1, scope))
        if choice == 4 and recursion and lc.ltype_eq(t, INT):
            return countdown(rng.randrange(4), go(INT, d - 1, scope))
        match t:
            case lc.TInt():
                return lc.Add(go(INT, d - 1, scope), go(INT, d - 1, scope))
            case lc.TBool():
                op = rng.choice((lc.Lt, lc.Eq))
                return op(go(INT, d - 1, scope), go(INT, d - 1, scope))
            case lc.TList():
                return lc.Cons(go(INT, d - 1, scope), go(LIST_INT, d - 1, scope))
            case lc.TArrow():
                f, x = names("f"), names("x")
                return lc.Fun(f, x, INT, INT, go(INT, d - 1, (*scope, (x, INT))))
        return leaf(t, scope)

    def leaf(t: lc.LType, scope) -> lc.Term:
        match t:
            case lc.TInt():
                return lc.Int(rng.randrange(-3, 10))
            case lc.TBool():
                return lc.Bool(rng.random() < 0.5)
            case lc.TList():
                return lc.Nil(INT)
            case lc.TArrow():
                x = names("x")
                return lc.Fun(names("f"), x, INT, INT, lc.Add(lc.Var(x), lc.Int(1)))
        raise ValueError(f"no leaf for {lc.show_ltype(t)}")

    def countdown(n: int, acc: lc.Term) -> lc.Term:
        # A terminating recursive function: f n = if n < 1 then acc else f (n + -1).
        f, x = names("f"), names("n")
        body = lc.If(lc.Lt(lc.Var(x), lc.Int(1)), acc,
                     lc.App(lc.Var(f), lc.Add(lc.Var(x), lc.Int(-1))))
        return lc.App(lc.Fun(f, x, INT, INT, body), lc.Int(n))

    return go(t, depth, scope)


def gen_local_typed(seed: int, depth: int = 3) -> tuple[lc.Term, lc.LType]:
    rng = random.Random(seed)
    t = rng.choice(LOCAL_SHAPES)
    return gen_local(rng, t, depth, recursion=True), t


# ---------------------------------------------------------------- choreography generator


@dataclass(frozen=True)
class _Env:
    sigma: tuple[tuple[frozenset[str], str, lc.LType], ...] = ()
    delta: tuple[tuple[str, frozenset[str], lc.LType], ...] = ()
    self_call: tuple[str, str, frozenset[str], lc.LType] | None = None


class _ChorGen:
    def __init__(self, cfg: GenConfig) -> None:
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.names = _Names()
        self.locs = cfg.locations
        self.table = cfg.table

    def subset(self, within=None, min_size: int = 1) -> frozenset[str]:
        pool = list(within if within is not None else self.locs)
        k = self.rng.randint(min_size, len(pool))
        return frozenset(self.rng.sample(pool, k))

    def rho(self, names: frozenset[str]) -> LocSet:
        return set_of(*sorted(names, key=self.locs.index))

    def local(self, rho: frozenset[str], t: lc.LType, env: _Env) -> lc.Term:
        scope = tuple((x, s) for r, x, s in env.sigma if rho <= r)
        return gen_local(self.rng, t, self.rng.randint(0, self.cfg.local_depth), scope,
                         self.names, self.cfg.recursion)

    def base(self) -> lc.LType:
        return self.rng.choice((INT, INT, BOOL))

    def at(self, rho: frozenset[str], t: lc.LType, depth: int, env: _Env) -> Chor:
        """A choreography of type `t @ rho` (up to set equivalence)."""
        if depth <= 0:
            return Done(self.rho(rho), self.local(rho, t, env))
        rules = ["done", "letlocal", "ite", "pair", "case", "app", "tyapp", "fold", "typelet"]
        if len(rho) > 1:
            rules += ["send", "send"]
        if any(r == rho and lc.ltype_eq(s, t) for _, r, s in env.delta):
            rules.append("var")
        rule = self.rng.choice(rules)
        return getattr(self, "rule_" + rule)(rho, t, depth - 1, env)

    def rule_done(self, rho, t, d, env) -> Chor:
        return Done(self.rho(rho), self.local(rho, t, env))

    def rule_var(self, rho, t, d, env) -> Chor:
        options = [x for x, r, s in env.delta if r == rho and lc.ltype_eq(s, t)]
        return ChorVar(self.rng.choice(options))

    def rule_send(self, rho, t, d, env) -> Chor:
        held = self.subset(rho, 1)
        if held == rho:
            held = frozenset(sorted(rho)[:-1]) or held
        sender = self.rng.choice(sorted(held))
        return Send(self.at(held, t, d, env), Loc(sender), self.rho(rho - held))

    def rule_letlocal(self, rho, t, d, env) -> Chor:
        binders = self.subset()
        holders = binders | self.subset(min_size=1) if self.rng.random() < 0.3 else binders
        s = self.base()
        x = self.names("x")
        bound = self.at(holders, s, d, env)
        body = self.at(rho, t, d, replace(env, sigma=(*env.sigma, (binders, x, s))))
        return LetLocal(self.rho(binders), x, s, bound, body)

    def rule_ite(self, rho, t, d, env) -> Chor:
        decider = self.rng.choice(self.locs)
        others = [l for l in self.locs if l != decider]
        cond = self.at(frozenset({decider}), BOOL, d, env)

        def branch(label: str, body: Chor) -> Chor:
            if not others:
                return body
            return Sync(Loc(decider), label, self.rho(frozenset(others)), body)

        call = env.self_call
        if call is not None and call[2] == rho and lc.ltype_eq(call[3], t) and \
                self.rng.random() < 0.5:
            # A recursive call guarded by a condition that is always false.
            cond = Done(Sng(Loc(decider)), lc.Bool(False))
            then = ChorApp(ChorVar(call[0]), ChorVar(call[1]))
            return Ite(Sng(Loc(decider)), cond, branch("L", then),
                       branch("R", self.at(rho, t, d, env)))
        return Ite(Sng(Loc(decider)), cond, branch("L", self.at(rho, t, d, env)),
                   branch("R", self.at(rho, t, d, env)))

    def rule_pair(self, rho, t, d, env) -> Chor:
        other = self.at(self.subset(), self.base(), d, env)
        mine = self.at(rho, t, d, env)
        if self.rng.random() < 0.5:
            return Fst(Pair(mine, other))
        return Snd(Pair(other, mine))

    def rule_case(self, rho, t, d, env) -> Chor:
        r1, r2 = self.subset(), self.subset()
        s1, s2 = self.base(), self.base()
        ty = Sum(At(s1, self.rho(r1)), At(s2, self.rho(r2)))
        if self.rng.random() < 0.5:
            scrut = Inl(ty, self.at(r1, s1, d, env))
        else:
            scrut = Inr(ty, self.at(r2, s2, d, env))
        x, y = self.names("k"), self.names("k")
        left = self.at(rho, t, d, replace(env, delta=(*env.delta, (x, r1, s1))))
        right = self.at(rho, t, d, replace(env, delta=(*env.delta, (y, r2, s2))))
        return Case(scrut, x, left, y, right)

    def rule_app(self, rho, t, d, env) -> Chor:
        r1, s1 = self.subset(), self.base()
        f, x = self.names("fn"), self.names("k")
        dom = At(s1, self.rho(r1))
        inner = replace(env, delta=(*env.delta, (x, r1, s1)))
        if self.cfg.recursion:
            inner = replace(inner, self_call=(f, x, rho, t)) if r1 == rho and \
                lc.ltype_eq(s1, t) else inner
            fn = ChorFun(f, x, dom, At(t, self.rho(rho)), self.at(rho, t, d, inner))
        else:
            fn = ChorFun(f, x, dom, None, self.at(rho, t, d, replace(inner, self_call=None)))
        return ChorApp(fn, self.at(r1, s1, d, env))

    def rule_tyapp(self, rho, t, d, env) -> Chor:
        target = self.rng.choice(sorted(rho))
        v = self.names("l")
        here = Done(Sng(TVar(v)), gen_local(self.rng, t, 1, (), self.names))
        rest = rho - {target}
        body = here if not rest else Send(here, TVar(v), self.rho(rest))
        return TyApp(TyAbs(v, Kind.LOC, body), Loc(target))

    def rule_fold(self, rho, t, d, env) -> Chor:
        mu = Mu(self.names("R"), At(t, self.rho(rho)))
        return Unfold(Fold(mu, self.at(rho, t, d, env)))

    def rule_typelet(self, rho, t, d, env) -> Chor:
        knowers = self.subset()
        holder = self.rng.choice(sorted(knowers))
        kind = self.rng.choice((Kind.LOC, Kind.LOC, Kind.LOCSET, Kind.LOCAL))
        match kind:
            case Kind.LOC:
                value: lc.Term = lc.Int(self.table.code_of(self.rng.choice(sorted(knowers))))
            case Kind.LOCSET:
                value = lc.Nil(INT)
                for name in sorted(self.subset(knowers), reverse=True):
                    value = lc.Cons(lc.Int(self.table.code_of(name)), value)
            case _:
                value = self.rng.choice((lc.RepInt(), lc.RepBool(),
                                         lc.RepArrow(lc.RepInt(), lc.RepBool())))
        bound: Chor = Done(Sng(Loc(holder)), value)
        if knowers != {holder}:
            bound = Send(bound, Loc(holder), self.rho(knowers - {holder}))
        v = self.names("a")
        rest = self.at(rho, t, d, env)
        match kind:
            case Kind.LOC:
                # Relay a value computed at the chosen location to some of the knowers.
                to = self.subset(knowers)
                z = self.names("x")
                body: Chor = LetLocal(
                    self.rho(to), z, INT,
                    Send(Done(Sng(TVar(v)), lc.Int(self.rng.randrange(10))), TVar(v),
                         self.rho(to)),
                    self.at(rho, t, d, replace(env, sigma=(*env.sigma, (to, z, INT)))),
                )
            case Kind.LOCSET:
                body = Snd(Pair(Done(TVar(v), lc.Int(self.rng.randrange(10))), rest))
            case _:
                body = Snd(Pair(Done(self.rho(knowers), lc.Nil(lc.TVar(v))), rest))
        return LetType(self.rho(knowers), v, kind, bound, body)

    def program(self) -> tuple[Chor, ChorType | None]:
        t = self.base()
        rho = self.subset()
        if self.rng.random() < 0.15:
            other = self.subset()
            s = self.base()
            c = Pair(self.at(rho, t, self.cfg.max_depth, _Env()),
                     self.at(other, s, self.cfg.max_depth, _Env()))
            return c, None
        return self.at(rho, t, self.cfg.max_depth, _Env()), None


def gen_well_typed(cfg: GenConfig, retries: int = 20) -> tuple[Chor, ChorType]:
    """A closed well-typed choreography over `cfg.locations` and its type."""
    last: Exception | None = None
    for attempt in range(retries):
        gen = _ChorGen(replace(cfg, seed=cfg.seed * 7919 + attempt) if attempt else cfg)
        c, _ = gen.program()
        try:
            return c, check_program(c, cfg.table)
        except ChorTypeError as err:
            last = err
    raise GenerationExhausted(f"seed {cfg.seed}: {last}")


def corpus(seed: int, cases: int, **overrides) -> list[tuple[int, Chor, ChorType]]:
    """`cases` generated programs; program i comes from seed `seed + i`."""
    out = []
    for i in range(cases):
        cfg = GenConfig(seed=seed + i, **overrides)
        c, t = gen_well_typed(cfg)
        out.append((seed + i, c, t))
    return out


# ---------------------------------------------------------------- choreography theorems


def _trace(parents: dict, c: Chor) -> str:
    steps = []
    while parents.get(c) is not None:
        prev, r = parents[c]
        steps.append(show_redex(r))
        c = prev
    return " ; ".join(reversed(steps)) or "(initial)"


def _reach(c: Chor, table: lc.LocationTable, depth: int):
    """Breadth-first states up to `depth` steps, with parent links for witnesses."""
    parents: dict = {c: None}
    layer = [c]
    for _ in range(depth):
        nxt = []
        for x in layer:
            for r, y in enabled_steps(x, table):
                if y not in parents:
                    parents[y] = (x, r)
                    nxt.append(y)
        layer = nxt
    return parents


def check_preservation(c: Chor, t: ChorType, table: lc.LocationTable,
                       depth: int = 6) -> TheoremReport:
    """Every state reachable within `depth` steps still has type `t`."""
    parents = _reach(c, table, depth)
    failures = []
    for x in parents:
        try:
            check_program(x, table, t)
        except ChorTypeError as err:
            failures.append(Failure(None, show_chor(c), f"{_trace(parents, x)} gives "
                                                        f"{show_chor(x)}: {err}"))
    return TheoremReport("preservation", 1, tuple(failures))


def check_progress(c: Chor, t: ChorType, table: lc.LocationTable,
                   depth: int = 6) -> TheoremReport:
    """Every reachable state is a value or can step."""
    parents = _reach(c, table, depth)
    failures = [
        Failure(None, show_chor(c), f"{_trace(parents, x)} is stuck at {show_chor(x)}")
        for x in parents if not is_chor_value(x) and not enabled_steps(x, table)
    ]
    return TheoremReport("progress", 1, tuple(failures))


# ---------------------------------------------------------------- system graphs


@dataclass
class _Graph:
    """The reachable part of a system's transition graph, up to a state budget."""

    states: list[System] = field(default_factory=list)
    ids: dict = field(default_factory=dict)
    succ: list[list[int]] = field(default_factory=list)
    complete: bool = True


def _system_graph(start: System, table: lc.LocationTable, budget: int = 20000) -> _Graph:
    g = _Graph()

    def add(s: System) -> int:
        if s not in g.ids:
            g.ids[s] = len(g.states)
            g.states.append(s)
            g.succ.append([])
            queue.append(s)
        return g.ids[s]

    queue: deque = deque()
    add(start)
    while queue:
        s = queue.popleft()
        if len(g.states) > budget:
            g.complete = False
            break
        i = g.ids[s]
        g.succ[i] = [add(t) for _, t in system_steps(s, table)]
    return g


def _descendants(g: _Graph, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for j in g.succ[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def _terminals(g: _Graph) -> list[frozenset[int]] | None:
    """For each state, the terminal states it can reach; None if the graph has a cycle."""
    memo: list[frozenset[int] | None] = [None] * len(g.states)
    on_path = [False] * len(g.states)
    for root in range(len(g.states)):
        stack = [(root, False)]
        while stack:
            i, leaving = stack.pop()
            if leaving:
                on_path[i] = False
                out: set[int] = set() if g.succ[i] else {i}
                for j in g.succ[i]:
                    out |= memo[j]
                memo[i] = frozenset(out)
                continue
            if memo[i] is not None:
                continue
            if on_path[i]:
                return None
            on_path[i] = True
            stack.append((i, True))
            for j in g.succ[i]:
                if on_path[j]:
                    return None
                if memo[j] is None:
                    stack.append((j, False))
    return memo


def _within(g: _Graph, depth: int) -> list[int]:
    dist = {0: 0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        if dist[i] >= depth:
            continue
        for j in g.succ[i]:
            if j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    return sorted(dist)


def check_confluence(system: System, table: lc.LocationTable, depth: int = 5) -> TheoremReport:
    """Any two systems reachable within `depth` steps have a common successor."""
    g = _system_graph(system, table)
    reached = _within(g, depth)
    term = _terminals(g) if g.complete else None
    failures = []
    notes = []
    if term is not None:
        groups: dict[frozenset[int], list[int]] = {}
        for i in reached:
            groups.setdefault(term[i], []).append(i)
        keys = list(groups)
        for a in range(len(keys)):
            for b in range(a, len(keys)):
                if not keys[a] & keys[b]:
                    i, j = groups[keys[a]][0], groups[keys[b]][0]
                    failures.append(Failure(None, show_system(system),
                                            f"{show_system(g.states[i])} and "
                                            f"{show_system(g.states[j])} never meet"))
    else:
        desc = {i: _descendants(g, i) for i in reached}
        for a in reached:
            for b in reached:
                if a < b and not desc[a] & desc[b]:
                    kind = "counterexample" if g.complete else "search-budget-exceeded"
                    failures.append(Failure(None, show_system(system),
                                            f"{show_system(g.states[a])} and "
                                            f"{show_system(g.states[b])} never meet", kind))
        if not g.complete:
            notes.append("state budget exhausted; joins searched within the explored part")
    return TheoremReport("confluence", 1, tuple(failures[:5]), tuple(notes))


def check_deadlock_freedom(c: Chor | None, locations, table: lc.LocationTable,
                           depth: int = 40, system: System | None = None) -> TheoremReport:
    """Every reachable system either has a successor or holds only values."""
    if system is None:
        system = project_system(c, locations)
    ex = explore(system, table, depth)
    program = show_chor(c) if c is not None else show_system(system)
    failures = tuple(Failure(None, program, f"deadlocked at {show_system(ex.states[i])}")
                     for i in sorted(ex.deadlocked))
    notes = (f"{len(ex.frontier)} states left at the depth bound",) if ex.frontier else ()
    return TheoremReport("deadlock-freedom", 1, failures, notes)


# ---------------------------------------------------------------- projection theorems


def _layers(system: System, table: lc.LocationTable, upto: int) -> list[set[System]]:
    layers = [{system}]
    for _ in range(upto):
        layers.append({t for s in layers[-1] for _, t in system_steps(s, table)})
    return layers


def check_completeness(c: Chor, locations, table: lc.LocationTable, n: int = 4,
                       slack: int | None = None) -> TheoremReport:
    """Each choreography reachable in m <= n steps is matched by the system in m..2m+8 steps."""
    locations = tuple(locations)
    start = project_system(c, locations)
    limit = 2 * n + 8 if slack is None else n + slack
    layers = _layers(start, table, 2 * limit)
    chor_layers = [{c: None}]
    parents: dict = {c: None}
    for _ in range(n):
        nxt: dict = {}
        for x in chor_layers[-1]:
            for r, y in enabled_steps(x, table):
                nxt.setdefault(y, (x, r))
                parents.setdefault(y, (x, r))
        chor_layers.append(nxt)
    failures = []
    witnesses = 0
    for m, layer in enumerate(chor_layers):
        hi = 2 * m + 8 if slack is None else m + slack
        for x in layer:
            target = project_system(x, locations)
            if any(leq_system(target, s) for k in range(m, hi + 1) for s in layers[k]):
                witnesses += 1
                continue
            larger = any(leq_system(target, s) for k in range(m, 2 * hi + 1) for s in layers[k])
            kind = "search-budget-exceeded" if larger else "counterexample"
            failures.append(Failure(None, show_chor(c),
                                    f"after {_trace(parents, x)} ({m} steps) no system "
                                    f"state within {hi} steps matches {show_chor(x)}", kind))
    return TheoremReport("completeness", 1, tuple(failures),
                         (f"{witnesses} choreography states matched",))


def locally_terminating(c: Chor, table: lc.LocationTable, fuel: int = LOCAL_FUEL,
                        budget: int = 5000) -> bool:
    """Every local program in every reachable choreography stops within `fuel` steps."""
    seen = {c}
    queue = deque([c])
    while queue:
        x = queue.popleft()
        for e in _local_programs(x):
            _, steps = lc.run_local(e, fuel)
            if steps >= fuel:
                return False
        for _, y in enabled_steps(x, table):
            if y not in seen and len(seen) < budget:
                seen.add(y)
                queue.append(y)
    return True


def _local_programs(c: Chor):
    if isinstance(c, Done):
        yield c.expr
    for k in children(c):
        yield from _local_programs(k)


def check_soundness(c: Chor, locations, table: lc.LocationTable, depth: int = 6,
                    budget: int = 20000) -> TheoremReport:
    """Each system reachable within `depth` steps can continue to match some choreography."""
    locations = tuple(locations)
    chors = _reach(c, table, 10_000)
    projections = []
    for x in chors:
        try:
            projections.append(project_system(x, locations))
        except ProjectionFailure:
            pass
    g = _system_graph(project_system(c, locations), table, budget)
    good = {i for i, s in enumerate(g.states) if any(leq_system(p, s) for p in projections)}
    # States that can reach a matching state: walk the edges backwards from `good`.
    preds: list[list[int]] = [[] for _ in g.states]
    for i, out in enumerate(g.succ):
        for j in out:
            preds[j].append(i)
    ok = set(good)
    stack = list(good)
    while stack:
        for p in preds[stack.pop()]:
            if p not in ok:
                ok.add(p)
                stack.append(p)
    failures = []
    for i in _within(g, depth):
        if i not in ok:
            kind = "counterexample" if g.complete else "search-budget-exceeded"
            failures.append(Failure(None, show_chor(c),
                                    f"{show_system(g.states[i])} never matches a "
                                    f"choreography reachable from the program", kind))
    return TheoremReport("soundness", 1, tuple(failures[:5]))


# ---------------------------------------------------------------- local language


def check_local(seed: int, cases: int, depth: int = 3) -> list[TheoremReport]:
    """Progress, preservation and determinism of the local language on generated terms."""
    table = lc.LocationTable.of(LOCATION_NAMES[:3])
    pres, prog, det = [], [], []
    for i in range(cases):
        e, t = gen_local_typed(seed + i, depth)
        program = lc.show_term(e)
        for _ in range(200):
            if lc.ltype({}, (), e, table, t) is None:
                pres.append(Failure(seed + i, program, f"{lc.show_term(e)} lost type "
                                                       f"{lc.show_ltype(t)}"))
                break
            nxt = lc.lstep(e)
            if nxt != lc.lstep(e):
                det.append(Failure(seed + i, program, f"{lc.show_term(e)} steps two ways"))
            if nxt is None:
                if not lc.is_lvalue(e):
                    prog.append(Failure(seed + i, program, f"stuck at {lc.show_term(e)}"))
                break
            e = nxt
    return [TheoremReport("local-preservation", cases, tuple(pres)),
            TheoremReport("local-progress", cases, tuple(prog)),
            TheoremReport("local-determinism", cases, tuple(det))]


def check_local_determinism(seed: int, cases: int, depth: int = 4) -> TheoremReport:
    """Stepping any generated term (typed or not) twice gives the same result."""
    rng = random.Random(seed)
    failures = []
    for i in range(cases):
        e = gen_local(rng, rng.choice(LOCAL_SHAPES), depth, recursion=True)
        for _ in range(50):
            a, b = lc.lstep(e), lc.lstep(e)
            if a != b:
                failures.append(Failure(seed, lc.show_term(e), "two different successors"))
                break
            if a is None:
                break
            e = a
    return TheoremReport("local-determinism", cases, tuple(failures))


# ---------------------------------------------------------------- negative controls


def drop_sync_branch(system: System, loc: str, label: str) -> System:
    """Remove the `label` branch from every top-level `allow` that `loc` runs."""
    def corrupt(e):
        if isinstance(e, NAllow):
            return NAllow(e.sender, None if label == "L" else e.left,
                          None if label == "R" else e.right)
        return e

    return tuple((l, corrupt(e) if l == loc else e) for l, e in system)


def swap_sync_branches(system: System, loc: str) -> System:
    def corrupt(e):
        return NAllow(e.sender, e.right, e.left) if isinstance(e, NAllow) else e

    return tuple((l, corrupt(e) if l == loc else e) for l, e in system)


def mutual_receive() -> System:
    """Two locations each waiting for the other: deadlocked from the start."""
    return (("A", NRecv(Loc("B"))), ("B", NRecv(Loc("A"))))


def completeness_against(c: Chor, system: System, table: lc.LocationTable,
                         n: int = 4) -> TheoremReport:
    """Completeness of `c` measured against an arbitrary (possibly corrupted) system."""
    locations = tuple(l for l, _ in system)
    layers = _layers(system, table, 2 * n + 8)
    failures = []
    for x in _reach(c, table, n):
        target = project_system(x, locations)
        if not any(leq_system(target, s) for layer in layers for s in layer):
            failures.append(Failure(None, show_chor(c), f"nothing matches {show_chor(x)}"))
    return TheoremReport("completeness", 1, tuple(failures))


# ---------------------------------------------------------------- suites


def example_programs() -> list[tuple[str, Chor, tuple[str, ...]]]:
    """The named examples with the locations they run on."""
    return [
        ("load-balancer", samples.load_balancer(), samples.LB_LOCATIONS),
        ("run-at-worker", samples.run_at_worker(), ("C", "W")),
        ("if-sync", samples.if_sync(), ("A", "B")),
        ("remote-sum", samples.remote_sum(), ("A", "B")),
    ]


def projectable_corpus(seed: int, cases: int, **overrides) -> list[tuple[int, Chor, ChorType]]:
    out = []
    for s, c, t in corpus(seed, cases, **overrides):
        try:
            project_system(c, GenConfig(**overrides).locations)
        except ProjectionFailure:
            continue
        out.append((s, c, t))
    return out


SUITES = ("preservation", "progress", "local", "completeness", "soundness", "confluence",
          "deadlock-freedom", "all")


def run_suite(suite: str, seed: int = 0, cases: int = 50, **overrides) -> list[TheoremReport]:
    """Run one named suite (or all of them) on `cases` generated programs."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    wanted = SUITES[:-1] if suite == "all" else (suite,)
    reports: list[TheoremReport] = []
    cfg = GenConfig(**overrides)
    locs, table = cfg.locations, cfg.table
    if "preservation" in wanted or "progress" in wanted:
        progs = corpus(seed, cases, **overrides)
        for name, check in (("preservation", check_preservation), ("progress", check_progress)):
            if name in wanted:
                reports.append(combine(name, [_with_seed(check(c, t, table), s)
                                              for s, c, t in progs]))
    if "local" in wanted:
        reports.extend(check_local(seed, cases))
    proj_wanted = [w for w in ("completeness", "soundness", "confluence") if w in wanted]
    if proj_wanted:
        progs = projectable_corpus(seed, cases, **overrides)
        if "completeness" in wanted:
            reports.append(combine("completeness", [
                _with_seed(check_completeness(c, locs, table), s) for s, c, _ in progs]))
        if "soundness" in wanted:
            selected = [(s, c) for s, c, _ in progs if locally_terminating(c, table)]
            reports.append(combine("soundness", [
                _with_seed(check_soundness(c, locs, table), s) for s, c in selected]))
        if "confluence" in wanted:
            reports.append(combine("confluence", [
                _with_seed(check_confluence(project_system(c, locs), table), s)
                for s, c, _ in progs]))
    if "deadlock-freedom" in wanted:
        parts = []
        for name, c, where in example_programs():
            t = lc.LocationTable.of(where)
            parts.append(check_deadlock_freedom(c, where, t))
        for s, c, _ in projectable_corpus(seed, cases, **overrides):
            parts.append(_with_seed(check_deadlock_freedom(c, locs, table), s))
        reports.append(combine("deadlock-freedom", parts))
    return reports
