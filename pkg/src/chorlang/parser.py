"""Surface syntax: a tokenizer, a recursive-descent parser and source-file headers.

The grammar mirrors the pretty-printers in `chor`, `local` and `locsets`, so
`parse_chor(show_chor(c)) == c` for every choreography whose free type
variables are declared. A file looks like:

    locations M, A, B, C;
    codes { 0 -> M; 1 -> A; 2 -> B; default C }
    def work = 20 + 22;
    main : int @ C = let {M,A,B,C}.w :: loc := ... in ...;

An identifier in a location position is a type variable when one of that name
is in scope, and a concrete location otherwise.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass, field

from . import local as lc
from .chor import (
    Arrow, At, Case, Chor, ChorApp, ChorFun, ChorType, ChorVar, Done, Fold, Forall, Fst, Inl,
    Inr, Ite, LetLocal, LetType, Mu, Pair, Prod, Send, Snd, Sum, Sync, TyAbs, TyApp, Unfold,
    children, named_locs, named_locs_type, with_children,
)
from .locsets import Kind, Loc, LocExpr, LocSet, Sng, TVar, Union

KINDS = {"*": Kind.STAR, "loc": Kind.LOC, "locset": Kind.LOCSET, "ty": Kind.LOCAL}
KEYWORDS = frozenset({
    "let", "in", "if", "then", "else", "sync", "fun", "tyfun", "tfun", "case", "of", "inl",
    "inr", "fst", "snd", "fold", "unfold", "forall", "mu", "nil", "true", "false", "rint",
    "rbool", "rarrow", "repr", "reprset", "reprty", "int", "bool", "tyrep", "list", "loc",
    "locset", "ty",
})
SYMBOLS = ("~>", "->", "=>", "::", ":=", "\\/", "==", "(", ")", "{", "}", "[", "]", ".", ",",
           ";", ":", "=", "<", "+", "*", "@", "|")
_TOKEN = re.compile(
    r"(?P<ws>\s+|#[^\n]*)|(?P<int>-?\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>"
    + "|".join(re.escape(s) for s in SYMBOLS) + ")"
)


# ---------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    span: Span
    rule: str
    message: str

    def render(self, path: str = "<input>") -> str:
        return (f"{path}:{self.span.line}:{self.span.col}: {self.severity}[{self.rule}]: "
                f"{self.message}")


class ParseError(Exception):
    def __init__(self, diagnostics: tuple[Diagnostic, ...]) -> None:
        super().__init__("; ".join(d.render() for d in diagnostics))
        self.diagnostics = diagnostics


def span_at(text: str, start: int, end: int) -> Span:
    line = text.count("\n", 0, start) + 1
    col = start - (text.rfind("\n", 0, start) + 1) + 1
    return Span(start, end, line, col)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError((Diagnostic("error", span_at(text, pos, pos + 1), "syntax",
                                         f"unexpected character {text[pos]!r}"),))
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), m.start(), m.end()))
        pos = m.end()
    out.append(Token("eof", "", len(text), len(text)))
    return out


# ---------------------------------------------------------------- source files


@dataclass(frozen=True)
class SourceFile:
    locations: tuple[str, ...]
    table: lc.LocationTable
    main: Chor
    declared: ChorType | None = None
    defs: tuple[tuple[str, lc.Term], ...] = field(default=())


# ---------------------------------------------------------------- the parser


class _Parser:
    def __init__(self, text: str, table: lc.LocationTable | None = None,
                 scope: Mapping[str, Kind] | None = None) -> None:
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0
        self.table = table
        self.scope: dict[str, Kind] = dict(scope or {})

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text in texts

    def error(self, message: str, tok: Token | None = None, rule: str = "syntax") -> ParseError:
        t = tok or self.tok
        return ParseError((Diagnostic("error", span_at(self.text, t.start, max(t.end, t.start + 1)),
                                      rule, message),))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r} but found {found!r}")
        t = self.tok
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def ident(self, what: str = "an identifier") -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected {what} but found {t.text or 'end of input'!r}")
        self.pos += 1
        return t.text

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            raise self.error(f"expected an integer but found {t.text or 'end of input'!r}")
        self.pos += 1
        return int(t.text)

    def is_name(self, k: int = 0) -> bool:
        t = self.peek(k) if k else self.tok
        return t.kind == "ident" and t.text not in KEYWORDS

    def scoped(self, name: str, kind: Kind):
        parser = self

        class _Scope:
            def __enter__(self):
                self.saved = parser.scope.get(name)
                parser.scope[name] = kind

            def __exit__(self, *exc):
                if self.saved is None:
                    parser.scope.pop(name, None)
                else:
                    parser.scope[name] = self.saved

        return _Scope()

    # -- locations and sets

    def loc_expr(self) -> LocExpr:
        name = self.ident("a location")
        return TVar(name) if name in self.scope else Loc(name)

    def set_literal(self) -> LocSet:
        self.expect("{")
        elems = [self.loc_expr()]
        while self.accept(","):
            elems.append(self.loc_expr())
        self.expect("}")
        out: LocSet = Sng(elems[-1])
        for e in reversed(elems[:-1]):
            out = Union(Sng(e), out)
        return out

    def rho_atom(self) -> LocSet:
        if self.at("{"):
            return self.set_literal()
        if self.accept("("):
            rho = self.rho()
            self.expect(")")
            return rho
        name = self.ident("a location set")
        kind = self.scope.get(name)
        if kind is None:
            return Sng(Loc(name))
        return Sng(TVar(name)) if kind is Kind.LOC else TVar(name)

    def rho(self) -> LocSet:
        out = self.rho_atom()
        while self.accept("\\/"):
            out = Union(out, self.rho_atom())
        return out

    def set_suffix(self) -> LocSet:
        if self.at("{"):
            return self.set_literal()
        self.expect("(")
        rho = self.rho()
        self.expect(")")
        return rho

    # -- local types

    def ltype(self) -> lc.LType:
        if self.accept("forall"):
            v = self.ident("a type variable")
            self.expect(".")
            with self.scoped(v, Kind.LOCAL):
                return lc.TForall(v, self.ltype())
        a = self.ltype1()
        if self.accept("->"):
            return lc.TArrow(a, self.ltype())
        return a

    def ltype1(self) -> lc.LType:
        if self.accept("list"):
            return lc.TList(self.ltype2())
        return self.ltype2()

    def ltype2(self) -> lc.LType:
        t = self.tok
        if self.accept("int"):
            return lc.TInt()
        if self.accept("bool"):
            return lc.TBool()
        if self.accept("tyrep"):
            return lc.TRep()
        if self.accept("loc"):
            return lc.TLoc(self.set_suffix())
        if self.accept("locset"):
            return lc.TLocSet(self.set_suffix())
        if self.accept("("):
            inner = self.ltype()
            self.expect(")")
            return inner
        if self.is_name():
            return TVar(self.ident())
        raise self.error(f"expected a local type but found {t.text or 'end of input'!r}")

    # -- local terms

    def term(self) -> lc.Term:
        if self.accept("fun"):
            f = self.ident("a function name")
            self.expect("(")
            x = self.ident("a parameter")
            self.expect(":")
            a = self.ltype()
            self.expect(")")
            self.expect(":")
            b = self.ltype()
            self.expect("=")
            return lc.Fun(f, x, a, b, self.term())
        if self.accept("tfun"):
            v = self.ident("a type variable")
            self.expect("=>")
            with self.scoped(v, Kind.LOCAL):
                return lc.TAbs(v, self.term())
        if self.accept("if"):
            c = self.term()
            self.expect("then")
            a = self.term()
            self.expect("else")
            return lc.If(c, a, self.term())
        if self.accept("case"):
            s = self.term()
            self.expect("of")
            self.expect("nil")
            self.expect("=>")
            n = self.term()
            self.expect("|")
            h = self.ident("a head variable")
            self.expect("::")
            t = self.ident("a tail variable")
            self.expect("=>")
            return lc.ListCase(s, n, h, t, self.term())
        a = self.term2()
        if self.accept("=="):
            return lc.Eq(a, self.term2())
        if self.accept("<"):
            return lc.Lt(a, self.term2())
        return a

    def term2(self) -> lc.Term:
        a = self.term3()
        if self.accept("::"):
            return lc.Cons(a, self.term2())
        return a

    def term3(self) -> lc.Term:
        a = self.term4()
        while self.accept("+"):
            a = lc.Add(a, self.term4())
        return a

    def term4(self) -> lc.Term:
        a = self.term5()
        while True:
            if self.accept("["):
                t = self.ltype()
                self.expect("]")
                a = lc.TApp(a, t)
            elif self.starts_term5():
                a = lc.App(a, self.term5())
            else:
                return a

    def starts_term5(self) -> bool:
        t = self.tok
        if t.kind == "int" or self.is_name():
            return True
        return self.at("(", "true", "false", "nil", "rint", "rbool", "rarrow", "repr",
                       "reprset", "reprty")

    def code(self, tok: Token, name: str) -> int:
        if self.table is None:
            raise self.error("location representations need a location table", tok,
                             "no-location-table")
        code = self.table.code_of(name)
        if code is None:
            raise self.error(f"{name} has no integer code", tok, "undeclared-location")
        return code

    def term5(self) -> lc.Term:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return lc.Int(int(t.text))
        if self.accept("true"):
            return lc.Bool(True)
        if self.accept("false"):
            return lc.Bool(False)
        if self.accept("rint"):
            return lc.RepInt()
        if self.accept("rbool"):
            return lc.RepBool()
        if self.accept("nil"):
            self.expect("[")
            ty = self.ltype()
            self.expect("]")
            return lc.Nil(ty)
        if self.accept("rarrow"):
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return lc.RepArrow(a, b)
        if self.accept("repr"):
            self.expect("(")
            tok = self.tok
            name = self.ident("a location")
            self.expect(")")
            return lc.Int(self.code(tok, name))
        if self.accept("reprset"):
            self.expect("{")
            items = []
            while True:
                tok = self.tok
                items.append(lc.Int(self.code(tok, self.ident("a location"))))
                if not self.accept(","):
                    break
            self.expect("}")
            out: lc.Term = lc.Nil(lc.TInt())
            for item in reversed(items):
                out = lc.Cons(item, out)
            return out
        if self.accept("reprty"):
            self.expect("(")
            ty = self.ltype()
            self.expect(")")
            return _ty_rep(ty, t, self)
        if self.accept("("):
            e = self.term()
            if self.accept(":"):
                ty = self.ltype()
                self.expect(")")
                return lc.Ann(e, ty)
            self.expect(")")
            return e
        if self.is_name():
            return lc.Var(self.ident())
        raise self.error(f"expected a local expression but found {t.text or 'end of input'!r}")

    # -- choreography types

    def ctype(self) -> ChorType:
        if self.at("forall") and self.peek().kind == "ident" and self.peek(2).text == "::":
            self.pos += 1
            v = self.ident("a type variable")
            self.expect("::")
            k = self.kind()
            self.expect(".")
            with self.scoped(v, k):
                return Forall(v, k, self.ctype())
        if self.at("forall"):
            return self.ltype()
        if self.accept("mu"):
            v = self.ident("a type variable")
            self.expect(".")
            with self.scoped(v, Kind.STAR):
                return Mu(v, self.ctype())
        a = self.ctype1()
        if self.accept("->"):
            b = self.ctype()
            if self.is_local(a) and self.is_local(b):
                return lc.TArrow(a, b)
            return Arrow(a, b)
        return a

    def is_local(self, t: ChorType) -> bool:
        if isinstance(t, TVar):
            return self.scope.get(t.name) is Kind.LOCAL
        return isinstance(t, lc.LOCAL_TYPES)

    def kind(self) -> Kind:
        t = self.tok
        if t.text in KINDS and t.kind in ("sym", "ident"):
            self.pos += 1
            return KINDS[t.text]
        raise self.error(f"expected a kind (*, loc, locset or ty) but found {t.text!r}")

    def ctype1(self) -> ChorType:
        a = self.ctype2()
        while self.accept("+"):
            a = Sum(a, self.ctype2())
        return a

    def ctype2(self) -> ChorType:
        a = self.ctype3()
        while self.accept("*"):
            a = Prod(a, self.ctype3())
        return a

    def ctype3(self) -> ChorType:
        t = self.tok
        if self.accept("("):
            inner = self.ctype()
            self.expect(")")
            return self.located(inner) if self.at("@") else inner
        if self.at("int", "bool", "tyrep", "list", "loc", "locset"):
            return self.located(self.ltype1())
        if self.at("{") or (self.is_name() and self.peek().text == "\\/"):
            return self.rho()
        if self.is_name():
            name = self.ident()
            if self.at("@"):
                return self.located(TVar(name))
            return TVar(name) if name in self.scope else Loc(name)
        raise self.error(f"expected a type but found {t.text or 'end of input'!r}")

    def located(self, te: ChorType) -> ChorType:
        if not self.accept("@"):
            return te
        return At(te, self.rho_atom())

    # -- choreographies

    def chor(self) -> Chor:
        if self.at("let"):
            return self.let()
        if self.accept("if"):
            cond = self.chor1()
            self.expect("@")
            rho = self.rho_atom()
            self.expect("then")
            a = self.chor()
            self.expect("else")
            return Ite(rho, cond, a, self.chor())
        if self.accept("sync"):
            sender = self.loc_expr()
            self.expect("[")
            tok = self.tok
            label = self.ident("left or right")
            if label not in ("left", "right"):
                raise self.error(f"a selection label is left or right, not {label!r}", tok)
            self.expect("]")
            self.expect("~>")
            dest = self.rho_atom()
            self.expect(";")
            return Sync(sender, "L" if label == "left" else "R", dest, self.chor())
        if self.accept("fun"):
            f = self.ident("a function name")
            self.expect("(")
            x = self.ident("a parameter")
            self.expect(":")
            dom = self.ctype()
            self.expect(")")
            cod = self.ctype() if self.accept(":") else None
            self.expect("=")
            return ChorFun(f, x, dom, cod, self.chor())
        if self.accept("tyfun"):
            v = self.ident("a type variable")
            self.expect("::")
            k = self.kind()
            self.expect("=>")
            with self.scoped(v, k):
                return TyAbs(v, k, self.chor())
        if self.accept("case"):
            s = self.chor1()
            self.expect("of")
            self.expect("inl")
            x = self.ident("a variable")
            self.expect("=>")
            left = self.chor1()
            self.expect("|")
            self.expect("inr")
            y = self.ident("a variable")
            self.expect("=>")
            return Case(s, x, left, y, self.chor())
        return self.chor1()

    def let(self) -> Chor:
        start = self.expect("let")
        rho = self.rho_atom()
        self.expect(".")
        name = self.ident("a variable")
        if self.accept("::"):
            kind = self.kind()
            bound = self.bound(start)
            with self.scoped(name, kind):
                return LetType(rho, name, kind, bound, self.chor())
        self.expect(":")
        te = self.ltype()
        return LetLocal(rho, name, te, self.bound(start), self.chor())

    def bound(self, start: Token) -> Chor:
        self.expect(":=")
        bound = self.chor()
        if not self.at("in"):
            raise self.error(f"this let has no matching 'in' (found "
                             f"{self.tok.text or 'end of input'!r})", start, "unbalanced-let")
        self.pos += 1
        return bound

    def chor1(self) -> Chor:
        c = self.chor2()
        while self.accept("~>"):
            sender = None
            if self.accept("["):
                sender = self.loc_expr()
                self.expect("]")
            elif isinstance(c, Done) and isinstance(c.rho, Sng):
                sender = c.rho.elem
            else:
                raise self.error("write ~>[sender] when the sent value is not a single "
                                 "location's local value")
            c = Send(c, sender, self.rho_atom())
        return c

    def chor2(self) -> Chor:
        c = self.chor3()
        while True:
            if self.accept("["):
                t = self.ctype()
                self.expect("]")
                c = TyApp(c, t)
            elif self.starts_chor3():
                c = ChorApp(c, self.chor3())
            else:
                return c

    def starts_chor3(self) -> bool:
        return self.is_name() or self.at("(", "{", "fst", "snd", "unfold", "fold", "inl", "inr")

    def chor3(self) -> Chor:
        if self.accept("fst"):
            return Fst(self.chor3())
        if self.accept("snd"):
            return Snd(self.chor3())
        if self.accept("unfold"):
            return Unfold(self.chor3())
        for word, cls in (("fold", Fold), ("inl", Inl), ("inr", Inr)):
            if self.accept(word):
                self.expect("[")
                t = self.ctype()
                self.expect("]")
                return cls(t, self.chor3())
        return self.chor4()

    def chor4(self) -> Chor:
        t = self.tok
        if self.at("("):
            saved = self.pos
            try:
                self.pos += 1
                rho = self.rho()
                self.expect(")")
                self.expect(".")
                return Done(rho, self.term5())
            except ParseError:
                self.pos = saved
            self.expect("(")
            a = self.chor()
            if self.accept(","):
                b = self.chor()
                self.expect(")")
                return Pair(a, b)
            self.expect(")")
            return a
        if self.at("{") or (self.is_name() and self.peek().text == "."):
            rho = self.rho_atom()
            self.expect(".")
            return Done(rho, self.term5())
        if self.is_name():
            return ChorVar(self.ident())
        raise self.error(f"expected a choreography but found {t.text or 'end of input'!r}")

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after the end of the program")


def _ty_rep(t: lc.LType, tok: Token, p: _Parser) -> lc.Term:
    match t:
        case lc.TInt():
            return lc.RepInt()
        case lc.TBool():
            return lc.RepBool()
        case lc.TArrow(a, b):
            return lc.RepArrow(_ty_rep(a, tok, p), _ty_rep(b, tok, p))
    raise p.error(f"{lc.show_ltype(t)} has no representation", tok)


# ---------------------------------------------------------------- entry points


def parse_chor(text: str, table: lc.LocationTable | None = None,
               scope: Mapping[str, Kind] | None = None) -> Chor:
    """Parse one choreography; `scope` declares its free type variables."""
    p = _Parser(text, table, scope)
    c = p.chor()
    p.finish()
    return c


def parse_type(text: str, scope: Mapping[str, Kind] | None = None) -> ChorType:
    p = _Parser(text, None, scope)
    t = p.ctype()
    p.finish()
    return t


def parse_term(text: str, table: lc.LocationTable | None = None) -> lc.Term:
    p = _Parser(text, table)
    e = p.term()
    p.finish()
    return e


def parse(text: str) -> SourceFile:
    """Parse a source file (header, definitions, main); raises ParseError."""
    p = _Parser(text)
    locations: list[str] = []
    if p.at("locations") and p.peek().kind == "ident":
        p.pos += 1
        locations.append(_declare(p, locations))
        while p.accept(","):
            locations.append(_declare(p, locations))
        p.expect(";")
    table = _codes(p, locations) if p.at("codes") and p.peek().text == "{" else None
    if table is not None:
        missing = tuple(n for n in locations if n not in table.locations)
        table = lc.LocationTable(table.codes, table.default, missing)
    if table is None and locations:
        table = lc.LocationTable.of(locations)
    p.table = table
    defs: list[tuple[str, lc.Term]] = []
    while p.at("def") and p.is_name(1):
        p.pos += 1
        name = p.ident("a definition name")
        p.expect("=")
        body = p.term()
        p.accept(";")
        for prev, value in defs:
            body = lc.lsubst_term(body, prev, value)
        defs.append((name, body))
    declared = None
    main_tok = p.tok
    if p.at("main") and p.peek().text in (":", "="):
        p.pos += 1
        if p.accept(":"):
            declared = p.ctype()
        p.expect("=")
    main = p.chor()
    p.accept(";")
    p.finish()
    for name, value in reversed(defs):
        main = _inline(main, name, value, p, main_tok)
    if not locations:
        locations = sorted(named_locs(main))
        if not locations:
            raise p.error("the program names no locations; add a 'locations' header",
                          main_tok, "no-locations")
        table = lc.LocationTable.of(locations)
    else:
        used = named_locs(main)
        if declared is not None:
            used = used | named_locs_type(declared)
        missing = sorted(used - set(locations))
        if missing:
            raise p.error(f"undeclared location(s): {', '.join(missing)}", main_tok,
                          "undeclared-location")
    return SourceFile(tuple(locations), table, main, declared, tuple(defs))


def _declare(p: _Parser, seen: list[str]) -> str:
    tok = p.tok
    name = p.ident("a location name")
    if name in seen:
        raise p.error(f"location {name} is declared twice", tok, "duplicate-location")
    return name


def _codes(p: _Parser, locations: list[str]) -> lc.LocationTable:
    p.pos += 1
    p.expect("{")
    codes: list[tuple[int, str]] = []
    default = None
    while not p.at("}"):
        if p.at("default"):
            p.pos += 1
            default = _known(p, locations)
        else:
            tok = p.tok
            n = p.integer()
            if any(n == c for c, _ in codes):
                raise p.error(f"code {n} is assigned twice", tok, "duplicate-code")
            p.expect("->")
            codes.append((n, _known(p, locations)))
        if not p.accept(";"):
            break
    p.expect("}")
    if default is None:
        if not codes:
            raise p.error("a code table needs at least one entry", rule="empty-codes")
        default = codes[-1][1]
    return lc.LocationTable(tuple(codes), default)


def _known(p: _Parser, locations: list[str]) -> str:
    tok = p.tok
    name = p.ident("a location")
    if locations and name not in locations:
        raise p.error(f"{name} is not a declared location", tok, "undeclared-location")
    return name


def _inline(c: Chor, name: str, value: lc.Term, p: _Parser, tok: Token) -> Chor:
    """Substitute a definition into every local program that uses it."""
    if isinstance(c, LetLocal) and c.var == name:
        raise p.error(f"definition {name} is shadowed by a let-bound variable", tok,
                      "shadowed-definition")
    if isinstance(c, Done):
        return Done(c.rho, lc.lsubst_term(c.expr, name, value))
    return with_children(c, tuple(_inline(k, name, value, p, tok) for k in children(c)))
