"""Concrete syntax for FO(C) theories and partial structures.

The grammar is documented in ``docs/grammar.ebnf``.  Quick reference::

    vocabulary { Nat/1. Succ/2. const zero. introduced _T1/1. }
    clog {
      New x : (Nat(x) And Zero(x)).
      All x [Nat(x)] : New y : (Nat(y) And Succ(x, y)).
    }
    fo { !x: Nat(x) => ?y: Succ(x, y). }

    structure { domain = {a, b}; P = {(a)}; Q = unknown;
                R.ct = {(a)}; R.pt = {(a), (b)}; c = a }
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .ast import (
    Atom, And, BOT, CAll, CAnd, CAtom, CIf, CNew, COr, CSel, Const, Eq, Exists,
    FocTheory, Forall, Iff, Implies, Neg, Or, RExists, RForall, TOP, Top, Bot,
    Var, Vocabulary, cand_list, is_reserved,
)


class ParseError(ValueError):
    def __init__(self, message, line=0, col=0, origin="<string>"):
        super().__init__(f"{origin}:{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.origin = origin


@dataclass(frozen=True)
class SourceFile:
    text: str
    origin: str = "<string>"

    @classmethod
    def read(cls, path) -> "SourceFile":
        if str(path) == "-":
            import sys
            return cls(sys.stdin.read(), "<stdin>")
        return cls(Path(path).read_text(encoding="utf-8"), str(path))


def _source(src) -> SourceFile:
    return src if isinstance(src, SourceFile) else SourceFile(src)


# --------------------------------------------------------------------------
# Lexer

KEYWORDS = {
    "vocabulary", "clog", "fo", "const", "introduced", "All", "Sel", "New",
    "And", "Or", "true", "false", "structure", "domain", "unknown", "define",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<number>[0-9]+)
  | (?P<op><=>|<-|=>|[{}()\[\],.:;/=~&|!?])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str      # "ident", "number", "kw", "op", "eof"
    value: str
    line: int
    col: int


def tokenize(src: SourceFile) -> list:
    text, pos, line, line_start = src.text, 0, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1, src.origin)
        kind = m.lastgroup
        val = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            out.append(Token("kw" if val in KEYWORDS else "ident", val, line, col))
        elif kind in ("number", "op"):
            out.append(Token(kind, val, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, src: SourceFile):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        # predicate name -> (arity, first token) when inferring the vocabulary
        self.declared = None
        self.constants = set()
        self.introduced = set()
        self.inferred = {}
        self.inferred_consts = set()

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col, self.src.origin)

    def at(self, value, kind=None) -> bool:
        t = self.tok
        return t.value == value and (kind is None or t.kind == kind) and t.kind != "ident"

    def accept(self, value) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, value) -> Token:
        if not self.at(value):
            found = self.tok.value or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what="identifier") -> Token:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected {what}, found {t.value or 'end of input'!r}")
        self.i += 1
        return t

    # -- vocabulary ------------------------------------------------------
    def vocab_block(self):
        self.expect("vocabulary")
        self.expect("{")
        self.declared = {}
        while not self.accept("}"):
            if self.accept("const"):
                while True:
                    t = self.ident("constant name")
                    self._declare_const(t)
                    if not self.accept(","):
                        break
                self.expect(".")
                continue
            intro = self.accept("introduced")
            t = self.ident("predicate name")
            self.expect("/")
            n = self.tok
            if n.kind != "number":
                raise self.error("expected arity")
            self.i += 1
            self.expect(".")
            if t.value in self.declared:
                raise self.error(f"predicate {t.value} declared twice", t)
            if is_reserved(t.value) and not intro:
                raise self.error(f"{t.value} is reserved for transformation output; "
                                 "declare it as 'introduced'", t)
            self.declared[t.value] = int(n.value)
            if intro:
                self.introduced.add(t.value)

    def _declare_const(self, t):
        if t.value in self.constants:
            raise self.error(f"constant {t.value} declared twice", t)
        if self.declared and t.value in self.declared:
            raise self.error(f"{t.value} already declared as a predicate", t)
        self.constants.add(t.value)

    def vocabulary(self) -> Vocabulary:
        if self.declared is not None:
            return Vocabulary(self.declared, self.constants, self.introduced)
        clash = set(self.inferred) & self.inferred_consts
        if clash:
            raise self.error(f"names used both as predicate and constant: {sorted(clash)}")
        return Vocabulary(self.inferred, self.inferred_consts, ())

    def check_pred(self, t: Token, arity: int):
        name = t.value
        if self.declared is not None:
            if name not in self.declared:
                raise self.error(f"undeclared predicate {name}", t)
            if self.declared[name] != arity:
                raise self.error(f"predicate {name} has arity {self.declared[name]}, "
                                 f"used with {arity} argument(s)", t)
            return
        if is_reserved(name):
            raise self.error(f"{name} is reserved for transformation output", t)
        if name in self.inferred and self.inferred[name] != arity:
            raise self.error(f"predicate {name} used with arities "
                             f"{self.inferred[name]} and {arity}", t)
        self.inferred[name] = arity

    # -- terms -------------------------------------------------------------
    def term(self, scope):
        t = self.ident("term")
        name = t.value
        if name in scope:
            return Var(name)
        if self.declared is not None:
            if name in self.constants:
                return Const(name)
            raise self.error(f"unbound variable or undeclared constant {name}", t)
        self.inferred_consts.add(name)
        return Const(name)

    def args(self, scope):
        out = []
        if self.accept("("):
            if not self.accept(")"):
                while True:
                    out.append(self.term(scope))
                    if self.accept(")"):
                        break
                    self.expect(",")
        return tuple(out)

    def bind(self, t: Token, scope):
        name = t.value
        if name in scope:
            raise self.error(f"variable {name} shadows an enclosing binding", t)
        if name in self.constants or name in self.inferred_consts:
            raise self.error(f"variable {name} clashes with a constant", t)
        return scope | {name}

    def var_list(self, scope):
        toks = [self.ident("variable")]
        while self.accept(","):
            toks.append(self.ident("variable"))
        inner = scope
        for t in toks:
            inner = self.bind(t, inner)
        return [t.value for t in toks], inner

    # -- FO formulas ---------------------------------------------------------
    def formula(self, scope):
        left = self.f_imp(scope)
        if self.accept("<=>"):
            return Iff(left, self.formula(scope))
        return left

    def f_imp(self, scope):
        left = self.f_or(scope)
        if self.accept("=>"):
            return Implies(left, self.f_imp(scope))
        return left

    def f_or(self, scope):
        left = self.f_and(scope)
        if self.accept("|"):
            return Or(left, self.f_or(scope))
        return left

    def f_and(self, scope):
        left = self.f_unary(scope)
        if self.accept("&"):
            return And(left, self.f_and(scope))
        return left

    def f_unary(self, scope):
        if self.accept("~"):
            return Neg(self.f_unary(scope))
        if self.at("!") or self.at("?"):
            universal = self.tok.value == "!"
            self.i += 1
            names, inner = self.var_list(scope)
            qual = None
            if self.accept("["):
                qual = self.formula(inner)
                self.expect("]")
            self.expect(":")
            body = self.formula(inner)
            if qual is not None:
                body = (RForall if universal else RExists)(names[-1], qual, body)
                names = names[:-1]
            for v in reversed(names):
                body = (Forall if universal else Exists)(v, body)
            return body
        return self.f_primary(scope)

    def f_primary(self, scope):
        if self.accept("("):
            f = self.formula(scope)
            self.expect(")")
            return f
        if self.accept("true"):
            return TOP
        if self.accept("false"):
            return BOT
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected formula, found {t.value or 'end of input'!r}")
        if self.peek().value == "=" and self.peek().kind == "op":
            left = self.term(scope)
            self.expect("=")
            return Eq(left, self.term(scope))
        self.i += 1
        args = self.args(scope)
        self.check_pred(t, len(args))
        return Atom(t.value, args)

    # -- causal effect expressions ------------------------------------------
    def cee(self, scope):
        c = self.c_or(scope)
        while self.accept("<-"):
            c = CIf(self.formula(scope), c)
        return c

    def c_or(self, scope):
        left = self.c_and(scope)
        if self.accept("Or"):
            return COr(left, self.c_or(scope))
        return left

    def c_and(self, scope):
        left = self.c_unary(scope)
        if self.accept("And"):
            return CAnd(left, self.c_and(scope))
        return left

    def c_unary(self, scope):
        if self.at("All") or self.at("Sel"):
            is_all = self.tok.value == "All"
            self.i += 1
            if is_all and self.at("["):
                self.i += 1
                cond = self.formula(scope)
                self.expect("]")
                self.expect(":")
                return CIf(cond, self.cee(scope))
            names, inner = self.var_list(scope)
            qual = TOP
            if self.accept("["):
                qual = self.formula(inner)
                self.expect("]")
            self.expect(":")
            body = self.cee(inner)
            cls = CAll if is_all else CSel
            body = cls(names[-1], qual, body)
            for v in reversed(names[:-1]):
                body = cls(v, TOP, body)
            return body
        if self.accept("New"):
            t = self.ident("variable")
            inner = self.bind(t, scope)
            self.expect(":")
            return CNew(t.value, self.cee(inner))
        if self.accept("("):
            c = self.cee(scope)
            self.expect(")")
            return c
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected causal effect expression, found "
                             f"{t.value or 'end of input'!r}")
        self.i += 1
        args = self.args(scope)
        self.check_pred(t, len(args))
        return CAtom(t.value, args)

    # -- top level -------------------------------------------------------------
    def theory(self) -> FocTheory:
        if self.at("vocabulary"):
            self.vocab_block()
        self.expect("clog")
        self.expect("{")
        rules = []
        while not self.accept("}"):
            rules.append(self.cee(frozenset()))
            self.expect(".")
        if not rules:
            raise self.error("a clog block needs at least one expression")
        sentences = []
        if self.accept("fo"):
            self.expect("{")
            while not self.accept("}"):
                sentences.append(self.formula(frozenset()))
                self.expect(".")
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.value!r} after theory")
        return FocTheory(cand_list(rules), tuple(sentences), self.vocabulary())


def parse_theory(src) -> FocTheory:
    """Parse ``.foc`` text (a string or :class:`SourceFile`)."""
    return _Parser(_source(src)).theory()


def parse_formula(text: str, vocabulary: Vocabulary = None, scope=()) -> "Formula":
    p = _Parser(_source(text))
    if vocabulary is not None:
        p.declared = dict(vocabulary.predicates)
        p.constants = set(vocabulary.constants)
    f = p.formula(frozenset(scope))
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.value!r}")
    return f


def parse_cee(text: str, vocabulary: Vocabulary = None, scope=()):
    p = _Parser(_source(text))
    if vocabulary is not None:
        p.declared = dict(vocabulary.predicates)
        p.constants = set(vocabulary.constants)
    c = p.cee(frozenset(scope))
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.value!r}")
    return c


# --------------------------------------------------------------------------
# Structures


def parse_structure(src, vocab: Vocabulary):
    """Parse ``.struct`` text against ``vocab`` into a PartialStructure."""
    from .semantics import PartialSet, PartialStructure

    p = _Parser(_source(src))
    p.expect("structure")
    p.expect("{")
    dom = {}
    preds = {}
    consts = {}
    seen = set()

    def element():
        t = p.tok
        if t.kind not in ("ident", "number"):
            raise p.error("expected domain element")
        p.i += 1
        return t

    def tuple_():
        if p.accept("("):
            items = []
            if not p.accept(")"):
                while True:
                    items.append(element())
                    if p.accept(")"):
                        break
                    p.expect(",")
            return items
        return [element()]

    def elem_set():
        p.expect("{")
        out = []
        if not p.accept("}"):
            while True:
                out.append(tuple_())
                if p.accept("}"):
                    break
                p.expect(",")
        return out

    while not p.accept("}"):
        head = p.tok
        if p.accept("domain"):
            name = "domain"
        else:
            name = p.ident("predicate or constant").value
        part = None
        if p.accept("."):
            pt = p.ident("'ct' or 'pt'")
            if pt.value not in ("ct", "pt"):
                raise p.error("expected 'ct' or 'pt'", pt)
            part = pt.value
        key = (name, part)
        if key in seen:
            raise p.error(f"{name} assigned twice", head)
        seen.add(key)
        p.expect("=")
        if name == "domain":
            items = elem_set()
            for tup in items:
                if len(tup) != 1:
                    raise p.error("domain elements are not tuples", tup[0] if tup else head)
            dom[part] = (head, [tup[0] for tup in items])
        elif name in vocab.constants and part is None:
            consts[name] = element()
        else:
            if name not in vocab.predicates:
                raise p.error(f"undeclared predicate or constant {name}", head)
            if p.accept("unknown"):
                value = "unknown"
            elif p.accept("true"):
                value = [[]]
            elif p.accept("false"):
                value = []
            else:
                value = elem_set()
            preds.setdefault(name, {})[part] = (head, value)
        if not p.accept(";"):
            p.expect("}")
            break
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.value!r} after structure")

    if None in dom and ("ct" in dom or "pt" in dom):
        raise p.error("domain given both as a set and by ct/pt")
    if None in dom:
        d_ct = d_pt = {t.value for t in dom[None][1]}
    else:
        d_pt = {t.value for t in dom["pt"][1]} if "pt" in dom else None
        d_ct = {t.value for t in dom["ct"][1]} if "ct" in dom else set()
        if d_pt is None:
            if "ct" not in dom:
                raise p.error("structure has no domain")
            d_pt = set(d_ct)
        if not d_ct <= d_pt:
            tok = dom["ct"][0]
            raise p.error("domain.ct is not a subset of domain.pt", tok)
    universe = tuple(sorted(d_pt))

    def to_tuples(name, head, items):
        arity = vocab.predicates[name]
        out = set()
        for tup in items:
            if len(tup) != arity:
                raise p.error(f"{name} has arity {arity}", tup[0] if tup else head)
            for e in tup:
                if e.value not in d_pt:
                    raise p.error(f"element {e.value} is outside the domain", e)
            out.add(tuple(e.value for e in tup))
        return frozenset(out)

    pred_sets = {}
    for name, arity in vocab.predicates.items():
        everything = frozenset(product(universe, repeat=arity))
        spec = preds.get(name, {})
        if None in spec and len(spec) > 1:
            raise p.error(f"{name} given both as a set and by ct/pt", spec[None][0])
        if None in spec:
            head, val = spec[None]
            if val == "unknown":
                ct, pt = frozenset(), everything
            else:
                ct = pt = to_tuples(name, head, val)
        else:
            ct, pt = frozenset(), everything
            if "ct" in spec:
                head, val = spec["ct"]
                if val == "unknown":
                    raise p.error("'unknown' is not a set", head)
                ct = to_tuples(name, head, val)
            if "pt" in spec:
                head, val = spec["pt"]
                if val == "unknown":
                    raise p.error("'unknown' is not a set", head)
                pt = to_tuples(name, head, val)
            if not ct <= pt:
                raise p.error(f"{name}.ct is not a subset of {name}.pt",
                              spec.get("ct", spec.get("pt"))[0])
        pred_sets[name] = PartialSet(ct, pt)

    const_map = {}
    for c, t in consts.items():
        if t.value not in d_ct:
            raise p.error(f"constant {c} is mapped outside the domain", t)
        const_map[c] = t.value
    missing = vocab.constants - set(const_map)
    if missing:
        raise p.error(f"constants without interpretation: {sorted(missing)}")
    return PartialStructure(universe, PartialSet(frozenset(d_ct), frozenset(d_pt)),
                            pred_sets, const_map, {}, dict(vocab.predicates))


# --------------------------------------------------------------------------
# Printing

# binding strength of FO connectives; larger binds tighter
_F_LEVEL = {Iff: 1, Implies: 2, Or: 3, And: 4}


def _term(t) -> str:
    return t.name


def _atom(pred, args) -> str:
    if not args:
        return pred
    return f"{pred}({', '.join(_term(a) for a in args)})"


def print_formula(f) -> str:
    return _pf(f, top=True)


def _pf(f, top=False) -> str:
    match f:
        case Atom(p, args):
            return _atom(p, args)
        case Eq(l, r):
            return f"{_term(l)} = {_term(r)}"
        case Top():
            return "true"
        case Bot():
            return "false"
        case Neg(b):
            return "~" + _pf_operand(b, 5, "neg")
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            lvl = _F_LEVEL[type(f)]
            op = {And: "&", Or: "|", Implies: "=>", Iff: "<=>"}[type(f)]
            return f"{_pf_operand(l, lvl, 'left')} {op} {_pf_operand(r, lvl, 'right')}"
        case Forall() | Exists() | RForall() | RExists():
            text = _pf_quant(f)
            return text if top else f"({text})"
    raise TypeError(f"not a formula: {f!r}")


def _pf_operand(f, lvl, side) -> str:
    if isinstance(f, (Forall, Exists, RForall, RExists)):
        return f"({_pf_quant(f)})"
    inner = _F_LEVEL.get(type(f))
    if inner is None:
        return _pf(f)
    if inner < lvl or (inner == lvl and (side == "left" or isinstance(f, Iff))):
        return f"({_pf(f)})"
    return _pf(f)


def _pf_quant(f) -> str:
    universal = isinstance(f, (Forall, RForall))
    plain, restr = (Forall, RForall) if universal else (Exists, RExists)
    names = []
    qual = None
    while isinstance(f, plain):
        names.append(f.var)
        f = f.body
    if isinstance(f, restr):
        names.append(f.var)
        qual = f.qual
        f = f.body
    sym = "!" if universal else "?"
    q = f" [{_pf(qual, top=True)}]" if qual is not None else ""
    return f"{sym}{', '.join(names)}{q}: {_pf(f, top=True)}"


# CEE levels: If (weakest) < Or < And < primaries; quantifiers always wrapped
_C_LEVEL = {CIf: 1, COr: 2, CAnd: 3}


def print_cee(c) -> str:
    return _pc(c)


def _pc(c) -> str:
    match c:
        case CAtom(p, args):
            return _atom(p, args)
        case CIf(cond, body):
            inner = _pc(body)
            if isinstance(body, (CIf, CAll, CSel, CNew)):
                inner = f"({inner})"
            return f"{inner} <- {_pf(cond, top=True)}"
        case CAnd(l, r) | COr(l, r):
            lvl = _C_LEVEL[type(c)]
            op = "And" if isinstance(c, CAnd) else "Or"
            return f"{_pc_operand(l, lvl, 'left')} {op} {_pc_operand(r, lvl, 'right')}"
        case CAll() | CSel():
            cls = type(c)
            names = []
            while isinstance(c.body, cls) and isinstance(c.qual, Top):
                names.append(c.var)
                c = c.body
            names.append(c.var)
            q = "" if isinstance(c.qual, Top) else f" [{_pf(c.qual, top=True)}]"
            word = "All" if cls is CAll else "Sel"
            return f"{word} {', '.join(names)}{q} : {_pc(c.body)}"
        case CNew(v, body):
            return f"New {v} : {_pc(body)}"
    raise TypeError(f"not a causal effect expression: {c!r}")


def _pc_operand(c, lvl, side) -> str:
    if isinstance(c, (CAll, CSel, CNew)):
        return f"({_pc(c)})"
    inner = _C_LEVEL.get(type(c))
    if inner is None:
        return _pc(c)
    if inner < lvl or (inner == lvl and side == "left"):
        return f"({_pc(c)})"
    return _pc(c)


def print_vocabulary(v: Vocabulary) -> str:
    lines = ["vocabulary {"]
    for name in sorted(v.predicates):
        prefix = "introduced " if name in v.introduced else ""
        lines.append(f"  {prefix}{name}/{v.predicates[name]}.")
    if v.constants:
        lines.append(f"  const {', '.join(sorted(v.constants))}.")
    lines.append("}")
    return "\n".join(lines)


def print_theory(t: FocTheory) -> str:
    parts = [print_vocabulary(t.vocabulary), "clog {"]
    node = t.causal
    while isinstance(node, CAnd):
        parts.append(f"  {print_cee(node.left)}.")
        node = node.right
    parts.append(f"  {print_cee(node)}.")
    parts.append("}")
    if t.sentences:
        parts.append("fo {")
        for s in t.sentences:
            parts.append(f"  {print_formula(s)}.")
        parts.append("}")
    return "\n".join(parts) + "\n"


def _tuples_text(tuples) -> str:
    return "{" + ", ".join("(" + ", ".join(t) + ")" for t in sorted(tuples)) + "}"


def print_structure(s) -> str:
    """Render a PartialStructure in ``.struct`` syntax."""
    items = []
    d = s.domain
    if d.ct == d.pt:
        items.append("domain = {" + ", ".join(sorted(d.ct)) + "}")
    else:
        items.append("domain.ct = {" + ", ".join(sorted(d.ct)) + "}")
        items.append("domain.pt = {" + ", ".join(sorted(d.pt)) + "}")
    for name in sorted(s.preds):
        ps = s.preds[name]
        arity = s.arity(name)
        if ps.ct == ps.pt:
            if arity == 0:
                items.append(f"{name} = {'true' if ps.ct else 'false'}")
            else:
                items.append(f"{name} = {_tuples_text(ps.ct)}")
        elif not ps.ct and ps.pt == frozenset(product(sorted(d.pt), repeat=arity)):
            items.append(f"{name} = unknown")
        else:
            items.append(f"{name}.ct = {_tuples_text(ps.ct)}")
            items.append(f"{name}.pt = {_tuples_text(ps.pt)}")
    for c in sorted(s.consts):
        items.append(f"{c} = {s.consts[c]}")
    return "structure {\n  " + ";\n  ".join(items) + "\n}\n"
