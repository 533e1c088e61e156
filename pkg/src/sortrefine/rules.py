"""Structuredness rules: formula AST, concrete syntax, and the built-in rules.

Concrete syntax, one rule per text::

    !($c1 = $c2) && prop($c1) = prop($c2) && val($c1) = 1 -> val($c2) = 1

Variables are ``$name``, IRIs are ``<...>``. Atoms are ``val($c)=0|1``,
``prop($c)=<iri>``, ``subj($c)=<iri>``, ``$a=$b``, ``val($a)=val($b)``,
``prop($a)=prop($b)`` and ``subj($a)=subj($b)``; each may use ``!=`` for a
negated atom. Connectives bind ``!`` > ``&&`` > ``||``, both binary
connectives associate to the left, and ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

GADGET_NS = "urn:gadget:"


class RuleSyntaxError(ValueError):
    def __init__(self, pos: int, message: str):
        super().__init__(f"at position {pos}: {message}")
        self.pos = pos


class RuleError(ValueError):
    pass


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class ValConst:
    var: str
    value: int


@dataclass(frozen=True)
class PropConst:
    var: str
    iri: str


@dataclass(frozen=True)
class SubjConst:
    var: str
    iri: str


@dataclass(frozen=True)
class CellEq:
    left: str
    right: str


@dataclass(frozen=True)
class ValEq:
    left: str
    right: str


@dataclass(frozen=True)
class PropEq:
    left: str
    right: str


@dataclass(frozen=True)
class SubjEq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


Atom = Union[ValConst, PropConst, SubjConst, CellEq, ValEq, PropEq, SubjEq]
Formula = Union[Atom, Not, And, Or]
UNARY_ATOMS = (ValConst, PropConst, SubjConst)
BINARY_ATOMS = (CellEq, ValEq, PropEq, SubjEq)


def variables(f: Formula) -> tuple[str, ...]:
    """Variables of ``f`` in order of first occurrence."""
    out: dict[str, None] = {}
    for a in atoms(f):
        if isinstance(a, UNARY_ATOMS):
            out.setdefault(a.var)
        else:
            out.setdefault(a.left)
            out.setdefault(a.right)
    return tuple(out)


def atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Not):
        yield from atoms(f.arg)
    elif isinstance(f, (And, Or)):
        yield from atoms(f.left)
        yield from atoms(f.right)
    else:
        yield f


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten nested top-level conjunctions."""
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def conjoin(*parts: Formula) -> Formula:
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def subject_constants(f: Formula) -> frozenset[str]:
    return frozenset(a.iri for a in atoms(f) if isinstance(a, SubjConst))


@dataclass(frozen=True)
class Rule:
    antecedent: Formula
    consequent: Formula
    name: str = field(default="", compare=False)

    def __post_init__(self):
        ante = set(self.variables)
        if not ante:
            raise RuleError("antecedent must mention at least one variable")
        extra = [v for v in variables(self.consequent) if v not in ante]
        if extra:
            names = ", ".join("$" + v for v in extra)
            raise RuleError(f"consequent uses variable not in antecedent: {names}")

    @property
    def variables(self) -> tuple[str, ...]:
        return variables(self.antecedent)

    @property
    def arity(self) -> int:
        return len(self.variables)

    def __str__(self) -> str:
        return print_rule(self)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<var>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<kw>val|prop|subj)\b
  | (?P<num>[01])\b
  | (?P<op>->|!=|&&|\|\||[()=!])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise RuleSyntaxError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, kind: str, value: str | None = None) -> str:
        k, v, pos = self.toks[self.i]
        if k != kind or (value is not None and v != value):
            want = value or kind
            got = v or "end of input"
            raise RuleSyntaxError(pos, f"expected {want!r}, got {got!r}")
        self.i += 1
        return v

    def at(self, kind: str, value: str | None = None) -> bool:
        k, v, _ = self.toks[self.i]
        return k == kind and (value is None or v == value)

    def disj(self) -> Formula:
        f = self.conj()
        while self.at("op", "||"):
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.at("op", "&&"):
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.at("op", "!"):
            self.i += 1
            return Not(self.unary())
        if self.at("op", "("):
            self.i += 1
            f = self.disj()
            self.take("op", ")")
            return f
        return self.atom()

    def _fn(self, name: str) -> str:
        self.take("kw", name)
        self.take("op", "(")
        v = self.take("var")[1:]
        self.take("op", ")")
        return v

    def _eq(self) -> bool:
        if self.at("op", "="):
            self.i += 1
            return False
        if self.at("op", "!="):
            self.i += 1
            return True
        k, v, pos = self.peek()
        raise RuleSyntaxError(pos, f"expected '=' or '!=', got {v or 'end of input'!r}")

    def atom(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "var":
            a = self.take("var")[1:]
            neg = self._eq()
            b = self.take("var")[1:]
            f: Formula = CellEq(a, b)
        elif kind == "kw":
            v = self._fn(value)
            neg = self._eq()
            k2, v2, pos2 = self.peek()
            if value == "val":
                if k2 == "num":
                    self.i += 1
                    f = ValConst(v, int(v2))
                elif k2 == "kw" and v2 == "val":
                    f = ValEq(v, self._fn("val"))
                else:
                    raise RuleSyntaxError(pos2, "val(...) compares with 0, 1 or val(...)")
            else:
                const_cls, eq_cls = (PropConst, PropEq) if value == "prop" else (SubjConst, SubjEq)
                if k2 == "iri":
                    self.i += 1
                    f = const_cls(v, v2[1:-1])
                elif k2 == "kw" and v2 == value:
                    f = eq_cls(v, self._fn(value))
                else:
                    raise RuleSyntaxError(pos2, f"{value}(...) compares with an IRI or {value}(...)")
        else:
            raise RuleSyntaxError(pos, f"expected an atom, got {value or 'end of input'!r}")
        return Not(f) if neg else f


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.disj()
    p.take("eof")
    return f


def parse_rule(text: str, name: str = "") -> Rule:
    p = _Parser(text)
    ante = p.disj()
    p.take("op", "->")
    cons = p.disj()
    p.take("eof")
    return Rule(ante, cons, name)


# -- printing ----------------------------------------------------------------

def _atom_text(a: Atom, neg: bool) -> str:
    eq = "!=" if neg else "="
    if isinstance(a, ValConst):
        return f"val(${a.var}) {eq} {a.value}"
    if isinstance(a, PropConst):
        return f"prop(${a.var}) {eq} <{a.iri}>"
    if isinstance(a, SubjConst):
        return f"subj(${a.var}) {eq} <{a.iri}>"
    if isinstance(a, CellEq):
        return f"${a.left} {eq} ${a.right}"
    fn = {ValEq: "val", PropEq: "prop", SubjEq: "subj"}[type(a)]
    return f"{fn}(${a.left}) {eq} {fn}(${a.right})"


def print_formula(f: Formula, prec: int = 0) -> str:
    if isinstance(f, Or):
        s = f"{print_formula(f.left, 1)} || {print_formula(f.right, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(f, And):
        s = f"{print_formula(f.left, 2)} && {print_formula(f.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(f, Not):
        if isinstance(f.arg, UNARY_ATOMS + BINARY_ATOMS):
            return _atom_text(f.arg, True)
        return "!" + print_formula(f.arg, 3)
    return _atom_text(f, False)


def print_rule(r: Rule) -> str:
    return f"{print_formula(r.antecedent)} -> {print_formula(r.consequent)}"


def read_rule_file(path) -> Rule:
    from pathlib import Path

    p = Path(path)
    return parse_rule(p.read_text(encoding="utf-8"), name=p.stem)


# -- built-in rules ------------------------------------------------------------

def cov_rule() -> Rule:
    return Rule(CellEq("c", "c"), ValConst("c", 1), "cov")


def sim_rule() -> Rule:
    ante = conjoin(Not(CellEq("c1", "c2")), PropEq("c1", "c2"), ValConst("c1", 1))
    return Rule(ante, ValConst("c2", 1), "sim")


def _pair_head(p1: str, p2: str) -> Formula:
    return conjoin(SubjEq("c1", "c2"), PropConst("c1", p1), PropConst("c2", p2))


def dep_rule(p1: str, p2: str) -> Rule:
    """Dependency rule; unlike :func:`builtin_rule` this allows ``p1 == p2``."""
    return Rule(And(_pair_head(p1, p2), ValConst("c1", 1)), ValConst("c2", 1), f"dep[{p1},{p2}]")


def symdep_rule(p1: str, p2: str) -> Rule:
    ante = And(_pair_head(p1, p2), Or(ValConst("c1", 1), ValConst("c2", 1)))
    return Rule(ante, And(ValConst("c1", 1), ValConst("c2", 1)), f"symdep[{p1},{p2}]")


def depdisj_rule(p1: str, p2: str) -> Rule:
    return Rule(_pair_head(p1, p2), Or(ValConst("c1", 0), ValConst("c2", 1)), f"depdisj[{p1},{p2}]")


_PAIRED = {"dep": dep_rule, "symdep": symdep_rule, "depdisj": depdisj_rule}


def builtin_rule(kind: str, p1: str | None = None, p2: str | None = None) -> Rule:
    kind = kind.lower()
    if kind == "cov":
        return cov_rule()
    if kind == "sim":
        return sim_rule()
    if kind in _PAIRED:
        if p1 is None or p2 is None:
            raise RuleError(f"{kind} needs two properties")
        if p1 == p2:
            raise RuleError(f"{kind} needs two distinct properties")
        return _PAIRED[kind](p1, p2)
    raise RuleError(f"unknown built-in rule {kind!r}")


def builtin_from_spec(spec: str) -> Rule:
    """Parse ``cov``, ``sim`` or ``dep|symdep|depdisj:<p1>,<p2>``."""
    kind, _, args = spec.partition(":")
    if not args:
        return builtin_rule(kind)
    parts = [a.strip().removeprefix("<").removesuffix(">") for a in args.split(",")]
    if len(parts) != 2:
        raise RuleError(f"{kind} needs exactly two properties, got {len(parts)}")
    return builtin_rule(kind, parts[0], parts[1])


def gadget_rule_r0(namespace: str = GADGET_NS) -> Rule:
    """The fixed rule of the 3-colouring reduction over the gadget columns."""
    sp1, sp2, idp = namespace + "sp1", namespace + "sp2", namespace + "idp"
    parts: list[Formula] = []
    for v in ("c1", "c2", "d1", "d2", "e", "f1", "f2"):
        parts += [Not(PropConst(v, sp1)), Not(PropConst(v, sp2))]
    parts += [
        PropConst("x", idp), ValConst("x", 1),
        Not(CellEq("c1", "x")), SubjEq("c1", "x"), ValConst("c1", 1),
        Not(CellEq("c2", "x")), SubjEq("c2", "x"), ValConst("c2", 1),
        Not(CellEq("c1", "c2")),
        PropConst("y", idp), ValConst("y", 0),
        SubjEq("d1", "y"), PropEq("d1", "c1"),
        SubjEq("d2", "y"), PropEq("d2", "c2"),
        PropConst("z", idp), SubjEq("z", "e"),
        PropEq("e", "c1"), Not(CellEq("e", "c1")), ValConst("e", 1),
        PropConst("u", idp), ValConst("u", 0),
        SubjEq("u", "f1"), PropEq("f1", "c1"),
        SubjEq("u", "f2"), PropEq("f2", "c2"),
        ValConst("f1", 1), ValConst("f2", 1),
    ]
    cons = And(Or(ValConst("d1", 1), ValConst("d2", 1)), ValConst("z", 0))
    return Rule(conjoin(*parts), cons, "r0")
