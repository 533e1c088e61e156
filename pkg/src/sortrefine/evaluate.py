"""Exact evaluation of rule-defined structuredness.

Two independent routes compute the same rational value:

* :func:`sigma_naive` expands the view into its 0/1 matrix and enumerates
  every assignment of rule variables to cells. Only usable on tiny inputs.
* :func:`sigma_fast` works on signatures. Each variable is first mapped to a
  (signature, column) pair, a *rough assignment*. For every rough assignment
  the number of concrete assignments is counted by enumerating which
  variables share a subject (set partitions within each signature) and
  weighting each pattern by a falling factorial of the signature's size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .rules import (
    And, CellEq, Formula, Not, Or, PropConst, PropEq, Rule, SubjConst, SubjEq,
    ValConst, ValEq, conjuncts, subject_constants, variables,
)
from .view import StructureView

Cell = tuple[int, int]
Tau = tuple[Cell, ...]


class UnboundVariable(KeyError):
    pass


class EvaluationTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class StructurednessValue:
    favorable: int
    total: int

    def __post_init__(self):
        if not 0 <= self.favorable <= self.total:
            raise ValueError(f"need 0 <= favorable <= total, got {self.favorable}/{self.total}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.favorable, self.total) if self.total else Fraction(1)

    def meets(self, theta: Fraction) -> bool:
        return self.favorable * theta.denominator >= theta.numerator * self.total

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        v = self.value
        return f"{v.numerator}/{v.denominator}"


def round_half_up(x: Fraction, places: int = 2) -> str:
    """Decimal rendering of a nonnegative rational, ties rounded up."""
    scale = 10 ** places
    n = (x * scale * 2 + 1) // 2
    return f"{n // scale}.{n % scale:0{places}d}"


# -- naive route ---------------------------------------------------------------

@dataclass(frozen=True)
class Matrix:
    subjects: tuple[str, ...]
    properties: tuple[str, ...]
    cells: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.subjects), len(self.properties)


def expand(view: StructureView) -> Matrix:
    """The full subject x property matrix, rows grouped by signature."""
    subjects, rows = [], []
    for i, sig in enumerate(view.signatures):
        for s in view.subjects_of(i):
            subjects.append(s)
            rows.append(sig.bits)
    return Matrix(tuple(subjects), view.properties, tuple(rows))


def satisfies(m: Matrix, rho: Mapping[str, Cell], f: Formula) -> bool:
    """Whether the matrix with cell assignment ``rho`` satisfies ``f``."""

    def cell(v: str) -> Cell:
        try:
            return rho[v]
        except KeyError:
            raise UnboundVariable(v) from None

    if isinstance(f, ValConst):
        s, p = cell(f.var)
        return m.cells[s][p] == f.value
    if isinstance(f, SubjConst):
        return m.subjects[cell(f.var)[0]] == f.iri
    if isinstance(f, PropConst):
        return m.properties[cell(f.var)[1]] == f.iri
    if isinstance(f, CellEq):
        return cell(f.left) == cell(f.right)
    if isinstance(f, ValEq):
        (s1, p1), (s2, p2) = cell(f.left), cell(f.right)
        return m.cells[s1][p1] == m.cells[s2][p2]
    if isinstance(f, SubjEq):
        return cell(f.left)[0] == cell(f.right)[0]
    if isinstance(f, PropEq):
        return cell(f.left)[1] == cell(f.right)[1]
    if isinstance(f, Not):
        return not satisfies(m, rho, f.arg)
    if isinstance(f, And):
        return satisfies(m, rho, f.left) and satisfies(m, rho, f.right)
    if isinstance(f, Or):
        return satisfies(m, rho, f.left) or satisfies(m, rho, f.right)
    raise TypeError(f"not a formula: {f!r}")


def _compile_cells(f: Formula, pos: Mapping[str, int], m: Matrix) -> Callable[[Sequence[Cell]], bool]:
    c = m.cells
    if isinstance(f, ValConst):
        i, want = pos[f.var], f.value
        return lambda a: c[a[i][0]][a[i][1]] == want
    if isinstance(f, SubjConst):
        i = pos[f.var]
        rows = {r for r, s in enumerate(m.subjects) if s == f.iri}
        return lambda a: a[i][0] in rows
    if isinstance(f, PropConst):
        i = pos[f.var]
        cols = {j for j, p in enumerate(m.properties) if p == f.iri}
        return lambda a: a[i][1] in cols
    if isinstance(f, CellEq):
        i, j = pos[f.left], pos[f.right]
        return lambda a: a[i] == a[j]
    if isinstance(f, ValEq):
        i, j = pos[f.left], pos[f.right]
        return lambda a: c[a[i][0]][a[i][1]] == c[a[j][0]][a[j][1]]
    if isinstance(f, SubjEq):
        i, j = pos[f.left], pos[f.right]
        return lambda a: a[i][0] == a[j][0]
    if isinstance(f, PropEq):
        i, j = pos[f.left], pos[f.right]
        return lambda a: a[i][1] == a[j][1]
    if isinstance(f, Not):
        g = _compile_cells(f.arg, pos, m)
        return lambda a: not g(a)
    if isinstance(f, And):
        g, h = _compile_cells(f.left, pos, m), _compile_cells(f.right, pos, m)
        return lambda a: g(a) and h(a)
    if isinstance(f, Or):
        g, h = _compile_cells(f.left, pos, m), _compile_cells(f.right, pos, m)
        return lambda a: g(a) or h(a)
    raise TypeError(f"not a formula: {f!r}")


def sigma_naive(view: StructureView | Matrix, rule: Rule, limit: int = 10**8) -> StructurednessValue:
    """Enumerate all (|S|*|P|)^n cell assignments. Small inputs only."""
    m = view if isinstance(view, Matrix) else expand(view)
    n_rows, n_cols = m.shape
    n = rule.arity
    space = (n_rows * n_cols) ** n
    if space > limit:
        raise EvaluationTooLarge(f"{space} assignments exceeds limit {limit}")
    pos = {v: i for i, v in enumerate(rule.variables)}
    ante = _compile_cells(rule.antecedent, pos, m)
    cons = _compile_cells(rule.consequent, pos, m)
    cells = [(r, p) for r in range(n_rows) for p in range(n_cols)]
    total = favorable = 0
    for a in itertools.product(cells, repeat=n):
        if ante(a):
            total += 1
            if cons(a):
                favorable += 1
    return StructurednessValue(favorable, total)


# -- signature route ---------------------------------------------------------------

def falling_factorial(n: int, k: int) -> int:
    if k > n:
        return 0
    return math.perm(n, k)


def restricted_partitions(m: int, max_blocks: int) -> Iterable[tuple[int, ...]]:
    """Set partitions of ``m`` items with at most ``max_blocks`` blocks,
    as restricted-growth strings."""
    if m == 0:
        yield ()
        return
    if max_blocks < 1:
        return
    rgs = [0] * m

    def rec(i: int, used: int):
        if i == m:
            yield tuple(rgs)
            return
        for b in range(min(used + 1, max_blocks)):
            rgs[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(1, 1)


class _Context:
    """Per-view lookup shared by the tau-level and partition-level evaluators."""

    def __init__(self, view: StructureView, formula_constants: Iterable[str] = ()):
        self.view = view
        self.bits = [s.bits for s in view.signatures]
        self.size = [s.count for s in view.signatures]
        self.col = {p: j for j, p in enumerate(view.properties)}
        self.const_sig: dict[str, int | None] = {}
        consts = set(formula_constants)
        if consts and view.members is None:
            # the sample subject is the only name a cached view can vouch for
            for u in consts:
                hits = [i for i, s in enumerate(view.signatures) if s.sample == u and s.count == 1]
                if not hits:
                    raise ValueError(
                        f"rule names subject <{u}> but the view has no subject index; "
                        "build the view from triples"
                    )
                self.const_sig[u] = hits[0]
        else:
            for u in consts:
                self.const_sig[u] = view.members.get(u) if view.members else None


def _tv(f: Formula, tau: Mapping[str, Cell], ctx: _Context):
    """Three-valued truth of ``f`` knowing only each variable's (signature, column).

    ``None`` means the value depends on which subjects the variables share.
    """
    if isinstance(f, ValConst):
        s, p = tau[f.var]
        return ctx.bits[s][p] == f.value
    if isinstance(f, PropConst):
        return ctx.col.get(f.iri) == tau[f.var][1]
    if isinstance(f, PropEq):
        return tau[f.left][1] == tau[f.right][1]
    if isinstance(f, ValEq):
        (s1, p1), (s2, p2) = tau[f.left], tau[f.right]
        return ctx.bits[s1][p1] == ctx.bits[s2][p2]
    if isinstance(f, SubjEq):
        if f.left == f.right:
            return True
        s1, s2 = tau[f.left][0], tau[f.right][0]
        if s1 != s2:
            return False
        return True if ctx.size[s1] == 1 else None
    if isinstance(f, CellEq):
        if f.left == f.right:
            return True
        (s1, p1), (s2, p2) = tau[f.left], tau[f.right]
        if s1 != s2 or p1 != p2:
            return False
        return True if ctx.size[s1] == 1 else None
    if isinstance(f, SubjConst):
        s = tau[f.var][0]
        if ctx.const_sig.get(f.iri) != s:
            return False
        return True if ctx.size[s] == 1 else None
    if isinstance(f, Not):
        v = _tv(f.arg, tau, ctx)
        return None if v is None else not v
    if isinstance(f, And):
        a = _tv(f.left, tau, ctx)
        if a is False:
            return False
        b = _tv(f.right, tau, ctx)
        if b is False:
            return False
        return True if (a and b) else None
    if isinstance(f, Or):
        a = _tv(f.left, tau, ctx)
        if a is True:
            return True
        b = _tv(f.right, tau, ctx)
        if b is True:
            return True
        return False if (a is False and b is False) else None
    raise TypeError(f"not a formula: {f!r}")


def _ev(f: Formula, tau: Mapping[str, Cell], who: Mapping[str, object], ctx: _Context) -> bool:
    """Two-valued truth once every variable has a subject identity ``who[v]``."""
    if isinstance(f, SubjEq):
        return who[f.left] == who[f.right]
    if isinstance(f, CellEq):
        return who[f.left] == who[f.right] and tau[f.left][1] == tau[f.right][1]
    if isinstance(f, SubjConst):
        return who[f.var] == ("const", f.iri)
    if isinstance(f, Not):
        return not _ev(f.arg, tau, who, ctx)
    if isinstance(f, And):
        return _ev(f.left, tau, who, ctx) and _ev(f.right, tau, who, ctx)
    if isinstance(f, Or):
        return _ev(f.left, tau, who, ctx) or _ev(f.right, tau, who, ctx)
    return bool(_tv(f, tau, ctx))


def _count(f: Formula, tau: Mapping[str, Cell], ctx: _Context) -> int:
    """count(f, tau): concrete assignments agreeing with ``tau`` that satisfy ``f``."""
    vs = list(tau)
    quick = _tv(f, tau, ctx)
    if quick is False:
        return 0
    if quick is True:
        return math.prod(ctx.size[tau[v][0]] for v in vs)

    groups: dict[int, list[str]] = {}
    for v in vs:
        groups.setdefault(tau[v][0], []).append(v)
    consts = {u for u in subject_constants(f)}
    const_by_sig: dict[int, list[str]] = {}
    for u in sorted(consts):
        s = ctx.const_sig.get(u)
        if s is not None:
            const_by_sig.setdefault(s, []).append(u)

    # per signature: list of (identity per variable, weight)
    options = []
    for s, members in groups.items():
        size = ctx.size[s]
        named = const_by_sig.get(s, [])
        free = size - len(named)
        opts = []
        for rgs in restricted_partitions(len(members), size):
            n_blocks = max(rgs) + 1
            # each block is one of the named subjects or an anonymous one
            for labels in itertools.product([None] + named, repeat=n_blocks):
                picked = [l for l in labels if l is not None]
                if len(picked) != len(set(picked)):
                    continue
                anon = n_blocks - len(picked)
                w = falling_factorial(free, anon)
                if w == 0:
                    continue
                ident = {}
                for v, b in zip(members, rgs):
                    ident[v] = ("const", labels[b]) if labels[b] is not None else ("anon", s, b)
                opts.append((ident, w))
        options.append(opts)

    total = 0
    for combo in itertools.product(*options):
        who: dict[str, object] = {}
        weight = 1
        for ident, w in combo:
            who.update(ident)
            weight *= w
        if _ev(f, tau, who, ctx):
            total += weight
    return total


def count_for_tau(view: StructureView, f: Formula, tau: Mapping[str, Cell] | Sequence[Cell],
                  order: Sequence[str] | None = None) -> int:
    """Number of cell assignments agreeing with rough assignment ``tau`` that satisfy ``f``.

    ``tau`` maps each variable to (signature index, column index); a sequence
    is read in ``order`` (default: variables of ``f`` by first occurrence).
    The variables of ``tau`` are the ones counted, so ``tau`` may bind more
    variables than ``f`` mentions.
    """
    if not isinstance(tau, Mapping):
        order = tuple(order) if order is not None else variables(f)
        tau = dict(zip(order, tau))
    missing = [v for v in variables(f) if v not in tau]
    if missing:
        raise UnboundVariable(missing[0])
    for s, p in tau.values():
        if not (0 <= s < len(view) and 0 <= p < view.n_props):
            raise IndexError(f"rough assignment cell {(s, p)} out of range")
    ctx = _Context(view, subject_constants(f))
    return _count(f, tau, ctx)


@dataclass(frozen=True)
class TableEntry:
    tau: Tau
    ante: int
    both: int

    @property
    def sigs(self) -> frozenset[int]:
        return frozenset(s for s, _ in self.tau)

    @property
    def cols(self) -> frozenset[int]:
        return frozenset(p for _, p in self.tau)


@dataclass(frozen=True)
class CountTable:
    """Nonzero rough-assignment counts of a rule over one view, in canonical tau order."""

    variables: tuple[str, ...]
    entries: tuple[TableEntry, ...]
    rule_name: str = ""
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._index.update({e.tau: i for i, e in enumerate(self.entries)})

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, tau: Tau) -> TableEntry:
        return self.entries[self._index[tau]]

    def __contains__(self, tau) -> bool:
        return tau in self._index

    @property
    def arity(self) -> int:
        return len(self.variables)

    def totals(self) -> StructurednessValue:
        return StructurednessValue(sum(e.both for e in self.entries), sum(e.ante for e in self.entries))

    def dump_tsv(self) -> str:
        out = ["tau\tcount_antecedent\tcount_both"]
        for e in self.entries:
            t = "".join(f"({s}:{p})" for s, p in e.tau)
            out.append(f"{t}\t{e.ante}\t{e.both}")
        return "\n".join(out) + "\n"


class TableTooLarge(RuntimeError):
    pass


def _search_order(rule: Rule, n_sigs: int, n_cols: int) -> list[str]:
    """Greedy variable order for the rough-assignment search.

    Prefers variables whose signature or column is pinned by a top-level
    conjunct over already placed variables.
    """
    vs = list(rule.variables)
    parts = conjuncts(rule.antecedent)
    chosen: list[str] = []
    while len(chosen) < len(vs):
        best = None
        for v in vs:
            if v in chosen:
                continue
            placed = set(chosen) | {v}
            sig_pin = col_pin = False
            factor = 1.0
            for c in parts:
                cv = set(variables(c))
                if v not in cv or not cv <= placed:
                    continue
                if isinstance(c, (PropConst,)):
                    col_pin = True
                elif isinstance(c, SubjConst):
                    sig_pin = True
                elif isinstance(c, PropEq) and c.left != c.right:
                    col_pin = True
                elif isinstance(c, SubjEq) and c.left != c.right:
                    sig_pin = True
                elif isinstance(c, CellEq) and c.left != c.right:
                    sig_pin = col_pin = True
                elif isinstance(c, ValConst):
                    factor *= 0.5
                else:
                    factor *= 0.9
            est = (1 if sig_pin else n_sigs) * (1 if col_pin else n_cols) * factor
            if best is None or est < best[0]:
                best = (est, v)
        chosen.append(best[1])
    return chosen


def build_count_table(view: StructureView, rule: Rule, max_entries: int = 5_000_000) -> CountTable:
    """All rough assignments with a nonzero antecedent count.

    Rough assignments are explored by backtracking: a partial assignment is
    abandoned once some top-level conjunct of the antecedent is already false
    from signature and column information alone. Signatures and columns
    pinned by equalities to placed variables are not enumerated.
    """
    ctx = _Context(view, subject_constants(rule.antecedent) | subject_constants(rule.consequent))
    canon = rule.variables
    order = _search_order(rule, len(view), view.n_props)
    level = {v: i for i, v in enumerate(order)}
    parts = conjuncts(rule.antecedent)
    checks: list[list[Formula]] = [[] for _ in order]
    for c in parts:
        checks[max(level[v] for v in variables(c))].append(c)

    # equalities used to narrow candidates: (kind, other var or iri)
    pins: list[list[tuple[str, object]]] = [[] for _ in order]
    for c in parts:
        if isinstance(c, PropConst):
            pins[level[c.var]].append(("col", ctx.col.get(c.iri, -1)))
        elif isinstance(c, SubjConst):
            s = ctx.const_sig.get(c.iri)
            pins[level[c.var]].append(("sig", -1 if s is None else s))
        elif isinstance(c, (PropEq, SubjEq, CellEq)) and c.left != c.right:
            a, b = sorted((c.left, c.right), key=level.get)
            kinds = {PropEq: ("colof",), SubjEq: ("sigof",), CellEq: ("colof", "sigof")}[type(c)]
            for k in kinds:
                pins[level[b]].append((k, a))

    all_sigs = range(len(view))
    all_cols = range(view.n_props)
    both_f = And(rule.antecedent, rule.consequent)
    found: dict[Tau, tuple[int, int]] = {}
    tau: dict[str, Cell] = {}

    def candidates(i: int):
        sigs: set[int] | range = all_sigs
        cols: set[int] | range = all_cols
        for kind, arg in pins[i]:
            if kind == "col":
                cols = set(cols) & {arg}
            elif kind == "sig":
                sigs = set(sigs) & {arg}
            elif kind == "colof":
                cols = set(cols) & {tau[arg][1]}
            else:
                sigs = set(sigs) & {tau[arg][0]}
        for s in sorted(sigs):
            for p in sorted(cols):
                yield s, p

    def rec(i: int):
        if i == len(order):
            ante = _count(rule.antecedent, tau, ctx)
            if ante:
                both = _count(both_f, tau, ctx)
                found[tuple(tau[v] for v in canon)] = (ante, both)
                if len(found) > max_entries:
                    raise TableTooLarge(f"more than {max_entries} nonzero rough assignments")
            return
        v = order[i]
        for cell in candidates(i):
            tau[v] = cell
            if all(_tv(c, tau, ctx) is not False for c in checks[i]):
                rec(i + 1)
        tau.pop(v, None)

    rec(0)
    entries = tuple(TableEntry(t, a, b) for t, (a, b) in sorted(found.items()))
    return CountTable(tuple(canon), entries, rule.name)


def sigma_fast(view: StructureView, rule: Rule, table: CountTable | None = None) -> StructurednessValue:
    if table is None:
        table = build_count_table(view, rule)
    return table.totals()


def sigma_subset(table: CountTable, view: StructureView, chosen: Iterable[int]) -> StructurednessValue:
    """Structuredness of the sort made of the chosen signatures.

    A rough assignment counts only when all its signatures are chosen and all
    its columns are used by some chosen signature.
    """
    sigs = frozenset(chosen)
    if not sigs:
        raise ValueError("empty signature selection")
    cols = view.used_columns(sigs)
    fav = tot = 0
    for e in table.entries:
        if all(s in sigs and p in cols for s, p in e.tau):
            fav += e.both
            tot += e.ante
    return StructurednessValue(fav, tot)
