"""Threshold/sort-count search drivers and the 3-colouring gadget."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .evaluate import CountTable, build_count_table, round_half_up
from .ingest import Dataset, Triple
from .rules import GADGET_NS, Rule, gadget_rule_r0
from .solver import Outcome, SolveResult, SortRefinement, solve_native
from .view import StructureView, build_view


@dataclass(frozen=True)
class Probe:
    k: int
    theta: Fraction
    outcome: Outcome
    seconds: float = field(default=0.0, compare=False)


@dataclass
class SearchReport:
    mode: str  # "highest-theta" | "lowest-k" | "decide"
    probes: list[Probe] = field(default_factory=list)
    best: SortRefinement | None = None
    best_k: int | None = None
    best_theta: Fraction | None = None

    @property
    def stopped_on_unknown(self) -> bool:
        return bool(self.probes) and self.probes[-1].outcome is Outcome.UNKNOWN

    def to_jsonl(self, timings: bool = False) -> str:
        out = []
        for p in self.probes:
            rec = {"mode": self.mode, "k": p.k, "theta": _frac(p.theta), "outcome": p.outcome.value}
            if timings:
                rec["seconds"] = round(p.seconds, 6)
            out.append(json.dumps(rec))
        return "".join(line + "\n" for line in out)

    def summary(self) -> str:
        lines = [f"mode: {self.mode}", f"probes: {len(self.probes)}"]
        if self.best is None:
            lines.append("best: none")
        else:
            lines.append(f"best: k={self.best_k} theta={_frac(self.best_theta)} sorts={self.best.k_used}")
            for i, part in enumerate(self.best.sorts, start=1):
                lines.append(
                    f"  sort {i}: {len(part.signatures)} signatures, {part.subjects} subjects, "
                    f"sigma={part.value} ({round_half_up(part.value.value)})"
                )
        return "\n".join(lines) + "\n"


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _probe(report: SearchReport, view, table, k, theta, time_limit, symmetry) -> SolveResult:
    res = solve_native(view, table, k, theta, time_limit=time_limit, symmetry=symmetry)
    report.probes.append(Probe(k, theta, res.outcome, res.seconds))
    if res.feasible:
        report.best, report.best_k, report.best_theta = res.refinement, k, theta
    return res


def search_highest_theta(view: StructureView, rule: Rule, k: int, step: Fraction = Fraction(1, 100),
                         time_limit: float | None = None, table: CountTable | None = None,
                         symmetry: bool = True) -> SearchReport:
    """Raise theta from the whole-view value in fixed steps until a probe fails.

    The sweep is sequential, clamps at 1, and keeps the last feasible result.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    step = Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    table = table if table is not None else build_count_table(view, rule)
    theta = table.totals().value
    report = SearchReport("highest-theta")
    while True:
        res = _probe(report, view, table, k, theta, time_limit, symmetry)
        if not res.feasible or theta >= 1:
            return report
        theta = min(theta + step, Fraction(1))


def search_lowest_k(view: StructureView, rule: Rule, theta: Fraction, direction: str = "up",
                    time_limit: float | None = None, table: CountTable | None = None,
                    symmetry: bool = True) -> SearchReport:
    """Smallest number of sorts reaching ``theta``, scanning k up from 1 or down from |signatures|."""
    theta = Fraction(theta)
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    table = table if table is not None else build_count_table(view, rule)
    report = SearchReport("lowest-k")
    L = len(view)
    if direction == "up":
        for k in range(1, L + 1):
            res = _probe(report, view, table, k, theta, time_limit, symmetry)
            if res.outcome is not Outcome.INFEASIBLE:
                break
    elif direction == "down":
        for k in range(L, 0, -1):
            res = _probe(report, view, table, k, theta, time_limit, symmetry)
            if not res.feasible:
                break
    else:
        raise ValueError(f"direction must be 'up' or 'down', not {direction!r}")
    return report


def decide(view: StructureView, rule: Rule, k: int, theta: Fraction, time_limit: float | None = None,
           table: CountTable | None = None, symmetry: bool = True) -> SearchReport:
    table = table if table is not None else build_count_table(view, rule)
    report = SearchReport("decide")
    _probe(report, view, table, k, Fraction(theta), time_limit, symmetry)
    return report


# -- 3-colouring gadget ------------------------------------------------------------

@dataclass(frozen=True)
class UndirectedGraph:
    n: int
    edges: frozenset[frozenset[int]]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"self-loop on node {next(iter(e))}")
            for v in e:
                if not 1 <= v <= self.n:
                    raise ValueError(f"node {v} outside 1..{self.n}")

    @classmethod
    def of(cls, n: int, edges) -> "UndirectedGraph":
        out = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            out.add(frozenset((u, v)))
        return cls(n, frozenset(out))

    def adjacent(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges


class GraphFormatError(ValueError):
    pass


def parse_graph(text: str) -> UndirectedGraph:
    """Edge-list format: first data line ``n``, then one ``u v`` pair per line."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise GraphFormatError(f"line {lineno}: expected integers, got {line!r}") from None
        if n is None:
            if len(nums) != 1 or nums[0] < 1:
                raise GraphFormatError(f"line {lineno}: header must be a positive node count")
            n = nums[0]
            continue
        if len(nums) != 2:
            raise GraphFormatError(f"line {lineno}: edge needs exactly two nodes")
        u, v = nums
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop on node {u}")
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphFormatError(f"line {lineno}: node out of range 1..{n}")
        edges.append((u, v))
    if n is None:
        raise GraphFormatError("missing node-count header")
    return UndirectedGraph.of(n, edges)


def gadget_matrix(g: UndirectedGraph) -> list[list[int]]:
    """The (4n) x (2n+3) block matrix: sp1, sp2, idp, left set, right set."""
    n = g.n
    rows = []
    for sp1, sp2, idp in ((0, 0, 1), (0, 1, 1), (1, 0, 1)):
        for i in range(1, n + 1):
            unit = [int(j == i) for j in range(1, n + 1)]
            rows.append([sp1, sp2, idp] + unit + unit)
    for i in range(1, n + 1):
        unit = [int(j == i) for j in range(1, n + 1)]
        comp = [0 if g.adjacent(i, j) else 1 for j in range(1, n + 1)]
        rows.append([1, 1, 0] + unit + comp)
    return rows


def gadget_columns(n: int, namespace: str = GADGET_NS) -> list[str]:
    names = ["sp1", "sp2", "idp"] + [f"L{j}" for j in range(1, n + 1)] + [f"R{j}" for j in range(1, n + 1)]
    return [namespace + c for c in names]


def build_coloring_gadget(g: UndirectedGraph, namespace: str = GADGET_NS) -> Dataset:
    cols = gadget_columns(g.n, namespace)
    triples = []
    for r, row in enumerate(gadget_matrix(g), start=1):
        for c, bit in zip(cols, row):
            if bit:
                triples.append(Triple(f"{namespace}r{r}", c, '"1"'))
    return Dataset.from_triples(triples)


def decide_3colorable_via_refinement(g: UndirectedGraph, time_limit: float | None = None) -> Outcome:
    """Solve the gadget instance at k=3, theta=1 with the fixed gadget rule."""
    view = build_view(build_coloring_gadget(g))
    table = build_count_table(view, gadget_rule_r0())
    return solve_native(view, table, 3, Fraction(1), time_limit=time_limit).outcome


def is_3colorable(g: UndirectedGraph) -> bool:
    for colors in itertools.product(range(3), repeat=g.n):
        if all(colors[min(e) - 1] != colors[max(e) - 1] for e in g.edges):
            return True
    return False


def write_gadget(g: UndirectedGraph, nt_path: str | Path, rule_path: str | Path | None = None) -> None:
    from .ingest import to_ntriples
    from .rules import print_rule

    Path(nt_path).write_text(to_ntriples(build_coloring_gadget(g)), encoding="utf-8")
    if rule_path is not None:
        Path(rule_path).write_text("# 3-colouring gadget rule\n" + print_rule(gadget_rule_r0()) + "\n", encoding="utf-8")
