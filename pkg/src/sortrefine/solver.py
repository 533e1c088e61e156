"""Exact branch-and-bound for the sort refinement decision problem.

Only signature placements are branched on. Column usage and live rough
assignments follow from the placement, so every leaf is a complete 0-1
vector of the integer program in :mod:`sortrefine.ilp`.

Pruning: adding signatures to a sort only adds live rough assignments, and
each one adds ``ante - both >= 0`` to the sort's deficit. The deficit never
shrinks while the total can grow at most to the antecedent mass of the rough
assignments still reachable. If even that reachable total cannot absorb the
current deficit at threshold theta, the branch is dead.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .evaluate import CountTable, StructurednessValue
from .ilp import (
    DEFAULT_EXPONENT_CAP, IlpSolution, add_symmetry_breaking, build_model, sort_hash,
    t_name, u_name, verify_solution, violated, x_name,
)
from .view import StructureView


class Outcome(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SortPart:
    signatures: tuple[int, ...]
    value: StructurednessValue
    subjects: int


@dataclass(frozen=True)
class SortRefinement:
    sorts: tuple[SortPart, ...]
    threshold: Fraction

    @property
    def k_used(self) -> int:
        return len(self.sorts)

    @property
    def min_value(self) -> Fraction:
        return min(p.value.value for p in self.sorts)

    def assignment(self) -> dict[int, int]:
        return {m: i for i, part in enumerate(self.sorts) for m in part.signatures}


@dataclass
class SolveResult:
    outcome: Outcome
    refinement: SortRefinement | None = None
    solution: IlpSolution | None = None
    nodes: int = 0
    seconds: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.outcome is Outcome.FEASIBLE


class _Timeout(Exception):
    pass


@dataclass
class _Entry:
    sigs: frozenset[int]
    cols: frozenset[int]
    ante: int
    both: int


def sort_value(view: StructureView, table: CountTable, members) -> StructurednessValue:
    sigs = frozenset(members)
    cols = view.used_columns(sigs)
    fav = tot = 0
    for e in table.entries:
        if all(s in sigs and p in cols for s, p in e.tau):
            fav += e.both
            tot += e.ante
    return StructurednessValue(fav, tot)


def refinement_from_assignment(view: StructureView, table: CountTable, assign: dict[int, int],
                               theta: Fraction) -> SortRefinement:
    """Group signatures by sort label; sorts listed by their smallest signature."""
    groups: dict[int, list[int]] = {}
    for m in sorted(assign):
        groups.setdefault(assign[m], []).append(m)
    parts = []
    for label in sorted(groups, key=lambda g: groups[g][0]):
        ms = tuple(groups[label])
        parts.append(SortPart(ms, sort_value(view, table, ms), sum(view.signatures[m].count for m in ms)))
    return SortRefinement(tuple(parts), Fraction(theta))


def solution_vector(view: StructureView, table: CountTable, refinement: SortRefinement, k: int,
                    exponent_cap: int = DEFAULT_EXPONENT_CAP) -> IlpSolution:
    """Extend a refinement to X/U/T values; sort slots ordered by ascending hash."""
    parts = sorted(refinement.sorts, key=lambda p: sort_hash(p.signatures, len(view), exponent_cap))
    slots: list[tuple[int, ...]] = [()] * (k - len(parts)) + [p.signatures for p in parts]
    vals: dict[str, int] = {}
    for i, members in enumerate(slots, start=1):
        ms = frozenset(members)
        cols = view.used_columns(ms) if ms else frozenset()
        for m in range(len(view)):
            vals[x_name(i, m)] = int(m in ms)
        for p in range(view.n_props):
            vals[u_name(i, p)] = int(p in cols)
        for t, e in enumerate(table.entries):
            vals[t_name(i, t)] = int(all(s in ms and p in cols for s, p in e.tau))
    return IlpSolution(vals, True)


def solve_native(view: StructureView, table: CountTable, k: int, theta: Fraction,
                 time_limit: float | None = None, symmetry: bool = True,
                 check: bool = True, exponent_cap: int = DEFAULT_EXPONENT_CAP) -> SolveResult:
    """Decide whether the signatures split into at most ``k`` sorts each meeting ``theta``.

    With ``symmetry`` each signature may join an open sort or open the next
    one, so sort labels are never permuted. Without it all ``k`` labels are
    tried. On success the 0-1 vector is checked against the integer program
    (with hash ordering rows) unless ``check`` is off.
    """
    theta = Fraction(theta)
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    if time_limit is not None and time_limit < 0:
        raise ValueError("time_limit must be nonnegative")
    t1, t2 = theta.numerator, theta.denominator
    slack = t2 - t1
    L, P = len(view), view.n_props
    entries = [_Entry(e.sigs, e.cols, e.ante, e.both) for e in table.entries]
    supports = [s.support for s in view.signatures]
    # columns reachable from signatures at positions >= d
    tail_cols: list[frozenset[int]] = [frozenset()] * (L + 1)
    for d in range(L - 1, -1, -1):
        tail_cols[d] = tail_cols[d + 1] | supports[d]

    start = time.monotonic()
    deadline = None if time_limit is None else start + time_limit
    members: list[set[int]] = [set() for _ in range(k)]
    col_count = [[0] * P for _ in range(k)]
    assign: dict[int, int] = {}
    nodes = 0

    def cols_of(i: int) -> set[int]:
        return {p for p in range(P) if col_count[i][p]}

    def hopeless(i: int, depth: int) -> bool:
        """True if sort i can no longer reach theta whatever follows."""
        if not members[i]:
            return False
        ms = members[i]
        cs = cols_of(i)
        reach_c = cs | tail_cols[depth]
        deficit = reach_total = 0
        for e in entries:
            live = True
            reachable = True
            for s in e.sigs:
                if s not in ms:
                    live = False
                    if s < depth:
                        reachable = False
                        break
            if not reachable:
                continue
            for p in e.cols:
                if p not in cs:
                    live = False
                    if p not in reach_c:
                        reachable = False
                        break
            if not reachable:
                continue
            reach_total += e.ante
            if live:
                deficit += e.ante - e.both
        return t2 * deficit > slack * reach_total

    def place(m: int, i: int, sign: int):
        if sign > 0:
            members[i].add(m)
            assign[m] = i
        else:
            members[i].discard(m)
            del assign[m]
        for p in supports[m]:
            col_count[i][p] += sign

    def rec(depth: int, used: int) -> bool:
        nonlocal nodes
        nodes += 1
        if deadline is not None and nodes % 64 == 1 and time.monotonic() >= deadline:
            raise _Timeout
        if any(hopeless(i, depth) for i in range(used)):
            return False
        if depth == L:
            return True
        labels = range(min(used + 1, k)) if symmetry else range(k)
        for i in labels:
            place(depth, i, +1)
            if rec(depth + 1, max(used, i + 1)):
                return True
            place(depth, i, -1)
        return False

    try:
        found = rec(0, 0)
    except _Timeout:
        return SolveResult(Outcome.UNKNOWN, nodes=nodes, seconds=time.monotonic() - start)
    elapsed = time.monotonic() - start
    if not found:
        return SolveResult(Outcome.INFEASIBLE, nodes=nodes, seconds=elapsed)

    ref = refinement_from_assignment(view, table, dict(assign), theta)
    sol = solution_vector(view, table, ref, k, exponent_cap)
    if check:
        model = add_symmetry_breaking(build_model(view, table, k, theta), exponent_cap)
        if not verify_solution(model, sol):
            raise AssertionError(f"native witness violates the ILP: {violated(model, sol)[:5]}")
        if not all(p.value.meets(theta) for p in ref.sorts):
            raise AssertionError("native witness has a sort below threshold")
    return SolveResult(Outcome.FEASIBLE, ref, sol, nodes, elapsed)
