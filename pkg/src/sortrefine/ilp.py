"""0-1 integer program whose feasibility decides the sort refinement problem.

Variables (all binary), for sorts i = 1..k:

* ``X_i_m``  signature m is placed in sort i
* ``U_i_p``  sort i uses column p
* ``T_i_t<j>``  rough assignment j of the count table is live in sort i

Only rough assignments with a nonzero antecedent count get T variables;
the others would contribute zero to both sides of every threshold row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .evaluate import CountTable
from .view import StructureView

DEFAULT_EXPONENT_CAP = 63


class ModelTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class Var:
    name: str
    kind: str  # "X" | "U" | "T"
    sort: int
    index: int


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[int, str], ...]  # (coefficient, variable name)
    sense: str  # "<=" | ">=" | "="
    rhs: int

    def holds(self, values: Mapping[str, int]) -> bool:
        lhs = sum(c * values[v] for c, v in self.terms)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


def _merge(terms: Iterable[tuple[int, str]]) -> tuple[tuple[int, str], ...]:
    acc: dict[str, int] = {}
    for c, v in terms:
        acc[v] = acc.get(v, 0) + c
    return tuple((c, v) for v, c in acc.items() if c != 0)


def x_name(i: int, m: int) -> str:
    return f"X_{i}_{m}"


def u_name(i: int, p: int) -> str:
    return f"U_{i}_{p}"


def t_name(i: int, t: int) -> str:
    return f"T_{i}_t{t}"


@dataclass(frozen=True)
class IlpModel:
    k: int
    theta: Fraction
    n_signatures: int
    n_properties: int
    variables: tuple[Var, ...]
    constraints: tuple[Constraint, ...]
    rule_name: str = ""
    arity: int = 1
    symmetry: bool = False
    exponent_cap: int | None = None

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def counts(self) -> dict[str, int]:
        out = {"X": 0, "U": 0, "T": 0}
        for v in self.variables:
            out[v.kind] += 1
        return out


def build_model(view: StructureView, table: CountTable, k: int, theta: Fraction,
                max_t_vars: int = 2_000_000) -> IlpModel:
    theta = Fraction(theta)
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    if k * len(table) > max_t_vars:
        raise ModelTooLarge(f"{k * len(table)} T variables exceeds cap {max_t_vars}")
    t1, t2 = theta.numerator, theta.denominator
    n = table.arity
    L, P = len(view), view.n_props
    sorts = range(1, k + 1)

    variables: list[Var] = []
    for i in sorts:
        variables += [Var(x_name(i, m), "X", i, m) for m in range(L)]
    for i in sorts:
        variables += [Var(u_name(i, p), "U", i, p) for p in range(P)]
    for i in sorts:
        variables += [Var(t_name(i, t), "T", i, t) for t in range(len(table))]

    cons: list[Constraint] = []
    for m in range(L):
        cons.append(Constraint(f"assign_{m}", tuple((1, x_name(i, m)) for i in sorts), "=", 1))
    holders = [[m for m in range(L) if view.signatures[m].bits[p]] for p in range(P)]
    for i in sorts:
        for p in range(P):
            for m in holders[p]:
                cons.append(Constraint(f"use_{i}_{p}_{m}", ((1, x_name(i, m)), (-1, u_name(i, p))), "<=", 0))
            terms = [(1, u_name(i, p))] + [(-1, x_name(i, m)) for m in holders[p]]
            cons.append(Constraint(f"useub_{i}_{p}", tuple(terms), "<=", 0))
    for i in sorts:
        for t, e in enumerate(table.entries):
            xu = [(1, x_name(i, s)) for s, _ in e.tau] + [(1, u_name(i, p)) for _, p in e.tau]
            cons.append(Constraint(f"live_{i}_{t}", _merge(xu + [(-1, t_name(i, t))]), "<=", 2 * n - 1))
            cons.append(Constraint(f"need_{i}_{t}", _merge([(2 * n, t_name(i, t))] + [(-c, v) for c, v in xu]), "<=", 0))
    for i in sorts:
        terms = [(t2 * e.both - t1 * e.ante, t_name(i, t)) for t, e in enumerate(table.entries)]
        cons.append(Constraint(f"theta_{i}", _merge(terms), ">=", 0))

    return IlpModel(k, theta, L, P, tuple(variables), tuple(cons), table.rule_name, n)


def hash_coefficients(n_signatures: int, exponent_cap: int = DEFAULT_EXPONENT_CAP) -> list[int]:
    if exponent_cap < 1:
        raise ValueError("exponent_cap must be at least 1")
    return [2 ** (j % exponent_cap) for j in range(n_signatures)]


def add_symmetry_breaking(model: IlpModel, exponent_cap: int = DEFAULT_EXPONENT_CAP) -> IlpModel:
    """Order the sorts by a weighted sum of their signature indicators.

    Exponents wrap modulo ``exponent_cap``; colliding weights only admit more
    equivalent solutions, never exclude all of them.
    """
    coef = hash_coefficients(model.n_signatures, exponent_cap)
    extra = []
    for i in range(1, model.k):
        terms = [(c, x_name(i, m)) for m, c in enumerate(coef)]
        terms += [(-c, x_name(i + 1, m)) for m, c in enumerate(coef)]
        extra.append(Constraint(f"hash_{i}", tuple(terms), "<=", 0))
    return IlpModel(
        model.k, model.theta, model.n_signatures, model.n_properties, model.variables,
        model.constraints + tuple(extra), model.rule_name, model.arity, True, exponent_cap,
    )


def sort_hash(members: Iterable[int], n_signatures: int, exponent_cap: int = DEFAULT_EXPONENT_CAP) -> int:
    coef = hash_coefficients(n_signatures, exponent_cap)
    return sum(coef[m] for m in members)


# -- LP text -------------------------------------------------------------------

def _expr(terms: tuple[tuple[int, str], ...]) -> list[str]:
    out = []
    for n, (c, v) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = v if mag == 1 else f"{mag} {v}"
        out.append(f"- {body}" if n == 0 and sign == "-" else (body if n == 0 else f"{sign} {body}"))
    return out


def export_lp(model: IlpModel) -> str:
    """CPLEX LP text with a zero objective. Byte-stable for a given model."""
    theta = model.theta
    lines = [
        f"\\ sort refinement feasibility: rule={model.rule_name or '?'} k={model.k} "
        f"theta={theta.numerator}/{theta.denominator}",
        f"\\ signatures={model.n_signatures} properties={model.n_properties} arity={model.arity}",
        "Minimize",
        " obj: 0 " + model.variables[0].name,
        "Subject To",
    ]
    for c in model.constraints:
        parts = _expr(c.terms) or ["0 " + model.variables[0].name]
        sense = "=" if c.sense == "=" else c.sense
        chunks = [parts[j:j + 8] for j in range(0, len(parts), 8)]
        head = f" {c.name}: " + " ".join(chunks[0])
        body = [head] + ["   " + " ".join(ch) for ch in chunks[1:]]
        body[-1] += f" {sense} {c.rhs}"
        lines += body
    lines.append("Binary")
    names = model.var_names
    for j in range(0, len(names), 10):
        lines.append(" " + " ".join(names[j:j + 10]))
    lines.append("End")
    return "\n".join(lines) + "\n"


# -- solutions -----------------------------------------------------------------

@dataclass(frozen=True)
class IlpSolution:
    values: dict[str, int] = field(default_factory=dict)
    feasible: bool = True


def verify_solution(model: IlpModel, sol: IlpSolution) -> bool:
    """Check every bound and constraint of ``model`` with exact integer arithmetic."""
    vals = sol.values
    for name in model.var_names:
        if vals.get(name) not in (0, 1):
            return False
    return all(c.holds(vals) for c in model.constraints)


def violated(model: IlpModel, sol: IlpSolution) -> list[str]:
    vals = {n: sol.values.get(n, 0) for n in model.var_names}
    return [c.name for c in model.constraints if not c.holds(vals)]
