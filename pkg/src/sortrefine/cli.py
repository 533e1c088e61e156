"""Command-line front end.

Exit codes: 0 success or feasible, 1 infeasible, 2 unknown (time limit),
64 usage error, 65 malformed input data, 66 unreadable input file.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .evaluate import StructurednessValue, TableTooLarge, build_count_table, round_half_up, sigma_fast
from .ilp import DEFAULT_EXPONENT_CAP, ModelTooLarge, add_symmetry_breaking, build_model, export_lp
from .ingest import NTriplesSyntaxError, filter_by_sort, parse_ntriples
from .refine import (
    GraphFormatError, SearchReport, decide, parse_graph, search_highest_theta, search_lowest_k, write_gadget,
)
from .render import render
from .rules import Rule, RuleError, RuleSyntaxError, builtin_from_spec, dep_rule, read_rule_file, symdep_rule
from .solver import Outcome
from .view import CACHE_MAGIC, CacheFormatError, EmptyViewError, StructureView, build_view, load_view, save_view

EXIT_OK, EXIT_INFEASIBLE, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT = 64, 65, 66

log = logging.getLogger("sortrefine")


class UsageError(Exception):
    pass


_DECIMAL = re.compile(r"^\d+(\.\d{1,6})?$|^\.\d{1,6}$")
_FRACTION = re.compile(r"^\d+/\d+$")


def parse_theta(text: str) -> Fraction:
    """Exact threshold from ``a/b`` or a decimal with at most 6 places."""
    s = text.strip()
    if _FRACTION.match(s):
        num, den = s.split("/")
        if int(den) == 0:
            raise UsageError(f"theta {text!r}: zero denominator")
        value = Fraction(int(num), int(den))
    elif _DECIMAL.match(s):
        value = Fraction(s)
    else:
        raise UsageError(f"theta {text!r}: expected a fraction like 9/10 or a decimal with at most 6 places")
    if not 0 <= value <= 1:
        raise UsageError(f"theta {text!r} outside [0, 1]")
    return value


def format_value(v: StructurednessValue | Fraction) -> str:
    x = v.value if isinstance(v, StructurednessValue) else v
    return f"{x.numerator}/{x.denominator} ({round_half_up(x)})"


@dataclass
class RunConfig:
    input: Path | None = None
    sort: str | None = None
    rules: list[str] = field(default_factory=list)
    rule_files: list[Path] = field(default_factory=list)
    k: int | None = None
    theta: Fraction | None = None
    mode: str = "highest-theta"
    direction: str = "up"
    step: Fraction = Fraction(1, 100)
    time_limit: float | None = None
    out: Path | None = None
    timings: bool = False

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        cfg = cls(
            input=ns.input, sort=ns.sort, rules=list(ns.builtin or []), rule_files=list(ns.rule_file or []),
            k=ns.k, mode=ns.mode, direction=ns.direction, time_limit=ns.time_limit, out=ns.out,
            timings=ns.timings,
        )
        if ns.theta is not None:
            cfg.theta = parse_theta(ns.theta)
        if ns.step is not None:
            cfg.step = parse_theta(ns.step)
            if cfg.step == 0:
                raise UsageError("step must be positive")
        if cfg.k is not None and cfg.k < 1:
            raise UsageError("--k must be at least 1")
        if cfg.time_limit is not None and cfg.time_limit <= 0:
            raise UsageError("--time-limit must be positive")
        return cfg

    def load_rules(self, default: str | None = "cov") -> list[Rule]:
        rules = [builtin_from_spec(s) for s in self.rules]
        rules += [read_rule_file(p) for p in self.rule_files]
        if not rules and default:
            rules = [builtin_from_spec(default)]
        return rules

    def one_rule(self) -> Rule:
        rules = self.load_rules()
        if len(rules) != 1:
            raise UsageError("this command takes exactly one rule")
        return rules[0]

    def need(self, *names: str) -> None:
        for n in names:
            if getattr(self, n) is None:
                raise UsageError(f"--{n.replace('_', '-')} is required here")


def load_input(cfg: RunConfig) -> StructureView:
    cfg.need("input")
    path = Path(cfg.input)
    with open(path, "rb") as fh:
        head = fh.read(len(CACHE_MAGIC))
    if head.startswith(b"SIGV"):
        if cfg.sort:
            raise UsageError("--sort cannot be applied to a signature cache")
        return load_view(path)
    with open(path, "rb") as fh:
        d = parse_ntriples(fh)
    if cfg.sort:
        d = filter_by_sort(d, cfg.sort)
    return build_view(d)


# -- commands ------------------------------------------------------------------

def cmd_profile(cfg: RunConfig, ns, out) -> int:
    view = load_input(cfg)
    rules = cfg.load_rules(default=None) or [builtin_from_spec("cov"), builtin_from_spec("sim")]
    print(f"subjects={view.total_subjects}", file=out)
    print(f"properties={view.n_props}", file=out)
    print(f"signatures={len(view)}", file=out)
    for r in rules:
        print(f"{r.name or 'rule'}={format_value(sigma_fast(view, r))}", file=out)
    return EXIT_OK


def dependency_table(view: StructureView, props: list[str]):
    """Dep values for all ordered pairs and SymDep values ranked high to low."""
    dep = {(a, b): sigma_fast(view, dep_rule(a, b)).value for a in props for b in props}
    sym = []
    for i, a in enumerate(props):
        for b in props[i + 1:]:
            sym.append((sigma_fast(view, symdep_rule(a, b)).value, a, b))
    sym.sort(key=lambda t: (-t[0], t[1], t[2]))
    return dep, sym


def cmd_dep_table(cfg: RunConfig, ns, out) -> int:
    view = load_input(cfg)
    if ns.all_pairs:
        props = list(view.properties)
    elif ns.properties:
        props = [p.strip().removeprefix("<").removesuffix(">") for p in ns.properties]
        for p in props:
            if p not in view.properties:
                raise UsageError(f"unknown property {p!r}")
    else:
        raise UsageError("dep-table needs --properties or --all-pairs")
    dep, sym = dependency_table(view, props)
    print("Dep\t" + "\t".join(props), file=out)
    for a in props:
        print(a + "\t" + "\t".join(format_value(dep[a, b]) for b in props), file=out)
    print("", file=out)
    print("SymDep ranking", file=out)
    for rank, (v, a, b) in enumerate(sym, start=1):
        print(f"{rank}\t{a}\t{b}\t{format_value(v)}", file=out)
    return EXIT_OK


def _membership(view: StructureView, report: SearchReport) -> list[str]:
    lines = []
    if report.best is None:
        return lines
    for i, part in enumerate(report.best.sorts, start=1):
        lines.append(f"sort {i}\tsigma={format_value(part.value)}\tsubjects={part.subjects}")
        for m in part.signatures:
            sig = view.signatures[m]
            lines.append(f"  {sig.bitstring}\t{sig.count}\t{sig.sample}")
    return lines


def run_search(cfg: RunConfig, view: StructureView, rule: Rule) -> SearchReport:
    table = build_count_table(view, rule)
    if cfg.mode == "highest-theta":
        cfg.need("k")
        return search_highest_theta(view, rule, cfg.k, cfg.step, cfg.time_limit, table)
    if cfg.mode == "lowest-k":
        cfg.need("theta")
        return search_lowest_k(view, rule, cfg.theta, cfg.direction, cfg.time_limit, table)
    if cfg.mode == "decide":
        cfg.need("k", "theta")
        return decide(view, rule, cfg.k, cfg.theta, cfg.time_limit, table)
    raise UsageError(f"unknown mode {cfg.mode!r}")


def report_exit(report: SearchReport) -> int:
    if any(p.outcome is Outcome.UNKNOWN for p in report.probes):
        return EXIT_UNKNOWN
    return EXIT_OK if report.best is not None else EXIT_INFEASIBLE


def cmd_refine(cfg: RunConfig, ns, out) -> int:
    view = load_input(cfg)
    rule = cfg.one_rule()
    report = run_search(cfg, view, rule)
    out.write(report.summary())
    for line in _membership(view, report):
        print(line, file=out)
    if cfg.out is not None:
        Path(cfg.out).write_text(report.to_jsonl(cfg.timings), encoding="utf-8")
    return report_exit(report)


def cmd_export_lp(cfg: RunConfig, ns, out) -> int:
    view = load_input(cfg)
    cfg.need("k", "theta")
    rule = cfg.one_rule()
    model = build_model(view, build_count_table(view, rule), cfg.k, cfg.theta)
    if not ns.no_symmetry:
        model = add_symmetry_breaking(model, ns.exponent_cap)
    text = export_lp(model)
    c = model.counts()
    summary = (f"binaries={sum(c.values())} X={c['X']} U={c['U']} T={c['T']} "
               f"constraints={len(model.constraints)}")
    if cfg.out is None:
        out.write(text)
        print(summary, file=sys.stderr)
    else:
        Path(cfg.out).write_text(text, encoding="utf-8")
        print(summary, file=out)
    return EXIT_OK


def cmd_render(cfg: RunConfig, ns, out) -> int:
    view = load_input(cfg)
    cfg.need("out")
    target = Path(cfg.out)
    if not ns.per_sort:
        render(view, target, scale=ns.scale, fmt=ns.format)
        print(f"wrote {target}", file=out)
        return EXIT_OK
    report = run_search(cfg, view, cfg.one_rule())
    if report.best is None:
        print("no refinement to render", file=out)
        return report_exit(report)
    suffix = target.suffix or "." + (ns.format or "pgm")
    for i, part in enumerate(report.best.sorts, start=1):
        path = target.with_name(f"{target.stem}-sort{i}{suffix}")
        render(view, path, part.signatures, scale=ns.scale, fmt=ns.format)
        print(f"wrote {path}", file=out)
    return report_exit(report)


def cmd_gadget(cfg: RunConfig, ns, out) -> int:
    cfg.need("out")
    graph = parse_graph(Path(ns.graph).read_text(encoding="utf-8"))
    rule_path = Path(ns.rule_out) if ns.rule_out else Path(cfg.out).with_suffix(".rule")
    write_gadget(graph, cfg.out, rule_path)
    print(f"nodes={graph.n} edges={len(graph.edges)} subjects={4 * graph.n}", file=out)
    print(f"wrote {cfg.out} and {rule_path}", file=out)
    return EXIT_OK


def cmd_cache(cfg: RunConfig, ns, out) -> int:
    view = load_input(cfg)
    if ns.action == "save":
        cfg.need("out")
        save_view(view, cfg.out)
        print(f"wrote {cfg.out}: {len(view)} signatures over {view.n_props} properties", file=out)
    else:
        print(f"subjects={view.total_subjects}", file=out)
        print(f"properties={view.n_props}", file=out)
        print(f"signatures={len(view)}", file=out)
        for sig in view.signatures:
            print(f"{sig.bitstring}\t{sig.count}\t{sig.sample}", file=out)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", type=Path, help="N-Triples file or signature cache")
    p.add_argument("--sort", help="keep only subjects typed with this IRI")
    p.add_argument("--builtin", action="append", metavar="SPEC",
                   help="cov, sim, or dep|symdep|depdisj:<p1>,<p2> (repeatable)")
    p.add_argument("--rule-file", action="append", type=Path, help="rule text file (repeatable)")
    p.add_argument("--k", type=int)
    p.add_argument("--theta", help="threshold as a/b or a decimal")
    p.add_argument("--mode", choices=("highest-theta", "lowest-k", "decide"), default="highest-theta")
    p.add_argument("--direction", choices=("up", "down"), default="up")
    p.add_argument("--step", help="theta increment for highest-theta (default 1/100)")
    p.add_argument("--time-limit", type=float, help="seconds per solver probe")
    p.add_argument("--out", type=Path)
    p.add_argument("--timings", action="store_true", help="include wall times in JSONL output")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="sortrefine", description="Structuredness profiling and sort refinement for RDF data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("profile", parents=[common], help="print sizes and rule values").set_defaults(fn=cmd_profile)

    p = sub.add_parser("dep-table", parents=[common], help="Dep matrix and SymDep ranking")
    p.add_argument("--properties", nargs="+", metavar="IRI")
    p.add_argument("--all-pairs", action="store_true")
    p.set_defaults(fn=cmd_dep_table)

    sub.add_parser("refine", parents=[common], help="search for a sort refinement").set_defaults(fn=cmd_refine)

    p = sub.add_parser("export-lp", parents=[common], help="write the 0-1 program in LP format")
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--exponent-cap", type=int, default=DEFAULT_EXPONENT_CAP)
    p.set_defaults(fn=cmd_export_lp)

    p = sub.add_parser("render", parents=[common], help="draw the signature-grouped matrix")
    p.add_argument("--format", choices=("pgm", "svg"))
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--per-sort", action="store_true", help="one image per sort of a refinement")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("gadget", parents=[common], help="3-colouring gadget from an edge list")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--rule-out", type=Path)
    p.set_defaults(fn=cmd_gadget)

    p = sub.add_parser("cache", parents=[common], help="save or inspect a signature cache")
    p.add_argument("action", choices=("save", "load"))
    p.set_defaults(fn=cmd_cache)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = RunConfig.from_args(ns)
        return ns.fn(cfg, ns, out)
    except UsageError as e:
        print(f"sortrefine: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RuleSyntaxError, RuleError) as e:
        print(f"sortrefine: bad rule: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"sortrefine: {e}", file=sys.stderr)
        return EXIT_NOINPUT
    except (NTriplesSyntaxError, CacheFormatError, EmptyViewError, GraphFormatError, UnicodeDecodeError) as e:
        print(f"sortrefine: bad input: {e}", file=sys.stderr)
        return EXIT_DATA
    except (TableTooLarge, ModelTooLarge) as e:
        print(f"sortrefine: {e}", file=sys.stderr)
        return EXIT_DATA


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
