"""Profile a large N-Triples dump for one sort: Cov, Sim, Dep table and SymDep ranking.

usage: full_scale_profile.py DUMP SORT_IRI [PROPERTY ...]

Properties may be given by local name (e.g. birthDate); when omitted the
Dep table covers every property.
"""

import sys
import time

from sortrefine.evaluate import round_half_up, sigma_fast
from sortrefine.ingest import filter_by_sort, parse_ntriples
from sortrefine.rules import cov_rule, dep_rule, sim_rule, symdep_rule
from sortrefine.view import build_view


def local(iri: str) -> str:
    return iri.rstrip("/").rsplit("/", 1)[-1].rsplit("#", 1)[-1]


def main(argv):
    if len(argv) < 2:
        print(__doc__, file=sys.stderr)
        return 64
    start = time.monotonic()
    with open(argv[0], "rb") as fh:
        view = build_view(filter_by_sort(parse_ntriples(fh), argv[1]))
    print(f"loaded {view.total_subjects} subjects, {len(view.properties)} properties, "
          f"{len(view)} signatures in {time.monotonic() - start:.1f}s")
    for rule in (cov_rule(), sim_rule()):
        print(f"{rule.name}\t{round_half_up(sigma_fast(view, rule).value)}")
    by_local = {local(p): p for p in view.properties}
    props = [by_local[n] for n in argv[2:]] if len(argv) > 2 else list(view.properties)
    print("dep\t" + "\t".join(local(p) for p in props))
    for a in props:
        print(local(a) + "\t" + "\t".join(round_half_up(sigma_fast(view, dep_rule(a, b)).value) for b in props))
    pairs = [(a, b) for i, a in enumerate(props) for b in props[i + 1:]]
    ranked = sorted(((sigma_fast(view, symdep_rule(a, b)).value, a, b) for a, b in pairs), reverse=True)
    for val, a, b in ranked:
        print(f"symdep\t{local(a)}\t{local(b)}\t{round_half_up(val)}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
