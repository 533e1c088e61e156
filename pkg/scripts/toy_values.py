"""Print Cov and Sim for the three toy datasets over a range of sizes."""

import sys

from sortrefine.evaluate import round_half_up, sigma_fast
from sortrefine.ingest import Dataset, Triple
from sortrefine.rules import cov_rule, sim_rule
from sortrefine.view import build_view

NS = "http://x/"


def view(rows):
    return build_view(Dataset.from_triples(
        Triple(NS + s, NS + p, '"1"') for s, props in rows.items() for p in props))


def toy(kind: str, n: int):
    if kind == "D1":
        return view({f"s{i}": ["p"] for i in range(n)})
    if kind == "D2":
        rows = {f"s{i}": ["p"] for i in range(n)}
        rows["s0"] = ["p", "q"]
        return view(rows)
    return view({f"s{i}": [f"p{i}"] for i in range(n)})


def main(sizes):
    print("dataset\tN\tcov\tsim")
    for kind in ("D1", "D2", "D3"):
        for n in sizes:
            v = toy(kind, n)
            cov, sim = sigma_fast(v, cov_rule()).value, sigma_fast(v, sim_rule()).value
            print(f"{kind}\t{n}\t{cov} ({round_half_up(cov)})\t{sim} ({round_half_up(sim)})")


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [2, 3, 10, 100])
