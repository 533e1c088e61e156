"""Show that the 3-colouring gadget admits a perfect two-sort split for K4.

K4 is not 3-colourable, yet splitting the rows on the idp column leaves
every sort with no assignment satisfying the r0 antecedent, so both sorts
score 1 and (k=3, theta=1) is feasible.
"""

from sortrefine.evaluate import build_count_table, sigma_subset
from sortrefine.refine import UndirectedGraph, build_coloring_gadget, decide_3colorable_via_refinement, is_3colorable
from sortrefine.rules import GADGET_NS, gadget_rule_r0
from sortrefine.view import build_view


def main():
    k4 = UndirectedGraph.of(4, [(a, b) for a in range(1, 5) for b in range(a + 1, 5)])
    v = build_view(build_coloring_gadget(k4))
    table = build_count_table(v, gadget_rule_r0())
    idp = v.column(GADGET_NS + "idp")
    print(f"K4 3-colourable: {is_3colorable(k4)}")
    print(f"whole gadget: {table.totals()}")
    for want in (1, 0):
        part = [m for m, s in enumerate(v.signatures) if s.bits[idp] == want]
        val = sigma_subset(table, v, part)
        print(f"idp={want}: {len(part)} rows, favourable={val.favorable} total={val.total} value={val.value}")
    print(f"refinement decision (k=3, theta=1): {decide_3colorable_via_refinement(k4).value}")


if __name__ == "__main__":
    main()
