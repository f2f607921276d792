"""
The degree-31 map
=================

g = alpha H phi + beta F eta.  For one ratio beta/alpha the 60 critical points
of g fall into twelve superattracting five-cycles; calibrate() finds it.
"""

from icosolve.binform import PrecisionContext, chordal_distance
from icosolve.map31 import PAPER_PARAMETERS, build_g, calibrate, critical_set, tetra_label

ctx = PrecisionContext(60)

params = calibrate(PAPER_PARAMETERS, ctx)
print("beta =", complex(params.beta))
print(f"relative change from the seed: {float(params.distance(PAPER_PARAMETERS)):.1e}")

g = build_g(params, ctx)
cs = tetra_label(critical_set(g, ctx), ctx)
print(len(cs), "critical points in", len(cs.cycles), "cycles")

# follow one cycle and print the tetrahedral labels it visits
cyc = cs.cycles[0]
print("labels along a cycle:", [cs.labels[i] for i in cyc])

with ctx.workprec():
    p = cs.points[cyc[0]]
    for _ in range(5):
        p = g(p)
    print(f"g^5 returns to the start within {float(chordal_distance(p, cs.points[cyc[0]])):.1e}")
