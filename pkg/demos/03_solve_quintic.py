"""
Solving the resolvent
=====================

Derive the Z-forms once (about ten seconds), then each solve iterates g_Z to
a five-cycle and reads the roots of v^5 - 40Zv^2 - 5Zv - Z off the cycle.
"""

import sys
import time

from icosolve import PrecisionContext, RunConfig, derive, load, save, solve
from icosolve.param import CacheError

ctx = PrecisionContext(60)
cache = sys.argv[1] if len(sys.argv) > 1 else "cache.json"

try:
    solver = load(cache, ctx)
    print("loaded", cache)
except CacheError:
    t0 = time.perf_counter()
    solver = derive(ctx)
    save(solver, cache)
    print(f"derived in {time.perf_counter() - t0:.1f} s, saved to {cache}")

for z in (1, -2.5j, 0.03 + 0.04j, 70 - 10j):
    rep = solve(z, RunConfig(), solver=solver)
    print(f"\nZ = {z}: {rep.iterations} iterations, retries {rep.retries}")
    for r, res in zip(rep.roots, rep.residuals):
        print(f"   {complex(r):.12g}   |R| = {float(res):.1e}")
    print(f"   distance to the direct roots: {float(rep.matchDistance):.1e}")
