"""
Basins of the twelve cycles
===========================

Colour a chart of the sphere by which critical five-cycle each point's orbit
reaches; darker means slower.  Writes basins.ppm (or .png with Pillow).
"""

import sys

from icosolve.basins import render_basins, save_image
from icosolve.binform import PrecisionContext
from icosolve.map31 import reference_map

out = sys.argv[1] if len(sys.argv) > 1 else "basins.ppm"
ctx = PrecisionContext(60)
params, g, cs = reference_map(ctx)

cycles = [[cs.points[i] for i in c] for c in cs.cycles]
img = render_basins(g, cycles, viewport=(-1.5, -1.5, 1.5, 1.5), resolution=(512, 512))
save_image(out, img.rgb)

print(f"{img.captured_fraction:.2%} of pixels reach a cycle")
print("median iterations:", int(sorted(img.iterations.ravel())[img.iterations.size // 2]))
print("wrote", out)
