"""
Icosahedral invariants
======================

The forms F, H, T of degrees 12, 20, 30, the single relation between them,
and the group of 60 rotations that fixes them.
"""

from icosolve.binform import PrecisionContext, compose_linear, jacobian_form, evaluate
from icosolve.icosa import canonical_data, exact_forms, special_orbits, tetra_system

F, H, T = exact_forms()
print("F =", F)
print("T^2 - H^3 + 1728 F^5 is zero:", (T * T - H**3 + 1728 * F**5).is_zero())

# the fifth tetrahedral system, also exact
s = tetra_system(5)
print("64 m5^2 - 95 t5^2 m5 + 40 t5^4 - 9 u5^3 is zero:",
      (64 * s.m * s.m - 95 * s.t * s.t * s.m + 40 * s.t**4 - 9 * s.u**3).is_zero())

# numerics from here on
ctx = PrecisionContext(40)
data = canonical_data(ctx)
print("group order:", len(data.group))

with ctx.workprec():
    worst = max((compose_linear(F, A.unimodular()) - F.to_floating()).norm()
                for A in data.group)
print(f"largest change of F under the group: {float(worst):.1e}")

# phi = cross(F) swaps the face-centers in pairs
faces = special_orbits(ctx).faces20
with ctx.workprec():
    J = jacobian_form(data.phi)
    print(f"|J_phi| at face-centers <= {float(max(abs(evaluate(J, f)) for f in faces)):.1e}")
