"""What the published example's parameter set does and does not support.

Run: python demos/reference_set.py
"""

from hopfdde import REFERENCE_PARAMS, char_coeffs, find_equilibrium, find_hopf_points
from hopfdde.reference import REFERENCE_EQUILIBRIUM, REFERENCE_HOPF_PAIR
from hopfdde.stability import char_delta, g1, split_residuals, zero_delay_stable

p = REFERENCE_PARAMS
eq = find_equilibrium(p)
print("equilibrium")
for key, published in REFERENCE_EQUILIBRIUM.items():
    print(f"  {key}: computed {getattr(eq, key):.10g}   published {published}")

k = char_coeffs(p, eq)
print(f"\ncharacteristic coefficients b={k.b:.6g} c={k.c:.6g} d={k.d:.6g} h={k.h:.6g}")
print(f"stable without delay: {zero_delay_stable(k)}")

search = find_hopf_points(k)
print(f"\nHopf search: {search.candidates} coarse candidate(s), {len(search.points)} refined")
for w, t, why in search.rejected:
    print(f"  rejected omega={w:.6g} tau={t:.6g}: {why}")

w, t = REFERENCE_HOPF_PAIR
rs, rc = split_residuals(w, t, k)
print(f"\nprinted critical pair omega={w}, tau={t}")
print(f"  |Delta(i omega, tau)| = {abs(char_delta(1j * w, t, k)):.4g}")
print(f"  split residuals: sin {rs:.4g}, cos {rc:.4g}")
print(f"  g1(omega) = {g1(w, k):.10g}; ten times that is {10 * g1(w, k):.10g}")
