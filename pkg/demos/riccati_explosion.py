"""Where the CIR moment generating function stops existing.

``E exp(l1 V_t + l2 I_t)`` is ``exp(a phi + v psi)`` with ``psi`` solving a
Riccati equation.  Depending on the weights the solution is a coth, tanh,
rational or tangent curve, and in two of those regimes it blows up at a
finite horizon ``t*``.  The closed forms are compared with an adaptive
integrator that tracks the blow-up directly.
"""

import math

from tailwedge import CirParams, riccati

params = CirParams(a=1.0, b=1.0, sigma=1.0, v=1.0)

for l1, l2 in [(0.5, 0.2), (3.0, 0.0), (2.0, 0.5), (0.0, 2.0)]:
    case = riccati.classify(params, l1, l2)
    ts = riccati.t_star(params, l1, l2)
    line = f"l1={l1:4g} l2={l2:4g}  {case.tag.value:20s} t*={ts:.10g}"
    if math.isfinite(ts):
        ref = riccati.ode_reference(params, l1, l2, 2.0 * ts)
        line += f"  integrator blow-up at {ref.t_star:.10g}"
    print(line)

print("\nlog MGF approaching the horizon for l1=2, l2=0.5 (t* = 2):")
for t in (1.0, 1.5, 1.9, 1.99, 1.999):
    print(f"  t={t:<6g} ln E e^Z = {riccati.log_mgf(params, 2.0, 0.5, t):.6f}")
