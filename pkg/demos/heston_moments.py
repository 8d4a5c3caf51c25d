"""Moment explosion of the Heston log-price.

``E S_t^p`` reduces to the CIR transform with weight ``(p^2 - p)/2`` on the
integrated variance after a change of drift ``b -> b - rho sigma p``.
Negative correlation delays the explosion of high moments.
"""

import math

from tailwedge import CirParams, HestonParams, heston_log_mgf
from tailwedge.errors import MomentExplodedError

cir = CirParams(a=0.08, b=2.0, sigma=0.6, v=0.04)

for rho in (-0.7, 0.0, 0.5):
    cells = []
    for p in (2.0, 4.0, 8.0, 16.0):
        try:
            cells.append(f"{math.exp(heston_log_mgf(HestonParams(cir, rho), p, 1.0)):11.4g}")
        except MomentExplodedError:
            cells.append(f"{'exploded':>11}")
    print(f"rho={rho:5g}  E S^p for p=2,4,8,16: " + " ".join(cells))
