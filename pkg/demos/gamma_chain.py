"""Gamma tails: the exact survival function against the Legendre-transform picture.

For ``X ~ Gamma(1, 1)`` everything is explicit: ``Lambda(p) = -ln(1 - p)``,
``p*(R) = 1 - 1/R`` and ``Lambda*(R) = R - 1 - ln R``.  The exact tail
``P(X > R) = e^{-R}`` sits a factor ``eR`` below the Chernoff bound, so
``(ln P + Lambda*) / ln R`` creeps towards ``-1``, the lower exponent of
the index-0 band.
"""

import math

from tailwedge import GammaParams, gamma_exact_log_sf, gamma_model, legendre, tail_band

params = GammaParams(1.0, 1.0)
model = gamma_model(params)

print(f"{'R':>8} {'p*':>10} {'Lambda*':>12} {'ln P exact':>12} {'ratio':>8}")
for R in (2.0, 5.0, 10.0, 100.0, 1e4):
    lp = legendre(model, R)
    exact = gamma_exact_log_sf(params, R)
    ratio = (exact + lp.lambda_star) / math.log(R)
    print(f"{R:8g} {lp.p_star:10.6f} {lp.lambda_star:12.6f} "
          f"{exact:12.4f} {ratio:8.4f}")

band = tail_band(model, 10.0)
print(f"\nexponent band for alpha = 0: {band.exponent_interval}")
print(f"at R = 10 the band spans ln P in [{band.log_lower_limsup:.4f}, {band.log_upper:.4f}] asymptotically")
