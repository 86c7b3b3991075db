"""Independent numerical cross-checks used by several test modules.

These deliberately avoid the exact rational code paths: everything here
is float quadrature over the physical radial variable, so agreement
with the library's closed forms is meaningful evidence.
"""

from __future__ import annotations

import numpy as np

from wavechannel import exterior_basis as eb
from wavechannel.polylib import gauss_nodes


def halfline_rule(R: float, n: int = 120) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for integrals over (R, infinity) under r = R/u.

    Exact for integrands that are polynomials in 1/r after the
    substitution, which covers every profile-squared moment used here.
    """
    rule = gauss_nodes(n).mapped(0.0, 1.0)
    u = rule.nodes
    r = R / u
    w = rule.weights * R / u**2
    return r, w


def exterior_norms_quadrature(data: eb.ExteriorModeData, n: int = 120) -> eb.SeriesNorms:
    """Full-space integrals over {|x| > R} of the single-mode field."""
    d, nu = data.spec.d, data.spec.nu
    r, w = halfline_rule(data.R, n)
    vals = eb.eval_profiles(data, r)
    angular = nu * (d - 2 + nu) * float(np.sum(w * vals.u0**2 * r ** (d - 3)))
    u1_norm2 = float(np.sum(w * vals.u1**2 * r ** (d - 1)))
    du0_norm2 = float(np.sum(w * vals.du0_dr**2 * r ** (d - 1)))
    return eb.SeriesNorms(angular, u1_norm2, du0_norm2)
