"""Symmetric Gauss rules on the reference triangle.

Barycentric points and weights; weights sum to one, so a rule integrates
f over a physical triangle as ``area * sum(w_q * f(x_q))``.
"""

import numpy as np

# degree -> (barycentric coordinates (nq, 3), weights (nq,))
_RULES = {}

_RULES[1] = (
    np.array([[1 / 3, 1 / 3, 1 / 3]]),
    np.array([1.0]),
)

# three-point degree-2 rule (midpoint-type, interior points)
_RULES[2] = (
    np.array(
        [
            [2 / 3, 1 / 6, 1 / 6],
            [1 / 6, 2 / 3, 1 / 6],
            [1 / 6, 1 / 6, 2 / 3],
        ]
    ),
    np.array([1 / 3, 1 / 3, 1 / 3]),
)

# six-point degree-4 rule (Dunavant)
_a1, _w1 = 0.445948490915965, 0.223381589678011
_a2, _w2 = 0.091576213509771, 0.109951743655322
_RULES[4] = (
    np.array(
        [
            [1 - 2 * _a1, _a1, _a1],
            [_a1, 1 - 2 * _a1, _a1],
            [_a1, _a1, 1 - 2 * _a1],
            [1 - 2 * _a2, _a2, _a2],
            [_a2, 1 - 2 * _a2, _a2],
            [_a2, _a2, 1 - 2 * _a2],
        ]
    ),
    np.array([_w1, _w1, _w1, _w2, _w2, _w2]),
)

DEFAULT_DEGREE = 4


def triangle_rule(degree=DEFAULT_DEGREE):
    """Return (barycentric points, weights) exact for polynomials of `degree`."""
    for d in sorted(_RULES):
        if d >= degree:
            bary, w = _RULES[d]
            return bary.copy(), w.copy()
    raise ValueError(f"no quadrature rule of degree {degree}")
