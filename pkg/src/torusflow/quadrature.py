"""Gauss-Legendre rules mapped to the unit reference element."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_01(npts: int):
    """Nodes and weights on [0, 1], exact for polynomials of degree 2*npts - 1."""
    if npts < 1:
        raise ValueError("need at least one quadrature point")
    x, w = np.polynomial.legendre.leggauss(npts)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights
