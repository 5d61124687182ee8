import math

import numpy as np

from alphaflow.complex_core import build_surface


def random_radii(rng, n, spread=1.0):
    """Log-uniform radii in [e^-spread, e^spread]."""
    return np.exp(rng.uniform(-spread, spread, n))


def random_weighted(rng, builder):
    """The mesh from ``builder`` with independent uniform weights in [0, pi/2]."""
    base = builder()
    faces = base.faces.tolist()
    w = {tuple(e): float(rng.uniform(0.0, math.pi / 2)) for e in base.edges.tolist()}
    return build_surface(base.vertex_count, faces, w)
