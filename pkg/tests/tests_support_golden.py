"""Explicit low-degree harmonic table shared by the acceptance suite.

Scalar values and the three vector families for every mode up to degree
two, written out as polynomials in the Cartesian components of the unit
vector.  This is the normative fixture for the real-basis convention.
"""

import numpy as np


def appendix_table(s):
    x, y, z = s
    c3 = np.sqrt(3 / (4 * np.pi))
    c15 = 0.5 * np.sqrt(15 / np.pi)
    c5 = 0.5 * np.sqrt(5 / np.pi)

    Y = {
        (0, 0): 0.5 / np.sqrt(np.pi),
        (1, -1): c3 * y, (1, 0): c3 * z, (1, 1): c3 * x,
        (2, -2): c15 * x * y, (2, -1): c15 * y * z,
        (2, 0): 0.5 * c5 * (-x * x - y * y + 2 * z * z),
        (2, 1): c15 * x * z, (2, 2): 0.5 * c15 * (x * x - y * y),
    }
    gradY = {
        (0, 0): np.zeros(3),
        (1, -1): c3 * (np.array([0.0, 1, 0]) - y * s),
        (1, 0): c3 * (np.array([0.0, 0, 1]) - z * s),
        (1, 1): c3 * (np.array([1.0, 0, 0]) - x * s),
        (2, -2): c15 * (np.array([y, x, 0.0]) - 2 * x * y * s),
        (2, -1): c15 * (np.array([0.0, z, y]) - 2 * y * z * s),
        (2, 0): c5 * (np.array([-x, -y, 2 * z]) - (-x * x - y * y + 2 * z * z) * s),
        (2, 1): c15 * (np.array([z, 0.0, x]) - 2 * x * z * s),
        (2, 2): c15 * (np.array([x, -y, 0.0]) - (x * x - y * y) * s),
    }
    X = {
        (0, 0): np.zeros(3),
        (1, -1): c3 * np.array([-z, 0.0, x]),
        (1, 0): c3 * np.array([y, -x, 0.0]),
        (1, 1): c3 * np.array([0.0, z, -y]),
        (2, -2): c15 * np.array([-x * z, y * z, x * x - y * y]),
        (2, -1): c15 * np.array([y * y - z * z, -x * y, x * z]),
        (2, 0): c5 * np.array([3 * y * z, -3 * x * z, 0.0]),
        (2, 1): c15 * np.array([x * y, z * z - x * x, -y * z]),
        (2, 2): c15 * np.array([y * z, x * z, -2 * x * y]),
    }
    out = {}
    for (ell, m), yval in Y.items():
        g = gradY[(ell, m)]
        out[(ell, m)] = (yval, g - (ell + 1) * yval * s, g + ell * yval * s, X[(ell, m)])
    return out
