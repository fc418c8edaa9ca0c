"""Lebedev quadrature on the unit sphere and scaled surface inner products.

Weights are normalized so that the rule integrates the constant 1 to 4*pi.
The scaled inner product on a sphere of radius r drops the r^2 surface
Jacobian, i.e. it is the plain unit-sphere quadrature sum of u . v sampled
at the mapped points.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import lebedev_rule as _scipy_lebedev

# (exact degree, number of points) of the supported Lebedev rules.
LEBEDEV_TABLE: tuple[tuple[int, int], ...] = (
    (3, 6), (5, 14), (7, 26), (9, 38), (11, 50), (13, 74), (15, 86),
    (17, 110), (19, 146), (21, 170), (23, 194), (25, 230), (27, 266),
    (29, 302), (31, 350), (35, 434), (41, 590), (47, 770), (53, 974),
    (59, 1202), (65, 1454), (71, 1730), (77, 2030), (83, 2354),
    (89, 2702), (95, 3074), (101, 3470), (107, 3890),
)

MAX_DEGREE = LEBEDEV_TABLE[-1][0]


@dataclass(frozen=True, eq=False)
class LebedevRule:
    """A spherical quadrature rule exact for harmonics up to ``degree``."""

    degree: int
    points: np.ndarray   # (T, 3) unit vectors
    weights: np.ndarray  # (T,), sums to 4*pi

    @property
    def size(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class SphereFrame:
    """Center and radius of one sphere."""

    center: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"sphere radius must be positive, got {self.radius}")

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def surface_points(self, rule: LebedevRule) -> np.ndarray:
        """Quadrature nodes mapped onto this sphere, shape (T, 3)."""
        return self.center_array + self.radius * rule.points


UNIT_SPHERE = SphereFrame(center=(0.0, 0.0, 0.0), radius=1.0)


@lru_cache(maxsize=None)
def _load_rule(degree: int) -> LebedevRule:
    x, w = _scipy_lebedev(degree)
    points = np.ascontiguousarray(x.T)
    weights = np.ascontiguousarray(w)
    expected = dict(LEBEDEV_TABLE)[degree]
    if weights.size != expected:
        raise RuntimeError(
            f"Lebedev rule of degree {degree} has {weights.size} points, expected {expected}"
        )
    if abs(weights.sum() - 4.0 * np.pi) > 1e-12 * 4.0 * np.pi:
        raise RuntimeError(f"Lebedev weights of degree {degree} do not sum to 4*pi")
    norms = np.linalg.norm(points, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-14:
        raise RuntimeError(f"Lebedev points of degree {degree} are not unit vectors")
    return LebedevRule(degree=degree, points=points, weights=weights)


def rule_for_degree(requested_degree: int) -> LebedevRule:
    """Smallest embedded rule whose exact degree is >= the requested degree."""
    for degree, _count in LEBEDEV_TABLE:
        if degree >= requested_degree:
            return _load_rule(degree)
    raise ValueError(
        f"requested exactness degree {requested_degree} exceeds the largest "
        f"embedded rule (degree {MAX_DEGREE})"
    )


def inner_product(u, v, rule: LebedevRule, frame: SphereFrame = UNIT_SPHERE) -> float:
    """Quadrature approximation of the scaled surface inner product.

    ``u`` and ``v`` are callables mapping an (n, 3) array of points on the
    sphere to (n, 3) vector values (or (n,) scalars).  The 1/r^2 scaling
    of the inner product is built in: the sum runs over unit-sphere
    weights with no surface Jacobian.
    """
    pts = frame.surface_points(rule)
    uu = np.asarray(u(pts), dtype=float)
    vv = np.asarray(v(pts), dtype=float)
    if uu.ndim == 1:
        prod = uu * vv
    else:
        prod = np.einsum("tc,tc->t", uu, vv)
    return float(np.dot(rule.weights, prod))


def dump_rule_csv(rule: LebedevRule, path) -> None:
    """Write the rule as rows of ``s_x, s_y, s_z, w`` for inspection."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s_x", "s_y", "s_z", "w"])
        for s, w in zip(rule.points, rule.weights):
            writer.writerow([f"{s[0]:.17g}", f"{s[1]:.17g}", f"{s[2]:.17g}", f"{w:.17g}"])
