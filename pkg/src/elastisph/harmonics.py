"""Real scalar and vector spherical harmonics on the unit sphere.

The scalar basis is the real orthonormal one without Condon-Shortley
phase (Y_{1,1} ~ x, Y_{1,-1} ~ y, Y_{1,0} ~ z).  The vector basis has
three families per degree/order,

    V = grad_s Y - (l+1) Y n,   W = grad_s Y + l Y n,   X = n x grad_s Y,

with squared surface norms (l+1)(2l+1), l(2l+1) and l(l+1).  W and X
vanish identically at l = 0; those modes are carried in the index space
as degenerate placeholders with zero coefficients.

Evaluation goes through stable normalized associated-Legendre
recurrences with the sin^m(theta) factor split off, so that Y and its
surface gradient are polynomial in the Cartesian components of the unit
vector and free of pole singularities.  The recurrences are good far
beyond degree 60.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from math import isqrt, sqrt, pi

import numpy as np

from .materials import LameParams
from .quadrature import LebedevRule, SphereFrame

UNIT_TOL = 1e-12


class Family(IntEnum):
    """The three vector-harmonic families; X is the toroidal one."""

    V = 0
    W = 1
    X = 2


@dataclass(frozen=True)
class ModeIndex:
    """One (degree, order, family) basis label."""

    ell: int
    m: int
    family: Family

    def __post_init__(self):
        if self.ell < 0 or abs(self.m) > self.ell:
            raise ValueError(f"invalid mode (ell={self.ell}, m={self.m})")

    @property
    def degenerate(self) -> bool:
        """True for the identically-zero modes (l=0, W) and (l=0, X)."""
        return self.ell == 0 and self.family != Family.V

    @property
    def flat_offset(self) -> int:
        """Canonical flat position: l ascending, then m, then family."""
        return 3 * sh_index(self.ell, self.m) + int(self.family)


def mode_from_offset(offset: int) -> ModeIndex:
    p, k = divmod(offset, 3)
    ell, m = sh_degree_order(p)
    return ModeIndex(ell=ell, m=m, family=Family(k))


def num_scalar_modes(max_degree: int) -> int:
    return (max_degree + 1) ** 2


def sh_index(ell: int, m: int) -> int:
    """Position of (ell, m) in the l-ascending, m-ascending enumeration."""
    return ell * ell + ell + m


def sh_degree_order(index: int) -> tuple[int, int]:
    ell = isqrt(index)
    return ell, index - ell * ell - ell


def norm_sq(ell: int, family: Family) -> float:
    """Squared surface L2 norm of one vector harmonic."""
    if family == Family.V:
        return float((ell + 1) * (2 * ell + 1))
    if family == Family.W:
        return float(ell * (2 * ell + 1))
    return float(ell * (ell + 1))


def _check_unit(s: np.ndarray) -> None:
    r = np.linalg.norm(s, axis=-1)
    if np.any(np.abs(r - 1.0) > UNIT_TOL):
        raise ValueError("evaluation points must be unit vectors (|s| = 1 within 1e-12)")


def _tri_index(ell: int, m: int) -> int:
    # packed storage of (ell, m >= 0) pairs
    return ell * (ell + 1) // 2 + m


def _legendre_tables(z: np.ndarray, max_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized associated Legendre values with sin^m factored out.

    Returns arrays (Q, dQ) of shape (n_pairs, len(z)) packed by
    ``_tri_index`` such that the orthonormal harmonic is
    ``c_m * Q[l,m](z) * Re/Im[(x+iy)^m]`` with c_m = sqrt(2) for m > 0.
    dQ is the derivative in z.
    """
    z = np.asarray(z, dtype=float)
    n = max_degree + 1
    npairs = n * (n + 1) // 2
    Q = np.zeros((npairs, z.size))
    dQ = np.zeros((npairs, z.size))

    diag = 1.0 / sqrt(4.0 * pi)
    for m in range(0, n):
        if m > 0:
            diag *= sqrt((2.0 * m + 1.0) / (2.0 * m))
        Q[_tri_index(m, m)] = diag
        if m + 1 <= max_degree:
            c = sqrt(2.0 * m + 3.0)
            Q[_tri_index(m + 1, m)] = c * z * diag
            dQ[_tri_index(m + 1, m)] = c * diag
        for ell in range(m + 2, n):
            a = sqrt((2.0 * ell - 1.0) * (2.0 * ell + 1.0) / ((ell - m) * (ell + m)))
            b = sqrt(
                (2.0 * ell + 1.0) * (ell - 1.0 - m) * (ell - 1.0 + m)
                / ((2.0 * ell - 3.0) * (ell - m) * (ell + m))
            )
            i0, i1, i2 = _tri_index(ell, m), _tri_index(ell - 1, m), _tri_index(ell - 2, m)
            Q[i0] = a * z * Q[i1] - b * Q[i2]
            dQ[i0] = a * (Q[i1] + z * dQ[i1]) - b * dQ[i2]
    return Q, dQ


def scalar_basis(points: np.ndarray, max_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """All scalar harmonics and surface gradients at unit points.

    Parameters
    ----------
    points : (T, 3) array of unit vectors.
    max_degree : largest degree l to evaluate.

    Returns
    -------
    Y : ((max_degree+1)^2, T) values, modes ordered by ``sh_index``.
    gradY : ((max_degree+1)^2, T, 3) surface gradients (tangential).
    """
    s = np.atleast_2d(np.asarray(points, dtype=float))
    _check_unit(s)
    x, y, z = s[:, 0], s[:, 1], s[:, 2]
    T = s.shape[0]
    n = max_degree + 1

    Q, dQ = _legendre_tables(z, max_degree)

    # C[m] + i S[m] = (x + i y)^m
    C = np.zeros((n, T))
    S = np.zeros((n, T))
    C[0] = 1.0
    for m in range(1, n):
        C[m] = x * C[m - 1] - y * S[m - 1]
        S[m] = x * S[m - 1] + y * C[m - 1]

    L2 = num_scalar_modes(max_degree)
    Y = np.zeros((L2, T))
    grad = np.zeros((L2, T, 3))
    sqrt2 = sqrt(2.0)

    for ell in range(n):
        for m in range(-ell, ell + 1):
            am = abs(m)
            q = Q[_tri_index(ell, am)]
            dq = dQ[_tri_index(ell, am)]
            c = 1.0 if m == 0 else sqrt2
            if m >= 0:
                tangent, dtx, dty = C[am], am * C[am - 1], -am * S[am - 1]
            else:
                tangent, dtx, dty = S[am], am * S[am - 1], am * C[am - 1]
            p = sh_index(ell, m)
            Y[p] = c * q * tangent
            # gradient of the polynomial extension c * Q(z) * T(x, y)
            grad[p, :, 0] = c * q * dtx
            grad[p, :, 1] = c * q * dty
            grad[p, :, 2] = c * dq * tangent

    # project out the radial component: grad_s = (I - s s^T) grad
    radial = np.einsum("ptc,tc->pt", grad, s)
    grad -= radial[:, :, None] * s[None, :, :]
    return Y, grad


@dataclass(frozen=True, eq=False)
class VshBasis:
    """Vector spherical harmonics tabulated at a fixed set of unit points."""

    max_degree: int
    points: np.ndarray  # (T, 3)
    Y: np.ndarray       # (L2, T)
    V: np.ndarray       # (L2, T, 3)
    W: np.ndarray       # (L2, T, 3)
    X: np.ndarray       # (L2, T, 3)

    def family(self, family: Family) -> np.ndarray:
        return (self.V, self.W, self.X)[int(family)]


def vsh_basis(points: np.ndarray, max_degree: int) -> VshBasis:
    """Evaluate all three vector families at the given unit points."""
    s = np.atleast_2d(np.asarray(points, dtype=float))
    Y, grad = scalar_basis(s, max_degree)
    L2 = Y.shape[0]
    ells = np.array([sh_degree_order(p)[0] for p in range(L2)], dtype=float)
    Yn = Y[:, :, None] * s[None, :, :]
    V = grad - (ells + 1.0)[:, None, None] * Yn
    W = grad + ells[:, None, None] * Yn
    X = np.cross(np.broadcast_to(s[None, :, :], grad.shape), grad)
    return VshBasis(max_degree=max_degree, points=s, Y=Y, V=V, W=W, X=X)


def eval_Y(ell: int, m: int, s) -> float:
    """One real orthonormal scalar harmonic at a unit vector."""
    ModeIndex(ell, m, Family.V)  # validates (ell, m)
    Y, _ = scalar_basis(np.asarray(s, dtype=float)[None, :], ell)
    return float(Y[sh_index(ell, m), 0])


def surface_gradient_Y(ell: int, m: int, s) -> np.ndarray:
    """Surface gradient of one scalar harmonic; tangential to the sphere."""
    ModeIndex(ell, m, Family.V)
    _, grad = scalar_basis(np.asarray(s, dtype=float)[None, :], ell)
    return grad[sh_index(ell, m), 0].copy()


def eval_VWX(ell: int, m: int, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three vector harmonics (V, W, X) of one mode at a unit vector."""
    ModeIndex(ell, m, Family.V)
    basis = vsh_basis(np.asarray(s, dtype=float)[None, :], ell)
    p = sh_index(ell, m)
    return basis.V[p, 0].copy(), basis.W[p, 0].copy(), basis.X[p, 0].copy()


def radial_profile_divergence(family: Family, ell: int, m: int, h, h_r, x) -> float:
    """Divergence of the field h(r) * (V|W|X)_{lm}(x/|x|) at a point x != 0.

    The toroidal family is exactly divergence free.
    """
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ValueError("divergence of a radial-profile field is undefined at the origin")
    if family == Family.X:
        return 0.0
    yval = eval_Y(ell, m, x / r)
    if family == Family.V:
        return -(ell + 1.0) * (h_r(r) + (ell + 2.0) * h(r) / r) * yval
    return ell * (h_r(r) - (ell - 1.0) * h(r) / r) * yval


def radial_profile_laplacian(family: Family, ell: int, m: int, h, h_r, h_rr, x) -> np.ndarray:
    """Vector Laplacian of h(r) * (V|W|X)_{lm}(x/|x|) at a point x != 0."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ValueError("Laplacian of a radial-profile field is undefined at the origin")
    vecs = eval_VWX(ell, m, x / r)
    if family == Family.V:
        shift = (ell + 1.0) * (ell + 2.0)
    elif family == Family.W:
        shift = (ell - 1.0) * ell
    else:
        shift = ell * (ell + 1.0)
    coeff = h_rr(r) + 2.0 * h_r(r) / r - shift * h(r) / r ** 2
    return coeff * vecs[int(family)]


def traction_of_radial_field(
    profiles: tuple[float, float, float, float, float, float],
    ell: int,
    params: LameParams,
) -> tuple[float, float, float]:
    """Traction coefficients of f(r)V + g(r)W + h(r)X on the unit sphere.

    ``profiles`` holds (f, f_r, g, g_r, h, h_r) evaluated at r = 1.  The
    return value (c_V, c_W, c_X) expands the surface traction of the
    displacement field in the (V, W, X) basis of the same (l, m); the
    expression is exact for any radial profiles.  At l = 0 only the V
    coefficient is meaningful and the other two are returned as zero.
    """
    f1, f1r, g1, g1r, h1, h1r = profiles
    mu, lam = params.mu, params.lam
    if ell == 0:
        c_v = 2.0 * mu * f1r + lam * (f1r + 2.0 * f1)
        return c_v, 0.0, 0.0
    ol = 1.0 / (2.0 * ell + 1.0)
    c_v = mu * ol * (
        (3.0 * ell + 2.0) * f1r - ell * (ell + 2.0) * f1
        - ell * g1r + ell * (ell - 1.0) * g1
    ) + lam * ol * (
        (ell + 1.0) * f1r + (ell + 1.0) * (ell + 2.0) * f1
        - ell * g1r + ell * (ell - 1.0) * g1
    )
    c_w = mu * ol * (
        -(ell + 1.0) * f1r - (ell + 1.0) * (ell + 2.0) * f1
        + (3.0 * ell + 1.0) * g1r + (ell + 1.0) * (ell - 1.0) * g1
    ) + lam * ol * (
        -(ell + 1.0) * f1r - (ell + 1.0) * (ell + 2.0) * f1
        + ell * g1r - ell * (ell - 1.0) * g1
    )
    c_x = mu * (h1r - h1)
    return c_v, c_w, c_x


@dataclass
class VshExpansion:
    """Coefficients of a sphere-surface vector field over the VSH basis.

    ``coeffs`` has shape ((max_degree+1)^2, 3) with the scalar-mode axis
    in ``sh_index`` order and the last axis the (V, W, X) family.
    Degenerate (l=0, W/X) entries are kept and must stay exactly zero.
    """

    sphere_id: int
    max_degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        expected = (num_scalar_modes(self.max_degree), 3)
        if self.coeffs.shape != expected:
            raise ValueError(f"coeffs shape {self.coeffs.shape} != {expected}")

    @classmethod
    def zeros(cls, sphere_id: int, max_degree: int) -> "VshExpansion":
        return cls(sphere_id, max_degree, np.zeros((num_scalar_modes(max_degree), 3)))

    @property
    def flat(self) -> np.ndarray:
        """Canonical flat coefficient vector (mode-major, family-minor)."""
        return self.coeffs.reshape(-1)

    @classmethod
    def from_flat(cls, sphere_id: int, max_degree: int, flat: np.ndarray) -> "VshExpansion":
        coeffs = np.asarray(flat, dtype=float).reshape(num_scalar_modes(max_degree), 3)
        return cls(sphere_id, max_degree, coeffs.copy())

    def get(self, ell: int, m: int, family: Family) -> float:
        return float(self.coeffs[sh_index(ell, m), int(family)])

    def set(self, ell: int, m: int, family: Family, value: float) -> None:
        if ModeIndex(ell, m, Family(family)).degenerate and value != 0.0:
            raise ValueError("degenerate (l=0, W/X) coefficients must be zero")
        self.coeffs[sh_index(ell, m), int(family)] = value

    def pad_to(self, max_degree: int) -> "VshExpansion":
        """Zero-pad (or keep) the expansion up to the requested degree."""
        if max_degree < self.max_degree:
            raise ValueError("pad_to cannot truncate")
        out = VshExpansion.zeros(self.sphere_id, max_degree)
        out.coeffs[: self.coeffs.shape[0]] = self.coeffs
        return out

    def norm_weights(self) -> np.ndarray:
        """Squared basis norms aligned with ``coeffs``; zero on degenerate modes."""
        w = np.zeros_like(self.coeffs)
        for p in range(self.coeffs.shape[0]):
            ell, _ = sh_degree_order(p)
            for k in Family:
                w[p, int(k)] = norm_sq(ell, k)
        return w

    def l2_norm(self) -> float:
        """Surface L2 norm of the represented field."""
        return float(np.sqrt(np.sum(self.coeffs ** 2 * self.norm_weights())))


def project(fn, frame: SphereFrame, max_degree: int, rule: LebedevRule) -> VshExpansion:
    """Project a sphere-surface vector field onto the basis up to ``max_degree``.

    ``fn`` maps an (n, 3) array of surface points to (n, 3) values.  The
    rule must be exact at least to degree 2*max_degree; a weaker rule is
    rejected rather than silently accepted.
    """
    if rule.degree < 2 * max_degree:
        raise ValueError(
            f"quadrature rule degree {rule.degree} is below the projection "
            f"requirement 2*N = {2 * max_degree}"
        )
    values = np.asarray(fn(frame.surface_points(rule)), dtype=float)
    if values.shape != (rule.size, 3):
        raise ValueError(f"field returned shape {values.shape}, expected {(rule.size, 3)}")
    basis = vsh_basis(rule.points, max_degree)
    wvals = values * rule.weights[:, None]
    out = VshExpansion.zeros(sphere_id=-1, max_degree=max_degree)
    for k in Family:
        fam = basis.family(k)
        raw = np.einsum("ptc,tc->p", fam, wvals)
        for p in range(raw.size):
            ell, _ = sh_degree_order(p)
            if ell == 0 and k != Family.V:
                continue
            out.coeffs[p, int(k)] = raw[p] / norm_sq(ell, k)
    return out


def reconstruct(expansion: VshExpansion, directions: np.ndarray) -> np.ndarray:
    """Evaluate the expanded field at unit directions, shape (n, 3)."""
    basis = vsh_basis(directions, expansion.max_degree)
    out = np.einsum("p,ptc->tc", expansion.coeffs[:, 0], basis.V)
    out += np.einsum("p,ptc->tc", expansion.coeffs[:, 1], basis.W)
    out += np.einsum("p,ptc->tc", expansion.coeffs[:, 2], basis.X)
    return out
