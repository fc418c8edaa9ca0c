"""Galerkin assembly and solution of the multi-sphere integral equation.

The trace unknown is expanded per sphere in vector spherical harmonics
up to degree N; testing against the same basis yields the dense system
(D - N) Lambda = F with D the diagonal of squared basis norms.  Diagonal
blocks of N are exactly diagonal by orthogonality; off-diagonal blocks
couple spheres through the closed-form single-layer matrices sampled at
the target sphere's quadrature nodes.

The operator is singular on rigid-motion traces (translations always;
rotations too when the toroidal adjoint eigenvalue takes its
self-consistent value), mirroring the rigid kernel of the continuous
Neumann problem.  Both solvers handle this by rank-revealing/iterative
solution of the consistent system followed by a deterministic gauge
projection that removes the rigid-trace components in the D-weighted
inner product.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
from scipy.linalg import lstsq as _lstsq
from scipy.sparse.linalg import LinearOperator, gmres

from .harmonics import Family, VshExpansion, norm_sq, num_scalar_modes, sh_degree_order, vsh_basis
from .materials import LameParams
from .problem import ProblemConfig, ROLE_TRANSMISSION, SphereSpec, build_sigma
from .quadrature import LebedevRule
from .spectra import DEFAULT_MODE, MODE_SELF_CONSISTENT, adjoint_double_eigs, single_layer_eigs, single_layer_matrix


class SolverError(RuntimeError):
    """Raised when the linear solver cannot produce a usable solution."""


@dataclass(frozen=True)
class DofMap:
    """Active unknown layout: per-sphere blocks, degenerate modes excluded.

    Within a sphere the flat order is scalar-mode-major, family-minor
    (the canonical coefficient order); the two identically-zero modes
    (l=0, W) and (l=0, X) are excluded, so each sphere carries
    3 (N+1)^2 - 2 unknowns.
    """

    degree: int
    sphere_ids: tuple[int, ...]

    @property
    def modes_per_sphere(self) -> int:
        return 3 * num_scalar_modes(self.degree) - 2

    @property
    def size(self) -> int:
        return self.modes_per_sphere * len(self.sphere_ids)

    @property
    def nominal_size(self) -> int:
        """Mode count including the degenerate placeholders."""
        return 3 * num_scalar_modes(self.degree) * len(self.sphere_ids)

    def active_mask(self) -> np.ndarray:
        mask = np.ones(3 * num_scalar_modes(self.degree), dtype=bool)
        mask[[1, 2]] = False
        return mask

    def sphere_slice(self, position: int) -> slice:
        n = self.modes_per_sphere
        return slice(position * n, (position + 1) * n)

    def expansion(self, vec: np.ndarray, position: int) -> VshExpansion:
        """Per-sphere coefficients of a global vector, degenerate zeros restored."""
        full = np.zeros(3 * num_scalar_modes(self.degree))
        full[self.active_mask()] = vec[self.sphere_slice(position)]
        return VshExpansion.from_flat(self.sphere_ids[position], self.degree, full)

    def insert(self, expansions: dict[int, VshExpansion]) -> np.ndarray:
        """Global vector from per-sphere expansions (inverse of ``expansion``)."""
        mask = self.active_mask()
        out = np.zeros(self.size)
        for pos, sid in enumerate(self.sphere_ids):
            out[self.sphere_slice(pos)] = expansions[sid].flat[mask]
        return out


@dataclass(eq=False)
class DenseSystem:
    dofmap: DofMap
    D: np.ndarray                    # diagonal entries, (size,)
    Nmat: np.ndarray                 # dense coupling matrix, (size, size)
    F: np.ndarray                    # right-hand side, (size,)
    sigma: dict[int, VshExpansion]
    rule_degree: int
    mode: str
    assembly_seconds: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.D) - self.Nmat


@dataclass(eq=False)
class Solution:
    lambda_: np.ndarray
    residual: float
    iterations: int | None
    dofmap: DofMap
    sigma: dict[int, VshExpansion]
    mode: str
    diagnostics: dict = field(default_factory=dict)

    def trace(self, sphere_id: int) -> VshExpansion:
        position = self.dofmap.sphere_ids.index(sphere_id)
        return self.dofmap.expansion(self.lambda_, position)

    def traces(self) -> dict[int, VshExpansion]:
        return {sid: self.trace(sid) for sid in self.dofmap.sphere_ids}


def c_coefficient(
    sphere: SphereSpec,
    background: LameParams,
    ell: int,
    family: Family,
    mode: str = DEFAULT_MODE,
) -> float:
    """Per-mode eigenvalue of the local trace-to-density operator (times r).

    Transmission spheres combine the inverse single-layer and adjoint
    double-layer eigenvalues of both materials; Neumann spheres use the
    background ones with the orientation sign.
    """
    k = int(family)
    tau0_v = single_layer_eigs(ell, background)[k]
    tau0_k = adjoint_double_eigs(ell, background, mode)[k]
    if sphere.role == ROLE_TRANSMISSION:
        tauj_v = single_layer_eigs(ell, sphere.material)[k]
        tauj_k = adjoint_double_eigs(ell, sphere.material, mode)[k]
        return 0.5 * (1.0 / tau0_v - 1.0 / tauj_v) + (tau0_k / tau0_v - tauj_k / tauj_v)
    return (0.5 + sphere.sign * tau0_k) / tau0_v


def _c_vector(sphere: SphereSpec, background: LameParams, degree: int, mode: str) -> np.ndarray:
    """C coefficients over the full (mode, family) layout, flat (3 L2,)."""
    L2 = num_scalar_modes(degree)
    out = np.zeros((L2, 3))
    for ell in range(degree + 1):
        fams = (Family.V,) if ell == 0 else (Family.V, Family.W, Family.X)
        vals = [c_coefficient(sphere, background, ell, f, mode) for f in fams]
        for p in range(ell * ell, (ell + 1) * (ell + 1)):
            for f, v in zip(fams, vals):
                out[p, int(f)] = v
    return out.reshape(-1)


def _norms_vector(degree: int) -> np.ndarray:
    L2 = num_scalar_modes(degree)
    out = np.zeros((L2, 3))
    for p in range(L2):
        ell, _ = sh_degree_order(p)
        for k in Family:
            out[p, int(k)] = norm_sq(ell, k)
    return out.reshape(-1)


def _tau_v_vector(params: LameParams, degree: int) -> np.ndarray:
    L2 = num_scalar_modes(degree)
    out = np.zeros((L2, 3))
    for ell in range(degree + 1):
        taus = single_layer_eigs(ell, params)
        for p in range(ell * ell, (ell + 1) * (ell + 1)):
            out[p] = taus
    out[0, 1] = out[0, 2] = 0.0
    return out.reshape(-1)


def _basis_stack(points: np.ndarray, degree: int) -> np.ndarray:
    """All families at the given directions as one ((3 L2), T, 3) stack.

    Flat index 3 p + k matches the canonical coefficient order.
    """
    basis = vsh_basis(points, degree)
    stacked = np.stack([basis.V, basis.W, basis.X], axis=1)  # (L2, 3, T, 3)
    L2 = stacked.shape[0]
    return stacked.reshape(3 * L2, stacked.shape[2], 3)


def _pair_matrix(
    target: SphereSpec,
    source: SphereSpec,
    background: LameParams,
    degree: int,
    rule: LebedevRule,
    test_rows: np.ndarray,
) -> np.ndarray:
    """Raw Galerkin coupling of source-sphere densities into target modes.

    Entry ((p,k), (p',k')) is  sum_t w_t Y^k_p(s_t) . [Ybar_p'(y/|y|)
    A_S(y/r_src)]_k'  with y = x_tgt + r_tgt s_t - x_src; the
    single-layer eigen-matrices use the 'in' side exactly when the
    source is the enclosing sphere.  No C factors and no radius factors.
    """
    y = target.frame.center_array + target.frame.radius * rule.points - source.frame.center_array
    dist = np.linalg.norm(y, axis=1)
    rho = dist / source.frame.radius
    dirs = y / dist[:, None]
    side = "in" if source.enclosing else "out"
    src_basis = vsh_basis(dirs, degree)
    fams = np.stack([src_basis.V, src_basis.W, src_basis.X], axis=0)  # (3, L2, T, 3)
    L2 = num_scalar_modes(degree)
    G = np.zeros((L2, 3, rule.size, 3))
    for ell in range(degree + 1):
        A = single_layer_matrix(ell, background, rho, side)  # (T, 3, 3)
        sl = slice(ell * ell, (ell + 1) * (ell + 1))
        G[sl] = np.einsum("kptc,tkq->pqtc", fams[:, sl], A)
    Gf = G.reshape(3 * L2, rule.size * 3)
    return test_rows @ Gf.T


def _test_rows(rule: LebedevRule, degree: int) -> np.ndarray:
    """Weighted test basis as a (3 L2, 3 T) matrix."""
    stack = _basis_stack(rule.points, degree)  # (3L2, T, 3)
    return (stack * rule.weights[None, :, None]).reshape(stack.shape[0], -1)


def assemble(
    config: ProblemConfig,
    rule: LebedevRule | None = None,
    mode: str = DEFAULT_MODE,
    sigma: dict[int, VshExpansion] | None = None,
) -> DenseSystem:
    """Build the dense Galerkin system for a validated configuration."""
    t0 = time.perf_counter()
    rule = config.rule() if rule is None else rule
    degree = config.degree
    if rule.degree < 2 * degree:
        raise ValueError(
            f"assembly rule degree {rule.degree} is below 2*N = {2 * degree}"
        )
    if sigma is None:
        sigma = build_sigma(config, degree, rule)
    dofmap = DofMap(degree=degree, sphere_ids=tuple(s.id for s in config.spheres))
    mask = dofmap.active_mask()
    norms = _norms_vector(degree)
    tau0 = _tau_v_vector(config.background, degree)
    n = dofmap.size
    D = np.tile(norms[mask], len(config.spheres))
    Nmat = np.zeros((n, n))
    F = np.zeros(n)

    rows = _test_rows(rule, degree)
    cvecs = {s.id: _c_vector(s, config.background, degree, mode) for s in config.spheres}

    for ipos, tgt in enumerate(config.spheres):
        rsl = dofmap.sphere_slice(ipos)
        # exact diagonal block: C * tau0 * <Y, Y>
        diag = (cvecs[tgt.id] * tau0 * norms)[mask]
        np.fill_diagonal(Nmat[rsl, rsl], diag)
        F[rsl] += (tgt.frame.radius * sigma[tgt.id].flat * tau0 * norms)[mask]
        for jpos, src in enumerate(config.spheres):
            if jpos == ipos:
                continue
            raw = _pair_matrix(tgt, src, config.background, degree, rule, rows)
            Nmat[rsl, dofmap.sphere_slice(jpos)] = (raw * cvecs[src.id][None, :])[np.ix_(mask, mask)]
            sig = sigma[src.id].flat
            if np.any(sig):
                F[rsl] += (src.frame.radius * (raw @ sig))[mask]
    return DenseSystem(
        dofmap=dofmap, D=D, Nmat=Nmat, F=F, sigma=sigma,
        rule_degree=rule.degree, mode=mode,
        assembly_seconds=time.perf_counter() - t0,
    )


def apply_operator(
    config: ProblemConfig,
    lam: np.ndarray,
    rule: LebedevRule | None = None,
    mode: str = DEFAULT_MODE,
) -> np.ndarray:
    """Matrix-free product (D - N) Lambda; never materializes N.

    Block generation follows the same code path as ``assemble`` so the
    result agrees with the dense product to rounding error.
    """
    rule = config.rule() if rule is None else rule
    degree = config.degree
    dofmap = DofMap(degree=degree, sphere_ids=tuple(s.id for s in config.spheres))
    mask = dofmap.active_mask()
    norms = _norms_vector(degree)
    tau0 = _tau_v_vector(config.background, degree)
    rows = _test_rows(rule, degree)
    cvecs = {s.id: _c_vector(s, config.background, degree, mode) for s in config.spheres}
    out = np.tile(norms[mask], len(config.spheres)) * lam
    for ipos, tgt in enumerate(config.spheres):
        rsl = dofmap.sphere_slice(ipos)
        acc = (cvecs[tgt.id] * tau0 * norms)[mask] * lam[rsl]
        for jpos, src in enumerate(config.spheres):
            if jpos == ipos:
                continue
            raw = _pair_matrix(tgt, src, config.background, degree, rule, rows)
            block = (raw * cvecs[src.id][None, :])[np.ix_(mask, mask)]
            acc = acc + block @ lam[dofmap.sphere_slice(jpos)]
        out[rsl] -= acc
    return out


# ---------------------------------------------------------------------------
# rigid-motion null space and gauge
# ---------------------------------------------------------------------------

_AXIS_ORDER = (1, -1, 0)  # W/X order m for the x, y, z axes


def rigid_trace_vectors(config: ProblemConfig, dofmap: DofMap, mode: str) -> np.ndarray:
    """Known null vectors of (D - N): traces of rigid motions.

    Translations give constant traces (pure degree-1 W content) on every
    sphere and are null in both coefficient modes.  Rotation traces mix
    W (center offset) and toroidal X content; they are null exactly when
    the toroidal adjoint eigenvalue is the self-consistent -1/2 at
    degree 1, so they are deflated only in that mode.  Returns a
    (size, 3 or 6) orthonormalized basis.
    """
    c = sqrt(4.0 * pi / 3.0)
    cols = []

    def translation(vec: np.ndarray) -> dict[int, VshExpansion]:
        out = {}
        for s in config.spheres:
            e = VshExpansion.zeros(s.id, dofmap.degree)
            for axis, m in enumerate(_AXIS_ORDER):
                e.set(1, m, Family.W, c * vec[axis])
            out[s.id] = e
        return out

    for axis in range(3):
        vec = np.eye(3)[axis]
        cols.append(dofmap.insert(translation(vec)))
    if mode == MODE_SELF_CONSISTENT:
        for axis in range(3):
            omega = np.eye(3)[axis]
            exps = {}
            for s in config.spheres:
                const = np.cross(omega, s.frame.center_array)
                e = VshExpansion.zeros(s.id, dofmap.degree)
                for ax2, m in enumerate(_AXIS_ORDER):
                    e.set(1, m, Family.W, c * const[ax2])
                e.set(1, _AXIS_ORDER[axis], Family.X, -c * s.frame.radius)
                exps[s.id] = e
            cols.append(dofmap.insert(exps))
    Z = np.stack(cols, axis=1)
    q, _ = np.linalg.qr(Z)
    return q


def _gauge_project(x: np.ndarray, Z: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Remove rigid-trace components in the D-weighted inner product."""
    if Z.size == 0:
        return x
    G = Z.T @ (D[:, None] * Z)
    rhs = Z.T @ (D * x)
    return x - Z @ np.linalg.solve(G, rhs)


def solve_direct(system: DenseSystem, config: ProblemConfig) -> Solution:
    """Rank-revealing direct solve plus gauge projection.

    The assembled operator is consistently singular on rigid traces, so
    a QR least-squares solve (LAPACK gelsy) replaces plain LU; the
    returned residual certifies consistency.
    """
    A = system.matrix
    Z = rigid_trace_vectors(config, system.dofmap, system.mode)
    x, _res, rank, _sv = _lstsq(A, system.F, lapack_driver="gelsy")
    x = _gauge_project(x, Z, system.D)
    fnorm = np.linalg.norm(system.F)
    resid = float(np.linalg.norm(A @ x - system.F) / fnorm) if fnorm > 0 else 0.0
    # the right-hand side is compatible only up to the quadrature error of
    # the data projection, so a small least-squares remainder is expected;
    # anything large means a genuinely broken system
    if fnorm > 0 and resid > 1e-3:
        raise SolverError(
            f"direct solve left relative residual {resid:.3e}; system is "
            f"inconsistent (rank {rank} of {A.shape[0]})"
        )
    return Solution(
        lambda_=x, residual=resid, iterations=None,
        dofmap=system.dofmap, sigma=system.sigma, mode=system.mode,
        diagnostics={"rank": int(rank), "null_dim": int(A.shape[0] - rank),
                     "deflated": Z.shape[1]},
    )


def solve_iterative(
    system: DenseSystem,
    config: ProblemConfig,
    tol: float = 1e-6,
    max_iter: int = 1000,
    restart: int = 50,
    row_scale: bool = False,
) -> Solution:
    """Restarted GMRES with relative-residual stopping, then gauge projection."""
    A = system.matrix
    b = system.F
    if row_scale:
        scale = 1.0 / system.D
        op_matrix = scale[:, None] * A
        rhs = scale * b
    else:
        op_matrix = A
        rhs = b
    count = {"iters": 0}

    def _cb(_):
        count["iters"] += 1

    op = LinearOperator(A.shape, matvec=lambda v: op_matrix @ v)
    x, info = gmres(
        op, rhs, rtol=tol, atol=0.0, restart=restart, maxiter=max_iter,
        callback=_cb, callback_type="pr_norm",
    )
    if info < 0:
        raise SolverError("GMRES received an illegal input or breakdown")
    stalled_floor = None
    if info > 0:
        # the stopping tolerance may sit below the consistency floor of the
        # right-hand side (data-projection quadrature error); accept the
        # stalled iterate only if its residual is essentially orthogonal to
        # the range, certifying the remainder is genuinely incompatible
        r = rhs - op_matrix @ x
        rnorm = np.linalg.norm(r)
        ortho = np.linalg.norm(op_matrix.T @ r) / max(
            rnorm * np.linalg.norm(op_matrix, ord=np.inf), 1e-300
        )
        if ortho > 1e-2:
            raise SolverError(
                f"GMRES did not reach tol={tol} within the iteration budget "
                f"(achieved {rnorm / np.linalg.norm(rhs):.3e} relative)"
            )
        stalled_floor = float(rnorm / np.linalg.norm(rhs))
    Z = rigid_trace_vectors(config, system.dofmap, system.mode)
    x = _gauge_project(x, Z, system.D)
    fnorm = np.linalg.norm(b)
    resid = float(np.linalg.norm(A @ x - b) / fnorm) if fnorm > 0 else 0.0
    diagnostics = {"deflated": Z.shape[1], "row_scaled": row_scale}
    if stalled_floor is not None:
        diagnostics["consistency_floor"] = stalled_floor
    return Solution(
        lambda_=x, residual=resid, iterations=count["iters"],
        dofmap=system.dofmap, sigma=system.sigma, mode=system.mode,
        diagnostics=diagnostics,
    )


def solve(system: DenseSystem, config: ProblemConfig) -> Solution:
    """Dispatch on the configured solver options."""
    opts = config.solver
    if opts.method == "direct":
        return solve_direct(system, config)
    return solve_iterative(
        system, config, tol=opts.tol, max_iter=opts.max_iter,
        restart=opts.restart, row_scale=opts.row_scale,
    )


def dump_system(system: DenseSystem, path) -> None:
    """Binary dump of (D, N, F): little-endian int64 size header, then
    D (n doubles), N (n*n doubles, row-major), F (n doubles)."""
    n = system.dofmap.size
    with open(path, "wb") as fh:
        fh.write(np.int64(n).tobytes())
        fh.write(system.D.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(system.Nmat, dtype="<f8").tobytes())
        fh.write(system.F.astype("<f8").tobytes())
