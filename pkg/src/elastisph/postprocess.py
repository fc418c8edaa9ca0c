"""Solution reconstruction, the analytic one-sphere reference, and exports.

The trace solution determines a single-layer density on every sphere;
displacement anywhere in the composite body is recovered by summing the
closed-form layer potentials.  Relative errors between trace expansions
use the exact basis norms.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass

import numpy as np

from .harmonics import Family, VshExpansion, num_scalar_modes, sh_degree_order
from .materials import LameParams
from .problem import ProblemConfig, ROLE_TRANSMISSION, config_to_dict
from .spectra import DEFAULT_MODE, adjoint_double_eigs, apply_single_layer, single_layer_eigs
from .system import Solution, c_coefficient


class ResonantDataError(ValueError):
    """Raised when boundary data excites a zero denominator mode.

    The adjoint double layer has eigenvalue exactly -1/2 on the
    constant (degree-1 W) traces, so data with mean (net-force) content
    cannot be inverted by the one-sphere closed form; the zero-mean
    compatibility condition removes those modes.
    """


def one_sphere_reference(
    sigma: VshExpansion,
    params: LameParams,
    mode: str = DEFAULT_MODE,
    resonance_tol: float = 1e-10,
) -> VshExpansion:
    """Exact trace solution of the single Neumann sphere, mode by mode.

    Each coefficient is scaled by tau_V / (1/2 + tau_K*).  Modes whose
    denominator vanishes (the rigid traces) must carry no data beyond
    ``resonance_tol`` relative to the data norm; they map to zero.
    """
    out = VshExpansion.zeros(sigma.sphere_id, sigma.max_degree)
    scale = max(sigma.l2_norm(), 1e-300)
    for ell in range(sigma.max_degree + 1):
        tau_v = single_layer_eigs(ell, params)
        tau_k = adjoint_double_eigs(ell, params, mode)
        for k in ((Family.V,) if ell == 0 else tuple(Family)):
            den = 0.5 + tau_k[int(k)]
            for p in range(ell * ell, (ell + 1) * (ell + 1)):
                c = sigma.coeffs[p, int(k)]
                if abs(den) < 1e-12:
                    if abs(c) > resonance_tol * scale:
                        raise ResonantDataError(
                            f"data has resonant content {c:.3e} on the rigid "
                            f"mode (l={ell}, {k.name}); impose the zero-mean "
                            f"compatibility condition"
                        )
                    continue
                out.coeffs[p, int(k)] = tau_v[int(k)] / den * c
    return out


def relative_error(a: VshExpansion, b: VshExpansion) -> float:
    """Surface-L2 relative error |a - b| / |b|, padding the shorter one."""
    n = max(a.max_degree, b.max_degree)
    aa, bb = a.pad_to(n), b.pad_to(n)
    ref = bb.l2_norm()
    if ref == 0.0:
        raise ValueError("relative error against an identically zero reference")
    diff = VshExpansion(a.sphere_id, n, aa.coeffs - bb.coeffs)
    return diff.l2_norm() / ref


class FieldEvaluator:
    """Displacement evaluation for a solved configuration.

    In the background region the field is the sum over spheres of the
    background single-layer potentials with densities C/r nu + Sigma;
    inside a transmission sphere it is the local single-layer potential
    with density S^-1 nu (local material).  Points inside Neumann
    cavities or outside the enclosing sphere have no material and are
    rejected, as are points within 1e-10 r of any interface.
    """

    def __init__(self, config: ProblemConfig, solution: Solution, mode: str | None = None):
        self.config = config
        self.mode = solution.mode if mode is None else mode
        self.solution = solution
        self._phi: dict[int, VshExpansion] = {}
        self._inner: dict[int, VshExpansion] = {}
        for s in config.spheres:
            nu = solution.trace(s.id)
            sig = solution.sigma[s.id]
            phi = VshExpansion.zeros(s.id, nu.max_degree)
            inner = VshExpansion.zeros(s.id, nu.max_degree)
            for ell in range(nu.max_degree + 1):
                fams = (Family.V,) if ell == 0 else tuple(Family)
                for k in fams:
                    c = c_coefficient(s, config.background, ell, k, self.mode)
                    sl = slice(ell * ell, (ell + 1) * (ell + 1))
                    phi.coeffs[sl, int(k)] = (
                        c / s.frame.radius * nu.coeffs[sl, int(k)] + sig.coeffs[sl, int(k)]
                    )
                    if s.role == ROLE_TRANSMISSION:
                        tau = single_layer_eigs(ell, s.material)[int(k)]
                        inner.coeffs[sl, int(k)] = nu.coeffs[sl, int(k)] / (s.frame.radius * tau)
            self._phi[s.id] = phi
            if s.role == ROLE_TRANSMISSION:
                self._inner[s.id] = inner

    def _region_of(self, x: np.ndarray) -> int | None:
        """Sphere id containing x, or None for the background region."""
        outer = self.config.enclosing
        for s in self.config.spheres:
            rel = np.linalg.norm(x - s.frame.center_array)
            if abs(rel - s.frame.radius) < 1e-10 * s.frame.radius:
                raise ValueError(f"point {x} lies on the surface of sphere {s.id}")
            if not s.enclosing and rel < s.frame.radius:
                return s.id
        if np.linalg.norm(x - outer.frame.center_array) > outer.frame.radius:
            raise ValueError(f"point {x} lies outside the enclosing sphere")
        return None

    def displacement(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros_like(pts)
        regions = np.array([self._region_of(x) for x in pts], dtype=object)
        background = np.array([r is None for r in regions])
        if np.any(background):
            sel = pts[background]
            acc = np.zeros_like(sel)
            for s in self.config.spheres:
                acc += apply_single_layer(s.frame, self.config.background, self._phi[s.id], sel)
            out[background] = acc
        for s in self.config.spheres:
            if s.role != ROLE_TRANSMISSION:
                if not s.enclosing and any(r == s.id for r in regions):
                    raise ValueError(
                        f"point inside Neumann cavity {s.id}; displacement undefined"
                    )
                continue
            mask = np.array([r == s.id for r in regions])
            if np.any(mask):
                out[mask] = apply_single_layer(s.frame, s.material, self._inner[s.id], pts[mask])
        return out


def displacement_at(solution: Solution, config: ProblemConfig, x) -> np.ndarray:
    """Displacement at one point or an (n, 3) batch."""
    x = np.asarray(x, dtype=float)
    result = FieldEvaluator(config, solution).displacement(x)
    return result[0] if x.ndim == 1 else result


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

_FMT = "%.17g"


def export_coefficients(traces: dict[int, VshExpansion], path) -> None:
    """CSV of coefficients: sphere, ell, m, k, value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sphere", "ell", "m", "k", "value"])
        for sid in sorted(traces):
            exp = traces[sid]
            for p in range(num_scalar_modes(exp.max_degree)):
                ell, m = sh_degree_order(p)
                for k in Family:
                    writer.writerow([sid, ell, m, k.name, _FMT % exp.coeffs[p, int(k)]])


def export_field_samples(evaluator: FieldEvaluator, points: np.ndarray, path) -> None:
    """CSV of displacement samples: x, y, z, ux, uy, uz, |u|."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    u = evaluator.displacement(pts)
    mag = np.linalg.norm(u, axis=1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "ux", "uy", "uz", "umag"])
        for x, v, m in zip(pts, u, mag):
            writer.writerow([_FMT % c for c in (*x, *v, m)])


def config_digest(config: ProblemConfig) -> str:
    blob = json.dumps(config_to_dict(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def minimum_gap(config: ProblemConfig) -> float:
    """Smallest surface-to-surface distance between any two boundaries."""
    gaps = []
    outer = config.enclosing
    for s in config.spheres:
        if s.enclosing:
            continue
        gaps.append(
            outer.frame.radius
            - np.linalg.norm(s.frame.center_array - outer.frame.center_array)
            - s.frame.radius
        )
    inner = [s for s in config.spheres if not s.enclosing]
    for i, a in enumerate(inner):
        for b in inner[i + 1:]:
            gaps.append(
                float(np.linalg.norm(a.frame.center_array - b.frame.center_array))
                - a.frame.radius - b.frame.radius
            )
    return float(min(gaps)) if gaps else float("inf")


def run_manifest(
    command: str,
    config: ProblemConfig,
    mode: str,
    rule_degree: int,
    timings: dict[str, float],
    solution: Solution | None = None,
    outputs: list[str] | None = None,
) -> dict:
    gap = minimum_gap(config)
    manifest = {
        "command": command,
        "config_digest": config_digest(config),
        "spectra_mode": mode,
        "degree": config.degree,
        "rule_degree": rule_degree,
        "timings_seconds": timings,
        "minimum_gap": gap if np.isfinite(gap) else None,
        "outputs": outputs or [],
        "created_unix": time.time(),
    }
    if solution is not None:
        manifest["residual"] = solution.residual
        manifest["iterations"] = solution.iterations
        manifest["dofs"] = solution.dofmap.size
    return manifest


def write_manifest(manifest: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
