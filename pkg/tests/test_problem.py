import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from elastisph.harmonics import Family
from elastisph.materials import LameParams, lambda_to_poisson, poisson_to_lambda
from elastisph.presets import three_sphere_config
from elastisph.problem import (
    BoundaryData,
    ProblemConfig,
    SphereSpec,
    ValidationError,
    build_sigma,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
    validate,
)
from elastisph.quadrature import SphereFrame

SQPI = np.sqrt(np.pi)


def single_neumann(data=None, degree=3):
    return ProblemConfig(
        spheres=(SphereSpec(id=1, frame=SphereFrame((0.0, 0.0, 0.0), 1.0), role="neumann",
                            enclosing=True, data=data or BoundaryData(kind="zero")),),
        background=LameParams(1.0, 1.0), degree=degree)


class TestPoissonConversion:
    def test_golden(self):
        assert poisson_to_lambda(1 / 6, 1.0) == pytest.approx(0.5, rel=1e-14)
        assert lambda_to_poisson(1.0, 1.0) == pytest.approx(0.25, rel=1e-14)

    def test_limit_toward_minus_one(self):
        assert poisson_to_lambda(-1 + 1e-9, 1.0) == pytest.approx(-2 / 3, abs=1e-8)

    def test_roundtrip(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            nu = float(rng.uniform(-0.99, 0.499))
            mu = float(10.0 ** rng.uniform(-1, 1))
            assert lambda_to_poisson(poisson_to_lambda(nu, mu), mu) == pytest.approx(nu, abs=1e-14)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            poisson_to_lambda(0.5, 1.0)
        with pytest.raises(ValueError):
            poisson_to_lambda(-1.0, 1.0)

    def test_material_admissibility(self):
        with pytest.raises(ValueError):
            LameParams(-1.0, 1.0)
        with pytest.raises(ValueError):
            LameParams(1.0, -0.7)  # 2 mu + 3 lam < 0


class TestValidation:
    def test_table3_valid(self):
        cfg = three_sphere_config(4)
        assert validate(cfg) is cfg

    def test_validate_idempotent(self):
        cfg = three_sphere_config(4)
        validate(cfg)
        validate(cfg)

    def test_overlap(self):
        cfg = ProblemConfig(
            spheres=(
                SphereSpec(id=1, frame=SphereFrame((0.0, 0.0, 0.0), 0.1), role="neumann"),
                SphereSpec(id=2, frame=SphereFrame((0.15, 0.0, 0.0), 0.1), role="neumann"),
                SphereSpec(id=3, frame=SphereFrame((0.0, 0.0, 0.0), 2.0), role="neumann",
                           enclosing=True),
            ),
            background=LameParams(1.0, 1.0), degree=2)
        with pytest.raises(ValidationError, match="overlap"):
            validate(cfg)

    def test_escape(self):
        cfg = ProblemConfig(
            spheres=(
                SphereSpec(id=1, frame=SphereFrame((1.95, 0.0, 0.0), 0.1), role="neumann"),
                SphereSpec(id=2, frame=SphereFrame((0.0, 0.0, 0.0), 2.0), role="neumann",
                           enclosing=True),
            ),
            background=LameParams(1.0, 1.0), degree=2)
        with pytest.raises(ValidationError, match="strictly inside"):
            validate(cfg)

    def test_missing_enclosing(self):
        cfg = ProblemConfig(
            spheres=(SphereSpec(id=1, frame=SphereFrame((0.0, 0.0, 0.0), 1.0),
                                role="neumann"),),
            background=LameParams(1.0, 1.0), degree=2)
        with pytest.raises(ValidationError, match="enclosing"):
            validate(cfg)

    def test_transmission_needs_material(self):
        cfg = ProblemConfig(
            spheres=(
                SphereSpec(id=1, frame=SphereFrame((0.0, 0.0, 0.0), 0.5), role="transmission"),
                SphereSpec(id=2, frame=SphereFrame((0.0, 0.0, 0.0), 2.0), role="neumann",
                           enclosing=True),
            ),
            background=LameParams(1.0, 1.0), degree=2)
        with pytest.raises(ValidationError, match="material"):
            validate(cfg)

    def test_sign_bookkeeping(self):
        cfg = three_sphere_config(3)
        signs = [s.sign for s in cfg.spheres]
        assert signs.count(-1) == 1
        assert cfg.enclosing.sign == -1

    def test_net_load_warning(self):
        data = BoundaryData(kind="coeffs", coeffs=((1, 1, int(Family.W), 1.0),))
        cfg = single_neumann(data)
        with pytest.warns(UserWarning, match="net force"):
            validate(cfg)


class TestBuildSigma:
    def test_radial_monopole(self):
        cfg = single_neumann(BoundaryData(kind="linear", scale=-1.0))
        sigma = build_sigma(cfg)[1]
        assert sigma.get(0, 0, Family.V) == pytest.approx(2 * SQPI, rel=1e-12)
        rest = sigma.coeffs.copy()
        rest[0, 0] = 0.0
        assert np.max(np.abs(rest)) < 1e-12

    def test_zero_data(self):
        cfg = three_sphere_config(3)
        sigma = build_sigma(cfg)
        assert np.all(sigma[1].coeffs == 0.0)

    def test_linearity(self):
        d1 = BoundaryData(kind="linear", scale=-1.0)
        d2 = BoundaryData(kind="linear", scale=-2.0)
        s1 = build_sigma(single_neumann(d1))[1]
        s2 = build_sigma(single_neumann(d2))[1]
        assert_allclose(s2.coeffs, 2 * s1.coeffs, atol=1e-14)

    def test_piecewise_has_slow_decay(self):
        cfg = single_neumann(BoundaryData(kind="piecewise_sign", vector=(1.0, 0, 0)),
                             degree=8)
        sigma = build_sigma(cfg)[1]
        low = np.abs(sigma.coeffs[: 9]).max()
        high = np.abs(sigma.coeffs[49:]).max()
        assert low > 0.1
        assert high > 1e-4  # discontinuous data keeps significant high content

    def test_coeff_data_passthrough_and_truncation(self):
        data = BoundaryData(kind="coeffs",
                            coeffs=((2, -1, int(Family.X), 0.7), (9, 0, 0, 5.0)))
        cfg = single_neumann(data, degree=3)
        sigma = build_sigma(cfg)[1]
        assert sigma.get(2, -1, Family.X) == 0.7
        assert sigma.max_degree == 3  # the l=9 entry is Galerkin-truncated


class TestJsonRoundtrip:
    def test_roundtrip(self, tmp_path):
        cfg = three_sphere_config(5, "piecewise")
        path = tmp_path / "config.json"
        save_config(cfg, path)
        loaded = load_config(path)
        assert config_to_dict(loaded) == config_to_dict(cfg)
        assert loaded.spheres[0].material == cfg.spheres[0].material
        assert loaded.quad_margin == cfg.quad_margin

    def test_schema_fields(self):
        d = config_to_dict(three_sphere_config(4))
        assert set(d) == {"background", "degree", "quad_margin", "solver", "spheres"}
        assert {"mu", "lambda"} <= set(d["background"])
        sphere = d["spheres"][0]
        assert {"id", "center", "radius", "role", "enclosing", "data"} <= set(sphere)

    def test_unknown_data_kind(self):
        with pytest.raises(ValueError, match="unknown data kind"):
            BoundaryData(kind="mystery")

    def test_from_dict_solver_options(self):
        d = config_to_dict(three_sphere_config(4))
        d["solver"] = {"method": "iterative", "tol": 1e-8, "max_iter": 50}
        cfg = config_from_dict(d)
        assert cfg.solver.method == "iterative"
        assert cfg.solver.tol == 1e-8
