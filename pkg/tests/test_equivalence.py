import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_rays
from fisheyekit.equivalence import (
    TABLE1_OMEGAS,
    division_to_stereographic,
    double_sphere_to_ucm,
    equidistant_composite,
    fov_to_equidistant,
    general_perspective_to_ucm,
    stereographic_to_division,
    table1,
    ucm_to_general_perspective,
    verify_equivalence,
    verify_projection_pointwise,
)
from fisheyekit.errors import DomainError, ParameterError
from fisheyekit.models import (
    UCM,
    DoubleSphere,
    Equidistant,
    FieldOfView,
    GeneralPerspective,
    Pinhole,
    Stereographic,
)

# Reference (f_p, f_e) per omega, three decimals.
TABLE1_REFERENCE = {0.93: (0.997, 1.075), 0.92: (1.009, 1.087), 0.95: (0.972, 1.053), 0.90: (1.035, 1.111)}


@pytest.mark.parametrize("omega", TABLE1_OMEGAS)
def test_fov_to_equidistant_matches_table(omega):
    f_p, f_e = fov_to_equidistant(omega)
    assert (round(f_p, 3), round(f_e, 3)) == TABLE1_REFERENCE[omega]


@pytest.mark.parametrize("omega", [0.0, -0.1, math.pi, 4.0, math.nan])
def test_fov_to_equidistant_rejects_bad_omega(omega):
    with pytest.raises(DomainError):
        fov_to_equidistant(omega)


def test_table1_rows_within_tolerance():
    rows = table1()
    assert [row.omega for row in rows] == list(TABLE1_OMEGAS)
    for row in rows:
        assert row.max_abs_error <= 1e-12


def test_fov_composite_reproduces_fov_onimage_map():
    # the composite is an equidistant camera undistorted to a pinhole of focal f_p
    omega = 0.93
    f_p, f_e = fov_to_equidistant(omega)
    comp = equidistant_composite(f_p, f_e)
    r_d = np.linspace(0.0, 1.4, 200)
    np.testing.assert_allclose(comp.onimage_undistort(r_d), f_p * np.tan(r_d / f_e), rtol=1e-14)
    np.testing.assert_allclose(
        FieldOfView(omega, 1.0).onimage_undistort(r_d), np.tan(omega * r_d) / (2 * math.tan(omega / 2)), rtol=1e-13
    )


def test_stereographic_to_division_examples():
    assert stereographic_to_division(1.0).a == 0.25
    assert stereographic_to_division(0.5).a == 1.0
    with pytest.raises(ParameterError):
        stereographic_to_division(0.0)


def test_stereographic_division_explicit_grid():
    report = verify_equivalence(Stereographic(1.0), stereographic_to_division(1.0), grid=np.linspace(0, 1.9, 1000))
    assert report.mode == "onimage"
    assert report.max_abs_error <= 1e-13


@pytest.mark.parametrize("f", [0.5, 1.0, 2.0])
def test_stereographic_division_projection_forms_agree(f, rng):
    div = stereographic_to_division(f)
    rays = random_rays(Stereographic(f), 2000, rng, fraction=0.49)  # division projection is pinhole-based
    assert verify_projection_pointwise(Stereographic(f), div, rays) <= 1e-12 * max(1.0, 1 / f)


@given(st.floats(0.05, 20.0))
@settings(max_examples=50, deadline=None)
def test_stereographic_division_round_trip(f):
    a = stereographic_to_division(f).a
    assert division_to_stereographic(a).f == pytest.approx(f, rel=1e-15)


def test_general_perspective_examples():
    ucm = general_perspective_to_ucm(2.0, 1.0, 1.0)
    assert (ucm.alpha, ucm.f) == (0.5, 1.0)
    ucm = general_perspective_to_ucm(1.0, 1.0, 0.0)
    assert (ucm.alpha, ucm.f) == (0.0, 1.0)
    ucm = general_perspective_to_ucm(3.0, 2.0, 1.0)
    assert ucm.alpha == pytest.approx(1 / 3, abs=1e-15)
    assert ucm.f == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("params", [(2.0, 1.0, 1.0), (1.0, 1.0, 0.0), (3.0, 2.0, 1.0), (2.5, 0.7, 2.0)])
def test_general_perspective_to_ucm_pointwise(params, rng):
    # oracle: point scaled onto the sphere, then an offset pinhole
    f_p, f_s, d = params
    ucm = general_perspective_to_ucm(f_p, f_s, d)
    rays = random_rays(ucm, 2000, rng, fraction=0.95) * rng.uniform(0.5, 5.0, (2000, 1))
    on_sphere = f_s * rays / np.linalg.norm(rays, axis=1, keepdims=True)
    oracle = f_p * on_sphere[:, :2] / (on_sphere[:, 2:] + d)
    assert np.max(np.abs(ucm.project_plane(rays) - oracle)) <= 1e-12 * max(1.0, np.abs(oracle).max())


def test_gp_stereographic_composition():
    ucm = general_perspective_to_ucm(2.0, 1.0, 1.0)
    assert verify_equivalence(ucm, Stereographic(1.0)).max_abs_error <= 1e-12


def test_ucm_general_perspective_round_trip():
    gp = ucm_to_general_perspective(0.6, 1.2, f_s=1.5)
    back = gp.to_ucm()
    assert back.alpha == pytest.approx(0.6, rel=1e-15)
    assert back.f == pytest.approx(1.2, rel=1e-15)


def test_double_sphere_to_ucm():
    ucm = double_sphere_to_ucm(DoubleSphere(0.0, 0.4, 1.0))
    assert ucm == UCM(0.4, 1.0)
    with pytest.raises(ParameterError):
        double_sphere_to_ucm(DoubleSphere(0.1, 0.4, 1.0))


def test_double_sphere_vs_ucm_report():
    report = verify_equivalence(DoubleSphere(0.0, 0.4, 1.0), UCM(0.4, 1.0))
    assert report.mode == "projection"
    assert report.max_abs_error <= 1e-12
    assert report.grid_size == 1000
    assert report.theta_max_tested == pytest.approx(0.99 * UCM(0.4, 1.0).theta_max())


def test_model_against_itself_is_exact():
    for model in (Equidistant(1.0), FieldOfView(0.9, 1.0), UCM(0.3, 1.0)):
        assert verify_equivalence(model, model).max_abs_error == 0.0


def test_verification_is_symmetric():
    pairs = [
        (FieldOfView(0.93, 1.0), equidistant_composite(*fov_to_equidistant(0.93))),
        (Stereographic(0.7), stereographic_to_division(0.7)),
        (UCM(0.5, 1.0), Stereographic(1.0)),
    ]
    for a, b in pairs:
        assert verify_equivalence(a, b).max_abs_error == verify_equivalence(b, a).max_abs_error


def test_grid_outside_domain_raises():
    with pytest.raises(DomainError):
        verify_equivalence(UCM(0.0, 1.0), Pinhole(1.0), grid=np.linspace(0, 2.0, 10))
    with pytest.raises(DomainError):
        verify_equivalence(Stereographic(1.0), stereographic_to_division(1.0), grid=np.linspace(0, 2.0, 10))


def test_distinct_models_are_detected():
    assert verify_equivalence(Equidistant(1.0), Stereographic(1.0)).max_abs_error > 1e-3


def test_unbounded_shared_domain_needs_explicit_grid():
    with pytest.raises(DomainError):
        verify_equivalence(Pinhole(1.0), UCM(0.0, 1.0), mode="onimage")
    report = verify_equivalence(Pinhole(1.0), UCM(0.0, 1.0), grid=np.linspace(0, 50.0, 100), mode="onimage")
    assert report.max_abs_error <= 1e-12


def test_general_perspective_far_sphere_approaches_pinhole():
    gp = GeneralPerspective(f_p=1.5, f_s=1e8, d=1.0)
    report = verify_equivalence(gp, Pinhole(1.5), grid=np.linspace(0.0, 1.2, 500))
    assert report.max_abs_error <= 1e-6
