import math

import numpy as np
import pytest

from conftest import THETA
from ncsoliton.algebra import AlgebraElement, LatticeSpec, Side, trace, twisted_mul
from ncsoliton.module import l2_norm
from ncsoliton.solitons import (
    FrameError,
    GaugeError,
    charge,
    classify_gauge_to_gaussian,
    compute_b,
    dual_lattice_defect,
    energy,
    frame_bounds,
    frame_reconstruction_residual,
    gauge_inverse,
    gauge_lattice_unit,
    gauge_transform,
    lattice_distance,
    normalize,
    projection_residuals,
    rieffel_projection,
    self_duality_residual,
    soliton_report,
    tau,
    tightness_defect,
)
from ncsoliton.windows import gaussian, hyperbolic_secant

LAM = 0.4 - 0.3j
T = np.linspace(-4, 4, 81)


@pytest.fixture(scope="module")
def gauss():
    return gaussian(LAM, THETA)


@pytest.fixture(scope="module")
def parseval(gauss):
    return normalize(gauss, THETA)


@pytest.fixture(scope="module")
def proj(gauss):
    return rieffel_projection(gauss, THETA)


@pytest.fixture(scope="module")
def lat_b_mod():
    return LatticeSpec(THETA, Side.DUAL)


# -- frames --------------------------------------------------------------

def test_gaussian_frame_bounds(gauss):
    rep = frame_bounds(gauss, THETA, samples=6)
    assert rep.is_frame and 0 < rep.lower < rep.upper
    assert rep.lower <= rep.rayleigh_min and rep.rayleigh_max <= rep.upper * (1 + 1e-3)
    assert rep.drift < 1e-4
    assert not rep.tight


def test_frame_bounds_scale_quadratically(gauss):
    a = frame_bounds(gauss, THETA, radius=8, samples=0)
    b = frame_bounds(2 * gauss, THETA, radius=8, samples=0)
    assert b.lower == pytest.approx(4 * a.lower, rel=1e-12)
    assert b.upper == pytest.approx(4 * a.upper, rel=1e-12)
    assert math.isnan(a.rayleigh_min)


def test_normalized_window_is_tight(parseval):
    assert tightness_defect(parseval, THETA) < 1e-7
    assert dual_lattice_defect(parseval, THETA) < 1e-7
    assert l2_norm(parseval) ** 2 == pytest.approx(THETA, abs=1e-8)


def test_normalization_ignores_scale(gauss, parseval):
    scaled = normalize((2.5 - 1j) * gauss, THETA)
    phase = scaled(0.0) / parseval(0.0)
    assert abs(phase) == pytest.approx(1.0, abs=1e-9)
    assert np.abs(scaled(T) - phase * parseval(T)).max() < 1e-8


def test_tight_input_is_returned_unchanged(parseval):
    again = normalize(parseval, THETA)
    assert np.abs(again(T) - parseval(T)).max() < 1e-7


def test_zero_window_is_not_a_frame(gauss):
    with pytest.raises(FrameError):
        normalize(0 * gauss, THETA)


def test_parseval_reconstruction(parseval):
    f = hyperbolic_secant()
    assert frame_reconstruction_residual(parseval, f, THETA) < 1e-8


# -- projections and solitons ------------------------------------------

def test_projection_identities(proj):
    res = projection_residuals(proj, THETA)
    assert res["idempotency"] < 1e-8
    assert res["self_adjointness"] < 1e-10
    assert res["killing"] < 1e-6
    assert trace(proj) == pytest.approx(THETA, abs=1e-10)


def test_gaussian_projection_is_a_self_dual_unit_soliton(proj):
    rep = soliton_report(proj)
    assert rep.charge == pytest.approx(1.0, abs=1e-8)
    assert rep.energy == pytest.approx(4 * math.pi, abs=1e-6)
    assert abs(rep.bp_gap) < 1e-6
    assert rep.sd_residual < 1e-6 and rep.el_residual < 1e-5
    assert set(rep.to_dict()) >= {"energy", "charge", "bp_gap"}


def test_trivial_projections_carry_nothing():
    lat = LatticeSpec(THETA, Side.PRIMAL)
    for p in (AlgebraElement.identity(lat, 2), AlgebraElement.zeros(lat, 2)):
        assert energy(p) == 0.0 and charge(p) == 0.0
        assert self_duality_residual(p) == 0.0


# -- connection coefficient and gauge ------------------------------------

def test_gaussian_coefficient_is_its_eigenvalue(gauss, lat_b_mod):
    bc = compute_b(gauss, THETA)
    expected = AlgebraElement.identity(lat_b_mod, bc.b.radius) * LAM
    assert (bc.b - expected).l1() < 1e-8
    assert bc.residual < 1e-8


def test_tau_routes_agree(gauss):
    tv = tau(gauss, THETA)
    assert tv.trace == pytest.approx(LAM, abs=1e-8)
    assert tv.discrepancy < 1e-8
    assert tv.raw_pairing == pytest.approx(LAM, abs=1e-10)


def test_gauge_inverse(lat_b_mod):
    u = AlgebraElement.monomial(lat_b_mod, 2, -1, coeff=3j)
    assert (twisted_mul(gauge_inverse(u), u) - AlgebraElement.identity(lat_b_mod)).l1() < 1e-15
    v = AlgebraElement.identity(lat_b_mod, 1) + AlgebraElement.monomial(lat_b_mod, 1, 0, coeff=0.2)
    assert (twisted_mul(gauge_inverse(v), v, radius=20) - AlgebraElement.identity(lat_b_mod)).l1() < 1e-8
    singular = AlgebraElement.identity(lat_b_mod, 1) + AlgebraElement.monomial(lat_b_mod, 1, 0)
    with pytest.raises(GaugeError):
        gauge_inverse(singular)


@pytest.mark.parametrize("m, n", [(1, 0), (0, 1), (1, -2)])
def test_monomial_gauge_shifts_tau_on_the_lattice(gauss, lat_b_mod, m, n):
    u = AlgebraElement.monomial(lat_b_mod, m, n)
    res = gauge_transform(gauss, u, THETA, check_projection=False)
    assert res.b_law_residual < 1e-6
    shift = complex(trace(res.b_u)) - LAM
    assert shift == pytest.approx(-(2j * math.pi / THETA) * complex(m, n), abs=1e-8)


def test_gauge_transform_preserves_projection(gauss, lat_b_mod):
    u = AlgebraElement.monomial(lat_b_mod, 1, 1)
    res = gauge_transform(gauss, u, THETA)
    assert res.projection_residual < 1e-6
    with pytest.raises(ValueError):
        gauge_transform(gauss, AlgebraElement.identity(LatticeSpec(THETA, Side.PRIMAL)), THETA)


def test_lattice_distance():
    unit = gauge_lattice_unit(THETA)
    assert isinstance(unit, float) and unit == pytest.approx(2 * math.pi / THETA)
    assert lattice_distance(0j, unit) == (0.0, (0, 0))
    d, pt = lattice_distance(1j * unit * complex(2, -3) + 0.25, unit)
    assert pt == (2, -3) and d == pytest.approx(0.25)
    d, pt = lattice_distance(complex(0.4 * unit, 0.0), unit)
    assert pt == (0, 0) and d == pytest.approx(0.4 * unit)


def test_classifier(gauss):
    unit = gauge_lattice_unit(THETA)
    same = classify_gauge_to_gaussian(gauss, LAM, THETA)
    assert same.gaugeable and same.nearest_point == (0, 0)
    shifted = classify_gauge_to_gaussian(gauss, LAM + 1j * unit * complex(2, 3), THETA)
    assert shifted.gaugeable and shifted.nearest_point == (2, 3)
    off = classify_gauge_to_gaussian(gauss, LAM + 1.0, THETA)
    assert not off.gaugeable and off.lattice_distance == pytest.approx(1.0, abs=1e-8)
    d = off.to_dict()
    assert d["lambda"] == LAM + 1.0 and d["nearest_point"] == [0, 0]
