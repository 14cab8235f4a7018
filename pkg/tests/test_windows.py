import csv
import math

import numpy as np
import pytest
from scipy import integrate

from conftest import THETA
from ncsoliton.module import QuadratureSpec, l2_norm, nabla
from ncsoliton.windows import (
    LinearCombination,
    TimeFrequencySum,
    WindowError,
    dump_samples,
    gaussian,
    hyperbolic_secant,
    random_mixture,
    totally_positive,
)

T = np.linspace(-3.0, 3.0, 241)


def _finite_difference(w, t, h=1e-5):
    return (w(t + h) - w(t - h)) / (2 * h)


@pytest.mark.parametrize("lam", [0.0, 0.7, -1.3j, 0.4 + 2.0j])
def test_gaussian_is_unit_norm_eigenvector(lam):
    g = gaussian(lam, THETA)
    assert l2_norm(g) == pytest.approx(1.0, abs=1e-12)
    lhs = nabla(g, "bar", THETA)(T)
    assert np.abs(lhs - lam * g(T)).max() < 1e-12 * np.abs(g(T)).max() * max(1.0, abs(lam)) * 10


def test_gaussian_centre_follows_imaginary_part():
    g = gaussian(2.0j, THETA)
    t = np.linspace(-2, 2, 4001)
    assert t[np.argmax(np.abs(g(t)))] == pytest.approx(g.centre, abs=1e-3)


def test_secant_normalization_and_symmetry():
    s = hyperbolic_secant()
    assert l2_norm(s) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(s(T), s(-T), atol=0)
    assert s(0.0) == pytest.approx(math.sqrt(math.pi / 2))


WINDOWS = {
    "gaussian": lambda: gaussian(0.3 - 0.5j, THETA),
    "sech": hyperbolic_secant,
    "tp-smooth": lambda: totally_positive((0.5, -0.25), gauss=0.1),
    "tp-order3": lambda: totally_positive((0.5, -0.25, 0.8)),
    "mixture": lambda: random_mixture(np.random.default_rng(3)),
    "tf-sum": lambda: TimeFrequencySum(hyperbolic_secant(), [0.0, 1.0], [0.0, -2.0],
                                       [[1.0, 0.5j], [0.25, -0.1]]),
    "combination": lambda: LinearCombination([(1.0, hyperbolic_secant()), (0.5j, gaussian(0, THETA))]),
}


@pytest.mark.parametrize("name", sorted(WINDOWS))
def test_derivative_matches_finite_difference(name):
    w = WINDOWS[name]()
    t = T[np.abs(T) > 0.05]  # stay off any kink at the origin
    fd = _finite_difference(w, t)
    assert np.abs(w.derivative(t) - fd).max() < 1e-7 * max(1.0, np.abs(fd).max())


@pytest.mark.parametrize("name", sorted(WINDOWS))
def test_envelopes_dominate(name):
    w = WINDOWS[name]()
    t = np.linspace(-15, 15, 3001)
    assert np.all(np.abs(w(t)) <= w.envelope(t) * (1 + 1e-12) + 1e-300)
    assert np.all(np.abs(w.derivative(t)) <= w.derivative_envelope(t) * (1 + 1e-9) + 1e-300)
    r = w.support_radius
    far = np.array([r + 0.5, -(r + 0.5)])
    assert np.all(w.envelope(far) < 1e-16)


def test_nabla_components():
    g = hyperbolic_secant()
    n1, n2 = nabla(g, 1, THETA)(T), nabla(g, 2, THETA)(T)
    assert np.allclose(n1, 2j * math.pi * T / THETA * g(T), atol=1e-14)
    assert np.allclose(n2, g.derivative(T), atol=1e-14)
    assert np.allclose(nabla(g, "bar", THETA)(T), n1 + 1j * n2, atol=1e-14)
    assert np.allclose(nabla(g, "holo", THETA)(T), n1 - 1j * n2, atol=1e-14)
    with pytest.raises(ValueError):
        nabla(g, 3, THETA)


def _inverse_fourier(w, t, band):
    """Direct trapezoid evaluation of ``int W(v) exp(2 pi i v t) dv``."""
    v = np.linspace(-band, band, 40001)
    vals = w.frequency_response(v)[None, :] * np.exp(2j * math.pi * np.multiply.outer(t, v))
    return np.trapezoid(vals, v, axis=1) if hasattr(np, "trapezoid") else np.trapz(vals, v, axis=1)


def test_tp_closed_form_against_fourier_inversion():
    w = totally_positive((0.5, -0.25), gauss=0.1)
    t = np.linspace(-2, 2, 41)
    ref = _inverse_fourier(w, t, band=20.0)  # exp(-0.1 v^2) < 1e-17 beyond |v| = 20
    assert np.abs(w(t) - ref).max() < 1e-10


def test_tp_closed_form_against_fft():
    assert totally_positive((0.5, -0.25), gauss=0.1).fft_check() < 1e-10
    assert totally_positive((0.4, -0.3, 0.7), gauss=0.25, shift=0.2).fft_check() < 1e-10


def test_tp_order_two_is_convolution_of_exponentials():
    # 1/(1 + 2 pi i d w) <-> exp(-t/d)/d on t/d > 0; the product is a convolution
    d1, d2 = 0.5, -0.25
    w = totally_positive((d1, d2))

    def one_sided(s, d):
        return math.exp(-s / d) / abs(d) if s / d > 0 else 0.0

    for t in (-1.3, -0.2, 0.1, 0.7, 2.0):
        # support of the integrand: s > 0 and t - s < 0
        ref = integrate.quad(lambda s: one_sided(s, d1) * one_sided(t - s, d2),
                             max(0.0, t), np.inf, epsabs=1e-14, epsrel=1e-13)[0]
        assert w(t).real == pytest.approx(ref, abs=1e-12)
    assert w.breakpoints == (0.0,) and w.boundary
    assert w.smoothness == 0


def test_tp_kernel_is_totally_positive(rng):
    w = totally_positive((0.5, -0.25, 0.8), gauss=0.05)
    for _ in range(200):
        x = np.sort(rng.uniform(-2, 2, 3))
        y = np.sort(rng.uniform(-2, 2, 3))
        kernel = w(np.subtract.outer(x, y)).real
        assert np.linalg.det(kernel) >= -1e-14
        assert np.linalg.det(kernel[:2, :2]) >= -1e-14
    assert np.all(w(np.linspace(-3, 3, 61)).real > 0)


def test_tp_unit_integral():
    # frequency response at 0 is 1
    w = totally_positive((0.5, -0.25), gauss=0.1)
    q = QuadratureSpec(half_width=40.0, nodes=2 ** 15)
    t, wt = q.nodes_weights()
    assert np.sum(w(t) * wt).real == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("args", [((0.5,), 0.0), ((0.5, 0.0), 0.0), ((0.5, 0.5), 0.0),
                                  ((0.5, -0.25), -1.0)])
def test_tp_validation(args):
    with pytest.raises(WindowError):
        totally_positive(*args)


def test_gaussian_validation():
    with pytest.raises(WindowError):
        gaussian(0.0, 1.5)


def test_random_mixture_is_reproducible():
    a = random_mixture(np.random.default_rng(9))
    b = random_mixture(np.random.default_rng(9))
    assert np.array_equal(a(T), b(T))


def test_window_arithmetic():
    s, g = hyperbolic_secant(), gaussian(0, THETA)
    assert np.allclose((s + g)(T), s(T) + g(T))
    assert np.allclose((s - 2 * g)(T), s(T) - 2 * g(T))
    tf = TimeFrequencySum(s, [1.5], [2.0], [[0.5j]])
    assert np.allclose(tf(T), 0.5j * np.exp(4j * math.pi * T) * s(T - 1.5))


def test_dump_samples(tmp_path):
    path = tmp_path / "sech.csv"
    t = np.linspace(-1, 1, 5)
    dump_samples(hyperbolic_secant(), path, t)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "re", "im"]
    assert float(rows[3][1]) == pytest.approx(math.sqrt(math.pi / 2))
