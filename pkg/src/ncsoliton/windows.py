"""Window functions in the Schwartz-class module and their derived vectors.

Every window is an evaluatable function on the real line with a derivative,
a pointwise decay envelope and an effective support radius.  Time-frequency
combinations, covariant derivatives and sums of windows are again windows, so
module operations can be chained without sampling to a fixed grid.
"""

from __future__ import annotations

import csv
import math
from functools import cached_property

import numpy as np
from scipy import special

SUPPORT_TOL = 1e-16
_SCAN_STEP = 0.02
_SCAN_MAX = 400.0


class WindowError(ValueError):
    pass


class Window:
    """Base class; subclasses implement ``_eval`` and ``_deriv``."""

    family = "window"
    breakpoints: tuple = ()
    smoothness = math.inf

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self._eval(t.ravel()).reshape(t.shape)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return self._deriv(t.ravel()).reshape(t.shape)

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        return self._env(t.ravel()).reshape(t.shape)

    def derivative_envelope(self, t):
        t = np.asarray(t, dtype=float)
        return self._denv(t.ravel()).reshape(t.shape)

    def _deriv(self, t):
        raise NotImplementedError(f"{type(self).__name__} has no derivative")

    def _denv(self, t):
        raise NotImplementedError(f"{type(self).__name__} has no derivative envelope")

    @cached_property
    def support_radius(self) -> float:
        """Half-width beyond which the envelope stays below ``SUPPORT_TOL``."""
        return _support_from_envelope(self._env)

    def describe(self) -> dict:
        return {"family": self.family}

    # module arithmetic
    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return LinearCombination([(1.0, self), (-1.0, other)])

    def __mul__(self, scalar):
        return LinearCombination([(complex(scalar), self)])

    __rmul__ = __mul__


def _support_from_envelope(env) -> float:
    t = np.arange(-_SCAN_MAX, _SCAN_MAX + _SCAN_STEP, _SCAN_STEP)
    big = np.nonzero(env(t) >= SUPPORT_TOL)[0]
    if big.size == 0:
        return 1.0
    r = float(max(abs(t[big[0]]), abs(t[big[-1]]))) + _SCAN_STEP
    if r >= _SCAN_MAX:
        raise WindowError("window envelope does not decay inside the scan range")
    return r


# -- concrete families ----------------------------------------------------

class Gaussian(Window):
    """Unit-norm solution of ``nabla_bar xi = lam * xi``.

    With ``nabla_1 = 2 pi i t / theta`` and ``nabla_2 = d/dt`` this is
    ``C exp(-pi t^2 / theta - i lam t)``.
    """

    family = "gaussian"

    def __init__(self, lam: complex = 0.0, theta: float = math.sqrt(2) - 1):
        if not 0.0 < theta < 1.0:
            raise WindowError("theta must lie in (0, 1)")
        self.lam = complex(lam)
        self.theta = float(theta)
        b = self.lam.imag
        self._log_c = 0.25 * math.log(2.0 / theta) - b * b * theta / (4 * math.pi)

    def _exponent(self, t):
        return -math.pi * t * t / self.theta - 1j * self.lam * t + self._log_c

    def _eval(self, t):
        return np.exp(self._exponent(t))

    def _deriv(self, t):
        return (-2 * math.pi * t / self.theta - 1j * self.lam) * self._eval(t)

    def _env(self, t):
        return np.exp(self._exponent(t).real)

    def _denv(self, t):
        return (2 * math.pi * np.abs(t) / self.theta + abs(self.lam)) * self._env(t)

    @property
    def centre(self) -> float:
        return self.lam.imag * self.theta / (2 * math.pi)

    def describe(self):
        return {"family": self.family, "lambda": self.lam, "theta": self.theta}


def gaussian(lam: complex = 0.0, theta: float = math.sqrt(2) - 1) -> Gaussian:
    return Gaussian(lam, theta)


class HyperbolicSecant(Window):
    """``sqrt(pi/2) / cosh(pi t)``, unit L2 norm."""

    family = "sech"
    _amp = math.sqrt(math.pi / 2)

    def _eval(self, t):
        return (self._amp / np.cosh(math.pi * t)).astype(complex)

    def _deriv(self, t):
        return -math.pi * np.tanh(math.pi * t) * self._eval(t)

    def _env(self, t):
        # 1/cosh(x) <= 2 exp(-|x|)
        return np.minimum(self._amp, 2 * self._amp * np.exp(-math.pi * np.abs(t)))

    def _denv(self, t):
        return math.pi * self._env(t)


def hyperbolic_secant() -> HyperbolicSecant:
    return HyperbolicSecant()


class TotallyPositive(Window):
    """Totally positive window of finite type.

    Frequency side: ``exp(-gauss w^2) exp(-2 pi i shift w) prod_j 1/(1 + 2 pi i d_j w)``.
    Time side: partial fractions turn the product into a sum of one-sided
    exponentials, each smoothed by the Gaussian factor (exponentially
    modified Gaussians evaluated through ``erfcx``).
    """

    family = "tp"

    def __init__(self, deltas, gauss: float = 0.0, shift: float = 0.0):
        deltas = tuple(float(x) for x in deltas)
        if len(deltas) < 2:
            raise WindowError("finite type needs at least two rational factors")
        if any(x == 0.0 for x in deltas):
            raise WindowError("rational factor parameters must be non-zero")
        if len(set(deltas)) != len(deltas):
            raise WindowError("rational factor parameters must be distinct")
        if gauss < 0:
            raise WindowError("gaussian factor must be non-negative")
        self.deltas = deltas
        self.gauss = float(gauss)
        self.shift = float(shift)
        self.order = len(deltas)
        self.boundary = self.order == 2
        d = np.array(deltas)
        self._weights = np.array([
            np.prod([dj / (dj - dk) for k, dk in enumerate(d) if k != j])
            for j, dj in enumerate(d)])
        self._sigma = math.sqrt(self.gauss / 2) / math.pi
        if self.gauss == 0.0:
            self.breakpoints = (self.shift,)
            self.smoothness = self.order - 2
        else:
            self.breakpoints = ()
            self.smoothness = math.inf

    def frequency_response(self, w):
        w = np.asarray(w, dtype=float)
        out = np.exp(-self.gauss * w * w - 2j * math.pi * self.shift * w)
        for dj in self.deltas:
            out = out / (1 + 2j * math.pi * dj * w)
        return out

    def _emg(self, s, delta):
        """Gaussian smoothing of the one-sided exponential with parameter ``delta``."""
        k = 1.0 / abs(delta)
        x = s if delta > 0 else -s
        sig = self._sigma
        if sig == 0.0:
            return np.where(x > 0, k * np.exp(-k * np.abs(x)), np.where(x == 0, 0.5 * k, 0.0))
        z = (k * sig * sig - x) / (sig * math.sqrt(2))
        out = np.empty_like(x)
        pos = z >= 0
        out[pos] = 0.5 * k * np.exp(-x[pos] ** 2 / (2 * sig * sig)) * special.erfcx(z[pos])
        neg = ~pos
        out[neg] = 0.5 * k * np.exp(0.5 * (k * sig) ** 2 - k * x[neg]) * special.erfc(z[neg])
        return out

    def _gauss_kernel(self, s):
        if self._sigma == 0.0:
            return np.zeros_like(s)
        sig = self._sigma
        return np.exp(-s * s / (2 * sig * sig)) / (sig * math.sqrt(2 * math.pi))

    def _eval(self, t):
        s = t - self.shift
        out = np.zeros_like(s)
        for a, dj in zip(self._weights, self.deltas):
            out += a * self._emg(s, dj)
        return out.astype(complex)

    def _deriv(self, t):
        # (G * e_d)' = (G - G * e_d) / d, and sum_j a_j / d_j = 0 for order >= 2
        s = t - self.shift
        out = np.zeros_like(s)
        g = self._gauss_kernel(s)
        for a, dj in zip(self._weights, self.deltas):
            out += a / dj * (g - self._emg(s, dj))
        return out.astype(complex)

    def _env(self, t):
        s = t - self.shift
        out = np.zeros_like(s)
        for a, dj in zip(self._weights, self.deltas):
            out += abs(a) * self._emg(s, dj)
        return out

    def _denv(self, t):
        s = t - self.shift
        out = np.zeros_like(s)
        g = self._gauss_kernel(s)
        for a, dj in zip(self._weights, self.deltas):
            out += abs(a / dj) * (g + self._emg(s, dj))
        return out

    def fft_check(self, n_points: int = 2 ** 16) -> float:
        """Relative max deviation between the closed form and a grid inverse FFT.

        Band is chosen where the frequency response falls below 1e-16 when a
        gaussian factor is present; otherwise limited by the rational decay.
        """
        if self.gauss > 0:
            band = math.sqrt(37.0 / self.gauss)
        else:
            band = 2e3
        dw = 2 * band / n_points
        w = (np.arange(n_points) - n_points // 2) * dw
        spec = self.frequency_response(w)
        dt = 1.0 / (n_points * dw)
        t = (np.arange(n_points) - n_points // 2) * dt
        # eta(t) = int spec(w) exp(2 pi i w t) dw, centred grids
        vals = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(spec))) * n_points * dw
        keep = np.abs(t) <= min(self.support_radius, t.max())
        ref = self(t[keep])
        return float(np.abs(vals[keep] - ref).max() / np.abs(ref).max())

    def describe(self):
        return {"family": self.family, "deltas": list(self.deltas), "gauss": self.gauss,
                "shift": self.shift, "boundary_order": self.boundary}


def totally_positive(deltas, gauss: float = 0.0, shift: float = 0.0) -> TotallyPositive:
    return TotallyPositive(deltas, gauss, shift)


# -- derived vectors ------------------------------------------------------

class TimeFrequencySum(Window):
    """``g(t) = sum_ij C[i, j] exp(2 pi i t w_j) base(t - x_i)``."""

    family = "tf-sum"

    def __init__(self, base: Window, shifts, freqs, coeffs, label: str = "tf-sum"):
        coeffs = np.asarray(coeffs, dtype=complex)
        shifts = np.asarray(shifts, dtype=float)
        freqs = np.asarray(freqs, dtype=float)
        rows = np.abs(coeffs).sum(axis=1) > 0
        cols = np.abs(coeffs).sum(axis=0) > 0
        self.base = base
        self.shifts = shifts[rows]
        self.freqs = freqs[cols]
        self.coeffs = coeffs[np.ix_(rows, cols)]
        self.family = label
        self.breakpoints = tuple(sorted({float(x + b) for x in self.shifts for b in base.breakpoints}))
        self.smoothness = base.smoothness
        self._row_l1 = np.abs(self.coeffs).sum(axis=1)
        self._row_wl1 = (np.abs(self.coeffs) * 2 * math.pi * np.abs(self.freqs)[None, :]).sum(axis=1)

    def _trig(self, t):
        return np.exp(2j * math.pi * np.multiply.outer(t, self.freqs)) @ self.coeffs.T

    def _eval(self, t):
        if self.shifts.size == 0:
            return np.zeros(t.shape, dtype=complex)
        vals = self.base(np.subtract.outer(t, self.shifts))
        return np.sum(vals * self._trig(t), axis=1)

    def _deriv(self, t):
        if self.shifts.size == 0:
            return np.zeros(t.shape, dtype=complex)
        pts = np.subtract.outer(t, self.shifts)
        phase = np.exp(2j * math.pi * np.multiply.outer(t, self.freqs))
        trig = phase @ self.coeffs.T
        dtrig = (phase * (2j * math.pi * self.freqs)[None, :]) @ self.coeffs.T
        return np.sum(self.base.derivative(pts) * trig + self.base(pts) * dtrig, axis=1)

    def _env(self, t):
        if self.shifts.size == 0:
            return np.zeros(t.shape)
        return self.base.envelope(np.subtract.outer(t, self.shifts)) @ self._row_l1

    def _denv(self, t):
        if self.shifts.size == 0:
            return np.zeros(t.shape)
        pts = np.subtract.outer(t, self.shifts)
        return self.base.derivative_envelope(pts) @ self._row_l1 + self.base.envelope(pts) @ self._row_wl1

    def describe(self):
        return {"family": self.family, "base": self.base.describe(), "terms": int(self.coeffs.size)}


class LinearCombination(Window):
    family = "combination"

    def __init__(self, terms):
        self.terms = [(complex(c), w) for c, w in terms]
        self.breakpoints = tuple(sorted({b for _, w in self.terms for b in w.breakpoints}))
        self.smoothness = min(w.smoothness for _, w in self.terms)

    def _eval(self, t):
        return sum(c * w(t) for c, w in self.terms)

    def _deriv(self, t):
        return sum(c * w.derivative(t) for c, w in self.terms)

    def _env(self, t):
        return sum(abs(c) * w.envelope(t) for c, w in self.terms)

    def _denv(self, t):
        return sum(abs(c) * w.derivative_envelope(t) for c, w in self.terms)


class Connection(Window):
    """``c1 * (2 pi i t / theta) f(t) + c2 * f'(t)``: the covariant derivatives."""

    family = "nabla"

    def __init__(self, base: Window, theta: float, c1: complex, c2: complex, label: str):
        self.base = base
        self.theta = float(theta)
        self.c1 = complex(c1)
        self.c2 = complex(c2)
        self.family = f"nabla_{label}"
        self.breakpoints = base.breakpoints
        self.smoothness = base.smoothness - 1

    def _eval(self, t):
        out = np.zeros(t.shape, dtype=complex)
        if self.c1:
            out += self.c1 * (2j * math.pi * t / self.theta) * self.base(t)
        if self.c2:
            out += self.c2 * self.base.derivative(t)
        return out

    def _env(self, t):
        out = np.zeros(t.shape)
        if self.c1:
            out += abs(self.c1) * 2 * math.pi * np.abs(t) / self.theta * self.base.envelope(t)
        if self.c2:
            out += abs(self.c2) * self.base.derivative_envelope(t)
        return out


class GaussianMixture(Window):
    """Finite sum of Gaussian bumps, used for random test vectors."""

    family = "gaussian-mixture"

    def __init__(self, amplitudes, centres, widths, freqs):
        self.amplitudes = np.asarray(amplitudes, dtype=complex)
        self.centres = np.asarray(centres, dtype=float)
        self.widths = np.asarray(widths, dtype=float)
        self.freqs = np.asarray(freqs, dtype=float)

    def _parts(self, t):
        s = np.subtract.outer(t, self.centres)
        bump = np.exp(-math.pi * (s / self.widths) ** 2)
        return s, bump

    def _eval(self, t):
        s, bump = self._parts(t)
        return (bump * np.exp(2j * math.pi * np.multiply.outer(t, self.freqs))) @ self.amplitudes

    def _deriv(self, t):
        s, bump = self._parts(t)
        phase = np.exp(2j * math.pi * np.multiply.outer(t, self.freqs))
        fac = -2 * math.pi * s / self.widths ** 2 + 2j * math.pi * self.freqs
        return (bump * phase * fac) @ self.amplitudes

    def _env(self, t):
        s, bump = self._parts(t)
        return bump @ np.abs(self.amplitudes)

    def _denv(self, t):
        s, bump = self._parts(t)
        fac = 2 * math.pi * np.abs(s) / self.widths ** 2 + 2 * math.pi * np.abs(self.freqs)
        return (bump * fac) @ np.abs(self.amplitudes)


def random_mixture(rng: np.random.Generator, n_bumps: int = 2) -> GaussianMixture:
    """Random Gaussian-mixture test vector (centres in [-2, 2], widths in [0.5, 1.5])."""
    amps = rng.normal(size=n_bumps) + 1j * rng.normal(size=n_bumps)
    return GaussianMixture(amps, rng.uniform(-2, 2, n_bumps), rng.uniform(0.5, 1.5, n_bumps),
                   rng.uniform(-1.5, 1.5, n_bumps))


def closed_form_gaussian_stft(f: Gaussian, g: Gaussian, x, w):
    """Analytic ``int f(t) exp(-2 pi i t w) conj(g(t - x)) dt`` for two Gaussians."""
    if not (isinstance(f, Gaussian) and isinstance(g, Gaussian)):
        raise WindowError("closed form needs two Gaussian windows")
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    # f = exp(-a t^2 - i lf t + cf), conj(g(t-x)) = exp(-b (t-x)^2 + i conj(lg)(t-x) + cg)
    a = math.pi / f.theta
    b = math.pi / g.theta
    lf, lg = f.lam, np.conj(g.lam)
    lin = -1j * lf + 2 * b * x + 1j * lg - 2j * math.pi * w
    const = f._log_c + g._log_c - b * x * x - 1j * lg * x
    s = a + b
    return np.sqrt(math.pi / s) * np.exp(lin * lin / (4 * s) + const)


def dump_samples(window: Window, path, t) -> None:
    t = np.asarray(t, dtype=float)
    vals = window(t)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "re", "im"])
        for ti, v in zip(t, vals):
            out.writerow([repr(float(ti)), repr(float(v.real)), repr(float(v.imag))])
