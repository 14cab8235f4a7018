"""The equivalence bimodule between A and B realized on Schwartz functions.

Conventions (the A-valued product is linear in its first argument, the
B-valued one in its second):

* ``A<f, g>(m, n) = <f, pi(m theta, n) g>``
* ``<f, g>_B(k, l) = theta^-1 <pi(k, l/theta) g, f>``
* ``a . f = sum a(m, n) pi(m theta, n) f``
* ``f . b = sum b(k, l) pi(k, l/theta)^* f``

With these placements ``f . 1_B = f`` and ``A<f, g> . h = f . <g, h>_B`` hold
exactly (Janssen's representation of the mixed frame operator).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, LatticeSpec, Side
from .windows import Connection, TimeFrequencySum, Window

DEFAULT_HALF_WIDTH = 12.0
DEFAULT_NODES = 8192
RADIUS_TOL = 1e-10
MAX_RADIUS = 64


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration rule on ``[-T, T]``; ``half_width=None`` follows the window support."""

    half_width: float | None = None
    nodes: int = DEFAULT_NODES
    rule: str = "trapezoid"
    tol: float = 1e-12
    panel_order: int = 16

    def resolve(self, *windows: Window) -> "QuadratureSpec":
        if self.half_width is not None:
            return self
        t = max([DEFAULT_HALF_WIDTH] + [w.support_radius for w in windows])
        return QuadratureSpec(math.ceil(t), self.nodes, self.rule, self.tol, self.panel_order)

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(self.half_width, 2 * self.nodes, self.rule, self.tol, self.panel_order)

    def nodes_weights(self, breakpoints=()):
        T = float(self.half_width)
        if self.rule == "trapezoid" and not breakpoints:
            t = np.linspace(-T, T, self.nodes)
            w = np.full(self.nodes, t[1] - t[0])
            w[0] = w[-1] = 0.5 * (t[1] - t[0])
            return t, w
        # Gauss-Legendre panels with the kinks as panel edges
        n_panels = max(1, self.nodes // self.panel_order)
        edges = np.linspace(-T, T, n_panels + 1)
        cuts = [b for b in breakpoints if -T < b < T]
        edges = np.unique(np.concatenate([edges, cuts]))
        x, wq = np.polynomial.legendre.leggauss(self.panel_order)
        lo, hi = edges[:-1, None], edges[1:, None]
        t = (0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)).ravel()
        w = (0.5 * (hi - lo) * wq[None, :]).ravel()
        return t, w

    def as_dict(self):
        return {"half_width": self.half_width, "nodes": self.nodes, "rule": self.rule,
                "tol": self.tol}


def _needs_panels(f: Window, g: Window) -> bool:
    return bool(f.breakpoints or g.breakpoints)


def stft_table(f: Window, g: Window, shifts, freqs, quad: QuadratureSpec | None = None) -> np.ndarray:
    """``V[i, j] = int f(t) exp(-2 pi i t w_j) conj(g(t - x_i)) dt``."""
    quad = (quad or QuadratureSpec()).resolve(f)
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    out = np.empty((shifts.size, freqs.size), dtype=complex)
    if not _needs_panels(f, g):
        t, w = quad.nodes_weights()
        fw = f(t) * w
        kern = np.exp(-2j * math.pi * np.multiply.outer(t, freqs))
        for i, x in enumerate(shifts):
            out[i] = (fw * np.conj(g(t - x))) @ kern
        return out
    for i, x in enumerate(shifts):
        brk = tuple(f.breakpoints) + tuple(x + b for b in g.breakpoints)
        t, w = quad.nodes_weights(brk)
        kern = np.exp(-2j * math.pi * np.multiply.outer(t, freqs))
        out[i] = (f(t) * w * np.conj(g(t - x))) @ kern
    return out


def stft(f: Window, g: Window, x: float, w: float, quad: QuadratureSpec | None = None) -> complex:
    """``V_g f(x, w) = <f, pi(x, w) g>``."""
    return complex(stft_table(f, g, [x], [w], quad)[0, 0])


def l2_inner(f: Window, g: Window, quad: QuadratureSpec | None = None) -> complex:
    return stft(f, g, 0.0, 0.0, quad)


def l2_norm(f: Window, quad: QuadratureSpec | None = None) -> float:
    return math.sqrt(max(l2_inner(f, f, quad).real, 0.0))


def _grid(radius: int):
    return np.arange(-radius, radius + 1)


def _weighted_excess(c: np.ndarray, r: int) -> float:
    """Largest ``|c| (1 + |idx|)`` outside the box of radius ``r``, relative to max |c|.

    A per-entry test rather than a sum: quadrature leaves a ~1e-16 floor on
    every coefficient, which would make any summed tail grow with the box.
    """
    R = (c.shape[0] - 1) // 2
    k = _grid(R)
    mm, nn = np.meshgrid(k, k, indexing="ij")
    outside = (np.abs(mm) > r) | (np.abs(nn) > r)
    if not outside.any():
        return 0.0
    weight = 1.0 + np.maximum(np.abs(mm), np.abs(nn))
    return float((np.abs(c) * weight)[outside].max() / np.abs(c).max())


def _predict_radius(c: np.ndarray, tol: float) -> int | None:
    """Radius where the ring maxima, fitted as exponential decay, fall below ``tol``."""
    R = (c.shape[0] - 1) // 2
    k = _grid(R)
    ring = np.maximum.outer(np.abs(k), np.abs(k))
    peaks = np.array([np.abs(c)[ring == d].max() for d in range(R + 1)]) / np.abs(c).max()
    d = np.arange(R // 2, R + 1)
    slope, icept = np.polyfit(d, np.log(peaks[d] * (1 + d) + 1e-300), 1)
    if slope >= 0:
        return None
    return int(math.ceil((math.log(tol) - icept) / slope))


def _auto_table(build, start: int = 16, tol: float = RADIUS_TOL):
    """Grow a probe radius until the outer ring is negligible, then crop.

    After a failed probe the next radius comes from the fitted ring decay, so
    typically only two tables are built.
    """
    probe = start
    while True:
        c = build(probe)
        ring = _weighted_excess(c, probe - 2)
        if ring < tol or probe >= MAX_RADIUS:
            break
        guess = _predict_radius(c, tol)
        step = probe + 8 if guess is None else max(probe + 4, guess + 4)
        probe = min(MAX_RADIUS, step)
    if ring >= tol:
        raise QuadratureError(f"coefficients still {ring:.3g} at radius {probe}")
    r = 1
    while _weighted_excess(c, r) >= tol:
        r += 1
    s = slice(probe - r, probe + r + 1)
    return c[s, s], r


def inner_A(f: Window, g: Window, theta: float, radius: int | str = "auto",
            quad: QuadratureSpec | None = None, radius_tol: float = RADIUS_TOL) -> AlgebraElement:
    lat = LatticeSpec(theta, Side.PRIMAL)

    def build(r):
        k = _grid(r)
        return stft_table(f, g, k * lat.theta, k, quad)

    if radius == "auto":
        c, _ = _auto_table(build, tol=radius_tol)
    else:
        c = build(int(radius))
    return AlgebraElement(lat, c)


def inner_B(f: Window, g: Window, theta: float, radius: int | str = 12,
            quad: QuadratureSpec | None = None, radius_tol: float = RADIUS_TOL) -> AlgebraElement:
    lat = LatticeSpec(theta, Side.DUAL)

    def build(r):
        k = _grid(r)
        return np.conj(stft_table(f, g, k.astype(float), k / lat.theta, quad)) / lat.theta

    if radius == "auto":
        c, _ = _auto_table(build, start=4, tol=radius_tol)
    else:
        c = build(int(radius))
    return AlgebraElement(lat, c)


def act_A(a: AlgebraElement, f: Window) -> Window:
    if a.side is not Side.PRIMAL:
        raise ValueError("act_A needs an element of A")
    k = _grid(a.radius)
    return TimeFrequencySum(f, k * a.lattice.theta, k.astype(float), a.coeffs, label="A-action")


def act_B(f: Window, b: AlgebraElement) -> Window:
    if b.side is not Side.DUAL:
        raise ValueError("act_B needs an element of B")
    k = _grid(b.radius)
    theta = b.lattice.theta
    if isinstance(f, TimeFrequencySum):
        return _compose_B(f, b)
    # pi(k, l/theta)^* f (t) = exp(-2 pi i k l/theta) exp(-2 pi i t l/theta) f(t + k)
    phase = np.exp(-2j * math.pi * np.multiply.outer(k, k) / theta)
    return TimeFrequencySum(f, -k.astype(float), -k / theta, b.coeffs * phase, label="B-action")


def _merge_axis(values, digits: int = 9):
    """Unique sorted grid and the index of every entry of ``values`` in it."""
    keys = np.round(values, digits)
    _, first, inverse = np.unique(keys.ravel(), return_index=True, return_inverse=True)
    # keep exact values as representatives; the rounded keys only group them
    return values.ravel()[first], inverse.reshape(values.shape)


def _compose_B(h: TimeFrequencySum, b: AlgebraElement) -> TimeFrequencySum:
    """Flatten ``h . b`` into one sum over the base of ``h`` (no nested evaluation)."""
    theta = b.lattice.theta
    k = _grid(b.radius).astype(float)
    lw = k / theta
    # new shift x_i - k, new frequency w_j - l/theta
    xs, ix = _merge_axis(np.subtract.outer(h.shifts, k))
    ws, iw = _merge_axis(np.subtract.outer(h.freqs, lw))
    # coefficient b(k, l) C[i, j] exp(-2 pi i k l/theta) exp(2 pi i k w_j)
    kl = np.exp(-2j * math.pi * np.multiply.outer(k, lw))
    kw = np.exp(2j * math.pi * np.multiply.outer(k, h.freqs))
    term = (b.coeffs * kl)[None, None, :, :] * h.coeffs[:, :, None, None] * kw.T[None, :, :, None]
    rows = np.broadcast_to(ix[:, None, :, None], term.shape)
    cols = np.broadcast_to(iw[None, :, None, :], term.shape)
    out = np.zeros((xs.size, ws.size), dtype=complex)
    np.add.at(out, (rows.ravel(), cols.ravel()), term.ravel())
    return TimeFrequencySum(h.base, xs, ws, out, label="B-action")


_NABLA = {"1": (1.0, 0.0), "2": (0.0, 1.0), "bar": (1.0, 1j), "holo": (1.0, -1j)}


def nabla(f: Window, which, theta: float) -> Window:
    """Covariant derivatives ``nabla_1 = 2 pi i t/theta``, ``nabla_2 = d/dt`` and
    ``nabla_bar = nabla_1 + i nabla_2``, ``nabla = nabla_1 - i nabla_2``."""
    key = str(which)
    if key not in _NABLA:
        raise ValueError(f"unknown connection {which!r}")
    c1, c2 = _NABLA[key]
    return Connection(f, theta, c1, c2, key)


def l2_distance(f: Window, g: Window, quad: QuadratureSpec | None = None) -> float:
    diff = f - g
    q = (quad or QuadratureSpec()).resolve(f, g)
    return l2_norm(diff, q)


def dump_stft_table(table: np.ndarray, path, shifts, freqs) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["x", "w", "re", "im"])
        for i, x in enumerate(shifts):
            for j, w in enumerate(freqs):
                v = table[i, j]
                out.writerow([repr(float(x)), repr(float(w)), repr(float(v.real)), repr(float(v.imag))])
