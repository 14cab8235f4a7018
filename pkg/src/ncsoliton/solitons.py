"""Frames, Parseval normalization, Rieffel projections and soliton diagnostics.

Module vectors are plain :class:`~ncsoliton.windows.Window` objects together
with the deformation parameter ``theta``.  Every quantity is computed on a
truncated lattice; radii are arguments so the stability of each number can be
checked by re-running at ``R + 2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .algebra import (
    AlgebraElement,
    ConvergenceError,
    LatticeSpec,
    NotPositiveError,
    Side,
    d,
    d_bar,
    derive,
    inv_sqrt,
    inverse,
    involution,
    laplacian,
    spectral_bounds,
    trace,
    twisted_mul,
)
from .module import (
    QuadratureSpec,
    act_A,
    act_B,
    inner_A,
    inner_B,
    l2_distance,
    l2_inner,
    l2_norm,
    nabla,
    stft_table,
)
from .windows import Window, random_mixture

RADIUS_B = 16
FRAME_MARGIN = 1e-8
DRIFT_TOL = 1e-4
RAYLEIGH_EPS = 1e-3
TIGHT_TOL = 1e-7
B_RESIDUAL_TOL = 1e-5
GAUGE_TOL = 1e-6
IMAG_TOL = 1e-8


class FrameError(RuntimeError):
    """The window does not generate a frame, or the frame check is inconsistent."""


class SolitonError(RuntimeError):
    """A soliton-level identity failed beyond its tolerance."""


class GaugeError(RuntimeError):
    """The gauge element is not invertible."""


@dataclass
class FrameReport:
    lower: float
    upper: float
    tight: bool
    invertibility_margin: float
    radius_used: int
    is_frame: bool
    drift: float
    rayleigh_min: float
    rayleigh_max: float

    def to_dict(self):
        return asdict(self)


@dataclass
class SolitonReport:
    energy: float
    charge: float
    bp_gap: float
    sd_residual: float
    el_residual: float
    idempotency: float

    def to_dict(self):
        return asdict(self)


@dataclass
class GaugeReport:
    tau_b: complex
    lam: complex
    lattice_distance: float
    gaugeable: bool
    nearest_point: tuple[int, int]
    b_residual: float
    lattice_unit: float

    def to_dict(self):
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        out["nearest_point"] = list(self.nearest_point)
        return out


class BCoefficient(NamedTuple):
    b: AlgebraElement
    residual: float


class TauValues(NamedTuple):
    trace: complex
    pairing: complex
    discrepancy: float
    raw_pairing: complex


def _dual(theta: float) -> LatticeSpec:
    return LatticeSpec(theta, Side.DUAL)


def _one(theta: float) -> AlgebraElement:
    return AlgebraElement.identity(_dual(theta))


# -- frames ------------------------------------------------------------

def rayleigh_quotient(f: Window, g: Window, theta: float, quad: QuadratureSpec | None = None) -> float:
    """``sum_lambda |<f, pi(lambda) g>|^2 / |f|^2`` over the lattice ``theta Z x Z``."""
    coeffs = inner_A(f, g, theta, "auto", quad).coeffs
    return float(np.sum(np.abs(coeffs) ** 2) / l2_norm(f, quad) ** 2)


def frame_bounds(g: Window, theta: float, radius: int = RADIUS_B, samples: int = 20,
                 eps: float = RAYLEIGH_EPS, seed: int = 0, tight_tol: float = 1e-6,
                 quad: QuadratureSpec | None = None) -> FrameReport:
    """Frame bounds of ``{pi(m theta, n) g}`` from the spectrum of ``<g, g>_B``.

    The frame operator is the right action of ``<g, g>_B``, so its bounds are
    the spectral bounds of that element.  They are cross-checked against
    Rayleigh quotients of random test vectors.
    """
    sb = spectral_bounds(inner_B(g, g, theta, radius, quad))
    sb2 = spectral_bounds(inner_B(g, g, theta, radius + 2, quad))
    drift = max(abs(sb.lower - sb2.lower), abs(sb.upper - sb2.upper))
    lower, upper = sb.lower, sb.upper
    is_frame = lower > FRAME_MARGIN and drift < DRIFT_TOL and sb.converged
    quotients = []
    if samples and lower > FRAME_MARGIN:
        rng = np.random.default_rng(seed)
        quotients = [rayleigh_quotient(random_mixture(rng), g, theta, quad) for _ in range(samples)]
        lo, hi = min(quotients), max(quotients)
        if lo < lower * (1 - eps) or hi > upper * (1 + eps):
            raise FrameError(
                f"Rayleigh quotients [{lo:.6g}, {hi:.6g}] leave [{lower:.6g}, {upper:.6g}]")
    return FrameReport(
        lower=float(lower), upper=float(upper), tight=bool(abs(upper - lower) <= tight_tol),
        invertibility_margin=float(lower), radius_used=int(radius), is_frame=bool(is_frame),
        drift=float(drift),
        rayleigh_min=float(min(quotients)) if quotients else math.nan,
        rayleigh_max=float(max(quotients)) if quotients else math.nan,
    )


def tightness_defect(g: Window, theta: float, radius: int = RADIUS_B,
                     quad: QuadratureSpec | None = None) -> float:
    """``|<g, g>_B - 1_B|_1``."""
    return (inner_B(g, g, theta, radius, quad) - _one(theta)).l1()


def dual_lattice_defect(g: Window, theta: float, radius: int = 6,
                        quad: QuadratureSpec | None = None) -> float:
    """``max |<g, pi(k, l/theta) g> - theta delta|`` over ``|k|, |l| <= radius``."""
    k = np.arange(-radius, radius + 1)
    table = stft_table(g, g, k.astype(float), k / theta, quad)
    table[radius, radius] -= theta
    return float(np.abs(table).max())


def normalize(g: Window, theta: float, radius: int = RADIUS_B, tol: float = TIGHT_TOL,
              quad: QuadratureSpec | None = None) -> Window:
    """Parseval window ``g . <g, g>_B^(-1/2)``; tight input is returned as is."""
    G = inner_B(g, g, theta, radius, quad)
    one = _one(theta)
    if (G - one).l1() <= 1e-13:
        return g
    try:
        root = inv_sqrt(G)
    except NotPositiveError as exc:
        raise FrameError(f"not a frame: {exc}") from exc
    out = act_B(g, root)
    defect = tightness_defect(out, theta, radius, quad)
    if defect > tol:
        raise FrameError(f"normalized window has tightness defect {defect:.3g}")
    return out


def wexler_raz_residual(e: Window, f: Window, theta: float, radius: int = RADIUS_B,
                        quad: QuadratureSpec | None = None) -> float:
    """``|f - e . <e, f>_B|``: the synthesis over the adjoint lattice."""
    return l2_distance(f, act_B(e, inner_B(e, f, theta, radius, quad)), quad)


def frame_reconstruction_residual(e: Window, f: Window, theta: float,
                                  quad: QuadratureSpec | None = None) -> float:
    """``|f - A<f, e> . e|``: Parseval reconstruction over ``theta Z x Z``."""
    return l2_distance(f, act_A(inner_A(f, e, theta, "auto", quad), e), quad)


# -- projections -------------------------------------------------------

def rieffel_projection(g: Window, theta: float, radius: int | str = "auto",
                       radius_b: int = RADIUS_B, quad: QuadratureSpec | None = None) -> AlgebraElement:
    """``p = A<e, e>`` for the Parseval normalization ``e`` of ``g``."""
    e = normalize(g, theta, radius_b, quad=quad)
    return inner_A(e, e, theta, radius, quad)


def idempotency(p: AlgebraElement) -> float:
    return (twisted_mul(p, p) - p).l1()


def self_adjointness(p: AlgebraElement) -> float:
    return (involution(p) - p).l1()


def killing_residual(p: AlgebraElement) -> float:
    """``max_nu |p d_nu(p) p|_1``; vanishes for any projection."""
    return max(twisted_mul(twisted_mul(p, derive(p, nu)), p).l1() for nu in (1, 2))


def action_identity_residual(p: AlgebraElement) -> float:
    """``max_nu |Tr(d_nu p d_nu p) - 2 Tr(p d_nu p d_nu p)|``."""
    out = 0.0
    for nu in (1, 2):
        dp = derive(p, nu)
        sq = twisted_mul(dp, dp)
        out = max(out, abs(trace(sq) - 2 * trace(twisted_mul(p, sq))))
    return out


def projection_residuals(p: AlgebraElement, theta: float) -> dict:
    return {
        "idempotency": idempotency(p),
        "self_adjointness": self_adjointness(p),
        "trace_defect": abs(trace(p) - theta),
        "killing": killing_residual(p),
        "action_identity": action_identity_residual(p),
    }


# -- energy and charge ---------------------------------------------------

def energy(p: AlgebraElement) -> float:
    """``S(p) = Tr(d(p) d_bar(p))``."""
    s = trace(twisted_mul(d(p), d_bar(p)))
    if abs(s.imag) > IMAG_TOL * max(1.0, abs(s)):
        raise SolitonError(f"energy has imaginary part {s.imag:.3g}")
    return float(s.real)


def charge(p: AlgebraElement) -> float:
    """First Chern number ``(1/2 pi i) Tr(p [d_1 p, d_2 p])``."""
    d1, d2 = derive(p, 1), derive(p, 2)
    comm = twisted_mul(d1, d2) - twisted_mul(d2, d1)
    return float((trace(twisted_mul(p, comm)) / (2j * math.pi)).real)


def self_duality_residual(p: AlgebraElement) -> float:
    """``|d_bar(p) p|_1``."""
    return twisted_mul(d_bar(p), p).l1()


def el_residual(p: AlgebraElement) -> float:
    """``|p Lap(p) - Lap(p) p|_1`` with ``Lap = d_1^2 + d_2^2``."""
    lap = laplacian(p)
    return (twisted_mul(p, lap) - twisted_mul(lap, p)).l1()


def soliton_report(p: AlgebraElement) -> SolitonReport:
    s, q = energy(p), charge(p)
    return SolitonReport(
        energy=s, charge=q, bp_gap=s - 4 * math.pi * abs(q),
        sd_residual=self_duality_residual(p), el_residual=el_residual(p),
        idempotency=idempotency(p),
    )


# -- connection coefficient and gauge action -----------------------------

def compute_b(g: Window, theta: float, radius: int = RADIUS_B, strict: bool = True,
              quad: QuadratureSpec | None = None) -> BCoefficient:
    """``b = <g, g>_B^-1 <g, nabla_bar g>_B`` and the residual ``|nabla_bar g - g . b|``.

    ``g . b`` is the orthogonal projection of ``nabla_bar g`` onto ``g . B``, so
    the residual is zero exactly when ``nabla_bar g = g . b`` has a solution.
    """
    G = inner_B(g, g, theta, radius, quad)
    dg = nabla(g, "bar", theta)
    b = twisted_mul(inverse(G), inner_B(g, dg, theta, radius, quad))
    residual = l2_distance(dg, act_B(g, b), quad)
    if strict and residual > B_RESIDUAL_TOL:
        raise SolitonError(f"nabla_bar g is {residual:.3g} away from g . B")
    return BCoefficient(b, residual)


def tau(g: Window, theta: float, radius: int = RADIUS_B,
        quad: QuadratureSpec | None = None, b: AlgebraElement | None = None,
        normalized: Window | None = None) -> TauValues:
    """``tau(b)`` as ``trace(b)`` and as ``theta^-1 <nabla_bar e, e>`` for the Parseval ``e``.

    ``raw_pairing`` is ``<nabla_bar g, g> / |g|^2`` on the unnormalized input.
    Precomputed ``b`` and ``normalized`` skip the corresponding work.
    """
    if b is None:
        b = compute_b(g, theta, radius, strict=False, quad=quad).b
    tr = trace(b)
    e = normalize(g, theta, radius, quad=quad) if normalized is None else normalized
    pairing = l2_inner(nabla(e, "bar", theta), e, quad) / theta
    raw = l2_inner(nabla(g, "bar", theta), g, quad) / l2_inner(g, g, quad).real
    return TauValues(complex(tr), complex(pairing), float(abs(tr - pairing)), complex(raw))


def _monomial_inverse(u: AlgebraElement):
    nz = np.argwhere(u.coeffs != 0)
    if len(nz) != 1:
        return None
    i, j = nz[0]
    m, n = i - u.radius, j - u.radius
    c = u.coeffs[i, j]
    # (c U)^-1 = U^* / c for a unitary monomial U
    return involution(AlgebraElement.monomial(u.lattice, m, n)) / c


def gauge_inverse(u: AlgebraElement, tol: float = 1e-8) -> AlgebraElement:
    """Exact inverse of a monomial, otherwise ``(u^* u)^-1 u^*``."""
    inv = _monomial_inverse(u)
    if inv is None:
        us = involution(u)
        r = max(RADIUS_B, 2 * u.radius)
        try:
            inv = twisted_mul(inverse(twisted_mul(us, u, radius=r), radius=r), us, radius=r)
        except (NotPositiveError, ConvergenceError) as exc:
            raise GaugeError(f"gauge element is not invertible: {exc}") from exc
    r = inv.radius + u.radius
    defect = (twisted_mul(inv, u, radius=r) - AlgebraElement.identity(u.lattice)).l1()
    if defect > tol:
        raise GaugeError(f"gauge inverse defect {defect:.3g}")
    return inv


def gauge_coefficient(b: AlgebraElement, u: AlgebraElement, u_inv: AlgebraElement) -> AlgebraElement:
    """``b_U = U^-1 b U + U^-1 d_bar(U)``."""
    r = b.radius + u.radius + u_inv.radius
    conj = twisted_mul(twisted_mul(u_inv, b, radius=r), u, radius=r)
    return conj + twisted_mul(u_inv, d_bar(u), radius=r)


class GaugeResult(NamedTuple):
    window: Window
    b_u: AlgebraElement
    b_law_residual: float
    projection_residual: float


def gauge_transform(g: Window, u: AlgebraElement, theta: float, radius: int = RADIUS_B,
                    check_projection: bool = True, quad: QuadratureSpec | None = None,
                    b: AlgebraElement | None = None) -> GaugeResult:
    """Right action ``g -> g . U`` with the transformed coefficient ``b_U``.

    The transformation law is checked against ``compute_b(g . U)`` and, when
    asked, the Rieffel projection against that of ``g``.  Pass ``b`` to reuse
    the coefficient of ``g`` across many ``U``.
    """
    if u.side is not Side.DUAL:
        raise ValueError("gauge elements live in B")
    u_inv = gauge_inverse(u)
    gu = act_B(g, u)
    if b is None:
        b = compute_b(g, theta, radius, strict=False, quad=quad).b
    b_u = gauge_coefficient(b, u, u_inv)
    direct = compute_b(gu, theta, radius, strict=False, quad=quad).b
    law = (direct - b_u.resized(max(b_u.radius, direct.radius))).l1()
    proj = math.nan
    if check_projection:
        p = rieffel_projection(g, theta, radius_b=radius, quad=quad)
        pu = rieffel_projection(gu, theta, radius_b=radius, quad=quad)
        proj = (p - pu).l1()
    return GaugeResult(gu, b_u, float(law), float(proj))


def gauge_lattice_unit(theta: float) -> float:
    """Spacing of ``tau(U^-1 d_bar U)`` over invertible ``U``: ``2 pi / theta``.

    For a monomial ``U = U_1^m U_2^n`` the shift is ``-(2 pi i / theta)(m + i n)``.
    """
    return float(2 * math.pi / theta)


def lattice_distance(z: complex, unit: float) -> tuple[float, tuple[int, int]]:
    """Distance of ``z`` to ``i unit (Z + i Z)`` and the nearest ``(m, n)``."""
    w = z / (1j * unit)
    best = (math.inf, (0, 0))
    for m in (math.floor(w.real), math.ceil(w.real)):
        for n in (math.floor(w.imag), math.ceil(w.imag)):
            dist = abs(z - 1j * unit * complex(m, n))
            if dist < best[0]:
                best = (dist, (int(m), int(n)))
    return best


def classify_gauge_to_gaussian(g: Window, lam: complex, theta: float, radius: int = RADIUS_B,
                               tol: float = GAUGE_TOL, unit: float | None = None,
                               quad: QuadratureSpec | None = None) -> GaugeReport:
    """Is ``g`` gauge equivalent to ``gaussian(lam)``?  Decided by ``lam - tau(b)``."""
    bc = compute_b(g, theta, radius, strict=False, quad=quad)
    return gauge_report(bc, lam, theta, tol, unit)


def gauge_report(bc: BCoefficient, lam: complex, theta: float, tol: float = GAUGE_TOL,
                 unit: float | None = None) -> GaugeReport:
    """Classify from an already computed connection coefficient."""
    unit = gauge_lattice_unit(theta) if unit is None else float(unit)
    t = complex(trace(bc.b))
    dist, point = lattice_distance(complex(lam) - t, unit)
    return GaugeReport(tau_b=t, lam=complex(lam), lattice_distance=float(dist),
                       gaugeable=bool(dist <= tol), nearest_point=point,
                       b_residual=float(bc.residual), lattice_unit=unit)
