"""Finite-support model of the smooth twisted group algebras over a lattice.

The primal algebra ``A`` lives on ``theta Z x Z`` with cocycle
``c(z, z') = exp(-2 pi i x eta)``; its dual ``B`` lives on ``Z x (1/theta) Z``
with the conjugate cocycle.  Both are indexed by integer pairs ``(m, n)`` and
stored as dense ``(2R+1, 2R+1)`` coefficient arrays centred at the origin.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigvals_banded

TWO_PI_I = 2j * np.pi

MAX_ITERATIONS = 200
STEP_TOL = 1e-14
TRUNCATION_RTOL = 1e-9
TRUNCATION_ATOL = 1e-12


class TruncationWarning(RuntimeWarning):
    """A product discarded more coefficient mass than the truncation policy allows."""


class AlgebraError(ValueError):
    pass


class NotPositiveError(AlgebraError):
    pass


class ConvergenceError(AlgebraError):
    pass


class Side(str, enum.Enum):
    PRIMAL = "A"
    DUAL = "B"


@dataclass(frozen=True)
class LatticeSpec:
    """``theta Z x Z`` (primal) or ``Z x (1/theta) Z`` (dual)."""

    theta: float
    side: Side = Side.PRIMAL

    def __post_init__(self):
        theta = float(self.theta)
        if not 0.0 < theta < 1.0:
            raise AlgebraError(f"theta must lie in (0, 1), got {self.theta!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "side", Side(self.side))

    @property
    def vol(self) -> float:
        """Covolume of this lattice (theta for the primal one)."""
        return self.theta if self.side is Side.PRIMAL else 1.0 / self.theta

    @property
    def steps(self) -> tuple[float, float]:
        if self.side is Side.PRIMAL:
            return self.theta, 1.0
        return 1.0, 1.0 / self.theta

    @property
    def phase_rate(self) -> float:
        # cocycle on indices is exp(-2 pi i * phase_rate * m1 * n2)
        return self.theta if self.side is Side.PRIMAL else -1.0 / self.theta

    @property
    def derivation_scale(self) -> float:
        # Fixed by compatibility of the B-valued inner product with
        # nabla_1 = 2 pi i t / theta and nabla_2 = d/dt (see module.py).
        return 1.0 if self.side is Side.PRIMAL else -1.0 / self.theta

    def point(self, m, n):
        dx, dw = self.steps
        return (np.asarray(m) * dx, np.asarray(n) * dw)

    def dual(self) -> "LatticeSpec":
        other = Side.DUAL if self.side is Side.PRIMAL else Side.PRIMAL
        return LatticeSpec(self.theta, other)


def cocycle(z, w, side: Side | str = Side.PRIMAL):
    """``exp(-2 pi i x eta)`` for ``z = (x, omega)``, ``w = (y, eta)``; conjugated on B."""
    value = np.exp(-TWO_PI_I * np.asarray(z[0]) * np.asarray(w[1]))
    return np.conj(value) if Side(side) is Side.DUAL else value


def _unit_phase(rate: float, k) -> np.ndarray:
    """``exp(-2 pi i rate k)`` for integer ``k``, reducing ``rate k`` mod 1 in extended precision."""
    frac = np.mod(np.longdouble(rate) * np.asarray(k, dtype=np.longdouble), 1)
    return np.exp(-TWO_PI_I * frac.astype(float))


def _index_cocycle(lattice: LatticeSpec, m1, n2):
    return _unit_phase(lattice.phase_rate, np.multiply.outer(m1, n2))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Coefficients ``a(m, n)`` for ``|m|, |n| <= radius`` on one lattice side.

    The coefficient at ``(m, n)`` multiplies the time-frequency shift at the
    corresponding lattice point (``pi(m theta, n)`` on A, ``pi*(m, n/theta)``
    on B, the latter being how B acts on the right of the module).
    """

    lattice: LatticeSpec
    coeffs: np.ndarray
    tail_norm: float = 0.0
    _frozen: bool = field(default=False, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2 == 0:
            raise AlgebraError(f"coefficient array must be (2R+1, 2R+1), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction -------------------------------------------------
    @classmethod
    def zeros(cls, lattice: LatticeSpec, radius: int) -> "AlgebraElement":
        return cls(lattice, np.zeros((2 * radius + 1,) * 2, dtype=complex))

    @classmethod
    def identity(cls, lattice: LatticeSpec, radius: int = 0) -> "AlgebraElement":
        return cls.monomial(lattice, 0, 0, radius=radius)

    @classmethod
    def monomial(cls, lattice: LatticeSpec, m: int, n: int, coeff: complex = 1.0,
                 radius: int | None = None) -> "AlgebraElement":
        r = max(abs(m), abs(n)) if radius is None else radius
        if max(abs(m), abs(n)) > r:
            raise AlgebraError("monomial index outside radius")
        c = np.zeros((2 * r + 1,) * 2, dtype=complex)
        c[m + r, n + r] = coeff
        return cls(lattice, c)

    @classmethod
    def from_dict(cls, lattice: LatticeSpec, entries: dict, radius: int | None = None):
        r = max((max(abs(m), abs(n)) for m, n in entries), default=0)
        if radius is not None:
            if radius < r:
                raise AlgebraError("entries outside declared radius")
            r = radius
        c = np.zeros((2 * r + 1,) * 2, dtype=complex)
        for (m, n), v in entries.items():
            c[m + r, n + r] = v
        return cls(lattice, c)

    # -- basic access -------------------------------------------------
    @property
    def radius(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def side(self) -> Side:
        return self.lattice.side

    def __getitem__(self, idx) -> complex:
        m, n = idx
        r = self.radius
        if abs(m) > r or abs(n) > r:
            return 0j
        return complex(self.coeffs[m + r, n + r])

    def indices(self):
        r = self.radius
        k = np.arange(-r, r + 1)
        return np.meshgrid(k, k, indexing="ij")

    def to_dict(self, cutoff: float = 0.0) -> dict:
        r = self.radius
        out = {}
        for i, j in zip(*np.nonzero(np.abs(self.coeffs) > cutoff)):
            out[(int(i) - r, int(j) - r)] = complex(self.coeffs[i, j])
        return out

    def resized(self, radius: int) -> "AlgebraElement":
        """Zero-pad or crop; cropped mass is added to ``tail_norm``."""
        r = self.radius
        if radius >= r:
            c = np.zeros((2 * radius + 1,) * 2, dtype=complex)
            c[radius - r:radius + r + 1, radius - r:radius + r + 1] = self.coeffs
            return AlgebraElement(self.lattice, c, self.tail_norm)
        s = slice(r - radius, r + radius + 1)
        kept = self.coeffs[s, s]
        lost = float(np.abs(self.coeffs).sum() - np.abs(kept).sum())
        return AlgebraElement(self.lattice, kept, self.tail_norm + max(lost, 0.0))

    def trimmed(self, cutoff: float = 0.0) -> "AlgebraElement":
        """Smallest radius that still holds every coefficient above ``cutoff``."""
        r = self.radius
        m, n = np.nonzero(np.abs(self.coeffs) > cutoff)
        if m.size == 0:
            return self.resized(0)
        need = int(max(np.abs(m - r).max(), np.abs(n - r).max()))
        return self.resized(need)

    # -- linear structure ---------------------------------------------
    def _aligned(self, other: "AlgebraElement"):
        _check_same(self, other)
        r = max(self.radius, other.radius)
        return self.resized(r), other.resized(r)

    def __add__(self, other):
        if np.isscalar(other):
            other = AlgebraElement.identity(self.lattice) * other
        a, b = self._aligned(other)
        return AlgebraElement(self.lattice, a.coeffs + b.coeffs, a.tail_norm + b.tail_norm)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.lattice, -self.coeffs, self.tail_norm)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return AlgebraElement(self.lattice, self.coeffs * scalar, self.tail_norm * abs(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        return twisted_mul(self, other)

    def l1(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def sup(self) -> float:
        """Sup-norm of the coefficients (diagnostic only)."""
        return float(np.abs(self.coeffs).max())

    @property
    def star(self) -> "AlgebraElement":
        return involution(self)

    def __repr__(self):
        return (f"AlgebraElement(side={self.side.value}, theta={self.lattice.theta:.6g}, "
                f"radius={self.radius}, l1={self.l1():.6g})")


def _check_same(a: AlgebraElement, b: AlgebraElement):
    if a.lattice != b.lattice:
        raise AlgebraError(f"lattice mismatch: {a.lattice} vs {b.lattice}")


def twisted_mul(a: AlgebraElement, b: AlgebraElement, radius: int | None = None) -> AlgebraElement:
    """Twisted convolution ``(a # b)(l) = sum_u a(u) b(l-u) c(u, l-u)``.

    The output is truncated to ``radius`` (default: the larger input radius);
    discarded l1 mass is accumulated in ``tail_norm``.
    """
    _check_same(a, b)
    lat = a.lattice
    ra, rb = a.radius, b.radius
    rout = max(ra, rb) if radius is None else int(radius)
    full = ra + rb
    nb = 2 * rb + 1
    nfull = 2 * full + 1

    ka = np.arange(-ra, ra + 1)
    nout = np.arange(-full, full + 1)
    # c(u, l-u) = exp(-2 pi i r m' (n - n')) = exp(-2 pi i r m' n) * exp(+2 pi i r m' n')
    a_tilde = a.coeffs * np.conj(_index_cocycle(lat, ka, ka))
    out_phase = _index_cocycle(lat, ka, nout)

    # Toeplitz index: column n of the output sees b column n2 through a column n - n2
    n2 = np.arange(-rb, rb + 1)
    diff = nout[None, :] - n2[:, None] + ra
    valid = (diff >= 0) & (diff <= 2 * ra)
    diff = np.clip(diff, 0, 2 * ra)

    out = np.zeros((nfull, nfull), dtype=complex)
    for i in range(2 * ra + 1):
        row = a_tilde[i]
        if not row.any():
            continue
        toeplitz = np.where(valid, row[diff], 0.0)
        contrib = (b.coeffs @ toeplitz) * out_phase[i][None, :]
        start = i  # output row of b row 0 is (i - ra) + (0 - rb) + full
        out[start:start + nb] += contrib
    result = AlgebraElement(lat, out).resized(rout)
    discarded = result.tail_norm
    # relative to |a|_1 |b|_1, not |a # b|_1: residual-type products are ~0
    if discarded > max(TRUNCATION_RTOL * a.l1() * b.l1(), TRUNCATION_ATOL):
        warnings.warn(
            f"twisted product discarded l1 mass {discarded:.3g} at radius {rout}",
            TruncationWarning, stacklevel=2)
    inherited = a.tail_norm * b.l1() + b.tail_norm * a.l1()
    return AlgebraElement(lat, result.coeffs, discarded + inherited)


def involution(a: AlgebraElement) -> AlgebraElement:
    """``a*(l) = c(l, l) * conj(a(-l))`` with the side's own cocycle.

    This is the adjoint carried by the time-frequency shifts themselves, so the
    map is an anti-homomorphism for the twisted product.
    """
    k = np.arange(-a.radius, a.radius + 1)
    flipped = np.conj(a.coeffs[::-1, ::-1])
    return AlgebraElement(a.lattice, flipped * _index_cocycle(a.lattice, k, k), a.tail_norm)


def trace(a: AlgebraElement) -> complex:
    return a[0, 0]


def s_norm(a: AlgebraElement, s: float) -> float:
    if s < 0:
        raise AlgebraError("s must be non-negative")
    m, n = a.indices()
    x, w = a.lattice.point(m, n)
    return float((np.abs(a.coeffs) * (1.0 + x ** 2 + w ** 2) ** (s / 2.0)).sum())


def derive(a: AlgebraElement, nu: int) -> AlgebraElement:
    """Torus-action derivation; ``derive(U_nu, nu) = 2 pi i U_nu`` on A."""
    if nu not in (1, 2):
        raise AlgebraError("nu must be 1 or 2")
    m, n = a.indices()
    k = m if nu == 1 else n
    factor = TWO_PI_I * a.lattice.derivation_scale * k
    return AlgebraElement(a.lattice, a.coeffs * factor,
                          a.tail_norm * 2 * np.pi * abs(a.lattice.derivation_scale) * (a.radius + 1))


def d_bar(a: AlgebraElement) -> AlgebraElement:
    return derive(a, 1) + 1j * derive(a, 2)


def d(a: AlgebraElement) -> AlgebraElement:
    return derive(a, 1) - 1j * derive(a, 2)


def laplacian(a: AlgebraElement) -> AlgebraElement:
    return derive(derive(a, 1), 1) + derive(derive(a, 2), 2)


def left_regular_matrix(a: AlgebraElement, radius: int) -> np.ndarray:
    """Matrix of ``b -> a # b`` on coefficient vectors supported in the radius box.

    Rows and columns are ordered lexicographically by ``(m, n)``.
    """
    if radius < a.radius:
        raise AlgebraError(f"radius {radius} cannot contain support of radius {a.radius}")
    k = np.arange(-radius, radius + 1)
    mm, nn = np.meshgrid(k, k, indexing="ij")
    m = mm.ravel()
    n = nn.ravel()
    dm = m[:, None] - m[None, :]
    dn = n[:, None] - n[None, :]
    ra = a.radius
    inside = (np.abs(dm) <= ra) & (np.abs(dn) <= ra)
    vals = a.coeffs[np.clip(dm + ra, 0, 2 * ra), np.clip(dn + ra, 0, 2 * ra)]
    # c(l - u, u) = exp(-2 pi i r (m_l - m_u) n_u)
    phase = _unit_phase(a.lattice.phase_rate, dm * n[None, :])
    return np.where(inside, vals * phase, 0.0)


def vec(a: AlgebraElement, radius: int | None = None) -> np.ndarray:
    r = a.radius if radius is None else radius
    return a.resized(r).coeffs.ravel().copy()


def self_adjoint_defect(a: AlgebraElement) -> float:
    return (a - involution(a)).l1()


class SpectralBounds(NamedTuple):
    lower: float
    upper: float
    converged: bool
    size: int


SECTION_SIZE = 2048
POSITIVITY_SECTION = 512


def covariant_diagonals(a: AlgebraElement, size: int) -> np.ndarray:
    """Diagonals of ``a`` in the covariant representation on ``l2(Z)``.

    ``U_(m, n) -> exp(2 pi i r m n) S^m M^n`` with ``S`` the unit shift and ``M``
    multiplication by ``exp(2 pi i r k)`` (``r`` the phase rate) is a faithful
    *-representation.  Row ``m + R`` holds the entries ``[j + m, j]`` for
    ``j = 0..size-1`` of a section centred at the origin.
    """
    r, rate = a.radius, a.lattice.phase_rate
    k = np.arange(-r, r + 1)
    j = np.arange(size) - size // 2
    alpha = _unit_phase(-rate, np.multiply.outer(k, k))
    return (a.coeffs * alpha) @ _unit_phase(-rate, np.multiply.outer(k, j))


def _section_extremes(a: AlgebraElement, size: int) -> tuple[float, float]:
    """Extreme eigenvalues of the hermitian part of a ``size`` section (banded solver)."""
    r = a.radius
    diag = covariant_diagonals(a, size)
    band = np.zeros((r + 1, size), dtype=complex)
    for m in range(-r, 1):
        # entry [j + m, j] above the diagonal, averaged with conj of [j, j + m]
        j = np.arange(-m, size)
        band[r + m, j] = 0.5 * (diag[m + r, j] + np.conj(diag[-m + r, j + m]))
    ev = eigvals_banded(band)
    return float(ev[0]), float(ev[-1])


def spectral_bounds(a: AlgebraElement, size: int | None = None, tol: float = 1e-10,
                    drift_tol: float = 1e-5) -> SpectralBounds:
    """Bottom and top of the spectrum of a self-adjoint element.

    Sections of the covariant representation are compressions, so their
    extreme eigenvalues lie inside the spectral hull and converge to it (like
    ``1/size**2`` when the edge states are extended).  ``converged`` compares
    sizes ``size/2`` and ``size`` at relative tolerance ``drift_tol``.
    """
    if self_adjoint_defect(a) > max(tol, 1e-10) * max(1.0, a.l1()):
        raise NotPositiveError("spectral_bounds needs a self-adjoint element")
    n = SECTION_SIZE if size is None else int(size)
    n = max(n, 4 * a.radius + 4)
    lo0, hi0 = _section_extremes(a, n // 2)
    lo, hi = _section_extremes(a, n)
    converged = abs(lo - lo0) <= drift_tol * max(1.0, abs(lo)) and \
        abs(hi - hi0) <= drift_tol * max(1.0, abs(hi))
    return SpectralBounds(lo, hi, bool(converged), n)


def _scalar_case(a: AlgebraElement):
    mask = np.ones_like(a.coeffs, dtype=bool)
    mask[a.radius, a.radius] = False
    if not np.any(a.coeffs[mask]):
        return a[0, 0]
    return None


def _positive_bounds(a, tol):
    # the iterations only need positivity and a rough scale, not the sharp bounds
    sb = spectral_bounds(a, POSITIVITY_SECTION)
    if sb.lower <= tol:
        raise NotPositiveError(f"lower spectral bound {sb.lower:.3g} is not above {tol:.1g}")
    return sb


def inverse(a: AlgebraElement, tol: float = 1e-10, radius: int | None = None) -> AlgebraElement:
    """Inverse of a positive element by the Neumann series of ``1 - a/c``.

    ``radius`` (if given) is the working radius of the iteration and result.
    """
    if radius is not None and radius > a.radius:
        a = a.resized(radius)
    one = AlgebraElement.identity(a.lattice, a.radius)
    s = _scalar_case(a)
    if s is not None and abs(s.imag) < tol and s.real > tol:
        return one * (1.0 / s.real)
    sb = _positive_bounds(a, tol)
    c = sb.upper
    step = one - a / c
    term = one / c
    y = term
    for _ in range(MAX_ITERATIONS):
        term = twisted_mul(term, step)
        y = y + term
        if term.l1() < STEP_TOL * max(1.0, y.l1()):
            break
    else:
        raise ConvergenceError("Neumann series did not converge")
    residual = (twisted_mul(a, y) - one).l1()
    if residual > tol:
        raise ConvergenceError(f"inverse residual {residual:.3g} exceeds {tol:.1g}")
    return y


def inv_sqrt(a: AlgebraElement, tol: float = 1e-10, radius: int | None = None) -> AlgebraElement:
    """Inverse square root of a positive element by Newton-Schulz on ``a / c``."""
    if radius is not None and radius > a.radius:
        a = a.resized(radius)
    one = AlgebraElement.identity(a.lattice, a.radius)
    s = _scalar_case(a)
    if s is not None and abs(s.imag) < tol and s.real > tol:
        return one * (1.0 / math.sqrt(s.real))
    sb = _positive_bounds(a, tol)
    c = sb.upper
    x = a / c
    y = one
    prev_step = math.inf
    for _ in range(MAX_ITERATIONS):
        yy = twisted_mul(y, y)
        new = twisted_mul(y, 3.0 * one - twisted_mul(x, yy)) * 0.5
        new = (new + involution(new)) * 0.5
        step = (new - y).l1()
        y = new
        if step < STEP_TOL * max(1.0, y.l1()):
            break
        if step > 1e3 * max(1.0, y.l1()):
            raise ConvergenceError("Newton-Schulz iteration diverged")
        # round-off floor: stop once the steps stall at machine level
        if step < 1e-12 * y.l1() and step >= prev_step:
            break
        prev_step = step
    else:
        raise ConvergenceError("Newton-Schulz iteration did not converge")
    y = y / math.sqrt(c)
    residual = (twisted_mul(twisted_mul(y, y), a) - one).l1()
    if residual > tol:
        raise ConvergenceError(f"inverse square root residual {residual:.3g} exceeds {tol:.1g}")
    return y


def is_positive(a: AlgebraElement, size: int | None = None, tol: float = 1e-10) -> bool:
    if self_adjoint_defect(a) > tol * max(1.0, a.l1()):
        return False
    sb = spectral_bounds(a, size)
    return sb.lower >= -tol


# -- serialization -----------------------------------------------------

def to_json_dict(a: AlgebraElement, cutoff: float = 0.0) -> dict:
    entries = sorted(a.to_dict(cutoff).items())
    return {
        "theta": a.lattice.theta,
        "side": a.side.value,
        "radius": a.radius,
        "entries": [[m, n, v.real, v.imag] for (m, n), v in entries],
    }


def from_json_dict(obj: dict) -> AlgebraElement:
    lat = LatticeSpec(obj["theta"], Side(obj["side"]))
    entries = {(int(m), int(n)): complex(re, im) for m, n, re, im in obj["entries"]}
    return AlgebraElement.from_dict(lat, entries, radius=int(obj["radius"]))
