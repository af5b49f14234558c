"""Riemann theta functions with error-controlled lattice truncation.

The genus-g theta function is the lattice sum

    theta(z | Omega) = sum_{n in Z^g} exp(pi*i n.Omega.n + 2*pi*i n.z),

convergent because Im(Omega) is positive definite.  A real characteristic
pair (a, b) shifts the lattice and the argument,

    theta[a; b](z) = sum_n exp(pi*i (n+a).Omega.(n+a) + 2*pi*i (n+a).(z+b)),

and reduces to the plain sum through

    theta[a; b](z) = exp(pi*i a.Omega.a + 2*pi*i a.(z+b)) * theta(z + Omega.a + b).

Evaluation enumerates lattice points in a box around the peak of the
Gaussian envelope of the summand.  The box radius is grown until an
analytic tail bound (point counts times a Gaussian shell bound using the
smallest eigenvalue of pi*Im(Omega)) falls below the requested absolute
error, so truncation is provable rather than heuristic.  The error target
governs truncation only; double-precision rounding contributes a further
few-ulp error relative to the value's magnitude, which matters when the
Gaussian peak exp(pi y.Im(Omega)^-1 y) is large.  Enumeration order is
fixed; identical inputs give bit-identical results on one platform.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPeriodMatrix, NonConvergent

__all__ = [
    "PeriodMatrix",
    "ThetaCharacteristic",
    "ThetaEvalConfig",
    "DEFAULT_CONFIG",
    "period_from_tau",
    "reduce_characteristic",
    "riemann_theta",
    "theta_with_char",
    "theta_gradient",
]


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """Genus and symmetric g-by-g period matrix with Im(Omega) > 0.

    Genus 0 is allowed as the degenerate case of an empty matrix; the
    associated theta function is the empty sum 1.
    """

    genus: int
    omega: np.ndarray

    def __post_init__(self):
        if self.genus < 0:
            raise InvalidPeriodMatrix("genus must be nonnegative")
        omega = np.asarray(self.omega, dtype=complex).reshape(self.genus, self.genus)
        object.__setattr__(self, "omega", omega)
        if self.genus == 0:
            return
        if not np.all(np.isfinite(omega)):
            raise InvalidPeriodMatrix("period matrix has non-finite entries")
        scale = float(np.abs(omega).max())
        if float(np.abs(omega - omega.T).max()) > 1e-12 * scale:
            raise InvalidPeriodMatrix("period matrix is not symmetric")
        imag = 0.5 * (omega.imag + omega.imag.T)
        if float(np.linalg.eigvalsh(imag).min()) <= 0.0:
            raise InvalidPeriodMatrix("Im(Omega) is not positive definite")

    @property
    def tau(self) -> complex:
        """Scalar modulus for genus 1."""
        if self.genus != 1:
            raise InvalidPeriodMatrix("tau is only defined at genus 1")
        return complex(self.omega[0, 0])


def period_from_tau(tau: complex) -> PeriodMatrix:
    """Genus-1 period matrix [[tau]]."""
    return PeriodMatrix(1, np.array([[tau]], dtype=complex))


@dataclass(frozen=True, eq=False)
class ThetaCharacteristic:
    """Real characteristic vectors a, b of length g."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("characteristic vectors must share one length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("characteristic entries must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def genus(self) -> int:
        return self.a.size


def reduce_characteristic(chi: ThetaCharacteristic) -> tuple[ThetaCharacteristic, complex]:
    """Reduce a characteristic to the canonical cell [0, 1)^g.

    Returns the reduced characteristic and the constant phase by which
    theta values change: theta[red](z) = phase * theta[a; b](z) for all z.
    Integer shifts of a re-index the lattice and leave theta untouched;
    shifting b by an integer vector m multiplies theta by exp(-2*pi*i a.m).
    Reduction is never applied implicitly anywhere in this package.
    """
    a_red = chi.a - np.floor(chi.a)
    m = np.floor(chi.b)
    b_red = chi.b - m
    phase = complex(np.exp(-2j * np.pi * np.dot(chi.a, m)))
    return ThetaCharacteristic(a_red, b_red), phase


@dataclass(frozen=True)
class ThetaEvalConfig:
    """Truncation control: absolute error target and a radius cap."""

    target_abs_error: float = 1e-12
    max_lattice_radius: int = 60

    def __post_init__(self):
        if not (self.target_abs_error >= 1e-15):
            raise ValueError("target_abs_error must be at least 1e-15")
        if self.max_lattice_radius < 1:
            raise ValueError("max_lattice_radius must be at least 1")


DEFAULT_CONFIG = ThetaEvalConfig()


def _log_tail_bound(lam_min: float, log_peak: float, g: int, start: int,
                    deriv_shift: float | None) -> float:
    """Log of a bound on the summand mass outside box radius start - 1.

    Shell k (sup-norm distance k from the rounded center) holds at most
    (2k+1)^g - (2k-1)^g points, each of modulus at most
    peak * exp(-pi * lam_min * (k - 1/2)^2); a gradient evaluation gains
    the linear factor 2*pi*(k + 1/2 + shift).
    """
    total = -math.inf
    for k in range(start, start + 800):
        count = (2 * k + 1) ** g - (2 * k - 1) ** g
        la = math.log(count) + log_peak - math.pi * lam_min * (k - 0.5) ** 2
        if deriv_shift is not None:
            la += math.log(2.0 * math.pi * (k + 0.5 + deriv_shift))
        total = np.logaddexp(total, la)
        if la < total - 60.0:
            break
    return float(total)


def _truncation_radius(lam_min: float, log_peak: float, g: int, cfg: ThetaEvalConfig,
                       deriv_shift: float | None) -> int:
    log_target = math.log(cfg.target_abs_error)
    for radius in range(1, cfg.max_lattice_radius + 1):
        if _log_tail_bound(lam_min, log_peak, g, radius, deriv_shift) < log_target:
            return radius
    raise NonConvergent(
        f"tail bound above {cfg.target_abs_error:g} at radius cap "
        f"{cfg.max_lattice_radius}"
    )


def _char_sum(a: np.ndarray, b: np.ndarray, z: np.ndarray, pm: PeriodMatrix,
              cfg: ThetaEvalConfig, want_gradient: bool):
    """Truncated characteristic lattice sum; optionally its z-gradient."""
    g = pm.genus
    if g == 0:
        return 1.0 + 0.0j, np.zeros(0, dtype=complex)
    omega = pm.omega
    imag = 0.5 * (omega.imag + omega.imag.T)
    y = z.imag
    y_sol = np.linalg.solve(imag, y)
    log_peak = math.pi * float(y @ y_sol)
    lam_min = float(np.linalg.eigvalsh(imag).min())
    center = -a - y_sol
    shift = float(np.abs(y_sol).max()) if want_gradient else None
    radius = _truncation_radius(lam_min, log_peak, g, cfg, shift)

    base = np.rint(center)
    offsets = np.array(
        list(itertools.product(range(-radius, radius + 1), repeat=g)), dtype=float
    )
    m = base[None, :] + offsets + a[None, :]
    quad = np.einsum("ij,jk,ik->i", m, omega, m)
    lin = m @ (z + b)
    terms = np.exp(1j * np.pi * quad + 2j * np.pi * lin)
    value = complex(terms.sum())
    if not want_gradient:
        return value, None
    grad = (2j * np.pi) * (m * terms[:, None]).sum(axis=0)
    return value, grad


def _as_z(z, g: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
    if arr.size != g:
        raise ValueError(f"argument has length {arr.size}, expected genus {g}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("theta argument must be finite")
    return arr


def riemann_theta(z, omega: PeriodMatrix, cfg: ThetaEvalConfig | None = None) -> complex:
    """theta(z | Omega) with tail bound below cfg.target_abs_error.

    Parameters
    ----------
    z : complex scalar (genus 1) or length-g complex vector
    omega : PeriodMatrix
    cfg : ThetaEvalConfig, optional

    Returns
    -------
    complex
    """
    cfg = cfg or DEFAULT_CONFIG
    g = omega.genus
    zero = np.zeros(g)
    value, _ = _char_sum(zero, zero, _as_z(z, g), omega, cfg, False)
    return value


def theta_with_char(chi: ThetaCharacteristic, lam, omega: PeriodMatrix,
                    cfg: ThetaEvalConfig | None = None) -> complex:
    """theta[a; b](lam | Omega) via the direct characteristic sum."""
    cfg = cfg or DEFAULT_CONFIG
    if chi.genus != omega.genus:
        raise ValueError("characteristic genus does not match period matrix")
    value, _ = _char_sum(chi.a, chi.b, _as_z(lam, omega.genus), omega, cfg, False)
    return value


def theta_gradient(chi: ThetaCharacteristic, lam, omega: PeriodMatrix,
                   cfg: ThetaEvalConfig | None = None) -> np.ndarray:
    """Gradient of theta[a; b] in lam, by term-wise differentiation.

    The same tail control applies, with the shell bound enlarged by the
    linear factor coming from the 2*pi*i*(n+a) weights.
    """
    cfg = cfg or DEFAULT_CONFIG
    if chi.genus != omega.genus:
        raise ValueError("characteristic genus does not match period matrix")
    _, grad = _char_sum(chi.a, chi.b, _as_z(lam, omega.genus), omega, cfg, True)
    return grad
