"""Concrete surface geometry.

Three surface kinds are supported:

* ``GENUS0``: the Riemann sphere with its global coordinate.
* ``GENUS1``: the torus C / (Z + tau Z).  The Abel-Jacobi map is the
  identity on coordinates, the holomorphic differential is dz, and the
  half-order differential frame sqrt(dz) is constant, so every
  half-differential-valued object in this package is represented by its
  plain scalar value in this global frame.
* ``DATA_BUNDLE``: user-supplied higher-genus geometry (Abel-Jacobi
  values, pairwise prime-form values and differentials at labelled
  points), loaded from JSON.

The genus-1 prime form is

    E(p, q) = theta[1/2; 1/2](q - p) / theta[1/2; 1/2]'(0),

odd in (p, q), vanishing to first order exactly on the diagonal, with
E(p0, p) = t + O(t^3) for t = p - p0.  The odd characteristic pins the
half-order differential so that degrees of freedom in the spin structure
never leak into kernel values.
"""

from __future__ import annotations

import enum
import functools
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEmbedding,
    HigherOrderPole,
    InputError,
    UnknownPoint,
    UnsupportedGenus,
)
from .numutil import circle_modes
from .theta import (
    DEFAULT_CONFIG,
    PeriodMatrix,
    ThetaCharacteristic,
    ThetaEvalConfig,
    period_from_tau,
    theta_gradient,
    theta_with_char,
)

__all__ = [
    "SurfaceKind",
    "SurfaceDescriptor",
    "SurfacePoint",
    "FlatLineBundle",
    "SurfaceDataBundle",
    "EmbeddingPair",
    "genus0_surface",
    "torus_surface",
    "data_bundle_surface",
    "same_surface",
    "line_bundle",
    "lattice_coords",
    "lattice_reduce",
    "lattice_distance",
    "lattice_equal",
    "point",
    "coord",
    "points_equal",
    "abel_jacobi",
    "prime_form",
    "odd_theta",
    "odd_theta_deriv0",
    "log_deriv_odd_theta",
    "build_embedding_functions",
    "laurent_coeffs",
]

POINT_TOL = 1e-12


class SurfaceKind(enum.Enum):
    GENUS0 = "genus0"
    GENUS1 = "genus1"
    DATA_BUNDLE = "data_bundle"


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    """A point: a coordinate on the sphere/torus, or a label in a bundle."""

    coordinate: complex | None = None
    label: str | None = None

    def __post_init__(self):
        if self.coordinate is None and self.label is None:
            raise ValueError("a surface point needs a coordinate or a label")
        if self.coordinate is not None:
            c = complex(self.coordinate)
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise ValueError("point coordinate must be finite")
            object.__setattr__(self, "coordinate", c)

    def __repr__(self):
        if self.label is not None:
            return f"SurfacePoint(label={self.label!r})"
        return f"SurfacePoint({self.coordinate!r})"


def point(value) -> SurfacePoint:
    """Coerce a complex coordinate or label into a SurfacePoint."""
    if isinstance(value, SurfacePoint):
        return value
    if isinstance(value, str):
        return SurfacePoint(label=value)
    return SurfacePoint(coordinate=complex(value))


def coord(value) -> complex:
    """Complex coordinate of a point-like value."""
    if isinstance(value, SurfacePoint):
        if value.coordinate is None:
            raise UnknownPoint(f"point {value!r} has no coordinate")
        return value.coordinate
    return complex(value)


@dataclass(frozen=True, eq=False)
class SurfaceDataBundle:
    """Tabulated geometry for a user-supplied surface of genus >= 1.

    points maps label -> Abel-Jacobi value in C^g; prime_form holds the
    antisymmetric pairwise table; differentials holds the per-point values
    omega_j(p)/dt of the normalized differentials in the chosen frames.
    """

    genus: int
    omega: np.ndarray
    labels: tuple[str, ...]
    phi: np.ndarray          # (n, g)
    prime_form_table: np.ndarray  # (n, n), antisymmetric
    differentials: np.ndarray     # (n, g)

    def __post_init__(self):
        n = len(self.labels)
        phi = np.asarray(self.phi, dtype=complex).reshape(n, self.genus)
        table = np.asarray(self.prime_form_table, dtype=complex).reshape(n, n)
        diffs = np.asarray(self.differentials, dtype=complex).reshape(n, self.genus)
        scale = max(1.0, float(np.abs(table).max()))
        if float(np.abs(table + table.T).max()) > 1e-12 * scale:
            raise InputError("prime form table is not antisymmetric")
        if float(np.abs(np.diag(table)).max()) != 0.0:
            raise InputError("prime form table diagonal must be exactly zero")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "prime_form_table", table)
        object.__setattr__(self, "differentials", diffs)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownPoint(f"label {label!r} not in data bundle") from None

    @classmethod
    def from_json(cls, payload) -> "SurfaceDataBundle":
        if isinstance(payload, (str, bytes)):
            payload = json.loads(payload)
        try:
            genus = int(payload["genus"])
            omega = _complex_matrix(payload["omega"], genus)
            labels = tuple(str(p["label"]) for p in payload["points"])
            phi = np.array(
                [[_c(pair) for pair in p["phi"]] for p in payload["points"]],
                dtype=complex,
            )
            upper = [_c(pair) for pair in payload["prime_form"]]
            diffs = np.array(
                [[_c(pair) for pair in row] for row in payload["differentials"]],
                dtype=complex,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad surface bundle payload: {exc}") from exc
        n = len(labels)
        if len(upper) != n * (n - 1) // 2:
            raise InputError("prime_form upper triangle has wrong length")
        table = np.zeros((n, n), dtype=complex)
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                table[i, j] = upper[k]
                table[j, i] = -upper[k]
                k += 1
        return cls(genus, PeriodMatrix(genus, omega).omega, labels, phi, table, diffs)


def _c(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def _complex_matrix(rows, g: int) -> np.ndarray:
    return np.array([[_c(pair) for pair in row] for row in rows], dtype=complex).reshape(g, g)


@dataclass(frozen=True, eq=False)
class SurfaceDescriptor:
    """Which surface, with its period matrix and optional data bundle."""

    kind: SurfaceKind
    period: PeriodMatrix
    bundle: SurfaceDataBundle | None = None

    def __post_init__(self):
        if self.kind is SurfaceKind.GENUS0 and self.period.genus != 0:
            raise InputError("genus-0 surface needs an empty period matrix")
        if self.kind is SurfaceKind.GENUS1 and self.period.genus != 1:
            raise InputError("torus surface needs a 1x1 period matrix")
        if self.kind is SurfaceKind.DATA_BUNDLE and self.bundle is None:
            raise InputError("data-bundle surface needs bundle data")

    @property
    def genus(self) -> int:
        return self.period.genus

    @property
    def tau(self) -> complex:
        return self.period.tau


def genus0_surface() -> SurfaceDescriptor:
    return SurfaceDescriptor(SurfaceKind.GENUS0, PeriodMatrix(0, np.zeros((0, 0))))


def torus_surface(tau: complex) -> SurfaceDescriptor:
    return SurfaceDescriptor(SurfaceKind.GENUS1, period_from_tau(tau))


def data_bundle_surface(bundle: SurfaceDataBundle) -> SurfaceDescriptor:
    return SurfaceDescriptor(
        SurfaceKind.DATA_BUNDLE, PeriodMatrix(bundle.genus, bundle.omega), bundle
    )


def same_surface(s1: SurfaceDescriptor, s2: SurfaceDescriptor) -> bool:
    if s1 is s2:
        return True
    if s1.kind is not s2.kind:
        return False
    if s1.kind is SurfaceKind.GENUS0:
        return True
    if s1.kind is SurfaceKind.GENUS1:
        return abs(s1.tau - s2.tau) <= POINT_TOL
    return s1.bundle is s2.bundle


# --- torus lattice arithmetic ---

def lattice_coords(v: complex, tau: complex) -> tuple[float, float]:
    """Real coordinates (alpha, beta) with v = alpha + beta*tau."""
    beta = v.imag / tau.imag
    alpha = v.real - beta * tau.real
    return alpha, beta


def lattice_reduce(v: complex, tau: complex) -> complex:
    """Representative of v mod Z + tau*Z with coordinates in [0, 1)."""
    alpha, beta = lattice_coords(complex(v), tau)
    return (alpha - np.floor(alpha)) + (beta - np.floor(beta)) * tau


def lattice_distance(v: complex, tau: complex) -> float:
    """Distance from v to the nearest lattice point of Z + tau*Z."""
    alpha, beta = lattice_coords(complex(v), tau)
    da = alpha - np.rint(alpha)
    db = beta - np.rint(beta)
    return abs(da + db * tau)


def lattice_equal(u: complex, w: complex, tau: complex, tol: float = POINT_TOL) -> bool:
    return lattice_distance(complex(u) - complex(w), tau) <= tol


def points_equal(surface: SurfaceDescriptor, p, q, tol: float = POINT_TOL) -> bool:
    """Point equality on the surface: lattice quotient at genus 1."""
    p, q = point(p), point(q)
    if surface.kind is SurfaceKind.GENUS1:
        return lattice_equal(coord(p), coord(q), surface.tau, tol)
    if surface.kind is SurfaceKind.GENUS0:
        return abs(coord(p) - coord(q)) <= tol
    if p.label is None or q.label is None:
        raise UnknownPoint("data-bundle points need labels")
    return p.label == q.label


# --- flat line bundles ---

@dataclass(frozen=True, eq=False)
class FlatLineBundle:
    """Flat unitary line bundle fixed by real characteristic vectors a, b.

    The deck multipliers are exp(-2*pi*i a_j) along the A cycles and
    exp(2*pi*i b_j) along the B cycles; the image in the Jacobian is
    z = Omega.a + b.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        chi = ThetaCharacteristic(self.a, self.b)
        object.__setattr__(self, "a", chi.a)
        object.__setattr__(self, "b", chi.b)

    @property
    def characteristic(self) -> ThetaCharacteristic:
        return ThetaCharacteristic(self.a, self.b)

    def dual(self) -> "FlatLineBundle":
        return FlatLineBundle(-self.a, -self.b)

    def jacobian_point(self, period: PeriodMatrix) -> np.ndarray:
        return period.omega @ self.a + self.b

    def theta_at_zero(self, period: PeriodMatrix,
                      cfg: ThetaEvalConfig | None = None) -> complex:
        g = period.genus
        return theta_with_char(self.characteristic, np.zeros(g), period, cfg)

    def is_nondegenerate(self, period: PeriodMatrix,
                         cfg: ThetaEvalConfig | None = None) -> bool:
        return abs(self.theta_at_zero(period, cfg)) > 1e-10


def line_bundle(a, b) -> FlatLineBundle:
    return FlatLineBundle(np.atleast_1d(np.asarray(a, float)),
                          np.atleast_1d(np.asarray(b, float)))


# --- Abel-Jacobi map and prime form ---

ODD_CHAR = ThetaCharacteristic(np.array([0.5]), np.array([0.5]))


def abel_jacobi(surface: SurfaceDescriptor, p) -> np.ndarray:
    """Abel-Jacobi image of a point, as a g-vector.

    Genus 1: the identity on torus coordinates.  Data bundles: the stored
    table value.
    """
    p = point(p)
    if surface.kind is SurfaceKind.GENUS1:
        return np.array([coord(p)], dtype=complex)
    if surface.kind is SurfaceKind.DATA_BUNDLE:
        if p.label is None:
            raise UnknownPoint("data-bundle points need labels")
        return surface.bundle.phi[surface.bundle.index(p.label)]
    raise UnsupportedGenus("Abel-Jacobi map is trivial on the sphere")


@functools.lru_cache(maxsize=256)
def _odd_deriv0(tau: complex, target: float) -> complex:
    cfg = ThetaEvalConfig(target_abs_error=target)
    grad = theta_gradient(ODD_CHAR, np.zeros(1), period_from_tau(tau), cfg)
    return complex(grad[0])


def odd_theta(v: complex, tau: complex, cfg: ThetaEvalConfig | None = None) -> complex:
    """theta[1/2; 1/2](v | tau), the odd genus-1 theta value."""
    cfg = cfg or DEFAULT_CONFIG
    return theta_with_char(ODD_CHAR, np.array([v]), period_from_tau(tau), cfg)


def odd_theta_deriv0(tau: complex, cfg: ThetaEvalConfig | None = None) -> complex:
    """theta[1/2; 1/2]'(0 | tau); cached per modulus."""
    cfg = cfg or DEFAULT_CONFIG
    return _odd_deriv0(complex(tau), cfg.target_abs_error)


def log_deriv_odd_theta(v: complex, tau: complex,
                        cfg: ThetaEvalConfig | None = None) -> complex:
    """d/dv log theta[1/2; 1/2](v | tau)."""
    cfg = cfg or DEFAULT_CONFIG
    pm = period_from_tau(tau)
    val = theta_with_char(ODD_CHAR, np.array([v]), pm, cfg)
    grad = theta_gradient(ODD_CHAR, np.array([v]), pm, cfg)
    return complex(grad[0] / val)


def prime_form(surface: SurfaceDescriptor, p, q,
               cfg: ThetaEvalConfig | None = None) -> complex:
    """Prime form E(p, q) in the global frame; antisymmetric, E(p, p) = 0."""
    p, q = point(p), point(q)
    if surface.kind is SurfaceKind.GENUS1:
        tau = surface.tau
        v = coord(q) - coord(p)
        return odd_theta(v, tau, cfg) / odd_theta_deriv0(tau, cfg)
    if surface.kind is SurfaceKind.DATA_BUNDLE:
        bundle = surface.bundle
        return complex(bundle.prime_form_table[bundle.index(p.label),
                                               bundle.index(q.label)])
    raise UnsupportedGenus("use 1/(p - q) kernels directly at genus 0")


# --- Laurent coefficients at a simple pole ---

def laurent_coeffs(f, center, pole_order: int = 1, radius: float = 1e-2,
                   samples: int = 16) -> tuple[complex, complex]:
    """(residue, constant term) of f at a simple pole.

    Uses equispaced circle sampling at two radii; the finer radius gives
    the returned values and the |t|^-2 mode is monitored on both.

    Raises
    ------
    HigherOrderPole
        If the fitted |t|^-2 component exceeds tolerance.
    """
    if pole_order != 1:
        raise ValueError("only simple poles are supported")
    c = coord(center)
    results = []
    for h in (radius, radius / 2.0):
        modes = circle_modes(f, c, h, orders=(-2, -1, 0), samples=samples)
        results.append(modes)
    fine = results[1]
    scale = max(abs(fine[-1]), abs(fine[0]), 1.0)
    if max(abs(results[0][-2]), abs(fine[-2])) > 1e-6 * scale:
        raise HigherOrderPole(
            f"|t|^-2 component {abs(fine[-2]):.3e} exceeds tolerance at {c}"
        )
    return fine[-1], fine[0]


# --- meromorphic embedding functions on the torus ---

@dataclass(frozen=True, eq=False)
class EmbeddingPair:
    """Two elliptic coordinate functions with simple poles at three points.

    lambda1 = L(z - x1) - L(z - x2) and lambda2 = L(z - x1) - L(z - x3),
    where L is the log-derivative of the odd theta function.  Together they
    embed the torus (birationally) onto a plane cubic.  residues holds
    c[i][k] = -Res_{x_i} lambda_k and consts holds the next Laurent
    coefficients d[i][k], so lambda_k = -c/t - d + O(t) at each pole.
    """

    surface: SurfaceDescriptor
    pole_points: tuple[SurfacePoint, ...]
    residues: np.ndarray   # (m, 2), c[i][k]
    consts: np.ndarray     # (m, 2), d[i][k]
    cfg: ThetaEvalConfig = DEFAULT_CONFIG

    @property
    def m(self) -> int:
        return len(self.pole_points)

    def _log_d(self, v: complex) -> complex:
        return log_deriv_odd_theta(v, self.surface.tau, self.cfg)

    def lambda1(self, z) -> complex:
        z = coord(z)
        x1, x2, _ = (coord(x) for x in self.pole_points)
        return self._log_d(z - x1) - self._log_d(z - x2)

    def lambda2(self, z) -> complex:
        z = coord(z)
        x1, _, x3 = (coord(x) for x in self.pole_points)
        return self._log_d(z - x1) - self._log_d(z - x3)

    def lambda_values(self, z) -> tuple[complex, complex]:
        return self.lambda1(z), self.lambda2(z)

    def lambda_derivs(self, z, order: int = 1, h: float = 1e-5):
        """Richardson-extrapolated central differences of (lambda1, lambda2)."""
        z = coord(z)
        out = []
        for fn in (self.lambda1, self.lambda2):
            if order == 1:
                d1 = (fn(z + h) - fn(z - h)) / (2 * h)
                d2 = (fn(z + 2 * h) - fn(z - 2 * h)) / (4 * h)
            elif order == 2:
                d1 = (fn(z + h) - 2 * fn(z) + fn(z - h)) / h**2
                d2 = (fn(z + 2 * h) - 2 * fn(z) + fn(z - 2 * h)) / (4 * h**2)
            else:
                raise ValueError("order must be 1 or 2")
            out.append((4 * d1 - d2) / 3)
        return tuple(out)

    def is_pole(self, z, tol: float = POINT_TOL) -> bool:
        return any(points_equal(self.surface, z, x, tol) for x in self.pole_points)


def build_embedding_functions(surface: SurfaceDescriptor, x1, x2, x3,
                              cfg: ThetaEvalConfig | None = None,
                              degeneracy_samples: int = 24) -> EmbeddingPair:
    """Construct the coordinate pair for pole points (x1, x2, x3).

    The residue table is fixed by the construction:
    c[:, 0] = (-1, 1, 0) and c[:, 1] = (-1, 0, 1); constants d[i][k] are
    extracted numerically.  A deterministic sample sweep guards against a
    degenerate (non-injective) coordinate map.
    """
    cfg = cfg or DEFAULT_CONFIG
    if surface.kind is not SurfaceKind.GENUS1:
        raise UnsupportedGenus("embedding functions are built on the torus")
    xs = tuple(point(x) for x in (x1, x2, x3))
    for i in range(3):
        for j in range(i + 1, 3):
            if points_equal(surface, xs[i], xs[j]):
                raise DegenerateEmbedding("pole points must be distinct mod lattice")

    residues = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]], dtype=complex)
    pair = EmbeddingPair(surface, xs, residues, np.zeros((3, 2), dtype=complex), cfg)

    consts = np.zeros((3, 2), dtype=complex)
    for i, x in enumerate(xs):
        for k, fn in enumerate((pair.lambda1, pair.lambda2)):
            if residues[i, k] == 0:
                consts[i, k] = -fn(coord(x))
            else:
                _, const = laurent_coeffs(fn, x)
                consts[i, k] = -const
    pair = EmbeddingPair(surface, xs, residues, consts, cfg)

    tau = surface.tau
    samples = []
    k = 1
    while len(samples) < degeneracy_samples:
        alpha = (k * 0.7548776662466927) % 1.0
        beta = (k * 0.5698402909980532) % 1.0
        k += 1
        z = alpha + beta * tau
        if any(lattice_equal(z, coord(x), tau, 1e-3) for x in xs):
            continue
        samples.append(z)
    values = [pair.lambda_values(z) for z in samples]
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            if lattice_equal(samples[i], samples[j], tau, 1e-6):
                continue
            dist = abs(values[i][0] - values[j][0]) + abs(values[i][1] - values[j][1])
            if dist < 1e-8:
                raise DegenerateEmbedding(
                    f"coordinate map collides at {samples[i]} and {samples[j]}"
                )
    return pair
