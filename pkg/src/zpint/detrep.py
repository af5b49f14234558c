"""Determinantal representations of the image curve from a Cauchy kernel.

Given embedding functions (lambda1, lambda2) with simple poles at
x^1, ..., x^m and a rank-r Cauchy kernel, the matrices

    sigma1 = diag(c_i1 I_r),  sigma2 = diag(c_i2 I_r),
    gamma_ii = (d_i1 c_i2 - d_i2 c_i1) I_r,
    gamma_ij = (c_i1 c_j2 - c_j1 c_i2) K(chi; x^i, x^j)   (i != j)

form a pencil z1 sigma2 - z2 sigma1 + gamma whose determinant vanishes on
the image curve with kernel dimension r there, realizing the bundle as a
kernel bundle.  The normalized section matrices

    u_cross(p) = [K(chi; x^1, p); ...; K(chi; x^m, p)]  (stacked),
    u_cross_left(p) = -[K(chi; p, x^1), ..., K(chi; p, x^m)]

annihilate the pencil on the curve from the right and left and pair to
the identity against (xi1 sigma1 + xi2 sigma2) / (xi1 dl1 + xi2 dl2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError, PointOnPoleSet, SingularBoundaryValue, SurfaceMismatch
from .kernels import CauchyKernelOracle
from .numutil import numerical_kernel_dim, rel_residual, svd_cond
from .surface import EmbeddingPair, coord, point, same_surface

__all__ = [
    "PencilRep",
    "NormalizedSections",
    "build_pencil",
    "normalized_sections",
    "check_kernel_identities",
    "curve_membership",
    "adjust_gamma_by_map",
    "line_section_condition",
]


@dataclass(frozen=True, eq=False)
class PencilRep:
    """Two-variable pencil z1 sigma2 - z2 sigma1 + gamma of size M = m r."""

    size: int
    rank: int
    sigma1: np.ndarray
    sigma2: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "gamma"):
            mat = np.asarray(getattr(self, name), dtype=complex).reshape(
                self.size, self.size
            )
            object.__setattr__(self, name, mat)

    def pencil(self, z1: complex, z2: complex) -> np.ndarray:
        return z1 * self.sigma2 - z2 * self.sigma1 + self.gamma

    @property
    def m(self) -> int:
        return self.size // self.rank

    def to_json(self) -> str:
        def enc(mat):
            return [[[float(v.real), float(v.imag)] for v in row] for row in mat]

        return json.dumps(
            {
                "M": self.size,
                "rank": self.rank,
                "sigma1": enc(self.sigma1),
                "sigma2": enc(self.sigma2),
                "gamma": enc(self.gamma),
            }
        )

    @classmethod
    def from_json(cls, payload) -> "PencilRep":
        if isinstance(payload, (str, bytes)):
            payload = json.loads(payload)
        try:
            size = int(payload["M"])
            rank = int(payload["rank"])
            mats = {}
            for name in ("sigma1", "sigma2", "gamma"):
                mats[name] = np.array(
                    [[complex(v[0], v[1]) for v in row] for row in payload[name]]
                )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputError(f"bad pencil payload: {exc}") from exc
        return cls(size, rank, mats["sigma1"], mats["sigma2"], mats["gamma"])


@dataclass(frozen=True, eq=False)
class NormalizedSections:
    """Right and left normalized section evaluators of the kernel bundle."""

    oracle: CauchyKernelOracle
    embedding: EmbeddingPair

    def right(self, p) -> np.ndarray:
        """u_cross(p), shape (M, r); poles exactly at the x^i."""
        return np.vstack([self.oracle(x, p) for x in self.embedding.pole_points])

    def left(self, p) -> np.ndarray:
        """u_cross_left(p), shape (r, M)."""
        return -np.hstack([self.oracle(p, x) for x in self.embedding.pole_points])


def _check_surfaces(oracle, embedding):
    if not same_surface(oracle.surface, embedding.surface):
        raise SurfaceMismatch("kernel and embedding live on different surfaces")


def build_pencil(oracle: CauchyKernelOracle, embedding: EmbeddingPair) -> PencilRep:
    """Assemble the pencil matrices from kernel values at the pole points."""
    _check_surfaces(oracle, embedding)
    r = oracle.rank
    m = embedding.m
    c = embedding.residues
    d = embedding.consts
    eye = np.eye(r, dtype=complex)
    size = m * r
    sigma1 = np.zeros((size, size), dtype=complex)
    sigma2 = np.zeros((size, size), dtype=complex)
    gamma = np.zeros((size, size), dtype=complex)
    for i in range(m):
        sl = slice(i * r, (i + 1) * r)
        sigma1[sl, sl] = c[i, 0] * eye
        sigma2[sl, sl] = c[i, 1] * eye
        gamma[sl, sl] = (d[i, 0] * c[i, 1] - d[i, 1] * c[i, 0]) * eye
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            weight = c[i, 0] * c[j, 1] - c[j, 0] * c[i, 1]
            block = oracle(embedding.pole_points[i], embedding.pole_points[j])
            gamma[i * r:(i + 1) * r, j * r:(j + 1) * r] = weight * block
    return PencilRep(size, r, sigma1, sigma2, gamma)


def normalized_sections(oracle: CauchyKernelOracle,
                        embedding: EmbeddingPair) -> NormalizedSections:
    _check_surfaces(oracle, embedding)
    return NormalizedSections(oracle, embedding)


def check_kernel_identities(pencil: PencilRep, sections: NormalizedSections,
                            embedding: EmbeddingPair, p, xi) -> tuple[float, float, float]:
    """Residuals of the three pencil identities at p.

    (1) pencil(l1, l2) u_cross(p) = 0;
    (2) u_cross_left(p) pencil(l1, l2) = 0;
    (3) u_cross_left (xi1 sigma1 + xi2 sigma2) u_cross / (xi1 l1' + xi2 l2') = I.
    """
    pc = coord(p)
    if embedding.is_pole(pc):
        raise PointOnPoleSet("identity checks exclude the embedding poles")
    l1, l2 = embedding.lambda_values(pc)
    u = sections.right(pc)
    ul = sections.left(pc)
    upen = pencil.pencil(l1, l2)
    scale_u = float(np.linalg.norm(upen)) * float(np.linalg.norm(u))
    res1 = float(np.linalg.norm(upen @ u)) / (scale_u + 1e-300)
    scale_l = float(np.linalg.norm(ul)) * float(np.linalg.norm(upen))
    res2 = float(np.linalg.norm(ul @ upen)) / (scale_l + 1e-300)
    xi1, xi2 = complex(xi[0]), complex(xi[1])
    d1, d2 = embedding.lambda_derivs(pc, order=1)
    pairing = ul @ (xi1 * pencil.sigma1 + xi2 * pencil.sigma2) @ u
    pairing = pairing / (xi1 * d1 + xi2 * d2)
    res3 = rel_residual(pairing, np.eye(pencil.rank))
    return res1, res2, res3


def curve_membership(pencil: PencilRep, embedding: EmbeddingPair, p,
                     gap_ratio: float = 1e6) -> tuple[float, int]:
    """On-curve test of the pencil at the image of p.

    Returns (relative determinant, numerical kernel dimension): the
    product of the r smallest singular values over the r-th power of the
    smallest one above the rank gap, and the SVD kernel dimension at the
    given gap ratio.
    """
    pc = coord(p)
    if embedding.is_pole(pc):
        raise PointOnPoleSet("membership test excludes the embedding poles")
    l1, l2 = embedding.lambda_values(pc)
    return pencil_membership(pencil, l1, l2, gap_ratio)


def pencil_membership(pencil: PencilRep, z1: complex, z2: complex,
                      gap_ratio: float = 1e6) -> tuple[float, int]:
    """Membership statistic of the pencil at an arbitrary affine point."""
    mat = pencil.pencil(complex(z1), complex(z2))
    s = np.linalg.svd(mat, compute_uv=False)
    r = pencil.rank
    ref = s[pencil.size - r - 1] if pencil.size > r else s[0]
    det_rel = float(np.prod(s[pencil.size - r:]) / ref**r) if ref > 0 else 0.0
    return det_rel, numerical_kernel_dim(mat, gap_ratio)


def adjust_gamma_by_map(pencil: PencilRep, boundary_values) -> PencilRep:
    """Normalize the pencil by boundary values T(x^1), ..., T(x^m).

    Conjugates by alpha = diag(T(x^i)) and beta = alpha^{-1}; the sigmas
    commute with the block-scalar conjugation and are unchanged, while
    gamma_ij becomes T(x^i) gamma_ij T(x^j)^{-1} off the diagonal.
    """
    r = pencil.rank
    values = [np.asarray(v, dtype=complex).reshape(r, r) for v in boundary_values]
    if len(values) != pencil.m:
        raise ValueError("need one boundary value per pole point")
    inverses = []
    for v in values:
        if svd_cond(v) > 1e12:
            raise SingularBoundaryValue("boundary value numerically singular")
        inverses.append(np.linalg.inv(v))
    gamma = pencil.gamma.copy()
    for i in range(pencil.m):
        for j in range(pencil.m):
            if i == j:
                continue
            sl_i = slice(i * r, (i + 1) * r)
            sl_j = slice(j * r, (j + 1) * r)
            gamma[sl_i, sl_j] = values[i] @ pencil.gamma[sl_i, sl_j] @ inverses[j]
    return PencilRep(pencil.size, r, pencil.sigma1, pencil.sigma2, gamma)


def line_section_condition(oracle: CauchyKernelOracle, embedding: EmbeddingPair,
                           y_points) -> float:
    """Condition number of the block matrix [K(chi; x^i, y^j)].

    For a line section y^1, ..., y^m (on the torus: any m points whose sum
    is lattice-equivalent to the sum of the x^i), invertibility of this
    matrix reflects h^0 = 0 for the bundle; returns the condition number.
    """
    _check_surfaces(oracle, embedding)
    ys = [point(y) for y in y_points]
    if len(ys) != embedding.m:
        raise ValueError("need exactly m section points")
    r = oracle.rank
    size = embedding.m * r
    mat = np.zeros((size, size), dtype=complex)
    for i, x in enumerate(embedding.pole_points):
        for j, y in enumerate(ys):
            mat[i * r:(i + 1) * r, j * r:(j + 1) * r] = oracle(x, y)
    return svd_cond(mat)
