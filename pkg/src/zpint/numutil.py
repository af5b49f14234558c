"""Shared numerical helpers: contour mode extraction, rank decisions.

Kept deliberately small; everything here is plain dense numpy on desk-scale
matrices.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "circle_modes",
    "rel_residual",
    "svd_cond",
    "numerical_kernel_dim",
    "principal_angle_gap",
    "orth_columns",
]

EPS_GUARD = 1e-300


def circle_modes(f, center: complex, radius: float, orders, samples: int = 16):
    """Laurent modes of f around center from equispaced circle samples.

    For f(t) = sum_m a_m (t - center)^m analytic in a punctured disk larger
    than radius, the trapezoid average (1/N) sum_k f(t_k) t_k^{-m} equals
    a_m up to aliased modes a_{m + N}, a_{m - N}, ...; with N = 16 and a
    radius small against the distance to the next singularity the aliasing
    error is far below double precision roundoff.

    f may return scalars or ndarrays (constant shape).  Returns a dict
    order -> coefficient with the shape f returns.
    """
    ks = np.arange(samples)
    points = center + radius * np.exp(2j * np.pi * ks / samples)
    values = np.array([np.asarray(f(t), dtype=complex) for t in points])
    spectrum = np.fft.fft(values, axis=0) / samples
    out = {}
    for m in orders:
        coeff = spectrum[m % samples] / radius**m
        out[m] = complex(coeff) if coeff.ndim == 0 else coeff
    return out


def rel_residual(lhs, rhs) -> float:
    """Frobenius residual |lhs - rhs| / (|lhs| + |rhs| + guard)."""
    lhs = np.asarray(lhs, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    num = float(np.linalg.norm(lhs - rhs))
    den = float(np.linalg.norm(lhs)) + float(np.linalg.norm(rhs)) + EPS_GUARD
    return num / den


def svd_cond(mat) -> float:
    """2-norm condition number from singular values; inf when singular."""
    mat = np.asarray(mat, dtype=complex)
    if mat.size == 0:
        return 1.0
    s = np.linalg.svd(mat, compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def numerical_kernel_dim(mat, gap_ratio: float = 1e6) -> int:
    """Kernel dimension by the largest singular-value gap of ratio >= gap_ratio."""
    mat = np.asarray(mat, dtype=complex)
    s = np.linalg.svd(mat, compute_uv=False)
    n = s.size
    floor = s[0] / 1e308 if s[0] > 0 else 0.0
    best_dim = 0
    best_ratio = 1.0
    for k in range(n - 1):
        hi = s[k]
        lo = max(s[k + 1], floor)
        ratio = np.inf if lo == 0.0 else hi / lo
        if ratio >= gap_ratio and ratio > best_ratio:
            best_ratio = ratio
            best_dim = n - 1 - k
    return best_dim


def orth_columns(vectors) -> np.ndarray:
    """Orthonormal basis for the column span of the given matrix."""
    mat = np.asarray(vectors, dtype=complex)
    q, r = np.linalg.qr(mat)
    keep = np.abs(np.diag(r)) > 1e-13 * max(1.0, float(np.abs(r).max()))
    return q[:, keep]


def principal_angle_gap(span_a, span_b) -> float:
    """sin of the largest principal angle between two column spans."""
    qa = orth_columns(span_a)
    qb = orth_columns(span_b)
    if qa.shape[1] != qb.shape[1]:
        return 1.0
    s = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    cos_min = min(1.0, float(s.min()))
    return float(np.sqrt(max(0.0, 1.0 - cos_min**2)))
