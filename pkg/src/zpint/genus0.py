"""Classical rational matrix zero-pole interpolation on the sphere.

Simple, disjoint data: distinct zeros lambda^i with nonzero row vectors
x_i, distinct poles mu^j with nonzero column vectors u_j, all zeros
distinct from all poles.  Solvability is equivalent to invertibility of
the square coupling matrix Gamma_ij = x_i u_j / (mu^j - lambda^i), and the
unique interpolant with value I at infinity is

    T(z) = I + sum_j u_j c_j / (z - mu^j),    c = Gamma^{-1} [x_1; ...; x_n].

For scalar data the same map has the multiplicative form
prod (z - lambda^i) / prod (z - mu^j), whose partial-fraction coefficients
solve the Sylvester system S c = 1 with S_ij = 1/(mu^j - lambda^i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CountMismatch,
    NotSquare,
    SingularGamma,
    SingularSylvester,
)
from .numutil import svd_cond

__all__ = [
    "Genus0Problem",
    "RationalMatrixFunction",
    "build_gamma_genus0",
    "solve_genus0",
    "scalar_product_form",
    "sylvester_coefficients",
    "COND_LIMIT",
]

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class Genus0Problem:
    """Zero/pole data for the simple disjoint case.

    zeros: sequence of (point, row vector of length r)
    poles: sequence of (point, column vector of length r)
    """

    rank: int
    zeros: tuple
    poles: tuple

    def __post_init__(self):
        zeros = tuple(
            (complex(z), np.asarray(x, dtype=complex).reshape(self.rank))
            for z, x in self.zeros
        )
        poles = tuple(
            (complex(m), np.asarray(u, dtype=complex).reshape(self.rank))
            for m, u in self.poles
        )
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "poles", poles)
        lams = [z for z, _ in zeros]
        mus = [m for m, _ in poles]
        if len(set(lams)) != len(lams) or _too_close(lams):
            raise ValueError("zero points must be distinct")
        if len(set(mus)) != len(mus) or _too_close(mus):
            raise ValueError("pole points must be distinct")
        for lam in lams:
            for mu in mus:
                if abs(lam - mu) <= 1e-12:
                    raise ValueError("zeros and poles must be disjoint")
        for _, v in (*zeros, *poles):
            if np.linalg.norm(v) == 0.0:
                raise ValueError("interpolation vectors must be nonzero")

    @property
    def n_zeros(self) -> int:
        return len(self.zeros)

    @property
    def n_poles(self) -> int:
        return len(self.poles)


def _too_close(points, tol=1e-12):
    pts = list(points)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) <= tol:
                return True
    return False


def build_gamma_genus0(problem: Genus0Problem) -> np.ndarray:
    """Coupling matrix with entries x_i u_j / (mu^j - lambda^i)."""
    gamma = np.zeros((problem.n_zeros, problem.n_poles), dtype=complex)
    for i, (lam, x) in enumerate(problem.zeros):
        for j, (mu, u) in enumerate(problem.poles):
            gamma[i, j] = (x @ u) / (mu - lam)
    return gamma


class RationalMatrixFunction:
    """I + sum_j u_j c_j / (z - mu^j): identity at infinity, poles at mu^j."""

    def __init__(self, rank, poles, pole_vectors, coefficients, gamma_cond,
                 _inverse_data=None):
        self.rank = rank
        self.poles = np.asarray(poles, dtype=complex)
        self.pole_vectors = np.asarray(pole_vectors, dtype=complex)  # (n, r)
        self.coefficients = np.asarray(coefficients, dtype=complex)  # (n, r)
        self.gamma_cond = float(gamma_cond)
        self._inverse_data = _inverse_data
        self._inverse = None

    def __call__(self, z) -> np.ndarray:
        z = complex(z)
        val = np.eye(self.rank, dtype=complex)
        for mu, u, c in zip(self.poles, self.pole_vectors, self.coefficients):
            val = val + np.outer(u, c) / (z - mu)
        return val

    def inverse(self) -> "RationalMatrixFunction":
        """Analytic inverse, built by solving the swapped-transpose problem.

        T^{-1} has poles at the zeros of T with the roles of the vector
        data exchanged; solving that problem and transposing gives an
        independent realization of T^{-1} (rather than a pointwise matrix
        inverse).
        """
        if self._inverse is None:
            if self._inverse_data is None:
                raise ValueError("no problem data attached; cannot invert")
            problem = self._inverse_data
            swapped = Genus0Problem(
                rank=problem.rank,
                zeros=tuple((mu, u) for mu, u in problem.poles),
                poles=tuple((lam, x) for lam, x in problem.zeros),
            )
            inv_t = solve_genus0(swapped)
            inv = RationalMatrixFunction(
                inv_t.rank,
                inv_t.poles,
                inv_t.coefficients,   # transpose swaps the factor roles
                inv_t.pole_vectors,
                inv_t.gamma_cond,
            )
            self._inverse = inv
        return self._inverse


def solve_genus0(problem: Genus0Problem) -> RationalMatrixFunction:
    """Unique interpolant with value I at infinity.

    Raises
    ------
    NotSquare
        If zero and pole counts differ.
    SingularGamma
        If the coupling matrix has condition number above 1e12.
    """
    if problem.n_zeros != problem.n_poles:
        raise NotSquare(
            f"{problem.n_zeros} zeros vs {problem.n_poles} poles"
        )
    n = problem.n_zeros
    if n == 0:
        return RationalMatrixFunction(
            problem.rank, np.zeros(0), np.zeros((0, problem.rank)),
            np.zeros((0, problem.rank)), 1.0, _inverse_data=problem,
        )
    gamma = build_gamma_genus0(problem)
    cond = svd_cond(gamma)
    if cond > COND_LIMIT:
        raise SingularGamma(f"coupling matrix condition {cond:.3e}")
    x_stack = np.array([x for _, x in problem.zeros])   # (n, r)
    coeffs = np.linalg.solve(gamma, x_stack)            # rows c_j
    poles = [mu for mu, _ in problem.poles]
    pole_vectors = [u for _, u in problem.poles]
    return RationalMatrixFunction(
        problem.rank, poles, pole_vectors, coeffs, cond, _inverse_data=problem
    )


def scalar_product_form(zeros, poles):
    """Evaluator of prod (z - lambda^i) / prod (z - mu^j).

    Raises CountMismatch when the divisor is unbalanced.
    """
    lams = [complex(z) for z in zeros]
    mus = [complex(m) for m in poles]
    if len(lams) != len(mus):
        raise CountMismatch(f"{len(lams)} zeros vs {len(mus)} poles")

    def T(z):
        z = complex(z)
        val = 1.0 + 0.0j
        for lam, mu in zip(lams, mus):
            val *= (z - lam) / (z - mu)
        return val

    return T


def sylvester_coefficients(zeros, poles) -> np.ndarray:
    """Partial-fraction coefficients c with sum c_j/(z - mu^j) = product form - 1.

    Solves S c = (1, ..., 1) with S_ij = 1/(mu^j - lambda^i).
    """
    lams = [complex(z) for z in zeros]
    mus = [complex(m) for m in poles]
    if len(lams) != len(mus):
        raise CountMismatch(f"{len(lams)} zeros vs {len(mus)} poles")
    n = len(lams)
    if n == 0:
        return np.zeros(0, dtype=complex)
    s_mat = np.array([[1.0 / (mu - lam) for mu in mus] for lam in lams])
    cond = svd_cond(s_mat)
    if cond > COND_LIMIT:
        raise SingularSylvester(f"Sylvester matrix condition {cond:.3e}")
    return np.linalg.solve(s_mat, np.ones(n, dtype=complex))


def det_winding_number(T, radius: float, samples: int = 720) -> float:
    """Winding number of det T(z) around a circle of the given radius."""
    angles = 2 * np.pi * np.arange(samples + 1) / samples
    values = [np.linalg.det(T(radius * np.exp(1j * a))) for a in angles]
    args = np.unwrap(np.angle(values))
    return float((args[-1] - args[0]) / (2 * np.pi))
