"""Acceptance battery: every release criterion as a runnable check.

Each criterion function returns a list of check dicts
{"name", "residual", "tolerance", "passed"}; run_all stitches them into a
single report.  All randomness is drawn from a seeded generator, so a
report is reproducible bit for bit for a fixed seed and platform.
"""

from __future__ import annotations

import time

import numpy as np

from . import conint, surface
from .absint import (
    InterpolationDataSet,
    PoleNode,
    ZeroNode,
    build_solution,
    divisor_characteristic,
    fay_residual,
    forward_couplings,
    matrix_fay_residual,
    residue_condition_check,
    scalar_multiplicative,
    scalar_partial_fraction,
)
from .conint import (
    DEFAULT_XI,
    SECOND_XI,
    ConintSolution,
    check_condition_I3,
    check_gamma_equality,
    check_intertwining,
    convert_absint_to_conint,
    solve_conint,
)
from .detrep import (
    build_pencil,
    check_kernel_identities,
    curve_membership,
    line_section_condition,
    normalized_sections,
    pencil_membership,
)
from .errors import NotSquare, SingularGamma, ZPViolated, ZpintError
from .genus0 import Genus0Problem, scalar_product_form, solve_genus0, sylvester_coefficients
from .kernels import (
    collection_residual,
    direct_sum_kernel,
    extract_laurent_coeffs,
    genus0_kernel,
    line_connection_form,
    line_kernel,
)
from .surface import (
    build_embedding_functions,
    lattice_reduce,
    line_bundle,
    prime_form,
    torus_surface,
)
from .theta import (
    PeriodMatrix,
    ThetaCharacteristic,
    period_from_tau,
    riemann_theta,
    theta_gradient,
    theta_with_char,
)

__all__ = ["run_all", "CRITERIA"]

# theta(0 | tau = i) = pi^(1/4) / Gamma(3/4), to 20 digits
THETA_AT_I = 1.0864348112133080146

TAUS = (1j, 2j, 0.3 + 0.8j)


def _check(name, residual, tolerance):
    residual = float(residual)
    return {
        "name": name,
        "residual": residual,
        "tolerance": float(tolerance),
        "passed": bool(residual <= tolerance),
    }


def _raises(name, exc_types, fn):
    try:
        fn()
    except exc_types:
        return {"name": name, "residual": 0.0, "tolerance": 0.5, "passed": True}
    except ZpintError:
        return {"name": name, "residual": 1.0, "tolerance": 0.5, "passed": False}
    return {"name": name, "residual": 1.0, "tolerance": 0.5, "passed": False}


def _torus_point(rng, tau, avoid=(), margin=0.03, avoid_tol=5e-2):
    """Deterministic rejection sampling of a torus point away from `avoid`."""
    for _ in range(256):
        alpha = rng.uniform(margin, 1.0 - margin)
        beta = rng.uniform(margin, 1.0 - margin)
        z = alpha + beta * tau
        if all(surface.lattice_distance(z - complex(a), tau) > avoid_tol for a in avoid):
            return z
    raise RuntimeError("rejection sampling failed")


def _random_period_g2(rng) -> PeriodMatrix:
    re = rng.uniform(-0.4, 0.4, (2, 2))
    re = (re + re.T) / 2
    a = rng.uniform(-0.5, 0.5, (2, 2))
    im = a @ a.T + 0.8 * np.eye(2)
    return PeriodMatrix(2, re + 1j * im)


# --- criterion 1: theta engine ---

def checks_theta(seed=1, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []

    worst = 0.0
    for tau in TAUS:
        pm = period_from_tau(tau)
        for _ in range(40):
            z = rng.uniform(-1, 1) + 1j * rng.uniform(-0.8, 0.8) * abs(tau.imag)
            m = int(rng.integers(-2, 3))
            n = int(rng.integers(-2, 3))
            lhs = riemann_theta(z + tau * m + n, pm)
            rhs = np.exp(-1j * np.pi * m * tau * m - 2j * np.pi * m * z) \
                * riemann_theta(z, pm)
            worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs)))
    for _ in range(80):
        pm = _random_period_g2(rng)
        z = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-0.6, 0.6, 2)
        m = rng.integers(-2, 3, 2).astype(float)
        n = rng.integers(-2, 3, 2).astype(float)
        lhs = riemann_theta(z + pm.omega @ m + n, pm)
        factor = np.exp(-1j * np.pi * (m @ pm.omega @ m) - 2j * np.pi * (m @ z))
        rhs = factor * riemann_theta(z, pm)
        worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs)))
    out.append(_check("theta.quasi_periodicity", worst, 1e-10 * tol_scale))

    val = riemann_theta(0.0, period_from_tau(1j))
    out.append(_check("theta.value_at_i", abs(val - THETA_AT_I), 1e-9 * tol_scale))

    worst = 0.0
    h = 1e-5
    for _ in range(10):
        tau = TAUS[int(rng.integers(0, 3))]
        pm = period_from_tau(tau)
        chi = ThetaCharacteristic(rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 1))
        lam = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.5, 0.5)
        grad = theta_gradient(chi, lam, pm)[0]
        fd = (theta_with_char(chi, lam + h, pm)
              - theta_with_char(chi, lam - h, pm)) / (2 * h)
        worst = max(worst, abs(grad - fd) / (abs(fd) + 1e-300))
    for _ in range(5):
        pm = _random_period_g2(rng)
        chi = ThetaCharacteristic(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2))
        lam = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.4, 0.4, 2)
        grad = theta_gradient(chi, lam, pm)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (theta_with_char(chi, lam + e, pm)
                  - theta_with_char(chi, lam - e, pm)) / (2 * h)
            worst = max(worst, abs(grad[k] - fd) / (abs(fd) + 1e-300))
    out.append(_check("theta.gradient_vs_fd", worst, 1e-6 * tol_scale))
    return out


# --- criterion 2: genus-0 interpolation ---

def _random_genus0_problem(rng, r, n):
    pts = []
    while len(pts) < 2 * n:
        cand = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
        if all(abs(cand - p) > 0.2 for p in pts):
            pts.append(cand)
    zeros = tuple(
        (pts[i], rng.standard_normal(r) + 1j * rng.standard_normal(r))
        for i in range(n)
    )
    poles = tuple(
        (pts[n + i], rng.standard_normal(r) + 1j * rng.standard_normal(r))
        for i in range(n)
    )
    return Genus0Problem(rank=r, zeros=zeros, poles=poles)


def checks_genus0(seed=2, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []
    worst_zero = worst_pole = worst_inv = 0.0
    solved = 0
    while solved < 50:
        r = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        problem = _random_genus0_problem(rng, r, n)
        try:
            T = solve_genus0(problem)
        except SingularGamma:
            continue
        solved += 1
        Ti = T.inverse()
        scale = max(float(np.abs(T(3.7 + 1.1j)).max()), 1.0)
        for lam, x in problem.zeros:
            worst_zero = max(worst_zero, float(np.abs(x @ T(lam)).max()) / scale)
        for mu, u in problem.poles:
            worst_pole = max(worst_pole, float(np.abs(Ti(mu) @ u).max()) / scale)
        for _ in range(20):
            z = rng.uniform(-4, 4) + 1j * rng.uniform(-4, 4)
            if min(abs(z - mu) for mu, _ in problem.poles) < 0.1:
                continue
            if min(abs(z - lam) for lam, _ in problem.zeros) < 0.1:
                continue
            worst_inv = max(
                worst_inv, float(np.abs(T(z) @ Ti(z) - np.eye(r)).max())
            )
    out.append(_check("genus0.zero_conditions", worst_zero, 1e-10 * tol_scale))
    out.append(_check("genus0.pole_conditions", worst_pole, 1e-10 * tol_scale))
    out.append(_check("genus0.inverse_identity", worst_inv, 1e-10 * tol_scale))

    worst_eq = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 5))
        pts = rng.uniform(-2, 2, 2 * n) + 1j * rng.uniform(-2, 2, 2 * n)
        lams, mus = pts[:n], pts[n:]
        if min(abs(l - m) for l in lams for m in mus) < 0.1:
            continue
        prod = scalar_product_form(lams, mus)
        coeffs = sylvester_coefficients(lams, mus)
        for _ in range(50):
            z = rng.uniform(-5, 5) + 1j * rng.uniform(-5, 5)
            if min(abs(z - m) for m in mus) < 0.1:
                continue
            pf = 1.0 + sum(c / (z - m) for c, m in zip(coeffs, mus))
            pr = prod(z)
            worst_eq = max(worst_eq, abs(pf - pr) / (abs(pf) + abs(pr)))
    out.append(_check("genus0.product_vs_partial_fraction", worst_eq, 1e-10 * tol_scale))
    return out


# --- criterion 3: Cauchy kernels ---

def _residue_defect(oracle, p0, h=1e-3):
    """Quadratic Richardson extrapolation of (t(p)-t(q)) K toward the diagonal."""
    def val(step):
        return step * oracle(p0 + step, p0)

    v1, v2, v3 = val(h), val(h / 2), val(h / 4)
    a1 = 2 * v2 - v1
    a2 = 2 * v3 - v2
    limit = (4 * a2 - a1) / 3
    return float(np.abs(limit - np.eye(oracle.rank)).max())


def checks_kernel(seed=3, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []
    tau = 0.3 + 0.9j
    surf = torus_surface(tau)
    b1 = line_bundle(0.21, 0.37)
    b2 = line_bundle(0.72, 0.11)
    k1 = line_kernel(surf, b1)
    k2 = line_kernel(surf, b2)
    ksum = direct_sum_kernel([k1, k2])
    k0 = genus0_kernel(2)

    worst = 0.0
    for oracle in (k1, ksum, k0):
        for _ in range(3):
            p0 = _torus_point(rng, tau) if oracle is not k0 \
                else rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
            worst = max(worst, _residue_defect(oracle, p0))
    out.append(_check("kernel.diagonal_residue", worst, 1e-8 * tol_scale))

    worst_dual_sum = 0.0
    worst_closed = 0.0
    for _ in range(10):
        p0 = _torus_point(rng, tau)
        cc = extract_laurent_coeffs(k1, p0)
        worst_dual_sum = max(worst_dual_sum, cc.duality_defect())
        closed = line_connection_form(surf, b1)
        worst_closed = max(worst_closed, abs(cc.A[0, 0] - closed))
        cc2 = extract_laurent_coeffs(ksum, p0)
        worst_dual_sum = max(worst_dual_sum, cc2.duality_defect())
    out.append(_check("kernel.connection_duality", worst_dual_sum, 1e-7 * tol_scale))
    out.append(_check("kernel.connection_closed_form", worst_closed, 1e-6 * tol_scale))

    worst_dual = 0.0
    for oracle in (k1, ksum):
        dual = oracle.dual()
        for _ in range(10):
            p = _torus_point(rng, tau)
            q = _torus_point(rng, tau, avoid=[p])
            defect = np.abs(dual(p, q).T + oracle(q, p)).max()
            scale = np.abs(oracle(q, p)).max()
            worst_dual = max(worst_dual, float(defect / scale))
    out.append(_check("kernel.duality", worst_dual, 1e-10 * tol_scale))

    emb = build_embedding_functions(surf, 0.13 + 0.21j, 0.52 + 0.64j, 0.77 + 0.18j)
    avoid = [surface.coord(x) for x in emb.pole_points]
    worst_col = 0.0
    draws = [(1.0, 0.0), (0.0, 1.0)]
    while len(draws) < 50:
        draws.append((rng.standard_normal() + 1j * rng.standard_normal(),
                      rng.standard_normal() + 1j * rng.standard_normal()))
    for idx, xi in enumerate(draws):
        oracle = ksum if idx % 2 else k1
        p = _torus_point(rng, tau, avoid=avoid)
        if idx % 7 == 3:
            q = p  # degenerate branch
        else:
            q = _torus_point(rng, tau, avoid=avoid + [p])
        worst_col = max(worst_col, collection_residual(oracle, emb, p, q, xi))
    out.append(_check("kernel.collection_formula", worst_col, 1e-8 * tol_scale))
    return out


# --- criterion 4: trisecant identity ---

def checks_fay(seed=4, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for tau in TAUS:
        surf = torus_surface(tau)
        for _ in range(200):
            z = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.4, 0.4)
            pts = [_torus_point(rng, tau) for _ in range(4)]
            worst = max(worst, fay_residual(surf, z, *pts))
    out.append(_check("fay.random_sweep", worst, 1e-9 * tol_scale))

    worst_deg = 0.0
    for tau in TAUS:
        surf = torus_surface(tau)
        for _ in range(10):
            z = rng.uniform(-0.4, 0.4) + 1j * rng.uniform(-0.3, 0.3)
            p, q, lam = (_torus_point(rng, tau) for _ in range(3))
            worst_deg = max(worst_deg, fay_residual(surf, z, p, q, lam, lam))
            worst_deg = max(worst_deg, fay_residual(surf, z, lam, q, lam, p))
    out.append(_check("fay.degenerate_collapses", worst_deg, 1e-10 * tol_scale))
    return out


# --- criterion 5: multiplicative vs partial fraction (line bundles) ---

def checks_scalar_equivalence(seed=5, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []
    tau = 0.25 + 1.1j
    surf = torus_surface(tau)
    worst = 0.0
    for n in (1, 2, 3):
        chi = line_bundle(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
        zeros = [_torus_point(rng, tau) for _ in range(n)]
        poles = [_torus_point(rng, tau, avoid=zeros) for _ in range(n)]
        a_w, b_w, _ = divisor_characteristic(surf, zeros, poles)
        chit = line_bundle(chi.a + a_w, chi.b + b_w)
        q = _torus_point(rng, tau, avoid=zeros + poles)
        Q = 1.3 - 0.4j
        t_mult = scalar_multiplicative(surf, zeros, poles, chi, chit, q, Q)
        t_pf = scalar_partial_fraction(surf, zeros, poles, chi, chit, q, Q)
        for _ in range(50):
            p = _torus_point(rng, tau, avoid=zeros + poles + [q])
            a, b = t_mult(p), t_pf(p)
            worst = max(worst, abs(a - b) / (abs(a) + abs(b)))
    out.append(_check("line.mult_vs_partial_fraction", worst, 1e-9 * tol_scale))

    # single-pair case, term-by-term plain-theta assembly
    chi = line_bundle(0.23, 0.41)
    lam, mu = 0.21 + 0.33j, 0.67 + 0.52j
    a1, b1, _ = divisor_characteristic(surf, [lam], [mu])
    chit = line_bundle(chi.a + a1, chi.b + b1)
    q = 0.52 + 0.18j
    Q = 0.9 + 0.7j
    t_mult = scalar_multiplicative(surf, [lam], [mu], chi, chit, q, Q)
    pm = period_from_tau(tau)
    z_chi = complex(chi.jacobian_point(pm)[0])
    a_exp = float(a1[0])

    def t_terms(p):
        th = lambda w: riemann_theta(w, pm)
        E = lambda s, t: prime_form(surf, s, t)
        pre = np.exp(-2j * np.pi * a_exp * (p - q))
        main = th(z_chi + lam - mu + q - p) * th(z_chi) / (
            th(z_chi + lam - mu) * th(z_chi + q - p))
        cross = (th(z_chi + lam - p) * th(z_chi + q - mu) * E(mu, lam) * E(q, p)
                 / (th(z_chi + lam - mu) * th(z_chi + q - p) * E(mu, p) * E(q, lam)))
        return pre * (main - cross) * Q

    worst_single = 0.0
    for _ in range(50):
        p = _torus_point(rng, tau, avoid=[lam, mu, q])
        a, b = t_mult(p), t_terms(p)
        worst_single = max(worst_single, abs(a - b) / (abs(a) + abs(b)))
    out.append(_check("line.single_pair_term_assembly", worst_single, 1e-9 * tol_scale))
    return out


# --- criterion 6: matrix single-pair identity ---

def checks_matrix_fay(seed=6, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []

    k0 = genus0_kernel(2)
    x = np.array([1.0, 0.5 - 0.3j])
    u = np.array([0.2 + 0.1j, 1.0])
    pts = [rng.uniform(-4, 4) + 1j * rng.uniform(-4, 4) for _ in range(30)]
    res0 = matrix_fay_residual(k0, k0, 2.0, x, 3.0 + 1j, u, 40.0 + 3j,
                               np.eye(2) + 0.1j * np.ones((2, 2)), pts)
    out.append(_check("matrix_fay.genus0_r2", res0, 1e-10 * tol_scale))

    tau = 0.3 + 0.9j
    surf = torus_surface(tau)
    kt = direct_sum_kernel([
        line_kernel(surf, line_bundle(0.21, 0.37)),
        line_kernel(surf, line_bundle(0.72, 0.11)),
    ])
    lam, mu = 0.21 + 0.33j, 0.67 + 0.52j
    q = 0.52 + 0.18j
    pts = [_torus_point(rng, tau, avoid=[lam, mu, q]) for _ in range(30)]
    Qm = np.array([[1.1, 0.2j], [0.1, 0.9 - 0.3j]])
    res1 = matrix_fay_residual(kt, kt, lam, x, mu, u, q, Qm, pts)
    out.append(_check("matrix_fay.genus1_r2_direct_sum", res1, 1e-8 * tol_scale))
    return out


# --- criterion 7: determinantal representations ---

def checks_detrep(seed=7, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []
    tau = 0.3 + 0.9j
    surf = torus_surface(tau)
    emb = build_embedding_functions(surf, 0.13 + 0.21j, 0.52 + 0.64j, 0.77 + 0.18j)
    avoid = [surface.coord(xp) for xp in emb.pole_points]
    k1 = line_kernel(surf, line_bundle(0.21, 0.37))
    ksum = direct_sum_kernel([k1, line_kernel(surf, line_bundle(0.72, 0.11))])

    worst_ident = 0.0
    for oracle in (k1, ksum):
        pencil = build_pencil(oracle, emb)
        sections = normalized_sections(oracle, emb)
        xis = [DEFAULT_XI, SECOND_XI,
               (rng.standard_normal() + 1j * rng.standard_normal(),
                rng.standard_normal() + 1j * rng.standard_normal())]
        for _ in range(20):
            p = _torus_point(rng, tau, avoid=avoid)
            for xi in xis:
                r1, r2, r3 = check_kernel_identities(pencil, sections, emb, p, xi)
                worst_ident = max(worst_ident, r1, r2, r3)
    out.append(_check("detrep.kernel_identities", worst_ident, 1e-7 * tol_scale))

    pencil2 = build_pencil(ksum, emb)
    worst_on = 0.0
    kdim_ok = True
    for _ in range(100):
        p = _torus_point(rng, tau, avoid=avoid)
        det_rel, kdim = curve_membership(pencil2, emb, p)
        worst_on = max(worst_on, det_rel)
        kdim_ok = kdim_ok and (kdim == ksum.rank)
    out.append(_check("detrep.on_curve_membership", worst_on, 1e-7 * tol_scale))
    out.append(_check("detrep.on_curve_kernel_dim", 0.0 if kdim_ok else 1.0, 0.5))

    # Generic off-curve probes: over a random first coordinate, the curve
    # has finitely many heights (roots of det in z2); placing the probe a
    # unit away from all of them makes "off the curve" a certainty rather
    # than a likelihood.
    best_off = np.inf
    for _ in range(20):
        z1 = rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3)
        z2 = _off_curve_height(pencil2, z1, rng)
        det_rel, _ = pencil_membership(pencil2, z1, z2)
        best_off = min(best_off, det_rel)
    out.append(_check("detrep.off_curve_separation", 1.0 / best_off, 1e3 / tol_scale))

    xsum = sum(avoid)
    y1 = _torus_point(rng, tau)
    y2 = _torus_point(rng, tau, avoid=[y1])
    y3 = lattice_reduce(xsum - y1 - y2, tau)
    cond = line_section_condition(ksum, emb, [y1, y2, y3])
    out.append(_check("detrep.line_section_condition", cond, 1e10))
    return out


def _off_curve_height(pencil, z1, rng, clearance: float = 1.0) -> complex:
    """A z2 with (z1, z2) at least `clearance` from every curve height.

    det of the pencil along the vertical line is a polynomial in z2 whose
    roots are the fiber of the curve; interpolation on a circle of nodes
    recovers it exactly.
    """
    size = pencil.size
    nodes = 4.0 * np.exp(2j * np.pi * np.arange(size + 1) / (size + 1))
    values = np.array([np.linalg.det(pencil.pencil(z1, node)) for node in nodes])
    coeffs = np.polyfit(nodes, values, size)
    scale = np.abs(coeffs).max()
    trimmed = np.trim_zeros(np.where(np.abs(coeffs) > 1e-10 * scale, coeffs, 0.0),
                            trim="f")
    roots = np.roots(trimmed) if trimmed.size > 1 else np.zeros(0)
    # stay at moderate height: far out the pencil degenerates toward the
    # singular sigma coefficient, i.e. toward the curve's points at infinity
    for _ in range(256):
        z2 = rng.uniform(-4, 4) + 1j * rng.uniform(-4, 4)
        if not roots.size or np.abs(z2 - roots).min() >= clearance:
            return z2
    raise RuntimeError("could not place an off-curve probe")


# --- criterion 8: concrete interpolation ---

def _scalar_fixture(tau, q):
    surf = torus_surface(tau)
    zeros = [0.13 + 0.27j, 0.61 + 0.43j]
    poles = [0.37 + 0.71j, 0.83 + 0.11j]
    chi = line_bundle(0.23, 0.41)
    a_w, b_w, _ = divisor_characteristic(surf, zeros, poles)
    chit = line_bundle(chi.a + a_w, chi.b + b_w)
    oracle_chi = line_kernel(surf, chi)
    oracle_tilde = line_kernel(surf, chit)
    data = InterpolationDataSet(
        surface=surf, rank=1,
        zeros=tuple(ZeroNode(z, np.array([[1.0]])) for z in zeros),
        poles=tuple(PoleNode(p, np.array([[1.0]])) for p in poles),
    )
    T = build_solution(data, q, np.array([[1.3 - 0.4j]]), oracle_chi, oracle_tilde)
    return surf, data, oracle_chi, oracle_tilde, T


def _triangular_fixture(tau, q):
    """Rank-2 upper-triangular map with two coincident zero/pole pairs."""
    surf = torus_surface(tau)
    xi_c, mu_star, lam_star, mu_g = (0.23 + 0.41j, 0.61 + 0.13j,
                                     0.47 + 0.77j, 0.71 + 0.91j)
    chi1, chi2 = line_bundle(0.23, 0.41), line_bundle(0.67, 0.19)
    aw1, bw1, _ = divisor_characteristic(surf, [xi_c], [mu_star])
    chit1 = line_bundle(chi1.a + aw1, chi1.b + bw1)
    aw2, bw2, _ = divisor_characteristic(surf, [lam_star], [xi_c])
    chit2 = line_bundle(chi2.a + aw2, chi2.b + bw2)
    pm = surf.period
    w_g = complex(chit1.jacobian_point(pm)[0] - chi2.jacobian_point(pm)[0])
    lam_g = mu_g + w_g
    f1 = scalar_multiplicative(surf, [xi_c], [mu_star], chi1, chit1, q, 1.0 + 0.3j)
    f2 = scalar_multiplicative(surf, [lam_star], [xi_c], chi2, chit2, q, 0.8 - 0.5j)
    g = scalar_multiplicative(surf, [lam_g], [mu_g], chi2, chit1, q, 1.3 - 0.4j)

    def t_known(p):
        return np.array([[f1(p), g(p)], [0.0, f2(p)]], dtype=complex)

    oracle_chi = direct_sum_kernel([line_kernel(surf, chi1), line_kernel(surf, chi2)])
    oracle_tilde = direct_sum_kernel([line_kernel(surf, chit1), line_kernel(surf, chit2)])
    e1 = np.array([[1.0, 0.0]])
    e2 = np.array([[0.0, 1.0]])
    mu_g_red = lattice_reduce(mu_g, tau)
    zeros = (ZeroNode(xi_c, e1), ZeroNode(lam_star, e2), ZeroNode(mu_g_red, e2))
    poles = (PoleNode(mu_star, e1), PoleNode(xi_c, e2), PoleNode(mu_g_red, e1))
    shim = type("NodeShim", (), {
        "zeros": zeros, "poles": poles,
        "coincident_pairs": lambda self: [(0, 1), (2, 2)],
    })()
    rho = forward_couplings(t_known, shim, oracle_chi, oracle_tilde, q)
    data = InterpolationDataSet(surface=surf, rank=2, zeros=zeros, poles=poles,
                                couplings=rho)
    T = build_solution(data, q, t_known(q), oracle_chi, oracle_tilde)
    return surf, data, oracle_chi, oracle_tilde, T, t_known


def checks_conint(seed=8, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []
    tau = 0.25 + 1.1j
    q = 0.52 + 0.18j
    emb_points = (0.16 + 0.23j, 0.55 + 0.66j, 0.79 + 0.16j)

    surf, data1, kc1, kt1, t1 = _scalar_fixture(tau, q)
    surf2, data2, kc2, kt2, t2, _ = _triangular_fixture(tau, q)
    emb = build_embedding_functions(surf, *emb_points)
    avoid = [surface.coord(xp) for xp in emb.pole_points]

    worst_xi = worst_eq = worst_mem = worst_map = worst_int = worst_i3 = 0.0
    for data, oracle_chi, oracle_tilde, T in (
        (data1, kc1, kt1, t1), (data2, kc2, kt2, t2),
    ):
        pencil_t = build_pencil(oracle_tilde, emb)
        converted = convert_absint_to_conint(data, oracle_tilde, emb, pencil_t)
        solution = solve_conint(converted)
        worst_xi = max(worst_xi, solution.xi_consistency)
        worst_eq = max(worst_eq, check_gamma_equality(data, oracle_tilde, converted))

        node_pts = [surface.coord(n.point) for n in (*data.zeros, *data.poles)]
        for _ in range(20):
            p = _torus_point(rng, tau, avoid=avoid)
            det_rel, kdim = curve_membership(solution.pencil_new, emb, p)
            worst_mem = max(worst_mem, det_rel)

            z = emb.lambda_values(p)
            mat = solution.pencil_new.pencil(*z)
            _, _, vh = np.linalg.svd(mat)
            vecs = vh[-oracle_chi.rank:].conj().T
            image = solution.apply(z, vecs)
            ref = pencil_t.pencil(*z)
            num = float(np.linalg.norm(ref @ image))
            den = float(np.linalg.norm(ref)) * float(np.linalg.norm(image)) + 1e-300
            worst_map = max(worst_map, num / den)

        for _ in range(8):
            p = _torus_point(rng, tau, avoid=avoid + node_pts + [q])
            worst_int = max(
                worst_int,
                check_intertwining(solution, T, oracle_chi, oracle_tilde, emb, p),
            )
        for pair in converted.coincident_pairs():
            res_a = check_condition_I3(solution, emb, pair, xi=DEFAULT_XI)
            res_b = check_condition_I3(solution, emb, pair, xi=SECOND_XI)
            worst_i3 = max(worst_i3, float(res_a.max()), float(res_b.max()))

    out.append(_check("conint.gamma0_xi_independence", worst_xi, 1e-8 * tol_scale))
    out.append(_check("conint.gamma_equality", worst_eq, 1e-8 * tol_scale))
    out.append(_check("conint.gamma_update_membership", worst_mem, 1e-7 * tol_scale))
    out.append(_check("conint.kernel_mapping", worst_map, 1e-7 * tol_scale))
    out.append(_check("conint.intertwining", worst_int, 1e-7 * tol_scale))
    out.append(_check("conint.coupling_round_trip", worst_i3, 1e-5 * tol_scale))
    return out


# --- criterion 9: negative controls ---

def checks_negative(seed=9, tol_scale=1.0):
    rng = np.random.default_rng(seed)
    out = []

    def nonsquare():
        problem = Genus0Problem(
            rank=1,
            zeros=((0.0, [1.0]), (1.0, [1.0])),
            poles=((2.0, [1.0]),),
        )
        solve_genus0(problem)

    out.append(_raises("negative.genus0_nonsquare", NotSquare, nonsquare))

    def singular():
        problem = Genus0Problem(
            rank=2,
            zeros=((0.0, [1.0, 0.0]), (1.0, [1.0, 0.0])),
            poles=((2.0, [0.0, 1.0]), (3.0, [0.0, 1.0])),
        )
        solve_genus0(problem)

    out.append(_raises("negative.genus0_singular_gamma", SingularGamma, singular))

    tau = 0.3 + 0.9j
    surf = torus_surface(tau)
    chi = line_bundle(0.23, 0.41)
    zeros = [0.13 + 0.27j, 0.61 + 0.43j]
    poles = [0.37 + 0.71j, 0.83 + 0.11j]
    a_w, b_w, _ = divisor_characteristic(surf, zeros, poles)
    chit = line_bundle(chi.a + a_w, chi.b + b_w)
    oracle_chi = line_kernel(surf, chi)
    oracle_tilde = line_kernel(surf, chit)

    def absint_nonsquare():
        data = InterpolationDataSet(
            surface=surf, rank=1,
            zeros=(ZeroNode(zeros[0], np.array([[1.0]])),),
            poles=tuple(PoleNode(p, np.array([[1.0]])) for p in poles),
        )
        build_solution(data, 0.52 + 0.18j, np.array([[1.0]]), oracle_chi, oracle_tilde)

    out.append(_raises("negative.absint_nonsquare", NotSquare, absint_nonsquare))

    # perturbed pole: residue condition must light up
    data_bad = InterpolationDataSet(
        surface=surf, rank=1,
        zeros=tuple(ZeroNode(z, np.array([[1.0]])) for z in zeros),
        poles=tuple(PoleNode(p + 0.01, np.array([[1.0]])) for p in poles),
    )
    rc = residue_condition_check(data_bad, 0.52 + 0.18j, np.array([[1.0]]),
                                 oracle_chi, oracle_tilde)
    residual = min(r for _, r in rc)
    out.append(_check("negative.perturbed_residue_condition",
                      1.0 / (residual + 1e-300), 1e3 / tol_scale))

    # perturbed data behind T: intertwining against the honest S must light up.
    # (Perturbing the base value alone cannot: the boundary normalization
    # diag(T(x^i)) absorbs any valid solution of the same data.)
    tau2 = 0.25 + 1.1j
    q = 0.52 + 0.18j
    surf2, data, kchi, ktil, T = _scalar_fixture(tau2, q)
    emb = build_embedding_functions(surf2, 0.16 + 0.23j, 0.55 + 0.66j, 0.79 + 0.16j)
    converted = convert_absint_to_conint(data, ktil, emb)
    solution = solve_conint(converted)
    data_shift = InterpolationDataSet(
        surface=surf2, rank=1,
        zeros=data.zeros,
        poles=tuple(PoleNode(surface.coord(p.point) + 0.01, p.vectors)
                    for p in data.poles),
    )
    t_bad = build_solution(data_shift, q, np.array([[1.3 - 0.4j]]), kchi, ktil)
    node_pts = [surface.coord(n.point) for n in (*data.zeros, *data.poles)]
    avoid = [surface.coord(xp) for xp in emb.pole_points] + node_pts + [q]
    worst_bad = 0.0
    for _ in range(5):
        p = _torus_point(rng, tau2, avoid=avoid)
        worst_bad = max(worst_bad,
                        check_intertwining(solution, t_bad, kchi, ktil, emb, p))
    out.append(_check("negative.perturbed_intertwining",
                      1.0 / (worst_bad + 1e-300), 1e3 / tol_scale))

    # tampered couplings checked against an honest solution
    _, data2, kc2, kt2, t2, _ = _triangular_fixture(tau2, q)
    emb2 = build_embedding_functions(surf2, 0.16 + 0.23j, 0.55 + 0.66j, 0.79 + 0.16j)
    conv2 = convert_absint_to_conint(data2, kt2, emb2)
    sol2 = solve_conint(conv2)
    tampered = conint.ConintDataSet(
        surface=conv2.surface, pencil=conv2.pencil,
        zeros=conv2.zeros, poles=conv2.poles,
        couplings={k: v + 0.01 for k, v in conv2.couplings.items()},
    )
    sol_tampered = ConintSolution(tampered, sol2.gamma0, sol2.gamma,
                                  sol2.xi, sol2.xi_consistency)
    res = check_condition_I3(sol_tampered, emb2, (0, 1))
    out.append(_check("negative.tampered_coupling",
                      1.0 / (float(res.max()) + 1e-300), 1e3 / tol_scale))

    def zp_violated():
        bad = conint.ConintDataSet(
            surface=conv2.surface, pencil=conv2.pencil,
            zeros=tuple(
                conint.ConintZero(z.surface_point, z.affine,
                                  z.vectors + 0.05 * np.roll(z.vectors, 1, axis=1))
                for z in conv2.zeros
            ),
            poles=conv2.poles,
            couplings=conv2.couplings,
            membership_tol=1.0,
        )
        solve_conint(bad)

    out.append(_raises("negative.conint_zp_violation", ZPViolated, zp_violated))
    return out


CRITERIA = (
    ("theta_engine", checks_theta, 10.0),
    ("genus0_interpolation", checks_genus0, 5.0),
    ("cauchy_kernel", checks_kernel, 20.0),
    ("fay_trisecant", checks_fay, 30.0),
    ("scalar_equivalence", checks_scalar_equivalence, 30.0),
    ("matrix_fay", checks_matrix_fay, 30.0),
    ("determinantal_rep", checks_detrep, 60.0),
    ("concrete_interpolation", checks_conint, 60.0),
    ("negative_controls", checks_negative, 60.0),
)


def run_all(seed: int = 0, tol_scale: float = 1.0, only=None) -> dict:
    """Run the acceptance battery; returns a JSON-ready report."""
    report = {"seed": int(seed), "tol_scale": float(tol_scale), "criteria": []}
    all_pass = True
    for idx, (name, fn, budget) in enumerate(CRITERIA):
        if only is not None and name not in only:
            continue
        start = time.perf_counter()
        checks = fn(seed=seed + idx + 1, tol_scale=tol_scale)
        elapsed = time.perf_counter() - start
        checks.append(_check(f"{name}.runtime_seconds", elapsed, budget))
        passed = all(c["passed"] for c in checks)
        all_pass = all_pass and passed
        report["criteria"].append({
            "name": name,
            "elapsed_s": elapsed,
            "passed": passed,
            "checks": checks,
        })
    report["passed"] = all_pass
    return report
