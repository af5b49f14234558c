"""Abstract zero-pole interpolation: coupling matrix, solution formulas,
residue conditions, scalar forms, the trisecant identities."""

import numpy as np
import pytest

from zpint.absint import (
    InterpolationDataSet,
    PoleNode,
    ZeroNode,
    build_gamma,
    build_inverse,
    build_solution,
    divisor_characteristic,
    fay_residual,
    forward_couplings,
    full_rank_multiplicative,
    matrix_fay_residual,
    residue_condition_check,
    scalar_multiplicative,
    scalar_partial_fraction,
    verify_solution,
)
from zpint.errors import (
    BasePointCollision,
    DegenerateDenominator,
    KernelSingular,
    NecessityViolated,
    NotFullRank,
    NotSquare,
    SingularGamma,
)
from zpint.kernels import direct_sum_kernel, genus0_kernel, line_kernel
from zpint.surface import (
    genus0_surface,
    lattice_reduce,
    line_bundle,
    torus_surface,
)

TAU = 0.3 + 0.9j
Q_POINT = 0.52 + 0.18j


def scalar_nodes(zeros, poles):
    return (
        tuple(ZeroNode(z, np.array([[1.0]])) for z in zeros),
        tuple(PoleNode(p, np.array([[1.0]])) for p in poles),
    )


@pytest.fixture(scope="module")
def scalar_setup():
    surf = torus_surface(TAU)
    zeros = [0.13 + 0.27j, 0.61 + 0.43j]
    poles = [0.37 + 0.71j, 0.83 + 0.11j]
    chi = line_bundle(0.23, 0.41)
    a_w, b_w, _ = divisor_characteristic(surf, zeros, poles)
    chit = line_bundle(chi.a + a_w, chi.b + b_w)
    zn, pn = scalar_nodes(zeros, poles)
    data = InterpolationDataSet(surface=surf, rank=1, zeros=zn, poles=pn)
    return surf, zeros, poles, chi, chit, data


def torus_points(rng, n, avoid=()):
    out = []
    while len(out) < n:
        z = rng.uniform(0.03, 0.97) + rng.uniform(0.03, 0.97) * TAU
        if all(abs(z - a) > 0.05 for a in tuple(avoid) + tuple(out)):
            out.append(z)
    return out


# --- coupling matrix ---

def test_gamma_sign_reconciles_with_classical_convention():
    # -x K(2, 3) u = -1/(2-3) = 1 equals x u / (mu - lam)
    surf = genus0_surface()
    k = genus0_kernel(1, surf)
    zn, pn = scalar_nodes([2.0], [3.0])
    data = InterpolationDataSet(surface=surf, rank=1, zeros=zn, poles=pn)
    gamma = build_gamma(data, k)
    assert abs(gamma.matrix[0, 0] - 1.0) < 1e-15


def test_gamma_coincident_rule(scalar_setup):
    surf, zeros, poles, chi, chit, _ = scalar_setup
    # rank 2 so the compatibility x u = 0 can hold at a coincidence
    oracle = direct_sum_kernel([line_kernel(surf, chit), line_kernel(surf, chit)])
    data = InterpolationDataSet(
        surface=surf, rank=2,
        zeros=(ZeroNode(zeros[0], np.array([[1.0, 0.0]])),),
        poles=(PoleNode(zeros[0], np.array([[0.0, 1.0]])),),
        couplings={(0, 0): np.array([[0.7]])},
    )
    gamma = build_gamma(data, oracle)
    assert abs(gamma.matrix[0, 0] + 0.7) < 1e-15


def test_gamma_line_bundle_entry(scalar_setup):
    surf, zeros, poles, chi, chit, _ = scalar_setup
    oracle = line_kernel(surf, chit)
    zn, pn = scalar_nodes([zeros[0]], [poles[0]])
    data = InterpolationDataSet(surface=surf, rank=1, zeros=zn, poles=pn)
    gamma = build_gamma(data, oracle)
    assert abs(gamma.matrix[0, 0] + oracle(zeros[0], poles[0])[0, 0]) < 1e-14


def test_dataset_validation(scalar_setup):
    surf, zeros, poles, *_ = scalar_setup
    with pytest.raises(ValueError):   # coincidence without compatibility
        InterpolationDataSet(
            surface=surf, rank=1,
            zeros=(ZeroNode(zeros[0], np.array([[1.0]])),),
            poles=(PoleNode(zeros[0], np.array([[1.0]])),),
            couplings={(0, 0): np.array([[0.0]])},
        )
    with pytest.raises(ValueError):   # duplicate zero points
        InterpolationDataSet(
            surface=surf, rank=1,
            zeros=(ZeroNode(zeros[0], np.array([[1.0]])),
                   ZeroNode(zeros[0] + 1 + TAU, np.array([[1.0]]))),
            poles=tuple(PoleNode(p, np.array([[1.0]])) for p in poles),
        )


# --- genus-0 solutions through the abstract formula ---

def test_solution_genus0_scalar_large_base_point():
    surf = genus0_surface()
    k = genus0_kernel(1, surf)
    zn, pn = scalar_nodes([2.0], [3.0])
    data = InterpolationDataSet(surface=surf, rank=1, zeros=zn, poles=pn)
    T = build_solution(data, 1e6, np.array([[1.0]]), k, k)
    assert abs(T(10.0)[0, 0] - 8 / 7) < 1e-4
    # bias decays as the base point grows
    T2 = build_solution(data, 1e8, np.array([[1.0]]), k, k)
    assert abs(T2(10.0)[0, 0] - 8 / 7) < abs(T(10.0)[0, 0] - 8 / 7)
    Ti = build_inverse(data, 1e6, np.array([[1.0]]), k, k)
    assert abs(Ti(10.0)[0, 0] - 7 / 8) < 1e-4


def test_empty_data_constant(scalar_setup):
    surf, *_ = scalar_setup
    chi = line_bundle(0.23, 0.41)
    k = line_kernel(surf, chi)
    data = InterpolationDataSet(surface=surf, rank=1, zeros=(), poles=())
    T = build_solution(data, Q_POINT, np.array([[2.5 - 1j]]), k, k)
    for p in (0.3 + 0.3j, 0.7 + 0.6j):
        assert abs(T(p)[0, 0] - (2.5 - 1j)) < 1e-12


# --- scalar closed forms on the torus ---

def test_scalar_multiplicative_base_point_and_divisor(scalar_setup, rng):
    surf, zeros, poles, chi, chit, _ = scalar_setup
    Q = 1.3 - 0.4j
    T = scalar_multiplicative(surf, zeros, poles, chi, chit, Q_POINT, Q)
    assert T(Q_POINT) == Q
    for z in zeros:
        assert abs(T(z)) < 1e-12
    assert abs(T(poles[0] + 1e-6)) > 1e4


def test_scalar_multiplicative_swap_inverts(scalar_setup, rng):
    surf, zeros, poles, chi, chit, _ = scalar_setup
    Q = 1.3 - 0.4j
    T = scalar_multiplicative(surf, zeros, poles, chi, chit, Q_POINT, Q)
    T_swapped = scalar_multiplicative(surf, poles, zeros, chit, chi, Q_POINT, 1 / Q)
    for p in torus_points(rng, 5, avoid=zeros + poles + [Q_POINT]):
        prod = T(p) * T_swapped(p)
        assert abs(prod - 1.0) < 1e-10


def test_scalar_necessity_violation(scalar_setup):
    surf, zeros, poles, chi, chit, _ = scalar_setup
    wrong = line_bundle(chit.a + 0.1, chit.b)
    with pytest.raises(NecessityViolated):
        scalar_multiplicative(surf, zeros, poles, chi, wrong, Q_POINT, 1.0)
    with pytest.raises(NecessityViolated):
        scalar_multiplicative(surf, zeros, poles[:1], chi, chit, Q_POINT, 1.0)


def test_scalar_partial_fraction_equivalence(scalar_setup, rng):
    surf, zeros, poles, chi, chit, _ = scalar_setup
    Q = 1.3 - 0.4j
    T_mult = scalar_multiplicative(surf, zeros, poles, chi, chit, Q_POINT, Q)
    T_pf = scalar_partial_fraction(surf, zeros, poles, chi, chit, Q_POINT, Q)
    assert T_pf(Q_POINT) == Q
    for p in torus_points(rng, 10, avoid=zeros + poles + [Q_POINT]):
        a, b = T_mult(p), T_pf(p)
        assert abs(a - b) / (abs(a) + abs(b)) < 1e-9


def test_scalar_equivalence_n3_random_divisor(rng):
    surf = torus_surface(TAU)
    chi = line_bundle(0.11, 0.61)
    zeros = torus_points(rng, 3)
    poles = torus_points(rng, 3, avoid=zeros)
    a_w, b_w, _ = divisor_characteristic(surf, zeros, poles)
    chit = line_bundle(chi.a + a_w, chi.b + b_w)
    q = torus_points(rng, 1, avoid=zeros + poles)[0]
    T_mult = scalar_multiplicative(surf, zeros, poles, chi, chit, q, 1.0)
    T_pf = scalar_partial_fraction(surf, zeros, poles, chi, chit, q, 1.0)
    for p in torus_points(rng, 10, avoid=zeros + poles + [q]):
        a, b = T_mult(p), T_pf(p)
        assert abs(a - b) / (abs(a) + abs(b)) < 1e-8


def test_oracle_solution_matches_scalar_multiplicative(scalar_setup, rng):
    surf, zeros, poles, chi, chit, data = scalar_setup
    Q = 1.3 - 0.4j
    T_mult = scalar_multiplicative(surf, zeros, poles, chi, chit, Q_POINT, Q)
    T = build_solution(data, Q_POINT, np.array([[Q]]),
                       line_kernel(surf, chi), line_kernel(surf, chit))
    assert T(Q_POINT)[0, 0] == Q       # base value is exact
    # base value holds at lattice translates of the base point too
    assert T(Q_POINT + 1 + TAU)[0, 0] == Q
    for p in torus_points(rng, 10, avoid=zeros + poles + [Q_POINT]):
        a, b = T_mult(p), T(p)[0, 0]
        assert abs(a - b) / (abs(a) + abs(b)) < 1e-9


def test_inverse_evaluator(scalar_setup, rng):
    surf, zeros, poles, chi, chit, data = scalar_setup
    Q = np.array([[1.3 - 0.4j]])
    ko, kt = line_kernel(surf, chi), line_kernel(surf, chit)
    T = build_solution(data, Q_POINT, Q, ko, kt)
    Ti = build_inverse(data, Q_POINT, Q, ko, kt)
    for p in torus_points(rng, 20, avoid=zeros + poles + [Q_POINT]):
        assert abs(T(p)[0, 0] * Ti(p)[0, 0] - 1.0) < 1e-9
    # inverse blows up at the prescribed zeros
    assert abs(Ti(zeros[0] + 1e-6)[0, 0]) > 1e4


def test_uniqueness_across_base_points(scalar_setup, rng):
    surf, zeros, poles, chi, chit, data = scalar_setup
    ko, kt = line_kernel(surf, chi), line_kernel(surf, chit)
    T1 = build_solution(data, Q_POINT, np.array([[1.3 - 0.4j]]), ko, kt)
    q2 = 0.71 + 0.37j
    T2 = build_solution(data, q2, T1(q2), ko, kt)
    for p in torus_points(rng, 8, avoid=zeros + poles + [Q_POINT, q2]):
        a, b = T1(p)[0, 0], T2(p)[0, 0]
        assert abs(a - b) / (abs(a) + abs(b)) < 1e-8


def test_solver_rejections(scalar_setup):
    surf, zeros, poles, chi, chit, data = scalar_setup
    ko, kt = line_kernel(surf, chi), line_kernel(surf, chit)
    with pytest.raises(NotSquare):
        bad = InterpolationDataSet(
            surface=surf, rank=1,
            zeros=(ZeroNode(zeros[0], np.array([[1.0]])),),
            poles=tuple(PoleNode(p, np.array([[1.0]])) for p in poles),
        )
        build_solution(bad, Q_POINT, np.array([[1.0]]), ko, kt)
    with pytest.raises(BasePointCollision):
        build_solution(data, zeros[0], np.array([[1.0]]), ko, kt)
    # orthogonal vector data makes a zero row: singular coupling matrix
    chi2 = line_bundle(0.67, 0.19)
    ksum = direct_sum_kernel([kt, line_kernel(surf, chi2)])
    singular = InterpolationDataSet(
        surface=surf, rank=2,
        zeros=(ZeroNode(zeros[0], np.array([[0.0, 1.0]])),),
        poles=(PoleNode(poles[0], np.array([[1.0, 0.0]])),),
    )
    with pytest.raises(SingularGamma):
        build_solution(singular, Q_POINT, np.eye(2), ksum, ksum)


def test_kernel_singular_at_inverse_kernel_pole(scalar_setup):
    surf, zeros, poles, chi, chit, data = scalar_setup
    ko, kt = line_kernel(surf, chi), line_kernel(surf, chit)
    T = build_solution(data, Q_POINT, np.array([[1.0]]), ko, kt)
    z_chi = complex(chi.jacobian_point(surf.period)[0])
    pole = lattice_reduce(Q_POINT + z_chi - (1 + TAU) / 2, TAU)
    with pytest.raises(KernelSingular):
        T(pole)


# --- residue conditions ---

def test_residue_condition_consistent_vs_perturbed(scalar_setup):
    surf, zeros, poles, chi, chit, data = scalar_setup
    ko, kt = line_kernel(surf, chi), line_kernel(surf, chit)
    Q = np.array([[1.3 - 0.4j]])
    results = residue_condition_check(data, Q_POINT, Q, ko, kt)
    assert len(results) == 1
    assert all(res <= 1e-7 for _, res in results)
    zn, pn = scalar_nodes(zeros, [poles[0] + 0.01, poles[1]])
    perturbed = InterpolationDataSet(surface=surf, rank=1, zeros=zn, poles=pn)
    bad = residue_condition_check(perturbed, Q_POINT, Q, ko, kt)
    assert all(res > 1e-3 for _, res in bad)


def test_residue_condition_trivial_kernel_has_no_poles():
    surf = genus0_surface()
    k = genus0_kernel(1, surf)
    zn, pn = scalar_nodes([2.0], [3.0])
    data = InterpolationDataSet(surface=surf, rank=1, zeros=zn, poles=pn)
    assert residue_condition_check(data, 1e6, np.array([[1.0]]), k, k) == []


def test_pole_location_needs_line_bundle_blocks(scalar_setup):
    from zpint.errors import PoleLocationFailure
    from zpint.kernels import CauchyKernelOracle

    surf, zeros, poles, chi, chit, data = scalar_setup
    kt = line_kernel(surf, chit)
    opaque = CauchyKernelOracle(rank=1, surface=surf, evaluator=kt.evaluator)
    with pytest.raises(PoleLocationFailure):
        residue_condition_check(data, Q_POINT, np.array([[1.0]]), opaque, kt)


def test_fay_residual_needs_prime_form():
    from zpint.errors import UnsupportedGenus

    with pytest.raises(UnsupportedGenus):
        fay_residual(genus0_surface(), 0.1, 0.2, 0.3, 0.4, 0.5)


# --- solution verification ---

def test_verify_solution_scalar(scalar_setup):
    surf, zeros, poles, chi, chit, data = scalar_setup
    ko, kt = line_kernel(surf, chi), line_kernel(surf, chit)
    T = build_solution(data, Q_POINT, np.array([[1.3 - 0.4j]]), ko, kt)
    report = verify_solution(T, data)
    assert max(report["pole_span_gaps"]) < 1e-6
    assert max(report["zero_span_gaps"]) < 1e-6
    assert report["coupling_residuals"] == []


def test_verify_hand_built_genus0():
    surf = genus0_surface()
    k = genus0_kernel(2, surf)
    x = np.array([[1.0, 0.5]])
    u = np.array([[0.3, 1.0]])
    data = InterpolationDataSet(
        surface=surf, rank=2,
        zeros=(ZeroNode(0.5, x),), poles=(PoleNode(2.0, u),),
    )
    T = build_solution(data, 1e5, np.eye(2), k, k)
    report = verify_solution(T, data)
    assert max(report["pole_span_gaps"]) < 1e-6
    assert max(report["zero_span_gaps"]) < 1e-6


@pytest.fixture(scope="module")
def diag_coincidence():
    """Block-diagonal map with one coincident zero/pole (coupling 0)."""
    surf = torus_surface(TAU)
    xi_c, mu1, lam2 = 0.23 + 0.41j, 0.61 + 0.13j, 0.47 + 0.77j
    chi1, chi2 = line_bundle(0.23, 0.41), line_bundle(0.67, 0.19)
    aw1, bw1, _ = divisor_characteristic(surf, [xi_c], [mu1])
    chit1 = line_bundle(chi1.a + aw1, chi1.b + bw1)
    aw2, bw2, _ = divisor_characteristic(surf, [lam2], [xi_c])
    chit2 = line_bundle(chi2.a + aw2, chi2.b + bw2)
    f1 = scalar_multiplicative(surf, [xi_c], [mu1], chi1, chit1, Q_POINT, 1.0 + 0.3j)
    f2 = scalar_multiplicative(surf, [lam2], [xi_c], chi2, chit2, Q_POINT, 0.8 - 0.5j)

    def t_known(p):
        return np.diag([f1(p), f2(p)]).astype(complex)

    ko = direct_sum_kernel([line_kernel(surf, chi1), line_kernel(surf, chi2)])
    kt = direct_sum_kernel([line_kernel(surf, chit1), line_kernel(surf, chit2)])
    zeros = (ZeroNode(xi_c, np.array([[1.0, 0.0]])),
             ZeroNode(lam2, np.array([[0.0, 1.0]])))
    poles = (PoleNode(mu1, np.array([[1.0, 0.0]])),
             PoleNode(xi_c, np.array([[0.0, 1.0]])))
    shim = type("NodeShim", (), {
        "zeros": zeros, "poles": poles,
        "coincident_pairs": lambda self: [(0, 1)],
    })()
    rho = forward_couplings(t_known, shim, ko, kt, Q_POINT)
    data = InterpolationDataSet(surface=surf, rank=2, zeros=zeros, poles=poles,
                                couplings=rho)
    return surf, data, ko, kt, t_known, rho


def test_diag_coincidence_round_trip(diag_coincidence, rng):
    surf, data, ko, kt, t_known, rho = diag_coincidence
    # block-diagonal structure forces a vanishing coupling
    assert abs(rho[(0, 1)][0, 0]) < 1e-9
    T = build_solution(data, Q_POINT, t_known(Q_POINT), ko, kt)
    avoid = [n.point.coordinate for n in (*data.zeros, *data.poles)]
    for p in torus_points(rng, 6, avoid=avoid + [Q_POINT]):
        a, b = t_known(p), T(p)
        assert np.abs(a - b).max() / (np.abs(a).max() + np.abs(b).max()) < 1e-9
    report = verify_solution(T, data)
    assert max(report["pole_span_gaps"]) < 1e-6
    assert max(report["zero_span_gaps"]) < 1e-6
    assert max(report["coupling_residuals"]) < 1e-5


@pytest.fixture(scope="module")
def triangular_coincidence():
    """Upper-triangular map: two coincident pairs with nonzero couplings."""
    surf = torus_surface(0.25 + 1.1j)
    tau = 0.25 + 1.1j
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
    f1 = scalar_multiplicative(surf, [xi_c], [mu_star], chi1, chit1, Q_POINT, 1.0 + 0.3j)
    f2 = scalar_multiplicative(surf, [lam_star], [xi_c], chi2, chit2, Q_POINT, 0.8 - 0.5j)
    g = scalar_multiplicative(surf, [lam_g], [mu_g], chi2, chit1, Q_POINT, 1.3 - 0.4j)

    def t_known(p):
        return np.array([[f1(p), g(p)], [0.0, f2(p)]], dtype=complex)

    ko = direct_sum_kernel([line_kernel(surf, chi1), line_kernel(surf, chi2)])
    kt = direct_sum_kernel([line_kernel(surf, chit1), line_kernel(surf, chit2)])
    e1, e2 = np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])
    mu_g_red = lattice_reduce(mu_g, tau)
    zeros = (ZeroNode(xi_c, e1), ZeroNode(lam_star, e2), ZeroNode(mu_g_red, e2))
    poles = (PoleNode(mu_star, e1), PoleNode(xi_c, e2), PoleNode(mu_g_red, e1))
    shim = type("NodeShim", (), {
        "zeros": zeros, "poles": poles,
        "coincident_pairs": lambda self: [(0, 1), (2, 2)],
    })()
    rho = forward_couplings(t_known, shim, ko, kt, Q_POINT)
    data = InterpolationDataSet(surface=surf, rank=2, zeros=zeros, poles=poles,
                                couplings=rho)
    return surf, data, ko, kt, t_known, rho, f2, g, xi_c


def test_triangular_coupling_matches_analytic_value(triangular_coincidence):
    *_, rho, f2, g, xi_c = triangular_coincidence
    from zpint.surface import laurent_coeffs

    res_f2, _ = laurent_coeffs(f2, xi_c)
    expected = -g(xi_c) / res_f2
    assert abs(rho[(0, 1)][0, 0] - expected) < 1e-8 * (1 + abs(expected))
    assert abs(rho[(0, 1)][0, 0]) > 0.1      # genuinely nonzero coupling


def test_triangular_round_trip(triangular_coincidence, rng):
    surf, data, ko, kt, t_known, rho, *_ = triangular_coincidence
    tau = surf.tau
    T = build_solution(data, Q_POINT, t_known(Q_POINT), ko, kt)
    avoid = [n.point.coordinate for n in (*data.zeros, *data.poles)]
    worst = 0.0
    for _ in range(8):
        p = rng.uniform(0.03, 0.97) + rng.uniform(0.03, 0.97) * tau
        if min(abs(p - a) for a in avoid + [Q_POINT]) < 0.05:
            continue
        a, b = t_known(p), T(p)
        worst = max(worst, np.abs(a - b).max() / (np.abs(a).max() + np.abs(b).max()))
    assert worst < 1e-9
    report = verify_solution(T, data)
    assert max(report["pole_span_gaps"]) < 1e-6
    assert max(report["zero_span_gaps"]) < 1e-6
    assert max(report["coupling_residuals"]) < 1e-5
    results = residue_condition_check(data, Q_POINT, t_known(Q_POINT), ko, kt)
    assert all(res <= 1e-7 for _, res in results)


# --- trisecant identities ---

def test_fay_residual_random(rng):
    for tau in (1j, 2j, 0.3 + 0.8j):
        surf = torus_surface(tau)
        for _ in range(20):
            z = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.4, 0.4)
            pts = [rng.uniform(0.03, 0.97) + rng.uniform(0.03, 0.97) * tau
                   for _ in range(4)]
            assert fay_residual(surf, z, *pts) < 1e-9


def test_fay_residual_degenerate(rng):
    surf = torus_surface(TAU)
    z = 0.1 + 0.2j
    p, q, lam = 0.31 + 0.11j, 0.72 + 0.61j, 0.44 + 0.35j
    assert fay_residual(surf, z, p, q, lam, lam) < 1e-12
    assert fay_residual(surf, z, lam, q, lam, p) < 1e-10


def test_matrix_fay_genus0_rank2(rng):
    k = genus0_kernel(2)
    x = np.array([1.0, 0.5 - 0.3j])
    u = np.array([0.2 + 0.1j, 1.0])
    pts = [rng.uniform(-4, 4) + 1j * rng.uniform(-4, 4) for _ in range(30)]
    res = matrix_fay_residual(k, k, 2.0, x, 3.0 + 1j, u, 40.0 + 3j,
                              np.eye(2) + 0.1j, pts)
    assert res < 1e-10


def test_matrix_fay_genus1_rank2(scalar_setup, rng):
    surf, *_ = scalar_setup
    kt = direct_sum_kernel([
        line_kernel(surf, line_bundle(0.21, 0.37)),
        line_kernel(surf, line_bundle(0.72, 0.11)),
    ])
    lam, mu = 0.21 + 0.33j, 0.67 + 0.52j
    x = np.array([1.0, 0.6 - 0.2j])
    u = np.array([0.3 + 0.1j, 1.0])
    pts = torus_points(rng, 30, avoid=[lam, mu, Q_POINT])
    Qm = np.array([[1.1, 0.2j], [0.1, 0.9 - 0.3j]])
    res = matrix_fay_residual(kt, kt, lam, x, mu, u, Q_POINT, Qm, pts)
    assert res < 1e-8


def test_matrix_fay_rank1_reduces_to_trisecant(scalar_setup, rng):
    surf, *_ = scalar_setup
    b1 = line_bundle(0.21, 0.37)
    kt = line_kernel(surf, b1)
    lam, mu = 0.21 + 0.33j, 0.67 + 0.52j
    aw, bw, _ = divisor_characteristic(surf, [lam], [mu])
    chi = line_bundle(b1.a - aw, b1.b - bw)
    ko = line_kernel(surf, chi)
    pts = torus_points(rng, 10, avoid=[lam, mu, Q_POINT])
    res = matrix_fay_residual(ko, kt, lam, np.array([1.0]), mu, np.array([1.0]),
                              Q_POINT, np.array([[1.0]]), pts)
    assert res < 1e-9
    z1 = complex(b1.jacobian_point(surf.period)[0])
    assert max(fay_residual(surf, z1, p, Q_POINT, lam, mu) for p in pts) < 1e-9


def test_matrix_fay_degenerate_denominator(scalar_setup):
    surf, *_ = scalar_setup
    kt = direct_sum_kernel([
        line_kernel(surf, line_bundle(0.21, 0.37)),
        line_kernel(surf, line_bundle(0.72, 0.11)),
    ])
    # orthogonal vectors pair to zero through a block-diagonal kernel
    with pytest.raises(DegenerateDenominator):
        matrix_fay_residual(kt, kt, 0.21 + 0.33j, np.array([1.0, 0.0]),
                            0.67 + 0.52j, np.array([0.0, 1.0]),
                            Q_POINT, np.eye(2), [0.4 + 0.4j])


# --- full-rank multiplicative form ---

def full_rank_setup(r2=True):
    surf = torus_surface(TAU)
    lam, mu = 0.21 + 0.33j, 0.67 + 0.52j
    zt1 = line_bundle(0.31, 0.57)
    zt2 = line_bundle(0.81, 0.23)
    aw, bw, _ = divisor_characteristic(surf, [lam], [mu])
    zc1 = line_bundle(zt1.a - aw, zt1.b - bw)
    zc2 = line_bundle(zt2.a - aw, zt2.b - bw)
    if r2:
        kt = direct_sum_kernel([line_kernel(surf, zt1), line_kernel(surf, zt2)])
        ko = direct_sum_kernel([line_kernel(surf, zc1), line_kernel(surf, zc2)])
        r = 2
    else:
        kt, ko, r = line_kernel(surf, zt1), line_kernel(surf, zc1), 1
    data = InterpolationDataSet(
        surface=surf, rank=r,
        zeros=(ZeroNode(lam, np.eye(r)),),
        poles=(PoleNode(mu, np.eye(r)),),
    )
    return surf, data, ko, kt, lam, mu


def test_full_rank_agreement(rng):
    surf, data, ko, kt, lam, mu = full_rank_setup()
    Q = np.diag([1.2 - 0.1j, 0.8 + 0.4j])
    T_mult, gamma = full_rank_multiplicative(data, kt, Q_POINT, Q)
    T_sol = build_solution(data, Q_POINT, Q, ko, kt)
    for p in torus_points(rng, 10, avoid=[lam, mu, Q_POINT]):
        a, b = T_mult(p), T_sol(p)
        assert np.abs(a - b).max() / (np.abs(a).max() + np.abs(b).max()) < 1e-8
    assert np.abs(gamma + kt(lam, mu)).max() == 0.0


def test_full_rank_rank1_specializes(scalar_setup, rng):
    surf, data, ko, kt, lam, mu = full_rank_setup(r2=False)
    chi_t = kt.bundle
    chi = ko.bundle
    Q = 1.4 + 0.2j
    T_mult, _ = full_rank_multiplicative(data, kt, Q_POINT, np.array([[Q]]))
    T_scalar = scalar_multiplicative(surf, [lam], [mu], chi, chi_t, Q_POINT, Q)
    for p in torus_points(rng, 5, avoid=[lam, mu, Q_POINT]):
        a, b = T_mult(p)[0, 0], T_scalar(p)
        assert abs(a - b) / (abs(a) + abs(b)) < 1e-12


def test_full_rank_rejects_partial_data():
    surf, data, ko, kt, lam, mu = full_rank_setup()
    bad = InterpolationDataSet(
        surface=surf, rank=2,
        zeros=(ZeroNode(lam, np.array([[1.0, 0.2]])),),
        poles=(PoleNode(mu, np.eye(2)),),
    )
    with pytest.raises(NotFullRank):
        full_rank_multiplicative(bad, kt, Q_POINT, np.eye(2))
