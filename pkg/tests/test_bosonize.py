import numpy as np
import pytest

from qds3 import bosonize as bz
from qds3 import fockspace as fk


def space_for(half_width, flavors=1):
    window = fk.MomentumWindow(-half_width, half_width,
                               cap=(2 * half_width + 1) * flavors)
    return fk.build_space(window, flavors)


# -- commutators -------------------------------------------------------------

def test_commutator_diagonal_mode_on_sector():
    space = space_for(12)
    sector = fk.ValiditySector(margin=4, max_excitations=2, excursion=4)
    assert bz.commutator_residual(space, 2, 2, sector) <= 1e-12


def test_commutator_off_diagonal_modes():
    space = space_for(12)
    sector = fk.ValiditySector(margin=4, max_excitations=2, excursion=4)
    assert bz.commutator_residual(space, 1, 2, sector) <= 1e-12


def test_commutator_out_of_sector_breakdown():
    # the top mode reaches across the window: the algebra must fail loudly
    space = space_for(12)
    probe = fk.ValiditySector(margin=0, max_excitations=0)
    assert bz.commutator_residual(space, 24, 24, probe) > 0.1


def test_commutator_flavor_off_diagonal():
    space = space_for(2, flavors=3)
    sector = fk.ValiditySector(margin=1, max_excitations=0)
    res = bz.commutator_residual(space, 1, 1, sector, flavor=0, flavor_prime=2)
    assert res <= 1e-13


# -- two-point function -------------------------------------------------------

def test_two_point_at_origin_geometric_sum():
    space = space_for(6)
    L = space.window.length_L
    a = 0.3 * L
    numeric, analytic, _ = bz.two_point_compare(space, 0.0, a)
    r = np.exp(-2 * np.pi * a / L)
    depth = abs(space.window.n_min)
    geometric = (2 * np.pi / L) * (1 - r ** (depth + 1)) / (1 - r)
    assert numeric.imag == pytest.approx(0.0, abs=1e-15)
    assert numeric.real == pytest.approx(geometric, rel=1e-14)


def test_two_point_deep_window_tolerance():
    window = fk.MomentumWindow(-40, 1, cap=42)
    space = fk.build_space(window)
    L = space.window.length_L
    _, _, rel = bz.two_point_compare(space, L / 8.0, 0.05 * L)
    assert rel <= 1e-5
    # consistent with the geometric tail bound
    assert rel <= np.exp(-2 * np.pi * 0.05 * 40)


def test_two_point_heavy_regularisation():
    space = space_for(8)
    L = space.window.length_L
    _, _, rel = bz.two_point_compare(space, L / 8.0, 0.5 * L)
    assert rel <= 1e-12


def test_two_point_monotone_in_depth():
    L = 2 * np.pi
    rels = []
    for depth in (10, 20, 30, 40):
        space = fk.build_space(fk.MomentumWindow(-depth, 1, cap=depth + 2))
        rels.append(bz.two_point_compare(space, L / 6.0, 0.05 * L)[2])
    assert all(b < a for a, b in zip(rels, rels[1:]))


# -- density identity ---------------------------------------------------------

def test_density_diagonal_elements_exact():
    # the boson-mode part is purely off-diagonal, so diagonal elements of the
    # density reduce to the charge
    space = space_for(6)
    pairs = [(i, j, 1.0) for i in range(space.n_bits) for j in range(space.n_bits)]
    l_ferm = fk.normal_ordered_bilinear(space, pairs)
    sector = fk.ValiditySector(margin=2, max_excitations=2)
    for st in sector.states(space):
        diag = l_ferm.apply({st: 1.0}).get(st, 0.0)
        assert abs(diag - space.charge(st)) <= 1e-13


def test_density_identity_exact_at_zero_regularisation():
    # with the damping off, fermion and boson sides are the same operator
    space = space_for(8)
    sector = fk.ValiditySector(margin=2, max_excitations=3, excursion=3)
    assert bz.density_identity_residual(space, sector, 1e-14) <= 1e-12


def test_density_residual_matches_analytic_mismatch():
    # at a > 0 the worst sector matrix element is exactly 1 - e^{-pi m* a/L}
    # where m* is the largest momentum transfer connecting two sector states
    space = space_for(8)
    L = space.window.length_L
    sector = fk.ValiditySector(margin=2, max_excitations=3, excursion=3)
    m_star = 2 * 3 - 1  # hole depth 3 + particle height 3, adjacent slots
    for a_over_l in (0.02, 0.01, 0.005):
        residual = bz.density_identity_residual(space, sector, a_over_l * L)
        expected = 1.0 - np.exp(-np.pi * m_star * a_over_l)
        assert residual == pytest.approx(expected, rel=1e-10)


def test_density_residual_decreases_with_regularisation():
    space = space_for(8)
    L = space.window.length_L
    sector = fk.ValiditySector(margin=2, max_excitations=3, excursion=3)
    residuals = [bz.density_identity_residual(space, sector, a * L)
                 for a in (0.02, 0.01, 0.005, 0.0025)]
    assert all(b < a for a, b in zip(residuals, residuals[1:]))


# -- kinetic identity ----------------------------------------------------------

def test_kinetic_sea_annihilated():
    space = space_for(6)
    sector = fk.ValiditySector(margin=2, max_excitations=0)
    fit = bz.kinetic_identity_fit(space, sector, charges=(0,))
    assert fit.residual <= 1e-12


def test_kinetic_fit_residual_and_coefficients():
    space = space_for(8)
    sector = fk.ValiditySector(margin=3, max_excitations=2, excursion=3)
    fit = bz.kinetic_identity_fit(space, sector)
    assert fit.residual <= 1e-10
    # chiral branch with this slot spacing: both coefficients are pi*v_F/L
    expected = np.pi / space.window.length_L
    assert fit.c_quadratic == pytest.approx(expected, abs=1e-12)
    assert fit.c_linear == pytest.approx(expected, abs=1e-12)
    assert abs(fit.c_const) <= 1e-12


def test_kinetic_window_independence():
    fits = []
    for half in (10, 14):
        space = space_for(half)
        sector = fk.ValiditySector(margin=3, max_excitations=2, excursion=3)
        fits.append(bz.kinetic_identity_fit(space, sector))
    assert abs(fits[0].c_quadratic - fits[1].c_quadratic) <= 1e-10
    assert abs(fits[0].c_linear - fits[1].c_linear) <= 1e-10


def test_kinetic_eigenvalue_agreement_sparse_oracle():
    # project both sides onto the span of one-pair sector states and compare
    # spectra: at charge 0 the polynomial offset vanishes, so they must agree
    space = space_for(7)
    sector = fk.ValiditySector(margin=3, max_excitations=1, excursion=3)
    states = sector.states(space)
    dk = 2 * np.pi / space.window.length_L
    h_ferm = fk.normal_ordered_bilinear(
        space, [(s, s, dk * (space.window.n_min + s)) for s in range(space.n_bits)])
    modes = [(dk * m,) + fk.boson_mode(space, m)
             for m in range(1, space.window.n_slots)]
    index = {st: i for i, st in enumerate(states)}
    nf = len(states)
    mat_f = np.zeros((nf, nf), dtype=complex)
    mat_b = np.zeros((nf, nf), dtype=complex)
    for col, st in enumerate(states):
        psi = {st: 1.0}
        for out, amp in h_ferm.apply(psi).items():
            if out in index:
                mat_f[index[out], col] = amp
        for (energy, b, bd) in modes:
            for out, amp in bd.apply(b.apply(psi)).items():
                if out in index:
                    mat_b[index[out], col] += energy * amp
    ev_f = np.sort(np.linalg.eigvalsh(mat_f))
    ev_b = np.sort(np.linalg.eigvalsh(mat_b))
    np.testing.assert_allclose(ev_f, ev_b, atol=1e-12)


def test_single_flavor_precondition():
    space = space_for(2, flavors=3)
    sector = fk.ValiditySector(margin=1)
    with pytest.raises(ValueError):
        bz.kinetic_identity_fit(space, sector)
    with pytest.raises(ValueError):
        bz.density_identity_residual(space, sector, 0.1)
