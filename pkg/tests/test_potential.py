import numpy as np
import pytest
from instances import seed_potential, wander

from artifact.errors import DegreeError, DomainError
from artifact.loopalg import E12, E21
from artifact.potential import (CmcPotential, KdvPotential, alpha_cmc, alpha_geometric, alpha_kdv,
                                alpha_kdv_geometric, conformal_factor_cmc, conformal_factor_kdv,
                                helicoid_potential, hopf_from_cmc, minus_lambda_det,
                                spectral_poly_cmc, spectral_poly_kdv, validate_cmc,
                                validate_kdv)
from artifact.potential import vacuum as make_vacuum


def test_vacuum_validates(vacuum):
    assert validate_cmc(vacuum).ok
    assert validate_cmc(make_vacuum(H=2.0, Q=0.3j)).ok


def test_reality_violation_names_index():
    z = CmcPotential(1, 1.0, [[[0, 1], [0, 0]], [[0, 0], [-1, 0]], [[0, 0], [-1, 0]]])
    rep = validate_cmc(z)
    bad = {(c.name, c.index) for c in rep.failed()}
    assert ("reality", 0) in bad


def test_negative_v_fails_positivity():
    c = np.array(make_vacuum().c)
    c[0] *= -1
    c[2] *= -1
    rep = validate_cmc(CmcPotential(1, 1.0, c))
    assert [x.name for x in rep.failed()] == ["v_-1 positive"]


def test_trace_and_shape_checks():
    with pytest.raises(DomainError):
        CmcPotential(1, 1.0, np.zeros((2, 2, 2)))
    c = np.array(make_vacuum().c)
    c[1] += np.eye(2)
    assert "trace-free" in [x.name for x in validate_cmc(CmcPotential(1, 1.0, c)).failed()]


def test_conformal_factor_cmc_values():
    z = CmcPotential(1, 1.0, [0.5 * E12, np.zeros((2, 2)), -0.5 * E21])
    assert conformal_factor_cmc(z) == pytest.approx(0.0, abs=1e-15)
    z = CmcPotential(1, 1.0, [np.e / 2 * E12, np.zeros((2, 2)), -np.e / 2 * E21])
    assert conformal_factor_cmc(z) == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("Q", [0.5, 0.5j, 0.3 - 0.4j])
def test_hopf_round_trip(Q):
    z = make_vacuum(H=1.3, Q=Q)
    assert hopf_from_cmc(z) == pytest.approx(Q, rel=1e-14)
    assert spectral_poly_cmc(z).coeff(0) == pytest.approx(-0.5 * z.H * Q, rel=1e-14)


def test_hopf_simple_values():
    z = CmcPotential(1, 1.0, [0.5 * E12, np.array([[0, 0.5], [-0.5, 0]]), -0.5 * E21])
    assert hopf_from_cmc(z) == pytest.approx(0.5)
    z = CmcPotential(1, 1.0, [0.5 * E12, np.array([[0, -0.5j], [-0.5j, 0]]), -0.5 * E21])
    assert hopf_from_cmc(z) == pytest.approx(0.5j)


def test_conformal_factor_kdv_values():
    assert conformal_factor_kdv(helicoid_potential(0.0)) == pytest.approx(0.0, abs=1e-15)
    assert conformal_factor_kdv(helicoid_potential(1.0)) == pytest.approx(2 * np.log(np.cosh(1.0)), rel=1e-14)


def test_alpha_vacuum():
    P = alpha_cmc(make_vacuum())          # H = 1, Q = 1/2, omega = 0
    assert np.allclose(P.U.dense(-1, 0), [[[0, 0.5], [0, 0]], [[0, 0], [-0.5, 0]]])
    assert np.allclose(P.V.dense(0, 1), [[[0, 0.5], [0, 0]], [[0, 0], [-0.5, 0]]])
    assert np.array_equal(P.U.coeff(-1), make_vacuum().coeff(-1))


def test_alpha_cmc_matches_geometric_form(rng):
    z = wander(rng, seed_potential(rng, 2))
    P = alpha_cmc(z)
    om = conformal_factor_cmc(z)
    G = alpha_geometric(om, 2 * z.u0(), z.H, hopf_from_cmc(z))     # omega_z = 2 u_0
    assert P.U.allclose(G.U, 1e-12) and P.V.allclose(G.V, 1e-12)


def test_alpha_kdv_helicoid():
    P = alpha_kdv(helicoid_potential(0.0))
    assert np.allclose(P.U.dense(0, 1), [[[0, 0], [-0.5, 0]], [[0, 0.25], [0, 0]]])
    assert P.V.lo == 0 and P.V.hi == 0
    assert np.allclose(P.V.coeff(0), [[0, 0.5], [0, 0]])
    U0 = P.U(0.0)
    assert U0[0, 1] == 0
    x = 0.4
    z = helicoid_potential(x)
    G = alpha_kdv_geometric(2 * np.log(np.cosh(x)), np.tanh(x), 0.5)
    assert alpha_kdv(z).U.allclose(G.U, 1e-14) and alpha_kdv(z).V.allclose(G.V, 1e-14)


def test_spectral_poly_vacuum_and_reality(rng):
    a = spectral_poly_cmc(make_vacuum())
    assert a.coeff(0) == pytest.approx(-0.25)
    for g in (1, 2, 3):
        z = wander(rng, seed_potential(rng, g))
        a = spectral_poly_cmc(z)
        c = a.dense(0, 2 * g)
        assert a.hi == 2 * g
        assert np.allclose(c, np.conj(c[::-1]), atol=1e-12)


def test_spectral_poly_degree_drop():
    c = np.array(make_vacuum().c)
    c[2] = 0                          # kills the top coefficient
    with pytest.raises(DegreeError):
        spectral_poly_cmc(CmcPotential(1, 1.0, c))


def test_helicoid_potential_isospectral_in_x():
    a0 = spectral_poly_kdv(helicoid_potential(0.0))
    for x in (-1.0, 0.3, 2.0):
        assert spectral_poly_kdv(helicoid_potential(x)).allclose(a0, 1e-13)
    assert np.allclose(helicoid_potential(0.7).coeff(0)[0, 1], -0.5 / np.cosh(0.7))

    # the printed v0 = -2 sech x makes -lambda det depend on x
    def printed(x):
        ch, th = np.cosh(x), np.tanh(x)
        return KdvPotential(0, [[[th / 2, -2 / ch], [-0.5 / ch, -th / 2]], [[0, ch / 4], [0, 0]]])
    assert not spectral_poly_kdv(printed(1.0)).allclose(spectral_poly_kdv(printed(0.0)), 1e-3)


def test_validate_kdv():
    assert validate_kdv(helicoid_potential(0.3)).ok
    rep = validate_kdv(KdvPotential(0, [[[0.1j, 1], [2, -0.1j]], np.zeros((2, 2))]))
    assert not rep.ok and "v_1 positive" in [c.name for c in rep.failed()]


def test_minus_lambda_det_matches_pointwise(rng):
    z = wander(rng, seed_potential(rng, 2))
    a = minus_lambda_det(z)
    for lam in (0.3 + 0.1j, -1.2, 2j):
        assert a(lam) == pytest.approx(-lam * np.linalg.det(z(lam)), rel=1e-12)
