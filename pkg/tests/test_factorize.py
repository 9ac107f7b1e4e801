import numpy as np
import pytest

from artifact.errors import BigCellError, DomainError, ResolutionError
from artifact.factorize import (CircleLoop, circle, modified_birkhoff, r_iwasawa, symes_cmc,
                                symes_kdv)
from artifact.loopalg import expm_sl2
from artifact.zeroflow import ZGrid, integrate_frame, integrate_pkf_cmc, integrate_pkf_kdv

N = 64


def loop(f, n=N, r=1.0):
    return CircleLoop.from_function(f, n, r)


def su2(a, b):
    s = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    a, b = a / s, b / s
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]])


def test_circle_loop_validation():
    with pytest.raises(DomainError):
        CircleLoop(1.0, 12, np.zeros((12, 2, 2)))
    with pytest.raises(DomainError):
        CircleLoop(0.0, 8, np.zeros((8, 2, 2)))
    assert loop(lambda l: np.eye(2)).det_error() == 0


@pytest.mark.parametrize("const", [np.eye(2), su2(0.3 + 0.4j, -1.2j), np.array([[2, 1], [0, 0.5]])])
def test_iwasawa_constants(const):
    fp = r_iwasawa(loop(lambda l: const))
    unitary = np.allclose(const.conj().T @ const, np.eye(2))
    assert np.allclose(fp.F.samples, const if unitary else np.eye(2), atol=1e-13)
    assert np.allclose(fp.B.samples, np.eye(2) if unitary else const, atol=1e-13)
    assert fp.residual < 1e-13


def test_iwasawa_recovers_known_factors():
    # U unitary on the circle (exp of a skew-hermitian loop), B holomorphic with B(0) = I
    A = np.array([[0.3j, 0.5 - 0.2j], [0.1, -0.3j]])
    U = lambda l: expm_sl2(A / l - l * A.conj().T)
    B = lambda l: np.array([[1, 0.7 * l], [0, 1]]) @ np.array([[1, 0], [0.2j * l * l, 1]])
    fp = r_iwasawa(loop(lambda l: U(l) @ B(l)))
    lam = circle(N)
    assert np.max(np.abs(fp.F.samples - np.array([U(l) for l in lam]))) < 1e-12
    assert np.max(np.abs(fp.B.samples - np.array([B(l) for l in lam]))) < 1e-12
    assert np.allclose(fp.b0, np.eye(2), atol=1e-12)


def test_iwasawa_on_smaller_circle():
    A = np.array([[0.1, 0.4], [-0.3, -0.1]])
    phi = loop(lambda l: expm_sl2(A / l + A.T * l), r=0.5)
    fp = r_iwasawa(phi)
    assert fp.residual < 1e-12
    assert fp.b0[1, 0] == 0 and fp.b0[0, 0].real > 0 and abs(fp.b0[0, 0].imag) < 1e-14
    c = np.fft.fft(fp.B.samples, axis=0) / N
    assert np.max(np.abs(c[N // 2 + 1:])) < 1e-12               # holomorphic inside


def test_birkhoff_identity_and_constant():
    fp = modified_birkhoff(loop(lambda l: np.eye(2)))
    assert np.allclose(fp.F.samples, np.eye(2)) and np.allclose(fp.B.samples, np.eye(2))
    u = su2(1 + 1j, 0.5)
    b = np.array([[1.5, 0.3 - 0.1j], [0, 1 / 1.5]])
    fp = modified_birkhoff(loop(lambda l: u @ b))
    assert np.allclose(fp.F.samples, u, atol=1e-13) and np.allclose(fp.B.samples, b, atol=1e-13)


def test_birkhoff_recovers_known_factors():
    u = su2(0.2 - 1j, 0.7j)
    b = np.array([[2.0, 0.5j], [0, 0.5]])
    F = lambda l: u @ np.array([[1, 0], [0.6 * l, 1]]) @ np.array([[1, 0.3j * l], [0, 1]])
    B = lambda l: b @ np.array([[1, 0.4 / l], [0, 1]])
    fp = modified_birkhoff(loop(lambda l: F(l) @ B(l)))
    lam = circle(N)
    assert np.max(np.abs(fp.F.samples - np.array([F(l) for l in lam]))) < 1e-12
    assert np.max(np.abs(fp.B.samples - np.array([B(l) for l in lam]))) < 1e-12
    assert np.allclose(fp.b0, b)


def test_birkhoff_needs_unit_circle():
    with pytest.raises(DomainError):
        modified_birkhoff(loop(lambda l: np.eye(2), r=0.5))


def test_big_cell_exit():
    with pytest.raises(BigCellError):
        modified_birkhoff(loop(lambda l: np.diag([l, 1 / l])))


def test_resolution_error():
    A = np.array([[0, 30], [-30, 0]])
    with pytest.raises(ResolutionError):
        r_iwasawa(loop(lambda l: expm_sl2(A / l - A.T * l), n=16))


def test_symes_cmc_matches_ode(genus1):
    g = ZGrid.box((-0.4, 0.4), (-0.4, 0.4), 9, 9)
    lams = circle(8)
    sf = symes_cmc(genus1, g, lams=lams)
    assert np.allclose(sf.F[g.i0, g.j0], np.eye(2), atol=1e-13)
    fld = integrate_pkf_cmc(genus1, g, sub=20)
    fr = integrate_frame(fld, lams, sub=20)
    assert np.max(np.abs(sf.F - fr.F)) < 1e-9
    assert np.max(np.abs(sf.omega - fld.omega())) < 1e-9


def test_symes_cmc_grows_resolution(genus1):
    g = ZGrid.box((-2.0, 2.0), (-1.0, 1.0), 5, 3)
    sf = symes_cmc(genus1, g, lams=[1.0], N=16)
    ref = symes_cmc(genus1, g, lams=[1.0], N=512)
    assert sf.N > 16 and np.max(np.abs(sf.F - ref.F)) < 1e-9


def test_symes_kdv_matches_ode(helicoid):
    g = ZGrid.box((-0.3, 0.3), (-0.3, 0.3), 7, 7)
    lams = np.concatenate([circle(8), [0j]])
    sf = symes_kdv(helicoid, g, lams=lams)
    assert np.allclose(sf.F[g.i0, g.j0], np.eye(2), atol=1e-13)
    fld = integrate_pkf_kdv(helicoid, g, sub=20)
    fr = integrate_frame(fld, lams, sub=20)
    assert np.max(np.abs(sf.F - fr.F)) < 1e-9
    assert np.max(np.abs(sf.omega - 2 * np.log(np.cosh(g.x()))[:, None])) < 1e-9


def test_symes_kind_checks(genus1, helicoid):
    g = ZGrid.box((-0.1, 0.1), (-0.1, 0.1), 3, 3)
    with pytest.raises(DomainError):
        symes_cmc(helicoid, g)
    with pytest.raises(DomainError):
        symes_kdv(genus1, g)
    with pytest.raises(DomainError):
        symes_cmc(genus1, g, lams=[0.5])
