import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.errors import DegenerateError, NonUnitSymPointError
from artifact.surface import (ImmersionPatch, diagnostics, frame_normal, helicoid_patch,
                              helicoid_reference, parallel_surface_check, r3_to_su2,
                              rigid_align, su2_inner, su2_to_r3, sym_bobenko_cmc)
from artifact.zeroflow import ZGrid, integrate_companion_cmc, integrate_frame, integrate_pkf_cmc

fin = st.floats(-5, 5, allow_nan=False)


def cmc_patch(zeta, lam_s=1.0, n=21, ext=0.5):
    g = ZGrid.box((-ext, ext), (-ext, ext), n, n)
    fld = integrate_pkf_cmc(zeta, g)
    fr = integrate_companion_cmc(fld, integrate_frame(fld, [lam_s]), lam_s)
    return sym_bobenko_cmc(fr, lam_s, zeta.H)


def patch_from(f, g, n=None):
    x, y = np.meshgrid(g.x(), g.y(), indexing="ij")
    p = f(x, y)
    if n is None:
        n = np.zeros_like(p)
    return ImmersionPatch(g, p, n)


def test_su2_examples():
    assert np.allclose(su2_to_r3(0.5j * np.diag([1, -1])), [0, 0, 1])
    assert np.allclose(su2_to_r3([[0, 0.5j], [0.5j, 0]]), [1, 0, 0])
    assert np.allclose(su2_to_r3([[0, -0.5], [0.5, 0]]), [0, 1, 0])


@given(fin, fin, fin, fin, fin, fin)
def test_su2_dictionary(a, b, c, d, e, f):
    u, v = np.array([a, b, c]), np.array([d, e, f])
    X, Y = r3_to_su2(u), r3_to_su2(v)
    assert np.allclose(su2_to_r3(X), u)
    assert np.allclose(X.conj().T, -X) and abs(np.trace(X)) < 1e-15
    assert su2_inner(X, Y) == pytest.approx(u @ v, abs=1e-9)
    # the commutator is the cross product
    assert np.allclose(su2_to_r3(X @ Y - Y @ X), np.cross(u, v), atol=1e-9)


def test_frame_normal_identity():
    assert np.allclose(frame_normal(np.eye(2)), [0, 0, 1])


def test_flat_plane():
    g = ZGrid.box((-1, 1), (-1, 1), 11, 11)
    d = diagnostics(patch_from(lambda x, y: np.stack([x, y, 0 * x], -1), g))
    assert np.max(np.abs(d.H)) < 1e-12 and np.max(np.abs(d.Q)) < 1e-12
    assert np.max(np.abs(d.omega)) < 1e-12 and np.max(d.defect) < 1e-12


def test_sphere():
    # inverse stereographic projection: conformal, |H| = 1, Q = 0
    def f(x, y):
        r = 1 + x * x + y * y
        return np.stack([2 * x / r, 2 * y / r, (x * x + y * y - 1) / r], -1)
    errs = []
    for n in (21, 41):
        g = ZGrid.box((-0.5, 0.5), (-0.5, 0.5), n, n)
        d = diagnostics(patch_from(f, g))
        errs.append(max(np.max(np.abs(np.abs(d.H) - 1)), np.max(np.abs(d.Q))))
    assert errs[0] < 2e-2 and errs[0] / errs[1] > 3.5


def test_helicoid_diagnostics_second_order():
    errs = []
    for n in (21, 41):
        p = helicoid_patch(ZGrid.box((-1, 1), (-1, 1), n, n))
        errs.append(max(np.max(np.abs(p.diag.H)), np.max(p.diag.omega_err),
                        np.max(np.abs(np.abs(p.diag.Q) - 0.5))))
    assert errs[1] < 5e-3 and 3.5 < errs[0] / errs[1] < 4.5


def test_helicoid_reference_values():
    assert np.allclose(helicoid_reference(0, 0), [0, 0, 0])
    assert np.allclose(helicoid_reference(1, np.pi / 2), [0, np.sinh(1), np.pi / 2])
    assert np.allclose(helicoid_reference(1, np.pi), [-np.sinh(1), 0, np.pi])


def test_sym_bobenko_vacuum(vacuum):
    p = cmc_patch(vacuum)
    g = p.grid
    assert np.allclose(p.points[g.i0, g.j0], 0, atol=1e-15)
    d = p.diag
    assert np.max(np.abs(d.interior("H") - 1)) < 5e-3
    assert np.max(np.abs(d.interior("Q") - 0.5)) < 5e-3
    assert np.max(d.interior("omega_err")) < 5e-3
    assert np.max(d.normal_dot) < 1e-3
    # round cylinder of radius 1/(2H): every point sits at that distance from the axis
    n = frame_normal(np.eye(2))
    c = p.points[g.i0, g.j0] + n / (2 * vacuum.H)
    axis = np.cross(n, p.points[g.i0 + 1, g.j0] - p.points[g.i0 - 1, g.j0])
    axis = axis / np.linalg.norm(axis)
    r = p.points - c
    r -= (r @ axis)[..., None] * axis
    assert np.max(np.abs(np.linalg.norm(r, axis=-1) - 0.5)) < 1e-6


def test_sym_point_rotates_hopf(vacuum):
    ls = np.exp(0.5j)
    d = cmc_patch(vacuum, ls).diag
    assert np.max(np.abs(d.interior("Q") - 0.5 / ls)) < 5e-3


def test_sym_point_must_be_unit(vacuum):
    g = ZGrid.box((-0.1, 0.1), (-0.1, 0.1), 3, 3)
    fld = integrate_pkf_cmc(vacuum, g)
    fr = integrate_companion_cmc(fld, integrate_frame(fld, [0.5]), 0.5)
    with pytest.raises(NonUnitSymPointError):
        sym_bobenko_cmc(fr, 0.5, 1.0)
    with pytest.raises(NonUnitSymPointError):
        sym_bobenko_cmc(integrate_frame(fld, [1.0]), 1.0, 1.0)


def test_rigid_align_identity_and_motion(rng):
    A = rng.normal(size=(50, 3))
    R, t, rms = rigid_align(A, A)
    assert np.allclose(R, np.eye(3)) and np.allclose(t, 0) and rms < 1e-14
    th = np.pi / 6
    Rz = np.array([[np.cos(th), -np.sin(th), 0], [np.sin(th), np.cos(th), 0], [0, 0, 1]])
    B = A @ Rz.T + [1, 2, 3]
    al = rigid_align(A, B)
    assert np.allclose(al.R, Rz, atol=1e-12) and np.allclose(al.t, [1, 2, 3], atol=1e-12)
    assert al.rms < 1e-12 and not al.reflected
    assert np.allclose(al.apply(A), B)


def test_rigid_align_reflection(rng):
    A = rng.normal(size=(30, 3))
    B = A * [1, 1, -1]
    assert rigid_align(A, B).rms > 0.1
    al = rigid_align(A, B, allow_reflection=True)
    assert al.reflected and al.rms < 1e-12


def test_rigid_align_degenerate():
    with pytest.raises(DegenerateError):
        rigid_align(np.zeros((5, 3)), np.zeros((5, 3)))
    with pytest.raises(DegenerateError):
        rigid_align(np.ones((5, 3)), np.ones((4, 3)))


def test_parallel_surface_vacuum(vacuum):
    # the cylinder's parallel surface at distance 1/H is again a cylinder of radius 1/(2H)
    p = cmc_patch(vacuum)
    rep = parallel_surface_check(p, vacuum.H, 0.5)
    assert rep.distance_err < 1e-14
    eH, eQ = rep.max_errors(vacuum.H)
    assert eH < 5e-3 and eQ < 5e-3
    assert rep.H_check == pytest.approx(vacuum.H)         # 2|Q| = H for the vacuum


def test_parallel_surface_genus1(genus1):
    p = cmc_patch(genus1, n=41)
    rep = parallel_surface_check(p, genus1.H, 0.5)
    eH, eQ = rep.max_errors(genus1.H)
    assert eH < 1e-2 and eQ < 1e-2
