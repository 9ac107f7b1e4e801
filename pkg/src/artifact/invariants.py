"""Structural invariant suite behind `artifact check invariants`.

Each check returns a row (name, measured, tol). The tolerances are the
per-module ones: reality along the flow 1e-9, frames 1e-8, det F 1e-9.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .fixtures import load_fixture
from .potential import helicoid_potential
from .spectral import offdiagonal_data, phase_fixed_Q, reconstruct_potential
from .surface import _inv2
from .zeroflow import (ZGrid, default_lambda_samples, flow_to, integrate_frame, integrate_grid,
                       monodromy, symmetry_direction)


@dataclass
class InvariantRow:
    name: str
    subject: str
    value: float
    tol: float

    @property
    def ok(self):
        return bool(self.value <= self.tol)

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'} {self.name} [{self.subject}] {self.value:.3e} <= {self.tol:.0e}"


@dataclass
class InvariantReport:
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self):
        return all(r.ok for r in self.rows)

    def add(self, *a):
        self.rows.append(InvariantRow(*a))


def _dagger_inv(F):
    return np.conj(np.swapaxes(_inv2(F), -1, -2))


def genus2_potential():
    lam = np.array([0.3, -0.4 + 0.2j])
    Q = phase_fixed_Q(0.5, lam)
    return reconstruct_potential(offdiagonal_data(1.0, Q, lam, [0, 1]))


def subjects():
    return {"vacuum": load_fixture("vacuum"), "genus1": load_fixture("genus1"),
            "genus2": genus2_potential(), "helicoid": helicoid_potential(0.0)}


def _reality_defect(vals, g):
    # coeff(k) + coeff(g - k - 1)^H over the whole field
    scale = max(1.0, float(np.max(np.abs(vals))))
    out = 0.0
    for k in range(-1, g + 1):
        A = vals[:, :, k + 1]
        B = vals[:, :, g - k]
        out = max(out, float(np.max(np.abs(A + np.conj(np.swapaxes(B, -1, -2))))))
    return out / scale


def check_potential(rep, name, zeta, grid):
    """Reality and isospectrality along the flow, frames, det F, two paths."""
    if zeta.kind == "cmc":
        lams = np.concatenate([default_lambda_samples("cmc"), [0.5, 2.0, 0.3 + 0.4j, 1 / np.conj(0.3 + 0.4j)]])
    else:
        lams = np.concatenate([default_lambda_samples("kdv"), [0.5, 0.2j]])
    fld, F, _, _ = integrate_grid(zeta, grid, lams, order="yx")
    _, F2, _, _ = integrate_grid(zeta, grid, lams, order="xy")
    if zeta.kind == "cmc":
        rep.add("potential reality along the flow", name, _reality_defect(fld.values, zeta.g), 1e-9)
    sc = fld.spectral_coeffs()
    a0 = sc[grid.i0, grid.j0]
    rep.add("isospectrality in z", name, float(np.max(np.abs(sc - a0))) / max(1, float(np.max(np.abs(a0)))), 1e-8)
    det = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    rep.add("det F = 1", name, float(np.max(np.abs(det - 1))), 1e-9)
    rep.add("F(z0) = I", name, float(np.max(np.abs(F[grid.i0, grid.j0] - np.eye(2)))), 1e-14)
    rep.add("zero curvature: two paths agree", name, float(np.max(np.abs(F - F2))), 1e-8)
    if zeta.kind == "cmc":
        err = 0.0
        for k, lam in enumerate(lams):
            m = np.flatnonzero(np.abs(lams - 1 / np.conj(lam)) < 1e-12)
            if len(m):
                err = max(err, float(np.max(np.abs(F[:, :, m[0]] - _dagger_inv(F[:, :, k])))))
        rep.add("frame reality F(1/conj l) = F(l)^-H", name, err, 1e-8)
    else:
        U = F[:, :, list(lams).index(0j)]
        err = float(np.max(np.abs(np.conj(np.swapaxes(U, -1, -2)) @ U - np.eye(2))))
        rep.add("KdV frame F(z, 0) in SU(2)", name, err, 1e-8)


def check_monodromy(rep, name, zeta, length=1.0, z1=0.3 + 0.2j):
    """Equivariance under a base point change along a translation period, and reality."""
    T, res = symmetry_direction(zeta)
    T *= length
    lams = np.array([1.0, 1j, np.exp(0.7j), 0.5, 2.0, 0.4 - 0.3j, 1 / np.conj(0.4 - 0.3j)], complex)
    M0 = monodromy(zeta, T, lams)
    grid = ZGrid(0j, 2, 2, abs(z1.real), abs(z1.imag))
    fr = integrate_frame(integrate_grid(zeta, grid)[0], lams)
    F1 = fr.F[1, 1]
    zeta1 = flow_to(zeta, z1)
    M1 = monodromy(zeta1, T, lams)
    pred = _inv2(F1) @ M0 @ F1
    scale = max(1.0, float(np.max(np.abs(M0))))
    rep.add("monodromy base-point equivariance", name, float(np.max(np.abs(M1 - pred))) / scale, 1e-8)
    err = 0.0
    for k, lam in enumerate(lams):
        m = np.flatnonzero(np.abs(lams - 1 / np.conj(lam)) < 1e-12)
        if len(m):
            err = max(err, float(np.max(np.abs(M0[m[0]] - _dagger_inv(M0[k])))))
    rep.add("monodromy reality M(1/conj l) = M(l)^-H", name, err / scale, 1e-8)
    rep.add("translation symmetry residual", name, res, 1e-10)


def run_invariants(nx=41, ny=41, extent=0.5):
    t = time.time()
    rep = InvariantReport()
    grid = ZGrid.box((-extent, extent), (-extent, extent), nx, ny)
    subj = subjects()
    for name, zeta in subj.items():
        check_potential(rep, name, zeta, grid)
    for name in ("vacuum", "genus1"):
        check_monodromy(rep, name, subj[name])
    rep.seconds = time.time() - t
    return rep
