"""Integration in the base coordinate z: Killing field flow, frames, companions,
monodromy and the recursion residual checks."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import BlowupError, DomainError
from .loopalg import MatrixLaurent
from .potential import (CmcPotential, KdvPotential, alpha, conformal_factor_cmc,
                        minus_lambda_det)

log = logging.getLogger(__name__)

HSTEP = 0.05     # largest RK4 step, in units of 1/|zeta|


@dataclass(frozen=True)
class ZGrid:
    """Node (i, j) sits at origin + (i - i0) hx + 1j (j - j0) hy."""
    origin: complex
    nx: int
    ny: int
    hx: float
    hy: float
    i0: int = 0
    j0: int = 0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise DomainError("grid needs nx, ny >= 2", "zeroflow.ZGrid")
        if not (self.hx > 0 and self.hy > 0 and math.isfinite(self.hx) and math.isfinite(self.hy)):
            raise DomainError("grid spacings must be finite and positive", "zeroflow.ZGrid")
        if not (0 <= self.i0 < self.nx and 0 <= self.j0 < self.ny):
            raise DomainError("origin node outside the grid", "zeroflow.ZGrid")

    @classmethod
    def box(cls, xr, yr, nx, ny, origin=0j):
        """Grid over [xr0, xr1] x [yr0, yr1] (offsets from origin); origin must be a node."""
        hx = (xr[1] - xr[0]) / (nx - 1)
        hy = (yr[1] - yr[0]) / (ny - 1)
        i0 = int(round(-xr[0] / hx))
        j0 = int(round(-yr[0] / hy))
        if abs(xr[0] + i0 * hx) > 1e-9 * hx or abs(yr[0] + j0 * hy) > 1e-9 * hy:
            raise DomainError("origin is not a grid node", "zeroflow.ZGrid.box")
        return cls(complex(origin), nx, ny, hx, hy, i0, j0)

    def x(self):
        return self.origin.real + (np.arange(self.nx) - self.i0) * self.hx

    def y(self):
        return self.origin.imag + (np.arange(self.ny) - self.j0) * self.hy

    def z(self):
        return self.x()[:, None] + 1j * self.y()[None, :]

    def scaled(self, r, origin=None):
        """Same node layout with spacings multiplied by r."""
        return ZGrid(self.origin if origin is None else complex(origin), self.nx, self.ny,
                     self.hx * r, self.hy * r, self.i0, self.j0)


@dataclass
class PkfField:
    grid: ZGrid
    kind: str
    lo: int
    values: np.ndarray          # (nx, ny, K, 2, 2)
    H: float = None

    def potential(self, i, j):
        c = self.values[i, j]
        if self.kind == "cmc":
            return CmcPotential(len(c) - 2, self.H, c)
        return KdvPotential(len(c) - 2, c)

    def omega(self):
        if self.kind == "cmc":
            v = self.values[:, :, 0, 0, 1].real
            return 2 * np.log(2 * v / self.H)
        v = self.values[:, :, -1, 0, 1].real
        return 2 * np.log(4 * v)

    def spectral_coeffs(self):
        """-lambda det xi at every node, as a dense coefficient array."""
        nx, ny, K = self.values.shape[:3]
        out = np.zeros((nx, ny, 2 * K - 1), complex)
        for i in range(nx):
            for j in range(ny):
                a = minus_lambda_det(MatrixLaurent(self.lo, self.values[i, j], trim=False))
                out[i, j] = a.dense(2 * self.lo + 1, 2 * (self.lo + K - 1) + 1)
        return out


@dataclass
class FrameGrid:
    grid: ZGrid
    lams: np.ndarray            # (L,)
    F: np.ndarray               # (nx, ny, L, 2, 2)
    G: np.ndarray = None        # (nx, ny, 2, 2) at lams[gidx]
    gidx: int = None
    drift: float = 0.0
    field: PkfField = None

    def index(self, lam, tol=1e-12):
        k = np.flatnonzero(np.abs(self.lams - lam) <= tol)
        if not len(k):
            raise DomainError(f"lambda {lam} not among the samples", "zeroflow.FrameGrid")
        return int(k[0])

    def at(self, lam):
        return self.F[:, :, self.index(lam)]


def default_lambda_samples(kind="cmc", lam_s=1.0, n=16):
    lams = list(np.exp(2j * np.pi * np.arange(n) / n))
    if not np.any(np.abs(np.array(lams) - lam_s) < 1e-12):
        lams.append(complex(lam_s))
    if kind == "kdv":
        lams.append(0j)
    return np.array(lams, complex)


def _kind(zeta):
    return 0 if zeta.kind == "cmc" else 1


def _substeps(zeta, h, lams=()):
    """RK4 substeps per grid step. The stiffness is that of alpha, so only the
    coefficients entering alpha count (the others can be huge after blowups)."""
    lams = np.abs(np.asarray(lams, complex).reshape(-1))
    lams = lams[lams > 0]
    m = max([1.0] + list(lams) + list(1 / lams))
    c = zeta.c
    k0 = -zeta.lo
    top = abs(c[0][0, 1]) if zeta.kind == "cmc" else abs(c[-1][0, 1])
    a = 2 * top * m + abs(c[k0][0, 0]) + abs(c[k0][1, 0])
    n = max(1.0, a)
    return max(1, int(math.ceil(abs(h) * n / HSTEP)))


def _run(C, F, G, lo, kind, lams, d, h, nsteps, sub, gmode, gidx, phi, gscale, where):
    Cs, Fs, Gs, drift, status = kernels().rk4_path(C, F, G, lo, kind, lams, d, h, nsteps, sub,
                                                   gmode, gidx, phi, gscale)
    if status:
        raise BlowupError("field left the regular region (|coeff| > 1e12)", where)
    return Cs, Fs, Gs, drift


def integrate_grid(zeta0, grid, lams=(), gmode=0, gidx=0, phi=0.0, gscale=1.0,
                   order="yx", sub=None):
    """One coupled RK4 pass over the grid for the field and its frames (companion optional).

    order 'yx': spine along y through the origin node, then lines in x.
    order 'xy': the other way round.
    """
    where = "zeroflow.integrate"
    lams = np.asarray(lams, complex).reshape(-1)
    L = len(lams)
    kind = _kind(zeta0)
    lo = zeta0.lo
    K = zeta0.c.shape[0]
    if sub is None:
        sub = _substeps(zeta0, max(grid.hx, grid.hy), lams)
    nx, ny = grid.nx, grid.ny
    Cf = np.empty((nx, ny, K, 2, 2), complex)
    Ff = np.empty((nx, ny, L, 2, 2), complex)
    Gf = np.empty((nx, ny, 2, 2), complex)
    C0 = zeta0.c[None].astype(complex)
    F0 = np.broadcast_to(np.eye(2, dtype=complex), (1, L, 2, 2)).copy()
    G0 = np.zeros((1, 2, 2), complex)
    args = (lo, kind, lams)
    gargs = (gmode, gidx, phi, gscale, where)
    drift = 0.0
    if order == "yx":
        (n1, a1, h1, d1), (n2, a2, h2, d2) = (ny, grid.j0, grid.hy, 1j), (nx, grid.i0, grid.hx, 1.0)
    else:
        (n1, a1, h1, d1), (n2, a2, h2, d2) = (nx, grid.i0, grid.hx, 1.0), (ny, grid.j0, grid.hy, 1j)
    # spine
    sC = np.empty((n1, K, 2, 2), complex)
    sF = np.empty((n1, L, 2, 2), complex)
    sG = np.empty((n1, 2, 2), complex)
    for sgn, nsteps in ((1, n1 - 1 - a1), (-1, a1)):
        Cs, Fs, Gs, dr = _run(C0, F0, G0, *args, sgn * d1, h1, nsteps, sub, *gargs)
        drift = max(drift, dr)
        idx = a1 + sgn * np.arange(nsteps + 1)
        sC[idx], sF[idx], sG[idx] = Cs[:, 0], Fs[:, 0], Gs[:, 0]
    # lines
    for sgn, nsteps in ((1, n2 - 1 - a2), (-1, a2)):
        Cs, Fs, Gs, dr = _run(sC, sF, sG, *args, sgn * d2, h2, nsteps, sub, *gargs)
        drift = max(drift, dr)
        idx = a2 + sgn * np.arange(nsteps + 1)
        if order == "yx":
            Cf[idx], Ff[idx], Gf[idx] = Cs, Fs, Gs
        else:
            Cf[:, idx] = np.swapaxes(Cs, 0, 1)
            Ff[:, idx] = np.swapaxes(Fs, 0, 1)
            Gf[:, idx] = np.swapaxes(Gs, 0, 1)
    if drift > 1e-6:
        log.warning("frame determinant drift %.3e before renormalisation", drift)
    else:
        log.debug("frame determinant drift %.3e", drift)
    field = PkfField(grid, zeta0.kind, lo, Cf, getattr(zeta0, "H", None))
    return field, Ff, (Gf if gmode else None), drift


def integrate_pkf_cmc(zeta0, grid, sub=None):
    if zeta0.kind != "cmc":
        raise DomainError("expected a CMC potential", "zeroflow.integrate_pkf_cmc")
    return integrate_grid(zeta0, grid, sub=sub)[0]


def integrate_pkf_kdv(zeta0, grid, sub=None):
    if zeta0.kind != "kdv":
        raise DomainError("expected a KdV potential", "zeroflow.integrate_pkf_kdv")
    return integrate_grid(zeta0, grid, sub=sub)[0]


def _zeta0(field):
    i0, j0 = field.grid.i0, field.grid.j0
    return field.potential(i0, j0)


def integrate_frame(field, lams=None, order="yx", sub=None):
    """Frames F with F(z0) = I. The field is re-integrated jointly so the RK4
    stages see consistent intermediate values."""
    zeta0 = _zeta0(field)
    if lams is None:
        lams = default_lambda_samples(field.kind)
    lams = np.asarray(lams, complex)
    if field.kind == "cmc" and np.any(lams == 0):
        raise DomainError("lambda = 0 is not allowed for CMC frames", "zeroflow.integrate_frame")
    fld, F, _, drift = integrate_grid(zeta0, field.grid, lams, order=order, sub=sub)
    return FrameGrid(field.grid, lams, F, drift=drift, field=fld)


def integrate_companion_cmc(field, frames, lam_s, beta_scale=1.0, sub=None):
    """Companion G (dG = G alpha + F dalpha/dlambda, G(z0) = 0) at the Sym point."""
    lams = frames.lams
    gidx = frames.index(lam_s)
    fld, F, G, drift = integrate_grid(_zeta0(field), field.grid, lams, gmode=1, gidx=gidx, sub=sub)
    # linear in beta with G(z0) = 0, so a scaled beta just scales G
    return FrameGrid(field.grid, lams, F, beta_scale * G, gidx, drift, fld)


def integrate_companion_kdv(field, frames, phi, beta_scale=1.0, sub=None):
    """Companion at lambda = 0 with beta = e^{w/2}(i/2)[[0, e^{-i phi}dz],[e^{i phi}dzbar, 0]]."""
    gidx = frames.index(0j)
    fld, F, G, drift = integrate_grid(_zeta0(field), field.grid, frames.lams, gmode=2, gidx=gidx,
                                      phi=phi, gscale=beta_scale, sub=sub)
    return FrameGrid(field.grid, frames.lams, F, G, gidx, drift, fld)


def flow_to(zeta0, dz, nsteps=None):
    """Killing field transported from z0 to z0 + dz along the straight segment."""
    if dz == 0:
        return zeta0
    d = dz / abs(dz)
    if nsteps is None:
        nsteps = _substeps(zeta0, abs(dz))
    Cs, _, _, _ = _run(zeta0.c[None], np.zeros((1, 0, 2, 2)), np.zeros((1, 2, 2)),
                       zeta0.lo, _kind(zeta0), np.zeros(0, complex), d, abs(dz), 1, nsteps,
                       0, 0, 0.0, 1.0, "zeroflow.flow_to")
    return zeta0.with_coeffs(Cs[-1, 0])


def segment(zeta0, T, lams, nsteps=None):
    """Field and frames at z0 + T, integrating along the segment from z0."""
    lams = np.atleast_1d(np.asarray(lams, complex))
    if T == 0:
        return zeta0, np.broadcast_to(np.eye(2), (len(lams), 2, 2)).astype(complex)
    d = T / abs(T)
    if nsteps is None:
        nsteps = _substeps(zeta0, abs(T), lams)
    F0 = np.broadcast_to(np.eye(2, dtype=complex), (1, len(lams), 2, 2)).copy()
    Cs, Fs, _, _ = _run(zeta0.c[None], F0, np.zeros((1, 2, 2)), zeta0.lo, _kind(zeta0), lams,
                        d, abs(T), 1, nsteps, 0, 0, 0.0, 1.0, "zeroflow.monodromy")
    return zeta0.with_coeffs(Cs[-1, 0]), Fs[-1, 0]


def monodromy(zeta0, T, lam, nsteps=None):
    """M(lambda) = F(z0)^{-1} F(z0 + T) with F(z0) = I."""
    lam = np.asarray(lam, complex)
    if zeta0.kind == "cmc" and np.any(lam == 0):
        raise DomainError("lambda = 0", "zeroflow.monodromy")
    M = segment(zeta0, T, lam.reshape(-1), nsteps)[1]
    return M.reshape(lam.shape + (2, 2))


def flow_derivatives(zeta):
    """d/dx and d/dy of the Killing field at the base point, as MatrixLaurents."""
    L = zeta.laurent()
    P = alpha(zeta)
    return -(P.x().bracket(L)), -(P.y().bracket(L))


def symmetry_direction(zeta):
    """Unit complex T with (T-directional derivative of the field) minimal.

    Returns (T, residual). A residual at rounding level means the field, and
    hence alpha, is invariant under translation along T.
    """
    Dx, Dy = flow_derivatives(zeta)
    if Dx.is_zero() and Dy.is_zero():
        return 1.0 + 0j, 0.0
    lo, hi = min(Dx.lo, Dy.lo), max(Dx.hi, Dy.hi)
    a = Dx.dense(lo, hi).ravel()
    b = Dy.dense(lo, hi).ravel()
    M = np.stack([np.concatenate([a.real, a.imag]), np.concatenate([b.real, b.imag])], axis=1)
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    ab = vt[-1]
    T = complex(ab[0], ab[1])
    scale = max(1.0, float(np.max(np.abs(M))))
    return T / abs(T), float(s[-1] / scale)


# recursion residuals

def _d(f, h, axis):
    return np.gradient(f, h, axis=axis, edge_order=2)


def _dz(f, g):
    return 0.5 * (_d(f, g.hx, 0) - 1j * _d(f, g.hy, 1))


def _dzb(f, g):
    return 0.5 * (_d(f, g.hx, 0) + 1j * _d(f, g.hy, 1))


def _lap(f, g):
    out = np.zeros_like(f)
    out[1:-1, 1:-1] = ((f[2:, 1:-1] - 2 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / g.hx**2
                       + (f[1:-1, 2:] - 2 * f[1:-1, 1:-1] + f[1:-1, :-2]) / g.hy**2)
    return out


def ps_residuals(field, H=None, Q=None):
    """Max residuals of the coefficient recursions over interior nodes.

    Returns {name: {k: residual}} plus 'max'.
    """
    g = field.grid
    om = field.omega()
    e = np.exp(om)
    eh = np.exp(om / 2)
    omz = _dz(om, g)
    omzb = np.conj(omz)
    vals = field.values
    lo = field.lo
    K = vals.shape[2]
    ks = range(lo, lo + K)

    def comp(k, i, j):
        if lo <= k < lo + K:
            return vals[:, :, k - lo, i, j]
        return np.zeros(vals.shape[:2], complex)

    u = {k: comp(k, 0, 0) for k in range(lo - 1, lo + K + 1)}
    tau = {k: comp(k, 0, 1) / eh for k in range(lo - 1, lo + K + 1)}
    sig = {k: comp(k, 1, 0) / eh for k in range(lo - 1, lo + K + 1)}
    if Q is None:
        Q = complex(np.mean(-comp(0, 1, 0) * eh))
    Qb = np.conj(Q)
    res = {}
    if field.kind == "cmc":
        H = field.H if H is None else H
        eqs = {
            "u_z": lambda k: _dz(u[k], g) + Q * tau[k] + 0.5 * H * e * sig[k + 1],
            "u_zbar": lambda k: _dzb(u[k], g) + 0.5 * H * e * tau[k - 1] + Qb * sig[k],
            "tau_z": lambda k: _dz(tau[k], g) + omz * tau[k] - H * u[k + 1],
            "tau_zbar": lambda k: eh * _dzb(tau[k], g) - 2 * Qb / eh * u[k],
            "sigma_z": lambda k: eh * _dz(sig[k], g) - 2 * Q / eh * u[k],
            "sigma_zbar": lambda k: _dzb(sig[k], g) + omzb * sig[k] - H * u[k - 1],
            "linearized": lambda k: 0.5 * _lap(u[k], g) + (H**2 * e + 4 * abs(Q)**2 / e) * u[k],
        }
    else:
        eqs = {
            "u_z": lambda k: _dz(u[k], g) + Q * tau[k] + 0.25 * e * sig[k - 1],
            "u_zbar": lambda k: _dzb(u[k], g) + Qb * sig[k],
            "tau_z": lambda k: _dz(tau[k], g) + omz * tau[k] - 0.5 * u[k - 1],
            "tau_zbar": lambda k: eh * _dzb(tau[k], g) - 2 * Qb / eh * u[k],
            "sigma_z": lambda k: eh * _dz(sig[k], g) - 2 * Q / eh * u[k],
            "sigma_zbar": lambda k: _dzb(sig[k], g) + omzb * sig[k],
            "linearized": lambda k: 0.25 * _lap(u[k], g) + 2 * abs(Q)**2 / e * u[k],
        }
    worst = 0.0
    for name, f in eqs.items():
        res[name] = {}
        for k in ks:
            r = float(np.max(np.abs(f(k)[1:-1, 1:-1])))
            res[name][k] = r
            worst = max(worst, r)
    res["max"] = worst
    return res


@dataclass
class WitnessVerdict:
    status: str                 # identical | witness | incompatible
    level: int = None
    tau: complex = None
    witness: MatrixLaurent = None
    degree: int = None
    detail: str = ""


def minimal_degree_witness(z1, z2, tol=1e-10):
    """Lower-degree Killing field from the difference of two fields sharing zeta_-1."""
    if z1.g != z2.g or np.max(np.abs(z1.coeff(-1) - z2.coeff(-1))) > tol:
        raise DomainError("fields must share g and coeff(-1)", "zeroflow.minimal_degree_witness")
    D = z1.laurent() - z2.laurent()
    scale = max(1.0, float(np.max(np.abs(z1.c))))
    c = D.dense(-1, z1.g)
    nz = [k for k in range(-1, z1.g + 1) if np.max(np.abs(c[k + 1])) > tol * scale]
    if not nz:
        return WitnessVerdict("identical")
    l = nz[0]
    Dl = c[l + 1]
    if max(abs(Dl[0, 0]), abs(Dl[1, 0])) > tol * scale:
        return WitnessVerdict("incompatible", l, detail="u_l or sigma_l nonzero at the lowest level")
    eh = np.exp(conformal_factor_cmc(z1) / 2)
    tau = Dl[0, 1] / eh
    W = MatrixLaurent(l, c[l + 1:], trim=True).shift(-(l + 1)).scale(z1.H / (2 * tau))
    return WitnessVerdict("witness", l, complex(tau), W, W.hi)
