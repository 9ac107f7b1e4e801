"""Sym-Bobenko reconstruction, the su(2) / R^3 dictionary, surface diagnostics
and rigid alignment."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, NonUnitSymPointError

SIGMA3 = 0.5j * np.array([[1, 0], [0, -1]], complex)


def su2_to_r3(X):
    X = np.asarray(X, complex)
    x1 = 2 * X[..., 0, 1].imag
    x2 = -2 * X[..., 0, 1].real
    x3 = 2 * X[..., 0, 0].imag
    return np.stack([x1, x2, x3], axis=-1)


def r3_to_su2(v):
    v = np.asarray(v, float)
    x1, x2, x3 = v[..., 0], v[..., 1], v[..., 2]
    out = np.empty(v.shape[:-1] + (2, 2), complex)
    out[..., 0, 0] = 0.5j * x3
    out[..., 0, 1] = 0.5j * (x1 + 1j * x2)
    out[..., 1, 0] = 0.5j * (x1 - 1j * x2)
    out[..., 1, 1] = -0.5j * x3
    return out


def su2_inner(X, Y):
    return (-2 * np.trace(X @ Y, axis1=-2, axis2=-1)).real


def _inv2(F):
    out = np.empty_like(F)
    det = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    out[..., 0, 0] = F[..., 1, 1] / det
    out[..., 1, 1] = F[..., 0, 0] / det
    out[..., 0, 1] = -F[..., 0, 1] / det
    out[..., 1, 0] = -F[..., 1, 0] / det
    return out


def frame_normal(F):
    """Unit normal F (i/2) diag(1,-1) F^-1 as R^3 vectors."""
    return su2_to_r3(F @ SIGMA3 @ _inv2(F))


@dataclass
class Diagnostics:
    H: np.ndarray
    Q: np.ndarray
    omega: np.ndarray
    defect: np.ndarray
    normal_dot: np.ndarray          # max(|<N,f_x>|, |<N,f_y>|) with the stored normals
    omega_err: np.ndarray = None

    def interior(self, name, trim=1):
        a = getattr(self, name)
        return a[trim:-trim, trim:-trim] if trim else a


@dataclass
class ImmersionPatch:
    grid: object
    points: np.ndarray              # (nx, ny, 3)
    normals: np.ndarray             # (nx, ny, 3)
    omega: np.ndarray = None        # stored conformal factor
    diag: Diagnostics = field(default=None, repr=False)

    def flat(self):
        return self.points.reshape(-1, 3)


def _grad(f, h, axis):
    return np.gradient(f, h, axis=axis, edge_order=2)


def _second(f, h, axis):
    """d2f along axis: central inside, 4-point one-sided (second order) at the ends."""
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = f[2:] - 2 * f[1:-1] + f[:-2]
    if len(f) >= 4:
        out[0] = 2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]
        out[-1] = 2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]
    else:
        out[0], out[-1] = out[1], out[-2]
    return np.moveaxis(out / h**2, 0, axis)


def diagnostics(patch):
    """Finite-difference H, Q, omega and conformal defect at every node."""
    g = patch.grid
    f = patch.points
    fx = _grad(f, g.hx, 0)
    fy = _grad(f, g.hy, 1)
    fxx = _second(f, g.hx, 0)
    fyy = _second(f, g.hy, 1)
    fxy = 0.5 * (_grad(fx, g.hy, 1) + _grad(fy, g.hx, 0))
    n = np.cross(fx, fy)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    E = np.sum(fx * fx, -1)
    Fm = np.sum(fx * fy, -1)
    G = np.sum(fy * fy, -1)
    L = np.sum(fxx * n, -1)
    M = np.sum(fxy * n, -1)
    N = np.sum(fyy * n, -1)
    H = (L * G - 2 * M * Fm + N * E) / (2 * (E * G - Fm**2))
    Q = 0.25 * (L - N - 2j * M)
    om = np.log(0.5 * (E + G))
    defect = np.abs(E - G) + np.abs(Fm)
    nd = np.maximum(np.abs(np.sum(patch.normals * fx, -1)), np.abs(np.sum(patch.normals * fy, -1)))
    d = Diagnostics(H, Q, om, defect, nd)
    if patch.omega is not None:
        d.omega_err = np.abs(om - patch.omega)
    patch.diag = d
    return d


def _sym_check(lam_s):
    if abs(abs(lam_s) - 1) > 1e-12:
        raise NonUnitSymPointError(f"|lambda_s| = {abs(lam_s)} != 1", "surface.sym_bobenko_cmc")


def sym_bobenko_cmc(frames, lam_s, H):
    """f = -(1/H) i lam_s (dF/dlam) F^-1 at lam_s; frames.G carries dF/dlam."""
    _sym_check(lam_s)
    k = frames.index(lam_s)
    if frames.G is None or frames.gidx != k:
        raise NonUnitSymPointError("companion field missing at the Sym point", "surface.sym_bobenko_cmc")
    F = frames.F[:, :, k]
    X = -(1.0 / H) * 1j * lam_s * (frames.G @ _inv2(F))
    pts = su2_to_r3(X)
    om = frames.field.omega() if frames.field is not None else None
    patch = ImmersionPatch(frames.grid, pts, frame_normal(F), om)
    diagnostics(patch)
    return patch


def sym_bobenko_minimal(frames):
    """f = G F^-1 at lambda = 0."""
    k = frames.index(0j)
    F = frames.F[:, :, k]
    pts = su2_to_r3(frames.G @ _inv2(F))
    om = frames.field.omega() if frames.field is not None else None
    patch = ImmersionPatch(frames.grid, pts, frame_normal(F), om)
    diagnostics(patch)
    return patch


def helicoid_reference(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return np.stack(np.broadcast_arrays(np.sinh(x) * np.cos(y), np.sinh(x) * np.sin(y), y), axis=-1)


def helicoid_patch(grid):
    x, y = np.meshgrid(grid.x(), grid.y(), indexing="ij")
    f = helicoid_reference(x, y)
    n = np.stack([np.sin(y), -np.cos(y), np.sinh(x)], -1) / np.cosh(x)[..., None]
    patch = ImmersionPatch(grid, f, n, 2 * np.log(np.cosh(x)))
    diagnostics(patch)
    return patch


class Alignment:
    """Rigid motion with B ~ A @ R.T + t. Unpacks as (R, t, rms)."""

    def __init__(self, R, t, rms, reflected=False):
        self.R, self.t, self.rms, self.reflected = R, t, rms, reflected

    def __iter__(self):
        return iter((self.R, self.t, self.rms))

    def apply(self, P):
        return np.asarray(P) @ self.R.T + self.t

    def __repr__(self):
        return f"Alignment(rms={self.rms:.3e}, reflected={self.reflected})"


def _points(P):
    return P.flat() if isinstance(P, ImmersionPatch) else np.asarray(P, float).reshape(-1, 3)


def rigid_align(A, B, allow_reflection=False):
    """Least-squares rigid motion taking A onto B (Kabsch)."""
    a = _points(A)
    b = _points(B)
    if a.shape != b.shape:
        raise DegenerateError("point sets differ in shape", "surface.rigid_align")
    ca, cb = a.mean(0), b.mean(0)
    a0, b0 = a - ca, b - cb
    s = np.linalg.svd(a0, compute_uv=False)
    if s[0] == 0 or s[1] < 1e-12 * s[0]:
        raise DegenerateError("point cloud is rank-deficient", "surface.rigid_align")
    U, _, Vt = np.linalg.svd(a0.T @ b0)
    best = None
    for sign in (1, -1):
        D = np.diag([1, 1, sign * np.sign(np.linalg.det(U @ Vt))])
        R = (U @ D @ Vt).T
        rms = float(np.sqrt(np.mean(np.sum((a0 @ R.T - b0) ** 2, -1))))
        refl = np.linalg.det(R) < 0
        if refl and not allow_reflection:
            continue
        if best is None or rms < best.rms:
            best = Alignment(R, cb - ca @ R.T, rms, bool(refl))
    return best


@dataclass
class ParallelReport:
    H_parallel: np.ndarray
    H_check: float                  # predicted 2|Q|
    H_check_measured: np.ndarray    # 2|Q| of the parallel surface
    distance_err: float

    def max_errors(self, H, trim=2):
        s = (slice(trim, -trim),) * 2
        return (float(np.max(np.abs(np.abs(self.H_parallel[s]) - H))),
                float(np.max(np.abs(self.H_check_measured[s] - self.H_check))))


def parallel_surface_check(patch, H, Q):
    """Parallel surface at distance 1/H on the concave side (towards the mean
    curvature vector), which is where the stored frame normal points."""
    p = patch.points + patch.normals / H
    pp = ImmersionPatch(patch.grid, p, patch.normals)
    d = diagnostics(pp)
    dist = float(np.max(np.abs(np.linalg.norm(p - patch.points, axis=-1) - 1 / H)))
    return ParallelReport(d.H, 2 * abs(Q), 2 * np.abs(d.Q), dist)
