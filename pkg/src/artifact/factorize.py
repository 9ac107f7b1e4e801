"""Loop factorizations on circles (r-Iwasawa, modified Birkhoff) and the
Symes pipelines built on them."""
from dataclasses import dataclass

import numpy as np

from .errors import BigCellError, DomainError, FactorizationError, ResolutionError
from .loopalg import expm_sl2
from .potential import conformal_factor_cmc, conformal_factor_kdv
from .surface import ImmersionPatch, _inv2, diagnostics, frame_normal, su2_to_r3
from .zeroflow import FrameGrid

N_DEFAULT = 256
N_MAX = 2048
DECAY = 1e-10
CHUNK = 4096


@dataclass
class CircleLoop:
    r: float
    N: int
    samples: np.ndarray             # (N, 2, 2) at r exp(2 pi i j / N)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, complex)
        if self.N < 4 or self.N & (self.N - 1) or self.samples.shape != (self.N, 2, 2):
            raise DomainError("need N >= 4 a power of two and (N, 2, 2) samples", "factorize.CircleLoop")
        if not self.r > 0:
            raise DomainError("radius must be positive", "factorize.CircleLoop")

    @classmethod
    def from_function(cls, f, N=N_DEFAULT, r=1.0):
        lam = circle(N, r)
        return cls(r, N, np.array([f(l) for l in lam], complex))

    def nodes(self):
        return circle(self.N, self.r)

    def det_error(self):
        S = self.samples
        return float(np.max(np.abs(S[:, 0, 0] * S[:, 1, 1] - S[:, 0, 1] * S[:, 1, 0] - 1)))


@dataclass
class FactorPair:
    F: CircleLoop
    B: CircleLoop
    residual: float
    b0: np.ndarray = None           # B at the distinguished point (0 or infinity)


def circle(N, r=1.0):
    return r * np.exp(2j * np.pi * np.arange(N) / N)


def _fourier(S):
    """Coefficients c_k, k = 0..N-1 (k > N/2 meaning k - N), of samples along axis -3."""
    return np.fft.fft(S, axis=-3) / S.shape[-3]


def _check_decay(c, where):
    N = c.shape[-3]
    k = np.fft.fftfreq(N, 1.0 / N)
    tail = np.abs(k) >= N // 4
    scale = np.max(np.abs(c), axis=(-3, -2, -1))
    t = np.max(np.abs(c[..., tail, :, :]), axis=(-3, -2, -1))
    bad = t > DECAY * np.maximum(scale, 1e-300)
    if np.any(bad):
        raise ResolutionError(f"Fourier tail {float(np.max(t / scale)):.2e} above {DECAY} at N = {N}", where)


def _block_toeplitz(c, ms, qs):
    """Blocks c_{q - m} (indices mod N) laid out as a (.., 2M, 2Q) matrix."""
    N = c.shape[-3]
    idx = (np.asarray(qs)[None, :] - np.asarray(ms)[:, None]) % N
    T = c[..., idx, :, :]                                   # (.., M, Q, 2, 2)
    T = np.swapaxes(T, -3, -2)                              # (.., M, 2, Q, 2)
    sh = T.shape
    return T.reshape(sh[:-4] + (sh[-4] * 2, sh[-2] * 2))


def _series_at_nodes(coeffs, N, sign=1):
    """sum_q coeffs[q] mu_j^(sign*q) at the N roots of unity."""
    pad = np.zeros(coeffs.shape[:-3] + (N, 2, 2), complex)
    pad[..., :coeffs.shape[-3], :, :] = coeffs
    if sign > 0:
        return np.fft.ifft(pad, axis=-3) * N
    return np.fft.fft(pad, axis=-3)


def _iwasawa(S, n=None, where="factorize.r_iwasawa"):
    """Batched Iwasawa of samples S (.., N, 2, 2) on a circle (in mu = lambda / r).

    Returns F, B samples, b0 and the K = B^-1 coefficients."""
    N = S.shape[-3]
    _check_decay(_fourier(S), where)
    n = N // 4 if n is None else n
    h = np.conj(np.swapaxes(S, -1, -2)) @ S
    hc = _fourier(h)
    # T_{mq} = h_{m-q}
    T = _block_toeplitz(hc, -np.arange(n + 1), -np.arange(n + 1))
    rhs = np.zeros(T.shape[:-1] + (2,), complex)
    rhs[..., 0, 0] = 1
    rhs[..., 1, 1] = 1
    try:
        X = np.linalg.solve(T, rhs)
    except np.linalg.LinAlgError as e:
        raise FactorizationError(f"Toeplitz system singular: {e}", where)
    X = X.reshape(X.shape[:-2] + (n + 1, 2, 2))
    X0 = X[..., 0, :, :]
    M = np.linalg.inv(X0)
    M = 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))
    try:
        Lc = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise FactorizationError("positive factorization lost definiteness", where)
    b0 = np.conj(np.swapaxes(Lc, -1, -2))                  # upper, positive diagonal
    K = X @ np.conj(np.swapaxes(b0, -1, -2))[..., None, :, :]
    Kn = _series_at_nodes(K, N, +1)
    F = S @ Kn
    B = _inv2(Kn)
    return F, B, b0, K


def r_iwasawa(phi, n=None):
    """Phi = F B with F unitary on the circle and B holomorphic inside, B(0)
    upper triangular with positive diagonal."""
    F, B, b0, _ = _iwasawa(phi.samples, n)
    uni = np.max(np.abs(np.conj(np.swapaxes(F, -1, -2)) @ F - np.eye(2)))
    rec = np.max(np.abs(F @ B - phi.samples))
    return FactorPair(CircleLoop(phi.r, phi.N, F), CircleLoop(phi.r, phi.N, B), float(max(uni, rec)), b0)


def _qr_positive(g0):
    q, r = np.linalg.qr(g0)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    D = np.zeros_like(r)
    D[..., 0, 0] = ph[..., 0]
    D[..., 1, 1] = ph[..., 1]
    u = q @ D
    b = np.conj(D) @ r
    return u, b


def _birkhoff(S, n=None, where="factorize.modified_birkhoff"):
    """Batched modified Birkhoff of samples S (.., N, 2, 2) on the unit circle.

    Returns F, B samples, b (= B at infinity), F(0)."""
    N = S.shape[-3]
    c = _fourier(S)
    _check_decay(c, where)
    scale = np.max(np.abs(c))
    neg = np.max(np.abs(c[..., N // 2 + 1:, :, :])) if N > 2 else 0.0
    if n is None:
        n = 0 if neg <= 1e-14 * scale else N // 4
    P = np.broadcast_to(np.eye(2, dtype=complex), S.shape).copy()
    if n:
        ms = np.arange(1, n + 1)
        A = _block_toeplitz(c, ms, ms)
        rhs = -c[..., (-ms) % N, :, :].reshape(c.shape[:-3] + (2 * n, 2))
        s = np.linalg.svd(A, compute_uv=False)
        bad = s[..., -1] <= 1e-10 * s[..., 0]
        if np.any(bad):
            node = np.unravel_index(int(np.argmax(bad)), bad.shape) if bad.ndim else ()
            raise BigCellError(f"finite-section matrix rank-deficient at node {tuple(int(i) for i in node)}",
                               where)
        p = np.linalg.solve(A, rhs).reshape(c.shape[:-3] + (n, 2, 2))
        full = np.zeros(c.shape[:-3] + (n + 1, 2, 2), complex)
        full[..., 0, :, :] = np.eye(2)
        full[..., 1:, :, :] = p
        P = _series_at_nodes(full, N, -1)
        g0 = np.einsum("...qij,...qjk->...ik", c[..., :n + 1, :, :], full)
    else:
        g0 = c[..., 0, :, :]
    det = g0[..., 0, 0] * g0[..., 1, 1] - g0[..., 0, 1] * g0[..., 1, 0]
    if np.any(np.abs(det) < 1e-10):
        raise BigCellError("g+(0) singular", where)
    gp = S @ P
    u, b = _qr_positive(g0)
    F = gp @ _inv2(b)[..., None, :, :]
    B = b[..., None, :, :] @ _inv2(P)
    return F, B, b, u


def modified_birkhoff(phi, n=None):
    """Phi = F B with F holomorphic in the disk, F(0) in SU(2), B holomorphic
    outside with B(infinity) upper triangular, positive diagonal."""
    if abs(phi.r - 1) > 1e-15:
        raise DomainError("modified Birkhoff works on the unit circle", "factorize.modified_birkhoff")
    F, B, b, u = _birkhoff(phi.samples, n)
    rec = np.max(np.abs(F @ B - phi.samples))
    uni = np.max(np.abs(np.conj(u.T) @ u - np.eye(2)))
    return FactorPair(CircleLoop(1.0, phi.N, F), CircleLoop(1.0, phi.N, B), float(max(rec, uni)), b)


# Symes pipelines

def _exp_samples(zeta, dz, lam):
    """exp(dz zeta(lam)) for dz (P,) and lam (N,): (P, N, 2, 2)."""
    Z = zeta(lam)                                           # (N, 2, 2)
    return expm_sl2(dz[:, None, None, None] * Z[None])


def _symes_points(zeta, dz, kind, r=1.0, N=N_DEFAULT, lams=(), want_F=True):
    """Factorization frames for the points z0 + dz.

    Returns (F at lams (P, L, 2, 2), F(0) for kdv or None, rho (P,))."""
    lams = np.asarray(lams, complex)
    where = "factorize.symes_" + kind
    while True:
        try:
            out = []
            for s in range(0, len(dz), CHUNK):
                out.append(_symes_chunk(zeta, dz[s:s + CHUNK], kind, r, N, lams, where))
            break
        except ResolutionError:
            if N >= N_MAX:
                raise
            N *= 2
    Fl = np.concatenate([o[0] for o in out])
    F0 = np.concatenate([o[1] for o in out]) if kind == "kdv" else None
    rho = np.concatenate([o[2] for o in out])
    return Fl, F0, rho, N


def _symes_chunk(zeta, dz, kind, r, N, lams, where):
    mu = circle(N)
    S = _exp_samples(zeta, dz, r * mu)
    if kind == "cmc":
        F, B, b0, K = _iwasawa(S, where=where)
        rho = b0[:, 0, 0].real
        Fl = np.empty((len(dz), len(lams), 2, 2), complex)
        for m, lam in enumerate(lams):
            if abs(abs(lam) - r) > 1e-12 * r:
                raise DomainError(f"lambda {lam} not on the circle |lambda| = {r}", where)
            w = (lam / r) ** np.arange(K.shape[1])
            Kl = np.einsum("q,pqij->pij", w, K)
            Fl[:, m] = expm_sl2(dz[:, None, None] * zeta(lam)[None]) @ Kl
        return Fl, None, rho
    F, B, b, u = _birkhoff(S, where=where)
    rho = b[:, 0, 0].real
    Fl = np.empty((len(dz), len(lams), 2, 2), complex)
    for m, lam in enumerate(lams):
        if lam == 0:
            Fl[:, m] = u
            continue
        j = np.flatnonzero(np.abs(mu - lam) < 1e-12)
        if not len(j):
            raise DomainError(f"lambda {lam} is not a sample node of the circle", where)
        Fl[:, m] = F[:, j[0]]
    return Fl, u, rho


@dataclass
class SymesFrames(FrameGrid):
    omega: np.ndarray = None
    rho: np.ndarray = None
    N: int = N_DEFAULT


def symes_cmc(zeta, grid, r=1.0, lams=None, N=N_DEFAULT):
    """Frames of the CMC Symes construction at every node of the grid."""
    if zeta.kind != "cmc":
        raise DomainError("expected a CMC potential", "factorize.symes_cmc")
    if lams is None:
        lams = r * circle(16)
    lams = np.asarray(lams, complex)
    dz = (grid.z() - grid.origin).ravel()
    Fl, _, rho, N = _symes_points(zeta, dz, "cmc", r, N, lams)
    om = conformal_factor_cmc(zeta) + 4 * np.log(rho)
    sh = (grid.nx, grid.ny)
    return SymesFrames(grid, lams, Fl.reshape(sh + Fl.shape[1:]), omega=om.reshape(sh),
                       rho=rho.reshape(sh), N=N)


def symes_kdv(zeta, grid, lams=None, N=N_DEFAULT):
    """Frames of the KdV Symes construction (modified Birkhoff) on the grid."""
    if zeta.kind != "kdv":
        raise DomainError("expected a KdV potential", "factorize.symes_kdv")
    if lams is None:
        lams = np.concatenate([circle(16), [0j]])
    lams = np.asarray(lams, complex)
    dz = (grid.z() - grid.origin).ravel()
    Fl, _, rho, N = _symes_points(zeta, dz, "kdv", 1.0, N, lams)
    om = conformal_factor_kdv(zeta) + 4 * np.log(rho)
    sh = (grid.nx, grid.ny)
    return SymesFrames(grid, lams, Fl.reshape(sh + Fl.shape[1:]), omega=om.reshape(sh),
                       rho=rho.reshape(sh), N=N)


def _tangents_kdv(zeta, dz, phi, gscale, N):
    """f_x, f_y (R^3) and F(0) from Symes frames at the points z0 + dz."""
    _, F0, rho, _ = _symes_points(zeta, dz, "kdv", 1.0, N, [0j])
    v1 = zeta.v1().real * rho**2
    out = []
    for d in (1.0, 1j):
        beta = np.zeros((len(dz), 2, 2), complex)
        beta[:, 0, 1] = 0.5j * np.exp(-1j * phi) * d
        beta[:, 1, 0] = 0.5j * np.exp(1j * phi) * np.conj(d)
        beta *= (gscale * 4 * v1)[:, None, None]
        out.append(su2_to_r3(F0 @ beta @ _inv2(F0)))
    return out[0], out[1], F0, rho


def symes_minimal_patch(zeta, grid, phi=0.0, gscale=1.0, N=N_DEFAULT):
    """Minimal surface from Symes frames alone.

    The surface is the path integral of F beta F^-1 at lambda = 0; it is
    integrated with Simpson's rule (frames at grid midpoints), first along
    the column through the origin node, then along every row.
    """
    nx, ny, i0, j0 = grid.nx, grid.ny, grid.i0, grid.j0
    hx, hy = grid.hx, grid.hy
    # column through the origin, fine spacing hy / 2
    yc = (np.arange(2 * ny - 1) / 2 - j0) * hy
    _, ty, _, _ = _tangents_kdv(zeta, 1j * yc, phi, gscale, N)
    col = np.zeros((ny, 3))
    for j in range(j0, ny - 1):
        col[j + 1] = col[j] + hy / 6 * (ty[2 * j] + 4 * ty[2 * j + 1] + ty[2 * j + 2])
    for j in range(j0, 0, -1):
        col[j - 1] = col[j] - hy / 6 * (ty[2 * j] + 4 * ty[2 * j - 1] + ty[2 * j - 2])
    # rows, fine spacing hx / 2
    xr = (np.arange(2 * nx - 1) / 2 - i0) * hx
    dz = (xr[:, None] + 1j * (np.arange(ny) - j0)[None, :] * hy).ravel()
    tx, _, F0, rho = _tangents_kdv(zeta, dz, phi, gscale, N)
    tx = tx.reshape(2 * nx - 1, ny, 3)
    F0 = F0.reshape(2 * nx - 1, ny, 2, 2)[::2]
    rho = rho.reshape(2 * nx - 1, ny)[::2]
    pts = np.zeros((nx, ny, 3))
    pts[i0] = col
    for i in range(i0, nx - 1):
        pts[i + 1] = pts[i] + hx / 6 * (tx[2 * i] + 4 * tx[2 * i + 1] + tx[2 * i + 2])
    for i in range(i0, 0, -1):
        pts[i - 1] = pts[i] - hx / 6 * (tx[2 * i] + 4 * tx[2 * i - 1] + tx[2 * i - 2])
    om = conformal_factor_kdv(zeta) + 4 * np.log(rho)
    patch = ImmersionPatch(grid, pts, frame_normal(F0), om)
    diagnostics(patch)
    return patch
