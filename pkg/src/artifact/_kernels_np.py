"""Pure numpy kernels. Same signatures as _kernels_nb."""
import numpy as np

BLOWUP_LIMIT = 1e12


def expm_sl2_batch(A):
    A = np.asarray(A, dtype=complex)
    mu2 = -(A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0])
    mu = np.sqrt(mu2)
    small = np.abs(mu) < 1e-4
    mus = np.where(small, 1.0, mu)
    c = np.where(small, 1 + mu2 / 2 + mu2**2 / 24 + mu2**3 / 720, np.cosh(mus))
    s = np.where(small, 1 + mu2 / 6 + mu2**2 / 120 + mu2**3 / 5040, np.sinh(mus) / mus)
    out = s[..., None, None] * A
    out[..., 0, 0] += c
    out[..., 1, 1] += c
    return out


def dk_roots(p, z, tol, maxit):
    """Durand-Kerner on monic p (ascending coefficients, p[-1] == 1).

    z holds the starting guesses and is overwritten. Returns (z, iterations, ok).
    """
    n = len(z)
    it = 0
    for it in range(1, maxit + 1):
        pz = np.polyval(p[::-1], z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        dz = pz / np.prod(diff, axis=1)
        z = z - dz
        if np.all(np.abs(dz) <= tol * (1 + np.abs(z))):
            return z, it, True
    return z, it, n == 0


def _alpha(C, lo, kind):
    B = C.shape[0]
    U = np.zeros((B, 3, 2, 2), complex)
    V = np.zeros((B, 3, 2, 2), complex)
    c0 = C[:, -lo]
    u = c0[:, 0, 0]
    w = c0[:, 1, 0]
    U[:, 1, 0, 0] = u / 2
    U[:, 1, 1, 1] = -u / 2
    U[:, 1, 1, 0] = w
    V[:, 1, 0, 0] = -np.conj(u) / 2
    V[:, 1, 1, 1] = np.conj(u) / 2
    V[:, 1, 0, 1] = -np.conj(w)
    if kind == 0:
        v = C[:, -1 - lo, 0, 1]
        U[:, 0, 0, 1] = v
        V[:, 2, 1, 0] = -np.conj(v)
    else:
        v = C[:, 1 - lo, 0, 1]
        U[:, 2, 0, 1] = v
    return U, V, v


def _rhs(C, F, G, lo, kind, lams, linv, d, gmode, gidx, phi, gscale):
    U, V, v = _alpha(C, lo, kind)
    A = d * U + np.conj(d) * V
    K = C.shape[1]
    dC = np.zeros_like(C)
    for p in range(3):
        sh = p - 1
        k0 = max(0, sh)
        k1 = min(K, K + sh)
        if k1 <= k0:
            continue
        Ap = A[:, p][:, None]
        Cj = C[:, k0 - sh:k1 - sh]
        dC[:, k0:k1] -= Ap @ Cj - Cj @ Ap
    dF = None
    dG = None
    if F.shape[1]:
        Aev = (A[:, 0][:, None] * linv[None, :, None, None] + A[:, 1][:, None]
               + A[:, 2][:, None] * lams[None, :, None, None])
        dF = F @ Aev
        if gmode == 1:
            lg = lams[gidx]
            beta = -A[:, 0] / lg**2 + A[:, 2]
            dG = G @ Aev[:, gidx] + F[:, gidx] @ beta
        elif gmode == 2:
            ew = 4 * gscale * v.real
            beta = np.zeros((C.shape[0], 2, 2), complex)
            beta[:, 0, 1] = 0.5j * ew * np.exp(-1j * phi) * d
            beta[:, 1, 0] = 0.5j * ew * np.exp(1j * phi) * np.conj(d)
            dG = G @ Aev[:, gidx] + F[:, gidx] @ beta
    return dC, dF, dG


def rk4_path(C, F, G, lo, kind, lams, d, h, nsteps, sub, gmode, gidx, phi, gscale):
    """Integrate the coupled field/frame/companion system along direction d.

    C (B,K,2,2), F (B,L,2,2), G (B,2,2). Node spacing h, `sub` RK4 steps per node.
    Returns (Cs, Fs, Gs, drift, status); status 1 means the field blew up.
    """
    C = C.astype(complex).copy()
    F = F.astype(complex).copy()
    G = G.astype(complex).copy()
    lams = np.asarray(lams, complex)
    linv = np.zeros_like(lams)
    nz = lams != 0
    linv[nz] = 1 / lams[nz]
    Cs = np.empty((nsteps + 1,) + C.shape, complex)
    Fs = np.empty((nsteps + 1,) + F.shape, complex)
    Gs = np.empty((nsteps + 1,) + G.shape, complex)
    Cs[0], Fs[0], Gs[0] = C, F, G
    dt = h / sub
    hasF = F.shape[1] > 0
    drift = 0.0
    args = (lo, kind, lams, linv, d, gmode, gidx, phi, gscale)
    for n in range(nsteps):
        for _ in range(sub):
            k1 = _rhs(C, F, G, *args)
            k2 = _rhs(C + dt / 2 * k1[0], F + dt / 2 * k1[1] if hasF else F,
                      G + dt / 2 * k1[2] if gmode else G, *args)
            k3 = _rhs(C + dt / 2 * k2[0], F + dt / 2 * k2[1] if hasF else F,
                      G + dt / 2 * k2[2] if gmode else G, *args)
            k4 = _rhs(C + dt * k3[0], F + dt * k3[1] if hasF else F,
                      G + dt * k3[2] if gmode else G, *args)
            C = C + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            if hasF:
                F = F + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
                det = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
                drift = max(drift, float(np.max(np.abs(det - 1))))
                F = F / np.sqrt(det)[..., None, None]
            if gmode:
                G = G + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not np.all(np.isfinite(C)) or np.max(np.abs(C)) > BLOWUP_LIMIT:
            return Cs[:n + 1], Fs[:n + 1], Gs[:n + 1], drift, 1
        Cs[n + 1], Fs[n + 1], Gs[n + 1] = C, F, G
    return Cs, Fs, Gs, drift, 0
