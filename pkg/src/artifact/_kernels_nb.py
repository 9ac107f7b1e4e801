"""numba kernels, loop versions of _kernels_np."""
import numpy as np
from numba import njit

BLOWUP_LIMIT = 1e12


@njit(cache=True)
def _expm1(a, b, c, d, out):
    mu2 = -(a * d - b * c)
    mu = np.sqrt(mu2)
    if abs(mu) < 1e-4:
        ch = 1 + mu2 / 2 + mu2 * mu2 / 24 + mu2 * mu2 * mu2 / 720
        sh = 1 + mu2 / 6 + mu2 * mu2 / 120 + mu2 * mu2 * mu2 / 5040
    else:
        ch = np.cosh(mu)
        sh = np.sinh(mu) / mu
    out[0, 0] = ch + sh * a
    out[0, 1] = sh * b
    out[1, 0] = sh * c
    out[1, 1] = ch + sh * d


@njit(cache=True)
def _expm_flat(A, out):
    for i in range(A.shape[0]):
        _expm1(A[i, 0, 0], A[i, 0, 1], A[i, 1, 0], A[i, 1, 1], out[i])


def expm_sl2_batch(A):
    A = np.asarray(A, dtype=complex)
    shp = A.shape
    flat = np.ascontiguousarray(A.reshape(-1, 2, 2))
    out = np.empty_like(flat)
    _expm_flat(flat, out)
    return out.reshape(shp)


@njit(cache=True)
def dk_roots(p, z, tol, maxit):
    n = z.shape[0]
    z = z.copy()
    it = 0
    for it in range(1, maxit + 1):
        done = True
        for i in range(n):
            pz = p[n]
            for k in range(n - 1, -1, -1):
                pz = pz * z[i] + p[k]
            den = 1.0 + 0j
            for j in range(n):
                if j != i:
                    den *= z[i] - z[j]
            dz = pz / den
            z[i] -= dz
            if abs(dz) > tol * (1 + abs(z[i])):
                done = False
        if done:
            return z, it, True
    return z, it, n == 0


@njit(cache=True)
def _mm(X, Y, out):
    a = X[0, 0] * Y[0, 0] + X[0, 1] * Y[1, 0]
    b = X[0, 0] * Y[0, 1] + X[0, 1] * Y[1, 1]
    c = X[1, 0] * Y[0, 0] + X[1, 1] * Y[1, 0]
    d = X[1, 0] * Y[0, 1] + X[1, 1] * Y[1, 1]
    out[0, 0] = a
    out[0, 1] = b
    out[1, 0] = c
    out[1, 1] = d


@njit(cache=True)
def _rhs1(C, F, G, lo, kind, lams, linv, d, gmode, gidx, phi, gscale, dC, dF, dG, A, tmp, tmp2, Aev):
    # single line: C (K,2,2), F (L,2,2), G (2,2)
    K = C.shape[0]
    dbar = np.conj(d)
    c0 = C[-lo]
    u = c0[0, 0]
    w = c0[1, 0]
    for p in range(3):
        for i in range(2):
            for j in range(2):
                A[p, i, j] = 0
    A[1, 0, 0] = d * u / 2 - dbar * np.conj(u) / 2
    A[1, 1, 1] = -A[1, 0, 0]
    A[1, 1, 0] = d * w
    A[1, 0, 1] = -dbar * np.conj(w)
    if kind == 0:
        v = C[-1 - lo, 0, 1]
        A[0, 0, 1] = d * v
        A[2, 1, 0] = -dbar * np.conj(v)
    else:
        v = C[1 - lo, 0, 1]
        A[2, 0, 1] = d * v
    for k in range(K):
        for i in range(2):
            for j in range(2):
                dC[k, i, j] = 0
    for p in range(3):
        sh = p - 1
        for k in range(K):
            jj = k - sh
            if jj < 0 or jj >= K:
                continue
            _mm(A[p], C[jj], tmp)
            _mm(C[jj], A[p], tmp2)
            for i in range(2):
                for j in range(2):
                    dC[k, i, j] -= tmp[i, j] - tmp2[i, j]
    L = F.shape[0]
    for m in range(L):
        for i in range(2):
            for j in range(2):
                Aev[m, i, j] = A[0, i, j] * linv[m] + A[1, i, j] + A[2, i, j] * lams[m]
        _mm(F[m], Aev[m], dF[m])
    if gmode == 1:
        lg = lams[gidx]
        _mm(G, Aev[gidx], dG)
        for i in range(2):
            for j in range(2):
                tmp[i, j] = -A[0, i, j] / (lg * lg) + A[2, i, j]
        _mm(F[gidx], tmp, tmp2)
        for i in range(2):
            for j in range(2):
                dG[i, j] += tmp2[i, j]
    elif gmode == 2:
        ew = 4 * gscale * v.real
        _mm(G, Aev[gidx], dG)
        tmp[0, 0] = 0
        tmp[1, 1] = 0
        tmp[0, 1] = 0.5j * ew * np.exp(-1j * phi) * d
        tmp[1, 0] = 0.5j * ew * np.exp(1j * phi) * dbar
        _mm(F[gidx], tmp, tmp2)
        for i in range(2):
            for j in range(2):
                dG[i, j] += tmp2[i, j]


@njit(cache=True)
def _path(C, F, G, lo, kind, lams, d, h, nsteps, sub, gmode, gidx, phi, gscale, Cs, Fs, Gs):
    B, K = C.shape[0], C.shape[1]
    L = F.shape[1]
    linv = np.zeros(L, np.complex128)
    for m in range(L):
        if lams[m] != 0:
            linv[m] = 1 / lams[m]
    dt = h / sub
    drift = 0.0
    status = 0
    A = np.zeros((3, 2, 2), np.complex128)
    tmp = np.zeros((2, 2), np.complex128)
    tmp2 = np.zeros((2, 2), np.complex128)
    Aev = np.zeros((L, 2, 2), np.complex128)
    kC = np.zeros((4, K, 2, 2), np.complex128)
    kF = np.zeros((4, L, 2, 2), np.complex128)
    kG = np.zeros((4, 2, 2), np.complex128)
    Cc = np.empty((K, 2, 2), np.complex128)
    Fc = np.empty((L, 2, 2), np.complex128)
    Gc = np.empty((2, 2), np.complex128)
    fac = np.array([0.0, 0.5, 0.5, 1.0])
    for b in range(B):
        Cb = C[b].copy()
        Fb = F[b].copy()
        Gb = G[b].copy()
        Cs[0, b] = Cb
        Fs[0, b] = Fb
        Gs[0, b] = Gb
        for n in range(nsteps):
            for _s in range(sub):
                for st in range(4):
                    if st == 0:
                        Cc[:] = Cb
                        Fc[:] = Fb
                        Gc[:] = Gb
                    else:
                        f = fac[st] * dt
                        Cc[:] = Cb + f * kC[st - 1]
                        Fc[:] = Fb + f * kF[st - 1]
                        Gc[:] = Gb + f * kG[st - 1]
                    _rhs1(Cc, Fc, Gc, lo, kind, lams, linv, d, gmode, gidx, phi, gscale,
                          kC[st], kF[st], kG[st], A, tmp, tmp2, Aev)
                Cb += dt / 6 * (kC[0] + 2 * kC[1] + 2 * kC[2] + kC[3])
                Fb += dt / 6 * (kF[0] + 2 * kF[1] + 2 * kF[2] + kF[3])
                if gmode != 0:
                    Gb += dt / 6 * (kG[0] + 2 * kG[1] + 2 * kG[2] + kG[3])
                for m in range(L):
                    det = Fb[m, 0, 0] * Fb[m, 1, 1] - Fb[m, 0, 1] * Fb[m, 1, 0]
                    e = abs(det - 1)
                    if e > drift:
                        drift = e
                    r = np.sqrt(det)
                    for i in range(2):
                        for j in range(2):
                            Fb[m, i, j] /= r
            bad = False
            for k in range(K):
                for i in range(2):
                    for j in range(2):
                        x = Cb[k, i, j]
                        if not (abs(x) <= BLOWUP_LIMIT):
                            bad = True
            if bad:
                return drift, 1, n
            Cs[n + 1, b] = Cb
            Fs[n + 1, b] = Fb
            Gs[n + 1, b] = Gb
    return drift, status, nsteps


def rk4_path(C, F, G, lo, kind, lams, d, h, nsteps, sub, gmode, gidx, phi, gscale):
    C = np.ascontiguousarray(C, dtype=np.complex128)
    F = np.ascontiguousarray(F, dtype=np.complex128)
    G = np.ascontiguousarray(G, dtype=np.complex128)
    lams = np.ascontiguousarray(lams, dtype=np.complex128)
    Cs = np.empty((nsteps + 1,) + C.shape, np.complex128)
    Fs = np.empty((nsteps + 1,) + F.shape, np.complex128)
    Gs = np.empty((nsteps + 1,) + G.shape, np.complex128)
    drift, status, n = _path(C, F, G, int(lo), int(kind), lams, complex(d), float(h), int(nsteps),
                             int(sub), int(gmode), int(gidx), float(phi), float(gscale), Cs, Fs, Gs)
    if status:
        return Cs[:n + 1], Fs[:n + 1], Gs[:n + 1], drift, 1
    return Cs, Fs, Gs, drift, 0
