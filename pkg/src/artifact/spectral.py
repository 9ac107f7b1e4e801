"""Spectral curve data: branch points, divisor, trace formulas, isospectral flows."""
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateDivisorError, DomainError, PairingError, PhaseError,
                     UnitCircleRootError)
from .loopalg import ScalarLaurent, roots, sort_roots
from .potential import (CmcPotential, conformal_factor_cmc, hopf_from_cmc, spectral_poly_cmc)

UNIT_BAND = 1e-8
SEP = 1e-10


@dataclass
class SpectralData:
    g: int
    H: float
    Q: complex
    a: ScalarLaurent
    branch: np.ndarray                  # (g,) inside the unit disk
    beta: np.ndarray                    # (g,)
    nu: np.ndarray                      # (g,)

    @property
    def divisor(self):
        return list(zip(self.beta, self.nu))

    def omega(self):
        return float(np.log(2 * abs(self.Q) / self.H * np.prod(np.abs(self.beta))))


def rho(b):
    b = abs(b)
    return min(b, 1 / b)


def sort_divisor(beta, nu):
    order = sorted(range(len(beta)), key=lambda k: (round(rho(beta[k]), 10), float(np.angle(beta[k]))))
    return np.asarray(beta, complex)[order], np.asarray(nu, complex)[order]


def a_from_branch_points(H, Q, lams):
    c = np.array([-0.5 * H * Q], complex)
    for lk in lams:
        c = np.convolve(c, [1, -1 / lk])
        c = np.convolve(c, [1, -np.conj(lk)])
    return ScalarLaurent(0, c, trim=False)


def extract_branch_points(a, H, Q, tol=UNIT_BAND):
    c = a.dense(0, a.hi)
    if abs(c[0] + 0.5 * H * Q) > 1e-10 * max(1, abs(c[0])):
        raise DomainError("a(0) != -HQ/2", "spectral.extract_branch_points")
    n = len(c) - 1
    if n % 2:
        raise DomainError("a has odd degree", "spectral.extract_branch_points")
    g = n // 2
    if g == 0:
        return np.zeros(0, complex)
    r = roots(c)
    m = np.abs(r)
    if np.any(np.abs(m - 1) < tol):
        raise UnitCircleRootError(f"root within {tol} of the unit circle", "spectral.extract_branch_points")
    inner = sort_roots(r[m < 1])
    outer = r[m > 1]
    if len(inner) != g:
        raise PairingError(f"{len(inner)} roots inside the disk, expected {g}",
                           "spectral.extract_branch_points")
    for lk in inner:
        t = 1 / np.conj(lk)
        if np.min(np.abs(outer - t)) > tol * abs(t) * 100 and np.min(np.abs(outer - t)) > 1e-8 * abs(t):
            raise PairingError(f"no partner 1/conj({lk})", "spectral.extract_branch_points")
    return inner


def _uvw(zeta):
    c = zeta.c
    u = ScalarLaurent(-1, c[:, 0, 0], trim=False)
    v = ScalarLaurent(-1, c[:, 0, 1], trim=False)
    w = ScalarLaurent(-1, c[:, 1, 0], trim=False)
    return u, v, w


def extract_divisor(zeta, sep=SEP):
    g = zeta.g
    if g == 0:
        return np.zeros(0, complex), np.zeros(0, complex)
    u, v, _ = _uvw(zeta)
    lv = v.shift(1).dense(0, g)             # lambda v, degree g
    b = roots(lv)
    scale = np.maximum(1, np.abs(b))
    for i in range(g):
        for j in range(i + 1, g):
            if abs(b[i] - b[j]) / max(scale[i], scale[j]) < sep:
                raise DegenerateDivisorError("clustered divisor points", "spectral.extract_divisor")
    nu = -b * u.eval(b)
    return sort_divisor(b, nu)


def phase_value(g, Q, beta):
    return (-1) ** g * np.conj(Q) * np.prod(beta)


def reconstruct_potential(sd, tol=1e-8):
    g, H, Q = sd.g, sd.H, complex(sd.Q)
    beta = np.asarray(sd.beta, complex)
    nu = np.asarray(sd.nu, complex)
    z = phase_value(g, Q, beta)
    if not (z.real > 0 and abs(z.imag) <= tol * abs(z)):
        raise PhaseError(f"(-1)^g conj(Q) prod(beta) = {z} is not positive", "spectral.reconstruct_potential")
    for i in range(g):
        for j in range(i + 1, g):
            if abs(beta[i] - beta[j]) / max(1, abs(beta[i]), abs(beta[j])) < SEP:
                raise DegenerateDivisorError("coincident beta", "spectral.reconstruct_potential")
    ew = 2 * abs(Q) / H * np.prod(np.abs(beta))
    eh = np.sqrt(ew)
    lv = np.array([0.5 * H * eh], complex)
    w = np.array([-Q / eh], complex)
    for bk in beta:
        lv = np.convolve(lv, [1, -1 / bk])
        w = np.convolve(w, [1, -np.conj(bk)])
    u = np.zeros(max(g, 1), complex)
    for k in range(g):
        chi = np.array([1], complex)
        for j in range(g):
            if j != k:
                chi = np.convolve(chi, [-beta[j], 1]) / (beta[k] - beta[j])
        u[:len(chi)] += -nu[k] / beta[k] * chi
    c = np.zeros((g + 2, 2, 2), complex)
    for k in range(-1, g + 1):
        uk = u[k] if 0 <= k < g else 0
        vk = lv[k + 1] if k + 1 <= g else 0
        wk = w[k] if 0 <= k <= g else 0
        c[k + 1] = [[uk, vk], [wk, -uk]]
    return CmcPotential(g, H, c)


def spectral_data(zeta):
    """Full spectral data read off a potential."""
    a = spectral_poly_cmc(zeta)
    Q = hopf_from_cmc(zeta)
    lam = extract_branch_points(a, zeta.H, Q)
    b, nu = extract_divisor(zeta)
    return SpectralData(zeta.g, zeta.H, Q, a, lam, b, nu)


def make_spectral_data(H, Q, branch, beta, nu=None, sign=1):
    """SpectralData from branch points and divisor points.

    nu defaults to the square root sqrt(beta a(beta)) times sign (+/-1 per point)."""
    branch = sort_roots(branch)
    a = a_from_branch_points(H, Q, branch)
    beta = np.asarray(beta, complex)
    if nu is None:
        sign = np.broadcast_to(sign, beta.shape)
        nu = sign * np.sqrt(beta * a.eval(beta))
    b, n = sort_divisor(beta, nu)
    return SpectralData(len(branch), H, complex(Q), a, branch, b, n)


def validate_spectral(sd, tol=1e-8):
    """List of (name, ok, magnitude)."""
    out = []
    lam = np.asarray(sd.branch)
    out.append(("branch in punctured disk", bool(np.all((np.abs(lam) < 1) & (lam != 0))) and len(lam) == sd.g, 0.0))
    scale = max(1.0, sd.a.norm())
    r = max([abs(sd.a.eval(l)) for l in lam] + [abs(sd.a.eval(1 / np.conj(l))) for l in lam] + [0]) / scale
    out.append(("a vanishes at branch points", r <= tol, r))
    r = max([abs(n**2 - b * sd.a.eval(b)) / max(1, abs(b) ** (2 * sd.g + 1)) for b, n in sd.divisor] + [0])
    out.append(("divisor on curve", r <= tol, r))
    z = phase_value(sd.g, sd.Q, sd.beta)
    out.append(("phase condition", z.real > 0 and abs(z.imag) <= tol * abs(z), abs(np.angle(z))))
    return out


def omega_z_squared(sd):
    """The trace-sum 8HQ sum(1/lam - 1/beta + conj(lam) - conj(beta)).

    Equals 16 u_0^2 for the reconstructed field (so omega_z^2 = 4 u_0^2 is a quarter of it)."""
    lam = np.asarray(sd.branch, complex)
    b = np.asarray(sd.beta, complex)
    return complex(8 * sd.H * sd.Q * np.sum(1 / lam - 1 / b + np.conj(lam) - np.conj(b)))


@dataclass(frozen=True)
class CurvePoint:
    lam: complex
    nu: complex


def involution_sigma(p):
    return CurvePoint(p.lam, -p.nu)


def involution_rho(p, g):
    if p.lam == 0:
        raise DomainError("rho undefined at lambda = 0", "spectral.involution_rho")
    lb = np.conj(p.lam)
    return CurvePoint(1 / lb, lb ** (-(g + 1)) * np.conj(p.nu))


# isospectral flows

def _project_unitary(X, lo):
    """Unitary-loop part X_u of X (dense, powers lo..) for the r = 1 splitting.

    X = X_u + X_b with X_u anti-hermitian on |lambda| = 1 and X_b holomorphic
    inside, X_b(0) upper triangular with real diagonal.
    """
    hi = lo + len(X) - 1
    m = max(0, -lo)
    Xu = np.zeros((2 * m + 1, 2, 2), complex)

    def get(k):
        return X[k - lo] if lo <= k <= hi else np.zeros((2, 2), complex)
    for k in range(1, m + 1):
        Xu[m - k] = get(-k)
        Xu[m + k] = -get(-k).conj().T
    X0 = get(0)
    p, r = X0[0, 0], X0[1, 0]
    Xu[m] = [[1j * p.imag, -np.conj(r)], [r, -1j * p.imag]]
    return Xu, -m


def _bracket_trunc(A, alo, Z, zlo):
    """[A, Z] restricted to the powers of Z."""
    K = len(Z)
    out = np.zeros_like(Z)
    for i, Ai in enumerate(A):
        p = alo + i
        for j in range(K):
            k = zlo + j + p
            if zlo <= k < zlo + K:
                out[k - zlo] += Ai @ Z[j] - Z[j] @ Ai
    return out


def isospectral_rhs(Z, n, c=1.0, mode="iwasawa"):
    """d zeta / dt_n for zeta with dense coefficients Z (powers -1..g).

    iwasawa: generator c lambda^-n zeta, minus its unitary part; this keeps
    the reality condition and gives g independent real directions for
    n = 0..g-1. literal: bracket with the powers >= 0 of zeta lambda^n."""
    X = c * Z
    if mode == "iwasawa":
        Xu, ulo = _project_unitary(X, -1 - n)
        return -_bracket_trunc(Xu, ulo, Z, -1)
    lo = -1 + n
    k0 = max(0, -lo)
    Xp = X[k0:]
    return _bracket_trunc(Xp, lo + k0, Z, -1)


def isospectral_step(zeta, n, dt, c=1.0, mode="iwasawa"):
    Z = zeta.c
    k1 = isospectral_rhs(Z, n, c, mode)
    k2 = isospectral_rhs(Z + dt / 2 * k1, n, c, mode)
    k3 = isospectral_rhs(Z + dt / 2 * k2, n, c, mode)
    k4 = isospectral_rhs(Z + dt * k3, n, c, mode)
    return zeta.with_coeffs(Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


def isospectral_flow(zeta, n, dt, steps, c=1.0, mode="iwasawa", every=0):
    """Many steps; returns the final potential (and samples every `every` steps)."""
    Z = np.array(zeta.c)
    samples = []
    for s in range(steps):
        k1 = isospectral_rhs(Z, n, c, mode)
        k2 = isospectral_rhs(Z + dt / 2 * k1, n, c, mode)
        k3 = isospectral_rhs(Z + dt / 2 * k2, n, c, mode)
        k4 = isospectral_rhs(Z + dt * k3, n, c, mode)
        Z = Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if every and (s + 1) % every == 0:
            samples.append(zeta.with_coeffs(Z))
    out = zeta.with_coeffs(Z)
    return (out, samples) if every else out


# magic estimates

@dataclass
class MagicReport:
    lam_abs: np.ndarray
    beta_abs: np.ndarray
    e_omega: float
    lower: float
    upper: float
    margins: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(m >= -1e-10 for m in self.margins.values())


def magic_bounds_check(zeta):
    sd = spectral_data(zeta)
    la = np.sort(np.abs(sd.branch))
    b = np.asarray(sd.beta)
    ba = np.abs(b)                       # already sorted by rho
    ew = float(np.exp(conformal_factor_cmc(zeta)))
    c = 2 * abs(sd.Q) / zeta.H
    lower = c * float(np.prod(la))
    upper = c / float(np.prod(la))
    margins = {
        "beta >= lambda": float(np.min(ba - la, initial=np.inf)),
        "beta <= 1/lambda": float(np.min(1 / la - ba, initial=np.inf)),
        "e^w >= lower": (ew - lower) / max(1, ew),
        "e^w <= upper": (upper - ew) / max(1, ew),
    }
    return MagicReport(la, ba, ew, lower, upper, margins)


def offdiagonal_data(H, Q, branch, choice=None):
    """Spectral data of the u = 0 potential with beta_k in {lam_k, 1/conj(lam_k)}.

    choice[k] = 0 picks lam_k, 1 picks 1/conj(lam_k)."""
    branch = sort_roots(branch)
    choice = np.zeros(len(branch), int) if choice is None else np.asarray(choice)
    beta = np.where(choice == 0, branch, 1 / np.conj(branch))
    return make_spectral_data(H, Q, branch, beta, nu=np.zeros(len(branch)))


def phase_fixed_Q(absQ, branch):
    """Q of modulus absQ making the u = 0 data at beta = branch admissible."""
    g = len(branch)
    p = (-1) ** g * np.prod(branch)
    # need conj(Q) p > 0
    return absQ * p / abs(p) if g else complex(absQ)
