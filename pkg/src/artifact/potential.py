"""CMC and KdV potentials with their connection forms."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeError, DomainError
from .loopalg import E12, E21, MatrixLaurent, ScalarLaurent


class _Potential:
    kind = ""

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.shape != (self.hi - self.lo + 1, 2, 2):
            raise DomainError(f"expected {self.hi - self.lo + 1} coefficients, got shape {c.shape}",
                              "potential")
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite coefficient", "potential")
        self.c = c
        self.c.flags.writeable = False

    def coeff(self, k):
        if self.lo <= k <= self.hi:
            return self.c[k - self.lo].copy()
        return np.zeros((2, 2), complex)

    def laurent(self):
        return MatrixLaurent(self.lo, self.c, trim=False)

    def __call__(self, lam):
        return self.laurent().eval(lam)

    def u0(self):
        return self.c[-self.lo][0, 0]

    def w0(self):
        return self.c[-self.lo][1, 0]


class CmcPotential(_Potential):
    """Coefficients zeta_k for k = -1..g, plus the mean curvature H."""

    kind = "cmc"
    lo = -1

    def __init__(self, g, H, coeffs):
        self.g = int(g)
        self.H = float(H)
        if self.g < 0 or not self.H > 0:
            raise DomainError("need g >= 0 and H > 0", "potential")
        super().__init__(coeffs)

    @property
    def hi(self):
        return self.g

    @classmethod
    def from_laurent(cls, L, g, H):
        return cls(g, H, L.dense(-1, g))

    def with_coeffs(self, c):
        return CmcPotential(self.g, self.H, c)

    def vm1(self):
        return self.c[0][0, 1]

    def __repr__(self):
        return f"CmcPotential(g={self.g}, H={self.H})"


class KdvPotential(_Potential):
    """Coefficients zeta_k for k = -d..1 (stored ascending)."""

    kind = "kdv"
    hi = 1

    def __init__(self, d, coeffs):
        self.d = int(d)
        if self.d < 0:
            raise DomainError("need d >= 0", "potential")
        super().__init__(coeffs)

    @property
    def lo(self):
        return -self.d

    @classmethod
    def from_laurent(cls, L, d):
        return cls(d, L.dense(-d, 1))

    def with_coeffs(self, c):
        return KdvPotential(self.d, c)

    def v1(self):
        return self.c[-1][0, 1]

    def __repr__(self):
        return f"KdvPotential(d={self.d})"


@dataclass
class Check:
    name: str
    ok: bool
    magnitude: float
    index: object = None


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.ok]

    def add(self, name, ok, mag, index=None):
        self.checks.append(Check(name, bool(ok), float(mag), index))

    def lines(self):
        out = []
        for c in self.checks:
            idx = "" if c.index is None else f" k={c.index}"
            out.append(f"{'PASS' if c.ok else 'FAIL'} {c.name}{idx} ({c.magnitude:.3e})")
        return out


def _common_checks(rep, zeta, tol):
    scale = max(1.0, float(np.max(np.abs(zeta.c))))
    for k in range(zeta.lo, zeta.hi + 1):
        t = abs(np.trace(zeta.coeff(k))) / scale
        rep.add("trace-free", t <= tol, t, k)
    return scale


def validate_cmc(zeta, tol=1e-12):
    rep = ValidationReport()
    scale = _common_checks(rep, zeta, tol)
    m = zeta.coeff(-1)
    v = m[0, 1]
    off = max(abs(m[0, 0]), abs(m[1, 0]), abs(m[1, 1])) / scale
    rep.add("coeff(-1) nilpotent upper", off <= tol, off, -1)
    rep.add("v_-1 real", abs(v.imag) <= tol * scale, abs(v.imag) / scale, -1)
    rep.add("v_-1 positive", v.real > 0, v.real, -1)
    g = zeta.g
    for k in range(-1, g + 1):
        d = np.max(np.abs(zeta.coeff(k) + zeta.coeff(g - (k + 1)).conj().T)) / scale
        rep.add("reality", d <= tol, d, k)
    t = abs(np.trace(zeta.coeff(-1) @ zeta.coeff(0)))
    rep.add("tr(zeta_-1 zeta_0) != 0", t > tol * scale**2, t)
    return rep


def validate_kdv(zeta, tol=1e-12):
    rep = ValidationReport()
    scale = _common_checks(rep, zeta, tol)
    m = zeta.coeff(1)
    v = m[0, 1]
    off = max(abs(m[0, 0]), abs(m[1, 0]), abs(m[1, 1])) / scale
    rep.add("coeff(1) nilpotent upper", off <= tol, off, 1)
    rep.add("v_1 real", abs(v.imag) <= tol * scale, abs(v.imag) / scale, 1)
    rep.add("v_1 positive", v.real > 0, v.real, 1)
    t = abs(np.trace(zeta.coeff(1) @ zeta.coeff(0)))
    rep.add("tr(zeta_1 zeta_0) != 0", t > tol * scale**2, t)
    return rep


def validate(zeta, tol=1e-12):
    return validate_cmc(zeta, tol) if zeta.kind == "cmc" else validate_kdv(zeta, tol)


def conformal_factor_cmc(zeta):
    return 2 * np.log(2 * zeta.vm1().real / zeta.H)


def conformal_factor_kdv(zeta):
    return 2 * np.log(4 * zeta.v1().real)


def hopf_from_cmc(zeta):
    return complex(-zeta.w0() * np.exp(conformal_factor_cmc(zeta) / 2))


def hopf_from_kdv(zeta):
    return complex(-zeta.w0() * np.exp(conformal_factor_kdv(zeta) / 2))


@dataclass
class ConnectionPair:
    U: MatrixLaurent
    V: MatrixLaurent

    def along(self, d):
        """alpha applied to the real direction d (complex number): d*U + conj(d)*V."""
        return self.U.scale(d) + self.V.scale(np.conj(d))

    def x(self):
        return self.along(1.0)

    def y(self):
        return self.along(1j)


def _diag_parts(u, w):
    U0 = np.array([[u / 2, 0], [w, -u / 2]], complex)
    V0 = -np.array([[np.conj(u) / 2, np.conj(w)], [0, -np.conj(u) / 2]], complex)
    return U0, V0


def alpha_cmc(zeta):
    v = zeta.vm1()
    U0, V0 = _diag_parts(zeta.u0(), zeta.w0())
    U = MatrixLaurent(-1, [v * E12, U0], trim=False)
    V = MatrixLaurent(0, [V0, -np.conj(v) * E21], trim=False)
    return ConnectionPair(U, V)


def alpha_kdv(zeta):
    v = zeta.v1()
    U0, V0 = _diag_parts(zeta.u0(), zeta.w0())
    U = MatrixLaurent(0, [U0, v * E12], trim=False)
    V = MatrixLaurent(0, [V0], trim=False)
    return ConnectionPair(U, V)


def alpha(zeta):
    return alpha_cmc(zeta) if zeta.kind == "cmc" else alpha_kdv(zeta)


def alpha_geometric(omega, omega_z, H, Q):
    """CMC connection built directly from omega, omega_z, H and Q."""
    e = np.exp(omega / 2)
    wz = complex(omega_z)
    U = MatrixLaurent(-1, [[[0, 2 * H * e], [0, 0]],
                           [[wz, 0], [-4 * Q / e, -wz]]], trim=False).scale(0.25)
    V = MatrixLaurent(0, [[[-np.conj(wz), 4 * np.conj(Q) / e], [0, np.conj(wz)]],
                          [[0, 0], [-2 * H * e, 0]]], trim=False).scale(0.25)
    return ConnectionPair(U, V)


def alpha_kdv_geometric(omega, omega_z, Q):
    e = np.exp(omega / 2)
    wz = complex(omega_z)
    U = MatrixLaurent(0, [[[wz, 0], [-4 * Q / e, -wz]],
                          [[0, e], [0, 0]]], trim=False).scale(0.25)
    V = MatrixLaurent(0, [[[-np.conj(wz), 4 * np.conj(Q) / e], [0, np.conj(wz)]]],
                      trim=False).scale(0.25)
    return ConnectionPair(U, V)


def minus_lambda_det(zeta):
    L = zeta.laurent() if hasattr(zeta, "laurent") else zeta
    return -(L.det().shift(1))


def spectral_poly_cmc(zeta, tol=1e-12):
    a = minus_lambda_det(zeta)
    g = zeta.g
    scale = max(1.0, a.norm())
    c = a.dense(0, 2 * g)
    if a.lo < 0 and np.max(np.abs(a.dense(a.lo, -1))) > tol * scale:
        raise DegreeError("a(lambda) has negative powers", "potential.spectral_poly_cmc")
    if a.hi > 2 * g and np.max(np.abs(a.dense(2 * g + 1, a.hi))) > tol * scale:
        raise DegreeError("a(lambda) degree exceeds 2g", "potential.spectral_poly_cmc")
    if abs(c[-1]) <= tol * scale:
        raise DegreeError(f"a(lambda) degree dropped below 2g={2 * g}", "potential.spectral_poly_cmc")
    return ScalarLaurent(0, c, trim=False)


def spectral_poly_kdv(zeta):
    a = minus_lambda_det(zeta)
    return ScalarLaurent(0, a.dense(0, max(a.hi, 0)), trim=False)


# closed-form constructors

def vacuum(H=1.0, Q=0.5):
    """Round-cylinder potential: g = 1, e^omega = 2|Q|/H, u = 0."""
    e = np.sqrt(2 * abs(Q) / H)   # e^{omega/2}
    v = 0.5 * H * e
    w0 = -Q / e
    c = [v * E12,
         np.array([[0, -np.conj(w0)], [w0, 0]]),
         -np.conj(v) * E21]
    return CmcPotential(1, H, c)


def helicoid_potential(x, C0=-0.25):
    """Genus-0 KdV field of the helicoid at base point x (Q = 1/2).

    v_0 = -e^{w/2}((w_zz - w_z^2/2)/(4Q) - C0). Only C0 = -1/4 gives an
    x-independent spectral polynomial.
    """
    ch = np.cosh(x)
    th = np.tanh(x)
    Q = 0.5
    wz = th
    wzz = 0.5 / ch**2
    v0 = -ch * ((wzz - 0.5 * wz**2) / (4 * Q) - C0)
    c = [np.array([[th / 2, v0], [-Q / ch, -th / 2]]), 0.25 * ch * E12]
    return KdvPotential(0, c)
