"""2x2 complex matrices and Laurent polynomials in the spectral parameter."""
import numpy as np

from ._backend import kernels
from .errors import ConvergenceError, DomainError


def _trim(lo, c):
    nz = [i for i in range(len(c)) if np.any(c[i] != 0)]
    if not nz:
        return 0, c[:0].copy()
    return lo + nz[0], c[nz[0]:nz[-1] + 1].copy()


class _Laurent:
    """Shared plumbing: dense coefficients c[k - lo] for lo <= k <= hi."""

    _tail = ()

    def __init__(self, lo, coeffs, trim=True):
        c = np.array(coeffs, dtype=complex)
        if c.ndim == len(self._tail):
            c = c[None]
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite coefficient", "loopalg")
        lo = int(lo)
        if trim:
            lo, c = _trim(lo, c)
        self.lo = lo
        self.c = c
        self.c.flags.writeable = False

    @property
    def hi(self):
        return self.lo + len(self.c) - 1

    def is_zero(self):
        return len(self.c) == 0 or not np.any(self.c)

    def coeff(self, k):
        if self.lo <= k <= self.hi:
            return self.c[k - self.lo].copy()
        return np.zeros(self._tail, complex)

    def dense(self, lo, hi):
        out = np.zeros((hi - lo + 1,) + self._tail, complex)
        for k in range(max(lo, self.lo), min(hi, self.hi) + 1):
            out[k - lo] = self.c[k - self.lo]
        return out

    def _new(self, lo, c):
        return type(self)(lo, c)

    def __add__(self, o):
        if not isinstance(o, _Laurent):
            o = self._new(0, np.asarray(o, complex) * np.ones(self._tail))
        if self.is_zero():
            return o
        if o.is_zero():
            return self
        lo, hi = min(self.lo, o.lo), max(self.hi, o.hi)
        return self._new(lo, self.dense(lo, hi) + o.dense(lo, hi))

    def __neg__(self):
        return self._new(self.lo, -self.c)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, s):
        return self._new(self.lo, s * self.c)

    def shift(self, p):
        """Multiply by lambda**p."""
        return self._new(self.lo + p, self.c)

    def rescale_arg(self, ell):
        """L(ell * lambda)."""
        ks = np.arange(self.lo, self.hi + 1)
        f = complex(ell) ** ks if len(ks) else ks
        return self._new(self.lo, self.c * f.reshape((-1,) + (1,) * len(self._tail)))

    def __call__(self, lam):
        return self.eval(lam)

    def eval(self, lam):
        lam = np.asarray(lam, dtype=complex)
        out = np.zeros(lam.shape + self._tail, complex)
        if self.is_zero():
            return out
        if self.lo < 0 and np.any(lam == 0):
            raise DomainError("evaluation at lambda = 0 with negative powers", "loopalg.eval")
        # Horner in lambda, then the lo shift
        for k in range(len(self.c) - 1, -1, -1):
            out = out * lam.reshape(lam.shape + (1,) * len(self._tail)) + self.c[k]
        if self.lo:
            out = out * (lam ** self.lo).reshape(lam.shape + (1,) * len(self._tail))
        return out

    def norm(self):
        return float(np.max(np.abs(self.c))) if len(self.c) else 0.0

    def allclose(self, o, tol=1e-12):
        lo, hi = min(self.lo, o.lo), max(self.hi, o.hi)
        if hi < lo:
            return True
        return np.max(np.abs(self.dense(lo, hi) - o.dense(lo, hi))) <= tol


class ScalarLaurent(_Laurent):
    _tail = ()

    def __mul__(self, o):
        if isinstance(o, ScalarLaurent):
            if self.is_zero() or o.is_zero():
                return ScalarLaurent(0, [])
            return ScalarLaurent(self.lo + o.lo, np.convolve(self.c, o.c))
        return self.scale(o)

    __rmul__ = __mul__

    def poly(self):
        """Ascending coefficients of lambda**(-lo) * p, i.e. a genuine polynomial."""
        return self.c.copy()

    def degree(self):
        return self.hi

    def roots(self, tol=1e-10, maxit=500):
        if self.is_zero():
            raise DomainError("roots of the zero polynomial", "loopalg.roots")
        return roots(self.c, tol=tol, maxit=maxit)

    def __repr__(self):
        return f"ScalarLaurent(lo={self.lo}, c={np.round(self.c, 12).tolist()})"


class MatrixLaurent(_Laurent):
    _tail = (2, 2)

    def __mul__(self, o):
        if isinstance(o, MatrixLaurent):
            if self.is_zero() or o.is_zero():
                return MatrixLaurent(0, np.zeros((0, 2, 2)))
            n, m = len(self.c), len(o.c)
            out = np.zeros((n + m - 1, 2, 2), complex)
            for i in range(n):
                out[i:i + m] += self.c[i] @ o.c
            return MatrixLaurent(self.lo + o.lo, out)
        if isinstance(o, ScalarLaurent):
            return self * MatrixLaurent(o.lo, o.c[:, None, None] * np.eye(2))
        o = np.asarray(o)
        if o.shape == (2, 2):
            return self._new(self.lo, self.c @ o)
        return self.scale(o)

    def __rmul__(self, o):
        o = np.asarray(o)
        if o.shape == (2, 2):
            return self._new(self.lo, o @ self.c)
        return self.scale(o)

    def bracket(self, o):
        return self * o - o * self

    def det(self):
        return det_laurent(self)

    def trace(self):
        return ScalarLaurent(self.lo, self.c[:, 0, 0] + self.c[:, 1, 1])

    def star(self):
        """Coefficients of conj(L(1/conj(lambda)))^T: power k gets c_{-k}^H."""
        if self.is_zero():
            return self
        c = np.conj(np.transpose(self.c[::-1], (0, 2, 1)))
        return MatrixLaurent(-self.hi, c)

    def entry(self, i, j):
        return ScalarLaurent(self.lo, self.c[:, i, j])

    def __repr__(self):
        return f"MatrixLaurent(lo={self.lo}, hi={self.hi})"


def eval(L, lam):
    """Evaluate a Laurent polynomial at lam (scalar or array)."""
    return L.eval(lam)


def det_laurent(L):
    if L.is_zero():
        return ScalarLaurent(0, [])
    a, b, c, d = (L.c[:, i, j] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    return ScalarLaurent(2 * L.lo, np.convolve(a, d) - np.convolve(b, c))


def _root_key(z):
    return (round(abs(z), 10), float(np.angle(z)))


def sort_roots(z):
    return np.array(sorted(np.asarray(z, complex), key=_root_key), dtype=complex)


def roots(p, tol=1e-10, maxit=500):
    """All roots (with multiplicity) of the polynomial with ascending coefficients p.

    Durand-Kerner first, companion matrix eigenvalues if that stalls. Sorted by
    (|root|, arg).
    """
    p = np.trim_zeros(np.asarray(p, complex), "b")
    if len(p) == 0:
        raise DomainError("roots of the zero polynomial", "loopalg.roots")
    # roots at zero from trailing low-order zeros
    nzero = 0
    while p[nzero] == 0:
        nzero += 1
    q = p[nzero:]
    n = len(q) - 1
    if n == 0:
        return sort_roots(np.zeros(nzero))
    monic = q / q[-1]
    rad = 1 + np.max(np.abs(monic[:-1]))
    # Cauchy-like radius scaled down, generic starting points
    r0 = min(rad, 2 * np.max(np.abs(monic[:-1])) ** (1.0 / n) + 1e-3)
    z0 = r0 * (0.4 + 0.9j) ** np.arange(n)
    z, _, ok = kernels().dk_roots(monic, z0.astype(complex), 1e-14, maxit)
    scale = np.sum(np.abs(q))
    res = np.abs(np.polyval(q[::-1], z)) if ok else None
    if not ok or np.any(res > tol * scale * np.maximum(1, np.abs(z)) ** n):
        z = np.roots(q[::-1])
        # a few Newton polishing steps
        dq = np.polyder(q[::-1])
        for _ in range(3):
            d = np.polyval(dq, z)
            good = d != 0
            z = np.where(good, z - np.polyval(q[::-1], z) / np.where(good, d, 1), z)
        res = np.abs(np.polyval(q[::-1], z))
        if np.any(res > tol * scale * np.maximum(1, np.abs(z)) ** n):
            raise ConvergenceError("root iteration did not converge", "loopalg.roots")
    return sort_roots(np.concatenate([np.zeros(nzero, complex), z]))


def poly_from_roots(rts, lead=1.0):
    """Ascending coefficients of lead * prod(lambda - r)."""
    c = np.array([lead], complex)
    for r in rts:
        c = np.convolve(c, [-r, 1])
    return c


def expm_sl2(A):
    """exp of a trace-free 2x2 (or a stack of them) in closed form."""
    return kernels().expm_sl2_batch(np.asarray(A, complex))


E12 = np.array([[0, 1], [0, 0]], complex)
E21 = np.array([[0, 0], [1, 0]], complex)
I2 = np.eye(2, dtype=complex)


def mat(a, b, c, d):
    return np.array([[a, b], [c, d]], dtype=complex)
