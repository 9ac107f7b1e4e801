"""Blowup of CMC potentials with a branch point running into lambda = 0, and
the minimal-surface limit."""
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergenceError, ResidueError
from .io import potential_to_dict
from .loopalg import MatrixLaurent, ScalarLaurent
from .potential import (KdvPotential, alpha_kdv, conformal_factor_cmc,
                        helicoid_potential, minus_lambda_det, validate_kdv)
from .spectral import make_spectral_data, reconstruct_potential, spectral_data
from .surface import diagnostics, helicoid_reference, rigid_align, sym_bobenko_cmc, sym_bobenko_minimal
from .zeroflow import (ZGrid, default_lambda_samples, integrate_companion_cmc,
                       integrate_companion_kdv, integrate_frame, integrate_pkf_cmc,
                       integrate_pkf_kdv)

log = logging.getLogger(__name__)

FINITE = 1e3            # |lambda~| below this counts as a finite limit


@dataclass(frozen=True)
class BlowupFactors:
    ell: float
    r: float
    s: float
    h: float


def rescale_potential(zeta, ell, s):
    """zeta~(lam~) = s zeta(ell lam~), coefficientwise s ell^k zeta_k."""
    L = zeta.laurent() if hasattr(zeta, "laurent") else zeta
    return L.rescale_arg(ell).scale(s)


def choose_factors(sd):
    lam = np.asarray(sd.branch)
    if not len(lam):
        raise DomainError("no branch points", "blowup.choose_factors")
    ell = float(np.min(np.abs(lam)))
    r = math.sqrt(ell)
    return BlowupFactors(ell, r, r, ell)


@dataclass
class BlowupSequenceSpec:
    """generator(n) -> (zeta_n, z_n0, sd_n); sd_n may be None (then extracted)."""
    n_max: int
    generator: object
    description: str = ""
    H: float = 1.0
    lam_s: complex = 1.0
    n_min: int = 1

    def spectral(self, n):
        zeta, z0, sd = self.generator(n)
        return zeta, z0, (sd if sd is not None else spectral_data(zeta))


# hypotheses

@dataclass
class HypothesisReport:
    ns: list
    lam1: list                       # |lambda_{n,1}|
    sep_beta: list                   # min_{k != k'} ell^-1 |beta_k - beta_k'|
    sep_beta_inv: list               # min_{k != k'} ell^-1 |1/beta_k - 1/beta_k'|
    ratio: list                      # |lambda_{n,1}|^-1 e^{omega_n(z_n0)}
    verdicts: dict = field(default_factory=dict)
    rates: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(v == "pass" for v in self.verdicts.values())

    def has_fail(self):
        return any(v == "fail" for v in self.verdicts.values())


def _log_rate(vals):
    v = np.asarray(vals, float)
    if len(v) < 2 or np.any(v <= 0):
        return float("nan")
    return float(np.polyfit(np.arange(len(v)), np.log(v), 1)[0])


def check_hypotheses(spec, n_max=None, sep_min=1e-2, ratio_band=(1e-3, 1e3)):
    n_max = spec.n_max if n_max is None else n_max
    ns = list(range(spec.n_min, n_max + 1))
    lam1, sb, sbi, ratio = [], [], [], []
    for n in ns:
        zeta, _, sd = spec.spectral(n)
        ell = float(np.min(np.abs(sd.branch)))
        lam1.append(ell)
        b = np.asarray(sd.beta)
        if len(b) > 1:
            d = np.abs(b[:, None] - b[None, :]) / ell
            di = np.abs(1 / b[:, None] - 1 / b[None, :]) / ell
            off = ~np.eye(len(b), dtype=bool)
            sb.append(float(d[off].min()))
            sbi.append(float(di[off].min()))
        else:
            sb.append(float("inf"))
            sbi.append(float("inf"))
        ratio.append(float(np.exp(conformal_factor_cmc(zeta)) / ell))
    rep = HypothesisReport(ns, lam1, sb, sbi, ratio)
    rep.rates["a"] = _log_rate(lam1)
    dec = all(lam1[i + 1] < lam1[i] for i in range(len(lam1) - 1))
    rep.verdicts["a"] = "pass" if dec and rep.rates["a"] < 0 else "fail"
    finite = [x for x in sb + sbi if math.isfinite(x)]
    rep.rates["b"] = _log_rate([x for x in sb if math.isfinite(x)]) if finite else 0.0
    rep.verdicts["b"] = "pass" if not finite or min(finite) >= sep_min else "warn"
    lo, hi = min(ratio), max(ratio)
    rep.verdicts["c"] = "pass" if ratio_band[0] <= lo and hi <= ratio_band[1] else "warn"
    return rep


# the limit

def kdv_limit(zt, d=0, tol=1e-8):
    """KdV potential with coeff(k) = coefficient of lam~^(-k) of zt, k = -d..1.

    Powers of lam~ above d must have died out (below tol relative)."""
    L = zt if isinstance(zt, MatrixLaurent) else zt.laurent()
    scale = max(1.0, L.norm())
    if L.lo < -1 and np.max(np.abs(L.dense(L.lo, -2))) > tol * scale:
        raise ResidueError("powers below lam~^-1 present", "blowup.kdv_limit")
    if L.hi > d:
        top = float(np.max(np.abs(L.dense(d + 1, L.hi))))
        if top > tol * scale:
            raise ResidueError(f"lam~ powers above {d} still of size {top:.3e}", "blowup.kdv_limit")
    c = L.dense(-1, d)[::-1]             # lam~^d .. lam~^-1  ->  KdV powers -d .. 1
    m = c[-1]
    if max(abs(m[0, 0]), abs(m[1, 0]), abs(m[1, 1])) > tol * scale or not m[0, 1].real > 0:
        raise ResidueError("lam~^-1 coefficient is not nilpotent with positive entry", "blowup.kdv_limit")
    c = c.copy()
    c[-1, 0, 1] = c[-1, 0, 1].real
    return KdvPotential(d, c)


def extrapolate(seq):
    """Aitken limit of the last three arrays (elementwise), falling back to the last one."""
    if len(seq) < 3:
        return np.array(seq[-1])
    x0, x1, x2 = (np.asarray(s, complex) for s in seq[-3:])
    d1 = x2 - x1
    d2 = x2 - 2 * x1 + x0
    out = x2.copy()
    ok = np.abs(d2) > 1e-14 * np.maximum(1, np.abs(x2))
    # only where the differences look geometric
    r = np.where(ok, d1 / np.where(ok, x1 - x0, 1), 0)
    ok &= (np.abs(r) < 0.95) & (np.abs(x1 - x0) > 0)
    out[ok] = x2[ok] - d1[ok] ** 2 / d2[ok]
    return out


def helicoid_normalize(kdv):
    """c zeta(mu lam) matching the genus-0 helicoid field at some x.

    Returns (normalized potential, c, mu, x, coefficient error)."""
    u0, v0, w0 = kdv.u0(), kdv.coeff(0)[0, 1], kdv.w0()
    v1 = kdv.v1()
    c = np.sqrt(0.25 / (u0**2 + v0 * w0))
    mu = -0.125 / (c**2 * v1 * w0)
    cc = np.array([c * kdv.coeff(0), c * mu * kdv.coeff(1)])
    norm = KdvPotential(0, cc)
    cv = 4 * norm.v1().real
    x = math.acosh(max(cv, 1.0))
    if norm.u0().real < 0:
        x = -x
    err = float(np.max(np.abs(norm.c - helicoid_potential(x).c)))
    return norm, complex(c), complex(mu), x, err


# reports

@dataclass
class BlowupReport:
    records: list
    limit: KdvPotential
    d_tilde: int
    g_tilde: int
    zeta_inf: MatrixLaurent = None
    description: str = ""
    limit_H: float = None
    limit_patch: object = field(default=None, repr=False)
    extras: dict = field(default_factory=dict)

    CSV_COLUMNS = ("n", "ell", "zeta_err", "U_err", "V_err", "surface_rms", "H_meas")

    def to_json(self):
        def cx(z):
            return [float(np.real(z)), float(np.imag(z))]
        recs = []
        for r in self.records:
            q = {k: v for k, v in r.items() if k not in ("lam_t", "beta_t")}
            q["lam_t"] = [cx(z) for z in r["lam_t"]]
            q["beta_t"] = [cx(z) for z in r["beta_t"]]
            recs.append(q)
        out = {"description": self.description, "d_tilde": self.d_tilde, "g_tilde": self.g_tilde,
               "limit": potential_to_dict(self.limit), "records": recs,
               "limit_H": self.limit_H, "extras": self.extras}
        return json.dumps(out, indent=2, default=_json_default)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.records:
            w.writerow([_fmt(r.get(c)) for c in self.CSV_COLUMNS])
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex) or isinstance(o, np.complexfloating):
        return [float(o.real), float(o.imag)]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _connection_errors(zt, H, ell, kdv):
    """max coefficient differences of U~_n, V~_n against the KdV connection at lam = 1/lam~."""
    v = zt.coeff(-1)[0, 1]
    u, w = zt.coeff(0)[0, 0], zt.coeff(0)[1, 0]
    Ut = MatrixLaurent(-1, [v * np.array([[0, 1], [0, 0]]),
                            [[u / 2, 0], [w, -u / 2]]], trim=False)
    Vt = MatrixLaurent(0, [-np.array([[np.conj(u) / 2, np.conj(w)], [0, -np.conj(u) / 2]]),
                           -(ell**2) * np.conj(v) * np.array([[0, 0], [1, 0]])], trim=False)
    P = alpha_kdv(kdv)

    def flip(L):
        return MatrixLaurent(-L.hi, L.c[::-1], trim=False)
    dU = (Ut - flip(P.U)).norm()
    dV = (Vt - flip(P.V)).norm()
    return dU, dV, abs(ell**2 * v)


def limit_surface(kdv, grid, phi, H=1.0, lams=None):
    """Minimal surface of the limit potential through the ODE pipeline."""
    fld = integrate_pkf_kdv(kdv, grid)
    fr = integrate_frame(fld, [0j] if lams is None else lams)
    fr = integrate_companion_kdv(fld, fr, phi, beta_scale=1.0 / (2 * H))
    return sym_bobenko_minimal(fr)


def blown_up_surface(zeta, fac, grid, lam_s, H):
    """f~_n(z~) = h^-1 (f_n(z0 + r z~) - f_n(z0)) with f_n from the CMC pipeline."""
    g = grid.scaled(fac.r, origin=0j)
    fld = integrate_pkf_cmc(zeta, g)
    fr = integrate_frame(fld, default_lambda_samples("cmc", lam_s, n=4))
    fr = integrate_companion_cmc(fld, fr, lam_s)
    p = sym_bobenko_cmc(fr, lam_s, H)
    p.points = p.points / fac.h
    p.grid = grid
    diagnostics(p)
    return p


def run_blowup(spec, n_max=None, grid=None, surface_ns=None, check=True, hyp_kwargs=None):
    n_max = spec.n_max if n_max is None else n_max
    if check:
        hyp = check_hypotheses(spec, n_max, **(hyp_kwargs or {}))
        if hyp.has_fail():
            raise NonConvergenceError(f"hypotheses failed: {hyp.verdicts}", "blowup.run_blowup")
    H = spec.H
    ns = list(range(spec.n_min, n_max + 1))
    data = []
    for n in ns:
        zeta, z0, sd = spec.spectral(n)
        fac = choose_factors(sd)
        zt = rescale_potential(zeta, fac.ell, fac.s)
        data.append((n, zeta, sd, fac, zt))
    lo = -1
    hi = max(d[4].hi for d in data)
    seq = [d[4].dense(lo, hi) for d in data]
    Zinf = extrapolate(seq)
    zinf = MatrixLaurent(lo, Zinf, trim=False)
    last = data[-1]
    lam_t_last = np.asarray(last[2].branch) / last[3].ell
    d_tilde = int(np.sum(np.abs(lam_t_last) <= FINITE))
    g_tilde = d_tilde // 2
    # the limit lives in powers -1..g_tilde; higher ones must have died out
    scale = max(1.0, zinf.norm())
    tail = np.abs(Zinf[g_tilde + 2:]) if hi > g_tilde else np.zeros(1)
    Ztrim = Zinf.copy()
    Ztrim[g_tilde + 2:] = np.where(tail < 1e-6 * scale, 0, Ztrim[g_tilde + 2:])
    kdv = kdv_limit(MatrixLaurent(lo, Ztrim, trim=False), g_tilde, tol=1e-8)
    phi = float(np.angle(spec.lam_s))
    if grid is None:
        grid = ZGrid.box((-0.5, 0.5), (-0.5, 0.5), 61, 61)
    lim = limit_surface(kdv, grid, phi, H)
    if surface_ns is None:
        surface_ns = ns[-3:]
    recs = []
    for n, zeta, sd, fac, zt in data:
        zerr = float(np.max(np.abs(zt.dense(lo, hi) - Zinf)))
        dU, dV, vll = _connection_errors(zt, H, fac.ell, kdv)
        rec = {"n": n, "ell": fac.ell, "r": fac.r, "s": fac.s, "h": fac.h,
               "lam_t": list(np.asarray(sd.branch) / fac.ell),
               "beta_t": list(np.asarray(sd.beta) / fac.ell),
               "zeta_err": zerr, "U_err": float(dU), "V_err": float(dV), "V_lowerleft": float(vll),
               "surface_rms": None, "H_meas": None,
               "a_err": None}
        a = minus_lambda_det(zt)                  # equals a_n(ell lam~) since s^2 = ell
        ainf = _a_limit(H, complex(sd.Q), lam_t_last[:d_tilde])
        rec["a_err"] = float(np.max(np.abs(a.dense(0, max(a.hi, ainf.hi)) - ainf.dense(0, max(a.hi, ainf.hi)))))
        rec["omega_ratio"] = float(np.exp(conformal_factor_cmc(zeta)) / fac.ell)
        if n in surface_ns:
            p = blown_up_surface(zeta, fac, grid, spec.lam_s, H)
            rec["surface_rms"] = float(np.sqrt(np.mean(np.sum((p.points - lim.points) ** 2, -1))))
            rec["H_meas"] = float(np.median(p.diag.interior("H", 2)))
        recs.append(rec)
    zerrs = [r["zeta_err"] for r in recs]
    steps = [float(np.max(np.abs(seq[i] - seq[i - 1]))) for i in range(1, len(seq))]
    if len(steps) >= 3 and not (steps[-1] < steps[-2] < steps[-3]):
        raise NonConvergenceError("successive differences did not decrease over the last 3 steps",
                                  "blowup.run_blowup")
    rep = BlowupReport(recs, kdv, d_tilde, g_tilde, zinf, spec.description,
                       float(np.max(np.abs(lim.diag.interior("H", 2)))), lim)
    rep.extras["validate_limit"] = validate_kdv(kdv, 1e-8).ok
    rep.extras["zeta_err_monotone"] = all(zerrs[i + 1] < zerrs[i] for i in range(len(zerrs) - 1))
    rep.extras["v1_vs_beta"] = [float(kdv.v1().real), 0.25 * float(np.abs(recs[-1]["beta_t"][0]))]
    return rep


def _a_limit(H, Q, lam_inf):
    c = np.array([-0.5 * H * Q], complex)
    for l in lam_inf:
        c = np.convolve(c, [1, -1 / l])
    return ScalarLaurent(0, c, trim=False)


# sequences

def genus1_sequence(n_max=8, H=1.0, Q=0.5, lam_s=1.0):
    """lambda_{n,1} = beta_{n,1} = -4^-n with u = 0 (see the decisions notes)."""
    def gen(n):
        lam = -(4.0 ** -n)
        sd = make_spectral_data(H, Q, [lam], [lam], nu=[0])
        return reconstruct_potential(sd), 0j, sd
    return BlowupSequenceSpec(n_max, gen, "genus-1: lambda1 = beta1 = -4^-n", H, lam_s)


def helicoid_scenario(n_max=12):
    """g = 3, lambda1 = beta1 = 4^-n, double branch point i 2^-n, beta2 = i 2^-n,
    beta3 = 1/conj(beta2); H = 1, Q = 1/2, Sym point -i."""
    H, Q = 1.0, 0.5

    def gen(n):
        l1 = 4.0 ** -n
        l2 = 1j * 2.0 ** -n
        beta = [l1, l2, 1 / np.conj(l2)]
        sd = make_spectral_data(H, Q, [l1, l2, l2], beta, nu=[0, 0, 0])
        return reconstruct_potential(sd), 0j, sd
    return BlowupSequenceSpec(n_max, gen, "helicoid endgame, g = 3", H, -1j)


def colliding_sequence(n_max=8, H=1.0, Q=0.5):
    """genus 2 with beta~_1 - beta~_2 shrinking like ell_n; violates (b)."""
    def gen(n):
        ell = 4.0 ** -n
        l1 = -ell
        l2 = -ell * (1 + ell)
        sd = make_spectral_data(H, Q, [l1, l2], [l1, l2], nu=[0, 0])
        return reconstruct_potential(sd), 0j, sd
    return BlowupSequenceSpec(n_max, gen, "colliding divisor points", H, 1.0)


def helicoid_check(rep, grid=None):
    """Normalized limit against the helicoid field, and the limit surface
    against the reference helicoid. Returns (coefficient error, x, rms)."""
    norm, c, mu, x, err = helicoid_normalize(rep.limit)
    if grid is None:
        grid = ZGrid.box((-1, 1), (-np.pi, np.pi), 101, 101)
    p = limit_surface(rep.limit, grid, -np.pi / 2, 1.0)
    X, Y = np.meshgrid(grid.x(), grid.y(), indexing="ij")
    al = rigid_align(p, helicoid_reference(X + x, Y))
    return err, x, al.rms, {"c": c, "mu": mu}
