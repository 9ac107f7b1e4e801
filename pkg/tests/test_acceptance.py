"""Acceptance criteria 1-10. Each test records one PASS/FAIL line, printed in
the pytest terminal summary (and on stdout when run as a script)."""
import json
import time

import numpy as np
from click.testing import CliRunner
from conftest import ACCEPTANCE
from instances import flow_samples, random_branch, seed_potential, wander

from artifact.blowup import genus1_sequence, run_blowup
from artifact.cli import main
from artifact.factorize import circle, symes_cmc, symes_minimal_patch
from artifact.fixtures import load_fixture
from artifact.invariants import genus2_potential
from artifact.io import read_obj_vertices
from artifact.potential import helicoid_potential, hopf_from_cmc, minus_lambda_det, validate
from artifact.spectral import (isospectral_flow, magic_bounds_check, make_spectral_data,
                               offdiagonal_data, phase_fixed_Q, reconstruct_potential,
                               spectral_data)
from artifact.surface import helicoid_reference, rigid_align, sym_bobenko_cmc, sym_bobenko_minimal
from artifact.zeroflow import (ZGrid, default_lambda_samples, integrate_companion_cmc,
                               integrate_companion_kdv, integrate_frame, integrate_grid,
                               integrate_pkf_cmc, integrate_pkf_kdv, segment)


def record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def helicoid_grid(n=101):
    return ZGrid.box((-1, 1), (-np.pi, np.pi), n, n)


def minimal_patch(zeta, grid, phi=-np.pi / 2):
    fld = integrate_pkf_kdv(zeta, grid)
    fr = integrate_companion_kdv(fld, integrate_frame(fld, [0j]), phi)
    return sym_bobenko_minimal(fr)


def reference_points(grid):
    X, Y = np.meshgrid(grid.x(), grid.y(), indexing="ij")
    return helicoid_reference(X, Y), X


def test_criterion_1_helicoid_golden(tmp_path):
    t = time.process_time()
    zeta = helicoid_potential(0.0)
    grid = helicoid_grid()
    ref, _ = reference_points(grid)
    rms_ode = rigid_align(minimal_patch(zeta, grid), ref).rms
    rms_symes = rigid_align(symes_minimal_patch(zeta, grid, -np.pi / 2), ref).rms
    out = tmp_path / "helicoid.obj"
    res = CliRunner().invoke(main, ["surface", "minimal", "helicoid", "--out", str(out)])
    rms_cli = rigid_align(read_obj_vertices(out), ref).rms if res.exit_code == 0 else np.inf
    secs = time.process_time() - t
    worst = max(rms_ode, rms_symes, rms_cli)
    record(1, worst <= 1e-5 and secs <= 30,
           f"RMS ode {rms_ode:.2e}, symes {rms_symes:.2e}, cli {rms_cli:.2e} (<= 1e-5); {secs:.1f} s cpu (<= 30)")


def test_criterion_2_helicoid_metric_and_hopf():
    hs, eo, eq = [], [], []
    for n in (33, 65, 129):
        grid = helicoid_grid(n)
        p = minimal_patch(helicoid_potential(0.0), grid)
        _, X = reference_points(grid)
        hs.append(grid.hx)
        eo.append(np.max(np.abs(p.diag.omega - 2 * np.log(np.cosh(X)))))
        eq.append(np.max(np.abs(p.diag.Q - 0.5j)))
    po = np.polyfit(np.log(hs), np.log(eo), 1)[0]
    pq = np.polyfit(np.log(hs), np.log(eq), 1)[0]
    co = max(e / h**2 for e, h in zip(eo, hs))
    cq = max(e / h**2 for e, h in zip(eq, hs))
    ok = abs(po - 2) <= 0.3 and abs(pq - 2) <= 0.3
    record(2, ok, f"FD order omega {po:.2f}, Hopf {pq:.2f} (2.0 +- 0.3); c_omega {co:.3f}, c_Q {cq:.3f}")


def genus3_potential():
    lam = np.array([0.3, -0.4 + 0.2j, -0.1 + 0.5j])
    return reconstruct_potential(offdiagonal_data(1.0, phase_fixed_Q(0.5, lam), lam, [0, 1, 0]))


def test_criterion_3_isospectrality():
    worst_z = worst_t = 0.0
    moved = []
    for z in (load_fixture("genus1"), genus2_potential(), genus3_potential()):
        z = isospectral_flow(z, 0, 1e-2, 40, np.exp(0.4j))      # leave the off-diagonal point
        a0 = minus_lambda_det(z)
        z1, _ = segment(z, 10.0 * np.exp(0.3j), [], nsteps=10_000)
        worst_z = max(worst_z, (minus_lambda_det(z1) - a0).norm())
        for n in range(z.g):
            z2 = isospectral_flow(z, n, 1e-3, 10_000, np.exp(0.7j))
            worst_t = max(worst_t, (minus_lambda_det(z2) - a0).norm())
            moved.append(float(np.max(np.abs(z2.c - z.c))))
    ok = worst_z <= 1e-8 and worst_t <= 1e-8 and min(moved) > 1e-3
    record(3, ok, f"max coefficient drift of a: z-flow {worst_z:.1e}, t_n flows {worst_t:.1e} (<= 1e-8); "
                  f"smallest displacement {min(moved):.2f}")


def test_criterion_4_symes_equivalence():
    errs = {}
    lams = circle(16)
    grid = ZGrid.box((-0.5, 0.5), (-0.5, 0.5), 21, 21)
    disk = np.abs(grid.z() - grid.origin) <= 0.5 + 1e-12
    for name in ("vacuum", "genus1"):
        z = load_fixture(name)
        sf = symes_cmc(z, grid, lams=lams)
        fr = integrate_frame(integrate_grid(z, grid)[0], lams)
        errs[name] = float(np.max(np.abs(sf.F - fr.F)[disk]))
    record(4, max(errs.values()) <= 1e-6,
           ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + " (<= 1e-6, 16 samples, |z| <= 0.5)")


def test_criterion_5_trace_formula_round_trip():
    rng = np.random.default_rng(2024)
    worst, done, tries = 0.0, 0, 0
    while done < 50:
        tries += 1
        g = 1 + done % 2
        z = wander(rng, seed_potential(rng, g))
        sd = spectral_data(z)
        if g > 1 and abs(sd.beta[0] - sd.beta[1]) < 1e-2:
            continue
        sd2 = spectral_data(reconstruct_potential(sd))
        e = max(np.max(np.abs(sd.branch - sd2.branch)), np.max(np.abs(sd.beta - sd2.beta)),
                np.max(np.abs(sd.nu - sd2.nu)), abs(sd.omega() - sd2.omega()))
        worst = max(worst, float(e))
        done += 1
    record(5, worst <= 1e-9, f"50 instances (g = 1, 2), worst branch/divisor/omega error {worst:.1e} (<= 1e-9)")


def _chains(m):
    c1 = min(m.margins["beta >= lambda"], m.margins["beta <= 1/lambda"])
    c2 = min(m.margins["e^w >= lower"], m.margins["e^w <= upper"])
    return c1, c2


def test_criterion_6_magic_estimates():
    bad1 = bad2 = total = 0
    worst1 = worst2 = np.inf
    for s in range(10):
        rng = np.random.default_rng(100 + s)
        g = 1 + s % 2
        for z in flow_samples(rng, seed_potential(rng, g), 100):
            c1, c2 = _chains(magic_bounds_check(z))
            bad1 += c1 < -1e-10
            bad2 += c2 < -1e-10
            worst1, worst2 = min(worst1, c1), min(worst2, c2)
            total += 1
    # attainment: u = 0 with beta_k = lambda_k (lower) or 1/conj(lambda_k) (upper)
    rng = np.random.default_rng(7)
    att = 0.0
    for g in (1, 2):
        lam = random_branch(rng, g)
        Q = phase_fixed_Q(0.5, lam)
        for choice, bound in ((0, "lower"), (1, "upper")):
            m = magic_bounds_check(reconstruct_potential(offdiagonal_data(1.0, Q, lam, [choice] * g)))
            target = m.lam_abs if choice == 0 else 1 / m.lam_abs
            att = max(att, abs(m.e_omega - getattr(m, bound)) / getattr(m, bound),
                      float(np.max(np.abs(np.sort(m.beta_abs) - np.sort(target)))))
    ok = bad1 == 0 and bad2 == 0 and att <= 1e-10
    record(6, ok, f"{total} samples over 10 seeds: chain (1) violated at {bad1} (worst margin {worst1:.2e}), "
                  f"chain (2) violated at {bad2} (worst margin {worst2:.1e}); attainment error {att:.1e}")


def test_criterion_7_cmc_sym_bobenko():
    lines, ok = [], True
    for name in ("vacuum", "genus1"):
        z = load_fixture(name)
        Q = hopf_from_cmc(z)
        for lam_s in (1.0, -1j):
            hs, eh, eq = [], [], []
            for n in (21, 41, 81):
                grid = ZGrid.box((-0.5, 0.5), (-0.5, 0.5), n, n)
                fld = integrate_pkf_cmc(z, grid)
                fr = integrate_frame(fld, default_lambda_samples("cmc", lam_s))
                p = sym_bobenko_cmc(integrate_companion_cmc(fld, fr, lam_s), lam_s, z.H)
                hs.append(grid.hx)
                eh.append(np.max(np.abs(p.diag.H - z.H)))
                eq.append(np.max(np.abs(p.diag.Q - Q / lam_s)))
            ph = np.log2(eh[-2] / eh[-1])
            pq = np.log2(eq[-2] / eq[-1])
            ok &= ph >= 1.7 and pq >= 1.7
            lines.append(f"{name}@{complex(lam_s):g}: H order {ph:.2f}, Q order {pq:.2f}")
    record(7, ok, "; ".join(lines) + " (c h^2: order >= 1.7)")


def test_criterion_8_blowup_convergence():
    # The literal data (lambda = 4^-n, beta = -lambda) is not a real potential
    # for either sign of nu; the sequence lambda = beta = -4^-n is used instead.
    literal_rejected = True
    for n in (1, 4, 8):
        for sign in (1, -1):
            sd = make_spectral_data(1.0, 0.5, [4.0**-n], [-(4.0**-n)], sign=sign)
            literal_rejected &= not validate(reconstruct_potential(sd), 1e-10).ok
    t = time.process_time()
    rep = run_blowup(genus1_sequence(n_max=8))
    secs = time.process_time() - t
    ze = [r["zeta_err"] for r in rep.records]
    ce = [max(r["U_err"], r["V_err"]) for r in rep.records]
    mono = all(b < a for a, b in zip(ze, ze[1:]))
    conn = all(b <= a for a, b in zip(ce, ce[1:])) and ce[-1] <= 1e-6
    ok = literal_rejected and mono and ze[-1] <= 1e-3 and conn and rep.limit_H <= 1e-4 and secs <= 120
    record(8, ok, f"zeta~ error monotone={mono}, final {ze[-1]:.1e}; connection error {ce[-1]:.1e}; "
                  f"limit |H| {rep.limit_H:.1e}; {secs:.1f} s; literal data rejected={literal_rejected}")


def test_criterion_9_helicoid_endgame(tmp_path):
    out = tmp_path / "report.json"
    res = CliRunner().invoke(main, ["blowup", "helicoid", "--report", str(out)])
    assert res.exit_code == 0, res.output
    rep = json.loads(out.read_text())
    hc = rep["extras"]["helicoid_check"]
    ok = rep["d_tilde"] == 1 and rep["g_tilde"] == 0 and hc["coefficient_err"] <= 1e-3 and hc["rms"] <= 1e-3
    record(9, ok, f"d~ {rep['d_tilde']}, g~ {rep['g_tilde']}, coefficient error {hc['coefficient_err']:.1e}, "
                  f"surface RMS {hc['rms']:.1e} (<= 1e-3)")


def test_criterion_10_structural_invariants():
    t = time.time()
    res = CliRunner().invoke(main, ["check", "invariants"])
    secs = time.time() - t
    lines = [ln for ln in res.output.splitlines() if ln.startswith(("PASS", "FAIL"))]
    need = ("potential reality", "frame reality", "monodromy base-point", "monodromy reality",
            "two paths", "det F")
    covered = all(any(k in ln for ln in lines) for k in need)
    nfail = sum(ln.startswith("FAIL") for ln in lines)
    ok = res.exit_code == 0 and covered and nfail == 0 and secs <= 300
    record(10, ok, f"{len(lines) - nfail}/{len(lines)} invariant checks pass in {secs:.1f} s (<= 300)")


if __name__ == "__main__":
    import sys

    import pytest
    sys.exit(pytest.main([__file__, "-q"]))
