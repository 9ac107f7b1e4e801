"""Command line front end. Exit codes: 0 ok, 1 validation, 2 numerical, 3 io."""
import json
import logging
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import io as aio
from .errors import ArtifactError, DomainError

EXIT = {"validation": 1, "numerical": 2, "io": 3}


@dataclass
class RunConfig:
    grid: tuple = None              # (nx, ny, x0, x1, y0, y1), offsets from the base point
    lambda_samples: int = 16
    tol_root: float = 1e-8
    tol_factor: float = 1e-6
    tol_fd: float = 1e-3
    outputs: dict = field(default_factory=dict)
    scenario: str = None

    def __post_init__(self):
        for name in ("tol_root", "tol_factor", "tol_fd"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive", "cli.RunConfig")
        if self.lambda_samples < 1:
            raise DomainError("--lambda-samples must be >= 1", "cli.RunConfig")

    def zgrid(self, default):
        from .zeroflow import ZGrid
        nx, ny, x0, x1, y0, y1 = self.grid or default
        return ZGrid.box((x0, x1), (y0, y1), int(nx), int(ny))


def parse_grid(s):
    """'NX,NY,X0,X1,Y0,Y1' or 'NX,NY,R' (square [-R, R]^2)."""
    if s is None:
        return None
    try:
        p = [float(t) for t in s.split(",")]
    except ValueError:
        raise DomainError(f"bad --grid {s!r}", "cli.parse_grid")
    if len(p) == 3:
        p = [p[0], p[1], -p[2], p[2], -p[2], p[2]]
    if len(p) != 6 or p[0] != int(p[0]) or p[1] != int(p[1]):
        raise DomainError(f"bad --grid {s!r}; want NX,NY,X0,X1,Y0,Y1 or NX,NY,R", "cli.parse_grid")
    return tuple(p)


def _set_threads(n):
    if not n:
        return
    from ._backend import USE_NUMBA
    if USE_NUMBA:
        import numba
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))


def _load(path):
    from .fixtures import NAMES, fixture_path
    if path in NAMES:             # bundled fixture by name
        path = str(fixture_path(path))
    return aio.load_potential(path)


def _emit(obj):
    click.echo(json.dumps(obj, indent=2, default=_jsonable))


def _jsonable(o):
    if isinstance(o, complex) or isinstance(o, np.complexfloating):
        return aio.cx(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


class Ctx:
    def __init__(self, cfg):
        self.cfg = cfg


def _run(fn):
    """Map library errors to exit codes; messages already carry [module.operation]."""
    try:
        return fn()
    except ArtifactError as e:
        click.echo(f"error ({e.category}): {e}", err=True)
        sys.exit(EXIT.get(e.category, 2))
    except OSError as e:
        click.echo(f"error (io): [cli] {e}", err=True)
        sys.exit(3)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
        click.echo(f"error (numerical): [cli] {e}", err=True)
        sys.exit(2)


@click.group()
@click.option("--grid", default=None, help="NX,NY,X0,X1,Y0,Y1 or NX,NY,R")
@click.option("--lambda-samples", default=16, show_default=True, type=int)
@click.option("--tol", default=1e-8, show_default=True, type=float)
@click.option("--threads", default=0, type=int, help="numba thread count (kernels stay deterministic)")
@click.option("-v", "--verbose", count=True)
@click.pass_context
def main(ctx, grid, lambda_samples, tol, threads, verbose):
    """Killing fields and surfaces for CMC blowups."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(name)s: %(message)s")
    _set_threads(threads)
    ctx.obj = _run(lambda: Ctx(RunConfig(parse_grid(grid), lambda_samples, tol_root=tol)))


@main.command()
@click.argument("potential")
@click.pass_obj
def validate(obj, potential):
    """Check the invariants of a potential JSON (or a fixture name)."""
    def go():
        from .potential import validate as check
        rep = check(_load(potential))
        for ln in rep.lines():
            click.echo(ln)
        if not rep.ok:
            bad = ", ".join(f"{c.name} k={c.index}" for c in rep.failed())
            raise DomainError(f"invalid potential: {bad}", "potential.validate")
    _run(go)


@main.group()
def spectral():
    """Spectral data: extract from a potential or rebuild one."""


@spectral.command("extract")
@click.argument("potential")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
def spectral_extract(obj, potential, out):
    def go():
        from .spectral import spectral_data
        zeta = _load(potential)
        if zeta.kind != "cmc":
            raise DomainError("spectral extraction needs a CMC potential", "spectral.extract")
        sd = spectral_data(zeta)
        txt = aio.dumps(aio.spectral_to_dict(sd))
        aio.write_text(out, txt) if out else click.echo(txt, nl=False)
    _run(go)


@spectral.command("reconstruct")
@click.argument("spectral_json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
def spectral_reconstruct(obj, spectral_json, out):
    def go():
        from .spectral import reconstruct_potential, validate_spectral
        sd = aio.spectral_from_dict(aio.read_json(spectral_json))
        bad = [name for name, ok, _ in validate_spectral(sd, obj.cfg.tol_root) if not ok]
        if bad:
            raise DomainError("spectral data rejected: " + ", ".join(bad), "spectral.reconstruct")
        zeta = reconstruct_potential(sd)
        txt = aio.dumps(aio.potential_to_dict(zeta))
        aio.write_text(out, txt) if out else click.echo(txt, nl=False)
    _run(go)


@main.group()
def surface():
    """Sym-Bobenko surfaces exported as OBJ (and a diagnostics CSV)."""


def _write_patch(patch, out, diag):
    if out:
        aio.write_text(out, aio.obj_text(patch))
    if diag:
        aio.diag_csv(patch, diag)
    d = patch.diag
    s = (slice(2, -2),) * 2
    return {"nodes": int(patch.points.shape[0] * patch.points.shape[1]),
            "H_median": float(np.median(d.H[s])), "H_spread": float(np.ptp(d.H[s])),
            "Q_median": complex(np.median(d.Q[s].real), np.median(d.Q[s].imag)),
            "conformal_defect_max": float(np.max(d.defect[s]))}


@surface.command("cmc")
@click.argument("potential")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--diag", type=click.Path(dir_okay=False), default=None)
@click.option("--sym-point", default="1", help="unit complex number, e.g. 1 or -1j")
@click.pass_obj
def surface_cmc(obj, potential, out, diag, sym_point):
    def go():
        from .surface import sym_bobenko_cmc
        from .zeroflow import default_lambda_samples, integrate_companion_cmc, integrate_frame, integrate_pkf_cmc
        zeta = _load(potential)
        if zeta.kind != "cmc":
            raise DomainError("expected a CMC potential", "surface.cmc")
        try:
            lam_s = complex(sym_point.replace("i", "j"))
        except ValueError:
            raise DomainError(f"bad --sym-point {sym_point!r}", "surface.cmc")
        grid = obj.cfg.zgrid((41, 41, -0.5, 0.5, -0.5, 0.5))
        fld = integrate_pkf_cmc(zeta, grid)
        fr = integrate_frame(fld, default_lambda_samples("cmc", lam_s, obj.cfg.lambda_samples))
        fr = integrate_companion_cmc(fld, fr, lam_s)
        _emit(_write_patch(sym_bobenko_cmc(fr, lam_s, zeta.H), out, diag))
    _run(go)


@surface.command("minimal")
@click.argument("potential")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--diag", type=click.Path(dir_okay=False), default=None)
@click.option("--phi", default=-np.pi / 2, show_default=True, type=float, help="Sym angle")
@click.pass_obj
def surface_minimal(obj, potential, out, diag, phi):
    def go():
        from .surface import sym_bobenko_minimal
        from .zeroflow import integrate_companion_kdv, integrate_frame, integrate_pkf_kdv
        zeta = _load(potential)
        if zeta.kind != "kdv":
            raise DomainError("expected a KdV potential", "surface.minimal")
        grid = obj.cfg.zgrid((101, 101, -1.0, 1.0, -np.pi, np.pi))
        fld = integrate_pkf_kdv(zeta, grid)
        fr = integrate_frame(fld, [0j])
        fr = integrate_companion_kdv(fld, fr, phi)
        _emit(_write_patch(sym_bobenko_minimal(fr), out, diag))
    _run(go)


@main.command()
@click.argument("potential")
@click.option("--N", "N", default=256, show_default=True, type=int, help="circle samples")
@click.pass_obj
def symes(obj, potential, N):
    """Factorization frames and their distance to the ODE frames."""
    def go():
        from .factorize import circle, symes_cmc, symes_kdv
        from .zeroflow import integrate_frame, integrate_grid
        zeta = _load(potential)
        grid = obj.cfg.zgrid((11, 11, -0.35, 0.35, -0.35, 0.35))
        lams = circle(obj.cfg.lambda_samples)
        if zeta.kind == "cmc":
            sf = symes_cmc(zeta, grid, lams=lams, N=N)
        else:
            lams = np.concatenate([lams, [0j]])
            sf = symes_kdv(zeta, grid, lams=lams, N=N)
        fr = integrate_frame(integrate_grid(zeta, grid)[0], lams)
        err = float(np.max(np.abs(sf.F - fr.F)))
        res = {"kind": zeta.kind, "N": sf.N, "nodes": grid.nx * grid.ny, "lambda_samples": len(lams),
               "max_frame_difference": err, "tol": obj.cfg.tol_factor,
               "omega_difference": float(np.max(np.abs(sf.omega - fr.field.omega())))}
        _emit(res)
        if err > obj.cfg.tol_factor:
            from .errors import FactorizationError
            raise FactorizationError(f"factorization and ODE frames differ by {err:.3e}", "factorize.symes")
    _run(go)


@main.group()
def blowup():
    """Blowup sequences and their minimal-surface limits."""


def _blowup_report(rep, report, csv):
    if report:
        aio.write_text(report, rep.to_json())
    if csv:
        aio.write_text(csv, rep.to_csv())


def _summary(rep):
    last = rep.records[-1]
    return {"description": rep.description, "d_tilde": rep.d_tilde, "g_tilde": rep.g_tilde,
            "final_zeta_err": last["zeta_err"], "limit_H_max": rep.limit_H,
            "limit_coefficients": rep.limit.c}


@blowup.command("run")
@click.argument("config", required=False)
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@click.option("--csv", type=click.Path(dir_okay=False), default=None)
@click.option("--n-max", type=int, default=None)
@click.pass_obj
def blowup_run(obj, config, report, csv, n_max):
    """Run a scenario config (JSON with "scenario": genus1 | helicoid | colliding)."""
    def go():
        from .blowup import check_hypotheses, colliding_sequence, genus1_sequence, helicoid_scenario, run_blowup
        from .fixtures import NAMES, fixture_dict
        cfg = {"scenario": "genus1"}
        if config:
            cfg = fixture_dict(config) if config in NAMES else aio.read_json(config)
        name = cfg.get("scenario")
        make = {"genus1": genus1_sequence, "helicoid": helicoid_scenario, "colliding": colliding_sequence}
        if name not in make:
            raise DomainError(f"unknown scenario {name!r}", "blowup.run")
        spec = make[name]()
        n = n_max or cfg.get("n_max") or spec.n_max
        hyp = check_hypotheses(spec, n)
        click.echo(f"hypotheses: {hyp.verdicts}", err=True)
        grid = None
        if "grid" in cfg:
            g = cfg["grid"]
            grid = RunConfig(grid=(g["nx"], g["ny"], *g["x"], *g["y"])).zgrid(None)
        if obj.cfg.grid:
            grid = obj.cfg.zgrid(None)
        rep = run_blowup(spec, n, grid=grid)
        _blowup_report(rep, report, csv)
        _emit(_summary(rep))
    _run(go)


@blowup.command("helicoid")
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@click.option("--csv", type=click.Path(dir_okay=False), default=None)
@click.option("--n-max", type=int, default=None)
@click.pass_obj
def blowup_helicoid(obj, report, csv, n_max):
    """The helicoid endgame, plus the comparison with the helicoid."""
    def go():
        from .blowup import helicoid_check, helicoid_scenario, run_blowup
        spec = helicoid_scenario()
        rep = run_blowup(spec, n_max or spec.n_max)
        err, x, rms, norm = helicoid_check(rep)
        rep.extras["helicoid_check"] = {"coefficient_err": err, "x": x, "rms": rms, **norm}
        _blowup_report(rep, report, csv)
        out = _summary(rep)
        out.update(rep.extras["helicoid_check"])
        _emit(out)
    _run(go)


@main.group()
def check():
    """Property suites."""


@check.command("invariants")
@click.option("--grid-n", default=101, show_default=True, type=int)
@click.pass_obj
def check_invariants(obj, grid_n):
    """Reality, det F, two-path zero curvature, monodromy equivariance."""
    def go():
        from .errors import ConvergenceError
        from .invariants import run_invariants
        rep = run_invariants(grid_n, grid_n)
        for r in rep.rows:
            click.echo(r.line())
        click.echo(f"{sum(r.ok for r in rep.rows)}/{len(rep.rows)} passed in {rep.seconds:.1f} s")
        if not rep.ok:
            raise ConvergenceError("invariant suite failed", "invariants.check")
    _run(go)


if __name__ == "__main__":
    main()
