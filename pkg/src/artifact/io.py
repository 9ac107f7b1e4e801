"""JSON / OBJ / CSV readers and writers. Complex numbers are [re, im] pairs."""
import csv
import json

import numpy as np

from .errors import ArtifactError, DomainError
from .loopalg import ScalarLaurent
from .potential import CmcPotential, KdvPotential
from .spectral import SpectralData


class IOFailure(ArtifactError):
    category = "io"


def cx(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def uncx(p):
    return complex(p[0], p[1])


def potential_to_dict(zeta):
    d = {"kind": zeta.kind, "g": zeta.g if zeta.kind == "cmc" else zeta.d}
    if zeta.kind == "cmc":
        d["H"] = zeta.H
    d["coeff"] = [{"k": int(k), "m": [cx(x) for x in zeta.coeff(k).ravel()]}
                  for k in range(zeta.lo, zeta.hi + 1)]
    return d


def potential_from_dict(d):
    try:
        kind = d["kind"]
        g = int(d["g"])
        lo, hi = (-1, g) if kind == "cmc" else (-g, 1)
        c = np.zeros((hi - lo + 1, 2, 2), complex)
        for e in d["coeff"]:
            k = int(e["k"])
            if not lo <= k <= hi:
                raise DomainError(f"coefficient index {k} outside {lo}..{hi}", "io.potential_from_dict")
            c[k - lo] = np.array([uncx(p) for p in e["m"]]).reshape(2, 2)
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise DomainError(f"malformed potential JSON: {e}", "io.potential_from_dict")
    if kind == "cmc":
        return CmcPotential(g, float(d["H"]), c)
    if kind == "kdv":
        return KdvPotential(g, c)
    raise DomainError(f"unknown kind {kind!r}", "io.potential_from_dict")


def spectral_to_dict(sd):
    return {"g": sd.g, "H": sd.H, "Q": cx(sd.Q), "a": [cx(x) for x in sd.a.dense(0, 2 * sd.g)],
            "branch": [cx(x) for x in sd.branch],
            "divisor": [{"beta": cx(b), "nu": cx(n)} for b, n in sd.divisor]}


def spectral_from_dict(d):
    try:
        a = ScalarLaurent(0, [uncx(p) for p in d["a"]], trim=False)
        return SpectralData(int(d["g"]), float(d["H"]), uncx(d["Q"]), a,
                            np.array([uncx(p) for p in d["branch"]], complex),
                            np.array([uncx(e["beta"]) for e in d["divisor"]], complex),
                            np.array([uncx(e["nu"]) for e in d["divisor"]], complex))
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise DomainError(f"malformed spectral JSON: {e}", "io.spectral_from_dict")


def dumps(d):
    return json.dumps(d, indent=2, sort_keys=False) + "\n"


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise IOFailure(str(e), "io.read_json")
    except json.JSONDecodeError as e:
        raise DomainError(f"not valid JSON: {e}", "io.read_json")


def write_text(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as e:
        raise IOFailure(str(e), "io.write_text")


def load_potential(path):
    return potential_from_dict(read_json(path))


def save_potential(path, zeta):
    write_text(path, dumps(potential_to_dict(zeta)))


def obj_text(patch):
    nx, ny = patch.points.shape[:2]
    lines = ["# artifact surface patch"]
    for p in patch.points.reshape(-1, 3):
        lines.append("v %.12g %.12g %.12g" % tuple(p))
    for n in patch.normals.reshape(-1, 3):
        lines.append("vn %.12g %.12g %.12g" % tuple(n))
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j + 1
            q = (a, a + ny, a + ny + 1, a + 1)
            lines.append("f " + " ".join(f"{v}//{v}" for v in q))
    return "\n".join(lines) + "\n"


def read_obj_vertices(path):
    try:
        with open(path) as fh:
            return np.array([[float(t) for t in ln.split()[1:4]] for ln in fh if ln.startswith("v ")])
    except OSError as e:
        raise IOFailure(str(e), "io.read_obj_vertices")


DIAG_COLUMNS = ("x", "y", "f1", "f2", "f3", "omega", "H_meas", "ReQ_meas", "ImQ_meas", "defect")


def diag_csv(patch, path):
    d = patch.diag
    X, Y = np.meshgrid(patch.grid.x(), patch.grid.y(), indexing="ij")
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(DIAG_COLUMNS)
            om = patch.omega if patch.omega is not None else d.omega
            for idx in np.ndindex(X.shape):
                f = patch.points[idx]
                w.writerow([repr(float(X[idx])), repr(float(Y[idx])), repr(float(f[0])), repr(float(f[1])),
                            repr(float(f[2])), repr(float(om[idx])), repr(float(d.H[idx])),
                            repr(float(d.Q[idx].real)), repr(float(d.Q[idx].imag)), repr(float(d.defect[idx]))])
    except OSError as e:
        raise IOFailure(str(e), "io.diag_csv")
