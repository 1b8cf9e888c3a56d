"""Versioned JSON run configuration.

Unknown keys are errors. `resolve` fills every default explicitly so the
echoed config fully determines a run.
"""
import copy
import json

from .spectra import OperatorKind

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


LATTICE = {"k": 2, "q": 1, "poly": False, "spacing": 2.0}
SPHERE = {"center": [0.0, 0.0, 0.0], "radius": 1.0}
MOTION = {"v": [0.0, 0.0, 0.0], "omega": [0.0, 0.0, 0.0]}
FORCE = {"F": [0.0, 0.0, 0.0], "T": [0.0, 0.0, 0.0]}

DEFAULTS = {
    "version": SCHEMA_VERSION,
    "seed": 0,
    "p": 8,
    "eta": 1.0,
    "near": "fft",
    "p_eval": "auto",
    "geometry": {"spheres": None, "lattice": None},
    "gmres": {"tol": 1e-10, "restart": 50, "maxiter": 200},
    "problem": {
        "kind": "mobility",
        "u_inf": [1.0, 0.0, 0.0],
        "forces": None,
        "motions": None,
        "H0": [0.0, 0.0, 1.0],
        "mu_particle": 2.0,
        "mu_fluid": 1.0,
        "B1": 1.0,
        "B2": 0.0,
        "orientations": None,
        "probes": [],
    },
    "transform": {"p_values": [1, 2, 4, 8, 16, 32]},
    "spectra": {"nmax": 16, "kinds": None},
    "convergence": {
        "mode": "synthetic",
        "kinds": ["StokesS", "StokesDplus"],
        "p_values": [4, 8, 16],
        "distances": [10.0 ** (-0.5 * k) for k in range(13)],
        "decay": 2.0,
        "pmax": 16,
        "targets": 64,
    },
    "bench": {
        "fft_p": [8, 16, 32, 64],
        "lattice_k": [2, 3],
        "q": [1, 4],
        "p": [4, 8],
        "kind": "StokesS",
        "reps": 5,
        "far": True,
        "poly": False,
    },
    "simulate": {"model": "squirmer", "dt": 0.1, "steps": 10, "integrator": "euler", "restart_from": None},
}

PROBLEMS = ("mobility", "resistance", "porous", "squirmer", "magneto")
MODELS = ("squirmer", "mhd")
INTEGRATORS = ("euler", "rk4")


def _merge(default, user, path):
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    out = copy.deepcopy(default)
    for key, val in user.items():
        where = f"{path}.{key}" if path else key
        if key not in default:
            raise ConfigError(f"unknown key {where!r}")
        if isinstance(default[key], dict):
            out[key] = _merge(default[key], val, where)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _vec3(x, where):
    if not (isinstance(x, (list, tuple)) and len(x) == 3 and all(isinstance(v, (int, float)) for v in x)):
        raise ConfigError(f"{where} must be a list of 3 numbers")
    return [float(v) for v in x]


def _int(x, where, lo=None):
    if isinstance(x, bool) or not isinstance(x, int) or (lo is not None and x < lo):
        raise ConfigError(f"{where} must be an integer" + (f" >= {lo}" if lo is not None else ""))
    return x


def _pos(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0:
        raise ConfigError(f"{where} must be a positive number")
    return float(x)


def _choice(x, options, where):
    if x not in options:
        raise ConfigError(f"{where} must be one of {', '.join(map(str, options))}")
    return x


def _kind(x, where):
    try:
        return OperatorKind.parse(x).value
    except ValueError:
        raise ConfigError(f"{where}: unknown operator kind {x!r}") from None


def _records(items, template, where):
    if not isinstance(items, list):
        raise ConfigError(f"{where} must be a list")
    return [_merge(template, it, f"{where}[{i}]") for i, it in enumerate(items)]


def _geometry(g):
    if g["spheres"] is not None and g["lattice"] is not None:
        raise ConfigError("geometry takes either spheres or lattice, not both")
    if g["lattice"] is not None:
        lat = _merge(LATTICE, g["lattice"], "geometry.lattice")
        _int(lat["k"], "geometry.lattice.k", 1)
        _int(lat["q"], "geometry.lattice.q", 1)
        _pos(lat["spacing"], "geometry.lattice.spacing")
        if not isinstance(lat["poly"], bool):
            raise ConfigError("geometry.lattice.poly must be true or false")
        return {"spheres": None, "lattice": lat}
    spheres = g["spheres"] if g["spheres"] is not None else [copy.deepcopy(SPHERE)]
    spheres = _records(spheres, SPHERE, "geometry.spheres")
    for i, s in enumerate(spheres):
        s["center"] = _vec3(s["center"], f"geometry.spheres[{i}].center")
        s["radius"] = _pos(s["radius"], f"geometry.spheres[{i}].radius")
    if not spheres:
        raise ConfigError("geometry.spheres is empty")
    return {"spheres": spheres, "lattice": None}


def body_count(cfg):
    g = cfg["geometry"]
    if g["lattice"] is None:
        return len(g["spheres"])
    lat = g["lattice"]
    k = lat["k"]
    n = k**3
    if lat["poly"] and k > 1:
        n += (k - 1) ** 3 + 3 * k * (k - 1) ** 2
    return n


def resolve(user):
    """Validate a user config (dict) and return the fully explicit version."""
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")
    version = user.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config version {version!r} (expected {SCHEMA_VERSION})")
    cfg = _merge(DEFAULTS, user, "")
    _int(cfg["seed"], "seed", 0)
    if cfg["seed"] >= 2**64:
        raise ConfigError("seed must fit in 64 bits")
    _int(cfg["p"], "p", 1)
    cfg["eta"] = _pos(cfg["eta"], "eta")
    _choice(cfg["near"], ("fft", "direct"), "near")
    if cfg["p_eval"] != "auto":
        _int(cfg["p_eval"], "p_eval", 1)
    cfg["geometry"] = _geometry(cfg["geometry"])
    gm = cfg["gmres"]
    gm["tol"] = _pos(gm["tol"], "gmres.tol")
    _int(gm["restart"], "gmres.restart", 1)
    _int(gm["maxiter"], "gmres.maxiter", 1)

    nb = body_count(cfg)
    pr = cfg["problem"]
    _choice(pr["kind"], PROBLEMS, "problem.kind")
    pr["u_inf"] = _vec3(pr["u_inf"], "problem.u_inf")
    pr["H0"] = _vec3(pr["H0"], "problem.H0")
    pr["mu_particle"] = _pos(pr["mu_particle"], "problem.mu_particle")
    pr["mu_fluid"] = _pos(pr["mu_fluid"], "problem.mu_fluid")
    for key in ("B1", "B2"):
        if not isinstance(pr[key], (int, float)) or isinstance(pr[key], bool):
            raise ConfigError(f"problem.{key} must be a number")
        pr[key] = float(pr[key])
    if pr["forces"] is None:
        pr["forces"] = [{"F": [1.0, 0.0, 0.0], "T": [0.0, 0.0, 0.0]} for _ in range(nb)]
    pr["forces"] = _records(pr["forces"], FORCE, "problem.forces")
    if pr["motions"] is None:
        pr["motions"] = [{"v": [1.0, 0.0, 0.0], "omega": [0.0, 0.0, 0.0]} for _ in range(nb)]
    pr["motions"] = _records(pr["motions"], MOTION, "problem.motions")
    if pr["orientations"] is None:
        pr["orientations"] = [[0.0, 0.0, 1.0] for _ in range(nb)]
    for name, items in (("forces", pr["forces"]), ("motions", pr["motions"]), ("orientations", pr["orientations"])):
        if len(items) != nb:
            raise ConfigError(f"problem.{name} needs one entry per body ({nb})")
    for i, f in enumerate(pr["forces"]):
        f["F"] = _vec3(f["F"], f"problem.forces[{i}].F")
        f["T"] = _vec3(f["T"], f"problem.forces[{i}].T")
    for i, m in enumerate(pr["motions"]):
        m["v"] = _vec3(m["v"], f"problem.motions[{i}].v")
        m["omega"] = _vec3(m["omega"], f"problem.motions[{i}].omega")
    for i, o in enumerate(pr["orientations"]):
        o = _vec3(o, f"problem.orientations[{i}]")
        nrm = sum(v * v for v in o) ** 0.5
        if nrm == 0:
            raise ConfigError(f"problem.orientations[{i}] is the zero vector")
        pr["orientations"][i] = [v / nrm for v in o]
    if not isinstance(pr["probes"], list):
        raise ConfigError("problem.probes must be a list")
    pr["probes"] = [_vec3(x, f"problem.probes[{i}]") for i, x in enumerate(pr["probes"])]

    tr = cfg["transform"]
    tr["p_values"] = [_int(p, "transform.p_values", 1) for p in tr["p_values"]]
    sp = cfg["spectra"]
    _int(sp["nmax"], "spectra.nmax", 0)
    sp["kinds"] = [k.value for k in OperatorKind] if sp["kinds"] is None else \
        [_kind(k, "spectra.kinds") for k in sp["kinds"]]

    cv = cfg["convergence"]
    _choice(cv["mode"], ("synthetic", "bie"), "convergence.mode")
    cv["kinds"] = [_kind(k, "convergence.kinds") for k in cv["kinds"]]
    cv["p_values"] = [_int(p, "convergence.p_values", 1) for p in cv["p_values"]]
    cv["distances"] = [_pos(d, "convergence.distances") for d in cv["distances"]]
    cv["decay"] = float(cv["decay"])
    _int(cv["pmax"], "convergence.pmax", 1)
    _int(cv["targets"], "convergence.targets", 1)

    bn = cfg["bench"]
    bn["fft_p"] = [_int(p, "bench.fft_p", 1) for p in bn["fft_p"]]
    bn["lattice_k"] = [_int(k, "bench.lattice_k", 1) for k in bn["lattice_k"]]
    bn["q"] = [_int(q, "bench.q", 1) for q in bn["q"]]
    bn["p"] = [_int(p, "bench.p", 1) for p in bn["p"]]
    bn["kind"] = _kind(bn["kind"], "bench.kind")
    _int(bn["reps"], "bench.reps", 1)
    for key in ("far", "poly"):
        if not isinstance(bn[key], bool):
            raise ConfigError(f"bench.{key} must be true or false")

    sm = cfg["simulate"]
    _choice(sm["model"], MODELS, "simulate.model")
    sm["dt"] = _pos(sm["dt"], "simulate.dt")
    _int(sm["steps"], "simulate.steps", 0)
    _choice(sm["integrator"], INTEGRATORS, "simulate.integrator")
    if sm["restart_from"] is not None and not isinstance(sm["restart_from"], str):
        raise ConfigError("simulate.restart_from must be a path or null")
    return cfg


def load(path):
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return resolve(user)


def build_suspension(cfg, p=None):
    from .evaluation import Sphere, Suspension, cubic_lattice

    p = cfg["p"] if p is None else p
    g = cfg["geometry"]
    if g["lattice"] is not None:
        lat = g["lattice"]
        return cubic_lattice(lat["k"], lat["q"], p, poly=lat["poly"], eta=cfg["eta"], spacing=lat["spacing"])
    return Suspension([Sphere(s["center"], s["radius"], p, i) for i, s in enumerate(g["spheres"])], cfg["eta"])
