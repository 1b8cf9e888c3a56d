"""Command-line front end.

Heavy numerical imports happen after argument parsing so that --threads can
cap the BLAS and FFT thread pools through the environment.
"""
import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

log = logging.getLogger("spherebie")

COMMANDS = ("transform", "spectra", "convergence", "solve", "bench", "simulate")
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS",
                "VECLIB_MAXIMUM_THREADS")


def build_parser():
    ap = argparse.ArgumentParser(prog="spherebie", description="Boundary integral tools for suspensions of spheres.")
    ap.add_argument("--verbose", "-v", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON run configuration")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--threads", type=int, default=None, help="cap on worker threads")
        sp.add_argument("--seed", type=int, default=None, help="64-bit seed, overrides the config")
    return ap


def write_csv(path, rows):
    path = Path(path)
    if not rows:
        path.write_text("")
        return path
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})
    return path


def _fmt(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return v


def write_gmres_log(path, reports):
    with Path(path).open("w") as fh:
        for name, rep in reports:
            fh.write(f"# {name}: converged={rep.converged} iterations={rep.iterations} "
                     f"info={rep.info} seconds={rep.seconds:.3f}\n")
            for i, r in enumerate(rep.residuals):
                fh.write(f"{name} {i} {r:.6e}\n")


# ---------------------------------------------------------------- commands

def cmd_transform(cfg, out):
    from .experiments import transform_table

    rows = transform_table(cfg["transform"]["p_values"], cfg["seed"])
    return {"transform.csv": rows}


def cmd_spectra(cfg, out):
    from .experiments import spectra_table

    return {"spectra.csv": spectra_table(cfg["spectra"]["nmax"], cfg["spectra"]["kinds"])}


def cmd_convergence(cfg, out):
    from . import experiments as ex

    cv = cfg["convergence"]
    if cv["mode"] == "synthetic":
        rows = ex.convergence_synthetic(cv["kinds"], cv["p_values"], cv["distances"], cv["decay"], cv["pmax"],
                                        cv["targets"], cfg["seed"])
    else:
        rows = ex.bie_three_spheres(cv["p_values"], cv["distances"], cv["targets"], cfg["seed"],
                                    tol=cfg["gmres"]["tol"])
    return {"convergence.csv": rows}


def _apply_kw(cfg):
    return {"near": cfg["near"], "p_eval": cfg["p_eval"]}


def _gmres_kw(cfg):
    g = cfg["gmres"]
    return {"tol": g["tol"], "restart": g["restart"], "maxiter": g["maxiter"]}


def _probe_rows(susp, kinds_dens, probes, extra=None):
    import numpy as np

    from .evaluation import evaluate

    if not probes:
        return []
    pts = np.array(probes, dtype=float)
    u = 0
    for kind, dens in kinds_dens:
        u = u + evaluate(kind, susp, dens, pts)
    if extra is not None:
        u = u + extra(pts)
    u = np.real(u)
    rows = []
    for i, x in enumerate(pts):
        r = {"probe": i, "x": x[0], "y": x[1], "z": x[2]}
        if u.ndim == 1:
            r["value"] = float(u[i])
        else:
            r.update({"ux": float(u[0, i]), "uy": float(u[1, i]), "uz": float(u[2, i])})
        rows.append(r)
    return rows


def _motion_rows(susp, motions, forces=None):
    rows = []
    for i, (s, m) in enumerate(zip(susp.spheres, motions)):
        r = {"body": s.id, "vx": m.v[0], "vy": m.v[1], "vz": m.v[2],
             "wx": m.omega[0], "wy": m.omega[1], "wz": m.omega[2]}
        if forces is not None:
            f = forces[i]
            r.update({"Fx": f.F[0], "Fy": f.F[1], "Fz": f.F[2], "Tx": f.T[0], "Ty": f.T[1], "Tz": f.T[2]})
        rows.append({k: float(v) if k != "body" else v for k, v in r.items()})
    return rows


def cmd_solve(cfg, out):
    import numpy as np

    from . import applications as app
    from . import solver
    from .config import build_suspension
    from .evaluation import kernels

    susp = build_suspension(cfg)
    pr = cfg["problem"]
    kw = _apply_kw(cfg)
    gk = _gmres_kw(cfg)
    kind = pr["kind"]
    tables = {}
    if kind == "mobility":
        forces = [solver.BodyForce(f["F"], f["T"]) for f in pr["forces"]]
        res = solver.solve_mobility(susp, forces, **gk, **kw)
        tables["motions.csv"] = _motion_rows(susp, res.motions, forces)
        dens = [a + b for a, b in zip(res.mu, res.rho)]
        tables["probes.csv"] = _probe_rows(susp, [("StokesS", dens)], pr["probes"])
    elif kind == "resistance":
        motions = [solver.RigidMotion(m["v"], m["omega"]) for m in pr["motions"]]
        res = solver.solve_resistance(susp, motions, **gk, **kw)
        tables["motions.csv"] = _motion_rows(susp, motions, res.forces)

        def completion(x):
            u = 0
            for s, b in zip(susp.spheres, res.psi):
                F, T = solver._complex_moments(s, b)
                u = u + kernels.kernel_stokeslet(x, s.c) @ F + kernels.rotlet(x, s.c, T)
            return np.moveaxis(u, -1, 0)

        tables["probes.csv"] = _probe_rows(susp, [("StokesDplus", res.psi)], pr["probes"], completion)
    elif kind == "porous":
        u_inf = np.array(pr["u_inf"])
        res = solver.solve_porous(susp, u_inf, **gk, **kw)
        tables["probes.csv"] = _probe_rows(susp, [("StokesS", res.mu), ("StokesDplus", res.mu)], pr["probes"],
                                           lambda x: np.broadcast_to(u_inf[:, None], (3, len(x))))
    elif kind == "squirmer":
        slips = [app.squirmer_slip(s, o, pr["B1"], pr["B2"]) for s, o in zip(susp.spheres, pr["orientations"])]
        res = solver.solve_squirmer(susp, slips, **gk, **kw)
        tables["motions.csv"] = _motion_rows(susp, res.motions)
        tables["probes.csv"] = _probe_rows(susp, [("StokesS", res.mu), ("StokesDplus", res.mu)], pr["probes"])
    else:
        params = app.MagneticParams(tuple(pr["H0"]), pr["mu_particle"], pr["mu_fluid"])
        res = app.magneto_solve(susp, params, tol=gk["tol"], **kw)
        forces = app.magnetic_forces(res)
        m = res.dipole_moments()
        tables["magnetic.csv"] = [
            {"body": s.id, "mx": float(d[0]), "my": float(d[1]), "mz": float(d[2]),
             "Fx": float(f.F[0]), "Fy": float(f.F[1]), "Fz": float(f.F[2]),
             "Tx": float(f.T[0]), "Ty": float(f.T[1]), "Tz": float(f.T[2])}
            for s, d, f in zip(susp.spheres, m, forces)]
        if pr["probes"]:
            phi = res.potential(np.array(pr["probes"]))
            tables["probes.csv"] = [{"probe": i, "x": x[0], "y": x[1], "z": x[2], "value": float(v)}
                                    for i, (x, v) in enumerate(zip(pr["probes"], phi))]
    write_gmres_log(out / "gmres.log", [(kind, res.report)])
    if not res.report.converged:
        log.warning("GMRES did not converge: residual %.3e", res.report.final_residual)
    return tables


def cmd_bench(cfg, out):
    from . import experiments as ex

    bn = cfg["bench"]
    near = ex.bench_near(bn["fft_p"], bn["kind"], reps=bn["reps"], seed=cfg["seed"])
    lat = ex.bench_lattice(bn["lattice_k"], bn["q"], bn["p"], bn["kind"], reps=bn["reps"], far=bn["far"],
                           seed=cfg["seed"], poly=bn["poly"])
    fits = []
    for q in bn["q"]:
        for p in bn["p"]:
            sel = [r for r in lat if r["q"] == q and r["p"] == p]
            if len(sel) >= 2:
                fits.append({"q": q, "p": p, "exponent_near_self": ex.fit_exponent(
                    [r["n_b"] for r in sel], [r["near_self_seconds"] for r in sel])})
    return {"bench_near.csv": near, "bench_lattice.csv": lat, "bench_fit.csv": fits}


def cmd_simulate(cfg, out):
    import numpy as np

    from . import applications as app
    from .config import build_suspension
    from .evaluation import GeometryError

    susp = build_suspension(cfg)
    pr = cfg["problem"]
    sm = cfg["simulate"]
    kw = {**_apply_kw(cfg), **_gmres_kw(cfg)}
    if sm["restart_from"]:
        state = app.SimState.from_dict(json.loads(Path(sm["restart_from"]).read_text()))
        susp = susp.moved(state.centers)
    else:
        state = app.initial_state(susp, np.array(pr["orientations"]))
    if sm["model"] == "squirmer":
        params = app.SquirmerParams(pr["B1"], pr["B2"])

        def step(st):
            return app.squirmer_step(st, susp, params, sm["dt"], sm["integrator"], **kw)
    else:
        params = app.MagneticParams(tuple(pr["H0"]), pr["mu_particle"], pr["mu_fluid"])

        def step(st):
            return app.mhd_step(st, susp, params, sm["dt"], sm["integrator"], **kw)

    rows = []
    status = "completed"
    for _ in range(sm["steps"]):
        try:
            new = step(state)
        except GeometryError as e:
            status = f"halted at step {state.step}: {e}"
            log.error(status)
            break
        rows += _trajectory_rows(new)
        state = new
    (out / "restart.json").write_text(json.dumps(state.to_dict(), indent=2))
    (out / "status.txt").write_text(status + "\n")
    return {"trajectory.csv": rows}


def _trajectory_rows(state):
    rows = []
    for i, (x, e) in enumerate(zip(state.centers, state.orientations)):
        m = state.motions[i]
        rows.append({"step": state.step, "time": state.time, "body": i,
                     "x": x[0], "y": x[1], "z": x[2], "ex": e[0], "ey": e[1], "ez": e[2],
                     "vx": m.v[0], "vy": m.v[1], "vz": m.v[2], "wx": m.omega[0], "wy": m.omega[1], "wz": m.omega[2]})
    return [{k: (float(v) if k not in ("step", "body") else v) for k, v in r.items()} for r in rows]


HANDLERS = {"transform": cmd_transform, "spectra": cmd_spectra, "convergence": cmd_convergence,
            "solve": cmd_solve, "bench": cmd_bench, "simulate": cmd_simulate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from .config import ConfigError, load, resolve

    try:
        cfg = load(args.config) if args.config else resolve({})
        if args.seed is not None:
            cfg = resolve({**cfg, "seed": args.seed})
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
    try:
        tables = HANDLERS[args.command](cfg, out)
    except Exception as e:  # surfaced to the user with a non-zero exit
        log.debug("failure", exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    for name, rows in tables.items():
        write_csv(out / name, rows)
        print(out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
