"""Composite apply over a suspension: self, near and far interactions.

Per target sphere, coefficients from the self term and every near neighbor are
summed in ascending source order and inverse-transformed once; far sources are
added as point values from the far backend.
"""
import time
from collections import defaultdict

import numpy as np

from ..harmonics import (VectorCoeffs, cartesian_to_spherical, ncoeffs, sht_forward, sht_inverse,
                         vsht_forward, vsht_inverse)
from ..spectra import OperatorKind
from .geometry import GeometryError, Suspension, TargetBatch
from .near import auto_p_eval, near_eval_direct, near_eval_fft_batch, self_eval
from .quadrature import density_samples, far_backend_direct, point_sources


class ApplyStats(dict):
    """Wall-clock seconds per phase ('self', 'near', 'far', 'transform') and pair counts."""

    def add(self, key, dt):
        self[key] = self.get(key, 0.0) + dt


def _stack(dens_list):
    if isinstance(dens_list[0], VectorCoeffs):
        return VectorCoeffs(*(np.stack([getattr(d, k) for d in dens_list]) for k in "vwx"))
    return np.stack(dens_list)


def _pick(batch, i):
    if isinstance(batch, VectorCoeffs):
        return VectorCoeffs(batch.v[i], batch.w[i], batch.x[i])
    return batch[i]


def _geometry_key(src, tgt):
    off = np.round(tgt.c - src.c, 12) + 0.0
    return (src.radius, tgt.radius, tuple(off))


def _node_values(kind, u, sphere):
    """Cartesian (3, nodes) or scalar (nodes,) values -> grid-shaped target-frame values."""
    g = sphere.grid
    if not kind.is_stokes:
        return u.reshape(g.shape)
    th, ph = g.angles()
    return cartesian_to_spherical(u.reshape((3,) + g.shape), th, ph)


def _pair_p_eval(p, key, p_eval):
    src_r, tgt_r, off = key
    if p_eval == "auto":
        return auto_p_eval(p, tgt_r / src_r, float(np.linalg.norm(off)) / src_r)
    return p if p_eval is None else int(p_eval)


class _Buffer:
    """Per-target coefficient accumulator of fixed degree."""

    def __init__(self, deg, vector):
        k = ncoeffs(deg)
        self.deg = deg
        self.parts = [np.zeros(k, dtype=complex) for _ in range(3 if vector else 1)]

    def add(self, c):
        arrs = (c.v, c.w, c.x) if isinstance(c, VectorCoeffs) else (c,)
        for buf, a in zip(self.parts, arrs):
            buf[:a.shape[-1]] += a

    def coeffs(self):
        return VectorCoeffs(*self.parts) if len(self.parts) == 3 else self.parts[0]


def composite_apply(kind, suspension, densities, far_backend=far_backend_direct, near="fft",
                    p_eval="auto", out="values", stats=None, chunk=32):
    """Apply a boundary operator of the whole suspension on every sphere surface.

    kind: on-surface operator kind (its side is used for the self term; neighbor
    contributions are always exterior fields). densities: one coefficient set per
    sphere in suspension order. far_backend=None drops well-separated pairs.
    near: 'fft' or 'direct'. p_eval: target order of the FFT path ('auto' resolves
    the neighbor field to roundoff at the grid nodes). out: 'values' (grid
    samples, spherical components for Stokes) or 'coeffs' (degree-p projection).
    """
    kind = OperatorKind.parse(kind)
    if not isinstance(suspension, Suspension):
        raise TypeError("expected a Suspension")
    sp = suspension.spheres
    nb = len(sp)
    p = suspension.p
    if len(densities) != nb:
        raise ValueError("one density per sphere is required")
    if near not in ("fft", "direct"):
        raise ValueError(f"unknown near method {near!r}")
    stats = ApplyStats() if stats is None else stats
    nearmap = suspension.near_pairs()
    stats["near_pairs"] = sum(len(v) for v in nearmap.values())
    vector = kind.is_stokes

    # self and FFT-near terms are summed as coefficients in ascending source order:
    # round r adds the r-th source of every target, batching equal geometries
    order = {t: sorted(list(nearmap[t]) + [t]) if near == "fft" else [t] for t in range(nb)}
    keys = {(t, s): _geometry_key(sp[s], sp[t]) for t in range(nb) for s in order[t] if s != t}
    pe = {k: _pair_p_eval(p, k, p_eval) for k in set(keys.values())}
    bufs = [_Buffer(max([p] + [pe[keys[(t, s)]] for s in order[t] if s != t]), vector)
            for t in range(nb)]
    for r in range(max(len(v) for v in order.values())):
        groups = defaultdict(list)
        for t in range(nb):
            if r >= len(order[t]):
                continue
            s = order[t][r]
            if s == t:
                t0 = time.perf_counter()
                bufs[t].add(self_eval(kind, densities[t], sp[t]))
                stats.add("self", time.perf_counter() - t0)
            else:
                groups[keys[(t, s)]].append((t, s))
        t0 = time.perf_counter()
        for key in sorted(groups):
            pairs = groups[key]
            src_r, tgt_r, off = key
            for lo in range(0, len(pairs), chunk):
                sub = pairs[lo:lo + chunk]
                batch = _stack([densities[s] for _, s in sub])
                res = near_eval_fft_batch(kind, batch, src_r, tgt_r, np.array(off), p_eval=pe[key])
                for k, (t, _) in enumerate(sub):
                    bufs[t].add(_pick(res, k))
        stats.add("near", time.perf_counter() - t0)

    node_vals = [None] * nb
    if near == "direct":
        t0 = time.perf_counter()
        for t, srcs in nearmap.items():
            tgt = sp[t]
            batch = TargetBatch(tgt.points().reshape(-1, 3),
                                tgt.normals().reshape(-1, 3) if kind.family == "K" else None)
            for s in srcs:
                u = near_eval_direct(kind, densities[s], sp[s], batch)
                node_vals[t] = u if node_vals[t] is None else node_vals[t] + u
        stats.add("near", time.perf_counter() - t0)

    t0 = time.perf_counter()
    if far_backend is not None and nb > 1:
        for s, src in enumerate(sp):
            far_t = [t for t in range(nb) if t != s and s not in nearmap[t]]
            if not far_t:
                continue
            pts, w, vals, nrm = point_sources(src, density_samples(densities[s], src))
            tp = np.concatenate([sp[t].points().reshape(-1, 3) for t in far_t])
            tn = (np.concatenate([sp[t].normals().reshape(-1, 3) for t in far_t])
                  if kind.family == "K" else None)
            res = far_backend(kind, pts, w, vals, nrm, tp, tn)
            lo = 0
            for t in far_t:
                k = sp[t].grid.nlat * sp[t].grid.nlon
                u = res[..., lo:lo + k]
                lo += k
                node_vals[t] = u if node_vals[t] is None else node_vals[t] + u
    stats.add("far", time.perf_counter() - t0)

    t0 = time.perf_counter()
    result = []
    for t, tgt in enumerate(sp):
        g = tgt.grid
        acc = bufs[t].coeffs()
        vals = vsht_inverse(acc, g) if vector else sht_inverse(acc, g)
        if node_vals[t] is not None:
            vals = vals + _node_values(kind, node_vals[t], tgt)
        if out == "coeffs":
            vals = vsht_forward(vals, g) if vector else sht_forward(vals, g)
        result.append(vals)
    stats.add("transform", time.perf_counter() - t0)
    return result


def evaluate(kind, suspension, densities, targets, far_backend=far_backend_direct, pressure=False):
    """Off-surface field of all layer potentials at arbitrary fluid points.

    Per source sphere, targets farther than eta * diameter from its surface use
    smooth quadrature and the rest use the exact near formulas. Returns (nt,)
    for Laplace and Cartesian (3, nt) for Stokes [plus pressure (nt,)].
    """
    kind = OperatorKind.parse(kind)
    if not isinstance(targets, TargetBatch):
        targets = TargetBatch(targets)
    if kind.family == "K" and targets.normals is None:
        raise ValueError(f"{kind.value} needs target normals")
    want_p = pressure and kind.is_stokes and kind.family != "K"
    nt = len(targets)
    u = np.zeros((3, nt) if kind.is_stokes else (nt,), dtype=complex)
    pr = np.zeros(nt, dtype=complex) if want_p else None
    for s, src in enumerate(suspension.spheres):
        d = np.linalg.norm(targets.points - src.c, axis=1) - src.radius
        if np.any(d <= 0):
            raise GeometryError(f"target on or inside sphere {src.id}")
        far = d >= suspension.eta * src.diameter
        for mask, mode in ((far, "far"), (~far, "near")):
            if not np.any(mask):
                continue
            sub = TargetBatch(targets.points[mask],
                              None if targets.normals is None else targets.normals[mask])
            if mode == "far":
                pts, w, vals, nrm = point_sources(src, density_samples(densities[s], src))
                r = far_backend(kind, pts, w, vals, nrm, sub.points, sub.normals, want_p)
            else:
                r = near_eval_direct(kind, densities[s], src, sub, pressure=want_p)
            if want_p:
                u[..., mask] += r[0]
                pr[mask] += r[1]
            else:
                u[..., mask] += r
    return (u, pr) if want_p else u
