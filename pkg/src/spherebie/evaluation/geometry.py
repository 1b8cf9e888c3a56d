"""Spheres, suspensions, target batches and the well-separation test."""
import itertools
from dataclasses import dataclass, field

import numpy as np

from ..harmonics import get_grid


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float
    p: int
    id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise GeometryError("radius must be positive")

    @property
    def c(self):
        return np.array(self.center)

    @property
    def grid(self):
        return get_grid(self.p)

    @property
    def diameter(self):
        return 2 * self.radius

    def normals(self):
        """Outward unit normals at grid nodes, (nlat, nlon, 3)."""
        return self.grid.unit_points()

    def points(self):
        return self.c + self.radius * self.grid.unit_points()

    def weights(self):
        """Physical quadrature weights at grid nodes, (nlat, nlon)."""
        return self.grid.area_weights() * self.radius**2

    def local(self, x):
        """Source-centered coordinates scaled by the radius."""
        return (np.asarray(x, dtype=float) - self.c) / self.radius


@dataclass
class TargetBatch:
    points: np.ndarray
    normals: np.ndarray = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.normals is not None:
            self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
            if self.normals.shape != self.points.shape:
                raise ValueError("normals must match points")
            if np.any(np.abs(np.linalg.norm(self.normals, axis=1) - 1) > 1e-12):
                raise ValueError("normals must have unit length")

    def __len__(self):
        return len(self.points)

    @property
    def diameter(self):
        if len(self.points) < 2:
            return 0.0
        ctr = self.points.mean(axis=0)
        return 2 * np.linalg.norm(self.points - ctr, axis=1).max()


def surface_distance(a, b):
    """Gap between two spheres, or from sphere a to the nearest point of a batch."""
    if isinstance(b, Sphere):
        return np.linalg.norm(a.c - b.c) - a.radius - b.radius
    d = np.abs(np.linalg.norm(b.points - a.c, axis=1) - a.radius)
    return d.min()


def well_separated(a, b, eta=1.0):
    """Separation test: surface distance >= eta * max diameter; ties count as separated."""
    return bool(surface_distance(a, b) >= eta * max(a.diameter, b.diameter))


@dataclass
class Suspension:
    spheres: list
    eta: float = 1.0
    _near: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.eta <= 0:
            raise GeometryError("eta must be positive")
        ps = {s.p for s in self.spheres}
        if len(ps) > 1:
            raise GeometryError("all spheres must share one order p")
        ids = [s.id for s in self.spheres]
        if len(set(ids)) != len(ids):
            raise GeometryError("sphere ids must be unique")
        self.spheres = sorted(self.spheres, key=lambda s: s.id)
        self.check_overlap()

    @property
    def p(self):
        return self.spheres[0].p

    def __len__(self):
        return len(self.spheres)

    def centers(self):
        return np.array([s.center for s in self.spheres])

    def radii(self):
        return np.array([s.radius for s in self.spheres])

    def gaps(self):
        """Matrix of pairwise surface gaps (diagonal inf)."""
        c = self.centers()
        r = self.radii()
        d = np.linalg.norm(c[:, None] - c[None], axis=-1) - r[:, None] - r[None]
        np.fill_diagonal(d, np.inf)
        return d

    def min_gap(self):
        return float(self.gaps().min()) if len(self) > 1 else np.inf

    def check_overlap(self):
        if len(self) > 1 and self.min_gap() <= 0:
            i, j = np.unravel_index(np.argmin(self.gaps()), (len(self),) * 2)
            raise GeometryError(f"spheres {self.spheres[i].id} and {self.spheres[j].id} overlap")

    def near_pairs(self):
        """For each target index, the ascending list of source indices that are not well separated."""
        if self._near is None:
            gaps = self.gaps()
            diam = 2 * self.radii()
            thresh = self.eta * np.maximum(diam[:, None], diam[None])
            near = gaps < thresh
            np.fill_diagonal(near, False)
            self._near = {t: list(np.flatnonzero(near[t])) for t in range(len(self))}
        return self._near

    def moved(self, centers):
        """Copy with new centers (same radii, ids, order); validates overlap."""
        sph = [Sphere(c, s.radius, s.p, s.id) for s, c in zip(self.spheres, centers)]
        return Suspension(sph, self.eta)


def cubic_lattice(k, q, p, poly=False, eta=1.0, spacing=2.0):
    """k x k x k vertex lattice of spheres with radius (1 - 2^-q), unit cells of side `spacing`.

    With poly=True each cell also gets face spheres (radius r_v (2 - sqrt 2)) and a
    center sphere (radius r_v (sqrt 2 - 1)). Overlapping layouts raise GeometryError.
    """
    rv = 1 - 2.0**-q
    pts = [(np.array(v, dtype=float) * spacing, rv) for v in itertools.product(range(k), repeat=3)]
    if poly and k > 1:
        rf = rv * (2 - np.sqrt(2))
        rc = rv * (np.sqrt(2) - 1)
        faces = set()
        for cell in itertools.product(range(k - 1), repeat=3):
            cell = np.array(cell, dtype=float)
            pts.append(((cell + 0.5) * spacing, rc))
            for ax in range(3):
                for side in (0, 1):
                    f = cell + 0.5
                    f[ax] = cell[ax] + side
                    faces.add(tuple(f))
        pts += [(np.array(f) * spacing, rf) for f in sorted(faces)]
    spheres = [Sphere(c, r, p, i) for i, (c, r) in enumerate(pts)]
    return Suspension(spheres, eta)
