"""Plane domains, boundary distance, and masked sampling grids.

Points are complex numbers z = x + iy.  Every geometric query accepts a
scalar or an ndarray of points and is evaluated with numpy throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DomainError, ResolutionError

__all__ = [
    "PlaneDomain",
    "FullPlane",
    "PuncturedPlane",
    "Disk",
    "HalfPlane",
    "Annulus",
    "Strip",
    "PolygonWithHoles",
    "Punctured",
    "Grid",
    "as_complex",
    "boundary_distance",
    "contains",
    "build_grid",
]


def as_complex(p) -> complex:
    """Coerce a point given as complex, real, or an (x, y) pair."""
    if isinstance(p, complex):
        return p
    if isinstance(p, (int, float, np.floating, np.integer)):
        return complex(p)
    if isinstance(p, np.complexfloating):
        return complex(p)
    x, y = p
    return complex(float(x), float(y))


def _seg_distance(z, a, b):
    """Distance from points z (array) to segments a[k]->b[k]; returns (n, k)."""
    z = np.asarray(z, dtype=complex).reshape(-1, 1)
    a = np.asarray(a, dtype=complex).reshape(1, -1)
    b = np.asarray(b, dtype=complex).reshape(1, -1)
    e = b - a
    ee = (e.real**2 + e.imag**2)
    ee = np.where(ee == 0.0, 1.0, ee)
    w = z - a
    t = (w.real * e.real + w.imag * e.imag) / ee
    t = np.clip(t, 0.0, 1.0)
    return np.abs(w - t * e)


def _even_odd_inside(z, rings):
    """Even-odd ray crossing over a list of closed vertex rings."""
    z = np.asarray(z, dtype=complex)
    zf = z.reshape(-1)
    x = zf.real[:, None]
    y = zf.imag[:, None]
    inside = np.zeros(zf.shape, dtype=bool)
    for ring in rings:
        v = np.asarray(ring, dtype=complex)
        x1, y1 = v.real[None, :], v.imag[None, :]
        v2 = np.roll(v, -1)
        x2, y2 = v2.real[None, :], v2.imag[None, :]
        straddle = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        hit = straddle & (x < xc)
        inside ^= (np.count_nonzero(hit, axis=1) % 2).astype(bool)
    return inside.reshape(z.shape) if z.shape else bool(inside[0])


class PlaneDomain:
    """A plane domain with boundary-distance and membership queries."""

    def boundary_distance(self, p):
        """Euclidean distance from p to the boundary (defined on all of C)."""
        d = self._delta(np.asarray(p, dtype=complex))
        if np.ndim(p) == 0:
            return float(d)
        return d

    def contains(self, p):
        c = self._contains(np.asarray(p, dtype=complex))
        if np.ndim(p) == 0:
            return bool(c)
        return c

    # subclasses implement the array versions
    def _delta(self, z):
        raise NotImplementedError

    def _contains(self, z):
        raise NotImplementedError

    def _delta_or_inf(self, z):
        """Like _delta but +inf for empty boundaries (grid construction)."""
        return self._delta(z)

    def bounding_box(self):
        """(xmin, ymin, xmax, ymax), or None for unbounded domains."""
        return None

    def reference_point(self) -> complex:
        """A canonical interior point, used as the default grid anchor."""
        raise NotImplementedError

    def hole_anchors(self):
        """One representative point inside each designated hole/puncture."""
        return []

    def boundary_rings(self):
        """Closed boundary outlines as vertex arrays (for SVG overlays)."""
        return []


def _circle(c, r, n=256):
    th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return c + r * np.exp(1j * th)


@dataclass(frozen=True)
class FullPlane(PlaneDomain):
    """The whole plane; empty boundary, so delta is undefined."""

    def _delta(self, z):
        raise DomainError("unbounded: delta undefined (empty boundary)")

    def _delta_or_inf(self, z):
        return np.full(np.shape(z), np.inf)

    def _contains(self, z):
        return np.ones(np.shape(z), dtype=bool)

    def reference_point(self):
        return 0j


@dataclass(frozen=True)
class PuncturedPlane(PlaneDomain):
    """C minus one puncture; delta(z) = |z - puncture|."""

    puncture: complex = 0j

    def _delta(self, z):
        return np.abs(z - self.puncture)

    def _contains(self, z):
        return np.abs(z - self.puncture) > 0.0

    def reference_point(self):
        return self.puncture + 1.0

    def hole_anchors(self):
        return [self.puncture]


@dataclass(frozen=True)
class Disk(PlaneDomain):
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("disk radius must be positive")

    def _delta(self, z):
        return np.abs(self.radius - np.abs(z - self.center))

    def _contains(self, z):
        return np.abs(z - self.center) < self.radius

    def bounding_box(self):
        c, r = self.center, self.radius
        return (c.real - r, c.imag - r, c.real + r, c.imag + r)

    def reference_point(self):
        return self.center

    def boundary_rings(self):
        return [_circle(self.center, self.radius)]


@dataclass(frozen=True)
class HalfPlane(PlaneDomain):
    """Points with <z, normal> > offset; the normal points inward."""

    normal: complex = 1j
    offset: float = 0.0

    def __post_init__(self):
        n = abs(self.normal)
        if n == 0:
            raise DomainError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", self.normal / n)

    def _dot(self, z):
        return z.real * self.normal.real + z.imag * self.normal.imag

    def _delta(self, z):
        return np.abs(self._dot(z) - self.offset)

    def _contains(self, z):
        return self._dot(z) > self.offset

    def reference_point(self):
        return (self.offset + 1.0) * self.normal


@dataclass(frozen=True)
class Strip(PlaneDomain):
    """Vertical strip x_lo < Re z < x_hi (hosts the annulus cover)."""

    x_lo: float
    x_hi: float

    def __post_init__(self):
        if not self.x_lo < self.x_hi:
            raise DomainError("strip needs x_lo < x_hi")

    def _delta(self, z):
        x = np.asarray(z).real
        inside = np.minimum(x - self.x_lo, self.x_hi - x)
        return np.abs(inside)

    def _contains(self, z):
        x = np.asarray(z).real
        return (x > self.x_lo) & (x < self.x_hi)

    def reference_point(self):
        return complex(0.5 * (self.x_lo + self.x_hi), 0.0)


@dataclass(frozen=True)
class Annulus(PlaneDomain):
    center: complex
    r_in: float
    r_out: float

    def __post_init__(self):
        if not (0 < self.r_in < self.r_out):
            raise DomainError("annulus needs 0 < r_in < r_out")

    def _delta(self, z):
        r = np.abs(z - self.center)
        return np.minimum(np.abs(r - self.r_in), np.abs(r - self.r_out))

    def _contains(self, z):
        r = np.abs(z - self.center)
        return (r > self.r_in) & (r < self.r_out)

    def bounding_box(self):
        c, r = self.center, self.r_out
        return (c.real - r, c.imag - r, c.real + r, c.imag + r)

    def reference_point(self):
        return self.center + 0.5 * (self.r_in + self.r_out)

    def hole_anchors(self):
        return [self.center]

    def boundary_rings(self):
        return [_circle(self.center, self.r_out), _circle(self.center, self.r_in)]


def _ring_array(vertices):
    v = np.asarray([as_complex(p) for p in vertices], dtype=complex)
    if v.size >= 2 and v[0] == v[-1]:
        v = v[:-1]
    if v.size < 3:
        raise DomainError("polygon rings need >= 3 distinct vertices")
    return v


def _probe_inside(rings, bbox, extra_rings=()):
    """Deterministic scan for a point inside the even-odd region of rings."""
    xmin, ymin, xmax, ymax = bbox
    for n in (5, 11, 23, 47, 97):
        xs = np.linspace(xmin, xmax, n + 2)[1:-1]
        ys = np.linspace(ymin, ymax, n + 2)[1:-1]
        X, Y = np.meshgrid(xs, ys)
        z = (X + 1j * Y).ravel()
        ok = _even_odd_inside(z, list(rings))
        for r in extra_rings:
            ok &= ~_even_odd_inside(z, [r])
        if ok.any():
            return complex(z[np.nonzero(ok)[0][0]])
    raise DomainError("could not locate an interior probe point")


@dataclass(frozen=True)
class PolygonWithHoles(PlaneDomain):
    """Simple closed outer chain with pairwise disjoint interior holes."""

    outer: tuple
    holes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "outer", tuple(_ring_array(self.outer)))
        object.__setattr__(
            self, "holes", tuple(tuple(_ring_array(h)) for h in self.holes)
        )
        a, b = [], []
        for ring in [self.outer, *self.holes]:
            v = np.asarray(ring, dtype=complex)
            a.append(v)
            b.append(np.roll(v, -1))
        object.__setattr__(self, "_ea", np.concatenate(a))
        object.__setattr__(self, "_eb", np.concatenate(b))

    def _delta(self, z):
        shape = np.shape(z)
        d = _seg_distance(z, self._ea, self._eb).min(axis=1)
        return d.reshape(shape) if shape else d[0]

    def _contains(self, z):
        return _even_odd_inside(z, [self.outer, *self.holes])

    def bounding_box(self):
        v = np.asarray(self.outer, dtype=complex)
        return (v.real.min(), v.imag.min(), v.real.max(), v.imag.max())

    def reference_point(self):
        v = np.asarray(self.outer, dtype=complex)
        c = complex(v.mean())
        if self.contains(c):
            return c
        return _probe_inside([self.outer, *self.holes], self.bounding_box())

    def hole_anchors(self):
        out = []
        for hole in self.holes:
            v = np.asarray(hole, dtype=complex)
            c = complex(v.mean())
            if not _even_odd_inside(np.asarray([c]), [hole])[0]:
                bb = (v.real.min(), v.imag.min(), v.real.max(), v.imag.max())
                c = _probe_inside([hole], bb)
            out.append(c)
        return out

    def boundary_rings(self):
        rings = [np.asarray(self.outer, dtype=complex)]
        rings += [np.asarray(h, dtype=complex) for h in self.holes]
        return rings


@dataclass(frozen=True)
class Punctured(PlaneDomain):
    """A base domain minus finitely many punctures.

    Punctures act as zero-radius boundary components: they contribute
    |z - p| to delta and are excluded from membership (exact equality,
    plus an optional exclusion radius).
    """

    base: PlaneDomain
    punctures: tuple
    exclusion: float = 0.0

    def __post_init__(self):
        pts = tuple(as_complex(p) for p in self.punctures)
        if not pts:
            raise DomainError("punctured domain needs at least one puncture")
        inside = self.base.contains(np.asarray(pts))
        if not np.all(inside):
            raise DomainError("punctures must lie strictly inside the base domain")
        object.__setattr__(self, "punctures", pts)

    def _delta(self, z):
        d = self.base._delta_or_inf(z)
        for p in self.punctures:
            d = np.minimum(d, np.abs(z - p))
        return d

    def _delta_or_inf(self, z):
        return self._delta(z)

    def _contains(self, z):
        ok = self.base._contains(z)
        for p in self.punctures:
            ok = ok & (np.abs(z - p) > self.exclusion)
        return ok

    def bounding_box(self):
        return self.base.bounding_box()

    def reference_point(self):
        c = self.base.reference_point()
        if self.contains(c):
            return c
        for p in self.punctures:
            for probe in (c + 0.25 * abs(c - p) + 0.1, p + 0.37 + 0.22j):
                if self.contains(probe):
                    return probe
        raise DomainError("no reference point clear of the punctures")

    def hole_anchors(self):
        return list(self.base.hole_anchors()) + list(self.punctures)

    def boundary_rings(self):
        return self.base.boundary_rings()


# -- module-level operation wrappers -----------------------------------------

def _point_or_array(p):
    if isinstance(p, (tuple, list)) and len(p) == 2 and np.ndim(p[0]) == 0:
        return as_complex(p)
    if np.ndim(p) == 0:
        return as_complex(p)
    return p


def boundary_distance(domain: PlaneDomain, p):
    return domain.boundary_distance(_point_or_array(p))


def contains(domain: PlaneDomain, p):
    return domain.contains(_point_or_array(p))


# -- grids --------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Rectangular lattice over a bounding box with a boundary-margin mask.

    Nodes sit at (x0 + i*h, y0 + j*h); arrays are indexed [j, i] (row = y).
    Masked-in nodes satisfy contains(node) and delta(node) > margin, and
    form a single 8-connected component.  Instances are immutable; `values`
    holds per-node samples (NaN off-mask).
    """

    x0: float
    y0: float
    h: float
    nx: int
    ny: int
    margin: float
    mask: np.ndarray
    delta: np.ndarray
    values: np.ndarray | None = None

    def __post_init__(self):
        for a in (self.mask, self.delta, self.values):
            if a is not None:
                a.setflags(write=False)

    @property
    def xs(self):
        return self.x0 + self.h * np.arange(self.nx)

    @property
    def ys(self):
        return self.y0 + self.h * np.arange(self.ny)

    def zs(self):
        X, Y = np.meshgrid(self.xs, self.ys)
        return X + 1j * Y

    def node_count(self) -> int:
        return int(self.mask.sum())

    def masked_nodes(self):
        return self.zs()[self.mask]

    def with_values(self, values, mask=None, margin=None) -> "Grid":
        mask = self.mask if mask is None else mask
        out = np.where(mask, values, np.nan)
        return Grid(self.x0, self.y0, self.h, self.nx, self.ny,
                    self.margin if margin is None else margin,
                    mask.copy(), self.delta, out)

    def nearest_index(self, p) -> tuple:
        z = as_complex(p)
        i = int(round((z.real - self.x0) / self.h))
        j = int(round((z.imag - self.y0) / self.h))
        return (min(max(j, 0), self.ny - 1), min(max(i, 0), self.nx - 1))

    def node_z(self, j, i) -> complex:
        return complex(self.x0 + i * self.h, self.y0 + j * self.h)

    def nearest_masked(self, p, radius=None):
        """Nearest masked-in node to p within `radius` (None = anywhere)."""
        z = as_complex(p)
        jj, ii = np.nonzero(self.mask)
        zz = (self.x0 + ii * self.h) + 1j * (self.y0 + jj * self.h)
        k = int(np.argmin(np.abs(zz - z)))
        d = abs(zz[k] - z)
        if radius is not None and d > radius:
            return None
        return (int(jj[k]), int(ii[k]))


def build_grid(domain: PlaneDomain, h: float, margin: float = 0.0, *,
               bbox=None, anchor=None) -> Grid:
    """Sample the domain on a lattice and mask nodes with delta > margin.

    The mask is restricted to the 8-connected component containing the
    anchor (default: the domain's reference point).  Unbounded domains
    require an explicit bbox.
    """
    if h <= 0:
        raise ResolutionError("grid spacing must be positive")
    if margin < 0:
        raise ResolutionError("margin must be nonnegative")
    if bbox is None:
        bbox = domain.bounding_box()
        if bbox is None:
            raise DomainError("unbounded domain: supply a bounding box")
    xmin, ymin, xmax, ymax = (float(v) for v in bbox)
    if not (xmin < xmax and ymin < ymax):
        raise DomainError("invalid bounding box")
    nx = int(np.floor((xmax - xmin) / h + 1e-9)) + 1
    ny = int(np.floor((ymax - ymin) / h + 1e-9)) + 1
    xs = xmin + h * np.arange(nx)
    ys = ymin + h * np.arange(ny)
    X, Y = np.meshgrid(xs, ys)
    Z = X + 1j * Y
    delta = np.asarray(domain._delta_or_inf(Z), dtype=float)
    mask = domain._contains(Z) & (delta > margin)
    if not mask.any():
        raise ResolutionError("margin too large: empty grid mask")

    labels, _ = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if anchor is None:
        anchor = domain.reference_point()
    anchor = as_complex(anchor)
    jj, ii = np.nonzero(mask)
    zz = xs[ii] + 1j * ys[jj]
    k = int(np.argmin(np.abs(zz - anchor)))
    keep = labels[jj[k], ii[k]]
    mask = labels == keep
    if not mask.any():
        raise ResolutionError("margin too large: empty grid mask")
    return Grid(xmin, ymin, h, nx, ny, float(margin), mask, delta)
