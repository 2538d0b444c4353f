"""Conformal metric densities rho = phi(u), curvature, and hypothesis checks.

A density is evaluated through `log_value` (numerically robust for the
boundary-blowup families) with `value = exp(log_value)`.  All evaluators
are vectorized over arrays of points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import PlaneDomain, Grid, as_complex
from .errors import DomainError, GeometryError, HypothesisError

__all__ = [
    "Density", "BoundaryPower", "ModulusPower", "HyperbolicDisk",
    "SphericalCap", "Composite", "GridDensity", "Scaled",
    "ExpPhi", "PowerAfterShift", "TablePhi",
    "NegLogDelta", "LogModulusCombo", "QuadraticModulus", "MaxOfHarmonics",
    "GridFunction",
    "eval_density", "curvature", "submean_check", "verify_hypotheses",
    "HypothesisReport",
]


# -- phi families --------------------------------------------------------------

class Phi:
    """Positive nondecreasing profile with convex logarithm (to be verified)."""

    interval = (-np.inf, np.inf)

    def value(self, t):
        return np.exp(self.log_value(t))

    def log_value(self, t):
        raise NotImplementedError

    def check_interval(self, t):
        lo, hi = self.interval
        t = np.asarray(t, dtype=float)
        if np.any(t <= lo) or np.any(t >= hi):
            raise HypothesisError(
                f"phi evaluated outside its declared interval ({lo}, {hi})")

    def scaled(self, factor):
        raise NotImplementedError


@dataclass(frozen=True)
class ExpPhi(Phi):
    """phi(t) = c * exp(rate*t + offset), c > 0."""

    c: float = 1.0
    offset: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise HypothesisError("ExpPhi needs c > 0")

    def log_value(self, t):
        return np.log(self.c) + self.offset + self.rate * np.asarray(t, dtype=float)

    def scaled(self, factor):
        return ExpPhi(self.c * factor, self.offset, self.rate)


@dataclass(frozen=True)
class PowerAfterShift(Phi):
    """phi(t) = scale * (t - t0)^p on t > t0.

    Positive and increasing for p >= 1, but log phi = p*log(t - t0) is
    concave, so this family exists to exercise the convexity rejection.
    """

    p: float = 1.0
    t0: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.p < 1:
            raise HypothesisError("PowerAfterShift needs p >= 1")
        if not self.scale > 0:
            raise HypothesisError("PowerAfterShift needs scale > 0")

    @property
    def interval(self):
        return (self.t0, np.inf)

    def log_value(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(self.scale) + self.p * np.log(t - self.t0)

    def scaled(self, factor):
        return PowerAfterShift(self.p, self.t0, self.scale * factor)


@dataclass(frozen=True)
class TablePhi(Phi):
    """Samples (t_k, phi_k) interpolated linearly in log phi.

    Construction validates positivity, monotonicity, and midpoint
    log-convexity of the samples (1e-12 relative).
    """

    ts: tuple
    phis: tuple

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        ph = np.asarray(self.phis, dtype=float)
        if ts.size < 2 or ts.size != ph.size:
            raise HypothesisError("TablePhi needs matching sample arrays, >= 2 points")
        if np.any(np.diff(ts) <= 0):
            raise HypothesisError("TablePhi abscissae must increase")
        if np.any(ph <= 0):
            raise HypothesisError("TablePhi samples must be positive")
        if np.any(np.diff(ph) < -1e-12 * np.abs(ph[:-1])):
            raise HypothesisError("TablePhi samples must be nondecreasing")
        lp = np.log(ph)
        # second difference on a possibly nonuniform mesh
        if ts.size >= 3:
            s0 = (lp[1:-1] - lp[:-2]) / (ts[1:-1] - ts[:-2])
            s1 = (lp[2:] - lp[1:-1]) / (ts[2:] - ts[1:-1])
            if np.any(s1 - s0 < -1e-12 * np.maximum(1.0, np.abs(lp[1:-1]))):
                raise HypothesisError("TablePhi samples are not log-convex")
        object.__setattr__(self, "ts", tuple(ts))
        object.__setattr__(self, "phis", tuple(ph))

    @property
    def interval(self):
        return (self.ts[0], self.ts[-1])

    def log_value(self, t):
        return np.interp(np.asarray(t, dtype=float), self.ts, np.log(self.phis))

    def scaled(self, factor):
        return TablePhi(self.ts, tuple(p * factor for p in self.phis))


# -- subharmonic candidates -----------------------------------------------------

class Subharmonic:
    """A continuous function checked (or known) to satisfy the circle
    sub-mean-value inequality."""

    def value(self, domain, z):
        raise NotImplementedError


@dataclass(frozen=True)
class NegLogDelta(Subharmonic):
    """u = -log delta; subharmonic on any domain with nonempty boundary."""

    def value(self, domain, z):
        return -np.log(domain._delta_or_inf(np.asarray(z, dtype=complex)))


@dataclass(frozen=True)
class LogModulusCombo(Subharmonic):
    """u = sum_i w_i log|z - zeta_i|.

    Nonnegative weights make u subharmonic for any centers; signed
    weights remain harmonic (hence fine) only when every center lies
    off the domain.
    """

    weights: tuple
    centers: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        c = tuple(as_complex(x) for x in self.centers)
        if len(w) != len(c) or not w:
            raise HypothesisError("LogModulusCombo needs matching weights/centers")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "centers", c)

    def value(self, domain, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=float)
        for w, c in zip(self.weights, self.centers):
            out = out + w * np.log(np.abs(z - c))
        return out


@dataclass(frozen=True)
class QuadraticModulus(Subharmonic):
    """u = |z|^2 (Laplacian 4)."""

    def value(self, domain, z):
        z = np.asarray(z, dtype=complex)
        return z.real**2 + z.imag**2


@dataclass(frozen=True)
class MaxOfHarmonics(Subharmonic):
    """u = max_i (a_i x + b_i y + c_i); a max of harmonic functions."""

    coeffs: tuple  # of (a, b, c)

    def __post_init__(self):
        cs = tuple((float(a), float(b), float(c)) for a, b, c in self.coeffs)
        if not cs:
            raise HypothesisError("MaxOfHarmonics needs at least one affine function")
        object.__setattr__(self, "coeffs", cs)

    def value(self, domain, z):
        z = np.asarray(z, dtype=complex)
        vals = [a * z.real + b * z.imag + c for a, b, c in self.coeffs]
        return np.maximum.reduce(vals)


def _bilinear(grid: Grid, arr, z):
    """Bilinear interpolation of arr on the grid; NaN where a corner is off-mask."""
    z = np.asarray(z, dtype=complex)
    fx = (z.real - grid.x0) / grid.h
    fy = (z.imag - grid.y0) / grid.h
    i0 = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    j0 = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    tx = fx - i0
    ty = fy - j0
    bad = (tx < -1e-9) | (tx > 1 + 1e-9) | (ty < -1e-9) | (ty > 1 + 1e-9)
    tx = np.clip(tx, 0.0, 1.0)
    ty = np.clip(ty, 0.0, 1.0)
    v00 = arr[j0, i0]
    v01 = arr[j0, i0 + 1]
    v10 = arr[j0 + 1, i0]
    v11 = arr[j0 + 1, i0 + 1]
    out = ((1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v01
           + (1 - tx) * ty * v10 + tx * ty * v11)
    return np.where(bad, np.nan, out)


@dataclass(frozen=True)
class GridFunction(Subharmonic):
    """Candidate-subharmonic grid samples, interpolated bilinearly."""

    grid: Grid

    def value(self, domain, z):
        return _bilinear(self.grid, self.grid.values, z)


@dataclass(frozen=True)
class _LogDensity(Subharmonic):
    """v = log rho for a given density (the canonical hypothesis route)."""

    spec: "Density"

    def value(self, domain, z):
        return self.spec.log_value(domain, z)


# -- densities ------------------------------------------------------------------

class Density:
    """Positive density rho on a domain; all evaluation is unchecked and
    vectorized (use eval_density for the checked scalar entry point)."""

    def log_value(self, domain, z):
        raise NotImplementedError

    def value(self, domain, z):
        return np.exp(self.log_value(domain, z))

    def canonical_parts(self, domain):
        """(phi, u) with rho = phi(u); default is phi = exp, u = log rho."""
        return ExpPhi(), _LogDensity(self)

    def analytic_curvature(self, z):
        raise GeometryError("no analytic curvature for this density")

    def complete_hint(self, domain):
        """True/False when completeness of d_rho is known, else None."""
        return None


@dataclass(frozen=True)
class BoundaryPower(Density):
    """rho = delta^alpha."""

    alpha: float

    def log_value(self, domain, z):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.alpha * np.log(domain._delta_or_inf(np.asarray(z, dtype=complex)))

    def canonical_parts(self, domain):
        # delta^alpha = exp(-alpha * (-log delta)); u = -log delta stays
        # subharmonic and the monotonicity burden moves onto phi.
        return ExpPhi(rate=-self.alpha), NegLogDelta()

    def complete_hint(self, domain):
        return self.alpha <= -1


@dataclass(frozen=True)
class ModulusPower(Density):
    """rho = |z|^alpha on domains avoiding the origin."""

    alpha: float

    def log_value(self, domain, z):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.alpha * np.log(np.abs(np.asarray(z, dtype=complex)))

    def analytic_curvature(self, z):
        return 0.0

    def complete_hint(self, domain):
        if self.alpha == -1:
            return True
        return None


@dataclass(frozen=True)
class HyperbolicDisk(Density):
    """rho = 2 / (1 - |z|^2) on the unit disk (curvature -1)."""

    def log_value(self, domain, z):
        z = np.asarray(z, dtype=complex)
        r2 = z.real**2 + z.imag**2
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(2.0) - np.log1p(-r2)

    def analytic_curvature(self, z):
        return -1.0

    def complete_hint(self, domain):
        return True


@dataclass(frozen=True)
class SphericalCap(Density):
    """rho = 2 / (1 + |z|^2); curvature +1, the negative control."""

    def log_value(self, domain, z):
        z = np.asarray(z, dtype=complex)
        r2 = z.real**2 + z.imag**2
        return np.log(2.0) - np.log1p(r2)

    def analytic_curvature(self, z):
        return 1.0

    def complete_hint(self, domain):
        return False


@dataclass(frozen=True)
class Composite(Density):
    """rho = phi(u)."""

    phi: Phi
    u: Subharmonic

    def log_value(self, domain, z):
        return self.phi.log_value(self.u.value(domain, z))

    def value(self, domain, z):
        return self.phi.value(self.u.value(domain, z))

    def canonical_parts(self, domain):
        return self.phi, self.u


@dataclass(frozen=True)
class GridDensity(Density):
    """log rho sampled on a grid; bilinear interpolation of the log keeps
    rho positive wherever it is defined."""

    grid: Grid

    def log_value(self, domain, z):
        return _bilinear(self.grid, self.grid.values, z)


@dataclass(frozen=True)
class Scaled(Density):
    """factor * rho; hypothesis checks are invariant under factor > 0."""

    base: Density
    factor: float

    def __post_init__(self):
        if not self.factor > 0:
            raise HypothesisError("scale factor must be positive")

    def log_value(self, domain, z):
        return np.log(self.factor) + self.base.log_value(domain, z)

    def canonical_parts(self, domain):
        phi, u = self.base.canonical_parts(domain)
        return phi.scaled(self.factor), u

    def complete_hint(self, domain):
        return self.base.complete_hint(domain)


# -- operations -------------------------------------------------------------------

def eval_density(spec: Density, domain: PlaneDomain, p) -> float:
    """Checked evaluation of rho at one point."""
    z = as_complex(p)
    if not domain.contains(z):
        raise DomainError(f"point {z} not in domain")
    if isinstance(spec, (Composite,)):
        t = spec.u.value(domain, np.asarray(z))
        spec.phi.check_interval(t)
    v = spec.value(domain, np.asarray(z))
    v = float(v)
    if not np.isfinite(v) or v <= 0:
        raise HypothesisError(f"density not positive/finite at {z}: {v}")
    return v


def curvature(spec: Density, domain: PlaneDomain, p, h: float, *,
              analytic: bool = False) -> float:
    """Gaussian curvature -rho^-2 * Lap(log rho) at p.

    The Laplacian uses the 5-point stencil at spacing h (O(h^2) for C^4
    densities); `analytic=True` returns the closed-form value where one
    exists.
    """
    z = as_complex(p)
    if analytic:
        return float(spec.analytic_curvature(z))
    if h <= 0:
        raise GeometryError("stencil spacing must be positive")
    if float(domain._delta_or_inf(np.asarray(z))) < 2 * h:
        raise GeometryError("stencil leaves the domain (need delta > 2h)")
    pts = np.asarray([z, z + h, z - h, z + 1j * h, z - 1j * h])
    v = spec.log_value(domain, pts)
    lap = (v[1] + v[2] + v[3] + v[4] - 4 * v[0]) / h**2
    return float(-np.exp(-2 * v[0]) * lap)


def submean_check(u: Subharmonic, domain: PlaneDomain, p, r: float,
                  n: int = 64) -> float:
    """Circle-average margin mean_k u(p + r e^{i theta_k}) - u(p).

    Nonnegative (up to quadrature error) for subharmonic u.
    """
    if n < 16:
        raise GeometryError("need at least 16 circle samples")
    z = as_complex(p)
    if not float(domain._delta_or_inf(np.asarray(z))) > r:
        raise GeometryError("closed disk B(p, r) must lie inside the domain")
    th = 2 * np.pi * np.arange(n) / n
    ring = z + r * np.exp(1j * th)
    vals = u.value(domain, ring)
    return float(np.mean(vals) - u.value(domain, np.asarray(z)))


@dataclass
class HypothesisReport:
    """Outcome of the three Theorem hypothesis checks."""

    phi_positive_increasing: bool
    monotone_margin: float
    logphi_convex: bool
    convexity_margin: float
    submean_ok: bool
    submean_margin: float
    u_range: tuple
    radius: float
    nodes_checked: int
    mode: str = "submean"

    @property
    def passed(self) -> bool:
        return self.phi_positive_increasing and self.logphi_convex and self.submean_ok

    def as_dict(self):
        return {
            "phi_positive_increasing": self.phi_positive_increasing,
            "monotone_margin": self.monotone_margin,
            "logphi_convex": self.logphi_convex,
            "convexity_margin": self.convexity_margin,
            "submean_ok": self.submean_ok,
            "submean_margin": self.submean_margin,
            "u_range_lo": self.u_range[0],
            "u_range_hi": self.u_range[1],
            "radius": self.radius,
            "nodes_checked": self.nodes_checked,
            "mode": self.mode,
            "passed": self.passed,
        }


_PHI_MESH = 1024
_REL_TOL = 1e-12


def verify_hypotheses(spec: Density, domain: PlaneDomain, mesh: Grid, *,
                      n_circle: int = 64, submean_tol: float = None) -> HypothesisReport:
    """Check the decomposition rho = phi(u) against the Theorem hypotheses.

    (i) phi positive and nondecreasing on the sampled range of u,
    (ii) log phi midpoint-convex there, (iii) u satisfies the circle
    sub-mean inequality at radius h over the mesh.  Grid densities check
    the discrete Laplacian of log rho instead of (iii).
    """
    if mesh.node_count() == 0:
        raise GeometryError("mesh has no masked-in nodes")

    if isinstance(spec, GridDensity):
        return _verify_grid_density(spec, mesh)

    phi, u = spec.canonical_parts(domain)
    nodes = mesh.masked_nodes()
    uvals = np.asarray(u.value(domain, nodes), dtype=float)
    uvals = uvals[np.isfinite(uvals)]
    if uvals.size == 0:
        raise GeometryError("u is not finite on the mesh")
    t_lo, t_hi = float(uvals.min()), float(uvals.max())

    lo, hi = phi.interval
    ts = np.linspace(t_lo, t_hi, _PHI_MESH)
    in_iv = (ts > lo) & (ts < hi)
    phi_ok = bool(in_iv.all())
    if in_iv.any():
        tv = ts[in_iv]
        fv = phi.value(tv)
        scale = max(1.0, float(np.max(np.abs(fv))))
        mono = float(np.min(np.diff(fv))) if tv.size > 1 else 0.0
        pos = bool(np.all(fv > 0))
        phi_ok = phi_ok and pos and mono >= -_REL_TOL * scale
        lf = np.log(np.maximum(fv, 1e-300))
        if tv.size > 2:
            conv = float(np.min(lf[:-2] + lf[2:] - 2 * lf[1:-1]))
        else:
            conv = 0.0
        lscale = max(1.0, float(np.max(np.abs(lf))))
        conv_ok = conv >= -_REL_TOL * lscale
    else:
        mono, conv, conv_ok = -np.inf, -np.inf, False
        phi_ok = False

    r = mesh.h
    deltas = mesh.delta[mesh.mask]
    sel = deltas > r * (1 + 1e-9)
    pts = nodes[sel]
    if pts.size == 0:
        sub_ok, sub_margin, n_nodes = False, -np.inf, 0
    else:
        n = max(16, n_circle)
        th = 2 * np.pi * np.arange(n) / n
        ring = pts[:, None] + r * np.exp(1j * th)[None, :]
        vals = np.asarray(u.value(domain, ring), dtype=float)
        center = np.asarray(u.value(domain, pts), dtype=float)
        margins = vals.mean(axis=1) - center
        sub_margin = float(np.nanmin(margins))
        uscale = 1.0 + float(np.nanmax(np.abs(vals)))
        tol = submean_tol if submean_tol is not None else 1e-8 * uscale
        sub_ok = bool(np.isfinite(sub_margin) and sub_margin >= -tol)
        n_nodes = int(pts.size)

    return HypothesisReport(
        phi_positive_increasing=phi_ok,
        monotone_margin=mono,
        logphi_convex=conv_ok,
        convexity_margin=conv,
        submean_ok=sub_ok,
        submean_margin=sub_margin,
        u_range=(t_lo, t_hi),
        radius=r,
        nodes_checked=n_nodes,
    )


def _verify_grid_density(spec: GridDensity, mesh: Grid) -> HypothesisReport:
    from .smoothing import grid_laplacian, lap_tolerance

    g = spec.grid
    lap = grid_laplacian(g)
    vals = lap.values[lap.mask]
    tol = lap_tolerance(g.values[g.mask], g.h)
    margin = float(vals.min()) if vals.size else -np.inf
    ok = bool(vals.size and margin >= -tol)
    lv = g.values[g.mask]
    return HypothesisReport(
        phi_positive_increasing=True,
        monotone_margin=0.0,
        logphi_convex=True,
        convexity_margin=0.0,
        submean_ok=ok,
        submean_margin=margin,
        u_range=(float(lv.min()), float(lv.max())),
        radius=g.h,
        nodes_checked=int(vals.size),
        mode="grid-laplacian",
    )
