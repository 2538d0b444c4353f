"""Mollification of grid samples and the sigma_n approximation pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, ndimage, signal

from .density import Density, verify_hypotheses
from .domain import Annulus, Disk, Grid, PlaneDomain, as_complex, build_grid
from .errors import GeometryError, HypothesisError, ResolutionError

__all__ = [
    "Mollifier", "mollify", "grid_laplacian", "lap_tolerance",
    "lemma_check", "LemmaReport", "hyperbolic_density_term",
    "sigma_sequence", "SigmaStep",
]


def _bump_normalizer() -> float:
    """c with integral of c*exp(-1/(1-r^2)) over the unit disk equal to 1."""
    val, err = integrate.quad(lambda r: np.exp(-1.0 / (1.0 - r * r)) * r, 0.0, 1.0,
                              epsabs=1e-14, epsrel=1e-13)
    return 1.0 / (2.0 * np.pi * val)


_BUMP_C = _bump_normalizer()


@dataclass(frozen=True)
class Mollifier:
    """Radial C-infinity bump supported in the unit disk, unit total mass,
    scaled to eps:  eta_eps(z) = eps^-2 * eta(z/eps)."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ResolutionError("mollifier scale must be positive")

    @staticmethod
    def profile(r):
        """eta as a function of radius (unit scale)."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        inside = r < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = _BUMP_C * np.exp(-1.0 / (1.0 - r[inside] ** 2))
        return out

    def kernel(self, z):
        """eta_eps evaluated at points z."""
        return self.profile(np.abs(z) / self.eps) / self.eps**2

    @staticmethod
    def mass(order: int = 400) -> float:
        """Tensor-product quadrature of eta over [-1,1]^2 (should be 1)."""
        x, w = np.polynomial.legendre.leggauss(order)
        X, Y = np.meshgrid(x, x)
        W = np.outer(w, w)
        return float(np.sum(W * Mollifier.profile(np.hypot(X, Y))))

    @staticmethod
    def radial_moment(k: int) -> float:
        """integral of |w|^k eta(w) dA over the unit disk."""
        val, _ = integrate.quad(
            lambda r: r ** (k + 1) * np.exp(-1.0 / (1.0 - r * r)), 0.0, 1.0,
            epsabs=1e-14, epsrel=1e-13)
        return 2.0 * np.pi * _BUMP_C * val


def mollify(grid: Grid, eps: float, *, component_anchor=None) -> Grid:
    """Convolve grid samples with the scaled bump.

    Discrete renormalization (divide by the summed kernel mass over
    masked-in nodes) preserves constants exactly and removes the O(h^2)
    normalization bias.  The output lives on nodes with
    delta > margin + eps, so the kernel support never leaves the input
    mask.
    """
    if grid.values is None:
        raise ResolutionError("grid carries no values to mollify")
    h = grid.h
    if eps < 2 * h:
        raise ResolutionError(f"mollifier scale {eps} under-resolved: need eps >= 2h = {2*h}")
    m = Mollifier(eps)
    k = int(np.ceil(eps / h))
    off = np.arange(-k, k + 1)
    DX, DY = np.meshgrid(off * h, off * h)
    K = np.zeros(DX.shape)
    rr = np.hypot(DX, DY)
    inside = rr < eps
    K[inside] = m.kernel(DX[inside] + 1j * DY[inside])

    filled = np.where(grid.mask, grid.values, 0.0)
    maskf = grid.mask.astype(float)
    num = signal.fftconvolve(filled, K, mode="same")
    den = signal.fftconvolve(maskf, K, mode="same")

    out_mask = grid.mask & (grid.delta > grid.margin + eps)
    if not out_mask.any():
        raise ResolutionError("mollification margin exhausts the grid mask")
    if component_anchor is not None:
        labels, _ = ndimage.label(out_mask, structure=np.ones((3, 3), dtype=int))
        j, i = _nearest_true(grid, out_mask, component_anchor)
        out_mask = labels == labels[j, i]
    with np.errstate(invalid="ignore"):
        vals = num / np.where(den > 0, den, np.nan)
    return grid.with_values(vals, mask=out_mask, margin=grid.margin + eps)


def _nearest_true(grid: Grid, mask, p):
    z = as_complex(p)
    jj, ii = np.nonzero(mask)
    zz = (grid.x0 + ii * grid.h) + 1j * (grid.y0 + jj * grid.h)
    k = int(np.argmin(np.abs(zz - z)))
    return int(jj[k]), int(ii[k])


def grid_laplacian(grid: Grid) -> Grid:
    """5-point stencil Laplacian; output masked to nodes whose four
    neighbors are masked-in."""
    if grid.values is None:
        raise ResolutionError("grid carries no values")
    v = np.where(grid.mask, grid.values, np.nan)
    ny, nx = v.shape
    pad = np.full((ny + 2, nx + 2), np.nan)
    pad[1:-1, 1:-1] = v
    lap = (pad[1:-1, :-2] + pad[1:-1, 2:] + pad[:-2, 1:-1] + pad[2:, 1:-1]
           - 4.0 * v) / grid.h**2
    out_mask = grid.mask & np.isfinite(lap)
    return grid.with_values(lap, mask=out_mask)


def lap_tolerance(values, h: float) -> float:
    """Stencil roundoff floor: 1e-8 * (scale of values) / h^2."""
    vals = np.asarray(values)
    vals = vals[np.isfinite(vals)]
    scale = max(1.0, float(np.max(np.abs(vals)))) if vals.size else 1.0
    return 1e-8 * scale / h**2


@dataclass
class LemmaReport:
    """Subharmonicity of log(1 + rho) given that of log rho."""

    precondition_ok: bool
    precondition_margin: float
    checked: bool
    margin: float
    tol: float
    worst_node: complex | None
    passed: bool

    def as_dict(self):
        return {
            "precondition_ok": self.precondition_ok,
            "precondition_margin": self.precondition_margin,
            "checked": self.checked,
            "margin": self.margin,
            "tol": self.tol,
            "worst_node": str(self.worst_node),
            "passed": self.passed,
        }


def lemma_check(rho_grid: Grid, *, tol_lap: float = None) -> LemmaReport:
    """Check that log(1 + rho) has nonnegative grid Laplacian wherever
    log rho does (the positive-density subharmonicity transfer)."""
    if rho_grid.values is None:
        raise ResolutionError("grid carries no values")
    rho = rho_grid.values
    if np.any(rho[rho_grid.mask] <= 0):
        return LemmaReport(False, -np.inf, False, np.nan, 0.0, None, False)
    with np.errstate(divide="ignore"):
        logrho = rho_grid.with_values(np.where(rho_grid.mask, np.log(rho), np.nan))
    lap0 = grid_laplacian(logrho)
    v0 = lap0.values[lap0.mask]
    tol0 = tol_lap if tol_lap is not None else lap_tolerance(logrho.values[logrho.mask], rho_grid.h)
    pre_margin = float(v0.min()) if v0.size else np.inf
    pre_ok = bool(v0.size and pre_margin >= -tol0)
    if not pre_ok:
        return LemmaReport(False, pre_margin, False, np.nan, tol0, None, False)

    log1p = rho_grid.with_values(np.where(rho_grid.mask, np.log1p(rho), np.nan))
    lap1 = grid_laplacian(log1p)
    v1 = lap1.values[lap1.mask]
    tol1 = tol_lap if tol_lap is not None else lap_tolerance(log1p.values[log1p.mask], rho_grid.h)
    margin = float(v1.min()) if v1.size else np.inf
    jj, ii = np.nonzero(lap1.mask)
    worst = None
    if v1.size:
        k = int(np.argmin(v1))
        worst = rho_grid.node_z(jj[k], ii[k])
    ok = bool(v1.size and margin >= -tol1)
    return LemmaReport(True, pre_margin, True, margin, tol1, worst, ok)


def hyperbolic_density_term(domain: PlaneDomain, inset: float):
    """The curvature -1 density of the inset domain {delta > inset}, in
    closed form for disks and round annuli; elsewhere the subharmonic
    surrogate 2/(delta - inset), which keeps log(sigma_n) subharmonic and
    the inset metric complete.

    Returns (callable z -> value, kind tag).
    """
    if isinstance(domain, Disk):
        R = domain.radius - inset
        if R <= 0:
            raise GeometryError("inset exhausts the disk")
        c = domain.center

        def lam(z, R=R, c=c):
            r2 = np.abs(np.asarray(z, dtype=complex) - c) ** 2
            return 2.0 * R / (R * R - r2)

        _self_check(lam, c + 0.3 * R)
        return lam, "analytic-disk"

    if isinstance(domain, Annulus):
        r1 = domain.r_in + inset
        r2 = domain.r_out - inset
        if not r1 < r2:
            raise GeometryError("inset exhausts the annulus")
        c = domain.center
        L = np.log(r2 / r1)

        def lam(z, r1=r1, L=L, c=c):
            r = np.abs(np.asarray(z, dtype=complex) - c)
            return (np.pi / L) / (r * np.sin(np.pi * np.log(r / r1) / L))

        _self_check(lam, c + np.sqrt(r1 * r2))
        return lam, "analytic-annulus"

    def tau(z):
        d = np.asarray(domain._delta_or_inf(np.asarray(z, dtype=complex)), dtype=float)
        return 2.0 / (d - inset)

    return tau, "surrogate-2-over-delta"


def _self_check(lam, z0, h=1e-4, tol=1e-3):
    """One-point stencil check that lam has curvature -1."""
    z0 = as_complex(z0)
    pts = np.asarray([z0, z0 + h, z0 - h, z0 + 1j * h, z0 - 1j * h])
    v = np.log(lam(pts))
    lap = (v[1] + v[2] + v[3] + v[4] - 4 * v[0]) / h**2
    K = -np.exp(-2 * v[0]) * lap
    if abs(K + 1.0) > tol:
        raise GeometryError(f"hyperbolic density self-check failed: K = {K}")


@dataclass
class SigmaStep:
    """One step of the approximation sequence sigma_n = rho_n (1 + eps_n * lambda_n)."""

    n: int
    eps: float
    error: str | None = None
    grid: Grid | None = None          # carries sigma values on the output mask
    v_smooth: np.ndarray | None = None
    rho_smooth: np.ndarray | None = None
    lambda_kind: str = ""
    node_count: int = 0
    lap_margin: float = np.nan
    lap_tol: float = np.nan
    lap_ok: bool = False
    sup_diff: float = np.nan

    def as_dict(self):
        return {
            "n": self.n,
            "eps": self.eps,
            "error": self.error or "",
            "lambda_kind": self.lambda_kind,
            "node_count": self.node_count,
            "lap_margin": self.lap_margin,
            "lap_tol": self.lap_tol,
            "lap_ok": self.lap_ok,
            "sup_diff": self.sup_diff,
        }


def sigma_sequence(spec: Density, domain: PlaneDomain, anchor, n_max: int, *,
                   ns=None, h: float = None, bbox=None, base_margin: float = None,
                   skip_hypotheses: bool = False) -> list:
    """Run the mollified approximation pipeline for n = 1..n_max (or `ns`).

    Per step: eps_n = delta(anchor)/n, v_n = mollify(log rho, eps_n) on the
    anchor component of {delta > eps_n}, rho_n = exp(v_n), and
    sigma_n = rho_n (1 + eps_n * lambda_n) with the inset hyperbolic term.
    Steps record the minimum grid Laplacian of log sigma_n and
    sup |sigma_n - rho|; failures are recorded per step, not raised.
    """
    anchor = as_complex(anchor)
    if not domain.contains(anchor):
        raise GeometryError("anchor must lie in the domain")
    d0 = float(domain._delta_or_inf(np.asarray(anchor)))
    if not np.isfinite(d0):
        raise GeometryError("sigma sequence needs a domain with nonempty boundary")
    if ns is None:
        ns = list(range(1, n_max + 1))
    ns = sorted(set(int(n) for n in ns))
    if any(n < 1 for n in ns) or (ns and ns[-1] > n_max):
        raise GeometryError("step indices must lie in 1..n_max")
    eps_min = d0 / max(ns)
    if h is None:
        h = eps_min / 4.0
    if h > eps_min / 4.0 + 1e-12:
        raise ResolutionError(f"grid spacing {h} too coarse: need h <= eps_n/4 = {eps_min/4}")
    if base_margin is None:
        base_margin = h

    base = build_grid(domain, h, base_margin, bbox=bbox, anchor=anchor)
    if not skip_hypotheses:
        report = verify_hypotheses(spec, domain, base)
        if not report.passed:
            raise HypothesisError(f"density fails Theorem hypotheses: {report.as_dict()}")

    Z = base.zs()
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(base.mask, spec.log_value(domain, Z), np.nan)
    vgrid = base.with_values(v)
    rho_true = np.where(base.mask, np.exp(v), np.nan)

    steps = []
    for n in ns:
        eps_n = d0 / n
        step = SigmaStep(n=n, eps=eps_n)
        try:
            if eps_n < 2 * h:
                raise ResolutionError(f"eps_{n} = {eps_n} under-resolved on h = {h}")
            vn = mollify(vgrid, eps_n, component_anchor=anchor)
        except ResolutionError as e:
            step.error = f"empty-grid: {e}"
            steps.append(step)
            continue
        try:
            lam, kind = hyperbolic_density_term(domain, eps_n)
        except GeometryError as e:
            step.error = str(e)
            steps.append(step)
            continue
        mask = vn.mask
        rho_n = np.where(mask, np.exp(vn.values), np.nan)
        with np.errstate(divide="ignore", invalid="ignore"):
            lam_vals = np.where(mask, lam(Z), np.nan)
        sigma = rho_n * (1.0 + eps_n * lam_vals)
        log_sigma = vn.with_values(np.where(mask, np.log(sigma), np.nan))
        lap = grid_laplacian(log_sigma)
        lv = lap.values[lap.mask]
        tol = lap_tolerance(log_sigma.values[mask], h)
        step.grid = vn.with_values(sigma)
        step.v_smooth = vn.values
        step.rho_smooth = rho_n
        step.lambda_kind = kind
        step.node_count = int(mask.sum())
        step.lap_margin = float(lv.min()) if lv.size else np.nan
        step.lap_tol = tol
        step.lap_ok = bool(lv.size and step.lap_margin >= -tol)
        step.sup_diff = float(np.nanmax(np.abs(sigma - rho_true)[mask]))
        steps.append(step)
    return steps
