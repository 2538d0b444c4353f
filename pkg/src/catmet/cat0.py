"""Comparison triangles and the CAT(0) distance-inequality test battery."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import Density
from .domain import PlaneDomain, as_complex
from .errors import GeometryError
from .geodesic import (
    GeodesicResult, GeodesicSolver, Polyline, cumulative_rho_lengths,
    winding_count, _seg_rho_lengths,
)

__all__ = [
    "ComparisonTriangle", "GeodesicTriangle", "Cat0Report",
    "comparison_triangle", "comparison_point", "build_triangle",
    "cat0_check", "convexity_check", "turning_rate", "c11_probe",
]

_SLACK = 1e-12


@dataclass(frozen=True)
class ComparisonTriangle:
    """Euclidean triangle with prescribed side lengths:
    |a-b| = l_ab, |b-c| = l_bc, |c-a| = l_ca."""

    a: complex
    b: complex
    c: complex
    l_ab: float
    l_bc: float
    l_ca: float


def comparison_triangle(l_ab: float, l_bc: float, l_ca: float) -> ComparisonTriangle:
    """Place a-bar at 0, b-bar on the positive axis, c-bar in the upper
    half-plane by the law of cosines; degenerate side lengths give
    collinear points."""
    lengths = (l_ab, l_bc, l_ca)
    if any(l < 0 for l in lengths):
        raise GeometryError("side lengths must be nonnegative")
    scale = max(lengths)
    slack = _SLACK * max(1.0, scale)
    if (l_ab > l_bc + l_ca + slack or l_bc > l_ab + l_ca + slack
            or l_ca > l_ab + l_bc + slack):
        raise GeometryError(f"triangle inequality violated by {lengths}")
    a = 0j
    b = complex(l_ab, 0.0)
    if l_ab <= slack:
        c = complex(l_ca, 0.0)
        return ComparisonTriangle(a, b, c, l_ab, l_bc, l_ca)
    x = (l_ab**2 + l_ca**2 - l_bc**2) / (2.0 * l_ab)
    y2 = l_ca**2 - x**2
    y = np.sqrt(max(y2, 0.0))
    return ComparisonTriangle(a, b, complex(x, y), l_ab, l_bc, l_ca)


_SIDES = {"ab": ("a", "b", "l_ab"), "bc": ("b", "c", "l_bc"),
          "ca": ("c", "a", "l_ca")}


def comparison_point(tri: ComparisonTriangle, side: str, s: float) -> complex:
    """The point at Euclidean arclength s from the side's first vertex."""
    if side not in _SIDES:
        raise GeometryError(f"side must be one of {sorted(_SIDES)}")
    p_name, q_name, l_name = _SIDES[side]
    p = getattr(tri, p_name)
    q = getattr(tri, q_name)
    ell = getattr(tri, l_name)
    if s < -_SLACK or s > ell + _SLACK * max(1.0, ell):
        raise GeometryError(f"arclength {s} outside side of length {ell}")
    if ell == 0.0:
        return p
    t = min(max(s / ell, 0.0), 1.0)
    return p + t * (q - p)


class RhoArc:
    """rho-arclength parameterization of a polyline."""

    def __init__(self, spec, domain, poly: Polyline):
        self.spec = spec
        self.domain = domain
        self.poly = poly
        self.cum = cumulative_rho_lengths(spec, domain, poly)

    @property
    def total(self) -> float:
        return float(self.cum[-1])

    def point_at(self, s: float) -> complex:
        s = min(max(float(s), 0.0), self.total)
        v = self.poly.vertices
        if v.size == 1:
            return complex(v[0])
        i = int(np.searchsorted(self.cum, s, side="right")) - 1
        i = min(max(i, 0), v.size - 2)
        a, b = v[i], v[i + 1]
        seg = float(self.cum[i + 1] - self.cum[i])
        rem = s - float(self.cum[i])
        if seg <= 0:
            return complex(a)
        t = rem / seg
        # a couple of Newton corrections on the sub-segment quadrature
        for _ in range(3):
            sub = float(_seg_rho_lengths(self.spec, self.domain,
                                         np.asarray([a]), np.asarray([a + t * (b - a)]))[0])
            rho_t = float(self.spec.value(self.domain, np.asarray([a + t * (b - a)]))[0])
            deriv = rho_t * abs(b - a)
            if deriv <= 0 or not np.isfinite(deriv):
                break
            t = min(max(t - (sub - rem) / deriv, 0.0), 1.0)
        return complex(a + t * (b - a))


@dataclass
class GeodesicTriangle:
    a: complex
    b: complex
    c: complex
    sides: tuple  # GeodesicResults: a->b, b->c, c->a
    winding_sum: int = 0

    def side_lengths(self):
        return tuple(s.length for s in self.sides)

    def max_side_gap(self) -> float:
        return max(s.gap for s in self.sides)


def build_triangle(solver: GeodesicSolver, a, b, c) -> GeodesicTriangle:
    """Three geodesic sides; in non-simply-connected domains the triangle
    must bound (winding sum zero)."""
    a, b, c = as_complex(a), as_complex(b), as_complex(c)
    sides = (solver.distance(a, b), solver.distance(b, c), solver.distance(c, a))
    wsum = 0
    if solver.winding_anchor is not None:
        loop = np.concatenate([s.path.vertices for s in sides])
        wsum = winding_count(loop, solver.winding_anchor)
        if wsum != 0:
            raise GeometryError(
                f"triangle does not bound (winding sum {wsum}); test it in the lift")
    return GeodesicTriangle(a, b, c, sides, wsum)


@dataclass
class Cat0Report:
    n_pairs: int
    v_star: float
    budget: float
    passed: bool
    worst_pair: tuple | None
    worst_sides: tuple | None
    worst_arclengths: tuple | None
    side_lengths: tuple = ()
    max_side_gap: float = 0.0
    max_pair_gap: float = 0.0
    failures: list = field(default_factory=list)
    scope: str = "in-scope"

    def as_dict(self):
        return {
            "n_pairs": self.n_pairs,
            "v_star": self.v_star,
            "budget": self.budget,
            "passed": self.passed,
            "worst_pair": str(self.worst_pair),
            "worst_sides": str(self.worst_sides),
            "side_lengths": str(self.side_lengths),
            "max_side_gap": self.max_side_gap,
            "max_pair_gap": self.max_pair_gap,
            "failures": len(self.failures),
            "scope": self.scope,
        }


def cat0_check(solver: GeodesicSolver, tri: GeodesicTriangle, n_pairs: int, *,
               seed: int = 0, scope: str = "in-scope") -> Cat0Report:
    """Sample pairs (x, y) on distinct sides, stratified over side pairs
    and arclength quantiles (fixed seed), and compare d(x, y) with the
    Euclidean distance of the comparison points.

    budget = 2 * max pair-distance gap + 3 * max side-length gap; the
    inequality itself is exact, so every bit of slack must be accounted
    numerical error.
    """
    l_ab, l_bc, l_ca = tri.side_lengths()
    ctri = comparison_triangle(l_ab, l_bc, l_ca)
    arcs = [RhoArc(solver.spec, solver.domain, s.path) for s in tri.sides]
    names = ["ab", "bc", "ca"]
    rng = np.random.default_rng(seed)

    per_pair = max(1, int(np.ceil(n_pairs / 3)))
    k = max(1, int(np.ceil(np.sqrt(per_pair))))
    v_star = -np.inf
    worst = None
    max_pair_gap = 0.0
    failures = []
    count = 0
    for i, j in ((0, 1), (1, 2), (2, 0)):
        Li, Lj = arcs[i].total, arcs[j].total
        qi = (np.arange(k) + rng.uniform(0.0, 1.0, k)) / k
        qj = (np.arange(k) + rng.uniform(0.0, 1.0, k)) / k
        for s1 in qi * Li:
            x = arcs[i].point_at(s1)
            xbar = comparison_point(ctri, names[i], s1)
            for s2 in qj * Lj:
                y = arcs[j].point_at(s2)
                ybar = comparison_point(ctri, names[j], s2)
                count += 1
                try:
                    r = solver.distance(x, y)
                except Exception as e:  # recorded, not fatal
                    failures.append(f"{names[i]}@{s1:.6g} {names[j]}@{s2:.6g}: {e}")
                    continue
                viol = r.length - abs(xbar - ybar)
                max_pair_gap = max(max_pair_gap, r.gap)
                if viol > v_star:
                    v_star = viol
                    worst = (x, y, names[i], names[j], s1, s2)
    budget = 2.0 * max_pair_gap + 3.0 * tri.max_side_gap()
    passed = bool(v_star <= budget)
    return Cat0Report(
        n_pairs=count,
        v_star=float(v_star),
        budget=float(budget),
        passed=passed,
        worst_pair=(worst[0], worst[1]) if worst else None,
        worst_sides=(worst[2], worst[3]) if worst else None,
        worst_arclengths=(worst[4], worst[5]) if worst else None,
        side_lengths=(l_ab, l_bc, l_ca),
        max_side_gap=tri.max_side_gap(),
        max_pair_gap=max_pair_gap,
        failures=failures,
        scope=scope,
    )


@dataclass
class ConvexityReport:
    n: int
    max_violation: float
    tol: float
    passed: bool

    def as_dict(self):
        return {"n": self.n, "max_violation": self.max_violation,
                "tol": self.tol, "passed": self.passed}


def convexity_check(solver: GeodesicSolver, g1: GeodesicResult,
                    g2: GeodesicResult, n: int) -> ConvexityReport:
    """Midpoint convexity of t -> d(g1(t), g2(t)) in normalized
    rho-arclength (a standard CAT(0) consequence used as a probe)."""
    arc1 = RhoArc(solver.spec, solver.domain, g1.path)
    arc2 = RhoArc(solver.spec, solver.domain, g2.path)
    ts = np.linspace(0.0, 1.0, n + 1)
    f = np.empty(ts.size)
    gap = 0.0
    for idx, t in enumerate(ts):
        x = arc1.point_at(t * arc1.total)
        y = arc2.point_at(t * arc2.total)
        if x == y:
            f[idx] = 0.0
            continue
        r = solver.distance(x, y)
        f[idx] = r.length
        gap = max(gap, r.gap)
    worst = -np.inf
    for i in range(ts.size):
        for j in range(i, ts.size):
            if (i + j) % 2 == 0:
                mid = (i + j) // 2
                worst = max(worst, f[mid] - 0.5 * (f[i] + f[j]))
    tol = 3.0 * gap + 1e-9
    return ConvexityReport(n, float(worst), float(tol), bool(worst <= tol))


def turning_rate(spec: Density, domain: PlaneDomain, poly: Polyline) -> float:
    """max over interior vertices of turning angle per unit rho-length of
    the two adjacent segments (a discrete curvature statistic)."""
    v = poly.vertices
    if v.size < 3:
        return 0.0
    seg = np.diff(v)
    lens = _seg_rho_lengths(spec, domain, v[:-1], v[1:])
    ratio = seg[1:] / seg[:-1]
    ang = np.abs(np.angle(ratio))
    denom = lens[:-1] + lens[1:]
    ok = denom > 0
    return float(np.max(ang[ok] / denom[ok])) if ok.any() else 0.0


@dataclass
class C11Report:
    hs: tuple
    rates: tuple
    bounded: bool
    threshold: float

    def as_dict(self):
        return {"hs": str(self.hs), "rates": str(self.rates),
                "bounded": self.bounded, "threshold": self.threshold}


def c11_probe(spec: Density, domain: PlaneDomain, a, b, hs, *,
              solver_opts=None) -> C11Report:
    """Recompute the geodesic at each grid scale and test that the
    turning-rate statistic stays bounded across the refinement ladder
    (first-derivative Lipschitz behavior shows up as bounded discrete
    curvature)."""
    hs = tuple(sorted((float(h) for h in hs), reverse=True))
    opts = dict(solver_opts or {})
    anchor = opts.pop("anchor", as_complex(a))
    rates = []
    for h in hs:
        solver = GeodesicSolver(spec, domain, h=h, anchor=anchor, **opts)
        r = solver.distance(a, b)
        rates.append(turning_rate(spec, domain, r.path))
    threshold = 1.5 * rates[0] + 1e-9
    bounded = all(L <= threshold for L in rates[1:])
    return C11Report(hs, tuple(rates), bounded, threshold)
