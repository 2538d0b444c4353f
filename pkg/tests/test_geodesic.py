import numpy as np
import pytest

from catmet.density import BoundaryPower, ModulusPower
from catmet.domain import Annulus, Disk, PolygonWithHoles, PuncturedPlane, build_grid
from catmet.errors import GeometryError, PathError
from catmet.geodesic import (
    GeodesicSolver, HomotopyClass, Polyline, distance, geodesic_in_class,
    grid_shortest_path, hausdorff_distance, path_length, refine_geodesic,
    stencil_gap_factor, uniqueness_probe, validate_polyline, winding_count,
)

DISK = Disk(0j, 1.0)
CSTAR = PuncturedPlane()
SQUARE = PolygonWithHoles([(0, 0), (1, 0), (1, 1), (0, 1)])
FLAT = BoundaryPower(0.0)
QH_DISK = BoundaryPower(-1)          # 1/(1 - |z|) on the unit disk
QH_CSTAR = ModulusPower(-1)          # 1/|z| on the punctured plane


def cylinder_distance(a, b, extra_turns=0):
    """Quasihyperbolic distance on C_*: log-polar coordinates are a flat
    cylinder, so d = sqrt((dlog r)^2 + (dtheta + 2 pi k)^2)."""
    a, b = complex(a), complex(b)
    dlr = np.log(abs(b) / abs(a))
    dth = np.angle(b) - np.angle(a)
    if extra_turns == 0:
        dth = (dth + np.pi) % (2 * np.pi) - np.pi
    else:
        dth = (dth + np.pi) % (2 * np.pi) - np.pi + 2 * np.pi * extra_turns
    return float(np.hypot(dlr, dth))


# -- path length ---------------------------------------------------------------

def test_path_length_euclidean_segment():
    path = Polyline.from_points([0j, 3 + 4j])
    assert path_length(FLAT, Disk(0j, 10.0), path) == pytest.approx(5.0)


def test_path_length_log_integral_on_cstar():
    path = Polyline.from_points([1 + 0j, 2 + 0j])
    got = path_length(QH_CSTAR, CSTAR, path)
    assert got == pytest.approx(np.log(2.0), abs=1e-10)


def test_path_length_radial_quasihyperbolic_disk():
    path = Polyline.from_points([0j, 0.5 + 0j])
    got = path_length(QH_DISK, DISK, path)
    assert got == pytest.approx(np.log(2.0), abs=1e-10)


def test_path_length_segment_exits_domain():
    path = Polyline.from_points([0.1 + 0.5j, 0.9 + 0.5j])
    holed = PolygonWithHoles([(0, 0), (1, 0), (1, 1), (0, 1)],
                             holes=[[(0.4, 0.3), (0.6, 0.3), (0.6, 0.7), (0.4, 0.7)]])
    with pytest.raises(PathError):
        path_length(FLAT, holed, path)


def test_validate_polyline():
    validate_polyline(DISK, Polyline.from_points([0j, 0.5 + 0.2j]), 0.01)
    # chord cutting across a notch in a nonconvex polygon
    notched = PolygonWithHoles([(0, 0), (2, 0), (2, 1), (1.1, 1), (1.1, 0.2),
                                (0.9, 0.2), (0.9, 1), (0, 1)])
    with pytest.raises(PathError):
        validate_polyline(notched, Polyline.from_points([0.5 + 0.8j, 1.5 + 0.8j]), 0.01)


# -- grid shortest path ----------------------------------------------------------

def test_grid_path_flat_axis_exact():
    grid = build_grid(SQUARE, 1 / 16, 2 / 16)
    r = grid_shortest_path(grid, FLAT, SQUARE, 0.25 + 0.5j, 0.75 + 0.5j)
    assert r.length == pytest.approx(0.5, abs=1e-12)


def test_grid_path_same_point():
    grid = build_grid(SQUARE, 1 / 16, 2 / 16)
    r = grid_shortest_path(grid, FLAT, SQUARE, 0.5 + 0.5j, 0.5 + 0.5j)
    assert r.length == 0.0
    assert r.path.n == 1


def test_grid_path_gap_factor():
    assert stencil_gap_factor(16) == pytest.approx(1 / np.cos(np.pi / 16) - 1)
    grid = build_grid(SQUARE, 1 / 16, 2 / 16)
    r = grid_shortest_path(grid, FLAT, SQUARE, 0.25 + 0.25j, 0.8 + 0.6j)
    assert r.gap == pytest.approx(stencil_gap_factor(16) * r.length)
    # upper bound property vs the straight chord
    assert r.length >= abs(0.8 + 0.6j - (0.25 + 0.25j)) - 1e-12
    assert r.length <= abs(0.8 + 0.6j - (0.25 + 0.25j)) * (1 + stencil_gap_factor(16)) + 2 * 1.5 / 16


def test_grid_path_unreachable():
    # two chambers split by a wall; the slivers above and below it sit
    # well under the margin, so the mask splits into two components
    dom = PolygonWithHoles([
        (0, 0), (1, 0), (1, 1), (0, 1),
    ], holes=[[(0.45, 0.015), (0.55, 0.015), (0.55, 0.985), (0.45, 0.985)]])
    grid = build_grid(dom, 0.02, 0.03, anchor=0.2 + 0.5j)
    nodes = grid.masked_nodes()
    assert nodes.real.max() < 0.45  # only the anchor chamber survives
    with pytest.raises(PathError):
        grid_shortest_path(grid, FLAT, dom, 0.2 + 0.5j, 0.8 + 0.5j)


def test_grid_path_snap_failure():
    grid = build_grid(DISK, 0.05, 0.1)
    with pytest.raises(PathError):
        grid_shortest_path(grid, FLAT, DISK, 0j, 0.999 + 0j)


# -- refinement -------------------------------------------------------------------

def test_refine_zigzag_to_straight():
    rng = np.random.default_rng(5)
    t = np.linspace(0, 1, 33)
    zig = -0.5 + t * 1.0 + 1j * 0.06 * rng.standard_normal(33)
    zig[0], zig[-1] = -0.5, 0.5
    path = Polyline(zig)
    # single-scale relaxation is diffusive: the per-sweep improvement
    # threshold must sit well under the residual the target demands
    r = refine_geodesic(FLAT, DISK, path, margin=0.01, trust=0.05, respace=1 / 32,
                        max_sweeps=4000, tol_geo=1e-12)
    assert r.length == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.diff(r.sweep_lengths) <= 1e-12)  # monotone sweeps


def test_refine_radial_geodesic_quasihyperbolic():
    # bent initialization must collapse onto the radius; length = ln 10
    t = np.linspace(0, 1, 65)
    bent = t * 0.9 + 1j * 0.12 * np.sin(np.pi * t)
    bent[0], bent[-1] = 0, 0.9
    r = refine_geodesic(QH_DISK, DISK, Polyline(bent), margin=1e-3, trust=1 / 128,
                        respace=0.9 / 64, max_sweeps=2000, tol_geo=1e-12)
    assert r.length == pytest.approx(np.log(10.0), abs=1e-6)
    assert np.all(np.diff(r.sweep_lengths) <= 1e-12)


def test_refine_quarter_circle_on_cstar():
    # pure-angle move on the cylinder: d((1,0),(0,1)) = pi/2
    t = np.linspace(0, 1, 65)
    init = (1 - t) * 1.0 + t * 1j  # straight chord, feasible
    r = refine_geodesic(QH_CSTAR, CSTAR, Polyline(init), margin=0.05, trust=0.01,
                        respace=np.pi / 2 / 64, max_sweeps=3000, tol_geo=1e-12)
    assert r.length == pytest.approx(np.pi / 2, abs=1e-4)


# -- distance pipeline ----------------------------------------------------------------

@pytest.fixture(scope="module")
def cstar_solver():
    return GeodesicSolver(QH_CSTAR, CSTAR, h=1 / 64, stencil=16,
                          bbox=(-3.2, -3.2, 3.2, 3.2), anchor=1 + 0j,
                          max_sweeps=120)


def test_distance_cylinder_radial(cstar_solver):
    r = cstar_solver.distance(1 + 0j, complex(np.e, 0))
    assert r.length == pytest.approx(1.0, rel=1e-4)
    assert abs(r.length - 1.0) <= r.gap + 1e-9  # honest gap


def test_distance_cylinder_antipodal(cstar_solver):
    r = cstar_solver.distance(1 + 0j, -1 + 0j)
    assert r.length == pytest.approx(np.pi, rel=1e-3)


def test_distance_quasihyperbolic_disk_radial():
    solver = GeodesicSolver(QH_DISK, DISK, h=1 / 64, anchor=0j)
    r = solver.distance(0j, 0.5 + 0j)
    assert r.length == pytest.approx(np.log(2.0), rel=1e-5)


def test_distance_symmetry_and_triangle(cstar_solver):
    pts = [1 + 0j, 0.8 + 0.9j, -0.4 + 1.2j]
    d = {}
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            if i < j:
                d[i, j] = cstar_solver.distance(a, b)
    ab, bc, ac = d[0, 1], d[1, 2], d[0, 2]
    ba = cstar_solver.distance(pts[1], pts[0])
    assert abs(ab.length - ba.length) <= 2 * (ab.gap + ba.gap) + 1e-6
    assert ac.length <= ab.length + bc.length + 3 * (ab.gap + bc.gap + ac.gap) + 1e-9


def test_distance_identity_and_upper_bound_chain(cstar_solver):
    z = 1.3 + 0.4j
    assert cstar_solver.distance(z, z).length == 0.0
    g = cstar_solver.grid_path(1 + 0j, 2 + 0j)
    r = cstar_solver.distance(1 + 0j, 2 + 0j)
    assert r.length <= g.length + 1e-12


def test_distance_matches_cylinder_oracle_random(cstar_solver):
    rng = np.random.default_rng(11)
    for _ in range(6):
        ra, rb = np.exp(rng.uniform(np.log(0.5), np.log(2), 2))
        ta, tb = rng.uniform(-np.pi, np.pi, 2)
        a, b = ra * np.exp(1j * ta), rb * np.exp(1j * tb)
        want = cylinder_distance(a, b)
        r = cstar_solver.distance(a, b)
        assert r.length == pytest.approx(want, rel=2e-3), (a, b)
        assert r.length - want <= r.gap + 5e-4 * want  # gap honesty


def test_completeness_probe_boundary_divergence():
    # d(0, x) for the quasihyperbolic disk is exactly -log(1 - x): it
    # exceeds any budget as delta -> 0 along the normal ray
    solver = GeodesicSolver(QH_DISK, DISK, h=1 / 128, anchor=0j)
    prev = 0.0
    for x in (0.5, 0.75, 0.9):
        r = solver.distance(0j, x + 0j)
        assert r.length > np.log(1.0 / (1.0 - x)) - 1e-3
        assert r.length > prev
        prev = r.length


# -- homotopy classes --------------------------------------------------------------

def test_winding_count_basics():
    th = np.linspace(0, 2 * np.pi, 100)
    loop = 1.5 * np.exp(1j * th)
    assert winding_count(loop, 0j) == 1
    assert winding_count(loop[::-1], 0j) == -1
    assert winding_count(np.asarray([1 + 0j, 2 + 0j]), 0j) == 0


@pytest.fixture(scope="module")
def class_solver():
    return GeodesicSolver(QH_CSTAR, CSTAR, h=1 / 48, stencil=16,
                          bbox=(-3.1, -3.1, 3.1, 3.1), anchor=1 + 0j,
                          max_sweeps=150)


def test_class_zero_matches_plain_distance(class_solver):
    r0 = class_solver.distance_in_class(1 + 0j, complex(np.e, 0), 0)
    assert r0.length == pytest.approx(1.0, rel=1e-3)
    assert r0.winding == 0


def test_class_one_turn_closed_geodesic(class_solver):
    r = class_solver.distance_in_class(1 + 0j, 1 + 0j, 1)
    assert r.length == pytest.approx(2 * np.pi, rel=1e-3)
    assert r.winding == 1


def test_class_pm_one(class_solver):
    want = np.hypot(1.0, 2 * np.pi)
    for w in (-1, 1):
        r = class_solver.distance_in_class(1 + 0j, complex(np.e, 0), w)
        assert r.length == pytest.approx(want, rel=1e-3), w
        assert r.winding == w


def test_class_zero_trivial_pair(class_solver):
    r = class_solver.distance_in_class(1 + 0j, 1 + 0j, 0)
    assert r.length == 0.0


def test_class_budget_errors(class_solver):
    with pytest.raises(GeometryError):
        class_solver.distance_in_class(1 + 0j, 2 + 0j, 5, budget=2)


def test_class_needs_one_hole():
    solver = GeodesicSolver(QH_DISK, DISK, h=1 / 32, anchor=0j)
    with pytest.raises(GeometryError):
        solver.distance_in_class(0j, 0.5 + 0j, 1)


def test_geodesic_in_class_module_entry():
    r = geodesic_in_class(QH_CSTAR, CSTAR, 1 + 0j, complex(np.e, 0),
                          HomotopyClass((1,)), h=1 / 48,
                          bbox=(-3.1, -3.1, 3.1, 3.1), max_sweeps=150)
    assert r.length == pytest.approx(np.hypot(1.0, 2 * np.pi), rel=1e-3)


def test_annulus_class_distance():
    dom = Annulus(0j, 0.5, 2.0)
    solver = GeodesicSolver(QH_CSTAR, dom, h=1 / 48, anchor=1 + 0j, max_sweeps=150)
    # same cylinder oracle applies while the geodesic stays inside the annulus
    r = solver.distance_in_class(1 + 0j, 1.2 + 0j, 1)
    assert r.length == pytest.approx(np.hypot(np.log(1.2), 2 * np.pi), rel=5e-3)


# -- probes --------------------------------------------------------------------------

def test_uniqueness_probe_simply_connected():
    solver = GeodesicSolver(QH_DISK, DISK, h=1 / 64, anchor=0j, max_sweeps=150)
    rep = uniqueness_probe(solver, -0.5 + 0.1j, 0.55 + 0.2j)
    assert rep["passed"], rep["hausdorff"]


def test_uniqueness_probe_class(class_solver):
    rep = uniqueness_probe(class_solver, 1 + 0j, complex(np.e, 0), winding=1)
    assert rep["passed"], rep["hausdorff"]


def test_hausdorff_distance_simple():
    p1 = Polyline.from_points([0j, 1 + 0j])
    p2 = Polyline.from_points([0.00 + 0.1j, 1 + 0.1j])
    assert hausdorff_distance(p1, p2, 0.01) == pytest.approx(0.1, abs=1e-6)
