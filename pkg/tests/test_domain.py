import numpy as np
import pytest

from catmet.domain import (
    Annulus, Disk, FullPlane, HalfPlane, PolygonWithHoles, Punctured,
    PuncturedPlane, Strip, boundary_distance, build_grid, contains,
)
from catmet.errors import DomainError, ResolutionError

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_disk_center_distance():
    assert boundary_distance(Disk(0j, 1.0), 0j) == pytest.approx(1.0)


def test_square_center_distance():
    sq = PolygonWithHoles(UNIT_SQUARE)
    assert boundary_distance(sq, (0.5, 0.5)) == pytest.approx(0.5)


def test_annulus_midway_distance():
    an = Annulus(0j, 1.0, 2.0)
    assert boundary_distance(an, (1.5, 0.0)) == pytest.approx(0.5)


def test_disk_distance_exact_formula():
    d = Disk(1 + 2j, 3.0)
    rng = np.random.default_rng(0)
    z = (1 + 2j) + 2.9 * (rng.random(50) * np.exp(2j * np.pi * rng.random(50)))
    np.testing.assert_allclose(d.boundary_distance(z), 3.0 - np.abs(z - (1 + 2j)),
                               atol=1e-12)


def test_polygon_distance_matches_brute_force():
    poly = PolygonWithHoles([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    rng = np.random.default_rng(1)
    pts = rng.random(40) * 2 + 1j * rng.random(40) * 2
    # brute force: dense boundary sampling
    rings = poly.boundary_rings()
    samples = []
    for ring in rings:
        v = np.asarray(ring)
        for a, b in zip(v, np.roll(v, -1)):
            t = np.linspace(0, 1, 4001)
            samples.append(a + t * (b - a))
    bd = np.concatenate(samples)
    brute = np.min(np.abs(pts[:, None] - bd[None, :]), axis=1)
    exact = poly.boundary_distance(pts)
    # exact distance can only undercut the sampled minimum, by at most
    # the sampling resolution
    assert np.all(exact <= brute + 1e-12)
    assert np.all(brute - exact <= 5e-6)


def test_punctured_plane_distance_is_modulus():
    cp = PuncturedPlane()
    assert boundary_distance(cp, (3.0, 4.0)) == pytest.approx(5.0)
    assert not contains(cp, 0j)
    assert contains(cp, 1 + 0j)


def test_puncture_acts_as_boundary():
    d = Punctured(Disk(0j, 1.0), [0.5 + 0j])
    assert boundary_distance(d, (0.4, 0.0)) == pytest.approx(0.1)
    assert not contains(d, (0.5, 0.0))
    assert contains(d, (0.4, 0.0))


def test_full_plane_delta_undefined():
    with pytest.raises(DomainError, match="unbounded"):
        boundary_distance(FullPlane(), 0j)


def test_contains_examples():
    assert not contains(Disk(0j, 1.0), (2.0, 0.0))
    assert contains(Annulus(0j, 1.0, 2.0), (1.5, 0.0))
    assert not contains(Annulus(0j, 1.0, 2.0), (0.5, 0.0))


def test_halfplane_and_strip():
    up = HalfPlane(1j, 0.0)
    assert contains(up, (0.0, 1.0)) and not contains(up, (0.0, -1.0))
    assert boundary_distance(up, (7.0, 2.0)) == pytest.approx(2.0)
    st = Strip(-1.0, 2.0)
    assert contains(st, 0j) and not contains(st, (2.5, 0.0))
    assert boundary_distance(st, (1.5, 9.0)) == pytest.approx(0.5)


def test_delta_is_one_lipschitz():
    domains = [
        Disk(0j, 1.0),
        Annulus(0j, 0.5, 2.0),
        PolygonWithHoles(UNIT_SQUARE, holes=[[(0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)]]),
        Punctured(Disk(0j, 2.0), [0.3 + 0.1j]),
    ]
    rng = np.random.default_rng(7)
    for dom in domains:
        z = rng.uniform(-2, 2, 200) + 1j * rng.uniform(-2, 2, 200)
        w = rng.uniform(-2, 2, 200) + 1j * rng.uniform(-2, 2, 200)
        dz = dom.boundary_distance(z)
        dw = dom.boundary_distance(w)
        assert np.all(np.abs(dz - dw) <= np.abs(z - w) + 1e-12)


def test_grid_disk_counts():
    g = build_grid(Disk(0j, 1.0), 0.5, 0.0)
    assert g.node_count() == 9
    nodes = g.masked_nodes()
    assert set(np.round(nodes.real, 6)) == {-0.5, 0.0, 0.5}
    g1 = build_grid(Disk(0j, 1.0), 0.5, 0.6)
    assert g1.node_count() == 1
    assert g1.masked_nodes()[0] == 0j


def test_grid_square_counts():
    g = build_grid(PolygonWithHoles(UNIT_SQUARE), 0.25, 0.0)
    assert g.node_count() == 9


def test_grid_mask_monotone_in_margin():
    dom = PolygonWithHoles([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    prev = None
    for m in (0.0, 0.1, 0.2, 0.3):
        g = build_grid(dom, 0.05, m)
        if prev is not None:
            assert np.all(prev.mask | ~g.mask)  # mask(m2) subset of mask(m1)
        prev = g


def test_grid_margin_too_large():
    with pytest.raises(ResolutionError, match="margin too large"):
        build_grid(Disk(0j, 1.0), 0.5, 1.5)


def test_grid_component_anchoring():
    # dumbbell: two squares joined by nothing once the margin eats the neck
    dom = PolygonWithHoles([
        (0, 0), (1, 0), (1, 0.45), (2, 0.45), (2, 0), (3, 0),
        (3, 1), (2, 1), (2, 0.55), (1, 0.55), (1, 1), (0, 1),
    ])
    g = build_grid(dom, 0.05, 0.15, anchor=0.5 + 0.5j)
    nodes = g.masked_nodes()
    assert np.all(nodes.real < 1.0)
    g2 = build_grid(dom, 0.05, 0.15, anchor=2.5 + 0.5j)
    assert np.all(g2.masked_nodes().real > 2.0)


def test_grid_unbounded_needs_bbox():
    with pytest.raises(DomainError, match="bounding box"):
        build_grid(PuncturedPlane(), 0.1, 0.0)
    g = build_grid(PuncturedPlane(), 0.25, 0.1, bbox=(-1, -1, 1, 1))
    assert g.node_count() > 0


def test_grid_nodes_respect_margin_invariant():
    g = build_grid(Annulus(0j, 0.5, 2.0), 0.1, 0.15)
    nodes = g.masked_nodes()
    dom = Annulus(0j, 0.5, 2.0)
    assert np.all(dom.boundary_distance(nodes) > 0.15)
