"""catmet: conformal metric densities on plane domains — curvature,
geodesics, and CAT(0) comparison checks."""

from .domain import (
    Annulus, Disk, FullPlane, Grid, HalfPlane, PlaneDomain, PolygonWithHoles,
    Punctured, PuncturedPlane, Strip, as_complex, boundary_distance,
    build_grid, contains,
)
from .density import (
    BoundaryPower, Composite, Density, ExpPhi, GridDensity, GridFunction,
    HyperbolicDisk, LogModulusCombo, MaxOfHarmonics, ModulusPower,
    NegLogDelta, PowerAfterShift, QuadraticModulus, Scaled, SphericalCap,
    TablePhi, curvature, eval_density, submean_check, verify_hypotheses,
)
from .smoothing import (
    Mollifier, grid_laplacian, hyperbolic_density_term, lemma_check,
    mollify, sigma_sequence,
)

__version__ = "0.1.0"
