"""Polytopic robust forward invariant sets by simplicial boundary deformation."""

from .deformation import (
    DeformationConfig,
    RunSequence,
    keep_or_discard,
    run_deformation,
    vertex_map,
    volume_delta_check,
)
from .dynamics import (
    Box,
    ConstantSignal,
    SinusoidSignal,
    SystemModel,
    VertexPolytope,
    VertexSwitchSignal,
    Zero,
    benchmark,
    estimate_lipschitz,
    hausdorff_distance,
    support_value,
    worst_case_inner_product,
)
from .invariance import (
    SimplexVerdict,
    TestLattice,
    build_lattice,
    certify_simplex,
    lattice_size,
    map_lattice,
    total_ntp,
)
from .meshio import read_cplx, write_cplx
from .simplicial import (
    BoundaryComplex,
    Containment,
    barycentric_coordinates,
    barycentric_subdivision,
    centroidal_subdivision,
    classify_points,
    closed_star,
    containment,
    cube_complex,
    enclosed_volume,
    normal_vector,
    regular_polygon,
    simplex_volume,
    triangulate_convex_polytope,
)
from .verification import (
    FalsifyReport,
    LatticeSeeds,
    RandomBoundarySeeds,
    SimulationConfig,
    falsify,
    integrate,
)

__version__ = "0.1.0"
