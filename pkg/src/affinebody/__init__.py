"""Quantized affinely-deformable bodies, reduced to deformation invariants.

The package builds (half-)integer angular momentum matrices and SU(2)
representation matrices, the rotation-vector geometry of SO(3)/SU(2), and the
reduced Schroedinger operators of the affine-affine, metric-affine,
affine-metric, rational ("flat-measure") and unitary-group models, together
with symmetric eigensolvers and the wave-function synthesis / superselection
checks.  hbar = 1 everywhere.
"""

from .spin import (
    SpinLabel,
    SpinMatrices,
    build_spin_matrices,
    pauli_matrices,
    su2_from_rotation_vector,
    rotation_vector_from_su2,
    wigner_d,
    parity_factor,
)
from .rotation import (
    so3_from_rotation_vector,
    rotation_vector_from_so3,
    rotation_series_apply,
    covering_projection,
    killing_metric,
    haar_weight,
    conformal_coordinates,
    generator_coefficients,
    su2_haar_quadrature,
)
from .grids import GridSpec
from .models import (
    ModelKind,
    InertialParams,
    SectorLabel,
    ReducedAmplitude,
    ReducedOperator,
    weight_factor,
    artificial_potential,
    fiber_coupling,
    casimir_constant,
    apply_left_spin,
    apply_right_spin,
    assemble,
    sl_constraint_project,
)
from .planar import (
    PlanarSector,
    PlanarState,
    planar_coordinates,
    planar_coordinates_inverse,
    classical_kinetic,
    planar_quantum_operators,
    discreteness_criterion,
    dalembert_planar,
    coordinate_transforms,
)
from .solver import Spectrum, solve_lowest, weighted_inner_product, convergence_study
from .wavefunc import (
    halfness_validate,
    synthesize,
    degenerate_constraint_check,
    exchange_symmetry_check,
    montecarlo_full_product,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
