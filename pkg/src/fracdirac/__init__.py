"""Fractional Dirac-particle dynamics in a constant electromagnetic field.

Mittag-Leffler functions, field-tensor eigenstructure, closed-form and
asymptotic trajectories, and the grid numerics used to cross-check them.
"""

__version__ = "0.1.0"

from .errors import (
    FracDiracError,
    GridMismatch,
    InvalidOrder,
    InvalidStep,
    NonConvergence,
    NotDiagonalizable,
    ParseError,
    RegionTooSmall,
    ValidationError,
    ZeroEigenvalue,
)
from .mlf import MlOrder, MlResult, SeriesControl, ml_asymptotic, ml_eval, ml_eval_array, ml_half_oracle, ml_series
from .field import (
    EigenStructure,
    FieldConfig,
    build_mixed_tensor,
    eigen_ab,
    invariants,
    lambda_matrix,
    modal_decomposition,
)
from .matrix_mlf import Propagator, matrix_ml_eigen, matrix_ml_series, propagator, semigroup_defect, semigroup_scale
from .dynamics import (
    FractionalOrder,
    InitialState,
    Trajectory,
    classical_solution,
    modal_solution,
    pi_asymptotic,
    solve,
    solve_pi,
    solve_x,
    x_asymptotic,
)
from .numerics import (
    MemoryKernel,
    SampledFunction,
    caputo_l1,
    caputo_pc_solve,
    integral_identity_residual,
    left_inverse_residual,
    rl_integral,
    volterra_apply,
)
