"""First-order homogenization of periodic layered thermodiffusive composites."""
from .cell import CellProblemKind, effective_cell_solver, effective_from_profiles, solve_cell_problems
from .hetero import (
    ComparisonReport,
    MicroGrid,
    MicroSolution,
    compare,
    downscale_first_order,
    run_comparison,
    solve_heterogeneous,
    upscale,
)
from .homogenizer import (
    EffectiveProperties,
    PerturbationProfile,
    ProfileKind,
    effective_constants_biphase,
    effective_constants_isotropic,
    normalize_constants,
    perturbation_profiles_biphase,
)
from .macro import HarmonicLoad, MacroSolution, amplitude_functions, load_for_amplitudes, solve_homogenized
from .materials import (
    Laminate,
    Layer,
    MaterialError,
    PhaseProperties,
    PlaneAssumption,
    biphase_from_ratios,
    dimensionless_ratios,
    make_isotropic_phase,
)

__version__ = "0.1.0"
