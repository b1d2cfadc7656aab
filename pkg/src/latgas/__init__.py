"""Microcanonical entropy numerics for lattice gases with long-range interactions.

The package computes entropy-maximizing occupancy profiles under energy and
particle-density constraints, detects the first-order kink of the entropy
along the curve xi = lambda rho^2, and validates the continuum predictions
against exact enumeration and window-constrained Monte Carlo on finite
lattices.
"""

from .potential import (
    CONSTANT,
    POWER_PLATEAU,
    TABULATED,
    KernelMatrix,
    Potential,
    cell_kernel,
    eval_psi,
    from_config,
    integrated_interaction,
    to_config,
)
from .functional import (
    OccupancyProfile,
    apply_kernel,
    block_average,
    constant_profile,
    density_N,
    entropy_H,
    gradients,
    hbin,
    hbin_prime,
    hbin_second,
    indicator_profile,
    make_profile,
    profile_from_csv,
    profile_to_csv,
    xi,
)
from .lattice import (
    LatticeConfig,
    config_from_text,
    config_to_text,
    energy_density,
    make_config,
    particle_density,
    profile,
    riemann_discrepancy,
)
from .solver import (
    Multipliers,
    SolveResult,
    align_peak,
    check_degenerate_branch,
    classify_branch,
    default_seeds,
    el_fixed_point,
    solve_entropy,
    solve_multipliers,
    solve_result_to_dict,
)
from .transition import (
    FeasibilityProbe,
    TransitionScan,
    convexity_gap_constant,
    feasibility_probe,
    scan_summary_dict,
    scan_to_csv,
    scan_transition,
    spectral_radius,
)
from .ensemble import (
    EnsembleWindow,
    McmcStats,
    compare_profile,
    enumerate_entropy,
    enumeration_record,
    mcmc_sample,
    stats_to_dict,
)

__version__ = "0.1.0"
