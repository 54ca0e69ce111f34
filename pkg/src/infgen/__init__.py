"""Detection of quasi-stationary families of almost-invariant sets in
time-dependent flows via the inflated generator."""

__version__ = "0.1.0"

from .grid import build_grid, median_side_length, longest_domain_extent  # noqa: F401
from .velocity import (switching_double_gyre, load_gridded, write_gridded,  # noqa: F401
                       time_average, median_speed, GriddedVelocity,
                       VelocityField)
from .generator import ulam_generator, averaged_generator, QuadratureSettings  # noqa: F401
from .inflated import (assemble, epsilon_heuristic, epsilon_total,  # noqa: F401
                       a_heuristic, temporal_eigenvalue,
                       discrete_temporal_eigenvalue, temporal_laplacian)
from .spectrum import (leading_eigenpairs, density_eigenpairs, classify,  # noqa: F401
                       almost_invariance_rate, theorem_balance)
from .seba import seba, extract_families  # noqa: F401
from .pipeline import RunConfig, run_pipeline, export_fields  # noqa: F401
