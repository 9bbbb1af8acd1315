"""Optimal generalized measurements on N copies of spin-J pure states.

Construction and verification of weighted pure-state POVMs on the N-copy
symmetric subspace: the SU(2J+1) generator algebra and its symmetric
structure tensor, the generalized Bloch representation with its purity
constraint, the moment-equation optimality system, Monte Carlo fidelity
estimation, a catalog of known minimal solutions with the analytic bounds,
and a randomly restarted least-squares feasibility search.
"""

__version__ = "0.1.0"

from .bloch import (
    BlochVector,
    Spinor,
    bloch_overlap,
    bloch_to_density,
    cubic_quartic_checks,
    cubic_quartic_expected,
    purity_residual,
    spinor_to_bloch,
)
from .catalog import (
    BoundReport,
    conjectured_scaling,
    hypertetrahedron_j1_n2,
    min_projector_bound,
    n3_parity_obstruction,
    tetrahedron_j12_n2,
    von_neumann_povm,
)
from .errors import SpinPovmError
from .montecarlo import (
    FidelityEstimate,
    estimate_average_fidelity,
    run_simulation,
    sample_pure_state,
    simulate_measurement,
    volume_check,
)
from .povm_core import (
    MomentReport,
    Povm,
    analytic_fidelity,
    basiceq_residual,
    completeness_residual,
    equation_count,
    load_povm,
    moment_residuals,
    povm_from_json,
    povm_to_json,
    save_povm,
    verify_povm,
    weight_sum,
)
from .solver import SearchConfig, SearchResult, scan_min_n, search_povm
from .spins import format_spin, parse_spin
from .sun_algebra import (
    GeneratorBasis,
    SymmetricStructureTensor,
    build_d_tensor,
    build_generator_basis,
)

__all__ = [
    "BlochVector",
    "BoundReport",
    "FidelityEstimate",
    "GeneratorBasis",
    "MomentReport",
    "Povm",
    "SearchConfig",
    "SearchResult",
    "Spinor",
    "SpinPovmError",
    "SymmetricStructureTensor",
    "analytic_fidelity",
    "basiceq_residual",
    "bloch_overlap",
    "bloch_to_density",
    "build_d_tensor",
    "build_generator_basis",
    "completeness_residual",
    "conjectured_scaling",
    "cubic_quartic_checks",
    "cubic_quartic_expected",
    "equation_count",
    "estimate_average_fidelity",
    "format_spin",
    "hypertetrahedron_j1_n2",
    "load_povm",
    "min_projector_bound",
    "moment_residuals",
    "n3_parity_obstruction",
    "parse_spin",
    "povm_from_json",
    "povm_to_json",
    "purity_residual",
    "run_simulation",
    "sample_pure_state",
    "save_povm",
    "scan_min_n",
    "search_povm",
    "simulate_measurement",
    "spinor_to_bloch",
    "tetrahedron_j12_n2",
    "verify_povm",
    "volume_check",
    "von_neumann_povm",
    "weight_sum",
]
