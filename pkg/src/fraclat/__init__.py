"""fraclat: lattice discretization of nonlocal variational quantities.

Gagliardo-type seminorms, relative fractional capacities, principal
frequencies, nonlocal perimeters and Cheeger constants, torsion functions,
and the capacitary inradius, on uniform grids in one and two dimensions,
together with the explicit constants of the two-sided frequency bounds and a
verification harness.
"""

__version__ = "0.1.0"

from .params import FracParams, unit_ball_volume
from .shapes import MaskFormatError, ShapeError, parse_shape, read_mask, write_mask
from .lattice import (
    DomainError,
    KernelWeights,
    LatticeDomain,
    LatticeFunction,
    assemble_kernel,
    build_ball_domain,
    build_domain,
    tail_weight,
)
from .energy import (
    EnergyValue,
    average,
    frac_perimeter,
    gagliardo_p,
    lq_norm,
    strip_seminorm_p,
)
from .solvers import (
    MinimizeResult,
    SolverError,
    capacity,
    cheeger,
    frequency,
    local_capacity,
    local_frequency,
    torsion,
    torsion_identity_gap,
)
from .geometry import (
    InradiusResult,
    SearchConfig,
    capacitary_inradius,
    inradius,
    negligible,
)
from .constants import (
    ConstantContext,
    ConstantError,
    asymptotic_probe,
    build_context,
    eval_constant,
    registry_names,
)
from .harness import (
    HarnessConfig,
    VerificationReport,
    parse_config,
    run_suite,
    suite_names,
    sweep,
)

__all__ = [
    "FracParams", "unit_ball_volume",
    "ShapeError", "MaskFormatError", "parse_shape", "read_mask", "write_mask",
    "DomainError", "LatticeDomain", "LatticeFunction", "KernelWeights",
    "build_domain", "build_ball_domain", "assemble_kernel", "tail_weight",
    "EnergyValue", "gagliardo_p", "strip_seminorm_p", "frac_perimeter",
    "lq_norm", "average",
    "MinimizeResult", "SolverError", "capacity", "frequency", "torsion",
    "torsion_identity_gap", "cheeger", "local_frequency", "local_capacity",
    "InradiusResult", "SearchConfig", "inradius", "negligible",
    "capacitary_inradius",
    "ConstantContext", "ConstantError", "eval_constant", "registry_names",
    "build_context", "asymptotic_probe",
    "HarnessConfig", "VerificationReport", "parse_config", "run_suite",
    "suite_names", "sweep",
]
