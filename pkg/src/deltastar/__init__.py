"""Zero-range limits of scattering on a three-edge star graph with a scaled potential."""

from .determinants import Convention, DeterminantSet, determinant_set
from .edges import BasisBoundaryData, basis_boundary_data
from .errors import (
    ConfigError,
    DegenerateCoupling,
    DeltaStarError,
    InconsistentClassification,
    InvalidProfile,
    InvalidRange,
    InvariantViolation,
    MalformedConfig,
    NonZeroMean,
    NotResonant,
    SingularSystem,
    UnknownProfile,
)
from .graph import (
    Constant,
    EdgePotential,
    PotentialProfile,
    Sampled,
    Segment,
    builtin_profile,
    integrate_potential,
    parse_profile,
)
from .resonance import (
    CouplingDirection,
    SpectralPoint,
    characteristic_determinant,
    classify_multiplicity,
    coupling_direction,
    find_resonances,
    nearest_resonance,
)
from .scattering import (
    InterfaceMatrices,
    ScatteringMatrix,
    convergence_table,
    eps_smatrix,
    expansion_residual,
    interface_matrices,
    limit_smatrix,
    transmission_sweep,
)

__version__ = "0.1.0"
