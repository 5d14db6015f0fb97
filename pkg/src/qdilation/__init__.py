"""Optimal dilation constants for q-commuting unitaries.

The constant at angle ``theta`` is ``4 / ||u + u* + v + v*||``; this package
computes it at rational angles, builds and verifies explicit dilations,
certifies the matching obstruction, and encloses the constant at irrational
angles through continued-fraction convergents.
"""

__version__ = "0.1.0"

from .angles import (  # noqa: E402
    ContinuedFractionExpansion,
    IntervalEstimate,
    RationalAngle,
    angle_distance,
    convergents,
    make_angle,
    order,
)
from .approx import Enclosure, IrrationalTarget, enclose_constant, enclose_norm, golden, parse_target, silver  # noqa: E402
from .dilation import (  # noqa: E402
    DilationCertificate,
    ObstructionReport,
    StateData,
    build_dilation,
    lower_bound_margin,
    optimal_state,
    verify_certificate,
    weyl_bound_check,
)
from .errors import (  # noqa: E402
    CapacityError,
    ConvergenceError,
    DegenerateStateError,
    DomainError,
    InvalidDenominatorError,
    QDilationError,
    ShapeError,
    SizeError,
)
from .mathieu import (  # noqa: E402
    BandRecord,
    HamiltonianMatrix,
    butterfly,
    dilation_constant,
    farey,
    hamiltonian,
    holder_gap,
    host_norm,
    lipschitz_norm_check,
    spectrum,
)
from .rotrep import (  # noqa: E402
    PhasePair,
    clock_matrix,
    commutation_defect,
    fourier_matrix,
    shift_matrix,
    standard_pair,
    tensor_pair,
)
from .spectral import EigenResult, PeriodicJacobiMatrix, dense_spectrum, nonnegativity_defect, top_eigenpair  # noqa: E402
