"""linklab: convex Brunnian link constructions and numerical certificates."""

from .catalog import (
    CappedSphere,
    GeneratorLoops,
    GreatSpheres,
    Link,
    LoopCurve,
    Membrane,
    bounding_balls,
    build_family,
    bump_membrane,
    cap_upper_half,
    ellipsoid_loop,
    generator_loops,
    great_spheres,
    near_round_coeffs,
)
from .distance import DistanceResult, min_distance
from .geometry import (
    DomainError,
    EmbeddedSphere,
    FlatBall,
    HalfBall,
    ParamPoint,
    SingularInputError,
    embed,
    embed_jacobian,
    reflect_abs,
    retract_complement,
    sample_param,
    stereographic_lift,
    stereographic_project,
)
from .invariants import (
    InconclusiveError,
    IntersectionReport,
    LinkingEstimate,
    RegularValueError,
    SplitCertificate,
    lift_capped,
    linking_number_mc,
    linking_number_preimage,
    separation_parity,
    split_certificate,
    transversal_intersections,
)
from .words import (
    CommutatorCheck,
    MembraneSystem,
    MembraneValidity,
    TransversalityError,
    Word,
    commutator_class_check,
    crossing_word,
    default_membrane_system,
    reduce_word,
    validate_membrane_system,
)

__version__ = "0.1.0"
