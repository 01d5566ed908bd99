"""Admissible subspaces of self-adjoint matrices.

Library layout:

* :mod:`ladm.geometry` - principal angles, subspace arithmetic, tangents;
* :mod:`ladm.spectral` - eigenmodels, cluster envelopes, synthetic spectra;
* :mod:`ladm.admissible` - the admissible class, nearest member, bounds;
* :mod:`ladm.filters` - subspace iteration, Krylov spaces, filter bounds;
* :mod:`ladm.ritz` - Rayleigh-Ritz partition and residual/gap bounds;
* :mod:`ladm.sensitivity` - condition numbers and Hausdorff estimates;
* :mod:`ladm.experiments` - the figure harness behind the ``ladm`` CLI.
"""

from .geometry import (
    AngleProfile,
    NormKind,
    OrthonormalBasis,
    complete_basis,
    orthonormalize,
    principal_angles,
    project_subspace,
    pseudo_inverse,
    sin_theta_max,
    sin_theta_norm,
    tan_theta_norm_bound,
    tangent_matrix,
)
from .spectral import (
    ClusterEnvelope,
    DecaySpec,
    EigenModel,
    SpectrumSpec,
    dominant_basis,
    eigendecompose,
    gaussian_subspace,
    synth_model,
    truncated_eigen,
)
from .admissible import (
    AdmissibleClass,
    DistanceReport,
    distance_bounds,
    invariance_defects,
    is_member,
    lowrank_error_report,
    nearest_admissible,
    perturbed_compression_bounds,
    random_member,
    ritz_value_bounds,
)
from .filters import (
    OversamplingSplit,
    PolynomialFilter,
    chebyshev_filter,
    construct_Hp,
    filtered_distance_bound,
    krylov_subspace,
    sim_iterate,
)
from .ritz import (
    GapReport,
    RitzPartition,
    admissible_distance_bounds,
    compression_report,
    compute_gaps,
    nakatsukasa_bound,
    rayleigh_ritz,
    residual_angle_bounds,
)
from .sensitivity import (
    ConditionReport,
    condition_bounds,
    davis_kahan_distance,
    hausdorff_sampled,
    hausdorff_upper,
    sharp_example,
)

__version__ = "0.1.0"
