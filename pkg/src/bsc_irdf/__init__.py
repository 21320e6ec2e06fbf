"""Indirect rate-distortion function of a Bernoulli source observed through a BSC."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ComplementFlags,
    DegenerateObservationError,
    DomainError,
    InfeasibleDistortionError,
    LogBase,
    RegimeError,
    SolverError,
    SourceModel,
    binary_entropy,
    canonicalize,
    star,
)
from .amended_distortion import (  # noqa: E402
    DistortionTable,
    distortion_table,
    min_distortion,
    simulate_reduction,
    zero_rate_distortion,
)
from .gallager_dual import (  # noqa: E402
    DualSolution,
    appendix_diagnostics,
    dual_lower_bound,
    f_values,
    g,
    irdf,
    rstar_equation_lhs,
    solve_r_star,
    uv,
    w_values,
)
from .closed_forms import (  # noqa: E402
    BoundCurve,
    CurveKind,
    RatePoint,
    convexified_upper_bound,
    delta_ratio,
    direct_rdf,
    slope,
    symmetric_irdf,
    upper_bound,
)
from .ba_oracle import (  # noqa: E402
    BAProblem,
    BAResult,
    ba_fixed_slope,
    ba_rate_at_distortion,
    build_reduced_problem,
)
