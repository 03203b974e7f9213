"""Certified exponential convergence rates for switched systems under
dwell-time switching."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    Monomial,
    Subsystem,
    SubsystemKind,
    SwitchedSystem,
    convex_combination,
    evaluate,
    is_hurwitz,
    jacobian_at_origin,
)
from .errors import (  # noqa: E402
    CertificationError,
    InputError,
    IntegrationError,
    NumericalError,
    SwitchRateError,
)
from .integrate import (  # noqa: E402
    IntegratorConfig,
    Trajectory,
    flow,
    matrix_exponential,
    simulate_switched,
)
from .lyapunov import (  # noqa: E402
    PolynomialForm,
    QuadraticForm,
    check_linearization_lyapunov,
    check_weak_lyapunov,
    estimate_rho,
    h_norm,
    lie_derivative,
    p_norm,
)
from .rates import (  # noqa: E402
    HomogeneousCertificate,
    NonlinearCertificate,
    NonlinearConfig,
    RateFunction,
    beta,
    compute_M,
    compute_nonlinear_certificate,
    m_delta_curve,
    slow_convergence_demo,
    verify_homogeneous_bound,
    verify_nonlinear_bound,
    verify_switching_instants,
)
from .signals import (  # noqa: E402
    SwitchingSignal,
    constant_tail,
    generate_chaotic_like,
    generate_dwell_time,
    generate_regular,
    verify_average_dwell_time,
    verify_dwell_time,
    verify_persistent_dwell_time,
)
from .catalog import cubic_damping_system, example_system  # noqa: E402
