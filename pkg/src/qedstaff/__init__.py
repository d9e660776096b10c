"""Many-server queues with admission control and retrials in the QED regime."""

from .admission import (
    AdmissionPolicy,
    Bernoulli,
    Delay,
    Loss,
    Series,
    Threshold,
    parse_policy,
)
from .bistability import (
    CarriedTrafficResult,
    L_max,
    L_s_eval,
    figure2_data,
    gamma_hat,
    gamma_hat_inf,
    solve_problem3,
    solve_problem4,
)
from .erlang import erlang_b, erlang_c, f_s, g_s
from .exceptions import (
    ConsistencyError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    NonUniqueRootError,
    StabilityError,
)
from .gaussian import h_inf, hazard, hazard_prime, inverse_hazard
from .performance import DF, DFR, d_f, d_f_r, decomposed_measures, qed_measures, stationary_oracle
from .retrials import solve_a_inf, solve_cohen
from .staffing import (
    StaffingProblem,
    StaffingSolution,
    gap_scan,
    h_inf_F,
    h_inf_F_R,
    solve_exact,
    staff_conventional,
    staff_refined,
)

__version__ = "0.1.0"
