"""Direct one-step integration of special fourth-order IVPs y⁗ = f(x, y).

The direct methods advance y and its first three derivatives in a single
step, sampling f once per stage; a classical Runge-Kutta integrator applied
to the first-order reduction is included for head-to-head comparison. The
package covers tableau handling (builtins, JSON files, RK conversion),
algebraic order verification, fixed-step integration with evaluation
accounting, benchmark problems with exact solutions, and convergence /
work-precision analysis. See the `rkfd` command-line tool for the same
functionality from the shell.
"""

from ._kernels import (
    BACKEND_CHOICES,
    BACKEND_ENV,
    numba_available,
)
from .tableaux import (
    CONSISTENCY_TOL,
    RkTableau,
    RkfdTableau,
    TableauError,
    TableauFileError,
    builtin_rk4,
    builtin_rkfd4_corrected,
    builtin_rkfd4_printed,
    builtin_rkfd5,
    convert_rk_to_rkfd,
    load_tableau,
    make_rkfd_tableau,
    save_tableau,
)
from .conditions import (
    DEFAULT_TOLERANCE,
    MAX_ORDER,
    ConditionDef,
    ConditionResult,
    OrderReport,
    attained_order,
    condition_catalog,
    evaluate_conditions,
)
from .problems import (
    Ivp4,
    benchmark_problems,
    get_problem,
    poly_problem,
    problem_1,
    problem_2,
    problem_3,
    problem_4,
    problem_5,
    problem_names,
    quadrature_problem,
)
from .integrate import (
    BackendError,
    DivergenceError,
    RunResult,
    State4,
    check_reduction_equivalence,
    rk_integrate_reduced,
    rkfd_integrate,
    rkfd_step,
    step_count,
    write_trajectory_csv,
)
from .analysis import (
    ROUNDOFF_FLOOR,
    THREADS_ENV,
    ConvergenceReport,
    EfficiencyPoint,
    bench,
    convergence_study,
    efficiency_curve,
    local_error_study,
    observed_order,
    render_points_table,
    write_bench_csv,
    write_convergence_csv,
    write_gnuplot_script,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_CHOICES",
    "BACKEND_ENV",
    "CONSISTENCY_TOL",
    "DEFAULT_TOLERANCE",
    "MAX_ORDER",
    "ROUNDOFF_FLOOR",
    "THREADS_ENV",
    "BackendError",
    "ConditionDef",
    "ConditionResult",
    "ConvergenceReport",
    "DivergenceError",
    "EfficiencyPoint",
    "Ivp4",
    "OrderReport",
    "RkTableau",
    "RkfdTableau",
    "RunResult",
    "State4",
    "TableauError",
    "TableauFileError",
    "attained_order",
    "bench",
    "benchmark_problems",
    "builtin_rk4",
    "builtin_rkfd4_corrected",
    "builtin_rkfd4_printed",
    "builtin_rkfd5",
    "check_reduction_equivalence",
    "condition_catalog",
    "convergence_study",
    "convert_rk_to_rkfd",
    "efficiency_curve",
    "evaluate_conditions",
    "get_problem",
    "load_tableau",
    "local_error_study",
    "make_rkfd_tableau",
    "numba_available",
    "observed_order",
    "poly_problem",
    "problem_1",
    "problem_2",
    "problem_3",
    "problem_4",
    "problem_5",
    "problem_names",
    "quadrature_problem",
    "render_points_table",
    "rk_integrate_reduced",
    "rkfd_integrate",
    "rkfd_step",
    "save_tableau",
    "step_count",
    "write_bench_csv",
    "write_convergence_csv",
    "write_gnuplot_script",
    "write_trajectory_csv",
    "__version__",
]
