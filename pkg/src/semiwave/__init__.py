"""Numerical laboratory for blow-up and lifespan scaling in weakly coupled
semilinear wave systems with space-dependent scattering damping and potentials.

The package is organized around four layers:

* ``exponents``      closed-form critical curves and lifespan-case prediction,
* ``auxfn``          radial mode solutions, the b-ladder, smooth cutoffs,
* ``radial_solver``  explicit finite differences with blow-up detection and
                     a weak-form residual checker,
* ``sweep`` / ``ode_lemma``  epsilon-ladder scaling experiments and the
                     critical-case differential-inequality machinery.

``cli`` exposes everything as the ``semiwave`` command.
"""

__version__ = "0.1.0"

from .auxfn import (
    BFamily,
    BLadderTestFunction,
    CoefficientProfile,
    CutoffSpec,
    CutoffTestFunction,
    DecayingModeTestFunction,
    RadialTable,
    cutoff_eval,
    damping_profile,
    eval_b,
    integral_estimate_check,
    potential_profile,
    solve_mode,
    solve_phi0,
)
from .exponents import (
    CriticalGap,
    ExponentPair,
    LifespanPrediction,
    critical_gap,
    glassey_exponent,
    lifespan_prediction,
    strauss_exponent,
)
from .ode_lemma import LemmaParams, fit_lemma_scaling, integrate_extremal, y_functional
from .radial_solver import (
    GridSpec,
    InitialData,
    RunResult,
    SystemSpec,
    evolve,
    linear_oracle,
    make_initial_data,
    weak_form_residual,
)
from .sweep import (
    FitResult,
    SweepResult,
    SweepSpec,
    damping_effect_report,
    fit_scaling,
    run_sweep,
    upper_bound_check,
)

__all__ = [
    "__version__",
    "BFamily", "BLadderTestFunction", "CoefficientProfile", "CutoffSpec",
    "CutoffTestFunction", "DecayingModeTestFunction", "RadialTable",
    "cutoff_eval", "damping_profile", "eval_b", "integral_estimate_check",
    "potential_profile", "solve_mode", "solve_phi0",
    "CriticalGap", "ExponentPair", "LifespanPrediction", "critical_gap",
    "glassey_exponent", "lifespan_prediction", "strauss_exponent",
    "LemmaParams", "fit_lemma_scaling", "integrate_extremal", "y_functional",
    "GridSpec", "InitialData", "RunResult", "SystemSpec", "evolve",
    "linear_oracle", "make_initial_data", "weak_form_residual",
    "FitResult", "SweepResult", "SweepSpec", "damping_effect_report",
    "fit_scaling", "run_sweep", "upper_bound_check",
]
