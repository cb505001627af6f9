"""Parabolic Q1 finite elements with long-time L-infinity(L2) error estimation."""

from .accumulation import (AccumulatorState, DEFAULT_PSET, EstimateReport,
                           LpAccumulator, accumulation_coefficient, lp_update,
                           synthetic_accumulation_study, total_estimate,
                           weighted_min_accumulation)
from .estimators import (ConstantsConfig, EstimatorEngine, EstimatorSample,
                         EtaEvaluator, StepEstimate, eta_residual, reduce_step)
from .harness import ExperimentConfig, run_accumulation_study, run_experiment
from .linalg import (CgError, CoefficientField, SparseOperator, assemble_mass,
                     assemble_stiffness, cg_solve, element_mass_matrix,
                     element_stiffness_matrix)
from .mesh import (DofMap, QuadratureRule, UniformQuadMesh, build_mesh,
                   element_l2_error, interpolate_nodal)
from .operators import DiscreteOperatorSet, assemble_load, discrete_time_derivative
from .timestepping import (SchemeKind, Trajectory, run, step_backward_euler,
                           step_crank_nicolson)
from .verification import (BENCHMARKS, BenchmarkProblem, RunRecord,
                           convergence_rate, effectivity_series,
                           fit_loglog_slope, polynomial_benchmark, run_level,
                           sinusoidal_benchmark, true_error_running_max,
                           zero_benchmark)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
