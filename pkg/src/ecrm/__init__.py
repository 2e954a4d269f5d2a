"""Structured prediction by estimated conditional risk minimization.

Train a kernel ridge estimate of the conditional risk of every candidate
output, then predict by minimizing that estimate over a structured output
space: label hierarchies (exact, via max-weight closure), rankings (exact,
via min-cost assignment), network-flow polytopes (Frank-Wolfe and projected
subgradient), or explicit finite sets (enumeration).
"""

from .additive import AdditiveModel, JointKernelSpec, additive_risk, fit_additive, infer_additive
from .analysis import (BoundInputs, SurrogateConfig, bayes_conditional_risk, delta,
                       empirical_surrogate_risk, generalization_bound,
                       generalization_bound_terms, make_surrogate_config, realized_loss,
                       surrogate_loss, surrogate_loss_detailed)
from .assignment import assignment_cost, solve_assignment
from .baselines import knn_local_risk_predict, krr_project_predict
from .closure import solve_hierarchy
from .errors import DataFormatError, EcrmError, NumericalError
from .flow_opt import (enumerate_path_vertices, enumerate_st_paths, fw_min_quadratic,
                       lmo_flow, solve_flow_abs, solve_flow_abs_batch, solve_flow_sq)
from .hierarchy import HierarchyDag
from .inference import brute_force_argmin, infer, infer_from_weights, sign_rule
from .io import Dataset, load_model, save_additive_model, save_model
from .kernels import KernelSpec, eval_kernel, gram_matrix, kernel_vector
from .losses import (LossSpec, additive_coefficients, footrule, hamming,
                     hierarchical_loss, hierarchical_loss_closed, loss_bound,
                     loss_value, sibling_weights, vector_loss)
from .model import TrainedModel, WeightVector, estimate_conditional_risk, fit, weights
from .results import Certificate, InferenceResult, SolverParams
from .simulate import (FlowGeneratorSpec, conditional_sampler, default_flow_network,
                       sample_conditional, simulate_flow_data)
from .spaces import (ConstraintMatrix, FlowNetwork, OutputSpace, assignment_space,
                     assignment_constraint_matrix, enumerate_space, explicit_space,
                     flow_space, hierarchy_constraint_matrix, hierarchy_space,
                     is_feasible, is_totally_unimodular)

__version__ = "0.1.0"
