"""Gibbs/non-Gibbs dynamical transitions of the Curie-Weiss model under
independent spin-flip dynamics: conditioned large-deviation costs, optimal
magnetization trajectories, bifurcation scenarios, crossover times, and
brute-force / Monte Carlo validation oracles.
"""

from .bifurcation import (BifurcationReport, CrossoverTimes, GibbsTimeline,
                          TangencyBounds, TangencyPoint, TimelineSegment,
                          bad_set, crossover_times, gibbs_timeline, h_star,
                          scenario, t_bifurcation, tangency_F, tangency_bounds,
                          tangency_points, trifurcation_magnetization)
from .cost import (ConditionedCost, CostAuxiliaries, SpecKernel, Trajectory,
                   action_integral, aux, cost, cost_values, optimal_trajectory,
                   spec_kernel, transition_kernel)
from .errors import (ContradictionError, CwgngError, DomainError,
                     EmptyConeError, InsufficientAcceptanceError,
                     NegativeDiscriminantError, QuadratureError,
                     SolverInvariantViolation, TangencyError,
                     TimelineValidationError, TrifurcationNotFound,
                     UnclassifiableError)
from .model import (ModelParams, a_fn, a_prime, b_fn, b_prime, entropy, k_fn,
                    k_prime, k_zeros, l_fn, lagrangian, m_infinity,
                    mean_field_potential, static_rate)
from .oracle import (KernelEstimate, MCConfig, PathDPResult, PathGrid,
                     mc_conditional_initial, mc_evolve, mc_sample_initial,
                     mc_spec_kernel, path_dp)
from .stationary import (BranchTrack, Jump, MinimizerSet, OvershootProfile,
                         StationaryPoint, big_phi, branch_track,
                         branch_velocity, cost_on_branch, eta_first, eta_last,
                         forbidden_cone, global_minimizers, m_one, m_star,
                         overshoot_profile, psi_c, stationary_points, t_first,
                         t_last, t_of_m)

__version__ = "0.1.0"
