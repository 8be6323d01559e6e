"""Spectral Thompson-sampling control of networked LQG systems.

The package decomposes a symmetric-coupled multi-agent linear system into
decoupled eigen and auxiliary subsystems, learns each subsystem's dynamics
with an episodic Thompson-sampling controller, and benchmarks regret
against the known-model optimum.
"""

from .errors import AssumptionError, ConfigError, DareError, TrajectoryDiverged
from .model import (NetworkModel, build_model, cost_weight_matrices,
                    low_rank_config, mean_field_config, per_step_cost)
from .spectral import SpectralBasis, decompose_coupling, decomposed_cost, project_state
from .riccati import (GainSet, ParamBlock, gains_for, optimal_average_cost,
                      optimal_policy_step, solve_dare, spectral_radius, true_blocks)
from .bayes import (GaussianPosterior, Observation, UncertaintySet, in_set,
                    posterior_update, sample_truncated, select_agent)
from .tsde import Actor, Coordinator, make_actors
from .sim import (ExperimentSpec, TrajectoryResult, checkpoint_grid, run_experiment,
                  run_trajectory, simulate_step)

__version__ = "0.1.0"
