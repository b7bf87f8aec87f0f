"""Numerical laboratory for eigenvector overlaps and multi-resolvent
local laws of i.i.d. non-Hermitian random matrices."""

from .blockmat import (E1, E2, EMINUS, EPLUS, F, FSTAR, IDENTITY,
                       BlockMatrix, block, block_traces)
from .dyson import (DysonSolution, SpectralPoint, density, density_profile,
                    fluctuation_scale, m_matrix, quantiles, solve_m,
                    solve_m_batch, support_gap, verify_mde)
from .ensemble import (EnsembleSpec, HermitizedMatrix, IidMatrix,
                       gaussian_divisible, hermitize, load_matrix, ou_step,
                       sample, save_matrix)
from .spectral import (EigenSystem, OverlapReport, SingularSystem,
                       eigensystem, overlap, overlap_decay_statistic,
                       singular_overlap, singular_system)
from .chains import (ResolventFactory, isotropic, reduction_check,
                     resolvent_trace, three_chain_iso, two_chain_avg,
                     ward_residual)
from .stability import (ControlParams, SolvedPoint, StabilityBundle,
                        b12_inverse, control_params, hat_m12,
                        lemma_beta_report, m12, m121, s_operator,
                        stability_apply, stability_eigs,
                        trace_formula_oracle)
from .characteristics import (CharState, Trajectory, flow_backward,
                              flow_forward, flow_state_implicit,
                              integral_identity_check, m12_evolution_check,
                              t_star)
from .experiments import (EXPERIMENTS, ExperimentConfig, ExperimentReport,
                          TrialRecord, config_from_echo, default_config,
                          run_experiment)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
