"""Sparse signal recovery with Subspace Pursuit, plus baselines and RIP tools."""
from .errors import (BudgetError, DimensionError, DomainError, PursuitError,
                     SingularMatrixError)
from .linalg import (ProjectionResult, column_submatrix, correlations,
                     least_squares_solve, project_and_residue)
from .pursuit import (RecoveryOptions, RecoveryResult, l0_bruteforce, omp_recover,
                      sp_recover, sp_recover_approx, top_k_indices)
from .bounds import (compute_c_K, compute_c_prime_K, compute_rho_min, iteration_bound)
from .rip import rip_constant_exact, rip_constants
from .instances import (PerturbationSpec, SparseSignal, apply_perturbation,
                        gen_gaussian_matrix, gen_sparse_signal)

__version__ = "0.1.0"
