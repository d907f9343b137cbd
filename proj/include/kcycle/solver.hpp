#pragma once

#include <optional>

#include "kcycle/constraints.hpp"

namespace kcycle {

struct SolverSettings {
  double tol_residual = 1e-12;
  int max_iters = 200;
  int num_restarts = 32;
  double damping = 1.0;          // initial step scale for the line search
  uint64_t seed = 0;
  double sv_cutoff = 1e-10;      // relative singular-value cutoff for the pseudo-inverse
  double perturb_amplitude = 0.1;
};

struct SolveReport {
  std::optional<KaleidocycleState> state;
  double residual_norm = std::numeric_limits<double>::infinity();  // max-norm
  int iterations = 0;
  int restarts_used = 0;
  bool converged = false;
  bool degenerate = false;  // iterates entered the parallel-hinge region
  VectorXd best_x;          // best iterate even when not converged
};

/// Damped Gauss-Newton projection onto the solution set of the constraint
/// system at fixed (n, mode, c). Least-squares steps via SVD pseudo-inverse
/// tolerate rank-deficient Jacobians at extreme slices.
SolveReport project_to_manifold(const Gauge& g, const VectorXd& x0,
                                const SolverSettings& settings);

/// Multistart wrapper: symmetric, then perturbed-symmetric, then random
/// initializations, up to num_restarts total. An optional warm start is
/// tried before the schedule.
SolveReport solve_slice(const Gauge& g, const SolverSettings& settings,
                        const VectorXd* warm_start = nullptr);

/// One-sided feasibility: convergence proves the slice is nonempty, failure
/// is evidence (not proof) of infeasibility.
struct Feasibility {
  bool feasible = false;
  SolveReport report;
};

Feasibility feasible(const Gauge& g, const SolverSettings& settings,
                     const VectorXd* warm_start = nullptr);

}  // namespace kcycle
