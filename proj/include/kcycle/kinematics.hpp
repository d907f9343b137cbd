#pragma once

#include "kcycle/solver.hpp"

namespace kcycle {

struct TangentBasis {
  MatrixXd basis;          // num_vars x nullity, orthonormal columns
  VectorXd singular_values;
  int nullity() const { return static_cast<int>(basis.cols()); }
};

/// Numerical null space of the gauged Jacobian: right singular vectors whose
/// singular value falls below threshold * sigma_max.
TangentBasis tangent_basis(const KaleidocycleState& state, double threshold = 1e-8);

/// Empirical local dimension of the solution set at a state. Steps by
/// step_eps along random tangent directions, re-projects, and counts a
/// direction only when the projected displacement keeps a component of at
/// least step_eps/2 along the probe. At boundary slices this is strictly
/// below the tangent nullity (tangent directions without real motion get
/// filtered out).
int probe_local_dof(const KaleidocycleState& state, int num_probes = 24,
                    double step_eps = 1e-4, SolverSettings settings = {},
                    double tangent_threshold = 1e-4);

struct MotionTrace {
  std::vector<KaleidocycleState> states;
  std::vector<double> arclength;  // cumulative chord length in gauged coordinates
  bool closed = false;
};

struct StallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BranchAmbiguity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pseudo-arclength continuation of the rotating motion within a fixed
/// c-slice: tangent predictor sign-aligned with the previous step, then a
/// Gauss-Newton corrector restricted to the hyperplane orthogonal to the
/// predictor, with adaptive step halving. Stops when the trace returns to
/// the start (closed = true) or after max_steps.
MotionTrace trace_rotation(const KaleidocycleState& start, double step = 0.02,
                           int max_steps = 2000, SolverSettings settings = {},
                           double tangent_threshold = 1e-4);

}  // namespace kcycle
