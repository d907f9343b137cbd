#pragma once

#include "kcycle/solver.hpp"

namespace kcycle {

enum class BoundarySide { Upper, Lower };

struct ExtremalResult {
  int n = 0;
  ClosureMode mode = ClosureMode::NonOriented;
  BoundarySide side = BoundarySide::Upper;
  double c_n = 0.0;
  KaleidocycleState witness;        // solved at the feasible end of the bracket
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int feasibility_tests = 0;
  bool trivial_end = false;         // feasible all the way to |c| -> 1
};

struct NoFeasibleAnchorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Locates the boundary of the feasible c-range by bisection on the
/// one-sided feasibility predicate. Each test warm-starts from the nearest
/// known witness to suppress false negatives near the singular boundary.
ExtremalResult find_extreme_c(int n, ClosureMode mode, BoundarySide side,
                              double tol_c, const SolverSettings& settings);

struct FeasibilityPoint {
  double c = 0.0;
  bool feasible = false;
  double min_residual = 0.0;
};

/// Feasibility profile over a grid of c values. Cold solves run in parallel;
/// a serial second pass retries failures warm-started from the nearest
/// feasible neighbour, keeping the result deterministic.
std::vector<FeasibilityPoint> scan_feasibility(int n, ClosureMode mode,
                                               const std::vector<double>& c_grid,
                                               const SolverSettings& settings);

}  // namespace kcycle
