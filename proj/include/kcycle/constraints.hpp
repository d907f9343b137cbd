#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "kcycle/model.hpp"

namespace kcycle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Gauge-fixed coordinates of Eq-system unknowns: b_0 and b_1 are frozen
/// to remove rigid-motion symmetry, the remaining b_2..b_{n-1} are packed
/// into a flat vector of length 3(n-2).
struct Gauge {
  int n;
  ClosureMode mode;
  double c;

  Vec3 b0() const { return Vec3(0, 0, 1); }
  Vec3 b1() const { return Vec3(0, std::sqrt(1.0 - c * c), c); }

  int num_vars() const { return 3 * (n - 2); }
  int num_rows() const { return 2 * n; }  // 3 closure + (n-1) twist + (n-2) norm

  KaleidocycleState assemble(const VectorXd& x) const;
  VectorXd pack(const KaleidocycleState& state) const;
};

/// Residual rows, in fixed order:
///   [0..2]        closure  sum_{i=1..n} b_{i-1} x b_i
///   [3..n+1]      twist    b_{i-1}.b_i - c   for i = 2..n (wrap per mode)
///   [n+2..2n-1]   norm     b_i.b_i - 1       for i = 2..n-1
VectorXd residual(const Gauge& g, const VectorXd& x);

/// Analytic Jacobian of residual() w.r.t. x, 2n rows by 3(n-2) columns.
MatrixXd jacobian(const Gauge& g, const VectorXd& x);

enum class InitStrategy { Symmetric, PerturbedSymmetric, Random };

InitStrategy parse_strategy(const std::string& name);

/// Deterministic initial guesses.
///  - Symmetric: alternating exact pattern for oriented even n, otherwise a
///    gauge-aligned cone configuration matching the twist constraint.
///  - PerturbedSymmetric: symmetric plus uniform noise of the given amplitude.
///  - Random: each hinge uniform on the sphere.
VectorXd initial_guess(const Gauge& g, InitStrategy strategy, uint64_t seed,
                       double amplitude = 0.1);

/// Mirror across the x=0 plane (the plane spanned by the frozen b_0, b_1).
/// Maps solutions to solutions; preserves |residual|.
VectorXd mirror_x(const VectorXd& x);

}  // namespace kcycle
