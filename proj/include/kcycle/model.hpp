#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace kcycle {

using Vec3 = Eigen::Vector3d;

/// Closure convention at the seam of the hinge-direction sequence.
/// Oriented wraps with b_{n+k} = b_k, NonOriented with b_{n+k} = -b_k
/// (a Moebius-like discrete strip).
enum class ClosureMode { Oriented, NonOriented };

inline double wrap_sign(ClosureMode mode) {
  return mode == ClosureMode::Oriented ? 1.0 : -1.0;
}

/// State of a closed hinged linkage: n unit hinge directions b_i,
/// the closure mode and the twist-parameter cosine c = b_{i-1}.b_i.
struct KaleidocycleState {
  int n = 0;
  ClosureMode mode = ClosureMode::NonOriented;
  double c = 0.0;
  std::vector<Vec3> b;

  /// b_i for any integer index, applying the wrap convention.
  Vec3 hinge(int i) const {
    int k = ((i % n) + n) % n;
    // how many full wraps we crossed; each wrap flips sign when non-oriented
    int wraps = (i - k) / n;
    double s = (mode == ClosureMode::NonOriented && (wraps & 1)) ? -1.0 : 1.0;
    return s * b[static_cast<size_t>(k)];
  }
};

/// Closed polygon of hinge centers with its edge vectors e_i = b_i x b_{i+1}.
struct CenterLine {
  std::vector<Vec3> gamma;     // n points, gamma[0] = base
  std::vector<Vec3> segments;  // n edges, cyclic
  Vec3 closure_defect = Vec3::Zero();
};

struct ValidationSummary {
  double unit_norm_defect = 0.0;  // max |b_i.b_i - 1|
  double twist_defect = 0.0;      // max |b_{i-1}.b_i - c|
  double closure_defect = 0.0;    // |sum b_{i-1} x b_i|
  bool valid = false;
  double max_defect() const {
    return std::max({unit_norm_defect, twist_defect, closure_defect});
  }
};

struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Chebychev-Gruebler-Kutzbach mobility M = 6(N-1-n) + sum f_i.
inline long mobility_estimate(long num_bodies, const std::vector<int>& joint_dofs) {
  long sum = 0;
  for (int f : joint_dofs) sum += f;
  return 6 * (num_bodies - 1 - static_cast<long>(joint_dofs.size())) + sum;
}

/// Hinge centers from the cross-product recursion
/// gamma_{i+1} = gamma_i + b_i x b_{i+1}.
/// Throws DegenerateError when consecutive hinges are (near) parallel.
CenterLine gamma_from_b(const KaleidocycleState& state, const Vec3& base = Vec3::Zero());

ValidationSummary validate_state(const KaleidocycleState& state, double tol);

}  // namespace kcycle
