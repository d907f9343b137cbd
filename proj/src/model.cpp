#include "kcycle/model.hpp"

namespace kcycle {

CenterLine gamma_from_b(const KaleidocycleState& state, const Vec3& base) {
  const int n = state.n;
  if (n < 3) throw std::invalid_argument("gamma_from_b: need at least 3 hinges");
  if (static_cast<int>(state.b.size()) != n)
    throw std::invalid_argument("gamma_from_b: hinge count mismatch");

  CenterLine cl;
  cl.gamma.reserve(n);
  cl.segments.reserve(n);

  // e_i = b_i x b_{i+1}; the seam edge is sign-independent because
  // (-b_0) x (-b_1) = b_0 x b_1.
  for (int i = 0; i < n; ++i) {
    Vec3 e = state.hinge(i).cross(state.hinge(i + 1));
    if (e.norm() < 1e-12)
      throw DegenerateError("gamma_from_b: consecutive hinges are parallel");
    cl.segments.push_back(e);
  }

  Vec3 g = base;
  for (int i = 0; i < n; ++i) {
    cl.gamma.push_back(g);
    g += cl.segments[static_cast<size_t>(i)];
  }
  cl.closure_defect = g - base;
  return cl;
}

ValidationSummary validate_state(const KaleidocycleState& state, double tol) {
  ValidationSummary s;
  const int n = state.n;
  Vec3 closure = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec3& bi = state.b[static_cast<size_t>(i)];
    s.unit_norm_defect = std::max(s.unit_norm_defect, std::abs(bi.dot(bi) - 1.0));
    Vec3 prev = state.hinge(i - 1);
    s.twist_defect = std::max(s.twist_defect, std::abs(prev.dot(bi) - state.c));
    closure += prev.cross(bi);
  }
  s.closure_defect = closure.norm();
  s.valid = s.max_defect() <= tol;
  return s;
}

}  // namespace kcycle
