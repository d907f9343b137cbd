#include "kcycle/constraints.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace kcycle {

namespace {

Eigen::Matrix3d skew(const Vec3& a) {
  Eigen::Matrix3d m;
  m << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return m;
}

}  // namespace

KaleidocycleState Gauge::assemble(const VectorXd& x) const {
  KaleidocycleState s;
  s.n = n;
  s.mode = mode;
  s.c = c;
  s.b.resize(static_cast<size_t>(n));
  s.b[0] = b0();
  s.b[1] = b1();
  for (int i = 2; i < n; ++i) s.b[static_cast<size_t>(i)] = x.segment<3>(3 * (i - 2));
  return s;
}

VectorXd Gauge::pack(const KaleidocycleState& state) const {
  VectorXd x(num_vars());
  for (int i = 2; i < n; ++i) x.segment<3>(3 * (i - 2)) = state.b[static_cast<size_t>(i)];
  return x;
}

VectorXd residual(const Gauge& g, const VectorXd& x) {
  const int n = g.n;
  const double s = wrap_sign(g.mode);
  KaleidocycleState st = g.assemble(x);
  const auto& b = st.b;

  VectorXd r(g.num_rows());

  Vec3 closure = Vec3::Zero();
  for (int i = 1; i < n; ++i) closure += b[i - 1].cross(b[i]);
  closure += b[n - 1].cross(s * b[0]);
  r.segment<3>(0) = closure;

  for (int i = 2; i < n; ++i) r(3 + i - 2) = b[i - 1].dot(b[i]) - g.c;
  r(3 + n - 2) = b[n - 1].dot(s * b[0]) - g.c;

  for (int i = 2; i < n; ++i) r(n + 2 + i - 2) = b[i].dot(b[i]) - 1.0;
  return r;
}

MatrixXd jacobian(const Gauge& g, const VectorXd& x) {
  const int n = g.n;
  const double s = wrap_sign(g.mode);
  KaleidocycleState st = g.assemble(x);
  const auto& b = st.b;

  MatrixXd J = MatrixXd::Zero(g.num_rows(), g.num_vars());

  auto col = [](int j) { return 3 * (j - 2); };

  // closure rows: d/db_j (b_{j-1} x b_j + b_j x b_{j+1}) = [b_{j-1}]x - [b_{j+1}]x
  for (int j = 2; j < n; ++j) {
    Vec3 prev = b[j - 1];
    Vec3 next = (j + 1 < n) ? b[j + 1] : Vec3(s * b[0]);
    J.block<3, 3>(0, col(j)) = skew(prev) - skew(next);
  }

  // twist rows i = 2..n
  for (int i = 2; i <= n; ++i) {
    int row = 3 + i - 2;
    if (i - 1 >= 2) J.block<1, 3>(row, col(i - 1)) = b[i < n ? i : 0].transpose() * (i < n ? 1.0 : s);
    if (i < n) J.block<1, 3>(row, col(i)) = b[i - 1].transpose();
  }

  // norm rows i = 2..n-1
  for (int i = 2; i < n; ++i)
    J.block<1, 3>(n + 2 + i - 2, col(i)) = 2.0 * b[i].transpose();

  return J;
}

InitStrategy parse_strategy(const std::string& name) {
  if (name == "symmetric") return InitStrategy::Symmetric;
  if (name == "perturbed-symmetric") return InitStrategy::PerturbedSymmetric;
  if (name == "random") return InitStrategy::Random;
  throw std::invalid_argument("unknown init strategy: " + name);
}

namespace {

// Alternating pattern for oriented even n: even hinges along z, odd hinges
// on the cone b.z = c. Satisfies the whole system exactly for any c.
VectorXd symmetric_alternating(const Gauge& g) {
  const int n = g.n;
  const double rho = std::sqrt(1.0 - g.c * g.c);
  VectorXd x(g.num_vars());
  for (int i = 2; i < n; ++i) {
    Vec3 v;
    if (i % 2 == 0) {
      v = Vec3(0, 0, 1);
    } else {
      int k = i / 2;
      double delta = std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / (n / 2);
      v = Vec3(rho * std::cos(delta), rho * std::sin(delta), g.c);
    }
    x.segment<3>(3 * (i - 2)) = v;
  }
  return x;
}

// Cone ansatz: hinges at constant latitude advancing by a fixed azimuth alpha
// chosen so the wrap convention holds for the azimuth, then rotated into the
// gauge. Twist and norm rows vanish; closure is generally violated and left
// to the solver.
VectorXd symmetric_cone(const Gauge& g) {
  const int n = g.n;
  // admissible azimuth steps for the wrap convention
  double best_alpha = std::numbers::pi;
  double best_cos = -2.0;
  int count = (g.mode == ClosureMode::Oriented) ? n - 1 : n;
  for (int m = (g.mode == ClosureMode::Oriented ? 1 : 0); m < count; ++m) {
    double alpha = (g.mode == ClosureMode::Oriented)
                       ? 2.0 * std::numbers::pi * m / n
                       : std::numbers::pi * (2 * m + 1) / n;
    double ca = std::cos(alpha);
    if (ca <= g.c + 1e-12 && ca > best_cos) {
      best_cos = ca;
      best_alpha = alpha;
    }
  }
  double ca = std::cos(best_alpha);
  double h2 = (g.c - ca) / (1.0 - ca);
  h2 = std::clamp(h2, 0.0, 1.0 - 1e-9);
  double h = std::sqrt(h2);
  double rad = std::sqrt(1.0 - h2);

  std::vector<Vec3> raw(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    raw[static_cast<size_t>(i)] =
        Vec3(rad * std::cos(i * best_alpha), rad * std::sin(i * best_alpha), h);

  // rotate so raw[0] -> (0,0,1) and raw[1] -> (0,sqrt(1-c^2),c)
  Vec3 u1 = raw[0];
  Vec3 v1 = (raw[1] - g.c * u1).normalized();
  Vec3 w1 = u1.cross(v1);
  Eigen::Matrix3d f1;
  f1.col(0) = u1;
  f1.col(1) = v1;
  f1.col(2) = w1;
  Eigen::Matrix3d f2;
  f2.col(0) = Vec3(0, 0, 1);
  f2.col(1) = Vec3(0, 1, 0);
  f2.col(2) = Vec3(0, 0, 1).cross(Vec3(0, 1, 0));
  Eigen::Matrix3d rot = f2 * f1.transpose();

  VectorXd x(g.num_vars());
  for (int i = 2; i < n; ++i)
    x.segment<3>(3 * (i - 2)) = rot * raw[static_cast<size_t>(i)];
  return x;
}

}  // namespace

VectorXd initial_guess(const Gauge& g, InitStrategy strategy, uint64_t seed,
                       double amplitude) {
  switch (strategy) {
    case InitStrategy::Symmetric:
      if (g.mode == ClosureMode::Oriented && g.n % 2 == 0)
        return symmetric_alternating(g);
      return symmetric_cone(g);
    case InitStrategy::PerturbedSymmetric: {
      VectorXd x = initial_guess(g, InitStrategy::Symmetric, seed);
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-amplitude, amplitude);
      for (int k = 0; k < x.size(); ++k) x(k) += u(rng);
      return x;
    }
    case InitStrategy::Random: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      VectorXd x(g.num_vars());
      for (int i = 0; i < g.n - 2; ++i) {
        Vec3 v(gauss(rng), gauss(rng), gauss(rng));
        while (v.norm() < 1e-8) v = Vec3(gauss(rng), gauss(rng), gauss(rng));
        x.segment<3>(3 * i) = v.normalized();
      }
      return x;
    }
  }
  throw std::logic_error("unreachable");
}

VectorXd mirror_x(const VectorXd& x) {
  VectorXd y = x;
  for (int k = 0; k < y.size(); k += 3) y(k) = -y(k);
  return y;
}

}  // namespace kcycle
