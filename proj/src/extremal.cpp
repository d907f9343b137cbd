#include "kcycle/extremal.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kcycle {

namespace {

constexpr double kCap = 1.0 - 1e-6;  // |c| < 1: trivial all-parallel states excluded

// Helpers for the boundary polish, which works on the extended unknown
// y = (x, c) so the fold in c is an ordinary smooth point of F(x,c) = 0.

VectorXd residual_xc(int n, ClosureMode mode, const VectorXd& y) {
  Gauge g{n, mode, y(y.size() - 1)};
  return residual(g, y.head(y.size() - 1));
}

MatrixXd jacobian_xc(int n, ClosureMode mode, const VectorXd& y) {
  const int m = static_cast<int>(y.size()) - 1;
  Gauge g{n, mode, y(m)};
  MatrixXd D(g.num_rows(), m + 1);
  D.leftCols(m) = jacobian(g, y.head(m));
  // dF/dc by central differences; c also enters through the gauged b_1
  const double eps = 1e-7;
  Gauge gp{n, mode, y(m) + eps};
  Gauge gm{n, mode, y(m) - eps};
  D.col(m) = (residual(gp, y.head(m)) - residual(gm, y.head(m))) / (2.0 * eps);
  return D;
}

// minimum-norm Gauss-Newton projection onto F(x,c) = 0 with c free
bool project_xc(int n, ClosureMode mode, VectorXd& y, double tol) {
  for (int iter = 0; iter < 80; ++iter) {
    VectorXd r = residual_xc(n, mode, y);
    if (r.lpNorm<Eigen::Infinity>() <= tol) return true;
    MatrixXd D = jacobian_xc(n, mode, y);
    Eigen::BDCSVD<MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = 1e-10 * sv(0);
    VectorXd utr = svd.matrixU().transpose() * r;
    VectorXd z = VectorXd::Zero(sv.size());
    for (int k = 0; k < sv.size(); ++k)
      if (sv(k) > cutoff) z(k) = utr(k) / sv(k);
    VectorXd dy = -(svd.matrixV() * z);

    double f0 = r.squaredNorm();
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      VectorXd y_try = y + t * dy;
      if (residual_xc(n, mode, y_try).squaredNorm() < f0) {
        y = y_try;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return false;
  }
  return residual_xc(n, mode, y).lpNorm<Eigen::Infinity>() <= tol;
}

// Projected-gradient ascent of dir*c over the solution set of F(x,c) = 0.
// Bisection alone underestimates the boundary: right at the fold the
// fixed-c solves suffer false negatives, while this formulation stays
// well-conditioned because c is one of the unknowns.
double polish_boundary(int n, ClosureMode mode, double dir, VectorXd& y,
                       double tol_residual) {
  const int m = static_cast<int>(y.size()) - 1;
  double h = 1e-3;
  VectorXd snap_prev, snap_cur = y;  // snapshots for geometric extrapolation
  int stagnant = 0;
  for (int iter = 0; iter < 1500; ++iter) {
    MatrixXd D = jacobian_xc(n, mode, y);
    Eigen::BDCSVD<MatrixXd> svd(D, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = 1e-10 * sv(0);
    // project dir*e_c onto the tangent space (row-space complement of D)
    VectorXd d = VectorXd::Zero(m + 1);
    d(m) = dir;
    for (int k = 0; k < sv.size(); ++k)
      if (sv(k) > cutoff) {
        VectorXd vk = svd.matrixV().col(k);
        d -= vk.dot(d) * vk;
      }
    double kkt = d.norm();
    if (kkt < 1e-9) break;
    d /= kkt;

    bool moved = false;
    for (; h > 1e-12; h *= 0.5) {
      VectorXd y_try = y + h * d;
      if (std::abs(y_try(m)) >= kCap) continue;
      if (project_xc(n, mode, y_try, tol_residual) &&
          dir * (y_try(m) - y(m)) > 0.0) {
        double gain = dir * (y_try(m) - y(m));
        y = y_try;
        moved = true;
        h = std::min(2.0 * h, 0.05);
        stagnant = (gain < 1e-12) ? stagnant + 1 : 0;
        break;
      }
    }
    if (!moved || stagnant >= 3) break;

    // plain ascent zigzags through the ill-conditioned transverse modes,
    // so every 10 iterations extrapolate the geometrically converging
    // snapshot sequence and keep the jump if it still projects feasibly
    if ((iter + 1) % 10 == 0) {
      VectorXd delta = y - snap_cur;
      if (snap_prev.size() == y.size()) {
        VectorXd delta_prev = snap_cur - snap_prev;
        double np = delta_prev.norm(), nc = delta.norm();
        if (np > 0 && nc > 0) {
          double cosang = delta.dot(delta_prev) / (np * nc);
          double rho = nc / np;
          if (cosang > 0.9 && rho > 0.1 && rho < 0.98) {
            VectorXd y_acc = y + delta * (rho / (1.0 - rho));
            if (std::abs(y_acc(m)) < kCap &&
                project_xc(n, mode, y_acc, tol_residual) &&
                dir * (y_acc(m) - y(m)) > 0.0) {
              y = y_acc;
            }
          }
        }
      }
      snap_prev = snap_cur;
      snap_cur = y;
    }
  }
  return y(m);
}

}  // namespace

ExtremalResult find_extreme_c(int n, ClosureMode mode, BoundarySide side,
                              double tol_c, const SolverSettings& settings) {
  ExtremalResult res;
  res.n = n;
  res.mode = mode;
  res.side = side;

  auto gauge_at = [&](double c) { return Gauge{n, mode, c}; };
  auto test = [&](double c, const VectorXd* warm) {
    ++res.feasibility_tests;
    return feasible(gauge_at(c), settings, warm);
  };

  // anchor: c = 0 first, then a coarse outward scan
  double anchor = 0.0;
  Feasibility f = test(0.0, nullptr);
  if (!f.feasible) {
    for (double a = 0.1; a <= 0.95 && !f.feasible; a += 0.1) {
      f = test(a, nullptr);
      if (f.feasible) { anchor = a; break; }
      f = test(-a, nullptr);
      if (f.feasible) { anchor = -a; break; }
    }
  }
  if (!f.feasible)
    throw NoFeasibleAnchorError("no feasible c found in coarse scan (n=" +
                                std::to_string(n) + ")");

  const double dir = (side == BoundarySide::Upper) ? 1.0 : -1.0;
  double lo = anchor;  // feasible end
  res.witness = *f.report.state;
  VectorXd witness_x = gauge_at(lo).pack(*f.report.state);

  // march outward until infeasible to establish a bracket
  double hi = lo;
  bool bracketed = false;
  for (double step = 0.1;;) {
    double next = hi + dir * step;
    if (std::abs(next) >= kCap) next = dir * kCap;
    Feasibility fn = test(next, &witness_x);
    if (fn.feasible) {
      hi = next;
      lo = next;
      witness_x = gauge_at(lo).pack(*fn.report.state);
      res.witness = *fn.report.state;
      if (std::abs(next) >= kCap) {
        res.trivial_end = true;
        res.c_n = dir * kCap;
        res.bracket_lo = res.bracket_hi = res.c_n;
        return res;
      }
    } else {
      hi = next;
      bracketed = true;
      break;
    }
  }
  (void)bracketed;

  // bisection; warm-start every probe from the current boundary witness.
  // The warm start makes restarts nearly redundant here, so a reduced
  // multistart budget keeps infeasible probes cheap.
  SolverSettings bisect_settings = settings;
  bisect_settings.num_restarts = std::min(settings.num_restarts, 6);
  auto test_bisect = [&](double c, const VectorXd* warm) {
    ++res.feasibility_tests;
    return feasible(gauge_at(c), bisect_settings, warm);
  };
  while (std::abs(hi - lo) > tol_c) {
    double mid = 0.5 * (lo + hi);
    Feasibility fm = test_bisect(mid, &witness_x);
    if (fm.feasible) {
      lo = mid;
      witness_x = gauge_at(lo).pack(*fm.report.state);
      res.witness = *fm.report.state;
    } else {
      hi = mid;
    }
  }

  // polish the bisection estimate by climbing dir*c along the variety
  VectorXd y(witness_x.size() + 1);
  y.head(witness_x.size()) = witness_x;
  y(witness_x.size()) = lo;
  double c_pol = polish_boundary(n, mode, dir, y, settings.tol_residual);
  if (dir * (c_pol - lo) >= 0.0 && std::abs(c_pol) < kCap &&
      residual_xc(n, mode, y).lpNorm<Eigen::Infinity>() <= settings.tol_residual) {
    lo = c_pol;
    res.witness = Gauge{n, mode, c_pol}.assemble(y.head(witness_x.size()));
  }

  res.c_n = lo;
  res.bracket_lo = std::min({lo, hi});
  res.bracket_hi = std::max({lo, hi});
  return res;
}

std::vector<FeasibilityPoint> scan_feasibility(int n, ClosureMode mode,
                                               const std::vector<double>& c_grid,
                                               const SolverSettings& settings) {
  const int m = static_cast<int>(c_grid.size());
  std::vector<FeasibilityPoint> out(static_cast<size_t>(m));
  std::vector<VectorXd> witnesses(static_cast<size_t>(m));

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < m; ++i) {
    Gauge g{n, mode, c_grid[static_cast<size_t>(i)]};
    Feasibility f = feasible(g, settings);
    out[static_cast<size_t>(i)] = {g.c, f.feasible, f.report.residual_norm};
    if (f.feasible) witnesses[static_cast<size_t>(i)] = g.pack(*f.report.state);
  }

  // serial retry pass: warm-start failures from the nearest feasible point
  for (int i = 0; i < m; ++i) {
    if (out[static_cast<size_t>(i)].feasible) continue;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (!out[static_cast<size_t>(j)].feasible) continue;
      double d = std::abs(c_grid[static_cast<size_t>(j)] - c_grid[static_cast<size_t>(i)]);
      if (d < best_d) { best_d = d; best = j; }
    }
    if (best < 0) continue;
    Gauge g{n, mode, c_grid[static_cast<size_t>(i)]};
    Feasibility f = feasible(g, settings, &witnesses[static_cast<size_t>(best)]);
    if (f.feasible) {
      out[static_cast<size_t>(i)] = {g.c, true, f.report.residual_norm};
      witnesses[static_cast<size_t>(i)] = g.pack(*f.report.state);
    } else if (f.report.residual_norm < out[static_cast<size_t>(i)].min_residual) {
      out[static_cast<size_t>(i)].min_residual = f.report.residual_norm;
    }
  }
  return out;
}

}  // namespace kcycle
