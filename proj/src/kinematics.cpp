#include "kcycle/kinematics.hpp"

#include <Eigen/SVD>
#include <random>

namespace kcycle {

TangentBasis tangent_basis(const KaleidocycleState& state, double threshold) {
  Gauge g{state.n, state.mode, state.c};
  VectorXd x = g.pack(state);
  MatrixXd J = jacobian(g, x);
  Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeFullV);
  VectorXd sv = VectorXd::Zero(g.num_vars());
  sv.head(svd.singularValues().size()) = svd.singularValues();

  double cut = threshold * sv(0);
  int nullity = 0;
  for (int k = 0; k < g.num_vars(); ++k)
    if (sv(k) < cut) ++nullity;

  TangentBasis tb;
  tb.singular_values = sv;
  tb.basis = svd.matrixV().rightCols(nullity);
  return tb;
}

namespace {

// corrector: Gauss-Newton on the residual augmented with the hyperplane row
// t.(y - x_pred) = 0; convergence is judged on the manifold residual only.
// Pinning the motion along t matters beyond tracing: an unconstrained
// projection of x + h*t slides back along the solution curve (the quadratic
// constraints make Newton halve the tangential offset every iteration), which
// silently discards the displacement being probed.
bool correct(const Gauge& g, const VectorXd& x_pred, const VectorXd& t,
             const SolverSettings& s, VectorXd& y_out) {
  VectorXd y = x_pred;
  for (int iter = 0; iter < 60; ++iter) {
    VectorXd r = residual(g, y);
    if (r.lpNorm<Eigen::Infinity>() <= s.tol_residual) {
      y_out = y;
      return true;
    }
    MatrixXd J(g.num_rows() + 1, g.num_vars());
    J.topRows(g.num_rows()) = jacobian(g, y);
    J.bottomRows(1) = t.transpose();
    VectorXd ra(g.num_rows() + 1);
    ra.head(g.num_rows()) = r;
    ra(g.num_rows()) = t.dot(y - x_pred);

    Eigen::BDCSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = s.sv_cutoff * sv(0);
    VectorXd utr = svd.matrixU().transpose() * ra;
    VectorXd z = VectorXd::Zero(sv.size());
    for (int k = 0; k < sv.size(); ++k)
      if (sv(k) > cutoff) z(k) = utr(k) / sv(k);
    VectorXd dy = -(svd.matrixV() * z);

    double f0 = ra.squaredNorm();
    double scale = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      VectorXd y_try = y + scale * dy;
      VectorXd r_try = residual(g, y_try);
      double f_try = r_try.squaredNorm() + std::pow(t.dot(y_try - x_pred), 2);
      if (f_try < f0) {
        y = y_try;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) return false;
  }
  return false;
}

// displacement probe: reach the manifold from x + h*v without losing the
// component along v; fails when no real motion intersects that hyperplane
// (the wall phenomenon)
bool probe_displacement(const Gauge& g, const VectorXd& x, const VectorXd& v,
                        double h, const SolverSettings& s, VectorXd& d_out) {
  VectorXd y;
  if (!correct(g, x + h * v, v, s, y)) return false;
  d_out = y - x;
  return true;
}

}  // namespace

int probe_local_dof(const KaleidocycleState& state, int num_probes,
                    double step_eps, SolverSettings settings,
                    double tangent_threshold) {
  Gauge g{state.n, state.mode, state.c};
  VectorXd x = g.pack(state);
  TangentBasis tb = tangent_basis(state, tangent_threshold);
  if (tb.nullity() == 0) return 0;

  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<VectorXd> displacements;
  for (int p = 0; p < num_probes; ++p) {
    VectorXd w(tb.nullity());
    for (int k = 0; k < w.size(); ++k) w(k) = gauss(rng);
    if (w.norm() < 1e-12) continue;
    VectorXd v = tb.basis * w;
    v.normalize();

    VectorXd d;
    if (!probe_displacement(g, x, v, step_eps, settings, d))
      continue;  // probe failure: no real motion reached
    if (d.dot(v) >= 0.5 * step_eps && d.norm() <= 10.0 * step_eps)
      displacements.push_back(d);
  }
  if (displacements.empty()) return 0;

  MatrixXd D(x.size(), static_cast<int>(displacements.size()));
  for (int k = 0; k < D.cols(); ++k) D.col(k) = displacements[static_cast<size_t>(k)];
  Eigen::JacobiSVD<MatrixXd> svd(D);
  int rank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > 0.25 * step_eps) ++rank;
  return rank;
}

namespace {

// When the null space is larger than the actual motion (common right at a
// feasibility boundary), a single basis column barely overlaps the moving
// direction. Probe each column with a pinned displacement, keep the shortest
// recovered motion (the most tangent-aligned one), then sharpen it by
// re-probing along the recovered direction until it settles.
VectorXd initial_direction(const Gauge& g, const VectorXd& x,
                           const TangentBasis& tb, double step,
                           const SolverSettings& s) {
  VectorXd best;
  double best_len = std::numeric_limits<double>::infinity();
  for (int k = 0; k < tb.nullity(); ++k) {
    VectorXd d;
    if (!probe_displacement(g, x, tb.basis.col(k), step, s, d)) continue;
    double len = d.norm();
    if (len >= 1e-3 * step && len < best_len) {
      best_len = len;
      best = d.normalized();
    }
  }
  if (best.size() == 0)
    throw StallError("trace_rotation: no motion direction found at the start state");

  VectorXd v = best;
  for (int round = 0; round < 8; ++round) {
    VectorXd d;
    if (!probe_displacement(g, x, v, step, s, d)) break;
    if (d.norm() < 1e-3 * step) break;
    VectorXd v_new = d.normalized();
    bool settled = v_new.dot(v) > 0.9999;
    v = v_new;
    if (settled) break;
  }
  return v;
}

}  // namespace

MotionTrace trace_rotation(const KaleidocycleState& start, double step,
                           int max_steps, SolverSettings settings,
                           double tangent_threshold) {
  Gauge g{start.n, start.mode, start.c};
  const VectorXd x0 = g.pack(start);

  MotionTrace trace;
  trace.states.push_back(start);
  trace.arclength.push_back(0.0);

  TangentBasis tb = tangent_basis(start, tangent_threshold);
  VectorXd prev_dir = initial_direction(g, x0, tb, step, settings);

  VectorXd x = x0;
  for (int k = 0; k < max_steps; ++k) {
    KaleidocycleState cur = g.assemble(x);
    tb = tangent_basis(cur, tangent_threshold);
    VectorXd t = tb.basis * (tb.basis.transpose() * prev_dir);
    double align = t.norm();
    if (align < 0.1)
      throw BranchAmbiguity(
          "trace_rotation: tangent nearly orthogonal to previous direction");
    t /= align;

    double h = step;
    bool advanced = false;
    VectorXd y;
    while (h > 1e-8 * step) {
      if (correct(g, x + h * t, t, settings, y) && (y - x).dot(t) >= 0.3 * h) {
        advanced = true;
        break;
      }
      h *= 0.5;
    }
    if (!advanced) throw StallError("trace_rotation: step size collapsed");

    double chord = (y - x).norm();
    prev_dir = (y - x).normalized();
    x = y;
    trace.states.push_back(g.assemble(x));
    trace.arclength.push_back(trace.arclength.back() + chord);

    if (static_cast<int>(trace.states.size()) > 5 && (x - x0).norm() <= step) {
      trace.closed = true;
      break;
    }
  }
  return trace;
}

}  // namespace kcycle
