#include "kcycle/solver.hpp"

#include <Eigen/SVD>

namespace kcycle {

namespace {

double min_segment_norm(const KaleidocycleState& s) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.n; ++i)
    m = std::min(m, s.hinge(i).cross(s.hinge(i + 1)).norm());
  return m;
}

}  // namespace

SolveReport project_to_manifold(const Gauge& g, const VectorXd& x0,
                                const SolverSettings& settings) {
  SolveReport rep;
  VectorXd x = x0;
  VectorXd r = residual(g, x);
  double rn = r.lpNorm<Eigen::Infinity>();

  int slow_iters = 0;
  VectorXd prev_dx;
  for (int iter = 0; iter < settings.max_iters; ++iter) {
    if (rn <= settings.tol_residual) break;

    MatrixXd J = jacobian(g, x);
    Eigen::BDCSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = settings.sv_cutoff * sv(0);
    VectorXd utr = svd.matrixU().transpose() * r;
    VectorXd z = VectorXd::Zero(sv.size());
    for (int k = 0; k < sv.size(); ++k)
      if (sv(k) > cutoff) z(k) = utr(k) / sv(k);
    VectorXd dx = -(svd.matrixV() * z);

    // step-halving line search on |r|^2; accepted steps never increase it
    double f0 = r.squaredNorm();
    double t = settings.damping;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      VectorXd x_try = x + t * dx;
      VectorXd r_try = residual(g, x_try);
      if (r_try.squaredNorm() < f0) {
        x = x_try;
        r = r_try;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    rep.iterations = iter + 1;
    if (!accepted) break;  // stalled at a local minimum of |r|^2

    // near a fold boundary GN converges linearly through a single slow mode;
    // geometric extrapolation along repeated parallel steps skips ahead
    if (t == settings.damping && prev_dx.size() == dx.size()) {
      double np = prev_dx.norm(), nc = dx.norm();
      if (np > 0 && nc > 0) {
        double cosang = dx.dot(prev_dx) / (np * nc);
        double rho = nc / np;
        if (cosang > 0.99 && rho > 0.2 && rho < 0.999) {
          VectorXd x_acc = x + dx * (rho / (1.0 - rho));
          VectorXd r_acc = residual(g, x_acc);
          if (r_acc.squaredNorm() < r.squaredNorm()) {
            x = x_acc;
            r = r_acc;
          }
        }
      }
    }
    prev_dx = dx;

    double rn_new = r.lpNorm<Eigen::Infinity>();
    if (f0 - r.squaredNorm() < 1e-18 * f0 && rn_new > settings.tol_residual) {
      rn = rn_new;
      break;  // negligible progress
    }
    rn = rn_new;
    // give up on iterates stuck near a nonzero local minimum of |r|^2
    slow_iters = (r.squaredNorm() > 0.995 * f0) ? slow_iters + 1 : 0;
    if (slow_iters >= 25 && rn > 1e3 * settings.tol_residual) break;
  }

  rep.residual_norm = rn;
  rep.best_x = x;
  rep.converged = rn <= settings.tol_residual;
  KaleidocycleState st = g.assemble(x);
  if (rep.converged) {
    rep.state = st;
  } else if (min_segment_norm(st) < 1e-6) {
    rep.degenerate = true;
  }
  return rep;
}

SolveReport solve_slice(const Gauge& g, const SolverSettings& settings,
                        const VectorXd* warm_start) {
  SolveReport best;
  auto attempt = [&](const VectorXd& x0, int restart_index) -> bool {
    SolveReport rep = project_to_manifold(g, x0, settings);
    rep.restarts_used = restart_index;
    if (rep.converged) {
      best = rep;
      return true;
    }
    if (rep.residual_norm < best.residual_norm) {
      int iters = best.iterations + rep.iterations;
      best = rep;
      best.iterations = iters;
      best.restarts_used = restart_index;
    } else {
      best.iterations += rep.iterations;
    }
    return false;
  };

  if (warm_start && attempt(*warm_start, 0)) return best;

  int perturbed = std::max(1, settings.num_restarts / 2);
  for (int i = 0; i < settings.num_restarts; ++i) {
    VectorXd x0;
    if (i == 0) {
      x0 = initial_guess(g, InitStrategy::Symmetric, settings.seed);
    } else if (i <= perturbed) {
      x0 = initial_guess(g, InitStrategy::PerturbedSymmetric, settings.seed + i,
                         settings.perturb_amplitude);
    } else {
      x0 = initial_guess(g, InitStrategy::Random, settings.seed + i);
    }
    if (attempt(x0, i)) return best;
  }
  return best;
}

Feasibility feasible(const Gauge& g, const SolverSettings& settings,
                     const VectorXd* warm_start) {
  Feasibility f;
  f.report = solve_slice(g, settings, warm_start);
  f.feasible = f.report.converged;
  return f;
}

}  // namespace kcycle
