#include "kcycle/observables.hpp"

#include <cmath>
#include <numbers>

namespace kcycle {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

// signed solid angle subtended by segment p3->p4 as seen from segment p1->p2
// (Klenin & Langowski, method 1a)
double segment_pair_solid_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3,
                                const Vec3& p4) {
  Vec3 r12 = p2 - p1, r34 = p4 - p3;
  Vec3 r13 = p3 - p1, r14 = p4 - p1, r23 = p3 - p2, r24 = p4 - p2;

  Vec3 n1 = r13.cross(r14);
  Vec3 n2 = r14.cross(r24);
  Vec3 n3 = r24.cross(r23);
  Vec3 n4 = r23.cross(r13);
  double l1 = n1.norm(), l2 = n2.norm(), l3 = n3.norm(), l4 = n4.norm();
  if (l1 < 1e-14 || l2 < 1e-14 || l3 < 1e-14 || l4 < 1e-14)
    return 0.0;  // coplanar (or touching) pair: zero solid angle
  n1 /= l1; n2 /= l2; n3 /= l3; n4 /= l4;

  double omega = std::asin(clamp1(n1.dot(n2))) + std::asin(clamp1(n2.dot(n3))) +
                 std::asin(clamp1(n3.dot(n4))) + std::asin(clamp1(n4.dot(n1)));
  double sign = (r34.cross(r12)).dot(r13) >= 0 ? 1.0 : -1.0;
  return omega * sign;
}

bool adjacent(int i, int j, int n) {
  int d = std::abs(i - j);
  return d <= 1 || d == n - 1;
}

}  // namespace

double bend_energy_from_segments(const std::vector<Vec3>& segments) {
  const int n = static_cast<int>(segments.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3& a = segments[static_cast<size_t>((i + n - 1) % n)];
    const Vec3& b = segments[static_cast<size_t>(i)];
    double la = a.norm(), lb = b.norm();
    if (la < 1e-12 || lb < 1e-12)
      throw DegenerateError("bend_energy: zero-length segment");
    double ang = std::acos(clamp1(a.dot(b) / (la * lb)));
    sum += ang * ang;
  }
  return sum;
}

double bend_energy(const KaleidocycleState& state) {
  return bend_energy_from_segments(gamma_from_b(state).segments);
}

double coulomb_energy_serial(const std::vector<Vec3>& centers, double alpha) {
  const int n = static_cast<int>(centers.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d = (centers[static_cast<size_t>(i)] - centers[static_cast<size_t>(j)]).norm();
      if (d < 1e-12) throw CoincidentCentersError("coulomb_energy: coincident centers");
      sum += std::pow(d, -alpha);
    }
  }
  return sum;
}

double coulomb_energy(const std::vector<Vec3>& centers, double alpha) {
  const int n = static_cast<int>(centers.size());
  std::vector<double> partial(static_cast<size_t>(n), 0.0);
  bool coincident = false;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = i + 1; j < n; ++j) {
      double d = (centers[static_cast<size_t>(i)] - centers[static_cast<size_t>(j)]).norm();
      if (d < 1e-12) {
        coincident = true;
        continue;
      }
      s += std::pow(d, -alpha);
    }
    partial[static_cast<size_t>(i)] = s;
  }
  if (coincident) throw CoincidentCentersError("coulomb_energy: coincident centers");
  double sum = 0.0;  // fixed-order reduction keeps the result thread-count independent
  for (double p : partial) sum += p;
  return sum;
}

double coulomb_energy(const KaleidocycleState& state, double alpha) {
  return coulomb_energy(gamma_from_b(state).gamma, alpha);
}

double dipole_energy_serial(const std::vector<Vec3>& centers,
                            const std::vector<Vec3>& dipoles) {
  const int n = static_cast<int>(centers.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Vec3 r = centers[static_cast<size_t>(i)] - centers[static_cast<size_t>(j)];
      double d = r.norm();
      if (d < 1e-12) throw CoincidentCentersError("dipole_energy: coincident centers");
      const Vec3& bi = dipoles[static_cast<size_t>(i)];
      const Vec3& bj = dipoles[static_cast<size_t>(j)];
      sum += bi.dot(bj) / (d * d * d) -
             3.0 * bi.dot(r) * bj.dot(r) / (d * d * d * d * d);
    }
  }
  return sum;
}

double dipole_energy(const std::vector<Vec3>& centers,
                     const std::vector<Vec3>& dipoles) {
  const int n = static_cast<int>(centers.size());
  std::vector<double> partial(static_cast<size_t>(n), 0.0);
  bool coincident = false;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = i + 1; j < n; ++j) {
      Vec3 r = centers[static_cast<size_t>(i)] - centers[static_cast<size_t>(j)];
      double d = r.norm();
      if (d < 1e-12) {
        coincident = true;
        continue;
      }
      const Vec3& bi = dipoles[static_cast<size_t>(i)];
      const Vec3& bj = dipoles[static_cast<size_t>(j)];
      s += bi.dot(bj) / (d * d * d) -
           3.0 * bi.dot(r) * bj.dot(r) / (d * d * d * d * d);
    }
    partial[static_cast<size_t>(i)] = s;
  }
  if (coincident) throw CoincidentCentersError("dipole_energy: coincident centers");
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum;
}

double dipole_energy(const KaleidocycleState& state) {
  if (state.mode != ClosureMode::Oriented)
    throw ModeError("dipole_energy: requires an oriented state");
  return dipole_energy(gamma_from_b(state).gamma, state.b);
}

double twist(const KaleidocycleState& state) {
  double closed = state.n * std::acos(clamp1(state.c)) / (2.0 * kPi);
  double sum = 0.0;
  for (int i = 0; i < state.n; ++i)
    sum += std::acos(clamp1(state.hinge(i - 1).dot(state.b[static_cast<size_t>(i)])));
  sum /= 2.0 * kPi;
  if (std::abs(sum - closed) > 1e-8)
    throw std::runtime_error("twist: sum form disagrees with closed form");
  return closed;
}

double writhe_serial(const std::vector<Vec3>& vertices) {
  const int n = static_cast<int>(vertices.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3& p1 = vertices[static_cast<size_t>(i)];
    const Vec3& p2 = vertices[static_cast<size_t>((i + 1) % n)];
    for (int j = i + 1; j < n; ++j) {
      if (adjacent(i, j, n)) continue;
      sum += segment_pair_solid_angle(p1, p2, vertices[static_cast<size_t>(j)],
                                      vertices[static_cast<size_t>((j + 1) % n)]);
    }
  }
  return sum / (2.0 * kPi);
}

double writhe(const std::vector<Vec3>& vertices) {
  const int n = static_cast<int>(vertices.size());
  std::vector<double> partial(static_cast<size_t>(n), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const Vec3& p1 = vertices[static_cast<size_t>(i)];
    const Vec3& p2 = vertices[static_cast<size_t>((i + 1) % n)];
    double s = 0.0;
    for (int j = i + 1; j < n; ++j) {
      if (adjacent(i, j, n)) continue;
      s += segment_pair_solid_angle(p1, p2, vertices[static_cast<size_t>(j)],
                                    vertices[static_cast<size_t>((j + 1) % n)]);
    }
    partial[static_cast<size_t>(i)] = s;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum / (2.0 * kPi);
}

double writhe(const CenterLine& cl) { return writhe(cl.gamma); }

namespace {

// The arccos-based twist is unsigned, so for a left-handed (mirrored)
// configuration the integer 2(Tw+Wr) appears as 2(-Tw+Wr) instead; report
// that case with a negative count.
HalfTwists half_twists_from(double tw, double wr) {
  HalfTwists h;
  double v = 2.0 * (tw + wr);
  h.count = static_cast<int>(std::lround(v));
  h.defect = std::abs(v - h.count);
  if (h.defect > 1e-3) {
    double vm = 2.0 * (-tw + wr);
    double dm = std::abs(vm - std::lround(vm));
    if (dm < h.defect) {
      h.count = static_cast<int>(std::lround(vm));
      h.defect = dm;
    }
  }
  return h;
}

}  // namespace

HalfTwists half_twists(const KaleidocycleState& state) {
  double tw = twist(state);
  double wr = writhe(gamma_from_b(state));
  HalfTwists h = half_twists_from(tw, wr);
  if (h.defect > 1e-3)
    throw IntegralityViolation("half_twists: 2(Tw+Wr) is not near an integer");
  return h;
}

double gauss_area(const CenterLine& cl) {
  const int n = static_cast<int>(cl.segments.size());
  std::vector<Vec3> t(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double l = cl.segments[static_cast<size_t>(i)].norm();
    if (l < 1e-14) throw DegenerateError("gauss_area: zero-length segment");
    t[static_cast<size_t>(i)] = cl.segments[static_cast<size_t>(i)] / l;
  }
  double turning = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3& prev = t[static_cast<size_t>((i + n - 1) % n)];
    const Vec3& cur = t[static_cast<size_t>(i)];
    const Vec3& next = t[static_cast<size_t>((i + 1) % n)];
    if (prev.dot(cur) < -1.0 + 1e-12 || cur.dot(next) < -1.0 + 1e-12)
      throw DegenerateError("gauss_area: antipodal consecutive tangents");
    Vec3 in = prev.cross(cur).cross(cur);
    Vec3 out = cur.cross(next).cross(cur);
    double li = in.norm(), lo = out.norm();
    if (li < 1e-14 || lo < 1e-14) continue;  // collinear arcs: no turning
    in /= li;
    out /= lo;
    turning += std::atan2(in.cross(out).dot(cur), in.dot(out));
  }
  double area = std::fmod(2.0 * kPi - turning, 4.0 * kPi);
  if (area < 0) area += 4.0 * kPi;
  return area;
}

double kirchhoff_energy(const KaleidocycleState& state, double bend_weight,
                        double twist_weight) {
  double a = std::acos(clamp1(state.c));
  return bend_weight * bend_energy(state) + twist_weight * state.n * a * a;
}

ObservableSet compute_observables(const KaleidocycleState& state,
                                  const EnergyParams& params) {
  if (params.dipole && state.mode != ClosureMode::Oriented)
    throw ModeError("observables: dipole energy requires an oriented state");

  CenterLine cl = gamma_from_b(state);
  ObservableSet o;
  o.e_bend = bend_energy_from_segments(cl.segments);
  o.alpha = params.alpha;
  o.e_clmb = coulomb_energy(cl.gamma, params.alpha);
  if (state.mode == ClosureMode::Oriented)
    o.e_dipl = dipole_energy(cl.gamma, state.b);
  o.tw = twist(state);
  o.wr = writhe(cl);
  HalfTwists ht = half_twists_from(o.tw, o.wr);
  o.half_twists = ht.count;
  o.half_twist_defect = ht.defect;
  o.gauss_area = gauss_area(cl);
  return o;
}

}  // namespace kcycle
